//! Admissible Orlicz functions.
//!
//! `Φ` is the class of convex, strictly decreasing `φ: (0, ∞) → (0, ∞)` with
//! `φ(0⁺) = ∞`, `φ(∞) = 0` and `φ(1) = 1`. `Φ_m` holds the m-variate
//! analogues used by Orlicz width addition; only the separable members
//! `φ(x) = Σ cⱼ φⱼ(xⱼ)` are built in.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Arguments are clamped into this range before exponentiation; `φ(0)` is
/// reported as `φ(ARG_MIN)`.
pub const ARG_MIN: f64 = 1e-12;
pub const ARG_MAX: f64 = 1e12;

const INVERSE_RTOL: f64 = 1e-12;
const MAX_BISECTIONS: usize = 200;

/// Raw descriptor of a univariate function. No class checks are applied;
/// see [`OrliczFunction`] for the admissible wrapper.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Family {
    /// `t^{-p}`
    Power { p: f64 },
    /// `Σ wᵢ t^{-pᵢ}`
    Mixture { weights: Vec<f64>, exponents: Vec<f64> },
}

impl Family {
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(ARG_MIN, ARG_MAX);
        match self {
            Family::Power { p } => neg_pow(t, *p),
            Family::Mixture { weights, exponents } => weights
                .iter()
                .zip(exponents)
                .map(|(w, p)| w * neg_pow(t, *p))
                .sum(),
        }
    }
}

impl Family {
    /// `(φ(t), −t φ'(t))` at `t = e^{lt}`, with `lt` clamped like `t`.
    /// Past the clamp `φ` is constant and the derivative is 0.
    #[inline]
    pub(crate) fn eval_log(&self, lt: f64) -> (f64, f64) {
        let clamped = !(LN_ARG_MIN..=LN_ARG_MAX).contains(&lt);
        let lt = lt.clamp(LN_ARG_MIN, LN_ARG_MAX);
        let (v, d) = match self {
            Family::Power { p } => {
                let v = (-p * lt).exp();
                (v, p * v)
            }
            Family::Mixture { weights, exponents } => weights.iter().zip(exponents).fold(
                (0.0, 0.0),
                |(v, d), (w, p)| {
                    let e = w * (-p * lt).exp();
                    (v + e, d + p * e)
                },
            ),
        };
        (v, if clamped { 0.0 } else { d })
    }

    /// Smallest exponent of the family.
    pub(crate) fn min_exponent(&self) -> f64 {
        match self {
            Family::Power { p } => *p,
            Family::Mixture { exponents, .. } => exponents.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

const LN_ARG_MIN: f64 = -27.631021115928547;
const LN_ARG_MAX: f64 = 27.631021115928547;

#[inline]
fn neg_pow(t: f64, p: f64) -> f64 {
    if p == 1.0 {
        1.0 / t
    } else if p == 2.0 {
        1.0 / (t * t)
    } else if p.fract() == 0.0 && p.abs() < 64.0 {
        t.powi(-(p as i32))
    } else {
        t.powf(-p)
    }
}

/// A member of `Φ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct OrliczFunction {
    family: Family,
}

impl OrliczFunction {
    /// Applies the class gate: every exponent ≥ 1 and mixture weights
    /// positive, summing to 1.
    pub fn new(family: Family) -> Result<Self> {
        match &family {
            Family::Power { p } => check_exponent(*p)?,
            Family::Mixture { weights, exponents } => {
                if weights.is_empty() || weights.len() != exponents.len() {
                    return Err(Error::input(format!(
                        "mixture needs matching nonempty weights and exponents ({} vs {})",
                        weights.len(),
                        exponents.len()
                    )));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(Error::input(format!(
                        "mixture weights must be positive, got {weights:?}"
                    )));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::input(format!(
                        "mixture weights must sum to 1, got {total}"
                    )));
                }
                for p in exponents {
                    check_exponent(*p)?;
                }
            }
        }
        Ok(OrliczFunction { family })
    }

    pub fn power(p: f64) -> Result<Self> {
        Self::new(Family::Power { p })
    }

    pub fn mixture(weights: Vec<f64>, exponents: Vec<f64>) -> Result<Self> {
        Self::new(Family::Mixture { weights, exponents })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Power exponent when the function is `t^{-p}`.
    pub fn as_power(&self) -> Option<f64> {
        match self.family {
            Family::Power { p } => Some(p),
            _ => None,
        }
    }

    pub(crate) fn eval_log(&self, lt: f64) -> (f64, f64) {
        self.family.eval_log(lt)
    }

    pub(crate) fn min_exponent(&self) -> f64 {
        self.family.min_exponent()
    }

    /// True when the function is strictly convex (every built-in family is).
    pub fn is_strictly_convex(&self) -> bool {
        true
    }

    /// `φ(t)` for `t ≥ 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::input(format!("φ is defined on [0, ∞), got {t}")));
        }
        Ok(self.family.eval(t))
    }

    #[inline]
    pub(crate) fn eval_raw(&self, t: f64) -> f64 {
        self.family.eval(t)
    }

    /// The unique `t` with `φ(t) = y`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(y.is_finite() && y > 0.0) {
            return Err(Error::input(format!("φ⁻¹ needs y > 0, got {y}")));
        }
        if y == 1.0 {
            return Ok(1.0);
        }
        match &self.family {
            Family::Power { p } => {
                let t = y.powf(-1.0 / p);
                if !(ARG_MIN..=ARG_MAX).contains(&t) {
                    return Err(Error::Domain(format!("φ⁻¹({y}) = {t} outside clamp range")));
                }
                Ok(t)
            }
            Family::Mixture { .. } => self.inverse_by_bisection(y),
        }
    }

    fn inverse_by_bisection(&self, y: f64) -> Result<f64> {
        // φ decreasing: φ(lo) > y > φ(hi)
        let (mut lo, mut hi) = (1.0, 1.0);
        while self.eval_raw(lo) <= y {
            lo /= 2.0;
            if lo < ARG_MIN {
                return Err(Error::Domain(format!("φ⁻¹({y}): no bracket above {ARG_MIN}")));
            }
        }
        while self.eval_raw(hi) >= y {
            hi *= 2.0;
            if hi > ARG_MAX {
                return Err(Error::Domain(format!("φ⁻¹({y}): no bracket below {ARG_MAX}")));
            }
        }
        for _ in 0..MAX_BISECTIONS {
            let mid = (lo * hi).sqrt();
            if self.eval_raw(mid) > y {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) <= INVERSE_RTOL * hi {
                break;
            }
        }
        Ok((lo * hi).sqrt())
    }

    /// `(φ)'_r(1)`, from the closed form of the family.
    pub fn right_derivative_at_one(&self) -> f64 {
        match &self.family {
            Family::Power { p } => -p,
            Family::Mixture { weights, exponents } => {
                -weights.iter().zip(exponents).map(|(w, p)| w * p).sum::<f64>()
            }
        }
    }
}

/// One-sided forward-difference estimate of `(φ)'_r(1)`, Richardson
/// extrapolated over `h ∈ {1e-4, 5e-5, 2.5e-5}`.
pub fn numeric_right_derivative_at_one<F: Fn(f64) -> f64>(phi: F) -> f64 {
    let f1 = phi(1.0);
    let d = |h: f64| (phi(1.0 + h) - f1) / h;
    let (d1, d2, d3) = (d(1e-4), d(5e-5), d(2.5e-5));
    let r1 = 2.0 * d2 - d1;
    let r2 = 2.0 * d3 - d2;
    (4.0 * r2 - r1) / 3.0
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::input(format!("exponent must be ≥ 1, got {p}")))
    }
}

impl fmt::Display for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Power { p } => write!(f, "power(p={p})"),
            Family::Mixture { weights, exponents } => {
                write!(f, "mixture(w={weights:?}, p={exponents:?})")
            }
        }
    }
}

/// A separable member of `Φ_m`: `φ(x₁, …, x_m) = Σ cⱼ φⱼ(xⱼ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrliczFunctionM {
    parts: Vec<OrliczFunction>,
    coefficients: Vec<f64>,
}

impl OrliczFunctionM {
    /// `Σ φⱼ(xⱼ)`, the member used by Orlicz width addition.
    pub fn sum_of(parts: Vec<OrliczFunction>) -> Result<Self> {
        let m = parts.len();
        Self::weighted(parts, vec![1.0; m])
    }

    pub fn weighted(parts: Vec<OrliczFunction>, coefficients: Vec<f64>) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::input(format!(
                "m-variate function needs arity ≥ 2, got {}",
                parts.len()
            )));
        }
        if coefficients.len() != parts.len() {
            return Err(Error::input(format!(
                "{} coefficients for {} parts",
                coefficients.len(),
                parts.len()
            )));
        }
        if coefficients.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::input(format!(
                "coefficients must be nonnegative, got {coefficients:?}"
            )));
        }
        if coefficients.iter().all(|c| *c == 0.0) {
            return Err(Error::input("at least one coefficient must be positive"));
        }
        Ok(OrliczFunctionM {
            parts,
            coefficients,
        })
    }

    pub fn arity(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[OrliczFunction] {
        &self.parts
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// True for the plain sum (all coefficients 1), the `Φ_m` member proper.
    pub fn is_unit_sum(&self) -> bool {
        self.coefficients.iter().all(|c| *c == 1.0)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.arity() {
            return Err(Error::DimensionMismatch {
                expected: self.arity(),
                found: x.len(),
            });
        }
        if x.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::input(format!("φ is defined on [0, ∞)^m, got {x:?}")));
        }
        Ok(self.eval_raw(x))
    }

    pub(crate) fn eval_raw(&self, x: &[f64]) -> f64 {
        self.parts
            .iter()
            .zip(&self.coefficients)
            .zip(x)
            .map(|((f, c), v)| c * f.eval_raw(*v))
            .sum()
    }
}

/// Anything that can be checked for `Φ`/`Φ_m` membership on a grid.
pub trait PhiLike {
    fn arity(&self) -> usize;
    fn eval_point(&self, x: &[f64]) -> f64;
}

impl PhiLike for Family {
    fn arity(&self) -> usize {
        1
    }
    fn eval_point(&self, x: &[f64]) -> f64 {
        self.eval(x[0])
    }
}

impl PhiLike for OrliczFunction {
    fn arity(&self) -> usize {
        1
    }
    fn eval_point(&self, x: &[f64]) -> f64 {
        self.eval_raw(x[0])
    }
}

impl PhiLike for OrliczFunctionM {
    fn arity(&self) -> usize {
        self.parts.len()
    }
    fn eval_point(&self, x: &[f64]) -> f64 {
        self.eval_raw(x)
    }
}

/// Outcome of [`validate_phi`], one flag per class condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiDiagnostics {
    pub decreasing: bool,
    pub convex: bool,
    /// `φ(1) = 1`, or `φ(e_j) = 1` for every `j` in the m-variate case.
    pub normalized: bool,
    /// Large at the lower grid end, small at the upper end.
    pub limits: bool,
    pub worst_normalization_error: f64,
}

impl PhiDiagnostics {
    pub fn all_pass(&self) -> bool {
        self.decreasing && self.convex && self.normalized && self.limits
    }
}

const GRID_LO: f64 = 1e-6;
const GRID_HI: f64 = 1e6;
const CONVEXITY_SLACK: f64 = 1e-12;
const NORMALIZATION_TOL: f64 = 1e-12;

/// Numerical class check on a log-spaced grid over `[1e-6, 1e6]`.
///
/// For m-variate functions each coordinate is swept with the others held
/// at the clamp ceiling (where every part has decayed to ~0), and `φ(e_j)`
/// is taken as `φ(ARG_MAX, …, 1, …, ARG_MAX)`.
pub fn validate_phi<F: PhiLike + ?Sized>(f: &F, grid_size: usize) -> Result<PhiDiagnostics> {
    if grid_size < 16 {
        return Err(Error::input(format!("grid size must be ≥ 16, got {grid_size}")));
    }
    let m = f.arity();
    let grid: Vec<f64> = (0..grid_size)
        .map(|k| {
            let s = k as f64 / (grid_size - 1) as f64;
            (GRID_LO.ln() + s * (GRID_HI.ln() - GRID_LO.ln())).exp()
        })
        .collect();
    let at = |j: usize, t: f64| {
        let mut x = vec![ARG_MAX; m];
        x[j] = t;
        f.eval_point(&x)
    };

    let mut decreasing = true;
    let mut limits = true;
    let mut worst = 0.0f64;
    for j in 0..m {
        let vals: Vec<f64> = grid.iter().map(|t| at(j, *t)).collect();
        decreasing &= vals.windows(2).all(|w| w[0] > w[1]);
        limits &= vals[0] >= 1e3 && vals[grid_size - 1] <= 1e-3;
        worst = worst.max((at(j, 1.0) - 1.0).abs());
    }

    // Midpoint convexity on seeded random pairs in log space.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut convex = true;
    for _ in 0..(4 * grid_size) {
        let s: Vec<f64> = (0..m).map(|_| log_uniform(&mut rng)).collect();
        let t: Vec<f64> = (0..m).map(|_| log_uniform(&mut rng)).collect();
        let mid: Vec<f64> = s.iter().zip(&t).map(|(a, b)| 0.5 * (a + b)).collect();
        let lhs = f.eval_point(&mid);
        let rhs = 0.5 * (f.eval_point(&s) + f.eval_point(&t));
        if lhs > rhs + CONVEXITY_SLACK * rhs.max(1.0) {
            convex = false;
        }
    }

    Ok(PhiDiagnostics {
        decreasing,
        convex,
        normalized: worst <= clamp_tolerance(f),
        limits,
        worst_normalization_error: worst,
    })
}

// With the other arguments at ARG_MAX, each part contributes at most
// ARG_MAX^{-1}; allow that on top of round-off.
fn clamp_tolerance<F: PhiLike + ?Sized>(f: &F) -> f64 {
    if f.arity() == 1 {
        NORMALIZATION_TOL
    } else {
        NORMALIZATION_TOL + (f.arity() - 1) as f64 / ARG_MAX * 2.0
    }
}

fn log_uniform(rng: &mut ChaCha8Rng) -> f64 {
    let s: f64 = rng.random_range(GRID_LO.ln()..GRID_HI.ln());
    s.exp()
}
