//! L_p and Orlicz width additions.
//!
//! The Orlicz sum of widths `b₁, …, b_m` at a direction is the supremum of
//! `λ > 0` with `Σ cⱼ φⱼ(bⱼ/λ) ≤ 1`. Since every `φⱼ` is strictly
//! decreasing, `λ ↦ Σ cⱼ φⱼ(bⱼ/λ)` is continuous and strictly increasing,
//! so the supremum is the unique root of `Σ cⱼ φⱼ(bⱼ/λ) = 1`. In
//! `s = log λ` the function `F(s) = log Σ cⱼ φⱼ(bⱼ e^{−s})` is a log-sum-exp
//! of affine functions for the built-in families, hence convex, and Newton
//! steps started right of the root approach it monotonically. Steps are
//! safeguarded by a sign-change bracket and fall back to bisection.

use crate::error::{Error, Result};
use crate::geometry::MIN_HALF_WIDTH;
use crate::orlicz::{OrliczFunction, OrliczFunctionM, ARG_MAX, ARG_MIN};
use crate::profile::{Provenance, Source, WidthProfile};
use crate::sphere_quad::QuadratureRule;

/// Step (or bracket width) in `log λ` at which the iteration stops.
pub const SOLVER_RTOL: f64 = 1e-12;
pub const SOLVER_MAX_ITER: usize = 200;

/// `|F(s)|` at which the iteration stops early.
const LOG_RESIDUAL_STOP: f64 = 1e-15;
const INITIAL_SPREAD: f64 = 1e6;
const EXPANSION: f64 = 1e3;

/// One summand `c · φ(b/λ)` of the implicit equation.
#[derive(Debug, Clone, Copy)]
pub struct Term<'a> {
    pub phi: &'a OrliczFunction,
    pub coefficient: f64,
    pub width: f64,
}

impl<'a> Term<'a> {
    pub fn new(phi: &'a OrliczFunction, coefficient: f64, width: f64) -> Self {
        Term {
            phi,
            coefficient,
            width,
        }
    }
}

/// `(F(s), F'(s))` for `F(s) = log Σ cⱼ φⱼ(bⱼ e^{−s})`.
fn log_total(terms: &[Term<'_>], log_widths: &[f64], s: f64) -> (f64, f64) {
    let (mut v, mut d) = (0.0, 0.0);
    for (t, lb) in terms.iter().zip(log_widths) {
        if t.coefficient > 0.0 {
            let (pv, pd) = t.phi.eval_log(lb - s);
            v += t.coefficient * pv;
            d += t.coefficient * pd;
        }
    }
    (v.ln(), d / v)
}

fn solver_error(message: String, terms: &[Term<'_>]) -> Error {
    Error::Solver {
        message,
        terms: terms
            .iter()
            .map(|t| (t.phi.to_string(), t.coefficient, t.width))
            .collect(),
    }
}

/// The unique `λ > 0` with `Σ cⱼ φⱼ(bⱼ/λ) = 1`.
pub fn solve_lambda(terms: &[Term<'_>]) -> Result<f64> {
    if terms.is_empty() {
        return Err(Error::input("no terms"));
    }
    if terms
        .iter()
        .any(|t| !(t.coefficient.is_finite() && t.coefficient >= 0.0))
    {
        return Err(solver_error("coefficients must be nonnegative".into(), terms));
    }
    if terms.iter().all(|t| t.coefficient == 0.0) {
        return Err(solver_error("all coefficients are zero".into(), terms));
    }
    if terms
        .iter()
        .any(|t| !(t.width.is_finite() && t.width >= MIN_HALF_WIDTH))
    {
        return Err(solver_error("widths must be ≥ the width threshold".into(), terms));
    }

    let bmin = terms.iter().map(|t| t.width).fold(f64::INFINITY, f64::min);
    let bmax = terms.iter().map(|t| t.width).fold(0.0, f64::max);
    let log_widths: Vec<f64> = terms.iter().map(|t| t.width.ln()).collect();
    let f = |s: f64| log_total(terms, &log_widths, s);
    let mut lo = bmin / INITIAL_SPREAD;
    let mut hi = bmax * INITIAL_SPREAD;

    // Past the clamp range every φ is constant, so a missing sign change
    // there is final.
    while f(lo.ln()).0 >= 0.0 {
        lo /= EXPANSION;
        if bmin / lo > ARG_MAX * EXPANSION {
            return Err(solver_error(
                format!("no sign change: excess ≥ 0 down to λ = {lo:e}"),
                terms,
            ));
        }
    }
    while f(hi.ln()).0 <= 0.0 {
        hi *= EXPANSION;
        if bmax / hi < ARG_MIN / EXPANSION {
            return Err(solver_error(
                format!("no sign change: excess ≤ 0 up to λ = {hi:e}"),
                terms,
            ));
        }
    }

    // At λ = bmax·C^{-1/p_min} (C = Σ cⱼ, taken only when C < 1) every
    // argument is ≤ C^{1/p_min} ≤ 1, so F ≥ 0 there: a start right of the root.
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let total: f64 = terms.iter().map(|t| t.coefficient).sum();
    let p_min = terms
        .iter()
        .filter(|t| t.coefficient > 0.0)
        .map(|t| t.phi.min_exponent())
        .fold(f64::INFINITY, f64::min);
    let mut s = (bmax.ln() + (-total.ln()).max(0.0) / p_min).clamp(a, b);
    for _ in 0..SOLVER_MAX_ITER {
        let (fs, dfs) = f(s);
        if fs.abs() <= LOG_RESIDUAL_STOP {
            return Ok(s.exp());
        }
        if fs < 0.0 {
            a = s;
        } else {
            b = s;
        }
        let mut next = s - fs / dfs;
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if (next - s).abs() <= SOLVER_RTOL || b - a <= SOLVER_RTOL {
            return Ok(next.exp());
        }
        s = next;
    }
    Err(solver_error(
        format!(
            "no convergence in {SOLVER_MAX_ITER} iterations (bracket [{:e}, {:e}])",
            a.exp(),
            b.exp()
        ),
        terms,
    ))
}

fn check_dims(profiles: &[&WidthProfile]) -> Result<usize> {
    let dim = profiles[0].dim();
    for p in profiles {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
    }
    Ok(dim)
}

/// `+_φ(K₁, …, K_m)` for a separable `φ = Σ cⱼ φⱼ`.
pub fn orlicz_width_sum(phi: &OrliczFunctionM, operands: &[WidthProfile]) -> Result<WidthProfile> {
    if operands.len() < 2 {
        return Err(Error::input(format!(
            "Orlicz width sum needs at least 2 operands, got {}",
            operands.len()
        )));
    }
    if phi.arity() != operands.len() {
        return Err(Error::input(format!(
            "φ has arity {} but {} operands were given",
            phi.arity(),
            operands.len()
        )));
    }
    let dim = check_dims(&operands.iter().collect::<Vec<_>>())?;
    let terms = phi
        .parts()
        .iter()
        .zip(phi.coefficients())
        .zip(operands)
        .map(|((f, c), p)| (f.clone(), *c, p.clone()))
        .collect();
    Ok(WidthProfile::new(dim, Provenance::OrliczSum, Source::Orlicz(terms)))
}

/// `+_φ(K, L, α, β)`: solves `α φ₁(b_K/λ) + β φ₂(b_L/λ) = 1` per direction.
///
/// `(α, β) = (1, 0)` returns `K` itself.
pub fn orlicz_linear_combination(
    phi1: &OrliczFunction,
    phi2: &OrliczFunction,
    k: &WidthProfile,
    l: &WidthProfile,
    alpha: f64,
    beta: f64,
) -> Result<WidthProfile> {
    let dim = check_dims(&[k, l])?;
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::input(format!("{name} must be nonnegative, got {v}")));
        }
    }
    if alpha + beta <= 0.0 {
        return Err(Error::input("alpha and beta must not both be zero"));
    }
    if beta == 0.0 && alpha == 1.0 {
        return Ok(k.clone());
    }
    let mut terms = Vec::with_capacity(2);
    if alpha > 0.0 {
        terms.push((phi1.clone(), alpha, k.clone()));
    }
    if beta > 0.0 {
        terms.push((phi2.clone(), beta, l.clone()));
    }
    Ok(WidthProfile::new(
        dim,
        Provenance::LinearCombination,
        Source::Orlicz(terms),
    ))
}

/// `K +_φ ε·L`.
pub fn orlicz_perturbation(
    phi1: &OrliczFunction,
    phi2: &OrliczFunction,
    k: &WidthProfile,
    l: &WidthProfile,
    eps: f64,
) -> Result<WidthProfile> {
    orlicz_linear_combination(phi1, phi2, k, l, 1.0, eps)
}

/// `K +_p L`, `b^{-p} = b_K^{-p} + b_L^{-p}` in closed form.
pub fn lp_width_sum(p: f64, k: &WidthProfile, l: &WidthProfile) -> Result<WidthProfile> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::input(format!("p must be ≥ 1, got {p}")));
    }
    let dim = check_dims(&[k, l])?;
    Ok(WidthProfile::new(
        dim,
        Provenance::LpSum,
        Source::Lp {
            p,
            k: k.clone(),
            l: l.clone(),
        },
    ))
}

/// Largest implicit-equation residual over the nodes of `rule` (0 for
/// profiles that are not solver-backed).
pub fn max_residual(profile: &WidthProfile, rule: &QuadratureRule) -> Result<f64> {
    Ok(profile
        .residuals(rule)?
        .map(|r| r.into_iter().fold(0.0, f64::max))
        .unwrap_or(0.0))
}
