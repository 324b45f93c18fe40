//! Seeded random bodies, Orlicz functions and matrices.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Tolerances;
use crate::error::{Error, Result};
use crate::geometry::{validate_body, SupportBody};
use crate::schema::PhiSpec;
use crate::sphere_quad::{build_rule, QuadratureRule};

const REJECTION_BUDGET: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyKind {
    Ball,
    Ellipsoid,
    Polytope,
}

/// Everything that determines a campaign. Two runs with equal configs
/// produce identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub seed: u64,
    pub dim: usize,
    pub trials: usize,
    /// `None` selects the per-dimension default.
    pub resolution: Option<usize>,
    pub body_kinds: Vec<BodyKind>,
    pub radius_range: [f64; 2],
    pub eigenvalue_range: [f64; 2],
    /// Polytopes whose smallest half width falls below this are redrawn.
    pub min_half_width: f64,
    /// `None` sweeps every `i` in `0..dim`.
    pub i_values: Option<Vec<usize>>,
    pub p_values: Vec<f64>,
    pub phis: Vec<PhiSpec>,
    /// Random two-term mixtures drawn per trial.
    pub random_phis: usize,
    pub exponent_range: [f64; 2],
    /// Trials (by index) that also run the first-variation check.
    pub variation_trials: usize,
    pub variation_steps: Vec<f64>,
    /// Trials (by index) that also run the per-node lemma checks and probes.
    pub deep_trials: usize,
    pub continuity_steps: Vec<f64>,
    pub tolerances: Tolerances,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            seed: 0,
            dim: 2,
            trials: 200,
            resolution: None,
            body_kinds: vec![BodyKind::Polytope, BodyKind::Ellipsoid, BodyKind::Ball],
            radius_range: [0.3, 3.0],
            eigenvalue_range: [0.3, 3.0],
            min_half_width: 0.05,
            i_values: None,
            p_values: vec![1.0, 2.0, 3.0],
            phis: vec![
                PhiSpec::Power { p: 1.0 },
                PhiSpec::Power { p: 2.0 },
                PhiSpec::Mixture {
                    weights: vec![0.5, 0.5],
                    exponents: vec![1.0, 3.0],
                },
            ],
            random_phis: 1,
            exponent_range: [1.0, 5.0],
            variation_trials: 20,
            variation_steps: vec![1e-3, 5e-4, 2.5e-4],
            deep_trials: 20,
            continuity_steps: vec![1e-1, 1e-2, 1e-3, 1e-4],
            tolerances: Tolerances::default(),
        }
    }
}

fn check_range(name: &str, r: [f64; 2]) -> Result<()> {
    if r[0].is_finite() && r[1].is_finite() && 0.0 < r[0] && r[0] <= r[1] {
        Ok(())
    } else {
        Err(Error::input(format!("{name} must be a nonempty positive range, got {r:?}")))
    }
}

fn strictly_decreasing(name: &str, steps: &[f64], min_len: usize) -> Result<()> {
    let ok = steps.len() >= min_len
        && steps.iter().all(|e| e.is_finite() && *e > 0.0)
        && steps.windows(2).all(|w| w[1] < w[0]);
    if ok {
        Ok(())
    } else {
        Err(Error::input(format!(
            "{name} must hold at least {min_len} positive decreasing values, got {steps:?}"
        )))
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::input(format!("dim must be ≥ 2, got {}", self.dim)));
        }
        if self.trials == 0 {
            return Err(Error::input("trials must be ≥ 1"));
        }
        if self.body_kinds.is_empty() {
            return Err(Error::input("body_kinds must not be empty"));
        }
        check_range("radius_range", self.radius_range)?;
        check_range("eigenvalue_range", self.eigenvalue_range)?;
        let [lo, hi] = self.exponent_range;
        if !(lo >= 1.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::input(format!(
                "exponent_range must lie in [1, ∞), got {:?}",
                self.exponent_range
            )));
        }
        if let Some(is) = &self.i_values {
            if is.is_empty() {
                return Err(Error::input("i_values must not be empty"));
            }
            if let Some(&i) = is.iter().find(|&&i| i >= self.dim) {
                return Err(Error::IndexOutOfRange { i, n: self.dim });
            }
        }
        for &p in &self.p_values {
            if !(p.is_finite() && p >= 1.0) {
                return Err(Error::input(format!("p must be ≥ 1, got {p}")));
            }
        }
        if self.phis.is_empty() {
            return Err(Error::input("phis must not be empty"));
        }
        for phi in &self.phis {
            phi.univariate()?;
        }
        strictly_decreasing("variation_steps", &self.variation_steps, 2)?;
        strictly_decreasing("continuity_steps", &self.continuity_steps, 2)?;
        let t = &self.tolerances;
        for (name, v) in [
            ("ineq_tol", t.ineq_tol),
            ("id_tol", t.id_tol),
            ("eq_tol", t.eq_tol),
            ("fd_rel_tol", t.fd_rel_tol),
            ("node_tol", t.node_tol),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::input(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }

    pub fn i_sweep(&self) -> Vec<usize> {
        self.i_values
            .clone()
            .unwrap_or_else(|| (0..self.dim).collect())
    }

    pub(crate) fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Coarse rule used only for the polytope rejection test.
fn screening_rule(dim: usize) -> Result<QuadratureRule> {
    match dim {
        2 => build_rule(2, 1024, None),
        3 => build_rule(3, 24, None),
        _ => build_rule(dim, 8192, Some(0)),
    }
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn uniform(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..r[1])
    }
}

/// Body number `index` of the ensemble: a function of `(seed, index)` only.
pub fn random_body(config: &EnsembleConfig, index: u64) -> Result<SupportBody> {
    config.validate()?;
    let n = config.dim;
    let mut rng = config.rng(index);
    let kind = config.body_kinds[rng.random_range(0..config.body_kinds.len())];
    match kind {
        BodyKind::Ball => {
            let center: Vec<f64> = gaussian_vec(&mut rng, n).iter().map(|c| 0.5 * c).collect();
            SupportBody::ball(center, uniform(&mut rng, config.radius_range))
        }
        BodyKind::Ellipsoid => {
            let q = random_rotation(&mut rng, n);
            let eig: Vec<f64> = (0..n)
                .map(|_| uniform(&mut rng, config.eigenvalue_range))
                .collect();
            let shape = q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eig));
            let center: Vec<f64> = gaussian_vec(&mut rng, n).iter().map(|c| 0.5 * c).collect();
            SupportBody::ellipsoid(shape, center)
        }
        BodyKind::Polytope => {
            let rule = screening_rule(n)?;
            for _ in 0..REJECTION_BUDGET {
                let count = rng.random_range(2 * n..=4 * n);
                let vertices: Vec<Vec<f64>> =
                    (0..count).map(|_| gaussian_vec(&mut rng, n)).collect();
                let Ok(body) = SupportBody::polytope(vertices) else {
                    continue;
                };
                let diag = validate_body(&body, &rule)?;
                if !diag.degenerate && diag.min_half_width >= config.min_half_width {
                    return Ok(body);
                }
            }
            Err(Error::Generation(format!(
                "no polytope with half width ≥ {} after {REJECTION_BUDGET} draws (index {index})",
                config.min_half_width
            )))
        }
    }
}

/// Haar-random rotation (determinant +1) from the QR factorization of a
/// Gaussian matrix.
pub fn random_rotation<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Random matrix rescaled to determinant exactly +1 (up to round-off).
pub fn random_special_linear<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    loop {
        let mut g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let det = g.determinant();
        if det.abs() < 1e-3 {
            continue;
        }
        if det < 0.0 {
            g.column_mut(0).neg_mut();
        }
        g /= det.abs().powf(1.0 / n as f64);
        return g;
    }
}

/// Two-term mixture with exponents drawn from `exponent_range`.
pub(crate) fn random_mixture(rng: &mut ChaCha8Rng, range: [f64; 2]) -> PhiSpec {
    let w: f64 = rng.random_range(0.1..0.9);
    let mut exponents = [uniform(rng, range), uniform(rng, range)];
    exponents.sort_by(f64::total_cmp);
    PhiSpec::Mixture {
        weights: vec![w, 1.0 - w],
        exponents: exponents.to_vec(),
    }
}
