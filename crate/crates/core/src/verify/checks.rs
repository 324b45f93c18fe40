//! Individual inequality, identity and probe checks.

use nalgebra::DMatrix;

use super::{similar_width_detect, CheckInputs, CheckKind, CheckReport, Status, Tolerances};
use crate::addition::{lp_width_sum, max_residual, orlicz_perturbation, orlicz_width_sum};
use crate::error::{Error, Result};
use crate::functionals::{
    ith_mixed_width, lp_mixed_width, mixed_width_integral, orlicz_mixed_width, width_integral,
    width_measure_weights,
};
use crate::geometry::{linear_image, Direction, SupportBody};
use crate::orlicz::{OrliczFunction, OrliczFunctionM};
use crate::profile::WidthProfile;
use crate::schema::PhiSpec;
use crate::sphere_quad::{
    QuadratureRule, RuleKind, DEFAULT_RESOLUTION_2D,
};

/// Resolution at which rotation invariance is asserted.
pub fn covariance_resolution(dim: usize, resolution: usize) -> usize {
    match dim {
        2 => resolution.max(DEFAULT_RESOLUTION_2D),
        3 => resolution.max(COVARIANCE_RESOLUTION_3D),
        _ => resolution,
    }
}

const COVARIANCE_RESOLUTION_3D: usize = 384;

/// Allowed relative change of a rotation-invariant functional when the
/// bodies are rotated but the rule is not. Kinks of polytope widths move
/// between nodes, so this is the rule's error on piecewise-smooth
/// integrands: `O(h²)` on the circle (pinned at 1e-8 for the default
/// resolution) and `O(1/N)` on the sphere.
pub fn rotation_tolerance(rule: &QuadratureRule) -> f64 {
    let d = rule.descriptor();
    let res = d.resolution as f64;
    match d.kind {
        RuleKind::CircleTrapezoid => 1e-8 * (DEFAULT_RESOLUTION_2D as f64 / res).max(1.0).powi(2),
        RuleKind::SphereProductGauss => 10.0 / (res * res),
        RuleKind::MonteCarlo => 5.0 / res.sqrt(),
    }
}

/// Polynomial extrapolation to `h = 0` through `(h[k], v[k])` (Neville).
pub(crate) fn extrapolate_to_zero(h: &[f64], v: &[f64]) -> f64 {
    let mut t = v.to_vec();
    for level in 1..t.len() {
        for k in (level..t.len()).rev() {
            let (hk, hj) = (h[k], h[k - level]);
            t[k] = (hj * t[k] - hk * t[k - 1]) / (hj - hk);
        }
    }
    t[t.len() - 1]
}

fn monotone(v: &[f64]) -> bool {
    let up = v.windows(2).all(|w| w[1] >= w[0]);
    let down = v.windows(2).all(|w| w[1] <= w[0]);
    up || down
}

/// `ln(eᵃ + eᵇ)` without overflow.
fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `u ↦ c·b(u)`.
pub(crate) fn scaled_profile(profile: &WidthProfile, c: f64) -> WidthProfile {
    let p = profile.clone();
    WidthProfile::from_fn(profile.dim(), move |u| {
        p.eval(&Direction::from_unit(u.to_vec()))
            .map_or(f64::NAN, |b| c * b)
    })
}

/// `u ↦ b(u) + δ`.
fn shifted_profile(profile: &WidthProfile, delta: f64) -> WidthProfile {
    let p = profile.clone();
    WidthProfile::from_fn(profile.dim(), move |u| {
        p.eval(&Direction::from_unit(u.to_vec()))
            .map_or(f64::NAN, |b| b + delta)
    })
}

/// Profiles of `K`, `L` and their images under one unimodular map.
pub(crate) struct LinearImages {
    k: WidthProfile,
    l: WidthProfile,
    ak: WidthProfile,
    al: WidthProfile,
    orthogonal: bool,
}

/// Runs checks against one rule with one set of tolerances.
#[derive(Debug, Clone, Copy)]
pub struct Checker<'a> {
    rule: &'a QuadratureRule,
    covariance_rule: Option<&'a QuadratureRule>,
    tol: Tolerances,
    trial: Option<usize>,
}

impl<'a> Checker<'a> {
    pub fn new(rule: &'a QuadratureRule, tol: Tolerances) -> Self {
        Checker {
            rule,
            covariance_rule: None,
            tol,
            trial: None,
        }
    }

    /// Evaluates [`Checker::probe_linear_covariance`] on `rule` instead of
    /// the main rule.
    pub fn with_covariance_rule(self, rule: &'a QuadratureRule) -> Self {
        Checker {
            covariance_rule: Some(rule),
            ..self
        }
    }

    /// Tags every report with a trial index.
    pub fn for_trial(self, trial: usize) -> Self {
        Checker {
            trial: Some(trial),
            ..self
        }
    }

    pub fn rule(&self) -> &QuadratureRule {
        self.rule
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    fn inputs(&self, i: Option<usize>, p: Option<f64>, phi: &[&OrliczFunction]) -> CheckInputs {
        CheckInputs {
            trial: self.trial,
            i,
            p,
            phi: phi.iter().map(|f| PhiSpec::from(*f)).collect(),
            rule: *self.rule.descriptor(),
        }
    }

    fn inequality(
        &self,
        check: &str,
        (lhs, rhs, slack): (f64, f64, f64),
        similar: bool,
        inputs: CheckInputs,
    ) -> CheckReport {
        let pass = slack >= -self.tol.ineq_tol;
        CheckReport {
            check: check.to_string(),
            kind: CheckKind::Inequality,
            lhs,
            rhs,
            slack,
            pass,
            status: if pass { Status::Pass } else { Status::Fail },
            equality_case: similar && slack.abs() < self.tol.eq_tol,
            inputs,
            note: None,
        }
    }

    fn identity(&self, check: &str, lhs: f64, rhs: f64, tol: f64, inputs: CheckInputs) -> CheckReport {
        let diff = (lhs - rhs).abs();
        let pass = diff <= tol;
        CheckReport {
            check: check.to_string(),
            kind: CheckKind::Identity,
            lhs,
            rhs,
            slack: -diff,
            pass,
            status: if pass { Status::Pass } else { Status::Fail },
            equality_case: false,
            inputs,
            note: None,
        }
    }

    fn probe(&self, check: &str, lhs: f64, rhs: f64, inputs: CheckInputs, note: String) -> CheckReport {
        CheckReport {
            check: check.to_string(),
            kind: CheckKind::Probe,
            lhs,
            rhs,
            slack: 0.0,
            pass: true,
            status: Status::Probe,
            equality_case: false,
            inputs,
            note: Some(note),
        }
    }

    fn similar(&self, k: &WidthProfile, l: &WidthProfile) -> Result<bool> {
        similar_width_detect(k, l, self.rule, self.tol.eq_tol)
    }

    fn codim(&self, i: usize) -> Result<f64> {
        let n = self.rule.dim();
        if i >= n {
            return Err(Error::IndexOutOfRange { i, n });
        }
        Ok((n - i) as f64)
    }

    /// `A_i(K,L)^{n−i} ≤ A_i(K)^{n−i−1} A_i(L)`.
    pub fn check_minkowski_i(&self, k: &WidthProfile, l: &WidthProfile, i: usize) -> Result<CheckReport> {
        let e = self.codim(i)?;
        let akl = ith_mixed_width(k, l, i, self.rule)?;
        let ak = width_integral(k, i, self.rule)?;
        let al = width_integral(l, i, self.rule)?;
        let slack = (e - 1.0) * ak.ln() + al.ln() - e * akl.ln();
        Ok(self.inequality(
            "minkowski_mixed_width",
            (akl.powf(e), ak.powf(e - 1.0) * al, slack),
            self.similar(k, l)?,
            self.inputs(Some(i), None, &[]),
        ))
    }

    /// `A_{−p,i}(K,L)^{n−i} ≥ A_i(K)^{n−i+p} A_i(L)^{−p}`.
    pub fn check_lp_minkowski(
        &self,
        k: &WidthProfile,
        l: &WidthProfile,
        p: f64,
        i: usize,
    ) -> Result<CheckReport> {
        let e = self.codim(i)?;
        let apl = lp_mixed_width(k, l, p, i, self.rule)?;
        let ak = width_integral(k, i, self.rule)?;
        let al = width_integral(l, i, self.rule)?;
        let slack = e * apl.ln() - (e + p) * ak.ln() + p * al.ln();
        Ok(self.inequality(
            "lp_minkowski",
            (apl.powf(e), ak.powf(e + p) * al.powf(-p), slack),
            self.similar(k, l)?,
            self.inputs(Some(i), Some(p), &[]),
        ))
    }

    /// `A_i(K +_p L)^{−p/(n−i)} ≥ A_i(K)^{−p/(n−i)} + A_i(L)^{−p/(n−i)}`.
    pub fn check_lp_brunn_minkowski(
        &self,
        k: &WidthProfile,
        l: &WidthProfile,
        p: f64,
        i: usize,
    ) -> Result<CheckReport> {
        let e = self.codim(i)?;
        let sum = lp_width_sum(p, k, l)?;
        let m = width_integral(&sum, i, self.rule)?;
        let ak = width_integral(k, i, self.rule)?;
        let al = width_integral(l, i, self.rule)?;
        let q = p / e;
        let slack = -q * m.ln() - log_sum_exp(-q * ak.ln(), -q * al.ln());
        Ok(self.inequality(
            "lp_brunn_minkowski",
            (m.powf(-q), ak.powf(-q) + al.powf(-q), slack),
            self.similar(k, l)?,
            self.inputs(Some(i), Some(p), &[]),
        ))
    }

    /// `A_{φ,i}(K,L) ≥ A_i(K) φ((A_i(L)/A_i(K))^{1/(n−i)})`, log slack.
    pub fn check_orlicz_minkowski(
        &self,
        phi: &OrliczFunction,
        k: &WidthProfile,
        l: &WidthProfile,
        i: usize,
    ) -> Result<CheckReport> {
        let e = self.codim(i)?;
        let lhs = orlicz_mixed_width(phi, k, l, i, self.rule)?;
        let ak = width_integral(k, i, self.rule)?;
        let al = width_integral(l, i, self.rule)?;
        let rhs = ak * phi.eval((al / ak).powf(1.0 / e))?;
        Ok(self.inequality(
            "orlicz_minkowski",
            (lhs, rhs, lhs.ln() - rhs.ln()),
            self.similar(k, l)?,
            self.inputs(Some(i), None, &[phi]),
        ))
    }

    /// `A_{φ,i}(K,L)/A_i(K) = ∫ φ(b_L/b_K) dA_{n,i}(K,·) ≥ φ(A_i(K,L)/A_i(K))`.
    pub fn check_jensen_width_measure(
        &self,
        phi: &OrliczFunction,
        k: &WidthProfile,
        l: &WidthProfile,
        i: usize,
    ) -> Result<CheckReport> {
        self.codim(i)?;
        let w = width_measure_weights(k, i, self.rule)?;
        let (bk, bl) = (k.sample(self.rule)?, l.sample(self.rule)?);
        let mut mean_ratio = 0.0;
        let mut mean_phi = 0.0;
        for ((w, a), b) in w.iter().zip(bk.iter()).zip(bl.iter()) {
            mean_ratio += w * b / a;
            mean_phi += w * phi.eval_raw(b / a);
        }
        let rhs = phi.eval(mean_ratio)?;
        let akl = ith_mixed_width(k, l, i, self.rule)?;
        let ak = width_integral(k, i, self.rule)?;
        let mut report = self.inequality(
            "jensen_width_measure",
            (mean_phi, rhs, mean_phi.ln() - rhs.ln()),
            self.similar(k, l)?,
            self.inputs(Some(i), None, &[phi]),
        );
        // the measure's mean of b_L/b_K must reproduce A_i(K,L)/A_i(K)
        let drift = (mean_ratio - akl / ak).abs() / (akl / ak);
        if drift > self.tol.id_tol {
            report.pass = false;
            report.status = Status::Fail;
            report.note = Some(format!("width-measure mean drifts from A_i(K,L)/A_i(K) by {drift:e}"));
        }
        Ok(report)
    }

    /// `K +_φ L` for `φ(x₁,x₂) = φ₁(x₁) + φ₂(x₂)`.
    pub fn orlicz_pair_sum(
        phi1: &OrliczFunction,
        phi2: &OrliczFunction,
        k: &WidthProfile,
        l: &WidthProfile,
    ) -> Result<WidthProfile> {
        let phi = OrliczFunctionM::sum_of(vec![phi1.clone(), phi2.clone()])?;
        orlicz_width_sum(&phi, &[k.clone(), l.clone()])
    }

    /// `1 ≥ φ₁((A_i(K)/M)^{1/(n−i)}) + φ₂((A_i(L)/M)^{1/(n−i)})`, `M = A_i(K +_φ L)`.
    pub fn check_orlicz_brunn_minkowski(
        &self,
        phi1: &OrliczFunction,
        phi2: &OrliczFunction,
        k: &WidthProfile,
        l: &WidthProfile,
        i: usize,
    ) -> Result<CheckReport> {
        let sum = Self::orlicz_pair_sum(phi1, phi2, k, l)?;
        self.orlicz_brunn_minkowski_on(phi1, phi2, k, l, &sum, i)
    }

    pub(crate) fn orlicz_brunn_minkowski_on(
        &self,
        phi1: &OrliczFunction,
        phi2: &OrliczFunction,
        k: &WidthProfile,
        l: &WidthProfile,
        sum: &WidthProfile,
        i: usize,
    ) -> Result<CheckReport> {
        let e = self.codim(i)?;
        let m = width_integral(sum, i, self.rule)?;
        let ak = width_integral(k, i, self.rule)?;
        let al = width_integral(l, i, self.rule)?;
        let rhs = phi1.eval((ak / m).powf(1.0 / e))? + phi2.eval((al / m).powf(1.0 / e))?;
        Ok(self.inequality(
            "orlicz_brunn_minkowski",
            (1.0, rhs, 1.0 - rhs),
            self.similar(k, l)?,
            self.inputs(Some(i), None, &[phi1, phi2]),
        ))
    }

    /// `A_i(Q) = A_{φ₁,i}(Q,K) + A_{φ₂,i}(Q,L)` with `Q = K +_φ L`.
    pub fn check_decomposition(
        &self,
        phi1: &OrliczFunction,
        phi2: &OrliczFunction,
        k: &WidthProfile,
        l: &WidthProfile,
        i: usize,
    ) -> Result<CheckReport> {
        let sum = Self::orlicz_pair_sum(phi1, phi2, k, l)?;
        self.decomposition_on(phi1, phi2, k, l, &sum, i)
    }

    pub(crate) fn decomposition_on(
        &self,
        phi1: &OrliczFunction,
        phi2: &OrliczFunction,
        k: &WidthProfile,
        l: &WidthProfile,
        sum: &WidthProfile,
        i: usize,
    ) -> Result<CheckReport> {
        self.codim(i)?;
        let lhs = width_integral(sum, i, self.rule)?;
        let rhs = orlicz_mixed_width(phi1, sum, k, i, self.rule)?
            + orlicz_mixed_width(phi2, sum, l, i, self.rule)?;
        Ok(self.identity(
            "decomposition",
            lhs,
            rhs,
            self.tol.id_tol,
            self.inputs(Some(i), None, &[phi1, phi2]),
        ))
    }

    /// Compares `(φ₁)'_r(1)/(n−i) · lim D(ε)` with `A_{φ₂,i}(K,L)`, where
    /// `D(ε) = (A_i(K +_φ ε·L) − A_i(K))/ε` is extrapolated to `ε → 0⁺`.
    pub fn check_variation(
        &self,
        phi1: &OrliczFunction,
        phi2: &OrliczFunction,
        k: &WidthProfile,
        l: &WidthProfile,
        i: usize,
        steps: &[f64],
    ) -> Result<CheckReport> {
        let perturbed = Self::perturbations(phi1, phi2, k, l, steps)?;
        self.variation_on(phi1, phi2, k, l, &perturbed, i)
    }

    pub(crate) fn perturbations(
        phi1: &OrliczFunction,
        phi2: &OrliczFunction,
        k: &WidthProfile,
        l: &WidthProfile,
        steps: &[f64],
    ) -> Result<Vec<(f64, WidthProfile)>> {
        if steps.len() < 2
            || steps.iter().any(|e| !(e.is_finite() && *e > 0.0))
            || steps.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::input(format!(
                "variation steps must be ≥ 2 positive decreasing values, got {steps:?}"
            )));
        }
        steps
            .iter()
            .map(|&eps| Ok((eps, orlicz_perturbation(phi1, phi2, k, l, eps)?)))
            .collect()
    }

    pub(crate) fn variation_on(
        &self,
        phi1: &OrliczFunction,
        phi2: &OrliczFunction,
        k: &WidthProfile,
        l: &WidthProfile,
        perturbed: &[(f64, WidthProfile)],
        i: usize,
    ) -> Result<CheckReport> {
        let e = self.codim(i)?;
        let base = width_integral(k, i, self.rule)?;
        let mut h = Vec::with_capacity(perturbed.len());
        let mut d = Vec::with_capacity(perturbed.len());
        for (eps, q) in perturbed {
            h.push(*eps);
            d.push((width_integral(q, i, self.rule)? - base) / eps);
        }
        let lhs = phi1.right_derivative_at_one() / e * extrapolate_to_zero(&h, &d);
        let rhs = orlicz_mixed_width(phi2, k, l, i, self.rule)?;
        let rel = (lhs - rhs).abs() / rhs.abs();
        let pass = rel <= self.tol.fd_rel_tol;
        let status = if !monotone(&d) {
            Status::Inconclusive
        } else if pass {
            Status::Pass
        } else {
            Status::Fail
        };
        Ok(CheckReport {
            check: "first_variation".into(),
            kind: CheckKind::Identity,
            lhs,
            rhs,
            slack: -rel,
            pass,
            status,
            equality_case: false,
            inputs: self.inputs(Some(i), None, &[phi1, phi2]),
            note: (status == Status::Inconclusive)
                .then(|| format!("difference quotients not monotone: {d:?}")),
        })
    }

    /// `r/φ⁻¹(1/m) ≤ b(+_φ(K₁,…,Kₘ), u) ≤ R/φ⁻¹(1/m)` at every node, with
    /// `r`, `R` the extreme half widths over all operands. Log slack.
    pub fn check_bounds_lemma35(&self, phi: &OrliczFunction, operands: &[WidthProfile]) -> Result<CheckReport> {
        let m = operands.len();
        let phi_m = OrliczFunctionM::sum_of(vec![phi.clone(); m])?;
        let sum = orlicz_width_sum(&phi_m, operands)?;
        let (mut r, mut big_r) = (f64::INFINITY, 0.0f64);
        for op in operands {
            for b in op.sample(self.rule)?.iter() {
                r = r.min(*b);
                big_r = big_r.max(*b);
            }
        }
        let c = phi.inverse(1.0 / m as f64)?;
        let (lower, upper) = (r / c, big_r / c);
        let slack = sum
            .sample(self.rule)?
            .iter()
            .map(|b| (b / lower).ln().min((upper / b).ln()))
            .fold(f64::INFINITY, f64::min);
        let mut similar = true;
        for op in &operands[1..] {
            similar &= self.similar(&operands[0], op)?;
        }
        let mut report = self.inequality(
            "width_bounds",
            (lower, upper, slack),
            similar,
            self.inputs(None, None, &[phi]),
        );
        report.note = Some(format!("m = {m}"));
        Ok(report)
    }

    /// Relative discrepancy of `A_{φ,i}(AK, AL)` from `A_{φ,i}(K, L)`.
    /// Asserted for rotations only; other unimodular maps are probes.
    pub fn probe_linear_covariance(
        &self,
        phi: &OrliczFunction,
        k: &SupportBody,
        l: &SupportBody,
        i: usize,
        a: &DMatrix<f64>,
    ) -> Result<CheckReport> {
        let image = self.linear_images(k, l, a)?;
        self.covariance_on(phi, &image, i)
    }

    /// `(K, L, AK, AL)` as profiles, with the determinant checked.
    pub(crate) fn linear_images(
        &self,
        k: &SupportBody,
        l: &SupportBody,
        a: &DMatrix<f64>,
    ) -> Result<LinearImages> {
        let n = self.rule.dim();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.nrows(),
            });
        }
        let det = a.determinant();
        if (det - 1.0).abs() >= 1e-10 {
            return Err(Error::input(format!("matrix must have determinant 1, got {det}")));
        }
        Ok(LinearImages {
            k: WidthProfile::from_body(k.clone()),
            l: WidthProfile::from_body(l.clone()),
            ak: WidthProfile::from_body(linear_image(k, a.clone())?),
            al: WidthProfile::from_body(linear_image(l, a.clone())?),
            orthogonal: (a.transpose() * a - DMatrix::identity(n, n)).amax() < 1e-10,
        })
    }

    pub(crate) fn covariance_on(
        &self,
        phi: &OrliczFunction,
        im: &LinearImages,
        i: usize,
    ) -> Result<CheckReport> {
        self.codim(i)?;
        let rule = self.covariance_rule.unwrap_or(self.rule);
        let before = orlicz_mixed_width(phi, &im.k, &im.l, i, rule)?;
        let after = orlicz_mixed_width(phi, &im.ak, &im.al, i, rule)?;
        let rel = (after - before).abs() / before;
        let mut inputs = self.inputs(Some(i), None, &[phi]);
        inputs.rule = *rule.descriptor();
        if im.orthogonal {
            let tol = rotation_tolerance(rule);
            let mut report = self.identity("rotation_invariance", after, before, tol * before, inputs);
            report.slack = -rel;
            Ok(report)
        } else {
            Ok(self.probe(
                "special_linear_covariance",
                after,
                before,
                inputs,
                format!("relative discrepancy {rel:e}"),
            ))
        }
    }

    /// Largest implicit-equation residual of a solver-backed profile.
    pub fn check_residual(&self, sum: &WidthProfile, phi: &[&OrliczFunction]) -> Result<CheckReport> {
        let r = max_residual(sum, self.rule)?;
        Ok(self.identity("solver_residual", r, 0.0, self.tol.node_tol, self.inputs(None, None, phi)))
    }

    /// Node-wise agreement of `K +_φ L` for `φ = Power p` twice with the
    /// closed-form `K +_p L`.
    pub fn check_lp_agreement(
        &self,
        k: &WidthProfile,
        l: &WidthProfile,
        p: f64,
        orlicz: &WidthProfile,
    ) -> Result<CheckReport> {
        let lp = lp_width_sum(p, k, l)?;
        let (a, b) = (orlicz.sample(self.rule)?, lp.sample(self.rule)?);
        let worst = a
            .iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        Ok(self.identity("lp_orlicz_agreement", worst, 0.0, self.tol.node_tol, self.inputs(None, Some(p), &[])))
    }

    /// Mixed width integrals with repeated operands against the single-body
    /// functionals they collapse to.
    pub fn check_collapse(&self, k: &WidthProfile, l: &WidthProfile, i: usize) -> Result<Vec<CheckReport>> {
        self.codim(i)?;
        let n = self.rule.dim();
        let ball = WidthProfile::from_body(SupportBody::unit_ball(n));
        let mut ops = vec![k.clone(); n - i];
        ops.extend(std::iter::repeat_n(ball.clone(), i));
        let width = mixed_width_integral(&ops, self.rule)?;
        let mut ops = vec![k.clone(); n - i - 1];
        ops.extend(std::iter::repeat_n(ball, i));
        ops.push(l.clone());
        let mixed = mixed_width_integral(&ops, self.rule)?;
        let inputs = self.inputs(Some(i), None, &[]);
        Ok(vec![
            self.identity(
                "collapse_width_integral",
                width,
                width_integral(k, i, self.rule)?,
                self.tol.id_tol,
                inputs.clone(),
            ),
            self.identity(
                "collapse_mixed_width",
                mixed,
                ith_mixed_width(k, l, i, self.rule)?,
                self.tol.id_tol,
                inputs,
            ),
        ])
    }

    /// Enlarging `L` by `factor ≥ 1` never shrinks `K +_φ L` at a node.
    pub fn check_monotonicity(
        &self,
        phi1: &OrliczFunction,
        phi2: &OrliczFunction,
        k: &WidthProfile,
        l: &WidthProfile,
        sum: &WidthProfile,
        factor: f64,
    ) -> Result<CheckReport> {
        let bigger = Self::orlicz_pair_sum(phi1, phi2, k, &scaled_profile(l, factor))?;
        let (a, b) = (sum.sample(self.rule)?, bigger.sample(self.rule)?);
        let slack = a
            .iter()
            .zip(b.iter())
            .map(|(x, y)| (y - x) / x)
            .fold(f64::INFINITY, f64::min);
        let mut report = self.inequality(
            "monotonicity",
            (1.0, factor, slack),
            false,
            self.inputs(None, None, &[phi1, phi2]),
        );
        report.lhs = a.iter().sum::<f64>() / a.len() as f64;
        report.rhs = b.iter().sum::<f64>() / b.len() as f64;
        Ok(report)
    }

    /// `max_u |b(K +_φ ε·L, u) − b(K, u)|` must shrink along decreasing `ε`.
    pub fn check_continuity(
        &self,
        phi1: &OrliczFunction,
        phi2: &OrliczFunction,
        k: &WidthProfile,
        l: &WidthProfile,
        steps: &[f64],
    ) -> Result<CheckReport> {
        let perturbed = Self::perturbations(phi1, phi2, k, l, steps)?;
        let bk = k.sample(self.rule)?;
        let mut dev = Vec::with_capacity(steps.len());
        for (_, q) in &perturbed {
            let bq = q.sample(self.rule)?;
            dev.push(
                bq.iter()
                    .zip(bk.iter())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max),
            );
        }
        let slack = dev
            .windows(2)
            .map(|w| (w[0] / w[1]).ln())
            .fold(f64::INFINITY, f64::min);
        let mut report = self.inequality(
            "continuity",
            (dev[dev.len() - 1], dev[0], slack),
            false,
            self.inputs(None, None, &[phi1, phi2]),
        );
        report.note = Some(format!("max deviations {dev:?}"));
        Ok(report)
    }

    /// Empirical Lipschitz constant of `L ↦ K +_φ L` under the uniform
    /// shift `b_L + δ`.
    pub fn probe_continuity_constant(
        &self,
        phi1: &OrliczFunction,
        phi2: &OrliczFunction,
        k: &WidthProfile,
        l: &WidthProfile,
        sum: &WidthProfile,
        delta: f64,
    ) -> Result<CheckReport> {
        let moved = Self::orlicz_pair_sum(phi1, phi2, k, &shifted_profile(l, delta))?;
        let (a, b) = (sum.sample(self.rule)?, moved.sample(self.rule)?);
        let c = a
            .iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
            / delta;
        Ok(self.probe(
            "continuity_constant",
            c,
            delta,
            self.inputs(None, None, &[phi1, phi2]),
            format!("max |Δb| / δ = {c}"),
        ))
    }

    /// Log-slack identity between two checks that must agree.
    pub(crate) fn specialization(
        &self,
        check: &str,
        lhs: f64,
        rhs: f64,
        i: usize,
        p: f64,
    ) -> CheckReport {
        self.identity(check, lhs, rhs, self.tol.node_tol, self.inputs(Some(i), Some(p), &[]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rotation_2d;
    use crate::sphere_quad::{ball_volume, build_rule, default_resolution};

    fn ball(r: f64, n: usize) -> WidthProfile {
        WidthProfile::from_body(SupportBody::ball(vec![0.0; n], r).unwrap())
    }

    fn square() -> WidthProfile {
        WidthProfile::from_body(SupportBody::centered_box(&[1.0, 1.0]).unwrap())
    }

    fn power(p: f64) -> OrliczFunction {
        OrliczFunction::power(p).unwrap()
    }

    fn mixture() -> OrliczFunction {
        OrliczFunction::mixture(vec![0.5, 0.5], vec![1.0, 3.0]).unwrap()
    }

    #[test]
    fn neville_is_exact_for_quadratics() {
        let h = [1e-3, 5e-4, 2.5e-4];
        let v: Vec<f64> = h.iter().map(|x| 2.0 - 3.0 * x + 7.0 * x * x).collect();
        assert!((extrapolate_to_zero(&h, &v) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn minkowski_square_disk() {
        let rule = build_rule(2, 65536, None).unwrap();
        let c = Checker::new(&rule, Tolerances::default());
        let r = c.check_minkowski_i(&square(), &ball(1.0, 2), 0).unwrap();
        assert!((r.lhs - 16.0).abs() < 1e-5);
        assert!((r.rhs - (std::f64::consts::PI + 2.0) * std::f64::consts::PI).abs() < 1e-5);
        assert!(r.pass && r.slack > 1e-3 && !r.equality_case);
        let r = c.check_minkowski_i(&square(), &square(), 0).unwrap();
        assert!(r.slack.abs() < 1e-14);
    }

    #[test]
    fn ball_pairs_are_equality_cases() {
        for n in [2, 3] {
            let rule = build_rule(n, if n == 2 { 4096 } else { 16 }, None).unwrap();
            let c = Checker::new(&rule, Tolerances::default());
            let (k, l) = (ball(0.5, n), ball(3.0, n));
            for i in 0..n {
                let mut reports = vec![c.check_minkowski_i(&k, &l, i).unwrap()];
                for p in [1.0, 2.0, 3.0] {
                    reports.push(c.check_lp_minkowski(&k, &l, p, i).unwrap());
                    reports.push(c.check_lp_brunn_minkowski(&k, &l, p, i).unwrap());
                }
                for phi in [power(1.0), power(2.0), mixture()] {
                    reports.push(c.check_orlicz_minkowski(&phi, &k, &l, i).unwrap());
                    reports.push(c.check_jensen_width_measure(&phi, &k, &l, i).unwrap());
                    reports.push(c.check_orlicz_brunn_minkowski(&phi, &mixture(), &k, &l, i).unwrap());
                }
                for r in reports {
                    assert!(r.pass && r.equality_case, "{r:?}");
                    assert!(r.slack.abs() < 1e-9, "{r:?}");
                }
            }
        }
    }

    #[test]
    fn orlicz_minkowski_is_strict_off_similar_width() {
        let rule = build_rule(2, 16384, None).unwrap();
        let c = Checker::new(&rule, Tolerances::default());
        for phi in [power(2.0), mixture()] {
            let r = c.check_orlicz_minkowski(&phi, &square(), &ball(1.0, 2), 0).unwrap();
            assert!(r.pass && r.slack > 1e-5 && !r.equality_case);
        }
    }

    #[test]
    fn power_specializations_agree() {
        let rule = build_rule(2, 8192, None).unwrap();
        let c = Checker::new(&rule, Tolerances::default());
        let (k, l) = (square(), ball(0.7, 2));
        for p in [1.0, 2.0, 3.5] {
            let lp = c.check_lp_minkowski(&k, &l, p, 0).unwrap();
            let orl = c.check_orlicz_minkowski(&power(p), &k, &l, 0).unwrap();
            assert!((lp.slack - 2.0 * orl.slack).abs() < 1e-10);
            let bm = c.check_lp_brunn_minkowski(&k, &l, p, 0).unwrap();
            let obm = c.check_orlicz_brunn_minkowski(&power(p), &power(p), &k, &l, 0).unwrap();
            assert!((obm.slack - (1.0 - (-bm.slack).exp())).abs() < 1e-10);
        }
    }

    #[test]
    fn decomposition_balls_and_collapse() {
        for n in [2, 3] {
            let rule = build_rule(n, if n == 2 { 1024 } else { 16 }, None).unwrap();
            let c = Checker::new(&rule, Tolerances::default());
            let b = ball(1.0, n);
            for i in 0..n {
                let r = c.check_decomposition(&power(2.0), &power(2.0), &b, &b, i).unwrap();
                let exact = 2f64.powf(-((n - i) as f64) / 2.0) * ball_volume(n);
                assert!(r.pass && (r.lhs - exact).abs() < 1e-9);
            }
        }
        // β = 0: K +_φ 0·L is K and A_{φ₁,i}(K,K) = A_i(K)
        let rule = build_rule(2, 1024, None).unwrap();
        let k = square();
        let q = crate::addition::orlicz_linear_combination(&mixture(), &power(1.0), &k, &ball(1.0, 2), 1.0, 0.0)
            .unwrap();
        let lhs = width_integral(&q, 0, &rule).unwrap();
        let rhs = orlicz_mixed_width(&mixture(), &q, &k, 0, &rule).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
        let c = Checker::new(&rule, Tolerances::default());
        for r in c.check_collapse(&k, &ball(0.5, 2), 1).unwrap() {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn variation_ball_ball_and_self_pair() {
        let steps = [1e-3, 5e-4, 2.5e-4];
        for n in [2, 3] {
            let rule = build_rule(n, if n == 2 { 1024 } else { 16 }, None).unwrap();
            let c = Checker::new(&rule, Tolerances::default());
            let b = ball(1.0, n);
            for p in [1.0, 2.0] {
                for i in 0..n {
                    let r = c.check_variation(&power(p), &power(p), &b, &b, i, &steps).unwrap();
                    assert_eq!(r.status, Status::Pass);
                    assert!((r.lhs - ball_volume(n)).abs() / ball_volume(n) < 1e-4, "{r:?}");
                }
            }
        }
        let rule = build_rule(2, 4096, None).unwrap();
        let c = Checker::new(&rule, Tolerances::default());
        let r = c.check_variation(&mixture(), &power(2.0), &square(), &square(), 0, &steps).unwrap();
        assert_eq!(r.status, Status::Pass, "{r:?}");
        assert!(c.check_variation(&mixture(), &power(2.0), &square(), &square(), 0, &[1e-3]).is_err());
    }

    #[test]
    fn lemma35_bounds() {
        let rule = build_rule(2, 1024, None).unwrap();
        let c = Checker::new(&rule, Tolerances::default());
        for m in [2, 3, 5] {
            let same = vec![ball(1.0, 2); m];
            for phi in [power(2.0), mixture()] {
                let r = c.check_bounds_lemma35(&phi, &same).unwrap();
                assert!(r.pass && r.equality_case && r.slack.abs() < 1e-9, "{r:?}");
                let mut mixed = vec![ball(0.5, 2); m - 1];
                mixed.push(square());
                let r = c.check_bounds_lemma35(&phi, &mixed).unwrap();
                assert!(r.pass && r.slack > 0.0 && !r.equality_case, "{r:?}");
            }
        }
        let r = c.check_bounds_lemma35(&power(3.0), &[ball(1.0, 2), ball(1.0, 2)]).unwrap();
        assert!((r.lhs - 2f64.powf(-1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn covariance_rotation_identity_and_probe() {
        let rule = build_rule(2, default_resolution(2), None).unwrap();
        let c = Checker::new(&rule, Tolerances::default());
        let sq = SupportBody::centered_box(&[1.0, 1.0]).unwrap();
        let disk = SupportBody::unit_ball(2);
        let id = DMatrix::identity(2, 2);
        let r = c.probe_linear_covariance(&power(2.0), &sq, &disk, 0, &id).unwrap();
        assert_eq!(r.slack, 0.0);
        let r = c.probe_linear_covariance(&power(2.0), &sq, &disk, 0, &rotation_2d(0.3)).unwrap();
        assert_eq!(r.status, Status::Pass, "{r:?}");
        let stretch = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 0.5]));
        let r = c.probe_linear_covariance(&power(2.0), &sq, &disk, 0, &stretch).unwrap();
        assert_eq!(r.status, Status::Probe);
        assert!(r.note.unwrap().contains("discrepancy"));
        let bad = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 1.0]));
        assert!(c.probe_linear_covariance(&power(2.0), &sq, &disk, 0, &bad).is_err());
    }

    #[test]
    fn lemma_checks_on_square_disk() {
        let rule = build_rule(2, 2048, None).unwrap();
        let c = Checker::new(&rule, Tolerances::default());
        let (k, l) = (square(), ball(0.5, 2));
        let (f1, f2) = (power(2.0), mixture());
        let sum = Checker::orlicz_pair_sum(&f1, &f2, &k, &l).unwrap();
        assert!(c.check_residual(&sum, &[&f1, &f2]).unwrap().pass);
        assert!(c.check_monotonicity(&f1, &f2, &k, &l, &sum, 1.25).unwrap().pass);
        let r = c.check_continuity(&f1, &f2, &k, &l, &[1e-1, 1e-2, 1e-3, 1e-4]).unwrap();
        assert!(r.pass && r.lhs < r.rhs, "{r:?}");
        let r = c.probe_continuity_constant(&f1, &f2, &k, &l, &sum, 1e-4).unwrap();
        assert!(r.lhs.is_finite() && r.lhs > 0.0);
        let lp = Checker::orlicz_pair_sum(&power(2.0), &power(2.0), &k, &l).unwrap();
        assert!(c.check_lp_agreement(&k, &l, 2.0, &lp).unwrap().pass);
    }

    #[test]
    fn similar_width_examples() {
        let rule = build_rule(2, 1024, None).unwrap();
        let k = square();
        let k3 = scaled_profile(&k, 3.0);
        assert!(similar_width_detect(&k, &k3, &rule, 1e-5).unwrap());
        assert!(!similar_width_detect(&k, &ball(1.0, 2), &rule, 1e-5).unwrap());
        assert!(similar_width_detect(&ball(1.0, 2), &ball(2.5, 2), &rule, 1e-5).unwrap());
    }

    #[test]
    fn index_errors_propagate() {
        let rule = build_rule(2, 64, None).unwrap();
        let c = Checker::new(&rule, Tolerances::default());
        let e = c.check_minkowski_i(&square(), &square(), 2).unwrap_err();
        assert!(matches!(e, Error::IndexOutOfRange { i: 2, n: 2 }));
    }
}
