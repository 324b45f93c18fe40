//! Width integrals and their mixed, L_p and Orlicz variants.
//!
//! Every functional is `(1/n) Σ wₖ g(b₁(uₖ), …)` over one explicit rule; the
//! width values come from the profiles' per-rule caches, so evaluating
//! several functionals of the same profiles on one rule solves each
//! addition only once.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::orlicz::OrliczFunction;
use crate::profile::WidthProfile;
use crate::sphere_quad::{QuadratureRule, RuleDescriptor};

fn check_index(i: usize, rule: &QuadratureRule) -> Result<usize> {
    let n = rule.dim();
    if i >= n {
        return Err(Error::IndexOutOfRange { i, n });
    }
    Ok(n)
}

fn integrate_nodes<F>(rule: &QuadratureRule, profiles: &[&WidthProfile], g: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let samples = profiles
        .iter()
        .map(|p| p.sample(rule))
        .collect::<Result<Vec<_>>>()?;
    let mut vals = vec![0.0; profiles.len()];
    let integrand: Vec<f64> = (0..rule.len())
        .map(|k| {
            for (v, s) in vals.iter_mut().zip(&samples) {
                *v = s[k];
            }
            g(&vals)
        })
        .collect();
    Ok(rule.integrate_values(&integrand)? / rule.dim() as f64)
}

/// `A_i(K) = (1/n) ∫ b(K,u)^{n−i} dS(u)`.
pub fn width_integral(k: &WidthProfile, i: usize, rule: &QuadratureRule) -> Result<f64> {
    let e = (check_index(i, rule)? - i) as i32;
    integrate_nodes(rule, &[k], |b| b[0].powi(e))
}

/// `A(K₁, …, Kₙ) = (1/n) ∫ b(K₁,u) ⋯ b(Kₙ,u) dS(u)`.
pub fn mixed_width_integral(bodies: &[WidthProfile], rule: &QuadratureRule) -> Result<f64> {
    if bodies.len() != rule.dim() {
        return Err(Error::input(format!(
            "mixed width integral in R^{} needs {} operands, got {}",
            rule.dim(),
            rule.dim(),
            bodies.len()
        )));
    }
    let refs: Vec<&WidthProfile> = bodies.iter().collect();
    integrate_nodes(rule, &refs, |b| b.iter().product())
}

/// `A_i(K, L) = (1/n) ∫ b(K,u)^{n−i−1} b(L,u) dS(u)`.
pub fn ith_mixed_width(
    k: &WidthProfile,
    l: &WidthProfile,
    i: usize,
    rule: &QuadratureRule,
) -> Result<f64> {
    let e = (check_index(i, rule)? - i - 1) as i32;
    integrate_nodes(rule, &[k, l], |b| b[0].powi(e) * b[1])
}

/// `A_{−p,i}(K, L) = (1/n) ∫ b(K,u)^{n−i+p} b(L,u)^{−p} dS(u)`.
pub fn lp_mixed_width(
    k: &WidthProfile,
    l: &WidthProfile,
    p: f64,
    i: usize,
    rule: &QuadratureRule,
) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::input(format!("p must be ≥ 1, got {p}")));
    }
    let e = (check_index(i, rule)? - i) as i32;
    // written as b_K^{n−i} (b_L/b_K)^{−p} so it shares the Orlicz integrand
    integrate_nodes(rule, &[k, l], |b| b[0].powi(e) * (b[1] / b[0]).powf(-p))
}

/// `A_{φ,i}(K, L) = (1/n) ∫ φ(b(L,u)/b(K,u)) b(K,u)^{n−i} dS(u)`.
pub fn orlicz_mixed_width(
    phi: &OrliczFunction,
    k: &WidthProfile,
    l: &WidthProfile,
    i: usize,
    rule: &QuadratureRule,
) -> Result<f64> {
    let e = (check_index(i, rule)? - i) as i32;
    integrate_nodes(rule, &[k, l], |b| b[0].powi(e) * phi.eval_raw(b[1] / b[0]))
}

/// Per-node masses of the width measure
/// `dA_{n,i}(K, u) = b(K,u)^{n−i} / (n A_i(K)) dS(u)`.
///
/// Numerator and normalizer come from the same rule, so the masses sum to 1
/// up to round-off.
pub fn width_measure_weights(
    k: &WidthProfile,
    i: usize,
    rule: &QuadratureRule,
) -> Result<Vec<f64>> {
    let n = check_index(i, rule)?;
    let e = (n - i) as i32;
    let b = k.sample(rule)?;
    let masses: Vec<f64> = rule
        .weights()
        .iter()
        .zip(b.iter())
        .map(|(w, b)| w * b.powi(e))
        .collect();
    let total: f64 = masses.iter().sum();
    Ok(masses.into_iter().map(|m| m / total).collect())
}

/// Which functional a [`FunctionalResult`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Functional {
    #[serde(rename = "A_i")]
    WidthIntegral,
    #[serde(rename = "A_i_KL")]
    IthMixedWidth,
    #[serde(rename = "A_pi")]
    LpMixedWidth,
    #[serde(rename = "A_phi_i")]
    OrliczMixedWidth,
}

/// A functional value with enough context to reproduce it.
#[derive(Debug, Clone, Serialize)]
pub struct FunctionalResult {
    pub functional: Functional,
    pub value: f64,
    pub i: usize,
    pub rule: RuleDescriptor,
    pub evaluations: usize,
    pub params: serde_json::Value,
}

impl FunctionalResult {
    pub fn new(
        functional: Functional,
        value: f64,
        i: usize,
        rule: &QuadratureRule,
        operands: usize,
        params: serde_json::Value,
    ) -> Self {
        FunctionalResult {
            functional,
            value,
            i,
            rule: *rule.descriptor(),
            evaluations: operands * rule.len(),
            params,
        }
    }
}
