//! Numerical verification of the width-integral inequalities and identities.
//!
//! Every check produces a [`CheckReport`]. Inequality slacks follow one sign
//! convention: `slack ≥ 0` means the inequality holds. Where both sides are
//! products of powers the slack is the difference of logarithms, which keeps
//! tolerances scale-free.

mod campaign;
mod checks;
mod ensemble;

use serde::{Deserialize, Serialize};

pub use campaign::{run_campaign, run_pair, CampaignReport, CheckSummary, TrialRecord};
pub use checks::{covariance_resolution, rotation_tolerance, Checker};
pub use ensemble::{random_body, random_rotation, random_special_linear, BodyKind, EnsembleConfig};

use crate::error::Result;
use crate::profile::WidthProfile;
use crate::schema::PhiSpec;
use crate::sphere_quad::{QuadratureRule, RuleDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Inequalities pass when `slack ≥ −ineq_tol`.
    pub ineq_tol: f64,
    /// Integral identities pass when `|lhs − rhs| ≤ id_tol`.
    pub id_tol: f64,
    /// `|slack|` below this (with similar widths) marks an equality case.
    pub eq_tol: f64,
    /// Relative error allowed for the first-variation limit.
    pub fd_rel_tol: f64,
    /// Pointwise identities (solver residuals, L_p/Orlicz agreement).
    pub node_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ineq_tol: 1e-8,
            id_tol: 1e-9,
            eq_tol: 1e-5,
            fd_rel_tol: 1e-3,
            node_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Inequality,
    Identity,
    /// Reported only; never affects pass/fail totals.
    Probe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Finite-difference sequence too noisy to judge.
    Inconclusive,
    Probe,
}

/// Parameters a check ran with; bodies are recorded once per trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckInputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub phi: Vec<PhiSpec>,
    pub rule: RuleDescriptor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    pub status: Status,
    pub equality_case: bool,
    pub inputs: CheckInputs,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    /// True for failed asserted checks (probes and inconclusive results
    /// never count).
    pub fn is_failure(&self) -> bool {
        self.status == Status::Fail
    }
}

/// True when `b_L / b_K` is constant over the nodes of `rule` to relative
/// tolerance `eq_tol`.
pub fn similar_width_detect(
    k: &WidthProfile,
    l: &WidthProfile,
    rule: &QuadratureRule,
    eq_tol: f64,
) -> Result<bool> {
    let (bk, bl) = (k.sample(rule)?, l.sample(rule)?);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (a, b) in bk.iter().zip(bl.iter()) {
        let r = b / a;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((hi - lo) < eq_tol * lo)
}
