//! Seeded campaigns: every check over an ensemble of random body pairs.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::{covariance_resolution, Checker};
use super::ensemble::{random_body, random_mixture, random_rotation, random_special_linear};
use super::{CheckKind, CheckReport, EnsembleConfig, Status, Tolerances};
use crate::error::Result;
use crate::geometry::SupportBody;
use crate::orlicz::OrliczFunction;
use crate::profile::WidthProfile;
use crate::schema::{BodySpec, PhiSpec};
use crate::sphere_quad::{build_rule, default_resolution, QuadratureRule, RuleDescriptor};

/// Streams `0..2·trials` generate bodies; per-trial extras live far above.
const TRIAL_STREAM_BASE: u64 = 1 << 40;
const MONOTONICITY_FACTOR: f64 = 1.25;
const CONTINUITY_SHIFT: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<BodySpec>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<BodySpec>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub random_phis: Vec<PhiSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub kind: CheckKind,
    pub trials: usize,
    pub passes: usize,
    pub failures: usize,
    pub inconclusive: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_slack: Option<f64>,
    pub equality_cases: usize,
    /// Largest reported discrepancy (probes only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_discrepancy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub version: String,
    pub seed: u64,
    pub rule: RuleDescriptor,
    pub tolerances: Tolerances,
    pub config: EnsembleConfig,
    pub trials: Vec<TrialRecord>,
    pub checks: Vec<CheckReport>,
    pub summary: BTreeMap<String, CheckSummary>,
    pub trial_errors: usize,
    /// No asserted check failed and every trial completed.
    pub passed: bool,
}

impl CampaignReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|r| r.is_failure())
    }
}

struct Rules {
    main: QuadratureRule,
    covariance: QuadratureRule,
}

fn campaign_rules(config: &EnsembleConfig) -> Result<Rules> {
    let res = config
        .resolution
        .unwrap_or_else(|| default_resolution(config.dim));
    let seed = (config.dim >= 4).then_some(config.seed);
    let main = build_rule(config.dim, res, seed)?;
    let cov_res = covariance_resolution(config.dim, res);
    let covariance = if cov_res == res {
        main.clone()
    } else {
        build_rule(config.dim, cov_res, seed)?
    };
    Ok(Rules { main, covariance })
}

/// Relative discrepancy carried by a probe report.
fn probe_discrepancy(r: &CheckReport) -> f64 {
    if r.check == "continuity_constant" {
        r.lhs
    } else {
        (r.lhs - r.rhs).abs() / r.rhs.abs()
    }
}

fn summarize(reports: &[CheckReport]) -> BTreeMap<String, CheckSummary> {
    let mut out: BTreeMap<String, CheckSummary> = BTreeMap::new();
    for r in reports {
        let s = out.entry(r.check.clone()).or_insert(CheckSummary {
            kind: r.kind,
            trials: 0,
            passes: 0,
            failures: 0,
            inconclusive: 0,
            min_slack: None,
            equality_cases: 0,
            max_discrepancy: None,
        });
        s.trials += 1;
        match r.status {
            Status::Pass => s.passes += 1,
            Status::Fail => s.failures += 1,
            Status::Inconclusive => s.inconclusive += 1,
            Status::Probe => {
                let d = probe_discrepancy(r);
                s.max_discrepancy = Some(s.max_discrepancy.map_or(d, |m| m.max(d)));
            }
        }
        if r.kind != CheckKind::Probe {
            s.min_slack = Some(s.min_slack.map_or(r.slack, |m| m.min(r.slack)));
        }
        s.equality_cases += r.equality_case as usize;
    }
    out
}

struct TrialPlan {
    variation: bool,
    deep: bool,
}

struct TrialOutcome {
    record: TrialRecord,
    reports: Vec<CheckReport>,
}

fn run_trial(
    config: &EnsembleConfig,
    rules: &Rules,
    index: usize,
    bodies: Result<(SupportBody, SupportBody)>,
    plan: TrialPlan,
) -> TrialOutcome {
    let mut record = TrialRecord {
        index,
        k: None,
        l: None,
        random_phis: Vec::new(),
        error: None,
    };
    let mut reports = Vec::new();
    let result = bodies.and_then(|(k, l)| {
        record.k = Some(BodySpec::from(&k));
        record.l = Some(BodySpec::from(&l));
        let mut rng = config.rng(TRIAL_STREAM_BASE + index as u64);
        record.random_phis = (0..config.random_phis)
            .map(|_| random_mixture(&mut rng, config.exponent_range))
            .collect();
        trial_checks(config, rules, index, &k, &l, &record.random_phis, &mut rng, &plan, &mut reports)
    });
    if let Err(e) = result {
        record.error = Some(e.to_string());
    }
    TrialOutcome { record, reports }
}

#[allow(clippy::too_many_arguments)]
fn trial_checks(
    config: &EnsembleConfig,
    rules: &Rules,
    index: usize,
    kb: &SupportBody,
    lb: &SupportBody,
    random_phis: &[PhiSpec],
    rng: &mut rand_chacha::ChaCha8Rng,
    plan: &TrialPlan,
    out: &mut Vec<CheckReport>,
) -> Result<()> {
    let c = Checker::new(&rules.main, config.tolerances)
        .with_covariance_rule(&rules.covariance)
        .for_trial(index);
    let (k, l) = (
        WidthProfile::from_body(kb.clone()),
        WidthProfile::from_body(lb.clone()),
    );
    let fixed: Vec<OrliczFunction> = config
        .phis
        .iter()
        .map(PhiSpec::univariate)
        .collect::<Result<_>>()?;
    let mut phis = fixed.clone();
    for spec in random_phis {
        phis.push(spec.univariate()?);
    }
    let is = config.i_sweep();
    let n = config.dim;

    // integral inequalities and identities
    let mut lp_bm_slack = BTreeMap::new();
    for &i in &is {
        let e = (n - i) as f64;
        out.push(c.check_minkowski_i(&k, &l, i)?);
        out.extend(c.check_collapse(&k, &l, i)?);
        for phi in &phis {
            out.push(c.check_orlicz_minkowski(phi, &k, &l, i)?);
            out.push(c.check_jensen_width_measure(phi, &k, &l, i)?);
        }
        for (pj, &p) in config.p_values.iter().enumerate() {
            let lp = c.check_lp_minkowski(&k, &l, p, i)?;
            let orl = c.check_orlicz_minkowski(&OrliczFunction::power(p)?, &k, &l, i)?;
            out.push(c.specialization("lp_minkowski_specialization", lp.slack, e * orl.slack, i, p));
            out.push(lp);
            let bm = c.check_lp_brunn_minkowski(&k, &l, p, i)?;
            lp_bm_slack.insert((pj, i), bm.slack);
            out.push(bm);
        }
    }

    // Orlicz sums with φ = Power p twice against the L_p sums
    for (pj, &p) in config.p_values.iter().enumerate() {
        let phi = OrliczFunction::power(p)?;
        let sum = Checker::orlicz_pair_sum(&phi, &phi, &k, &l)?;
        out.push(c.check_residual(&sum, &[&phi, &phi])?);
        out.push(c.check_lp_agreement(&k, &l, p, &sum)?);
        for &i in &is {
            let obm = c.orlicz_brunn_minkowski_on(&phi, &phi, &k, &l, &sum, i)?;
            let expected = 1.0 - (-lp_bm_slack[&(pj, i)]).exp();
            out.push(c.specialization("lp_brunn_minkowski_specialization", obm.slack, expected, i, p));
        }
    }

    // general Orlicz pairs (φⱼ, φⱼ₊₁)
    let pairs: Vec<(&OrliczFunction, &OrliczFunction)> = (0..phis.len())
        .map(|j| (&phis[j], &phis[(j + 1) % phis.len()]))
        .collect();
    let mut sums = Vec::with_capacity(pairs.len());
    for &(f1, f2) in &pairs {
        let sum = Checker::orlicz_pair_sum(f1, f2, &k, &l)?;
        out.push(c.check_residual(&sum, &[f1, f2])?);
        for &i in &is {
            out.push(c.orlicz_brunn_minkowski_on(f1, f2, &k, &l, &sum, i)?);
            out.push(c.decomposition_on(f1, f2, &k, &l, &sum, i)?);
        }
        sums.push(sum);
    }

    if plan.variation {
        for &(f1, f2) in pairs.iter().take(2) {
            let perturbed = Checker::perturbations(f1, f2, &k, &l, &config.variation_steps)?;
            for (_, q) in &perturbed {
                out.push(c.check_residual(q, &[f1, f2])?);
            }
            for &i in &is {
                out.push(c.variation_on(f1, f2, &k, &l, &perturbed, i)?);
            }
        }
    }

    if plan.deep {
        let (f1, f2) = pairs[0];
        let bounds_sets = [
            (&phis[0], vec![k.clone(), l.clone()]),
            (&phis[phis.len() - 1], vec![k.clone(), l.clone(), k.clone()]),
            (&phis[phis.len() / 2], vec![k.clone(), l.clone(), k.clone(), l.clone(), k.clone()]),
        ];
        for (phi, ops) in &bounds_sets {
            out.push(c.check_bounds_lemma35(phi, ops)?);
        }
        out.push(c.check_monotonicity(f1, f2, &k, &l, &sums[0], MONOTONICITY_FACTOR)?);
        out.push(c.check_continuity(f1, f2, &k, &l, &config.continuity_steps)?);
        out.push(c.probe_continuity_constant(f1, f2, &k, &l, &sums[0], CONTINUITY_SHIFT)?);

        let rotation = random_rotation(rng, n);
        let special = random_special_linear(rng, n);
        let rotated = c.linear_images(kb, lb, &rotation)?;
        let sheared = c.linear_images(kb, lb, &special)?;
        for phi in &fixed {
            for &i in &is {
                out.push(c.covariance_on(phi, &rotated, i)?);
                out.push(c.covariance_on(phi, &sheared, i)?);
            }
        }
    }
    Ok(())
}

fn assemble(
    config: &EnsembleConfig,
    rules: &Rules,
    outcomes: Vec<TrialOutcome>,
) -> CampaignReport {
    let mut trials = Vec::with_capacity(outcomes.len());
    let mut checks = Vec::new();
    for o in outcomes {
        trials.push(o.record);
        checks.extend(o.reports);
    }
    let summary = summarize(&checks);
    let trial_errors = trials.iter().filter(|t| t.error.is_some()).count();
    let passed = trial_errors == 0 && !checks.iter().any(CheckReport::is_failure);
    CampaignReport {
        version: crate::VERSION.to_string(),
        seed: config.seed,
        rule: *rules.main.descriptor(),
        tolerances: config.tolerances,
        config: config.clone(),
        trials,
        checks,
        summary,
        trial_errors,
        passed,
    }
}

/// Runs every check over `config.trials` seeded random pairs. Trial `t`
/// uses bodies `2t` and `2t + 1`; the report does not depend on the
/// number of worker threads.
pub fn run_campaign(config: &EnsembleConfig) -> Result<CampaignReport> {
    config.validate()?;
    let rules = campaign_rules(config)?;
    let outcomes: Vec<TrialOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let bodies = random_body(config, 2 * t as u64)
                .and_then(|k| Ok((k, random_body(config, 2 * t as u64 + 1)?)));
            let plan = TrialPlan {
                variation: t < config.variation_trials,
                deep: t < config.deep_trials,
            };
            run_trial(config, &rules, t, bodies, plan)
        })
        .collect();
    Ok(assemble(config, &rules, outcomes))
}

/// Runs every check (including variation and per-node checks) on one
/// user-supplied pair.
pub fn run_pair(config: &EnsembleConfig, k: &SupportBody, l: &SupportBody) -> Result<CampaignReport> {
    config.validate()?;
    for b in [k, l] {
        if b.dim() != config.dim {
            return Err(crate::error::Error::DimensionMismatch {
                expected: config.dim,
                found: b.dim(),
            });
        }
    }
    let rules = campaign_rules(config)?;
    let mut single = config.clone();
    single.trials = 1;
    let outcome = run_trial(
        &single,
        &rules,
        0,
        Ok((k.clone(), l.clone())),
        TrialPlan {
            variation: true,
            deep: true,
        },
    );
    Ok(assemble(&single, &rules, vec![outcome]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(dim: usize, trials: usize) -> EnsembleConfig {
        EnsembleConfig {
            seed: 9,
            dim,
            trials,
            resolution: Some(if dim == 2 { 2048 } else { 16 }),
            variation_trials: 2,
            deep_trials: 2,
            ..EnsembleConfig::default()
        }
    }

    #[test]
    fn small_campaigns_pass() {
        for dim in [2, 3] {
            let report = run_campaign(&small(dim, 4)).unwrap();
            let failures: Vec<_> = report.failures().collect();
            assert!(failures.is_empty(), "{failures:#?}");
            assert!(report.passed && report.trial_errors == 0);
            for key in [
                "minkowski_mixed_width",
                "lp_minkowski",
                "lp_brunn_minkowski",
                "orlicz_minkowski",
                "orlicz_brunn_minkowski",
                "decomposition",
                "first_variation",
                "width_bounds",
                "rotation_invariance",
                "special_linear_covariance",
            ] {
                assert!(report.summary.contains_key(key), "missing {key}");
            }
            assert!(report.summary["special_linear_covariance"].max_discrepancy.is_some());
        }
    }

    #[test]
    fn campaigns_are_deterministic() {
        let c = small(2, 3);
        let a = serde_json::to_string(&run_campaign(&c).unwrap()).unwrap();
        let b = serde_json::to_string(&run_campaign(&c).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trial_errors_are_recorded_and_campaign_continues() {
        let c = EnsembleConfig {
            body_kinds: vec![super::super::BodyKind::Polytope],
            min_half_width: 1e6,
            ..small(2, 2)
        };
        let report = run_campaign(&c).unwrap();
        assert_eq!(report.trial_errors, 2);
        assert!(!report.passed);
        assert!(report.trials.iter().all(|t| t.error.is_some()));
    }

    #[test]
    fn pair_run_on_balls_flags_equality() {
        let c = small(2, 1);
        let k = SupportBody::ball(vec![0.0, 0.0], 1.0).unwrap();
        let l = SupportBody::ball(vec![1.0, 0.0], 2.0).unwrap();
        let report = run_pair(&c, &k, &l).unwrap();
        assert!(report.passed);
        for r in report.checks.iter().filter(|r| {
            r.kind == CheckKind::Inequality
                && !matches!(r.check.as_str(), "width_bounds" | "monotonicity" | "continuity")
        }) {
            assert!(r.equality_case, "{r:?}");
        }
    }
}
