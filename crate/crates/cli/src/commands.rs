use serde::Serialize;
use serde_json::json;
use widthlab_core::schema::{AdditionSpec, BodySpec, PhiSpec};
use widthlab_core::verify::{run_campaign, run_pair, CampaignReport, EnsembleConfig};
use widthlab_core::{
    build_rule, default_resolution, ith_mixed_width, lp_mixed_width, max_residual,
    orlicz_mixed_width, width_integral, Functional, FunctionalResult, Provenance, QuadratureRule,
    RuleDescriptor, SupportBody, WidthProfile, VERSION,
};

use crate::args::{AddArgs, CampaignArgs, Common, ComputeArgs, FunctionalArg, SuiteArgs, VerifyArgs};
use crate::output::{emit, num, render};
use crate::{input, CliError, Outcome};

fn body(flag: &str, arg: &str) -> Result<SupportBody, CliError> {
    let spec: BodySpec = input::parse(flag, arg)?;
    Ok(spec.build()?)
}

/// The dimension every input must share, checked against `--dim`.
fn resolve_dim(common: &Common, dims: &[usize]) -> Result<usize, CliError> {
    let dim = common.dim.unwrap_or(dims[0]);
    if let Some(&bad) = dims.iter().find(|&&d| d != dim) {
        return Err(CliError::Validation(format!(
            "dimension mismatch: rule dimension {dim}, body dimension {bad}"
        )));
    }
    Ok(dim)
}

fn rule_for(common: &Common, dim: usize) -> Result<QuadratureRule, CliError> {
    let res = common.resolution.unwrap_or_else(|| default_resolution(dim));
    Ok(build_rule(dim, res, common.seed)?)
}

#[derive(Serialize)]
struct ComputeReport {
    version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(flatten)]
    result: FunctionalResult,
}

pub fn compute(a: &ComputeArgs) -> Result<Outcome, CliError> {
    let k = WidthProfile::from_body(body("--K", &a.k)?);
    let l = match (&a.l, a.functional) {
        (None, FunctionalArg::WidthIntegral) => None,
        (Some(s), _) => Some(WidthProfile::from_body(body("--L", s)?)),
        (None, f) => {
            return Err(CliError::Validation(format!("{f:?} needs --L")));
        }
    };
    let mut dims = vec![k.dim()];
    dims.extend(l.iter().map(WidthProfile::dim));
    let dim = resolve_dim(&a.common, &dims)?;
    let rule = rule_for(&a.common, dim)?;

    let (functional, value, operands, params) = match (a.functional, &l) {
        (FunctionalArg::WidthIntegral, _) => (
            Functional::WidthIntegral,
            width_integral(&k, a.i, &rule)?,
            1,
            serde_json::Value::Null,
        ),
        (FunctionalArg::IthMixedWidth, Some(l)) => (
            Functional::IthMixedWidth,
            ith_mixed_width(&k, l, a.i, &rule)?,
            2,
            serde_json::Value::Null,
        ),
        (FunctionalArg::LpMixedWidth, Some(l)) => {
            let p = a
                .p
                .ok_or_else(|| CliError::Validation("A_pi needs --p".into()))?;
            (
                Functional::LpMixedWidth,
                lp_mixed_width(&k, l, p, a.i, &rule)?,
                2,
                json!({ "p": p }),
            )
        }
        (FunctionalArg::OrliczMixedWidth, Some(l)) => {
            let s = a
                .phi
                .as_deref()
                .ok_or_else(|| CliError::Validation("A_phi_i needs --phi".into()))?;
            let spec: PhiSpec = input::parse("--phi", s)?;
            (
                Functional::OrliczMixedWidth,
                orlicz_mixed_width(&spec.univariate()?, &k, l, a.i, &rule)?,
                2,
                json!({ "phi": spec }),
            )
        }
        (_, None) => unreachable!("L presence checked above"),
    };
    let report = ComputeReport {
        version: VERSION,
        seed: a.common.seed,
        result: FunctionalResult::new(functional, value, a.i, &rule, operands, params),
    };
    let bytes = render(a.common.format, &report, || {
        let r = &report.result;
        (
            ["functional", "value", "i", "dim", "rule", "resolution", "evaluations"]
                .map(String::from)
                .to_vec(),
            vec![vec![
                json!(r.functional).as_str().unwrap_or_default().to_string(),
                num(r.value),
                r.i.to_string(),
                r.rule.dim.to_string(),
                json!(r.rule.kind).as_str().unwrap_or_default().to_string(),
                r.rule.resolution.to_string(),
                r.evaluations.to_string(),
            ]],
        )
    })?;
    emit(&bytes, a.common.out.as_deref())?;
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct AddReport {
    version: &'static str,
    rule: RuleDescriptor,
    provenance: Provenance,
    nodes: Vec<Vec<f64>>,
    values: Vec<f64>,
    max_residual: f64,
}

pub fn add(a: &AddArgs) -> Result<Outcome, CliError> {
    let spec: AdditionSpec = input::parse("--addition", &a.addition)?;
    let dim = resolve_dim(&a.common, &[spec.dim()?])?;
    let rule = rule_for(&a.common, dim)?;
    let profile = spec.build()?;
    let values = profile.sample(&rule)?.to_vec();
    let report = AddReport {
        version: VERSION,
        rule: *rule.descriptor(),
        provenance: profile.provenance(),
        nodes: rule.nodes().iter().map(|u| u.coords().to_vec()).collect(),
        values,
        max_residual: max_residual(&profile, &rule)?,
    };
    let bytes = render(a.common.format, &report, || {
        let mut header: Vec<String> = (1..=dim).map(|j| format!("u{j}")).collect();
        header.push("value".into());
        let rows = report
            .nodes
            .iter()
            .zip(&report.values)
            .map(|(u, v)| u.iter().chain([v]).map(|x| num(*x)).collect())
            .collect();
        (header, rows)
    })?;
    emit(&bytes, a.common.out.as_deref())?;
    Ok(Outcome::Ok)
}

/// Ensemble configuration from `--config` with the command-line overrides.
fn ensemble(c: &CampaignArgs, common: &Common) -> Result<EnsembleConfig, CliError> {
    let mut cfg: EnsembleConfig = match &c.config {
        Some(s) => input::parse("--config", s)?,
        None => EnsembleConfig::default(),
    };
    if let Some(d) = common.dim {
        cfg.dim = d;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if common.resolution.is_some() {
        cfg.resolution = common.resolution;
    }
    if !c.i.is_empty() {
        cfg.i_values = Some(c.i.clone());
    }
    if !c.p.is_empty() {
        cfg.p_values = c.p.clone();
    }
    if !c.phi.is_empty() {
        cfg.phis = c
            .phi
            .iter()
            .map(|s| input::parse("--phi", s))
            .collect::<Result<_, _>>()?;
    }
    if let Some(t) = c.tol_ineq {
        cfg.tolerances.ineq_tol = t;
    }
    if let Some(t) = c.tol_id {
        cfg.tolerances.id_tol = t;
    }
    Ok(cfg)
}

fn finish(report: &CampaignReport, common: &Common) -> Result<Outcome, CliError> {
    let bytes = render(common.format, report, || campaign_table(report))?;
    emit(&bytes, common.out.as_deref())?;
    let failures = report.failures().count();
    Ok(if failures > 0 {
        Outcome::ChecksFailed(failures)
    } else if report.trial_errors > 0 {
        Outcome::TrialErrors(report.trial_errors)
    } else {
        Outcome::Ok
    })
}

fn campaign_table(report: &CampaignReport) -> (Vec<String>, Vec<Vec<String>>) {
    let header = [
        "trial", "check", "kind", "status", "pass", "equality_case", "i", "p", "phi", "lhs",
        "rhs", "slack", "note",
    ]
    .map(String::from)
    .to_vec();
    let label = |v: serde_json::Value| v.as_str().unwrap_or_default().to_string();
    let rows = report
        .checks
        .iter()
        .map(|c| {
            let opt = |x: Option<String>| x.unwrap_or_default();
            vec![
                opt(c.inputs.trial.map(|t| t.to_string())),
                c.check.clone(),
                label(json!(c.kind)),
                label(json!(c.status)),
                c.pass.to_string(),
                c.equality_case.to_string(),
                opt(c.inputs.i.map(|i| i.to_string())),
                opt(c.inputs.p.map(num)),
                if c.inputs.phi.is_empty() {
                    String::new()
                } else {
                    json!(c.inputs.phi).to_string()
                },
                num(c.lhs),
                num(c.rhs),
                num(c.slack),
                c.note.clone().unwrap_or_default(),
            ]
        })
        .collect();
    (header, rows)
}

pub fn verify(a: &VerifyArgs) -> Result<Outcome, CliError> {
    let (k, l) = (body("--K", &a.k)?, body("--L", &a.l)?);
    let dim = resolve_dim(&a.common, &[k.dim(), l.dim()])?;
    let mut cfg = ensemble(&a.campaign, &a.common)?;
    cfg.dim = dim;
    let report = run_pair(&cfg, &k, &l)?;
    finish(&report, &a.common)
}

pub fn suite(a: &SuiteArgs) -> Result<Outcome, CliError> {
    let mut cfg = ensemble(&a.campaign, &a.common)?;
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    let report = run_campaign(&cfg)?;
    finish(&report, &a.common)
}
