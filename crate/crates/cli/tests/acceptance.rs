//! Acceptance suite. Runs without the libtest harness so that one
//! PASS/FAIL line per criterion is always printed; exits non-zero if any
//! criterion fails.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use widthlab_core::verify::{
    covariance_resolution, random_body, random_rotation, random_special_linear, run_pair,
    CheckKind, Checker, EnsembleConfig, Status, Tolerances,
};
use widthlab_core::{
    ball_volume, build_rule, default_resolution, ith_mixed_width, lp_width_sum,
    orlicz_width_sum, width_integral, OrliczFunction, OrliczFunctionM, QuadratureRule,
    SupportBody, WidthProfile,
};

type Outcome = Result<String, String>;

/// Name, check, and wall-clock limit in seconds.
type Criterion = (&'static str, fn() -> Outcome, Option<f64>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn default_rule(dim: usize) -> QuadratureRule {
    build_rule(dim, default_resolution(dim), None).unwrap()
}

fn ball(dim: usize, r: f64) -> WidthProfile {
    WidthProfile::from_body(SupportBody::ball(vec![0.0; dim], r).unwrap())
}

fn ensemble(dim: usize, seed: u64) -> EnsembleConfig {
    EnsembleConfig {
        dim,
        seed,
        ..EnsembleConfig::default()
    }
}

fn pair(cfg: &EnsembleConfig, t: u64) -> Result<(SupportBody, SupportBody), String> {
    Ok((
        random_body(cfg, 2 * t).map_err(err)?,
        random_body(cfg, 2 * t + 1).map_err(err)?,
    ))
}

fn phis() -> Vec<OrliczFunction> {
    vec![
        OrliczFunction::power(1.0).unwrap(),
        OrliczFunction::power(2.0).unwrap(),
        OrliczFunction::mixture(vec![0.5, 0.5], vec![1.0, 3.0]).unwrap(),
    ]
}

fn c1_ball_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for (n, tol) in [(2usize, 1e-10), (3, 1e-8)] {
        let rule = default_rule(n);
        let v = ball_volume(n);
        for i in 0..n {
            let got = width_integral(&ball(n, 1.0), i, &rule).map_err(err)?;
            ensure((got - v).abs() <= tol, || format!("n={n} i={i}: {got} vs {v}"))?;
            worst = worst.max((got - v).abs());
            for r in [0.5, 2.0] {
                let got = width_integral(&ball(n, r), i, &rule).map_err(err)?;
                let want = r.powi((n - i) as i32) * v;
                ensure((got - want).abs() <= 1e-9, || {
                    format!("n={n} i={i} r={r}: {got} vs {want}")
                })?;
                worst = worst.max((got - want).abs());
            }
        }
    }
    Ok(format!("max abs error {worst:.1e}"))
}

fn c2_square_oracle() -> Outcome {
    let rule = default_rule(2);
    let square = WidthProfile::from_body(SupportBody::centered_box(&[1.0, 1.0]).unwrap());
    let a0 = width_integral(&square, 0, &rule).map_err(err)?;
    let mixed = ith_mixed_width(&square, &ball(2, 1.0), 0, &rule).map_err(err)?;
    ensure((a0 - (PI + 2.0)).abs() <= 1e-6, || format!("A_0 = {a0}"))?;
    ensure((mixed - 4.0).abs() <= 1e-6, || format!("A_0(square, disk) = {mixed}"))?;
    Ok(format!(
        "A_0 err {:.1e}, mixed err {:.1e}",
        (a0 - PI - 2.0).abs(),
        (mixed - 4.0).abs()
    ))
}

fn c3_lp_agreement() -> Outcome {
    let mut worst: f64 = 0.0;
    for dim in [2, 3] {
        let rule = default_rule(dim);
        let cfg = ensemble(dim, 3);
        for t in 0..20 {
            let (k, l) = pair(&cfg, t)?;
            let (k, l) = (WidthProfile::from_body(k), WidthProfile::from_body(l));
            for p in [1.0, 2.0, 3.5] {
                let pw = OrliczFunction::power(p).unwrap();
                let phi = OrliczFunctionM::sum_of(vec![pw.clone(), pw]).unwrap();
                let orl = orlicz_width_sum(&phi, &[k.clone(), l.clone()]).map_err(err)?;
                let lp = lp_width_sum(p, &k, &l).map_err(err)?;
                let (a, b) = (orl.sample(&rule).map_err(err)?, lp.sample(&rule).map_err(err)?);
                let d = a
                    .iter()
                    .zip(b.iter())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                ensure(d <= 1e-10, || format!("dim {dim} pair {t} p={p}: {d:e}"))?;
                worst = worst.max(d);
            }
        }
    }
    Ok(format!("max node discrepancy {worst:.1e}"))
}

/// Output of one `suite` run through the command-line binary.
struct SuiteRun {
    bytes: Vec<u8>,
    report: Value,
    code: Option<i32>,
    seconds: f64,
}

fn suite_run(args: &[&str]) -> SuiteRun {
    let dir = tempfile::tempdir().unwrap();
    let out: PathBuf = dir.path().join("report.json");
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_widthlab"))
        .args(args)
        .arg("--out")
        .arg(&out)
        .status()
        .expect("launching widthlab");
    let seconds = start.elapsed().as_secs_f64();
    let bytes = std::fs::read(&out).unwrap_or_default();
    let report = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    SuiteRun {
        bytes,
        report,
        code: status.code(),
        seconds,
    }
}

/// The full 200-trial campaign for `dim`, timed on a single worker thread.
fn campaign(dim: usize) -> &'static SuiteRun {
    static RUNS: [OnceLock<SuiteRun>; 2] = [OnceLock::new(), OnceLock::new()];
    RUNS[dim - 2].get_or_init(|| {
        let d = dim.to_string();
        suite_run(&[
            "--threads", "1", "suite", "--dim", &d, "--trials", "200", "--seed", "42",
        ])
    })
}

fn checks<'a>(run: &'a SuiteRun, name: &'a str) -> impl Iterator<Item = &'a Value> {
    run.report["checks"]
        .as_array()
        .into_iter()
        .flatten()
        .filter(move |c| c["check"] == name)
}

fn c4_residuals() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for dim in [2, 3] {
        let run = campaign(dim);
        ensure(run.report["trial_errors"] == 0, || {
            format!("dim {dim}: trial errors {}", run.report["trial_errors"])
        })?;
        for c in checks(run, "solver_residual") {
            let r = c["lhs"].as_f64().unwrap_or(f64::INFINITY);
            ensure(r <= 1e-10, || format!("dim {dim}: residual {r:e}"))?;
            worst = worst.max(r);
            count += 1;
        }
    }
    ensure(count > 0, || "no residual checks in the reports".into())?;
    Ok(format!("{count} sums, max residual {worst:.1e}"))
}

const INEQUALITIES: [&str; 5] = [
    "minkowski_mixed_width",
    "lp_minkowski",
    "lp_brunn_minkowski",
    "orlicz_minkowski",
    "orlicz_brunn_minkowski",
];

fn c5_inequality_suite() -> Outcome {
    let mut parts = Vec::new();
    for dim in [2, 3] {
        let run = campaign(dim);
        ensure(run.code == Some(0), || format!("dim {dim}: exit code {:?}", run.code))?;
        ensure(run.seconds < 300.0, || format!("dim {dim}: {:.0} s", run.seconds))?;
        let mut n = 0;
        let mut min_slack = f64::INFINITY;
        for name in INEQUALITIES {
            for c in checks(run, name) {
                let s = c["slack"].as_f64().unwrap_or(f64::NEG_INFINITY);
                ensure(s >= -1e-8, || format!("dim {dim} {name}: slack {s:e}"))?;
                min_slack = min_slack.min(s);
                n += 1;
            }
        }
        ensure(n > 0, || format!("dim {dim}: no inequality checks"))?;
        parts.push(format!(
            "n={dim}: {n} checks, min slack {min_slack:.1e}, {:.0} s",
            run.seconds
        ));
    }
    Ok(parts.join("; "))
}

fn c6_equality_cases() -> Outcome {
    let mut n = 0;
    for dim in [2, 3] {
        let cfg = ensemble(dim, 0);
        for (r, s) in [(1.0, 1.0), (1.0, 2.0), (0.5, 3.0)] {
            let k = SupportBody::ball(vec![0.0; dim], r).unwrap();
            let l = SupportBody::ball(vec![0.0; dim], s).unwrap();
            let report = run_pair(&cfg, &k, &l).map_err(err)?;
            for c in report
                .checks
                .iter()
                .filter(|c| INEQUALITIES.contains(&c.check.as_str()) || c.check == "jensen_width_measure")
            {
                ensure(c.slack.abs() < 1e-5 && c.equality_case, || {
                    format!("dim {dim} ({r}, {s}) {}: slack {:e}", c.check, c.slack)
                })?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} inequality checks at equality"))
}

fn c7_decomposition() -> Outcome {
    let f = phis();
    let mut worst: f64 = 0.0;
    for dim in [2, 3] {
        let rule = default_rule(dim);
        let checker = Checker::new(&rule, Tolerances::default());
        let cfg = ensemble(dim, 7);
        for t in 0..50u64 {
            let (k, l) = pair(&cfg, t)?;
            let (k, l) = (WidthProfile::from_body(k), WidthProfile::from_body(l));
            let j = t as usize % f.len();
            let (p1, p2) = (&f[j], &f[(j + 1) % f.len()]);
            for i in 0..dim {
                let c = checker.check_decomposition(p1, p2, &k, &l, i).map_err(err)?;
                let d = (c.lhs - c.rhs).abs();
                ensure(d <= 1e-8, || format!("dim {dim} pair {t} i={i}: {d:e}"))?;
                worst = worst.max(d);
            }
        }
    }
    Ok(format!("max |difference| {worst:.1e}"))
}

fn c8_variation() -> Outcome {
    let f = phis();
    let steps = EnsembleConfig::default().variation_steps;
    let mut ball_worst: f64 = 0.0;
    for dim in [2, 3] {
        let rule = default_rule(dim);
        let checker = Checker::new(&rule, Tolerances::default());
        let v = ball_volume(dim);
        let b = ball(dim, 1.0);
        for (p1, p2) in [(&f[1], &f[0]), (&f[2], &f[1]), (&f[0], &f[2])] {
            for i in 0..dim {
                let c = checker.check_variation(p1, p2, &b, &b, i, &steps).map_err(err)?;
                let rel = (c.lhs - v).abs() / v;
                ensure(rel <= 1e-4, || format!("ball dim {dim} i={i}: rel {rel:e}"))?;
                ball_worst = ball_worst.max(rel);
            }
        }
    }
    let rule = default_rule(2);
    let checker = Checker::new(&rule, Tolerances::default());
    let cfg = ensemble(2, 8);
    let mut pair_worst: f64 = 0.0;
    for t in 0..10u64 {
        let (k, l) = pair(&cfg, t)?;
        let (k, l) = (WidthProfile::from_body(k), WidthProfile::from_body(l));
        let j = t as usize % f.len();
        for i in 0..2 {
            let c = checker
                .check_variation(&f[j], &f[(j + 1) % f.len()], &k, &l, i, &steps)
                .map_err(err)?;
            let rel = -c.slack;
            ensure(c.status == Status::Pass && rel <= 1e-3, || {
                format!("pair {t} i={i}: {:?}, rel {rel:e}", c.status)
            })?;
            pair_worst = pair_worst.max(rel);
        }
    }
    Ok(format!(
        "ball rel err {ball_worst:.1e}, random pairs rel err {pair_worst:.1e}"
    ))
}

fn c9_lemma_bounds() -> Outcome {
    let f = phis();
    let mut n = 0;
    for dim in [2, 3] {
        let rule = default_rule(dim);
        let checker = Checker::new(&rule, Tolerances::default());
        let cfg = ensemble(dim, 9);
        for m in [2u64, 3, 5] {
            for (j, phi) in f.iter().enumerate() {
                let ops = (0..m)
                    .map(|q| random_body(&cfg, 10 * m + q + 100 * j as u64).map(WidthProfile::from_body))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(err)?;
                let c = checker.check_bounds_lemma35(phi, &ops).map_err(err)?;
                ensure(c.status == Status::Pass, || {
                    format!("dim {dim} m={m}: slack {:e}", c.slack)
                })?;
                let same = vec![ball(dim, 1.3); m as usize];
                let c = checker.check_bounds_lemma35(phi, &same).map_err(err)?;
                ensure(
                    c.slack.abs() <= 1e-9 && (c.rhs - c.lhs).abs() <= 1e-9 && c.equality_case,
                    || format!("identical balls dim {dim} m={m}: slack {:e}", c.slack),
                )?;
                n += 2;
            }
        }
    }
    Ok(format!("{n} operand sets"))
}

fn c10_rotation() -> Outcome {
    let f = phis();
    let mut parts = Vec::new();
    for (dim, tol) in [(2usize, 1e-8), (3, 1e-6)] {
        let res = covariance_resolution(dim, default_resolution(dim));
        let rule = build_rule(dim, res, None).unwrap();
        let checker = Checker::new(&rule, Tolerances::default());
        let cfg = ensemble(dim, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let (mut worst, mut worst_kind, mut sl_max) = (0.0f64, String::new(), 0.0f64);
        for t in 0..20u64 {
            let (k, l) = pair(&cfg, t)?;
            let rot = random_rotation(&mut rng, dim);
            let sl = random_special_linear(&mut rng, dim);
            for phi in &f {
                for i in 0..dim {
                    let c = checker.probe_linear_covariance(phi, &k, &l, i, &rot).map_err(err)?;
                    if -c.slack > worst {
                        worst = -c.slack;
                        worst_kind = format!("{} / {}", kind(&k), kind(&l));
                    }
                    let p = checker.probe_linear_covariance(phi, &k, &l, i, &sl).map_err(err)?;
                    ensure(p.kind == CheckKind::Probe && p.status == Status::Probe, || {
                        format!("SL map reported as {:?}", p.status)
                    })?;
                    sl_max = sl_max.max((p.lhs - p.rhs).abs() / p.rhs);
                }
            }
        }
        parts.push(format!(
            "n={dim} rule {res}: max rel {worst:.1e} (tol {tol:.0e}, worst pair {worst_kind}), SL probe max {sl_max:.2}"
        ));
        ensure(worst <= tol, || parts.join("; "))?;
    }
    Ok(parts.join("; "))
}

fn kind(b: &SupportBody) -> &'static str {
    match b {
        SupportBody::Ball { .. } => "ball",
        SupportBody::Ellipsoid { .. } => "ellipsoid",
        SupportBody::Polytope { .. } => "polytope",
        SupportBody::LinearImage { .. } => "image",
    }
}

fn c11_determinism() -> Outcome {
    let first = campaign(2);
    let second = suite_run(&["suite", "--seed", "42"]);
    ensure(first.code == Some(0) && second.code == Some(0), || {
        format!("exit codes {:?} {:?}", first.code, second.code)
    })?;
    ensure(!first.bytes.is_empty() && first.bytes == second.bytes, || {
        "reports differ".into()
    })?;
    Ok(format!(
        "{} identical bytes (1 thread vs default threads)",
        first.bytes.len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("ball oracle", c1_ball_oracle, Some(1.0)),
        ("square oracle", c2_square_oracle, Some(1.0)),
        ("L_p / Orlicz agreement", c3_lp_agreement, Some(30.0)),
        ("implicit-equation residual", c4_residuals, None),
        ("inequality suite", c5_inequality_suite, None),
        ("equality cases", c6_equality_cases, None),
        ("decomposition identity", c7_decomposition, None),
        ("first variation", c8_variation, Some(60.0)),
        ("width bounds", c9_lemma_bounds, None),
        ("rotation invariance and SL probe", c10_rotation, None),
        ("determinism", c11_determinism, None),
    ];
    let mut failed = 0;
    for (n, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = run();
        let secs = start.elapsed().as_secs_f64();
        if let (Ok(d), Some(limit)) = (&outcome, limit) {
            if secs >= *limit {
                outcome = Err(format!("{d}; runtime over the {limit} s limit"));
            }
        }
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS {name} [{secs:.1} s]: {d}", n + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} [{secs:.1} s]: {d}", n + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
