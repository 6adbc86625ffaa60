//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and a
//! tally; a failing criterion is reported, not raised. Set
//! `STOC_IALM_ACCEPTANCE_STRICT=1` to turn any failure into a nonzero exit.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use stoc_ialm::base::{dist, norm, prox_in_place, NonsmoothTerm};
use stoc_ialm::cli::args::ProblemArgs;
use stoc_ialm::cli::config::{build, FileConfig};
use stoc_ialm::cli::{fit_loglog_slope, trial_seed, ScalingSetup};
use stoc_ialm::dataio::presets;
use stoc_ialm::estimator::{al_smooth_gradient_exact, minibatch_delta};
use stoc_ialm::ialm::{outer_iteration_cap, solve, SolverConfig, Status};
use stoc_ialm::kkt::{dual_residual, primal_residual};
use stoc_ialm::problems::{check_problem_gradients, SyntheticAffineProblem};
use stoc_ialm::pstorm::{self, delta_formula, derive_params, Finish, MonitorAction, PStormParams, RunOptions};
use stoc_ialm::{Error, Problem, RngStream, SamplePair, StreamLabel};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Dual-norm sequences of every run, for the bound check.
#[derive(Default)]
struct Runs {
    duals: Vec<(String, f64, Vec<f64>)>,
}

impl Runs {
    fn record(&mut self, name: impl Into<String>, gamma0: f64, y_norms: &[f64]) {
        self.duals.push((name.into(), gamma0, y_norms.to_vec()));
    }
}

fn data_dir() -> PathBuf {
    std::env::var_os("STOC_IALM_DATA_DIR").map(PathBuf::from).unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

fn problem_args(name: &str) -> ProblemArgs {
    ProblemArgs { problem: name.into(), data: Some(data_dir()), config: None, minority_feature: None, fairness_form: None }
}

/// Ten seeded trials of a preset; every trial must converge within `max_passes`.
fn preset_trials(name: &str, max_passes: f64, runs: &mut Runs) -> Outcome {
    let built = match build(&problem_args(name), &FileConfig::default(), None) {
        Ok(b) => b,
        Err(e @ Error::DataMissing(_)) => return outcome(false, format!("dataset unavailable ({e})")),
        Err(e) => return outcome(false, format!("build failed: {e}")),
    };
    let config = SolverConfig { record_timing: false, ..built.config };
    let mut worst_passes: f64 = 0.0;
    let mut worst_ms = 0u128;
    let mut failures = Vec::new();
    for i in 0..10 {
        let seed = trial_seed(0, 10, i);
        let start = Instant::now();
        let r = match solve(&*built.problem, &SolverConfig { seed, ..config.clone() }) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("trial {i}: {e}")),
        };
        worst_ms = worst_ms.max(start.elapsed().as_millis());
        runs.record(format!("{name} trial {i}"), config.gamma0, &r.y_norms);
        worst_passes = worst_passes.max(r.data_passes);
        if r.status != Status::Converged || r.pres > 1e-2 || r.dres > 1e-2 || r.data_passes > max_passes {
            failures.push(format!("trial {i}: {} pres {:.2e} dres {:.2e} passes {:.2}", r.status.as_str(), r.pres, r.dres, r.data_passes));
        }
    }
    let summary = format!("max passes {worst_passes:.2} (limit {max_passes}), slowest trial {worst_ms} ms");
    if failures.is_empty() && worst_ms < 120_000 {
        outcome(true, summary)
    } else {
        outcome(false, format!("{summary}; {}", failures.join("; ")))
    }
}

fn synthetic_exactness(runs: &mut Runs) -> Outcome {
    let built = build(&problem_args("synthetic-qp"), &FileConfig::default(), None).unwrap();
    let (_, y_star) = built.reference.expect("synthetic preset carries its KKT pair");
    let config = SolverConfig { eps: 1e-3, record_timing: false, ..built.config };
    let start = Instant::now();
    let r = solve(&*built.problem, &config).unwrap();
    let secs = start.elapsed().as_secs_f64();
    runs.record("synthetic-qp eps=1e-3", config.gamma0, &r.y_norms);
    let pres = primal_residual(&*built.problem, &r.x);
    let dres = dual_residual(&*built.problem, &r.x, &y_star).unwrap();
    outcome(pres <= 1e-3 && dres <= 1e-3 && secs < 10.0, format!("pres {pres:.2e}, dres at y* {dres:.2e}, {secs:.2} s"))
}

fn parameter_formulas() -> Outcome {
    let delta = delta_formula(1.0, 1000.0);
    let m1 = derive_params(1.0, 1.0, 1.0, 0.1, None, None).map(|p| p.m1);
    let k = outer_iteration_cap(0.1, 1.0, 1.0, 0.0, 1.0, 1.0, 10.0, 1.0);
    let delta_ok = (delta - 23.0 / 104.0).abs() <= f64::EPSILON * delta;
    let pass = delta_ok && matches!(m1, Ok(4800)) && matches!(k, Ok(4));
    outcome(pass, format!("delta {delta} (23/104 = {}), m1 {m1:?}, K {k:?}", 23.0 / 104.0))
}

fn estimator_unbiasedness() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let p = SyntheticAffineProblem::random(5, 2, 3, 0.1, 0.5, seed);
        let mut rng = RngStream::new(seed, StreamLabel::Custom(6));
        let x: Vec<f64> = (0..5).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let y: Vec<f64> = (0..2).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let all = p.all_samples();
        let pairs: Vec<SamplePair> = all.iter().flat_map(|&a| all.iter().map(move |&b| SamplePair { xi1: a, xi2: b })).collect();
        let avg = minibatch_delta(&p, &x, &y, 3.0, &pairs).unwrap();
        let exact = al_smooth_gradient_exact(&p, &x, &y, 3.0);
        worst = worst.max(dist(&avg, &exact) / norm(&exact));
    }
    outcome(worst <= 1e-10, format!("max relative error {worst:.2e} over 5 instances with N = 3"))
}

fn deterministic_reduction() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..3u64 {
        let p = SyntheticAffineProblem::random(4, 2, 1, 0.0, 0.0, 100 + seed)
            .with_nonsmooth(NonsmoothTerm::nonneg_orthant(vec![0, 2], 4).unwrap());
        let (y, beta, step) = (vec![0.3, -0.2], 2.0, 0.01);
        let x0 = vec![0.5, -0.3, 0.2, 0.1];
        let mut seen = Vec::new();
        let mut mon = |_: u64, x: &[f64], _: u64| {
            seen.push(x.to_vec());
            MonitorAction::Continue
        };
        let params = PStormParams { t: 100, eta_bar: step, delta: 0.4, m0: 1, m1: 1, batch: 1, eta: 1.0, c0: 1.0 };
        let mut rng = RngStream::new(seed, StreamLabel::Subroutine(0));
        let opts = RunOptions { trace_every: 1, finish: Finish::LastIterate };
        pstorm::run(&p, &x0, &y, beta, &params, &mut rng, opts, Some(&mut mon)).unwrap();
        if seen.len() != 100 {
            return outcome(false, format!("{} iterates observed", seen.len()));
        }
        let mut x = x0;
        for got in &seen {
            let g = al_smooth_gradient_exact(&p, &x, &y, beta);
            x.iter_mut().zip(&g).for_each(|(xi, gi)| *xi -= step * gi);
            prox_in_place(p.nonsmooth(), &mut x, step);
            worst = worst.max(dist(got, &x) / norm(&x).max(1.0));
        }
    }
    outcome(worst <= 1e-12, format!("max deviation {worst:.2e} over 3 quadratics x 100 steps"))
}

fn gradient_checks() -> Outcome {
    let mut parts = Vec::new();
    let mut skipped = Vec::new();
    let mut pass = true;
    for preset in presets::presets() {
        match build(&problem_args(preset.name), &FileConfig::default(), None) {
            Ok(b) => {
                let r = check_problem_gradients(&*b.problem, 20, 1.0, 1e-5, 0);
                pass &= r.max_rel_err <= 1e-4;
                parts.push(format!("{} {:.1e}", preset.name, r.max_rel_err));
            }
            Err(Error::DataMissing(_)) => skipped.push(preset.name),
            Err(e) => return outcome(false, format!("{}: {e}", preset.name)),
        }
    }
    let mut detail = format!("max relative error: {}", parts.join(", "));
    if !skipped.is_empty() {
        detail += &format!("; no data for {} (same problem classes as checked above)", skipped.join(", "));
    }
    outcome(pass, detail)
}

fn dual_bound(runs: &Runs) -> Outcome {
    let mut iterations = 0;
    for (name, gamma0, norms) in &runs.duals {
        for (k, &n) in norms.iter().enumerate() {
            iterations += 1;
            if n > k as f64 * gamma0 {
                return outcome(false, format!("{name}: ||y^{k}|| = {n} > {}", k as f64 * gamma0));
            }
        }
    }
    outcome(!runs.duals.is_empty(), format!("{iterations} outer iterates over {} runs", runs.duals.len()))
}

fn complexity_scaling(runs: &mut Runs) -> Outcome {
    let grid = [0.2, 0.1, 0.05, 0.025];
    let setup = ScalingSetup::default();
    let start = Instant::now();
    let rows = setup.sweep(&grid, 0).unwrap();
    let p = setup.instance().unwrap();
    for r in &rows {
        runs.record(format!("scaling eps={}", r.eps), setup.config(&p, r.eps, 0).gamma0, &r.y_norms);
    }
    let counts: Vec<f64> = rows.iter().map(|r| r.oracle_total as f64).collect();
    let slope = fit_loglog_slope(&grid, &counts);
    outcome(
        (3.5..=6.5).contains(&slope),
        format!(
            "slope {slope:.3}, oracle totals {:?}, {:.1} s",
            rows.iter().map(|r| r.oracle_total).collect::<Vec<_>>(),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn csv_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("stoc-ialm-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut identical = true;
    let mut detail = Vec::new();
    for problem in ["np-spambase", "synthetic-qp"] {
        let mut traces = Vec::new();
        for rep in 0..2 {
            let path = dir.join(format!("{problem}.{rep}.csv"));
            let status = Command::new(env!("CARGO_BIN_EXE_stoc-ialm"))
                .args(["run", "--problem", problem, "--seed", "17", "--no-timing", "--trace"])
                .arg(&path)
                .env("STOC_IALM_DATA_DIR", data_dir())
                .env("RUST_LOG", "error")
                .output()
                .unwrap();
            if !status.status.success() {
                let _ = std::fs::remove_dir_all(&dir);
                return outcome(false, format!("{problem}: run exited with {}", status.status));
            }
            traces.push(std::fs::read(&path).unwrap());
        }
        identical &= traces[0] == traces[1];
        detail.push(format!("{problem} {} bytes", traces[0].len()));
    }
    let _ = std::fs::remove_dir_all(&dir);
    outcome(identical, format!("two runs each, byte-identical: {}", detail.join(", ")))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
    })
}

fn main() {
    let mut runs = Runs::default();
    // the dual-norm bound runs last: it inspects every run above
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "fairness a9a, 10 trials", guarded(|| preset_trials("fairness-a9a", 12.0, &mut runs))),
        (2, "fairness bank, 10 trials", guarded(|| preset_trials("fairness-bank", 15.0, &mut runs))),
        (3, "Neyman-Pearson spambase, 10 trials", guarded(|| preset_trials("np-spambase", 120.0, &mut runs))),
        (4, "synthetic exactness", guarded(|| synthetic_exactness(&mut runs))),
        (5, "parameter formulas", guarded(parameter_formulas)),
        (6, "estimator unbiasedness", guarded(estimator_unbiasedness)),
        (7, "deterministic-oracle reduction", guarded(deterministic_reduction)),
        (8, "gradient checks", guarded(gradient_checks)),
        (10, "complexity scaling", guarded(|| complexity_scaling(&mut runs))),
        (11, "CSV determinism", guarded(csv_determinism)),
        (9, "dual-norm bound", guarded(|| dual_bound(&runs))),
    ];
    results.sort_by_key(|r| r.0);

    for (id, name, o) in &results {
        println!("criterion {id:>2}: {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let passed = results.iter().filter(|r| r.2.pass).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed < results.len() && std::env::var_os("STOC_IALM_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
