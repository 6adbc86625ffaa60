//! Experiment runner: `run`, `gradcheck`, `scaling` and `presets`.
//!
//! Exit codes: 0 success, 1 gradient check failure or other error, 2 usage
//! or configuration error, 3 dataset missing, 4 solver divergence (the
//! partial trace is still written).

pub mod args;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::time::Instant;

use clap::Parser;
use rayon::prelude::*;

use crate::base::rng::derive_seed;
use crate::error::{Error, Result};
use crate::ialm::{gamma0_rule, solve, ConstraintPolicy, Mode, SolveResult, SolverConfig};
use crate::problems::{check_problem_gradients, CorruptedGradient, GradCheckReport, SyntheticAffineProblem};
use args::{Cli, Command, GradcheckArgs, RunArgs, ScalingArgs};
use config::{build, merge_file, merge_flags, FileConfig};
use output::{summary_table, trial_path, write_summary, write_trace_file, RunSummary, SCALING_HEADER};

/// Process exit code for `e`.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) | Error::Parse { .. } => 2,
        Error::DataMissing(_) => 3,
        Error::Divergence { .. } => 4,
        Error::DomainViolation(_) | Error::Io(_) => 1,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let res = match &cli.command {
        Command::Run(a) => cmd_run(a).map(|_| 0),
        Command::Gradcheck(a) => cmd_gradcheck(a).map(|(ok, _)| if ok { 0 } else { 1 }),
        Command::Scaling(a) => cmd_scaling(a).map(|_| 0),
        Command::Presets => {
            for p in crate::dataio::presets::presets() {
                println!("{:<14} {}", p.name, p.note);
            }
            Ok(0)
        }
    };
    res.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })
}

/// Seed of trial `i`: `seed` itself for a single trial, otherwise derived.
pub fn trial_seed(seed: u64, trials: usize, i: usize) -> u64 {
    if trials == 1 {
        seed
    } else {
        derive_seed(seed, i as u64)
    }
}

/// Resolved solver settings for `run`.
pub fn run_config(a: &RunArgs, file: &FileConfig, preset: SolverConfig) -> Result<SolverConfig> {
    let mut c = merge_flags(merge_file(preset, file)?, &a.solver);
    c.record_timing = !a.no_timing;
    c.validate()?;
    Ok(c)
}

pub fn cmd_run(a: &RunArgs) -> Result<Vec<RunSummary>> {
    if a.trials == 0 {
        return Err(Error::Config("--trials must be at least 1".into()));
    }
    let file = match &a.problem.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let built = build(&a.problem, &file, None)?;
    let config = run_config(a, &file, built.config)?;
    let problem = &*built.problem;

    let results: Vec<(u64, Result<SolveResult>, u64)> = (0..a.trials)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(a.seed, a.trials, i);
            let start = Instant::now();
            let r = solve(problem, &SolverConfig { seed, ..config.clone() });
            let ms = if a.no_timing { 0 } else { start.elapsed().as_millis() as u64 };
            (seed, r, ms)
        })
        .collect();

    let mut rows = Vec::new();
    let mut first_err = None;
    for (i, (seed, r, ms)) in results.into_iter().enumerate() {
        let path = a.trace.as_ref().map(|p| if a.trials == 1 { p.clone() } else { trial_path(p, i) });
        match r {
            Ok(res) => {
                if let Some(p) = &path {
                    write_trace_file(p, &res.trace)?;
                }
                rows.push(RunSummary::new(i, seed, &res, ms));
            }
            Err(e) => {
                if let (Some(p), Error::Divergence { trace, .. }) = (&path, &e) {
                    write_trace_file(p, trace)?;
                }
                first_err.get_or_insert(e);
            }
        }
    }
    if let Some(p) = &a.summary {
        write_summary(std::io::BufWriter::new(std::fs::File::create(p)?), &rows)?;
    }
    print!("{}", summary_table(&rows));
    match first_err {
        Some(e) => Err(e),
        None => Ok(rows),
    }
}

/// Returns whether the check passed, and the report.
pub fn cmd_gradcheck(a: &GradcheckArgs) -> Result<(bool, GradCheckReport)> {
    let file = match &a.problem.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let built = build(&a.problem, &file, a.rows)?;
    let report = match a.corrupt_gradient {
        Some(offset) => {
            let p = CorruptedGradient { inner: built.problem, offset };
            check_problem_gradients(&p, a.points, a.radius, a.step, a.seed)
        }
        None => check_problem_gradients(&*built.problem, a.points, a.radius, a.step, a.seed),
    };
    let ok = report.max_rel_err <= a.tol && report.max_rel_err.is_finite();
    println!(
        "{}: {} checks, max relative error {:.3e} (tolerance {:.1e}) at {}",
        if ok { "PASS" } else { "FAIL" },
        report.checks,
        report.max_rel_err,
        a.tol,
        report.worst
    );
    Ok((ok, report))
}

/// One tolerance of an oracle-count sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub eps: f64,
    pub oracle_total: u64,
    pub outer_iterations: usize,
    pub pres: f64,
    pub dres: f64,
    /// `‖y^k‖` per outer iteration.
    pub y_norms: Vec<f64>,
}

/// Least-squares slope of `ln y` against `ln(1/ε)`.
pub fn fit_loglog_slope(eps: &[f64], y: &[f64]) -> f64 {
    let xs: Vec<f64> = eps.iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Instance and schedule of the oracle-count sweep. The synthetic-qp data
/// are shrunk (objective and constraints separately) and the box widened so
/// that the last outer iterations, whose cost grows like `β_K²/ε³`, dominate
/// the count while the whole sweep stays cheap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingSetup {
    pub obj_scale: f64,
    pub con_scale: f64,
    pub radius: f64,
    pub beta0: f64,
    pub sigma: f64,
}

impl Default for ScalingSetup {
    fn default() -> Self {
        Self { obj_scale: 1.778e-8, con_scale: 3.162e-9, radius: 1000.0, beta0: 100.0, sigma: 2.0 }
    }
}

impl ScalingSetup {
    pub fn instance(&self) -> Result<SyntheticAffineProblem> {
        if !(self.obj_scale > 0.0 && self.con_scale > 0.0 && self.radius > 0.0) {
            return Err(Error::InvalidArgument("scales and radius must be positive".into()));
        }
        Ok(config::synthetic_qp().scaled(self.obj_scale, self.con_scale).with_box(self.radius))
    }

    /// Theoretical-mode settings for tolerance `eps` on `p`: constants from
    /// the instance, `M = ⌈ε⁻²⌉` sampled constraint values, `γ0` from its
    /// rule, single-pair batches.
    pub fn config(&self, p: &SyntheticAffineProblem, eps: f64, seed: u64) -> SolverConfig {
        let constants = p.nominal_constants(self.radius);
        SolverConfig {
            eps,
            beta0: self.beta0,
            sigma: self.sigma,
            gamma0: gamma0_rule(self.beta0, eps, constants.bc, self.sigma, constants.v),
            constraint_policy: ConstraintPolicy::Sampled(crate::base::ceil_snap(eps.powi(-2)) as usize),
            batch: 1,
            mode: Mode::Theoretical,
            trace_every: 10_000,
            max_data_passes: f64::INFINITY,
            seed,
            constants,
            record_timing: false,
            ..SolverConfig::default()
        }
    }

    /// Solves the instance in theoretical mode for every tolerance of `grid`.
    pub fn sweep(&self, grid: &[f64], seed: u64) -> Result<Vec<ScalingRow>> {
        if grid.len() < 3 {
            return Err(Error::InvalidArgument("the tolerance grid needs at least three values".into()));
        }
        if grid.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        let p = self.instance()?;
        grid.par_iter()
            .map(|&eps| {
                let r = solve(&p, &self.config(&p, eps, seed))?;
                Ok(ScalingRow {
                    eps,
                    oracle_total: r.oracle_calls,
                    outer_iterations: r.outer_iterations,
                    pres: r.pres,
                    dres: r.dres,
                    y_norms: r.y_norms,
                })
            })
            .collect()
    }
}

pub fn cmd_scaling(a: &ScalingArgs) -> Result<(Vec<ScalingRow>, f64)> {
    if a.problem != "synthetic-qp" {
        return Err(Error::Config("the scaling study runs on synthetic-qp only".into()));
    }
    let d = ScalingSetup::default();
    let setup = ScalingSetup {
        obj_scale: a.obj_scale.unwrap_or(d.obj_scale),
        con_scale: a.con_scale.unwrap_or(d.con_scale),
        radius: a.radius.unwrap_or(d.radius),
        beta0: a.beta0.unwrap_or(d.beta0),
        sigma: a.sigma.unwrap_or(d.sigma),
    };
    let rows = setup.sweep(&a.eps_grid, a.seed)?;
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let counts: Vec<f64> = rows.iter().map(|r| r.oracle_total as f64).collect();
    let slope = fit_loglog_slope(&eps, &counts);
    let mut text = format!("{SCALING_HEADER}\n");
    for r in &rows {
        text += &format!("{},{},{},{},{},{}\n", r.eps, r.oracle_total, r.outer_iterations, r.pres, r.dres, slope);
    }
    match &a.out {
        Some(p) => std::fs::write(p, &text)?,
        None => print!("{text}"),
    }
    eprintln!("fitted slope of log Oracle_total vs log(1/eps): {slope:.3}");
    Ok((rows, slope))
}
