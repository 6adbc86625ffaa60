//! Command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ialm::Mode;
use crate::problems::FairnessForm;

#[derive(Parser, Debug)]
#[command(name = "stoc-ialm", version, about = "Stochastic inexact augmented Lagrangian solver and benchmark runner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a preset problem for one or more seeds
    Run(RunArgs),
    /// Finite-difference check of a problem's gradients
    Gradcheck(GradcheckArgs),
    /// Oracle-count sweep over a tolerance grid (theoretical mode)
    Scaling(ScalingArgs),
    /// List the built-in presets
    Presets,
}

#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    /// Preset name (see `presets`)
    #[arg(long)]
    pub problem: String,
    /// Dataset file, or a directory holding the preset's files
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// TOML file overriding preset settings (flags override the file)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Fairness presets: 1-based feature whose nonzero rows form S_min
    #[arg(long)]
    pub minority_feature: Option<usize>,
    /// Fairness presets: per-sample constraint form
    #[arg(long, value_enum)]
    pub fairness_form: Option<FormArg>,
}

#[derive(Args, Debug, Clone)]
pub struct SolverFlags {
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub beta0: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub gamma0: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub max_data_passes: Option<f64>,
    /// Trace cadence in inner iterations
    #[arg(long)]
    pub trace_every: Option<u64>,
    /// Practical mode: momentum weight
    #[arg(long)]
    pub delta: Option<f64>,
    /// Practical mode: step size (default 1/L_k)
    #[arg(long)]
    pub eta_bar: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    #[arg(long)]
    pub max_inner: Option<u64>,
    /// Sample M constraint values for the dual step instead of the exact c(x)
    #[arg(long)]
    pub constraint_samples: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent trials, seeded from --seed
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Trace CSV; with several trials one file per trial (`<stem>.trial<i>.<ext>`)
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Write wall_ms as 0 so traces are reproducible byte for byte
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Args, Debug, Clone)]
pub struct GradcheckArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Points are drawn in [-radius, radius]^d
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep only the first N rows of each dataset
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long, hide = true)]
    pub corrupt_gradient: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct ScalingArgs {
    #[arg(long, default_value = "synthetic-qp")]
    pub problem: String,
    /// Comma-separated tolerances (at least three)
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps_grid: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Factor applied to the objective data
    #[arg(long)]
    pub obj_scale: Option<f64>,
    /// Factor applied to the constraint data
    #[arg(long)]
    pub con_scale: Option<f64>,
    /// Box radius of the instance
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub beta0: Option<f64>,
    /// CSV output (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Theoretical,
    Practical,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Theoretical => Mode::Theoretical,
            ModeArg::Practical => Mode::Practical,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormArg {
    Sum,
    Mean,
    GroupRate,
}

impl From<FormArg> for FairnessForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Sum => FairnessForm::Sum,
            FormArg::Mean => FairnessForm::Mean,
            FormArg::GroupRate => FairnessForm::GroupRate,
        }
    }
}
