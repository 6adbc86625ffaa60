//! Problem construction and solver settings.
//!
//! Precedence: preset defaults < TOML file (`--config`) < flags. File schema:
//!
//! ```toml
//! data = "data/a9a"          # optional, as --data
//! minority_feature = 71      # optional, fairness presets
//! fairness_form = "mean"     # optional: sum | mean | group-rate
//!
//! [solver]                   # any SolverConfig field
//! eps = 1e-2
//! sigma = 2.5
//! l_override = { base = 10.0, slope = 1.0 }
//! constraint_policy = "exact"          # or { sampled = 100 }
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::args::{ProblemArgs, SolverFlags};
use crate::base::Vector;
use crate::dataio::presets::{data_dir, fairness_splits, find_preset, presets, MinorityRule, PresetKind};
use crate::dataio::{load_libsvm, preprocess, Dataset};
use crate::error::{Error, Result};
use crate::ialm::{ConstraintPolicy, Mode, SmoothnessRule, SolverConfig};
use crate::problem::Problem;
use crate::problems::{synthetic_kkt_reference, FairnessForm, NeymanPearsonProblem, SlackReformulation, SyntheticAffineProblem};

/// Box radius of the synthetic-qp instance.
pub const SYNTHETIC_RADIUS: f64 = 10.0;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub data: Option<PathBuf>,
    pub minority_feature: Option<usize>,
    pub fairness_form: Option<FairnessForm>,
    pub solver: Option<toml::Table>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// The synthetic-qp instance: 10 variables, 3 equality constraints, 20
/// samples, `‖x‖∞ ≤ 10`, `μ = 0`.
pub fn synthetic_qp() -> SyntheticAffineProblem {
    SyntheticAffineProblem::random(10, 3, 20, 0.0, 0.3, 2024).with_box(SYNTHETIC_RADIUS)
}

/// A problem with its preset solver settings.
pub struct Built {
    pub problem: Box<dyn Problem>,
    pub config: SolverConfig,
    /// Exact KKT pair when known.
    pub reference: Option<(Vector, Vector)>,
}

/// Preset solver settings for `name`.
pub fn preset_config(name: &str) -> Result<SolverConfig> {
    let preset = find_preset(name).ok_or_else(|| unknown_preset(name))?;
    let base = SolverConfig { eps: 1e-2, beta0: 1.0, trace_every: 50, ..SolverConfig::default() };
    Ok(match preset.kind {
        PresetKind::Fairness { .. } => SolverConfig {
            sigma: 2.5,
            gamma0: 100.0,
            batch: 30,
            l_override: Some(SmoothnessRule { base: 10.0, slope: 1.0 }),
            max_data_passes: 100.0,
            ..base
        },
        PresetKind::NeymanPearson { batch, .. } => SolverConfig {
            sigma: 2.0,
            gamma0: 100.0,
            batch,
            l_override: Some(SmoothnessRule { base: 0.5, slope: 0.5 }),
            delta: Some(0.1),
            max_data_passes: 500.0,
            ..base
        },
        PresetKind::Synthetic => SolverConfig {
            sigma: 2.0,
            gamma0: 100.0,
            batch: 5,
            constants: synthetic_qp().nominal_constants(SYNTHETIC_RADIUS),
            max_data_passes: 1e7,
            ..base
        },
    })
}

fn unknown_preset(name: &str) -> Error {
    let names: Vec<&str> = presets().iter().map(|p| p.name).collect();
    Error::Config(format!("unknown problem '{name}' (known: {})", names.join(", ")))
}

fn load(path: &Path, dim: Option<usize>, rows: Option<usize>) -> Result<Dataset> {
    let ds = load_libsvm(path, dim)?;
    Ok(match rows {
        Some(n) => ds.head(n),
        None => ds,
    })
}

/// Builds the named problem. `rows` truncates every dataset (toy slices).
pub fn build(args: &ProblemArgs, file: &FileConfig, rows: Option<usize>) -> Result<Built> {
    let preset = find_preset(&args.problem).ok_or_else(|| unknown_preset(&args.problem))?;
    let config = preset_config(&args.problem)?;
    let data = args.data.clone().or_else(|| file.data.clone());
    let problem: Box<dyn Problem> = match preset.kind {
        PresetKind::Fairness { labeled, unlabeled, minority, c, expected, dim } => {
            let (lp, up) = match &data {
                Some(p) if p.is_dir() => (p.join(labeled), p.join(unlabeled)),
                Some(p) => (p.clone(), p.clone()),
                None => (data_dir().join(labeled), data_dir().join(unlabeled)),
            };
            let d = load(&lp, Some(dim), rows)?;
            let s = if up == lp { d.clone() } else { load(&up, Some(dim), rows)? };
            let rule = match args.minority_feature.or(file.minority_feature) {
                Some(index) => MinorityRule::FeatureNonzero { index },
                None => minority,
            };
            let form = args.fairness_form.map(FairnessForm::from).or(file.fairness_form).unwrap_or(FairnessForm::Mean);
            let expected = if rows.is_none() { Some(expected) } else { None };
            Box::new(SlackReformulation::new(fairness_splits(&d, &s, &rule, c, form, expected)?))
        }
        PresetKind::NeymanPearson { file: name, c_hat, expected, .. } => {
            let path = match &data {
                Some(p) if p.is_dir() => p.join(name),
                Some(p) => p.clone(),
                None => data_dir().join(name),
            };
            let ds = preprocess(&load(&path, Some(expected.1), rows)?)?;
            if rows.is_none() && ds.n() != expected.0 {
                log::warn!("{name}: {} rows, expected {}", ds.n(), expected.0);
            }
            Box::new(SlackReformulation::new(NeymanPearsonProblem::new(&ds, c_hat)?))
        }
        PresetKind::Synthetic => {
            let p = synthetic_qp();
            let reference = synthetic_kkt_reference(&p)?;
            return Ok(Built { problem: Box::new(p), config, reference: Some(reference) });
        }
    };
    Ok(Built { problem, config, reference: None })
}

/// Applies the `[solver]` table of `file` over `config`.
pub fn merge_file(config: SolverConfig, file: &FileConfig) -> Result<SolverConfig> {
    let Some(over) = &file.solver else { return Ok(config) };
    let mut table = toml::Table::try_from(&config).map_err(|e| Error::Config(e.to_string()))?;
    for (k, v) in over {
        table.insert(k.clone(), v.clone());
    }
    table.try_into().map_err(|e: toml::de::Error| Error::Config(format!("[solver]: {e}")))
}

/// Applies command-line flags over `config`.
pub fn merge_flags(mut c: SolverConfig, f: &SolverFlags) -> SolverConfig {
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = f.$field { c.$field = v; } )* };
    }
    set!(eps, beta0, sigma, gamma0, batch, max_data_passes, trace_every, max_outer, max_inner);
    if let Some(m) = f.mode {
        c.mode = Mode::from(m);
    }
    if f.delta.is_some() {
        c.delta = f.delta;
    }
    if f.eta_bar.is_some() {
        c.eta_bar = f.eta_bar;
    }
    if let Some(m) = f.constraint_samples {
        c.constraint_policy = ConstraintPolicy::Sampled(m);
    }
    c
}
