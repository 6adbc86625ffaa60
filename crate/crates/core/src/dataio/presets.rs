//! Registry of benchmark datasets and the construction of fairness splits.

use std::path::PathBuf;

use log::warn;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::problems::fairness::{FairnessForm, FairnessProblem};

/// Membership test for the minority group `S_min ⊆ S`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MinorityRule {
    /// Feature `index` (1-based, as in the file) is nonzero.
    FeatureNonzero { index: usize },
}

impl MinorityRule {
    pub fn contains(&self, ds: &Dataset, row: usize) -> bool {
        match *self {
            MinorityRule::FeatureNonzero { index } => index >= 1 && index <= ds.d() && ds.features.get(row, index - 1) != 0.0,
        }
    }
}

#[derive(Clone, Debug)]
pub enum PresetKind {
    /// Labeled file `D`, unlabeled file `S` (may be the same), minority rule
    /// on `S`, fairness level `c`, expected `(|D|, |S|, |S_min|)` and `d`.
    Fairness { labeled: &'static str, unlabeled: &'static str, minority: MinorityRule, c: f64, expected: (usize, usize, usize), dim: usize },
    /// Standardized, unit-row data with false-positive level `c_hat`;
    /// expected `(n, d)`.
    NeymanPearson { file: &'static str, c_hat: f64, expected: (usize, usize), batch: usize },
    /// Generated instance, no files.
    Synthetic,
}

#[derive(Clone, Debug)]
pub struct DataPreset {
    pub name: &'static str,
    pub kind: PresetKind,
    pub note: &'static str,
}

/// All presets addressable by name.
pub fn presets() -> Vec<DataPreset> {
    vec![
        DataPreset {
            name: "fairness-a9a",
            kind: PresetKind::Fairness {
                labeled: "a9a",
                unlabeled: "a9a.t",
                minority: MinorityRule::FeatureNonzero { index: 71 },
                c: 0.1,
                expected: (32561, 16281, 1561),
                dim: 123,
            },
            note: "D = a9a, S = a9a.t, S_min = rows of S with feature 71 (race: Black) set",
        },
        DataPreset {
            name: "fairness-bank",
            kind: PresetKind::Fairness {
                labeled: "bank",
                unlabeled: "bank",
                minority: MinorityRule::FeatureNonzero { index: 81 },
                c: 0.4,
                expected: (22605, 22605, 233),
                dim: 81,
            },
            note: "D = S = bank; S_min = rows with feature 81 set (assumed; override with --minority-feature)",
        },
        DataPreset {
            name: "np-spambase",
            kind: PresetKind::NeymanPearson { file: "spambase", c_hat: 0.2, expected: (4601, 57), batch: 10 },
            note: "positive class = label +1",
        },
        DataPreset {
            name: "np-madelon",
            kind: PresetKind::NeymanPearson { file: "madelon", c_hat: 0.4, expected: (2000, 500), batch: 30 },
            note: "positive class = label +1",
        },
        DataPreset {
            name: "np-gisette",
            kind: PresetKind::NeymanPearson { file: "gisette", c_hat: 0.2, expected: (6000, 5000), batch: 30 },
            note: "positive class = label +1",
        },
        DataPreset { name: "synthetic-qp", kind: PresetKind::Synthetic, note: "generated affine-equality QP" },
    ]
}

pub fn find_preset(name: &str) -> Option<DataPreset> {
    presets().into_iter().find(|p| p.name == name)
}

/// Dataset root: `$STOC_IALM_DATA_DIR`, else `./data`.
pub fn data_dir() -> PathBuf {
    std::env::var_os("STOC_IALM_DATA_DIR").map_or_else(|| PathBuf::from("data"), PathBuf::from)
}

/// Build a fairness problem from labeled data `D`, unlabeled data `S` and a
/// minority rule on `S`. Cardinalities differing from `expected` are
/// reported as warnings.
pub fn fairness_splits(
    labeled: &Dataset,
    unlabeled: &Dataset,
    rule: &MinorityRule,
    c: f64,
    form: FairnessForm,
    expected: Option<(usize, usize, usize)>,
) -> Result<FairnessProblem> {
    let minority: Vec<bool> = (0..unlabeled.n()).map(|i| rule.contains(unlabeled, i)).collect();
    let n_min = minority.iter().filter(|&&b| b).count();
    if n_min == 0 {
        return Err(Error::Config("minority group S_min is empty".into()));
    }
    let got = (labeled.n(), unlabeled.n(), n_min);
    if let Some(exp) = expected {
        if exp != got {
            warn!("fairness split cardinalities {got:?} differ from the expected {exp:?}");
        }
    }
    FairnessProblem::new(labeled, unlabeled, minority, c, 2.0, form)
}
