//! Fairness-constrained classification with the truncated logistic loss
//!
//! ```text
//! min_x (1/|D|) Σ_{(a,b)∈D} φ_α(log(1 + exp(−b aᵀx)))
//! s.t.  c·Σ_{a∈S} σ(aᵀx) − Σ_{a∈S_min} σ(aᵀx) ≤ 0
//! ```
//!
//! with `φ_α(s) = α log(1 + s/α)` and `σ` the logistic function. The
//! constraint is a finite sum over `S`; see [`FairnessForm`] for its scale.

use serde::{Deserialize, Serialize};

use crate::base::{log1p_exp, sigmoid, NonsmoothTerm, Vector};
use crate::dataio::{Dataset, Features};
use crate::error::{Error, Result};
use crate::problem::Problem;

/// Per-sample form of the fairness constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FairnessForm {
    /// `c·Σ_S σ − Σ_{S_min} σ`; sample `j` is `|S|(c − 1{j∈S_min})σ(a_jᵀx)`.
    Sum,
    /// The sum divided by `|S|` (same feasible set, multiplier scaled by
    /// `|S|`); sample `j` is `(c − 1{j∈S_min})σ(a_jᵀx)`.
    Mean,
    /// A different constraint on group rates, `c·mean_S σ − mean_{S_min} σ`;
    /// sample `j` is `(c − 1{j∈S_min}|S|/|S_min|)σ(a_jᵀx)`.
    GroupRate,
}

#[derive(Clone, Debug)]
pub struct FairnessProblem {
    d: usize,
    labeled: Features,
    labels: Vec<f64>,
    unlabeled: Features,
    /// Per-sample constraint coefficient `w_j`, so `C(x; j) = w_j σ(a_jᵀx)`.
    weights: Vec<f64>,
    n_min: usize,
    c: f64,
    alpha: f64,
    h: NonsmoothTerm,
}

/// `φ_α(s) = α ln(1 + s/α)`.
pub fn truncate(alpha: f64, s: f64) -> f64 {
    alpha * (s / alpha).ln_1p()
}

impl FairnessProblem {
    pub fn new(labeled: &Dataset, unlabeled: &Dataset, minority: Vec<bool>, c: f64, alpha: f64, form: FairnessForm) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::Config("fairness level c must lie in (0, 1)".into()));
        }
        if !(alpha > 0.0) {
            return Err(Error::Config("truncation alpha must be positive".into()));
        }
        if minority.len() != unlabeled.n() {
            return Err(Error::InvalidArgument("minority mask length differs from |S|".into()));
        }
        if labeled.n() == 0 || unlabeled.n() == 0 {
            return Err(Error::Config("fairness problem needs nonempty D and S".into()));
        }
        let n_min = minority.iter().filter(|&&b| b).count();
        if n_min == 0 {
            return Err(Error::Config("minority group S_min is empty".into()));
        }
        let s = unlabeled.n() as f64;
        let weights = minority
            .iter()
            .map(|&is_min| {
                let ind = if is_min { 1.0 } else { 0.0 };
                match form {
                    FairnessForm::Sum => s * (c - ind),
                    FairnessForm::Mean => c - ind,
                    FairnessForm::GroupRate => c - ind * s / n_min as f64,
                }
            })
            .collect();
        let d = labeled.d().max(unlabeled.d());
        Ok(Self {
            d,
            labeled: labeled.features.clone().with_ncols(d),
            labels: labeled.labels.clone(),
            unlabeled: unlabeled.features.clone().with_ncols(d),
            weights,
            n_min,
            c,
            alpha,
            h: NonsmoothTerm::Zero,
        })
    }

    /// `(|D|, |S|, |S_min|)`.
    pub fn cardinalities(&self) -> (usize, usize, usize) {
        (self.labels.len(), self.weights.len(), self.n_min)
    }

    pub fn fairness_level(&self) -> f64 {
        self.c
    }
}

impl Problem for FairnessProblem {
    fn dim(&self) -> usize {
        self.d
    }
    fn num_constraints(&self) -> usize {
        1
    }
    fn nonsmooth(&self) -> &NonsmoothTerm {
        &self.h
    }
    fn initial_point(&self) -> Vector {
        vec![0.0; self.d]
    }
    fn objective_samples(&self) -> usize {
        self.labels.len()
    }
    fn constraint_samples(&self) -> usize {
        self.weights.len()
    }
    fn data_size(&self) -> usize {
        self.labels.len()
    }

    fn sample_objective(&self, x: &[f64], i: usize) -> f64 {
        let z = -self.labels[i] * self.labeled.row_dot(i, x);
        truncate(self.alpha, log1p_exp(z))
    }

    fn add_sample_objective_grad(&self, x: &[f64], i: usize, scale: f64, out: &mut [f64]) {
        let b = self.labels[i];
        let z = -b * self.labeled.row_dot(i, x);
        let l = log1p_exp(z);
        // dφ/ds · dl/dz · dz/dx
        let coef = 1.0 / (1.0 + l / self.alpha) * sigmoid(z) * -b;
        self.labeled.row_axpy(i, scale * coef, out);
    }

    fn sample_constraint(&self, x: &[f64], j: usize, out: &mut [f64]) {
        out[0] = self.weights[j] * sigmoid(self.unlabeled.row_dot(j, x));
    }

    fn add_sample_jacobian_t(&self, x: &[f64], j: usize, w: &[f64], out: &mut [f64]) {
        let s = sigmoid(self.unlabeled.row_dot(j, x));
        self.unlabeled.row_axpy(j, w[0] * self.weights[j] * s * (1.0 - s), out);
    }
}
