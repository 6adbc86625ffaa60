//! Neyman-Pearson classification
//!
//! ```text
//! min_x (1/n⁺) Σ φ(xᵀa⁺)   s.t.  (1/n⁻) Σ φ(−xᵀa⁻) − ĉ ≤ 0,    φ(u) = 1/(1 + e^u)
//! ```
//!
//! i.e. minimize the smoothed false-negative rate subject to a bound on the
//! smoothed false-positive rate.

use crate::base::{sigmoid, NonsmoothTerm, Vector};
use crate::dataio::{Dataset, Features};
use crate::error::{Error, Result};
use crate::problem::Problem;

/// `φ(u) = 1/(1 + e^u)`.
pub fn link(u: f64) -> f64 {
    sigmoid(-u)
}

#[derive(Clone, Debug)]
pub struct NeymanPearsonProblem {
    d: usize,
    positives: Features,
    negatives: Features,
    n_pos: usize,
    n_neg: usize,
    c_hat: f64,
    h: NonsmoothTerm,
}

impl NeymanPearsonProblem {
    /// Splits `ds` by label: `+1` rows are positives, `−1` rows negatives.
    pub fn new(ds: &Dataset, c_hat: f64) -> Result<Self> {
        if !(c_hat > 0.0 && c_hat < 1.0) {
            return Err(Error::Config("false-positive level must lie in (0, 1)".into()));
        }
        let pos = ds.select_label(1.0);
        let neg = ds.select_label(-1.0);
        if pos.n() == 0 || neg.n() == 0 {
            return Err(Error::Config("Neyman-Pearson problem needs both classes".into()));
        }
        Ok(Self {
            d: ds.d(),
            n_pos: pos.n(),
            n_neg: neg.n(),
            positives: pos.features,
            negatives: neg.features,
            c_hat,
            h: NonsmoothTerm::Zero,
        })
    }

    /// `(n⁺, n⁻)`.
    pub fn class_sizes(&self) -> (usize, usize) {
        (self.n_pos, self.n_neg)
    }
}

impl Problem for NeymanPearsonProblem {
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
        self.n_pos
    }
    fn constraint_samples(&self) -> usize {
        self.n_neg
    }
    fn data_size(&self) -> usize {
        self.n_pos + self.n_neg
    }

    fn sample_objective(&self, x: &[f64], i: usize) -> f64 {
        link(self.positives.row_dot(i, x))
    }

    fn add_sample_objective_grad(&self, x: &[f64], i: usize, scale: f64, out: &mut [f64]) {
        let p = link(self.positives.row_dot(i, x));
        // φ'(u) = −φ(u)(1 − φ(u))
        self.positives.row_axpy(i, -scale * p * (1.0 - p), out);
    }

    fn sample_constraint(&self, x: &[f64], j: usize, out: &mut [f64]) {
        out[0] = link(-self.negatives.row_dot(j, x)) - self.c_hat;
    }

    fn add_sample_jacobian_t(&self, x: &[f64], j: usize, w: &[f64], out: &mut [f64]) {
        let p = link(-self.negatives.row_dot(j, x));
        self.negatives.row_axpy(j, w[0] * p * (1.0 - p), out);
    }
}
