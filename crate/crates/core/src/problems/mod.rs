//! Built-in problem instances and the inequality-to-equality slack wrapper.

pub mod fairness;
pub mod fd;
pub mod neyman_pearson;
pub mod slack;
pub mod synthetic;

pub use fairness::{FairnessForm, FairnessProblem};
pub use fd::{check_problem_gradients, GradCheckReport};
pub use neyman_pearson::NeymanPearsonProblem;
pub use slack::SlackReformulation;
pub use synthetic::{synthetic_kkt_reference, SyntheticAffineProblem};

use crate::base::{NonsmoothTerm, Vector};
use crate::problem::Problem;

/// Wrapper adding a fixed perturbation to every objective gradient; a
/// negative control for gradient checks.
pub struct CorruptedGradient<P> {
    pub inner: P,
    pub offset: f64,
}

impl<P: Problem> Problem for CorruptedGradient<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn num_constraints(&self) -> usize {
        self.inner.num_constraints()
    }
    fn nonsmooth(&self) -> &NonsmoothTerm {
        self.inner.nonsmooth()
    }
    fn initial_point(&self) -> Vector {
        self.inner.initial_point()
    }
    fn objective_samples(&self) -> usize {
        self.inner.objective_samples()
    }
    fn constraint_samples(&self) -> usize {
        self.inner.constraint_samples()
    }
    fn coupled_samples(&self) -> bool {
        self.inner.coupled_samples()
    }
    fn data_size(&self) -> usize {
        self.inner.data_size()
    }
    fn sample_objective(&self, x: &[f64], i: usize) -> f64 {
        self.inner.sample_objective(x, i)
    }
    fn add_sample_objective_grad(&self, x: &[f64], i: usize, scale: f64, out: &mut [f64]) {
        self.inner.add_sample_objective_grad(x, i, scale, out);
        out[0] += scale * self.offset;
    }
    fn sample_constraint(&self, x: &[f64], j: usize, out: &mut [f64]) {
        self.inner.sample_constraint(x, j, out)
    }
    fn add_sample_jacobian_t(&self, x: &[f64], j: usize, w: &[f64], out: &mut [f64]) {
        self.inner.add_sample_jacobian_t(x, j, w, out)
    }
}
