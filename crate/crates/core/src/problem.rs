//! The stochastic first-order oracle of a finite-sum constrained problem
//!
//! ```text
//! min_x g(x) + h(x)  s.t.  c(x) = 0,
//! g(x) = mean_i G0(x; i),   c(x) = mean_j C(x; j)
//! ```
//!
//! Objective and constraint samples are indexed separately; a [`Sample`]
//! stacks one index of each. Coupled problems use a single index for both.

use crate::base::{NonsmoothTerm, RngStream, Vector};

/// One random sample `ξ`: an objective index and a constraint index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Sample {
    pub obj: usize,
    pub con: usize,
}

/// Two independent samples; `xi1` drives the objective gradient and the
/// constraint Jacobian, `xi2` the constraint value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SamplePair {
    pub xi1: Sample,
    pub xi2: Sample,
}

/// Finite-sum problem with per-sample and exact full-batch oracles.
///
/// Problems without constraints report `num_constraints() == 0` and a single
/// (inert) constraint sample.
pub trait Problem: Send + Sync {
    fn dim(&self) -> usize;
    fn num_constraints(&self) -> usize;
    fn nonsmooth(&self) -> &NonsmoothTerm;
    fn initial_point(&self) -> Vector;
    fn objective_samples(&self) -> usize;
    fn constraint_samples(&self) -> usize;
    /// When true, one index drives both parts and `obj == con` always.
    fn coupled_samples(&self) -> bool {
        false
    }
    /// Denominator for data passes.
    fn data_size(&self) -> usize;

    /// `G0(x; i)`.
    fn sample_objective(&self, x: &[f64], i: usize) -> f64;
    /// `out += scale · ∇G0(x; i)`.
    fn add_sample_objective_grad(&self, x: &[f64], i: usize, scale: f64, out: &mut [f64]);
    /// `out = C(x; j)`.
    fn sample_constraint(&self, x: &[f64], j: usize, out: &mut [f64]);
    /// `out += J_C(x; j)ᵀ w`.
    fn add_sample_jacobian_t(&self, x: &[f64], j: usize, w: &[f64], out: &mut [f64]);

    /// `g(x)`.
    fn objective(&self, x: &[f64]) -> f64 {
        let n = self.objective_samples();
        (0..n).map(|i| self.sample_objective(x, i)).sum::<f64>() / n as f64
    }

    /// `out += scale · ∇g(x)`.
    fn add_objective_grad(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        let n = self.objective_samples();
        for i in 0..n {
            self.add_sample_objective_grad(x, i, scale / n as f64, out);
        }
    }

    /// `out = c(x)`.
    fn constraint(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let n = self.constraint_samples();
        let mut buf = vec![0.0; out.len()];
        for j in 0..n {
            self.sample_constraint(x, j, &mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                *o += b;
            }
        }
        for o in out.iter_mut() {
            *o /= n as f64;
        }
    }

    /// `out += J_c(x)ᵀ w`.
    fn add_jacobian_t(&self, x: &[f64], w: &[f64], out: &mut [f64]) {
        let n = self.constraint_samples();
        let w: Vec<f64> = w.iter().map(|v| v / n as f64).collect();
        for j in 0..n {
            self.add_sample_jacobian_t(x, j, &w, out);
        }
    }

    /// `‖[t(x)]₊‖` of the original inequality problem for slack
    /// reformulations; `None` for native equality problems.
    fn original_primal_residual(&self, _x: &[f64]) -> Option<f64> {
        None
    }

    /// Oracle calls charged for one exact full-batch evaluation.
    fn full_batch_cost(&self) -> u64 {
        if self.coupled_samples() {
            self.objective_samples() as u64
        } else {
            self.objective_samples().max(self.constraint_samples()) as u64
        }
    }

    fn draw_sample(&self, rng: &mut RngStream) -> Sample {
        if self.coupled_samples() {
            let i = rng.index(self.objective_samples());
            Sample { obj: i, con: i }
        } else {
            let obj = rng.index(self.objective_samples());
            let con = rng.index(self.constraint_samples());
            Sample { obj, con }
        }
    }

    /// Every sample of the (uniform) sampling distribution, once.
    fn all_samples(&self) -> Vec<Sample> {
        if self.coupled_samples() {
            (0..self.objective_samples()).map(|i| Sample { obj: i, con: i }).collect()
        } else {
            let nc = self.constraint_samples();
            (0..self.objective_samples()).flat_map(|obj| (0..nc).map(move |con| Sample { obj, con })).collect()
        }
    }
}

/// `c(x)` as a fresh vector.
pub fn constraint_vec<P: Problem + ?Sized>(p: &P, x: &[f64]) -> Vector {
    let mut c = vec![0.0; p.num_constraints()];
    p.constraint(x, &mut c);
    c
}

/// `∇g(x)` as a fresh vector.
pub fn objective_grad_vec<P: Problem + ?Sized>(p: &P, x: &[f64]) -> Vector {
    let mut g = vec![0.0; p.dim()];
    p.add_objective_grad(x, 1.0, &mut g);
    g
}

macro_rules! forward_problem {
    ($($t:tt)*) => {
        impl<P: Problem + ?Sized> Problem for $($t)* {
            fn dim(&self) -> usize { (**self).dim() }
            fn num_constraints(&self) -> usize { (**self).num_constraints() }
            fn nonsmooth(&self) -> &NonsmoothTerm { (**self).nonsmooth() }
            fn initial_point(&self) -> Vector { (**self).initial_point() }
            fn objective_samples(&self) -> usize { (**self).objective_samples() }
            fn constraint_samples(&self) -> usize { (**self).constraint_samples() }
            fn coupled_samples(&self) -> bool { (**self).coupled_samples() }
            fn data_size(&self) -> usize { (**self).data_size() }
            fn sample_objective(&self, x: &[f64], i: usize) -> f64 { (**self).sample_objective(x, i) }
            fn add_sample_objective_grad(&self, x: &[f64], i: usize, scale: f64, out: &mut [f64]) {
                (**self).add_sample_objective_grad(x, i, scale, out)
            }
            fn sample_constraint(&self, x: &[f64], j: usize, out: &mut [f64]) { (**self).sample_constraint(x, j, out) }
            fn add_sample_jacobian_t(&self, x: &[f64], j: usize, w: &[f64], out: &mut [f64]) {
                (**self).add_sample_jacobian_t(x, j, w, out)
            }
            fn objective(&self, x: &[f64]) -> f64 { (**self).objective(x) }
            fn add_objective_grad(&self, x: &[f64], scale: f64, out: &mut [f64]) { (**self).add_objective_grad(x, scale, out) }
            fn constraint(&self, x: &[f64], out: &mut [f64]) { (**self).constraint(x, out) }
            fn add_jacobian_t(&self, x: &[f64], w: &[f64], out: &mut [f64]) { (**self).add_jacobian_t(x, w, out) }
            fn original_primal_residual(&self, x: &[f64]) -> Option<f64> { (**self).original_primal_residual(x) }
            fn full_batch_cost(&self) -> u64 { (**self).full_batch_cost() }
            fn draw_sample(&self, rng: &mut RngStream) -> Sample { (**self).draw_sample(rng) }
            fn all_samples(&self) -> Vec<Sample> { (**self).all_samples() }
        }
    };
}

forward_problem!(Box<P>);
forward_problem!(&P);
