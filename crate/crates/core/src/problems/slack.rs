//! Inequality constraints `t(x) ≤ 0` rewritten as `t(x) + s = 0` with the
//! slack `s ≥ 0` enforced through the nonsmooth term.

use crate::base::{NonsmoothTerm, Vector};
use crate::problem::{constraint_vec, Problem};

/// Equality-constrained problem in `(x, s)` built from an inner problem
/// whose constraints are read as inequalities.
pub struct SlackReformulation<P> {
    inner: P,
    d: usize,
    m: usize,
    h: NonsmoothTerm,
    initial: Vector,
}

impl<P: Problem> SlackReformulation<P> {
    /// The initial slack is `max(−t(x0), 0)`, so the initial equality
    /// residual equals the inequality violation.
    pub fn new(inner: P) -> Self {
        let d = inner.dim();
        let m = inner.num_constraints();
        let h = inner.nonsmooth().extend_with_nonneg(d, m);
        let x0 = inner.initial_point();
        let t0 = constraint_vec(&inner, &x0);
        let mut initial = x0;
        initial.extend(t0.iter().map(|t| (-t).max(0.0)));
        Self { inner, d, m, h, initial }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    /// Split `(x, s)`.
    pub fn split<'a>(&self, z: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        z.split_at(self.d)
    }
}

impl<P: Problem> Problem for SlackReformulation<P> {
    fn dim(&self) -> usize {
        self.d + self.m
    }
    fn num_constraints(&self) -> usize {
        self.m
    }
    fn nonsmooth(&self) -> &NonsmoothTerm {
        &self.h
    }
    fn initial_point(&self) -> Vector {
        self.initial.clone()
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

    fn sample_objective(&self, z: &[f64], i: usize) -> f64 {
        self.inner.sample_objective(&z[..self.d], i)
    }
    fn add_sample_objective_grad(&self, z: &[f64], i: usize, scale: f64, out: &mut [f64]) {
        self.inner.add_sample_objective_grad(&z[..self.d], i, scale, &mut out[..self.d]);
    }
    fn sample_constraint(&self, z: &[f64], j: usize, out: &mut [f64]) {
        let (x, s) = self.split(z);
        self.inner.sample_constraint(x, j, out);
        for (o, si) in out.iter_mut().zip(s) {
            *o += si;
        }
    }
    fn add_sample_jacobian_t(&self, z: &[f64], j: usize, w: &[f64], out: &mut [f64]) {
        let (ox, os) = out.split_at_mut(self.d);
        self.inner.add_sample_jacobian_t(&z[..self.d], j, w, ox);
        for (o, wi) in os.iter_mut().zip(w) {
            *o += wi;
        }
    }

    fn objective(&self, z: &[f64]) -> f64 {
        self.inner.objective(&z[..self.d])
    }
    fn add_objective_grad(&self, z: &[f64], scale: f64, out: &mut [f64]) {
        self.inner.add_objective_grad(&z[..self.d], scale, &mut out[..self.d]);
    }
    fn constraint(&self, z: &[f64], out: &mut [f64]) {
        let (x, s) = self.split(z);
        self.inner.constraint(x, out);
        for (o, si) in out.iter_mut().zip(s) {
            *o += si;
        }
    }
    fn add_jacobian_t(&self, z: &[f64], w: &[f64], out: &mut [f64]) {
        let (ox, os) = out.split_at_mut(self.d);
        self.inner.add_jacobian_t(&z[..self.d], w, ox);
        for (o, wi) in os.iter_mut().zip(w) {
            *o += wi;
        }
    }

    /// `‖[t(x)]₊‖`.
    fn original_primal_residual(&self, z: &[f64]) -> Option<f64> {
        let t = constraint_vec(&self.inner, &z[..self.d]);
        Some(t.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>().sqrt())
    }
}
