//! Primal and dual residuals of approximate KKT points
//!
//! ```text
//! pres = ‖c(x)‖,   dres = dist(0, ∇g(x) + J_c(x)ᵀy + ∂h(x))
//! ```
//!
//! evaluated with exact full-batch quantities.

use crate::base::{dist_to_shifted_subdiff, dot, norm, Vector};
use crate::error::Result;
use crate::problem::{constraint_vec, objective_grad_vec, Problem};

/// `‖c(x)‖`.
pub fn primal_residual<P: Problem + ?Sized>(p: &P, x: &[f64]) -> f64 {
    norm(&constraint_vec(p, x))
}

/// `‖[t(x)]₊‖` for inequality constraints `t(x) ≤ 0` given by `p`'s
/// constraint map.
pub fn inequality_primal_residual<P: Problem + ?Sized>(p: &P, x: &[f64]) -> f64 {
    constraint_vec(p, x).iter().map(|t| t.max(0.0).powi(2)).sum::<f64>().sqrt()
}

/// `dist(0, ∇g(x) + J_c(x)ᵀy + ∂h(x))`.
pub fn dual_residual<P: Problem + ?Sized>(p: &P, x: &[f64], y: &[f64]) -> Result<f64> {
    let mut g = objective_grad_vec(p, x);
    if p.num_constraints() > 0 {
        p.add_jacobian_t(x, y, &mut g);
    }
    dist_to_shifted_subdiff(p.nonsmooth(), x, &g)
}

/// Both residuals with `c(x)` evaluated once; the multiplier is
/// `y + β c(x)` (the augmented-Lagrangian multiplier at `x`).
pub fn residuals_with_al_multiplier<P: Problem + ?Sized>(p: &P, x: &[f64], y: &[f64], beta: f64) -> Result<(f64, f64, Vector)> {
    let c = constraint_vec(p, x);
    let mult = kkt_multiplier_from_ialm(y, beta, &c);
    let mut g = objective_grad_vec(p, x);
    if p.num_constraints() > 0 {
        p.add_jacobian_t(x, &mult, &mut g);
    }
    let dres = dist_to_shifted_subdiff(p.nonsmooth(), x, &g)?;
    Ok((norm(&c), dres, mult))
}

/// `y_prev + β_prev · c(x)`.
pub fn kkt_multiplier_from_ialm(y_prev: &[f64], beta_prev: f64, c_at_x: &[f64]) -> Vector {
    y_prev.iter().zip(c_at_x).map(|(y, c)| y + beta_prev * c).collect()
}

/// Minimizer over `z ≥ 0` of `‖∇f0 + z∇f1‖² + (z·f1)²`:
/// `[−⟨∇f0, ∇f1⟩ / (f1² + ‖∇f1‖²)]₊`, or 0 when the denominator vanishes.
pub fn optimal_scalar_dual(grad_f0: &[f64], grad_f1: &[f64], f1_val: f64) -> f64 {
    let den = f1_val * f1_val + dot(grad_f1, grad_f1);
    if den == 0.0 {
        return 0.0;
    }
    (-dot(grad_f0, grad_f1) / den).max(0.0)
}

/// `(pres ≤ eps && dres ≤ eps, pres, dres)`.
pub fn is_eps_kkt<P: Problem + ?Sized>(p: &P, x: &[f64], y: &[f64], eps: f64) -> Result<(bool, f64, f64)> {
    let pres = primal_residual(p, x);
    let dres = dual_residual(p, x, y)?;
    Ok((pres <= eps && dres <= eps, pres, dres))
}
