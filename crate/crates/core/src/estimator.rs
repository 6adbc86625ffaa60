//! Augmented Lagrangian evaluation and its stochastic gradient map
//!
//! ```text
//! L_β(x, y) = g(x) + h(x) + yᵀc(x) + (β/2)‖c(x)‖²
//! Δ(x; ξ1, ξ2) = ∇G0(x; ξ1) + J_C(x; ξ1)ᵀ (y + β C(x; ξ2))
//! ```
//!
//! With `ξ1`, `ξ2` independent, `Δ` is an unbiased estimate of the gradient
//! of the smooth part `Φ = g + yᵀc + (β/2)‖c‖²`.

use crate::base::{dot, NonsmoothTerm, ProblemConstants, RngStream, Vector};
use crate::error::{Error, Result};
use crate::problem::{constraint_vec, Problem, SamplePair};

/// `L_β(x, y)` from exact full-batch quantities.
pub fn al_value<P: Problem + ?Sized>(p: &P, x: &[f64], y: &[f64], beta: f64) -> Result<f64> {
    if !p.nonsmooth().contains(x) {
        return Err(Error::DomainViolation("al_value: point is outside dom(h)".into()));
    }
    let c = constraint_vec(p, x);
    Ok(p.objective(x) + dot(y, &c) + 0.5 * beta * dot(&c, &c))
}

/// `∇Φ(x) = ∇g(x) + J_c(x)ᵀ (y + β c(x))`.
pub fn al_smooth_gradient_exact<P: Problem + ?Sized>(p: &P, x: &[f64], y: &[f64], beta: f64) -> Vector {
    let mut out = vec![0.0; p.dim()];
    p.add_objective_grad(x, 1.0, &mut out);
    if p.num_constraints() > 0 {
        let c = constraint_vec(p, x);
        let w: Vec<f64> = y.iter().zip(&c).map(|(yi, ci)| yi + beta * ci).collect();
        p.add_jacobian_t(x, &w, &mut out);
    }
    out
}

/// `out += scale · Δ(x; pair)`; `cbuf` has length `num_constraints`.
#[allow(clippy::too_many_arguments)]
pub fn add_delta_estimate<P: Problem + ?Sized>(
    p: &P,
    x: &[f64],
    y: &[f64],
    beta: f64,
    pair: &SamplePair,
    scale: f64,
    out: &mut [f64],
    cbuf: &mut [f64],
) {
    p.add_sample_objective_grad(x, pair.xi1.obj, scale, out);
    if p.num_constraints() > 0 {
        p.sample_constraint(x, pair.xi2.con, cbuf);
        for (w, yi) in cbuf.iter_mut().zip(y) {
            *w = scale * (yi + beta * *w);
        }
        p.add_sample_jacobian_t(x, pair.xi1.con, cbuf, out);
    }
}

/// `Δ(x; ξ1, ξ2)`.
pub fn delta_estimate<P: Problem + ?Sized>(p: &P, x: &[f64], y: &[f64], beta: f64, pair: &SamplePair) -> Vector {
    let mut out = vec![0.0; p.dim()];
    let mut cbuf = vec![0.0; p.num_constraints()];
    add_delta_estimate(p, x, y, beta, pair, 1.0, &mut out, &mut cbuf);
    out
}

/// Mean of `Δ` over `pairs`, accumulated in list order.
pub fn minibatch_delta<P: Problem + ?Sized>(p: &P, x: &[f64], y: &[f64], beta: f64, pairs: &[SamplePair]) -> Result<Vector> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("minibatch_delta needs at least one pair".into()));
    }
    let mut out = vec![0.0; p.dim()];
    let mut cbuf = vec![0.0; p.num_constraints()];
    let w = 1.0 / pairs.len() as f64;
    for pair in pairs {
        add_delta_estimate(p, x, y, beta, pair, w, &mut out, &mut cbuf);
    }
    Ok(out)
}

/// Two independent samples.
pub fn draw_pair<P: Problem + ?Sized>(p: &P, rng: &mut RngStream) -> SamplePair {
    let xi1 = p.draw_sample(rng);
    let xi2 = p.draw_sample(rng);
    SamplePair { xi1, xi2 }
}

/// Smoothness and variance constants of the `k`-th subproblem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubproblemBounds {
    pub l_phi: f64,
    pub sigma_phi: f64,
}

/// `L_Φ = √(3L0² + 3LJ²‖y‖² + 3β²LJ²)`, `σ_Φ = √(3σg² + 3σc²‖y‖² + 3β²σc²)`.
pub fn subproblem_bounds(c: &ProblemConstants, y_norm: f64, beta_k: f64) -> SubproblemBounds {
    let l_phi = (3.0 * c.l0 * c.l0 + 3.0 * c.lj * c.lj * y_norm * y_norm + 3.0 * beta_k * beta_k * c.lj * c.lj).sqrt();
    let sigma_phi =
        (3.0 * c.sigma_g * c.sigma_g + 3.0 * c.sigma_c * c.sigma_c * y_norm * y_norm + 3.0 * beta_k * beta_k * c.sigma_c * c.sigma_c)
            .sqrt();
    SubproblemBounds { l_phi, sigma_phi }
}

/// Computable upper bound on the initial subproblem gap
/// `2B0 + kγ0‖c̃‖ + (β/2)‖c̃‖² + k²γ0²/(2β)`; `two_b0` is `2B0`.
pub fn gap_upper_bound(two_b0: f64, k: usize, gamma0: f64, beta_k: f64, c_norm_est: f64) -> Result<f64> {
    if !(beta_k > 0.0) {
        return Err(Error::InvalidArgument("gap_upper_bound requires beta_k > 0".into()));
    }
    let k = k as f64;
    Ok(two_b0 + k * gamma0 * c_norm_est + 0.5 * beta_k * c_norm_est * c_norm_est + k * k * gamma0 * gamma0 / (2.0 * beta_k))
}

/// Empirical `E‖Δ(x1;ζ) − Δ(x2;ζ)‖² / ‖x1 − x2‖²` maximized over random
/// point pairs drawn in `[-radius, radius]^d` (projected onto dom h).
/// Compare against `L_Φ²`; constants are user estimates, so callers flag
/// rather than fail.
pub fn smoothness_spot_check<P: Problem + ?Sized>(
    p: &P,
    y: &[f64],
    beta: f64,
    radius: f64,
    point_pairs: usize,
    samples_per_pair: usize,
    rng: &mut RngStream,
) -> f64 {
    let d = p.dim();
    let h: &NonsmoothTerm = p.nonsmooth();
    let mut worst: f64 = 0.0;
    for _ in 0..point_pairs {
        let x1: Vec<f64> = (0..d).map(|_| rng.uniform_in(-radius, radius)).collect();
        let x2: Vec<f64> = (0..d).map(|_| rng.uniform_in(-radius, radius)).collect();
        let x1 = crate::base::prox(h, &x1, 1.0);
        let x2 = crate::base::prox(h, &x2, 1.0);
        let dx2 = crate::base::dist(&x1, &x2).powi(2);
        if dx2 == 0.0 {
            continue;
        }
        let mut acc = 0.0;
        for _ in 0..samples_per_pair {
            let pair = draw_pair(p, rng);
            let a = delta_estimate(p, &x1, y, beta, &pair);
            let b = delta_estimate(p, &x2, y, beta, &pair);
            acc += crate::base::dist(&a, &b).powi(2);
        }
        worst = worst.max(acc / samples_per_pair as f64 / dx2);
    }
    worst
}
