//! Outer loop of the stochastic inexact augmented Lagrangian method
//!
//! ```text
//! for k = 0, 1, …:
//!     β_k = β0 σ^k
//!     x^{k+1} ≈ argmin_x L_{β_k}(x, y^k)            (subroutine, warm start x^k)
//!     c̃ ≈ c(x^{k+1})                                 (exact or M samples)
//!     y^{k+1} = y^k + min{β_k, γ0/‖c̃‖} c̃           (‖y^k‖ ≤ kγ0)
//! ```

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::base::{clamp_one_plus, norm, ProblemConstants, RngStream, StreamLabel, Vector};
use crate::error::{Error, Result};
use crate::estimator::{al_value, gap_upper_bound, subproblem_bounds};
use crate::kkt::residuals_with_al_multiplier;
use crate::problem::Problem;
use crate::pstorm::{self, derive_params, min_admissible_sigma, Finish, MonitorAction, PStormParams, RunOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Parameters from the theoretical rules; `K` outer iterations.
    Theoretical,
    /// Fixed step and momentum; stops on measured residuals.
    Practical,
}

/// How `c̃(x^{k+1})` is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintPolicy {
    /// Exact full-batch `c(x)`.
    Exact,
    /// Mean of `M` sampled constraint values.
    Sampled(usize),
}

/// Smoothness override `L_k = base + slope·β_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothnessRule {
    pub base: f64,
    pub slope: f64,
}

impl SmoothnessRule {
    pub fn at(&self, beta: f64) -> f64 {
        self.base + self.slope * beta
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub eps: f64,
    pub beta0: f64,
    /// Penalty growth factor (> 1).
    pub sigma: f64,
    /// Dual step bound.
    pub gamma0: f64,
    pub constraint_policy: ConstraintPolicy,
    /// Sample pairs per subroutine iteration.
    pub batch: usize,
    pub mode: Mode,
    pub l_override: Option<SmoothnessRule>,
    /// Monitor/trace cadence in inner iterations.
    pub trace_every: u64,
    pub max_data_passes: f64,
    pub seed: u64,
    pub constants: ProblemConstants,
    /// Practical mode: momentum weight (default `min(0.01·b, 0.5)`).
    pub delta: Option<f64>,
    /// Practical mode: step size (default `1/L_k`).
    pub eta_bar: Option<f64>,
    /// Practical mode: pairs in the initial batch (default `b`).
    pub init_batch: Option<usize>,
    /// Practical mode: inner-iteration cap per outer iteration.
    pub max_inner: u64,
    /// Practical mode: outer-iteration cap.
    pub max_outer: usize,
    /// Theoretical mode: free constants of the parameter rule.
    pub eta: Option<f64>,
    pub c0: Option<f64>,
    /// Write elapsed milliseconds into trace rows (0 otherwise).
    pub record_timing: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps: 1e-2,
            beta0: 1.0,
            sigma: 2.0,
            gamma0: 1.0,
            constraint_policy: ConstraintPolicy::Exact,
            batch: 10,
            mode: Mode::Practical,
            l_override: None,
            trace_every: 50,
            max_data_passes: 500.0,
            seed: 0,
            constants: ProblemConstants::default(),
            delta: None,
            eta_bar: None,
            init_batch: None,
            max_inner: 100_000,
            max_outer: 100,
            eta: None,
            c0: None,
            record_timing: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.eps > 0.0) {
            return bad("eps must be positive");
        }
        if !(self.beta0 > 0.0) {
            return bad("beta0 must be positive");
        }
        if !(self.sigma > 1.0) {
            return bad("sigma must exceed 1");
        }
        if !(self.gamma0 > 0.0) {
            return bad("gamma0 must be positive");
        }
        if self.trace_every == 0 {
            return bad("trace_every must be at least 1");
        }
        if self.batch == 0 {
            return bad("batch must be at least 1");
        }
        if !(self.max_data_passes > 0.0) {
            return bad("max_data_passes must be positive");
        }
        if let ConstraintPolicy::Sampled(0) = self.constraint_policy {
            return bad("sampled constraint policy needs M >= 1");
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d <= 1.0) {
                return bad("delta must lie in (0, 1]");
            }
        }
        if let Some(e) = self.eta_bar {
            if !(e > 0.0) {
                return bad("eta_bar must be positive");
            }
        }
        if self.max_inner == 0 || self.max_outer == 0 {
            return bad("iteration caps must be positive");
        }
        self.constants.validate()
    }

    /// `β_k = β0·σ^k`, recomputed from scratch.
    pub fn beta(&self, k: usize) -> f64 {
        self.beta0 * self.sigma.powi(k as i32)
    }
}

/// One row of the solver trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub outer_k: usize,
    /// Inner iteration; the closing row of a postprocessed call uses `T + 1`.
    pub inner_t: u64,
    pub data_passes: f64,
    pub pres: f64,
    pub dres: f64,
    pub al_value: f64,
    pub beta: f64,
    pub y_norm: f64,
    pub wall_ms: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// Practical mode: both residuals reached `eps`.
    Converged,
    /// Theoretical mode: all `K` outer iterations ran.
    Completed,
    /// Data-pass budget exhausted.
    Budget,
    /// Practical mode: outer-iteration cap reached.
    MaxOuter,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::Completed => "completed",
            Status::Budget => "budget",
            Status::MaxOuter => "max-outer",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub x: Vector,
    /// Multiplier certified at `x`: `y^{k} + β_k c(x)` for the last call.
    pub multiplier: Vector,
    /// Last dual iterate `y`.
    pub y: Vector,
    pub trace: Vec<TraceRecord>,
    pub status: Status,
    pub outer_iterations: usize,
    pub inner_iterations: u64,
    pub oracle_calls: u64,
    pub data_passes: f64,
    pub pres: f64,
    pub dres: f64,
    /// `‖[t(x)]₊‖` for slack reformulations.
    pub original_pres: Option<f64>,
    /// `‖y^k‖` for `k = 0, 1, …` (including the final dual iterate).
    pub y_norms: Vec<f64>,
}

/// `y + min{β, γ/‖c̃‖}·c̃`; `y` unchanged when `c̃ = 0`.
pub fn dual_update(y: &[f64], c_tilde: &[f64], beta_k: f64, gamma_k: f64) -> Vector {
    let nc = norm(c_tilde);
    if nc == 0.0 {
        return y.to_vec();
    }
    let coef = beta_k.min(gamma_k / nc);
    y.iter().zip(c_tilde).map(|(y, c)| y + coef * c).collect()
}

/// `c̃(x)` and the oracle calls spent on it.
pub fn estimate_constraint<P: Problem + ?Sized>(p: &P, x: &[f64], policy: ConstraintPolicy, rng: &mut RngStream) -> Result<(Vector, u64)> {
    let m = p.num_constraints();
    if m == 0 {
        return Ok((Vec::new(), 0));
    }
    match policy {
        ConstraintPolicy::Exact => Ok((crate::problem::constraint_vec(p, x), p.constraint_samples() as u64)),
        ConstraintPolicy::Sampled(mm) => {
            if mm == 0 {
                return Err(Error::Config("sampled constraint policy needs M >= 1".into()));
            }
            let mut acc = vec![0.0; m];
            let mut buf = vec![0.0; m];
            for _ in 0..mm {
                let s = p.draw_sample(rng);
                p.sample_constraint(x, s.con, &mut buf);
                for (a, b) in acc.iter_mut().zip(&buf) {
                    *a += b;
                }
            }
            acc.iter_mut().for_each(|a| *a /= mm as f64);
            Ok((acc, mm as u64))
        }
    }
}

/// Outer-iteration cap
/// `max{⌈log_σ(√8·√(ε²+B0²+M²)/(β0vε))⌉, ⌈2 log_σ(√8·Bc·γ0/(β0vε))⌉} + 1`
/// (each term floored at 0).
#[allow(clippy::too_many_arguments)]
pub fn outer_iteration_cap(eps: f64, b0: f64, bc: f64, m: f64, v: f64, beta0: f64, sigma: f64, gamma0: f64) -> Result<usize> {
    if !(sigma > 1.0) {
        return Err(Error::InvalidArgument("sigma must exceed 1".into()));
    }
    if !(eps > 0.0 && v > 0.0 && beta0 > 0.0 && gamma0 > 0.0) {
        return Err(Error::InvalidArgument("eps, v, beta0 and gamma0 must be positive".into()));
    }
    let ln_s = sigma.ln();
    let r = 8f64.sqrt() * bc * gamma0 / (beta0 * v * eps);
    // relative slack: gamma0 taken from gamma0_rule lands here up to rounding
    if r < 8.0 / ln_s * (1.0 - 1e-12) {
        log::warn!("gamma0 = {gamma0} is below the dual-step rule; see gamma0_rule");
    }
    let t1 = (8f64.sqrt() * (eps * eps + b0 * b0 + m * m).sqrt() / (beta0 * v * eps)).ln() / ln_s;
    let t2 = 2.0 * r.ln() / ln_s;
    let k = t1.ceil().max(0.0).max(t2.ceil().max(0.0));
    Ok(k as usize + 1)
}

/// Smallest `γ0` with `√8·Bc·γ0/(β0·v·ε) ≥ 8/ln σ`.
pub fn gamma0_rule(beta0: f64, eps: f64, bc: f64, sigma: f64, v: f64) -> f64 {
    8.0 * beta0 * v * eps / (8f64.sqrt() * bc * sigma.ln())
}

/// Runs the method from `p.initial_point()`.
pub fn solve<P: Problem + ?Sized>(p: &P, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    let start = Instant::now();
    let elapsed = || if config.record_timing { start.elapsed().as_millis() as u64 } else { 0 };
    let n_data = p.data_size().max(1) as f64;
    let mut x = p.initial_point();
    if !p.nonsmooth().contains(&x) {
        return Err(Error::DomainViolation("initial point is outside dom(h)".into()));
    }
    let m = p.num_constraints();
    let mut y = vec![0.0; m];
    let mut y_norms = vec![0.0];
    let mut trace: Vec<TraceRecord> = Vec::new();
    let mut calls = 0u64;
    let mut inner_total = 0u64;

    let c = &config.constants;
    let outer_cap = match config.mode {
        Mode::Theoretical => outer_iteration_cap(config.eps, c.b0, c.bc, c.m, c.v, config.beta0, config.sigma, config.gamma0)?,
        Mode::Practical => config.max_outer,
    };
    // the gap bound uses the most recent constraint estimate
    let mut c_norm_est = if config.mode == Mode::Theoretical {
        let mut rng = RngStream::new(config.seed, StreamLabel::Outer);
        let (c0, cost) = estimate_constraint(p, &x, config.constraint_policy, &mut rng)?;
        calls += cost;
        norm(&c0)
    } else {
        0.0
    };

    let mut status = None;
    let mut last = (Vec::new(), 0.0, 0usize);
    let mut final_res: Option<(f64, f64, Vector)> = None;
    let mut k = 0usize;
    while k < outer_cap {
        let beta = config.beta(k);
        let y_norm = norm(&y);
        let bounds = subproblem_bounds(c, y_norm, beta);
        let l_k = config.l_override.map_or(bounds.l_phi, |r| r.at(beta));
        let (params, options) = match config.mode {
            Mode::Theoretical => {
                let gap = clamp_one_plus(gap_upper_bound(2.0 * c.b0, k, config.gamma0, beta, c_norm_est)?);
                // the next float up keeps the admissibility check strict
                let sigma = bounds.sigma_phi.max(min_admissible_sigma(config.eps).next_up());
                let mut pr = derive_params(l_k, sigma, gap, config.eps, config.eta, config.c0)?;
                pr.batch = config.batch;
                (pr, RunOptions { trace_every: config.trace_every, finish: Finish::Postprocess })
            }
            Mode::Practical => {
                let b = config.batch;
                let pr = PStormParams {
                    t: config.max_inner,
                    eta_bar: config.eta_bar.unwrap_or(1.0 / l_k),
                    delta: config.delta.unwrap_or((0.01 * b as f64).min(0.5)),
                    m0: config.init_batch.unwrap_or(b),
                    m1: b,
                    batch: b,
                    eta: f64::NAN,
                    c0: f64::NAN,
                };
                (pr, RunOptions { trace_every: config.trace_every, finish: Finish::LastIterate })
            }
        };

        log::debug!("outer {k}: beta {beta}, L {l_k}, T {}, step {}, delta {}", params.t, params.eta_bar, params.delta);
        let mut rng = RngStream::new(config.seed, StreamLabel::Subroutine(k as u64));
        let mut converged = false;
        let mut budget = false;
        let mut monitor_err: Option<Error> = None;
        let mut accepted_res: Option<(f64, f64, Vector)> = None;
        let practical = config.mode == Mode::Practical;
        let out = {
            let mut monitor = |t: u64, xt: &[f64], inner_calls: u64| -> MonitorAction {
                let passes = (calls + inner_calls) as f64 / n_data;
                let res = residuals_with_al_multiplier(p, xt, &y, beta).and_then(|r| al_value(p, xt, &y, beta).map(|a| (r, a)));
                let ((pres, dres, mult), al) = match res {
                    Ok(v) => v,
                    Err(e) => {
                        monitor_err = Some(e);
                        return MonitorAction::Stop;
                    }
                };
                trace.push(TraceRecord {
                    outer_k: k,
                    inner_t: t,
                    data_passes: passes,
                    pres,
                    dres,
                    al_value: al,
                    beta,
                    y_norm,
                    wall_ms: elapsed(),
                });
                if passes >= config.max_data_passes {
                    budget = true;
                    accepted_res = Some((pres, dres, mult));
                    return if practical { MonitorAction::Accept } else { MonitorAction::Stop };
                }
                if practical && dres <= config.eps {
                    converged = pres <= config.eps;
                    accepted_res = Some((pres, dres, mult));
                    return MonitorAction::Accept;
                }
                MonitorAction::Continue
            };
            pstorm::run(p, &x, &y, beta, &params, &mut rng, options, Some(&mut monitor))
        };
        let out = match out {
            Ok(o) => o,
            Err(Error::Divergence { inner_t, .. }) => return Err(Error::Divergence { outer_k: k, inner_t, trace }),
            Err(e) => return Err(e),
        };
        if let Some(e) = monitor_err {
            return Err(e);
        }
        calls += out.oracle_calls;
        inner_total += out.iterations;
        x = out.x;
        let closing_t = if out.selected.is_some() { out.iterations + 1 } else { out.iterations };
        last = (y.clone(), beta, k);
        if !out.accepted {
            accepted_res = None;
        }
        if converged {
            final_res = accepted_res;
            status = Some(Status::Converged);
            k += 1;
            break;
        }
        // closing row for iterates not certified by the monitor
        if accepted_res.is_none() && trace.last().is_none_or(|r| (r.outer_k, r.inner_t) < (k, closing_t)) {
            let (pres, dres, _) = residuals_with_al_multiplier(p, &x, &y, beta)?;
            trace.push(TraceRecord {
                outer_k: k,
                inner_t: closing_t,
                data_passes: calls as f64 / n_data,
                pres,
                dres,
                al_value: al_value(p, &x, &y, beta)?,
                beta,
                y_norm,
                wall_ms: elapsed(),
            });
        }

        let mut crng = RngStream::new(config.seed, StreamLabel::ConstraintSampling(k as u64));
        let (c_tilde, cost) = estimate_constraint(p, &x, config.constraint_policy, &mut crng)?;
        calls += cost;
        c_norm_est = norm(&c_tilde);
        y = dual_update(&y, &c_tilde, beta, config.gamma0);
        // keep ‖y^{k+1}‖ ≤ (k+1)γ0 exact in floating point
        let bound = (k + 1) as f64 * config.gamma0;
        let ny = norm(&y);
        if ny > bound {
            let s = bound / ny;
            y.iter_mut().for_each(|v| *v *= s);
            while norm(&y) > bound {
                y.iter_mut().for_each(|v| *v = v.next_down_toward_zero());
            }
        }
        let ny = norm(&y);
        if !(ny <= bound) {
            return Err(Error::Divergence { outer_k: k, inner_t: out.iterations, trace });
        }
        y_norms.push(ny);
        k += 1;
        if budget || calls as f64 / n_data >= config.max_data_passes {
            status = Some(Status::Budget);
            break;
        }
    }
    let status = status.unwrap_or(match config.mode {
        Mode::Theoretical => Status::Completed,
        Mode::Practical => Status::MaxOuter,
    });
    let (y_prev, beta_prev, _) = last;
    let (pres, dres, multiplier) = match final_res {
        Some(r) => r,
        None => residuals_with_al_multiplier(p, &x, &y_prev, beta_prev)?,
    };
    Ok(SolveResult {
        original_pres: p.original_primal_residual(&x),
        x,
        multiplier,
        y,
        trace,
        status,
        outer_iterations: k,
        inner_iterations: inner_total,
        oracle_calls: calls,
        data_passes: calls as f64 / n_data,
        pres,
        dres,
        y_norms,
    })
}

trait NextDown {
    fn next_down_toward_zero(self) -> Self;
}

impl NextDown for f64 {
    fn next_down_toward_zero(self) -> f64 {
        if self == 0.0 || !self.is_finite() {
            self
        } else {
            f64::from_bits(self.to_bits() - 1)
        }
    }
}
