//! Momentum-based variance-reduced proximal stochastic gradient method
//! with random iterate selection and a postprocessing step
//!
//! ```text
//! d⁰ = mean of m0 samples of Δ(x⁰)
//! x^{t+1} = prox(x^t − η̄ d^t)
//! d^{t+1} = Δ(x^{t+1}; ζ) + (1 − δ)(d^t − Δ(x^t; ζ))      (shared ζ)
//! τ ~ U{0, …, T−1};  v̄ = mean of m1 samples of Δ(x^τ);  x̂ = prox(x^τ − η̄ v̄)
//! ```

use log::warn;

use crate::base::{all_finite, axpy, ceil_snap, prox_in_place, RngStream, Vector};
use crate::error::{Error, Result};
use crate::estimator::{add_delta_estimate, al_smooth_gradient_exact, draw_pair};
use crate::problem::{Problem, SamplePair};

/// `1920^{3/2}·3^{3/2}·(24²/10)^{1/2}`, which equals `5760·576` exactly.
pub const T_CONSTANT: f64 = 3_317_760.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PStormParams {
    /// Iteration count `T`.
    pub t: u64,
    pub eta_bar: f64,
    pub delta: f64,
    /// Initial batch size (pairs).
    pub m0: usize,
    /// Postprocessing batch size (pairs).
    pub m1: usize,
    /// Pairs per iteration.
    pub batch: usize,
    pub eta: f64,
    pub c0: f64,
}

impl PStormParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1.0)
            || !(self.eta_bar > 0.0)
            || self.t == 0
            || self.m0 == 0
            || self.m1 == 0
            || self.batch == 0
        {
            return Err(Error::InvalidArgument(format!("invalid subroutine parameters {self:?}")));
        }
        Ok(())
    }
}

/// `δ = (4η² + 10η²(2 − ηT^{−1/3})) / (T^{2/3} + 4η²)`.
pub fn delta_formula(eta: f64, t: f64) -> f64 {
    let t13 = t.cbrt();
    let e2 = eta * eta;
    (4.0 * e2 + 10.0 * e2 * (2.0 - eta / t13)) / (t13 * t13 + 4.0 * e2)
}

/// Smallest variance bound for which `eps` is admissible under the default
/// parameter rule. Any larger bound is still a valid bound, so callers may
/// raise a too-small `sigma_g` to this value.
pub fn min_admissible_sigma(eps: f64) -> f64 {
    10.0 * eps / (1920f64.sqrt() * 3f64.sqrt() * 57.6f64.sqrt())
}

/// Parameters of one subroutine call from the smoothness `l_g`, variance
/// `sigma_g`, gap bound `gap_1plus ≥ 1` and tolerance `eps`. `eta`/`c0`
/// default to the choice balancing the three error terms; `T` then has the
/// closed form `⌈T_CONSTANT·σ·L·gap/ε³⌉`.
pub fn derive_params(l_g: f64, sigma_g: f64, gap_1plus: f64, eps: f64, eta: Option<f64>, c0: Option<f64>) -> Result<PStormParams> {
    if !(l_g > 0.0 && eps > 0.0 && gap_1plus >= 1.0) {
        return Err(Error::InvalidArgument("derive_params needs L > 0, eps > 0 and gap >= 1".into()));
    }
    if !(sigma_g > 0.0) {
        return Err(Error::InvalidArgument("deterministic regime unsupported by the parameter rule (sigma_G must be positive)".into()));
    }
    let lg = l_g * gap_1plus;
    let (eta, c0, t) = match (eta, c0) {
        (None, None) => {
            let eta = (10.0f64 / 576.0).cbrt() * lg.cbrt() / sigma_g.powf(2.0 / 3.0);
            let c0 = (576.0f64 / 10.0).cbrt() * sigma_g.powf(8.0 / 3.0) / (20.0 * lg.powf(4.0 / 3.0));
            let t = ceil_snap(T_CONSTANT * sigma_g * lg / eps.powi(3));
            (eta, c0, t)
        }
        (eta_in, c0_in) => {
            let eta = eta_in.unwrap_or_else(|| (10.0f64 / 576.0).cbrt() * lg.cbrt() / sigma_g.powf(2.0 / 3.0));
            let c0 = c0_in.unwrap_or_else(|| (576.0f64 / 10.0).cbrt() * sigma_g.powf(8.0 / 3.0) / (20.0 * lg.powf(4.0 / 3.0)));
            if !(eta > 0.0 && c0 > 0.0) {
                return Err(Error::InvalidArgument("eta and c0 must be positive".into()));
            }
            let s2 = sigma_g * sigma_g;
            let inner = lg / eta + s2 / (20.0 * c0 * eta * eta) + 576.0 * s2 * eta * eta / 10.0;
            let t = ceil_snap(48f64.powf(1.5) * 40f64.powf(1.5) * inner.powf(1.5) / eps.powi(3));
            (eta, c0, t)
        }
    };
    if !t.is_finite() || t > u64::MAX as f64 {
        return Err(Error::InvalidArgument("iteration count overflows".into()));
    }
    let t13 = t.cbrt();
    if eta > t13 / 10.0 {
        return Err(Error::InvalidArgument(format!("eta = {eta} exceeds T^(1/3)/10 = {}", t13 / 10.0)));
    }
    if sigma_g < min_admissible_sigma(eps) {
        let admissible = sigma_g / 10.0 * 1920f64.sqrt() * 3f64.sqrt() * 57.6f64.sqrt();
        warn!("eps = {eps} exceeds the admissibility bound {admissible} of the parameter rule");
    }
    Ok(PStormParams {
        t: t as u64,
        eta_bar: eta / (l_g * t13),
        delta: delta_formula(eta, t),
        m0: ceil_snap(c0 * t13).max(1.0) as usize,
        m1: ceil_snap(48.0 * sigma_g * sigma_g / (eps * eps)).max(1.0) as usize,
        batch: 1,
        eta,
        c0,
    })
}

/// `v + (1 − δ)(d − u)`.
pub fn momentum_update(d: &[f64], v: &[f64], u: &[f64], delta: f64) -> Vector {
    d.iter().zip(v).zip(u).map(|((d, v), u)| v + (1.0 - delta) * (d - u)).collect()
}

/// Monitor verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonitorAction {
    Continue,
    /// End the loop and postprocess the selected iterate.
    Stop,
    /// End the loop and return the monitored iterate as is.
    Accept,
}

/// What the run returns when no monitor ends it early.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Finish {
    /// Uniformly selected iterate plus the postprocessing step.
    Postprocess,
    /// The last iterate `x^T`.
    LastIterate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Monitor cadence in iterations (≥ 1).
    pub trace_every: u64,
    pub finish: Finish,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { trace_every: 50, finish: Finish::Postprocess }
    }
}

/// Monitor callback: `(t, x^t, oracle calls so far) -> verdict`.
pub type Monitor<'a> = dyn FnMut(u64, &[f64], u64) -> MonitorAction + 'a;

#[derive(Clone, Debug)]
pub struct PStormOutput {
    pub x: Vector,
    /// Iterations performed.
    pub iterations: u64,
    /// Selected index `τ`, when the output was postprocessed.
    pub selected: Option<u64>,
    /// Whether a monitor ended the loop with [`MonitorAction::Accept`].
    pub accepted: bool,
    /// Single-sample oracle calls consumed.
    pub oracle_calls: u64,
}

struct Workspace {
    pairs: Vec<SamplePair>,
    cbuf: Vec<f64>,
}

/// Mean of `Δ` over `m` fresh pairs, or the exact gradient when `2m` reaches
/// the full-batch cost. Returns the oracle calls charged.
#[allow(clippy::too_many_arguments)]
fn batch_gradient<P: Problem + ?Sized>(
    p: &P,
    x: &[f64],
    y: &[f64],
    beta: f64,
    m: usize,
    rng: &mut RngStream,
    out: &mut [f64],
    ws: &mut Workspace,
) -> u64 {
    let full = p.full_batch_cost();
    if 2 * m as u64 >= full {
        out.copy_from_slice(&al_smooth_gradient_exact(p, x, y, beta));
        return full;
    }
    out.fill(0.0);
    let w = 1.0 / m as f64;
    for _ in 0..m {
        let pair = draw_pair(p, rng);
        add_delta_estimate(p, x, y, beta, &pair, w, out, &mut ws.cbuf);
    }
    2 * m as u64
}

/// Run the subroutine on `Φ(x) = g(x) + yᵀc(x) + (β/2)‖c(x)‖²` plus `h`.
#[allow(clippy::too_many_arguments)]
pub fn run<P: Problem + ?Sized>(
    p: &P,
    x0: &[f64],
    y: &[f64],
    beta: f64,
    params: &PStormParams,
    rng: &mut RngStream,
    options: RunOptions,
    mut monitor: Option<&mut Monitor<'_>>,
) -> Result<PStormOutput> {
    params.validate()?;
    if options.trace_every == 0 {
        return Err(Error::InvalidArgument("trace_every must be at least 1".into()));
    }
    let h = p.nonsmooth();
    if !h.contains(x0) {
        return Err(Error::DomainViolation("subroutine start point is outside dom(h)".into()));
    }
    let dim = p.dim();
    let mut ws = Workspace { pairs: Vec::with_capacity(params.batch), cbuf: vec![0.0; p.num_constraints()] };
    let mut calls = 0u64;
    let mut x = x0.to_vec();
    let mut d = vec![0.0; dim];
    calls += batch_gradient(p, &x, y, beta, params.m0, rng, &mut d, &mut ws);

    let mut x_next = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    let mut u = vec![0.0; dim];
    let mut reservoir: Option<(u64, Vector)> = None;
    let bw = 1.0 / params.batch as f64;
    let mut t = 0u64;
    let mut ended_by: Option<MonitorAction> = None;
    while t < params.t {
        // reservoir sampling keeps x^τ uniform over the iterates seen
        if rng.uniform() * ((t + 1) as f64) < 1.0 {
            reservoir = Some((t, x.clone()));
        }
        x_next.copy_from_slice(&x);
        axpy(-params.eta_bar, &d, &mut x_next);
        prox_in_place(h, &mut x_next, params.eta_bar);
        if !all_finite(&x_next) {
            return Err(Error::Divergence { outer_k: 0, inner_t: t + 1, trace: Vec::new() });
        }
        ws.pairs.clear();
        for _ in 0..params.batch {
            ws.pairs.push(draw_pair(p, rng));
        }
        v.fill(0.0);
        u.fill(0.0);
        for pair in &ws.pairs {
            add_delta_estimate(p, &x_next, y, beta, pair, bw, &mut v, &mut ws.cbuf);
            add_delta_estimate(p, &x, y, beta, pair, bw, &mut u, &mut ws.cbuf);
        }
        calls += 4 * params.batch as u64;
        for i in 0..dim {
            d[i] = v[i] + (1.0 - params.delta) * (d[i] - u[i]);
        }
        std::mem::swap(&mut x, &mut x_next);
        t += 1;
        if t.is_multiple_of(options.trace_every) {
            if let Some(m) = monitor.as_mut() {
                match m(t, &x, calls) {
                    MonitorAction::Continue => {}
                    action => {
                        ended_by = Some(action);
                        break;
                    }
                }
            }
        }
    }

    if ended_by == Some(MonitorAction::Accept) || (ended_by.is_none() && options.finish == Finish::LastIterate) {
        return Ok(PStormOutput { x, iterations: t, selected: None, accepted: ended_by.is_some(), oracle_calls: calls });
    }
    let (tau, x_tau) = reservoir.unwrap_or((0, x0.to_vec()));
    let mut vbar = vec![0.0; dim];
    calls += batch_gradient(p, &x_tau, y, beta, params.m1, rng, &mut vbar, &mut ws);
    let mut out = x_tau;
    axpy(-params.eta_bar, &vbar, &mut out);
    prox_in_place(h, &mut out, params.eta_bar);
    if !all_finite(&out) {
        return Err(Error::Divergence { outer_k: 0, inner_t: t, trace: Vec::new() });
    }
    Ok(PStormOutput { x: out, iterations: t, selected: Some(tau), accepted: false, oracle_calls: calls })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::{NonsmoothTerm, StreamLabel};
    use crate::problems::synthetic::SyntheticAffineProblem;
    use approx::assert_relative_eq;

    #[test]
    fn delta_hand_value() {
        assert_relative_eq!(delta_formula(1.0, 1000.0), 23.0 / 104.0, max_relative = 1e-15);
    }

    #[test]
    fn m1_hand_value() {
        let p = derive_params(1.0, 1.0, 1.0, 0.1, None, None).unwrap();
        assert_eq!(p.m1, 4800);
    }

    #[test]
    fn t_closed_form_unit_inputs() {
        // independently: 1920^{3/2}·3^{3/2}·√57.6 evaluated at 50 digits is 3317760
        let p = derive_params(1.0, 1.0, 1.0, 1.0, None, None).unwrap();
        assert_eq!(p.t, 3_317_760);
        let direct = 1920f64.powf(1.5) * 3f64.powf(1.5) * 57.6f64.sqrt();
        assert!((direct - 3_317_760.0).abs() < 1e-6);
    }

    #[test]
    fn general_t_agrees_with_closed_form_at_the_default_choice() {
        let a = derive_params(2.0, 0.5, 3.0, 0.7, None, None).unwrap();
        let b = derive_params(2.0, 0.5, 3.0, 0.7, Some(a.eta), Some(a.c0)).unwrap();
        assert!((a.t as f64 - b.t as f64).abs() <= 1.0 + 1e-9 * a.t as f64);
    }

    #[test]
    fn derive_params_errors() {
        assert!(derive_params(1.0, 0.0, 1.0, 0.1, None, None).is_err());
        // eta far above T^{1/3}/10
        assert!(derive_params(1.0, 1.0, 1.0, 1.0, Some(1e6), Some(1.0)).is_err());
    }

    #[test]
    fn derived_delta_in_unit_interval() {
        for &(l, s, g, e) in &[(1.0, 1.0, 1.0, 1.0), (10.0, 0.1, 5.0, 0.01), (0.01, 3.0, 1.0, 0.5)] {
            let p = derive_params(l, s, g, e, None, None).unwrap();
            assert!(p.delta > 0.0 && p.delta < 1.0);
            assert!(p.eta <= (p.t as f64).cbrt() / 10.0);
        }
    }

    #[test]
    fn momentum_examples() {
        assert_eq!(momentum_update(&[1.0, 2.0], &[3.0, 4.0], &[1.0, 2.0], 0.3), vec![3.0, 4.0]);
        assert_eq!(momentum_update(&[1.0], &[2.0], &[7.0], 1.0), vec![2.0]);
        assert_eq!(momentum_update(&[1.0], &[2.0], &[0.0], 0.5), vec![2.5]);
    }

    fn params(t: u64, eta_bar: f64) -> PStormParams {
        PStormParams { t, eta_bar, delta: 0.3, m0: 1, m1: 1, batch: 1, eta: 1.0, c0: 1.0 }
    }

    #[test]
    fn gradient_descent_on_half_norm_squared() {
        // Φ = ½x², deterministic: x^t = 0.9^t
        let p = SyntheticAffineProblem::from_parts(vec![vec![1.0]], vec![0.0], vec![], vec![]).unwrap();
        let mut seen = Vec::new();
        let mut mon = |t: u64, x: &[f64], _: u64| {
            seen.push((t, x[0]));
            MonitorAction::Continue
        };
        let mut rng = RngStream::new(1, StreamLabel::Subroutine(0));
        run(&p, &[1.0], &[], 0.0, &params(30, 0.1), &mut rng, RunOptions { trace_every: 1, finish: Finish::LastIterate }, Some(&mut mon))
            .unwrap();
        for (t, x) in seen {
            assert_relative_eq!(x, 0.9f64.powi(t as i32), max_relative = 1e-13);
        }
    }

    #[test]
    fn single_step_with_postprocessing() {
        let p = SyntheticAffineProblem::from_parts(vec![vec![2.0, 0.0], vec![0.0, 1.0]], vec![1.0, -1.0], vec![vec![1.0, 1.0]], vec![0.5])
            .unwrap()
            .with_nonsmooth(NonsmoothTerm::nonneg_orthant(vec![0], 2).unwrap());
        let x0 = [0.2, 0.3];
        let y = [0.4];
        let mut rng = RngStream::new(2, StreamLabel::Subroutine(0));
        let out = run(&p, &x0, &y, 2.0, &params(1, 0.05), &mut rng, RunOptions::default(), None).unwrap();
        assert_eq!(out.selected, Some(0));
        let g = al_smooth_gradient_exact(&p, &x0, &y, 2.0);
        let mut want = x0.to_vec();
        axpy(-0.05, &g, &mut want);
        prox_in_place(p.nonsmooth(), &mut want, 0.05);
        assert_eq!(out.x, want);
    }

    #[test]
    fn oracle_accounting_with_sampled_batches() {
        let p = SyntheticAffineProblem::random(3, 1, 50, 0.0, 0.3, 1);
        let pr = PStormParams { t: 7, eta_bar: 0.01, delta: 0.2, m0: 3, m1: 4, batch: 2, eta: 1.0, c0: 1.0 };
        let mut rng = RngStream::new(3, StreamLabel::Subroutine(0));
        let out = run(&p, &[0.0; 3], &[0.0], 1.0, &pr, &mut rng, RunOptions::default(), None).unwrap();
        assert_eq!(out.oracle_calls, 2 * 3 + 4 * 7 * 2 + 2 * 4);
        // capped batches cost one full pass each
        let pr = PStormParams { m0: 100, m1: 100, ..pr };
        let out = run(&p, &[0.0; 3], &[0.0], 1.0, &pr, &mut rng, RunOptions::default(), None).unwrap();
        assert_eq!(out.oracle_calls, 50 + 4 * 7 * 2 + 50);
    }

    #[test]
    fn monitor_stop_and_accept() {
        let p = SyntheticAffineProblem::random(3, 1, 20, 0.0, 0.3, 1);
        let pr = PStormParams { t: 100, eta_bar: 0.05, delta: 0.2, m0: 2, m1: 2, batch: 2, eta: 1.0, c0: 1.0 };
        let mut rng = RngStream::new(3, StreamLabel::Subroutine(0));
        let mut last = Vec::new();
        let mut accept = |t: u64, x: &[f64], _: u64| {
            last = x.to_vec();
            if t >= 20 {
                MonitorAction::Accept
            } else {
                MonitorAction::Continue
            }
        };
        let out =
            run(&p, &[0.0; 3], &[0.0], 1.0, &pr, &mut rng, RunOptions { trace_every: 5, finish: Finish::Postprocess }, Some(&mut accept))
                .unwrap();
        assert!(out.accepted && out.iterations == 20 && out.selected.is_none());
        assert_eq!(out.x, last);
        let mut stop = |t: u64, _: &[f64], _: u64| if t >= 10 { MonitorAction::Stop } else { MonitorAction::Continue };
        let out =
            run(&p, &[0.0; 3], &[0.0], 1.0, &pr, &mut rng, RunOptions { trace_every: 5, finish: Finish::Postprocess }, Some(&mut stop))
                .unwrap();
        assert_eq!(out.iterations, 10);
        assert!(out.selected.unwrap() < 10);
    }

    #[test]
    fn reservoir_selection_is_uniform() {
        let p = SyntheticAffineProblem::from_parts(vec![vec![1.0]], vec![0.0], vec![], vec![]).unwrap();
        let pr = params(4, 0.1);
        let mut counts = [0usize; 4];
        let runs = 100_000;
        for s in 0..runs {
            let mut rng = RngStream::new(s, StreamLabel::Subroutine(0));
            let out = run(&p, &[1.0], &[], 0.0, &pr, &mut rng, RunOptions::default(), None).unwrap();
            counts[out.selected.unwrap() as usize] += 1;
        }
        for c in counts {
            let f = c as f64 / runs as f64;
            assert!((f - 0.25).abs() <= 0.01, "{counts:?}");
        }
    }

    #[test]
    fn iterates_stay_in_domain() {
        let p = SyntheticAffineProblem::random(4, 2, 10, 0.1, 0.5, 2).with_box(0.3);
        let pr = PStormParams { t: 200, eta_bar: 0.2, delta: 0.1, m0: 2, m1: 2, batch: 3, eta: 1.0, c0: 1.0 };
        let mut rng = RngStream::new(9, StreamLabel::Subroutine(0));
        let h = p.nonsmooth().clone();
        let mut mon = |_: u64, x: &[f64], _: u64| {
            assert!(h.contains(x));
            MonitorAction::Continue
        };
        let out = run(
            &p,
            &[0.0; 4],
            &[0.5, -0.5],
            3.0,
            &pr,
            &mut rng,
            RunOptions { trace_every: 1, finish: Finish::Postprocess },
            Some(&mut mon),
        )
        .unwrap();
        assert!(p.nonsmooth().contains(&out.x));
    }
}
