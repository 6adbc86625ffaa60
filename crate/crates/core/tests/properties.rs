//! Randomized invariants of the building blocks.

use proptest::prelude::*;

use stoc_ialm::base::{dist, norm, prox_in_place, NonsmoothTerm};
use stoc_ialm::estimator::{al_smooth_gradient_exact, minibatch_delta};
use stoc_ialm::ialm::{dual_update, outer_iteration_cap};
use stoc_ialm::problems::SyntheticAffineProblem;
use stoc_ialm::pstorm::{self, delta_formula, momentum_update, Finish, MonitorAction, PStormParams, RunOptions};
use stoc_ialm::{Problem, RngStream, SamplePair, StreamLabel};

proptest! {
    #[test]
    fn dual_step_is_bounded_by_both_branches(
        c in prop::collection::vec(-10.0f64..10.0, 1..5),
        beta in 0.01f64..100.0,
        gamma in 0.01f64..100.0,
    ) {
        let y0 = vec![0.0; c.len()];
        let step = norm(&dual_update(&y0, &c, beta, gamma));
        let nc = norm(&c);
        prop_assert!(step <= gamma.min(beta * nc) * (1.0 + 4.0 * f64::EPSILON));
        // the β branch is exact when it binds
        if beta * nc < gamma {
            prop_assert!((step - beta * nc).abs() <= 4.0 * f64::EPSILON * step);
        }
    }

    #[test]
    fn full_momentum_weight_forgets_history(
        d in prop::collection::vec(-5.0f64..5.0, 3),
        v in prop::collection::vec(-5.0f64..5.0, 3),
        u in prop::collection::vec(-5.0f64..5.0, 3),
    ) {
        prop_assert_eq!(momentum_update(&d, &v, &u, 1.0), v);
    }

    #[test]
    fn derived_momentum_weight_is_a_probability(eta in 0.01f64..10.0, t in 1.0f64..1e9) {
        let d = delta_formula(eta, t);
        prop_assert!(d > 0.0 && d <= 1.0);
    }

    #[test]
    fn outer_cap_is_monotone(
        eps in 1e-3f64..1.0,
        b0 in 0.1f64..10.0,
        bc in 0.1f64..10.0,
        sigma in 1.1f64..10.0,
        gamma0 in 0.1f64..10.0,
    ) {
        let k = |e: f64, s: f64| outer_iteration_cap(e, b0, bc, 0.0, 0.5, 1.0, s, gamma0).unwrap();
        prop_assert!(k(eps, sigma * 2.0) <= k(eps, sigma));
        prop_assert!(k(eps / 2.0, sigma) >= k(eps, sigma));
        prop_assert!(k(eps, sigma) >= 1);
    }

    #[test]
    fn exhaustive_pair_average_is_unbiased(seed in 0u64..1000, beta in 0.1f64..10.0) {
        let p = SyntheticAffineProblem::random(4, 2, 3, 0.1, 0.5, seed);
        let mut rng = RngStream::new(seed, StreamLabel::Custom(1));
        let x: Vec<f64> = (0..4).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let y: Vec<f64> = (0..2).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let all = p.all_samples();
        let pairs: Vec<SamplePair> = all.iter().flat_map(|&a| all.iter().map(move |&b| SamplePair { xi1: a, xi2: b })).collect();
        let avg = minibatch_delta(&p, &x, &y, beta, &pairs).unwrap();
        let exact = al_smooth_gradient_exact(&p, &x, &y, beta);
        prop_assert!(dist(&avg, &exact) <= 1e-10 * norm(&exact).max(1e-300));
    }
}

/// Deterministic oracle (`N = 1`): the subroutine is proximal gradient descent.
#[test]
fn single_sample_subroutine_is_proximal_gradient_descent() {
    for seed in 0..3u64 {
        let p = SyntheticAffineProblem::random(4, 2, 1, 0.0, 0.0, 100 + seed)
            .with_nonsmooth(NonsmoothTerm::nonneg_orthant(vec![0, 2], 4).unwrap());
        let (y, beta, step) = (vec![0.3, -0.2], 2.0, 0.01);
        let x0 = vec![0.5, -0.3, 0.2, 0.1];
        let mut seen = Vec::new();
        let mut mon = |_: u64, x: &[f64], _: u64| {
            seen.push(x.to_vec());
            MonitorAction::Continue
        };
        let params = PStormParams { t: 100, eta_bar: step, delta: 0.4, m0: 1, m1: 1, batch: 1, eta: 1.0, c0: 1.0 };
        let mut rng = RngStream::new(seed, StreamLabel::Subroutine(0));
        let opts = RunOptions { trace_every: 1, finish: Finish::LastIterate };
        pstorm::run(&p, &x0, &y, beta, &params, &mut rng, opts, Some(&mut mon)).unwrap();
        assert_eq!(seen.len(), 100);
        let mut x = x0.clone();
        for got in &seen {
            let g = al_smooth_gradient_exact(&p, &x, &y, beta);
            x.iter_mut().zip(&g).for_each(|(xi, gi)| *xi -= step * gi);
            prox_in_place(p.nonsmooth(), &mut x, step);
            assert!(dist(got, &x) <= 1e-12 * norm(&x).max(1.0), "seed {seed}");
        }
    }
}
