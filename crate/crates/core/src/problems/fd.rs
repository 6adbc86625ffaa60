//! Central finite-difference checks of problem oracles.

use crate::base::{prox, RngStream, StreamLabel};
use crate::problem::Problem;

#[derive(Clone, Debug, Default)]
pub struct GradCheckReport {
    pub checks: usize,
    pub max_rel_err: f64,
    /// Description of the worst check.
    pub worst: String,
}

impl GradCheckReport {
    fn record(&mut self, what: impl FnOnce() -> String, analytic: &[f64], fd: &[f64]) {
        let diff = crate::base::dist(analytic, fd);
        let denom = crate::base::norm(analytic).max(crate::base::norm(fd)).max(1e-8);
        let rel = diff / denom;
        self.checks += 1;
        if rel > self.max_rel_err || self.checks == 1 {
            self.max_rel_err = self.max_rel_err.max(rel);
            self.worst = what();
        }
    }
}

fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let xi = x[i];
            xp[i] = xi + step;
            let fp = f(&xp);
            xp[i] = xi - step;
            let fm = f(&xp);
            xp[i] = xi;
            (fp - fm) / (2.0 * step)
        })
        .collect()
}

/// Checks per-sample objective gradients and constraint Jacobian rows at
/// `points` random points drawn in `[-radius, radius]^d` and projected onto
/// dom h. Vector relative error `‖fd − analytic‖ / max(‖analytic‖, ‖fd‖)`.
/// Full-batch oracles are checked too when `dim × samples` is small.
pub fn check_problem_gradients<P: Problem + ?Sized>(p: &P, points: usize, radius: f64, step: f64, seed: u64) -> GradCheckReport {
    let mut rng = RngStream::new(seed, StreamLabel::Custom(0xfd));
    let d = p.dim();
    let m = p.num_constraints();
    let full_batch = d * p.objective_samples().max(p.constraint_samples()) <= 200_000;
    let mut report = GradCheckReport::default();
    for pt in 0..points {
        let raw: Vec<f64> = (0..d).map(|_| rng.uniform_in(-radius, radius)).collect();
        // the smooth oracles are defined on all of R^d, so stepping off a
        // boundary of dom h is harmless
        let x = prox(p.nonsmooth(), &raw, 1.0);
        let s = p.draw_sample(&mut rng);

        let mut an = vec![0.0; d];
        p.add_sample_objective_grad(&x, s.obj, 1.0, &mut an);
        let fd = fd_gradient(|z| p.sample_objective(z, s.obj), &x, step);
        report.record(|| format!("point {pt}: objective sample {}", s.obj), &an, &fd);

        let mut e = vec![0.0; m];
        for r in 0..m {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[r] = 1.0;
            let mut an = vec![0.0; d];
            p.add_sample_jacobian_t(&x, s.con, &e, &mut an);
            let fd = fd_gradient(
                |z| {
                    let mut c = vec![0.0; m];
                    p.sample_constraint(z, s.con, &mut c);
                    c[r]
                },
                &x,
                step,
            );
            report.record(|| format!("point {pt}: constraint sample {} row {r}", s.con), &an, &fd);
        }

        if full_batch {
            let mut an = vec![0.0; d];
            p.add_objective_grad(&x, 1.0, &mut an);
            let fd = fd_gradient(|z| p.objective(z), &x, step);
            report.record(|| format!("point {pt}: full objective"), &an, &fd);
            for r in 0..m {
                e.iter_mut().for_each(|v| *v = 0.0);
                e[r] = 1.0;
                let mut an = vec![0.0; d];
                p.add_jacobian_t(&x, &e, &mut an);
                let fd = fd_gradient(|z| crate::problem::constraint_vec(p, z)[r], &x, step);
                report.record(|| format!("point {pt}: full constraint row {r}"), &an, &fd);
            }
        }
    }
    report
}
