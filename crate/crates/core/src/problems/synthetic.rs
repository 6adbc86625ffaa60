//! Synthetic affine-equality testbed
//!
//! ```text
//! g(x) = ½xᵀQx + qᵀx + μ Σ_j cos(x_j),   A x = b̂,   optional box h
//! ```
//!
//! Random instances are generated around a chosen KKT pair `(x*, y*)` of the
//! `μ = 0` problem: `q = −Qx* − Aᵀy*`, `b̂ = Ax*`. Sample `i` perturbs the
//! data by zero-mean terms that vanish at the solution,
//!
//! ```text
//! G0(x; i) = g(x) + ½(x − x*)ᵀP_i(x − x*) − ½x*ᵀP_i x*
//! C(x; i)  = (A + E_i)(x − x*),   E_iᵀ y* = 0,
//! ```
//!
//! so sampled gradients are exact at `(x*, y*)`.

use nalgebra::{DMatrix, DVector};

use crate::base::{NonsmoothTerm, ProblemConstants, RngStream, StreamLabel, Vector};
use crate::error::{Error, Result};
use crate::problem::Problem;

#[derive(Clone, Debug)]
pub struct SyntheticAffineProblem {
    d: usize,
    m: usize,
    n: usize,
    q_mat: DMatrix<f64>,
    q: DVector<f64>,
    a: DMatrix<f64>,
    b_hat: DVector<f64>,
    mu: f64,
    /// Point at which the sample perturbations vanish.
    anchor: DVector<f64>,
    p: Vec<DMatrix<f64>>,
    e: Vec<DMatrix<f64>>,
    h: NonsmoothTerm,
}

fn uniform_matrix(rng: &mut RngStream, r: usize, c: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| scale * rng.uniform_in(-1.0, 1.0))
}

/// Subtract the mean so the matrices sum to zero.
fn center(ms: &mut [DMatrix<f64>]) {
    if ms.is_empty() {
        return;
    }
    let mean = ms.iter().fold(DMatrix::zeros(ms[0].nrows(), ms[0].ncols()), |acc, m| acc + m) / ms.len() as f64;
    for m in ms.iter_mut() {
        *m -= &mean;
    }
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

impl SyntheticAffineProblem {
    /// Random instance with `d` variables, `m ≤ d` constraints and `n`
    /// samples; `noise` scales the sample perturbations; `h ≡ 0`.
    pub fn random(d: usize, m: usize, n: usize, mu: f64, noise: f64, seed: u64) -> Self {
        assert!(m <= d && n >= 1 && d >= 1);
        let mut rng = RngStream::new(seed, StreamLabel::Custom(0x5_7_e_7));
        let mm = uniform_matrix(&mut rng, d, d, 1.0);
        let q_mat = mm.transpose() * &mm / d as f64 + DMatrix::identity(d, d) * 0.5;
        let a = uniform_matrix(&mut rng, m, d, 1.0);
        let x_star = DVector::from_fn(d, |_, _| rng.uniform_in(-1.0, 1.0));
        let y_star = DVector::from_fn(m, |_, _| rng.uniform_in(-1.0, 1.0));
        let q = -(&q_mat * &x_star) - a.transpose() * &y_star;
        let b_hat = &a * &x_star;

        let mut p: Vec<DMatrix<f64>> = (0..n)
            .map(|_| {
                let r = uniform_matrix(&mut rng, d, d, noise);
                (&r + r.transpose()) * 0.5
            })
            .collect();
        center(&mut p);
        // E_i = (I − ŷŷᵀ) R_i keeps E_iᵀ y* = 0.
        let proj = if m > 0 && y_star.norm() > 0.0 {
            let yh = &y_star / y_star.norm();
            DMatrix::identity(m, m) - &yh * yh.transpose()
        } else {
            DMatrix::identity(m, m)
        };
        let mut e: Vec<DMatrix<f64>> = (0..n).map(|_| &proj * uniform_matrix(&mut rng, m, d, noise)).collect();
        center(&mut e);

        Self { d, m, n, q_mat, q, a, b_hat, mu, anchor: x_star, p, e, h: NonsmoothTerm::Zero }
    }

    /// Deterministic single-sample instance from explicit data (`μ = 0`).
    /// `a` has one row per constraint (possibly none).
    pub fn from_parts(q_mat: Vec<Vec<f64>>, q: Vec<f64>, a: Vec<Vec<f64>>, b_hat: Vec<f64>) -> Result<Self> {
        let d = q.len();
        let m = b_hat.len();
        if q_mat.len() != d || q_mat.iter().any(|r| r.len() != d) || a.len() != m || a.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("inconsistent synthetic problem dimensions".into()));
        }
        Ok(Self {
            d,
            m,
            n: 1,
            q_mat: DMatrix::from_fn(d, d, |i, j| q_mat[i][j]),
            q: DVector::from_vec(q),
            a: DMatrix::from_fn(m, d, |i, j| a[i][j]),
            b_hat: DVector::from_vec(b_hat),
            mu: 0.0,
            anchor: DVector::zeros(d),
            p: vec![DMatrix::zeros(d, d)],
            e: vec![DMatrix::zeros(m, d)],
            h: NonsmoothTerm::Zero,
        })
    }

    pub fn with_nonsmooth(mut self, h: NonsmoothTerm) -> Self {
        self.h = h;
        self
    }

    /// Box `[-r, r]^d`.
    pub fn with_box(self, r: f64) -> Self {
        let d = self.d;
        self.with_nonsmooth(NonsmoothTerm::Box { lower: vec![-r; d], upper: vec![r; d] })
    }

    /// Multiply the objective data by `obj > 0` and the constraint data by
    /// `con > 0`; `x*` is unchanged and `y*` becomes `(obj/con)·y*`.
    pub fn scaled(mut self, obj: f64, con: f64) -> Self {
        self.q_mat *= obj;
        self.q *= obj;
        self.mu *= obj;
        for p in &mut self.p {
            *p *= obj;
        }
        self.a *= con;
        self.b_hat *= con;
        for e in &mut self.e {
            *e *= con;
        }
        self
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Conservative constants for the box `‖x‖∞ ≤ radius`: spectral-norm
    /// bounds of the data and of the perturbations.
    pub fn nominal_constants(&self, radius: f64) -> ProblemConstants {
        let n = self.n as f64;
        let x_rad = radius * (self.d as f64).sqrt();
        let dev = x_rad + self.anchor.norm();
        let q_norm = spectral_norm(&self.q_mat);
        let a_norm = spectral_norm(&self.a);
        let mean_sq = |ms: &[DMatrix<f64>], base: &DMatrix<f64>| ms.iter().map(|m| spectral_norm(&(base + m)).powi(2)).sum::<f64>() / n;
        let l0 = mean_sq(&self.p, &self.q_mat).sqrt() + self.mu;
        let a_sq = mean_sq(&self.e, &self.a);
        let zero_d = DMatrix::zeros(self.d, self.d);
        let zero_m = DMatrix::zeros(self.m, self.d);
        let sigma_g = mean_sq(&self.p, &zero_d).sqrt() * dev;
        let sigma_c = mean_sq(&self.e, &zero_m).sqrt().max((a_sq + a_norm * a_norm) * dev);
        let qn = self.q.norm();
        let b0 = (0.5 * q_norm * x_rad * x_rad + qn * x_rad + self.mu * self.d as f64)
            .max(q_norm * x_rad + qn + self.mu * (self.d as f64).sqrt());
        let smin = if self.m > 0 { self.a.clone().singular_values().min() } else { 1.0 };
        ProblemConstants { b0, bc: a_norm, m: 0.0, v: smin.clamp(f64::MIN_POSITIVE, 1.0), l0, lj: a_sq, sigma_g, sigma_c }
    }
}

/// Exact KKT pair of the `μ = 0` problem from the linear system
/// `[Q Aᵀ; A 0] [x; y] = [−q; b̂]` (the box, if any, is ignored).
pub fn synthetic_kkt_reference(p: &SyntheticAffineProblem) -> Result<(Vector, Vector)> {
    if p.mu != 0.0 {
        return Err(Error::InvalidArgument("KKT reference requires mu = 0".into()));
    }
    let (d, m) = (p.d, p.m);
    let mut k = DMatrix::zeros(d + m, d + m);
    k.view_mut((0, 0), (d, d)).copy_from(&p.q_mat);
    k.view_mut((0, d), (d, m)).copy_from(&p.a.transpose());
    k.view_mut((d, 0), (m, d)).copy_from(&p.a);
    let mut rhs = DVector::zeros(d + m);
    rhs.rows_mut(0, d).copy_from(&(-&p.q));
    rhs.rows_mut(d, m).copy_from(&p.b_hat);
    let sol = k
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::InvalidArgument("singular KKT system".into()))?;
    Ok((sol.rows(0, d).iter().copied().collect(), sol.rows(d, m).iter().copied().collect()))
}

impl Problem for SyntheticAffineProblem {
    fn dim(&self) -> usize {
        self.d
    }
    fn num_constraints(&self) -> usize {
        self.m
    }
    fn nonsmooth(&self) -> &NonsmoothTerm {
        &self.h
    }
    fn initial_point(&self) -> Vector {
        vec![0.0; self.d]
    }
    fn objective_samples(&self) -> usize {
        self.n
    }
    fn constraint_samples(&self) -> usize {
        self.n
    }
    fn coupled_samples(&self) -> bool {
        true
    }
    fn data_size(&self) -> usize {
        self.n
    }

    fn sample_objective(&self, x: &[f64], i: usize) -> f64 {
        let xv = DVector::from_column_slice(x);
        let dx = &xv - &self.anchor;
        0.5 * xv.dot(&(&self.q_mat * &xv))
            + self.q.dot(&xv)
            + self.mu * x.iter().map(|v| v.cos()).sum::<f64>()
            + 0.5 * dx.dot(&(&self.p[i] * &dx))
            - 0.5 * self.anchor.dot(&(&self.p[i] * &self.anchor))
    }

    fn add_sample_objective_grad(&self, x: &[f64], i: usize, scale: f64, out: &mut [f64]) {
        let p = &self.p[i];
        for r in 0..self.d {
            let mut g = self.q[r] - self.mu * x[r].sin();
            for c in 0..self.d {
                g += self.q_mat[(r, c)] * x[c] + p[(r, c)] * (x[c] - self.anchor[c]);
            }
            out[r] += scale * g;
        }
    }

    fn sample_constraint(&self, x: &[f64], j: usize, out: &mut [f64]) {
        let e = &self.e[j];
        for r in 0..self.m {
            let mut v = -self.b_hat[r];
            for c in 0..self.d {
                v += self.a[(r, c)] * x[c] + e[(r, c)] * (x[c] - self.anchor[c]);
            }
            out[r] = v;
        }
    }

    fn add_sample_jacobian_t(&self, _x: &[f64], j: usize, w: &[f64], out: &mut [f64]) {
        let e = &self.e[j];
        for c in 0..self.d {
            let mut v = 0.0;
            for r in 0..self.m {
                v += (self.a[(r, c)] + e[(r, c)]) * w[r];
            }
            out[c] += v;
        }
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        0.5 * xv.dot(&(&self.q_mat * &xv)) + self.q.dot(&xv) + self.mu * x.iter().map(|v| v.cos()).sum::<f64>()
    }

    fn add_objective_grad(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        let xv = DVector::from_column_slice(x);
        let g = &self.q_mat * &xv + &self.q;
        for j in 0..self.d {
            out[j] += scale * (g[j] - self.mu * x[j].sin());
        }
    }

    fn constraint(&self, x: &[f64], out: &mut [f64]) {
        let c = &self.a * DVector::from_column_slice(x) - &self.b_hat;
        out.copy_from_slice(c.as_slice());
    }

    fn add_jacobian_t(&self, _x: &[f64], w: &[f64], out: &mut [f64]) {
        let r = self.a.transpose() * DVector::from_column_slice(w);
        for (o, v) in out.iter_mut().zip(r.iter()) {
            *o += v;
        }
    }
}
