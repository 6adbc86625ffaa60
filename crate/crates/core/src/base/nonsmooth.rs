//! Structured nonsmooth terms `h`, their proximal maps and the distance
//! `dist(0, g + ∂h(x))` used by the dual residual.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The supported nonsmooth terms. All are indicator functions (or zero), so
/// the proximal map is a projection and does not depend on the step size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NonsmoothTerm {
    /// `h ≡ 0`.
    Zero,
    /// Indicator of `{x : x_i ≥ 0 for i in coords}` (0-based, sorted, unique).
    NonnegOrthant { coords: Vec<usize> },
    /// Indicator of `{x : lower ≤ x ≤ upper}`; bounds may be infinite.
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl NonsmoothTerm {
    /// Orthant on the given coordinates; `dim` bounds the indices.
    pub fn nonneg_orthant(mut coords: Vec<usize>, dim: usize) -> Result<Self> {
        coords.sort_unstable();
        coords.dedup();
        if let Some(&i) = coords.iter().find(|&&i| i >= dim) {
            return Err(Error::InvalidArgument(format!("orthant coordinate {i} out of range for dimension {dim}")));
        }
        Ok(Self::NonnegOrthant { coords })
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidArgument("box bounds differ in length".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u) || l.is_nan()) {
            return Err(Error::InvalidArgument("box requires lower <= upper".into()));
        }
        Ok(Self::Box { lower, upper })
    }

    /// Append `extra` coordinates constrained to be nonnegative, for a
    /// variable `(x, s)` with `x` of dimension `inner_dim`.
    pub fn extend_with_nonneg(&self, inner_dim: usize, extra: usize) -> Self {
        match self {
            Self::Zero => Self::NonnegOrthant { coords: (inner_dim..inner_dim + extra).collect() },
            Self::NonnegOrthant { coords } => {
                let mut c = coords.clone();
                c.extend(inner_dim..inner_dim + extra);
                Self::NonnegOrthant { coords: c }
            }
            Self::Box { lower, upper } => {
                let mut l = lower.clone();
                let mut u = upper.clone();
                l.resize(inner_dim + extra, 0.0);
                u.resize(inner_dim + extra, f64::INFINITY);
                Self::Box { lower: l, upper: u }
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Self::Zero => true,
            Self::NonnegOrthant { coords } => coords.iter().all(|&i| i < x.len() && x[i] >= 0.0),
            Self::Box { lower, upper } => {
                lower.len() == x.len() && x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| l <= v && v <= u)
            }
        }
    }

    /// `h(x)`: zero inside the domain, `+∞` outside.
    pub fn value(&self, x: &[f64]) -> f64 {
        if self.contains(x) {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::DomainViolation("point is outside dom(h)".into()))
        }
    }
}

/// `prox_{step·h}(x)`.
pub fn prox(h: &NonsmoothTerm, x: &[f64], step: f64) -> Vec<f64> {
    let mut out = x.to_vec();
    prox_in_place(h, &mut out, step);
    out
}

pub fn prox_in_place(h: &NonsmoothTerm, x: &mut [f64], step: f64) {
    debug_assert!(step > 0.0);
    match h {
        NonsmoothTerm::Zero => {}
        NonsmoothTerm::NonnegOrthant { coords } => {
            for &i in coords {
                x[i] = x[i].max(0.0);
            }
        }
        NonsmoothTerm::Box { lower, upper } => {
            for ((v, l), u) in x.iter_mut().zip(lower).zip(upper) {
                *v = v.clamp(*l, *u);
            }
        }
    }
}

/// Distance from `0` to `g + N(x)` along one coordinate whose normal cone is
/// `[lo_cone, hi_cone]` (`lo_cone ≤ 0 ≤ hi_cone`).
fn coord_dist(g: f64, lo_cone: f64, hi_cone: f64) -> f64 {
    // dist(-g, [lo, hi])
    let t = -g;
    if t < lo_cone {
        lo_cone - t
    } else if t > hi_cone {
        t - hi_cone
    } else {
        0.0
    }
}

/// `dist(0, g + ∂h(x))`, combined over coordinates in the Euclidean norm.
pub fn dist_to_shifted_subdiff(h: &NonsmoothTerm, x: &[f64], g: &[f64]) -> Result<f64> {
    if x.len() != g.len() {
        return Err(Error::InvalidArgument("x and g differ in length".into()));
    }
    h.check_domain(x)?;
    let ninf = f64::NEG_INFINITY;
    let pinf = f64::INFINITY;
    let sq = match h {
        NonsmoothTerm::Zero => g.iter().map(|v| v * v).sum::<f64>(),
        NonsmoothTerm::NonnegOrthant { coords } => {
            let mut active = vec![false; x.len()];
            for &i in coords {
                // N = (-∞, 0] at the boundary
                active[i] = x[i] == 0.0;
            }
            g.iter()
                .zip(&active)
                .map(|(&gi, &a)| {
                    let d = if a { coord_dist(gi, ninf, 0.0) } else { gi };
                    d * d
                })
                .sum()
        }
        NonsmoothTerm::Box { lower, upper } => g
            .iter()
            .enumerate()
            .map(|(i, &gi)| {
                let lo = if x[i] == lower[i] { ninf } else { 0.0 };
                let hi = if x[i] == upper[i] { pinf } else { 0.0 };
                let d = coord_dist(gi, lo, hi);
                d * d
            })
            .sum(),
    };
    Ok(sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn orthant2() -> NonsmoothTerm {
        NonsmoothTerm::nonneg_orthant(vec![1], 2).unwrap()
    }

    #[test]
    fn prox_examples() {
        assert_eq!(prox(&NonsmoothTerm::Zero, &[1.0, -2.0], 0.5), vec![1.0, -2.0]);
        assert_eq!(prox(&orthant2(), &[-1.0, -2.0], 1.0), vec![-1.0, 0.0]);
        let b = NonsmoothTerm::boxed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(prox(&b, &[-0.5, 2.0], 1.0), vec![0.0, 1.0]);
    }

    /// Independent oracle: minimize |g + n| over a fine grid of the cone n ≤ 0.
    fn grid_dist_nonpositive_cone(g: f64) -> f64 {
        (0..=200_000).map(|k| -(k as f64) * 1e-4).map(|n| (g + n).abs()).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn dist_examples() {
        assert_eq!(dist_to_shifted_subdiff(&NonsmoothTerm::Zero, &[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        let h = NonsmoothTerm::nonneg_orthant(vec![0], 2).unwrap();
        for g in [-2.0, 2.0] {
            let got = dist_to_shifted_subdiff(&h, &[0.0, 7.0], &[g, 0.0]).unwrap();
            assert!((got - grid_dist_nonpositive_cone(g)).abs() < 1e-9);
        }
        // g = -2 would decrease the objective by moving into x_1 > 0: not stationary.
        assert_eq!(dist_to_shifted_subdiff(&h, &[0.0, 7.0], &[-2.0, 0.0]).unwrap(), 2.0);
        assert_eq!(dist_to_shifted_subdiff(&h, &[0.0, 7.0], &[2.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn dist_rejects_points_outside_domain() {
        let h = NonsmoothTerm::nonneg_orthant(vec![0], 1).unwrap();
        assert!(matches!(dist_to_shifted_subdiff(&h, &[-1.0], &[0.0]), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn dist_zero_iff_minus_g_in_subdifferential() {
        let b = NonsmoothTerm::boxed(vec![0.0, -1.0, 2.0], vec![1.0, 1.0, 2.0]).unwrap();
        let x = [0.0, 1.0, 2.0];
        // at lower: need g ≥ 0; at upper: need g ≤ 0; fixed coordinate: any g
        assert_eq!(dist_to_shifted_subdiff(&b, &x, &[0.5, -3.0, 9.0]).unwrap(), 0.0);
        assert!(dist_to_shifted_subdiff(&b, &x, &[-0.5, -3.0, 9.0]).unwrap() > 0.0);
        assert!(dist_to_shifted_subdiff(&b, &x, &[0.5, 3.0, 9.0]).unwrap() > 0.0);
        let h = orthant2();
        assert_eq!(dist_to_shifted_subdiff(&h, &[0.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!(dist_to_shifted_subdiff(&h, &[0.0, 3.0], &[0.0, 1.0]).unwrap() > 0.0);
        assert_eq!(dist_to_shifted_subdiff(&NonsmoothTerm::Zero, &[5.0], &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn extend_with_nonneg_keeps_inner_term() {
        let b = NonsmoothTerm::boxed(vec![-1.0], vec![1.0]).unwrap();
        let e = b.extend_with_nonneg(1, 2);
        assert!(e.contains(&[0.5, 0.0, 3.0]));
        assert!(!e.contains(&[0.5, -0.1, 3.0]));
        assert!(!e.contains(&[2.0, 0.0, 0.0]));
        let o = NonsmoothTerm::Zero.extend_with_nonneg(2, 1);
        assert_eq!(o, NonsmoothTerm::NonnegOrthant { coords: vec![2] });
    }

    fn terms() -> Vec<NonsmoothTerm> {
        vec![
            NonsmoothTerm::Zero,
            NonsmoothTerm::nonneg_orthant(vec![0, 2], 3).unwrap(),
            NonsmoothTerm::boxed(vec![-1.0, 0.0, -2.0], vec![1.0, 0.5, f64::INFINITY]).unwrap(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn prox_is_nonexpansive_and_lands_in_domain(
            x in prop::collection::vec(-10.0f64..10.0, 3),
            y in prop::collection::vec(-10.0f64..10.0, 3),
            step in 1e-3f64..10.0,
        ) {
            for h in terms() {
                let px = prox(&h, &x, step);
                let py = prox(&h, &y, step);
                prop_assert!(crate::base::dist(&px, &py) <= crate::base::dist(&x, &y) + 1e-12);
                prop_assert!(h.contains(&px));
                prop_assert_eq!(px, prox(&h, &x, 1.0));
            }
        }

        #[test]
        fn dist_monotone_under_normal_cone_shift(
            x in prop::collection::vec(-3.0f64..3.0, 3),
            g in prop::collection::vec(-3.0f64..3.0, 3),
            n in prop::collection::vec(0.0f64..5.0, 3),
        ) {
            let h = NonsmoothTerm::nonneg_orthant(vec![0, 1, 2], 3).unwrap();
            let mut x = prox(&h, &x, 1.0);
            x[1] = 0.0;
            // normal-cone element: nonpositive entries on active coordinates
            let shift: Vec<f64> = (0..3).map(|i| if x[i] == 0.0 { -n[i] } else { 0.0 }).collect();
            let plus: Vec<f64> = g.iter().zip(&shift).map(|(a, b)| a + b).collect();
            let minus: Vec<f64> = g.iter().zip(&shift).map(|(a, b)| a - b).collect();
            let d = dist_to_shifted_subdiff(&h, &x, &g).unwrap();
            // g - n + N ⊇ g + N ⊇ g + n + N
            prop_assert!(dist_to_shifted_subdiff(&h, &x, &minus).unwrap() <= d + 1e-12);
            prop_assert!(dist_to_shifted_subdiff(&h, &x, &plus).unwrap() >= d - 1e-12);
        }

        #[test]
        fn dist_invariant_along_normal_cone_lineality(
            g in prop::collection::vec(-3.0f64..3.0, 2),
            t in -50.0f64..50.0,
        ) {
            // second coordinate is fixed (lower = upper), so its normal cone is all of R
            let h = NonsmoothTerm::boxed(vec![-1.0, 0.5], vec![1.0, 0.5]).unwrap();
            let x = [0.2, 0.5];
            let shifted = [g[0], g[1] + t];
            prop_assert_eq!(
                dist_to_shifted_subdiff(&h, &x, &g).unwrap(),
                dist_to_shifted_subdiff(&h, &x, &shifted).unwrap()
            );
        }
    }
}
