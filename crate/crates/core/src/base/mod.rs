//! Foundational numerics: dense vector helpers, nonsmooth terms with their
//! proximal maps and subdifferential distances, seeded random streams and the
//! user-supplied problem constants.

mod constants;
mod linalg;
mod nonsmooth;
pub mod rng;

pub use constants::ProblemConstants;
pub use linalg::*;
pub use nonsmooth::{dist_to_shifted_subdiff, prox, prox_in_place, NonsmoothTerm};
pub use rng::{derive_seed, RngStream, StreamLabel};

/// Dense real vector.
pub type Vector = Vec<f64>;

/// `[a]_{1+} = max(a, 1)`.
pub fn clamp_one_plus(a: f64) -> f64 {
    a.max(1.0)
}

/// `⌈x⌉`, snapping values within a relative 1e-12 of an integer onto it so
/// that rounding noise (e.g. `48 / 0.1²`) does not add one.
pub fn ceil_snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}
