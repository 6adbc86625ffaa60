//! Problem constants entering the theoretical parameter rules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bounds assumed by the theory. They are configuration, not estimated from
/// data; the defaults are placeholders of the right order for normalized data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConstants {
    /// Bound on `|f0|` and `‖∇g‖` over the domain.
    pub b0: f64,
    /// Bound on `‖J_c‖`.
    pub bc: f64,
    /// Radius of the relevant subgradients of `h`.
    pub m: f64,
    /// Regularity constant, `0 < v ≤ 1`.
    pub v: f64,
    /// Mean-squared smoothness of the objective samples.
    pub l0: f64,
    /// Mean-squared smoothness of the constraint samples.
    pub lj: f64,
    /// Variance bound of the objective gradient samples.
    pub sigma_g: f64,
    /// Variance bound of the constraint samples.
    pub sigma_c: f64,
}

impl Default for ProblemConstants {
    fn default() -> Self {
        Self { b0: 1.0, bc: 1.0, m: 0.0, v: 1.0, l0: 1.0, lj: 1.0, sigma_g: 1.0, sigma_c: 1.0 }
    }
}

impl ProblemConstants {
    pub fn validate(&self) -> Result<()> {
        let all = [self.b0, self.bc, self.m, self.v, self.l0, self.lj, self.sigma_g, self.sigma_c];
        if all.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::Config("problem constants must be finite and nonnegative".into()));
        }
        if !(self.v > 0.0 && self.v <= 1.0) {
            return Err(Error::Config("regularity constant v must lie in (0, 1]".into()));
        }
        Ok(())
    }
}
