//! Stochastic inexact augmented Lagrangian method (Stoc-iALM) for nonconvex
//! finite-sum / expectation constrained problems
//!
//! ```text
//! min_x  E[G0(x; ξ)] + h(x)   s.t.  E[C(x; ξ)] = 0
//! ```
//!
//! The outer loop ([`ialm`]) minimizes a sequence of augmented Lagrangian
//! subproblems with a momentum-based variance-reduced proximal stochastic
//! gradient method ([`pstorm`]) driven by a two-sample gradient estimator
//! ([`estimator`]). Built-in problems ([`problems`]) cover fairness-constrained
//! and Neyman-Pearson classification on LIBSVM data ([`dataio`]) and a
//! synthetic affine-equality testbed; [`kkt`] evaluates primal/dual residuals.

// `!(x > 0.0)` guards are deliberate: they reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod base;
pub mod cli;
pub mod dataio;
pub mod error;
pub mod estimator;
pub mod ialm;
pub mod kkt;
pub mod problem;
pub mod problems;
pub mod pstorm;

pub use base::{NonsmoothTerm, ProblemConstants, RngStream, StreamLabel, Vector};
pub use error::{Error, Result};
pub use problem::{Problem, Sample, SamplePair};
