//! Box-constrained low-rank matrix completion with stability diagnostics.
//!
//! The crate is organized around a dense rating matrix observed on a sparse
//! index set. [`matcore`] holds the shared vocabulary (sample sets, masking,
//! norms, RMSE, CSV exchange formats). [`factor`] fits a rank-r factorization
//! to the observed entries by alternating least squares. [`subgeo`] measures
//! how far two column subspaces are apart (canonical angles, projector
//! distances) and predicts single columns from a known subspace. [`bounds`]
//! evaluates the recovery-error and subspace-perturbation bounds that the
//! experiment harness checks against measurements. [`attacks`] generates
//! shilling-attack columns and splits recovery error between honest and
//! attacker blocks.
//!
//! All randomized operations take an explicit `u64` seed and are reproducible
//! bit-for-bit, independent of thread scheduling (see the `parallel` feature).

pub mod attacks;
pub mod bounds;
pub mod error;
pub mod factor;
pub mod linalg;
pub mod matcore;
mod parallel;
pub mod subgeo;

pub use error::{Axis, Error, Result};
