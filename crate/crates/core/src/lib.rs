//! Bayesian extreme value analysis: GEV and GPD kernels, block-maxima and
//! threshold extraction, hierarchical random-effects likelihoods, a
//! random-walk Metropolis sampler with HPD/DIC summaries, derived risk
//! measures and a seeded simulation harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evd;
pub mod extract;
pub mod fit;
pub mod model;
pub mod quadrature;
pub mod risk;
pub mod sampler;
pub mod simlab;
pub mod stats;

pub use error::{Error, Result};
pub use evd::{GevParams, GpdParams, Mean};
