//! Latent-class inference for categorical rating data.
//!
//! Multiple raters assign items to one of K known categories; each item has an
//! unobserved true class. This crate fits the Dawid-Skene model and three
//! variants (class-conditional, hierarchical, homogeneous) with either full
//! Bayesian inference via an adaptive Hamiltonian sampler or MAP estimation
//! via EM / quasi-Newton ascent. The discrete classes are marginalized out of
//! the likelihood; their posterior probabilities are recovered afterwards by
//! averaging exact conditionals across posterior draws.
//!
//! Rating data is accepted in long (one row per rating), wide (one row per
//! item), and grouped (one row per distinct rating pattern plus a tally)
//! formats, with conversions between them.

pub mod dataset;
pub mod datasets;
pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod likelihood;
pub mod mcmc;
pub mod model;
pub mod optimize;
pub mod params;
pub mod posterior;

pub use error::{Error, Result};
