//! Bayesian mixture modelling for spike sorting.
//!
//! Two samplers over the same multivariate Gaussian likelihood with
//! Normal–Inverse-Wishart component priors:
//!
//! * [`ofm`] — an overfitted finite mixture with a sparse symmetric
//!   Dirichlet prior on the weights and prior parallel tempering across
//!   a ladder of Dirichlet hyperparameters.
//! * [`dpm`] — a Dirichlet process mixture sampled by slice sampling
//!   with adaptive truncation of the stick-breaking representation,
//!   concentration learning, and two label-switching moves.
//!
//! [`analysis`] turns allocation traces from either sampler into
//! occupied-count distributions, posterior pairwise similarity matrices,
//! and optimal partitions (PEAR), so the two posteriors can be compared
//! on equal terms.
//!
//! With the default `parallel` feature the hot loops (tempering rungs,
//! per-observation density evaluation, similarity accumulation) run on
//! rayon; disabling the feature leaves a pure sequential build. Both
//! paths produce bit-identical results for a fixed seed.

// `!(x > 0.0)` deliberately rejects NaN parameters; indexed loops are
// the house style for the small dense kernels here.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod data;
pub mod dist;
pub mod dpm;
pub mod error;
pub mod exec;
pub mod kmeans;
pub mod linalg;
pub mod niw;
pub mod ofm;
pub mod pca;
pub mod rng;
pub mod synthetic;
pub mod trace;

pub use error::{Error, Result};
pub use rng::RngStream;
