//! Dirichlet process mixtures of variable-length order-statistics sequences.
//!
//! Each observation is the top `l` of `n` iid Exponentiated Weibull draws, the
//! remaining `n - l` entries censored to zero. Clusters carry an atom
//! `(alpha, beta, lambda, w)`: the kernel parameters plus the success
//! probability of the `1 + Binomial(n - 1, w)` length model.
//!
//! Module map:
//!
//! * [`ew`], [`variates`], [`rng`]: the kernel and the random-variate toolkit.
//! * [`orderstats`]: sequence densities, likelihoods and simulation.
//! * [`dpmm`]: the auxiliary-component Gibbs sampler with Metropolis-Hastings
//!   atom refresh and the auxiliary-variable concentration update.
//! * [`partition`]: co-membership matrices and linear-loss partition selection.
//! * [`analytics`]: omitted competitors, aggregate competition, expected order
//!   statistics, posterior predictive checks and density grids.
//! * [`dataset`], [`simulate`], [`config`], [`trace_io`], [`report`],
//!   [`diagnostics`]: file formats and the command pipelines behind the CLI.

pub mod analytics;
pub mod config;
pub mod dataset;
pub mod diagnostics;
pub mod dpmm;
mod error;
pub mod ew;
mod fsutil;
pub mod orderstats;
pub mod partition;
pub mod report;
pub mod rng;
pub mod simulate;
pub mod special;
pub mod trace_io;
pub mod variates;

pub use error::{Error, Result};
pub use ew::EWParams;
pub use orderstats::{Atom, Sequence};
pub use rng::RngStream;
