//! The Dirichlet process mixture sampler.
//!
//! One iteration of [`run_chain`] is:
//!
//! 1. an auxiliary-component Gibbs sweep over the assignments (Neal's
//!    algorithm 8, `c` fresh base-measure draws per observation);
//! 2. a fixed number of Metropolis-Hastings steps on each live cluster atom,
//!    log-normal random walks on `(alpha, beta, lambda)` and a Gaussian walk
//!    on `w`;
//! 3. the auxiliary-variable Gibbs update of the concentration `nu`.

mod chain;
mod mh;
mod nu;
mod state;
mod sweep;

use serde::{Deserialize, Serialize};

pub use chain::{run_chain, run_chain_with, AcceptanceStats, Trace, TraceSample};
pub use mh::{mh_cluster_update, mh_log_target, mh_log_target_with};
pub use nu::{nu_update, prior_expected_clusters};
pub use state::ChainState;
pub use sweep::{assignment_weights, gibbs_assignment_sweep};

use crate::ew::EWParams;
use crate::orderstats::{sequence_log_likelihood, Atom, Sequence};
use crate::special::ln_gamma;
use crate::variates::{beta_unchecked, gamma_unchecked};
use crate::{Error, Result, RngStream};

/// Per-observation likelihood `f(x_i | theta)` used by the sampler.
pub trait Likelihood {
    fn log_likelihood(&self, seq: &Sequence, atom: &Atom) -> f64;
}

/// The model likelihood: length pmf times the top-`l` joint density.
#[derive(Debug, Clone, Copy, Default)]
pub struct KernelLikelihood;

impl Likelihood for KernelLikelihood {
    #[inline]
    fn log_likelihood(&self, seq: &Sequence, atom: &Atom) -> f64 {
        sequence_log_likelihood(seq, atom)
    }
}

/// `f == 1`. Turns the sampler into a draw from the partition prior; used to
/// check the sweep against the Chinese-restaurant dynamics.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlatLikelihood;

impl Likelihood for FlatLikelihood {
    #[inline]
    fn log_likelihood(&self, _seq: &Sequence, _atom: &Atom) -> f64 {
        0.0
    }
}

/// Base-measure and concentration hyperparameters. All Gammas are
/// shape-rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Beta(a, b) prior on `w`.
    pub a: f64,
    pub b: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Gamma(tau1, tau2) prior on `nu`.
    pub tau1: f64,
    pub tau2: f64,
}

impl Hyperparams {
    /// Gamma(1, 0.1) on each kernel parameter, uniform `w`, `nu ~ Gamma(1, 1)`.
    pub fn vague() -> Self {
        Hyperparams {
            a: 1.0,
            b: 1.0,
            alpha1: 1.0,
            alpha2: 0.1,
            beta1: 1.0,
            beta2: 0.1,
            lambda1: 1.0,
            lambda2: 0.1,
            tau1: 1.0,
            tau2: 1.0,
        }
    }

    /// The informative retail-analytics priors:
    /// Gamma(7, 0.7) x Gamma(0.5, 1) x Gamma(1, 1) x Beta(2, 3), `nu ~ Gamma(5, 1)`.
    pub fn retail() -> Self {
        Hyperparams {
            a: 2.0,
            b: 3.0,
            alpha1: 7.0,
            alpha2: 0.7,
            beta1: 0.5,
            beta2: 1.0,
            lambda1: 1.0,
            lambda2: 1.0,
            tau1: 5.0,
            tau2: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("a", self.a),
            ("b", self.b),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("tau1", self.tau1),
            ("tau2", self.tau2),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!(
                    "hyperparameter {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Proposal standard deviations: log scale for the kernel parameters,
/// natural scale for `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSizes {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub w: f64,
}

impl Default for StepSizes {
    fn default() -> Self {
        StepSizes {
            alpha: 0.3,
            beta: 0.3,
            lambda: 0.3,
            w: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCMCConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Auxiliary components per observation in the assignment sweep.
    pub aux_count: usize,
    /// Metropolis-Hastings steps per cluster per iteration.
    pub mh_inner: usize,
    pub step_sizes: StepSizes,
    /// Number of clusters the observations are randomly spread over at start.
    pub init_clusters: usize,
    pub seed: u64,
}

impl Default for MCMCConfig {
    fn default() -> Self {
        MCMCConfig {
            iterations: 10_000,
            burn_in: 200,
            thin: 10,
            aux_count: 3,
            mh_inner: 20,
            step_sizes: StepSizes::default(),
            init_clusters: 10,
            seed: 1,
        }
    }
}

impl MCMCConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.iterations == 0 {
            return bad("iterations must be positive");
        }
        if self.burn_in >= self.iterations {
            return bad("burn_in must be smaller than iterations");
        }
        if self.thin == 0 {
            return bad("thin must be at least 1");
        }
        if self.aux_count == 0 {
            return bad("aux_count must be at least 1");
        }
        if self.mh_inner == 0 {
            return bad("mh_inner must be at least 1");
        }
        if self.init_clusters == 0 {
            return bad("init_clusters must be at least 1");
        }
        let s = self.step_sizes;
        if [s.alpha, s.beta, s.lambda, s.w]
            .iter()
            .any(|v| !(v.is_finite() && *v > 0.0))
        {
            return bad("step sizes must be positive");
        }
        Ok(())
    }

    /// `floor((iterations - burn_in) / thin)`.
    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

/// One atom from the base measure
/// `Gamma(alpha1, alpha2) x Gamma(beta1, beta2) x Gamma(lambda1, lambda2) x Beta(a, b)`.
pub fn g0_sample(rng: &mut RngStream, h: &Hyperparams) -> Result<Atom> {
    h.validate()?;
    Ok(g0_sample_unchecked(rng, h))
}

pub(crate) fn g0_sample_unchecked(rng: &mut RngStream, h: &Hyperparams) -> Atom {
    let alpha = gamma_unchecked(rng, h.alpha1, h.alpha2);
    let beta = gamma_unchecked(rng, h.beta1, h.beta2);
    let lambda = gamma_unchecked(rng, h.lambda1, h.lambda2);
    // a ratio of Gammas can round to exactly 0 or 1
    let w = loop {
        let w = beta_unchecked(rng, h.a, h.b);
        if w > 0.0 && w < 1.0 {
            break w;
        }
    };
    Atom {
        ew: EWParams {
            alpha,
            beta,
            lambda,
        },
        w,
    }
}

fn ln_gamma_density(x: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

/// Log density of the base measure; `-inf` outside the support.
pub fn g0_log_density(atom: &Atom, h: &Hyperparams) -> f64 {
    let [alpha, beta, lambda, w] = atom.as_array();
    if !(alpha > 0.0 && beta > 0.0 && lambda > 0.0 && w > 0.0 && w < 1.0) {
        return f64::NEG_INFINITY;
    }
    let ln_beta_fn = ln_gamma(h.a) + ln_gamma(h.b) - ln_gamma(h.a + h.b);
    ln_gamma_density(alpha, h.alpha1, h.alpha2)
        + ln_gamma_density(beta, h.beta1, h.beta2)
        + ln_gamma_density(lambda, h.lambda1, h.lambda2)
        + (h.a - 1.0) * w.ln()
        + (h.b - 1.0) * (-w).ln_1p()
        - ln_beta_fn
}
