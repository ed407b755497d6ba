use serde::{Deserialize, Serialize};

use super::mh::mh_cluster_update;
use super::nu::nu_update;
use super::state::ChainState;
use super::sweep::gibbs_assignment_sweep;
use super::{g0_sample_unchecked, Hyperparams, KernelLikelihood, Likelihood, MCMCConfig};
use crate::orderstats::{Atom, Sequence};
use crate::{Error, Result, RngStream};

/// Metropolis-Hastings bookkeeping across all clusters and iterations. Each
/// proposal moves all four atom coordinates jointly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptanceStats {
    pub proposed: u64,
    pub accepted: u64,
    /// Proposals rejected because `w` left (0, 1).
    pub w_out_of_range: u64,
}

impl AcceptanceStats {
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// One retained iteration. Cluster labels are canonical: numbered by first
/// appearance in observation order, so `atoms[k]` belongs to the `k`-th
/// distinct label met.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSample {
    /// 1-based iteration number.
    pub iteration: usize,
    pub assignments: Vec<usize>,
    pub atoms: Vec<Atom>,
    pub nu: f64,
}

impl TraceSample {
    /// Builds a sample from arbitrary labels, canonicalising them.
    pub fn from_state(iteration: usize, assignments: &[usize], atoms: &[Atom], nu: f64) -> Self {
        let mut map = vec![usize::MAX; atoms.len()];
        let mut ordered = Vec::with_capacity(atoms.len());
        let labels = assignments
            .iter()
            .map(|&k| {
                if map[k] == usize::MAX {
                    map[k] = ordered.len();
                    ordered.push(atoms[k]);
                }
                map[k]
            })
            .collect();
        TraceSample {
            iteration,
            assignments: labels,
            atoms: ordered,
            nu,
        }
    }

    pub fn n_star(&self) -> usize {
        self.atoms.len()
    }

    /// The atom attached to observation `i` at this iteration.
    pub fn atom_of(&self, i: usize) -> &Atom {
        &self.atoms[self.assignments[i]]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.atoms.len()];
        for &k in &self.assignments {
            sizes[k] += 1;
        }
        sizes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub samples: Vec<TraceSample>,
    pub acceptance: AcceptanceStats,
}

impl Trace {
    pub fn n_obs(&self) -> usize {
        self.samples.first().map_or(0, |s| s.assignments.len())
    }

    /// Most frequent `N*` across retained samples; ties go to the smaller value.
    pub fn modal_n_star(&self) -> Option<usize> {
        let hist = self.n_star_histogram();
        hist.iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(k, _)| k)
    }

    /// `hist[k]` = number of retained samples with `k` clusters.
    pub fn n_star_histogram(&self) -> Vec<usize> {
        let max = self.samples.iter().map(|s| s.n_star()).max().unwrap_or(0);
        let mut hist = vec![0; max + 1];
        for s in &self.samples {
            hist[s.n_star()] += 1;
        }
        hist
    }
}

fn initial_state(
    data: &[Sequence],
    h: &Hyperparams,
    config: &MCMCConfig,
    rng: &mut RngStream,
) -> Result<ChainState> {
    let k0 = config.init_clusters.min(data.len());
    let raw: Vec<usize> = (0..data.len()).map(|_| rng.below(k0)).collect();
    // drop clusters that received nobody
    let mut map = vec![usize::MAX; k0];
    let mut next = 0;
    let assignments = raw
        .iter()
        .map(|&k| {
            if map[k] == usize::MAX {
                map[k] = next;
                next += 1;
            }
            map[k]
        })
        .collect();
    let atoms = (0..next).map(|_| g0_sample_unchecked(rng, h)).collect();
    ChainState::new(assignments, atoms, h.tau1 / h.tau2)
}

/// Runs the sampler with the model likelihood.
pub fn run_chain(data: &[Sequence], h: &Hyperparams, config: &MCMCConfig) -> Result<Trace> {
    run_chain_with(data, h, config, &KernelLikelihood, |_, _| {})
}

/// Runs the sampler with a custom likelihood, calling `on_iteration` after
/// every complete iteration.
///
/// Random numbers come from independent substreams of `config.seed`
/// ("init", "sweep", "mh", "nu").
pub fn run_chain_with<L, F>(
    data: &[Sequence],
    h: &Hyperparams,
    config: &MCMCConfig,
    lik: &L,
    mut on_iteration: F,
) -> Result<Trace>
where
    L: Likelihood,
    F: FnMut(usize, &ChainState),
{
    if data.is_empty() {
        return Err(Error::domain("no observations to fit"));
    }
    h.validate()?;
    config.validate()?;
    let root = RngStream::new(config.seed);
    let mut rng_init = root.substream("init");
    let mut rng_sweep = root.substream("sweep");
    let mut rng_mh = root.substream("mh");
    let mut rng_nu = root.substream("nu");

    let mut state = initial_state(data, h, config, &mut rng_init)?;
    let mut acceptance = AcceptanceStats::default();
    let mut samples = Vec::with_capacity(config.retained());

    for iteration in 1..=config.iterations {
        gibbs_assignment_sweep(&mut state, data, h, config.aux_count, &mut rng_sweep, lik)?;
        for k in 0..state.n_clusters() {
            mh_cluster_update(k, &mut state, data, h, config, &mut rng_mh, lik, &mut acceptance)?;
        }
        let nu = nu_update(state.nu(), state.n_obs(), state.n_clusters(), h, &mut rng_nu)?;
        state.set_nu(nu);

        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::NonFinite {
                iteration,
                what: format!("nu = {nu}"),
            });
        }
        if let Some(k) = state.atoms().iter().position(|a| !a.is_finite()) {
            return Err(Error::NonFinite {
                iteration,
                what: format!("cluster {k} atom {:?}", state.atoms()[k]),
            });
        }
        on_iteration(iteration, &state);

        if iteration > config.burn_in && (iteration - config.burn_in).is_multiple_of(config.thin) {
            samples.push(TraceSample::from_state(
                iteration,
                state.assignments(),
                state.atoms(),
                state.nu(),
            ));
        }
    }
    Ok(Trace {
        samples,
        acceptance,
    })
}
