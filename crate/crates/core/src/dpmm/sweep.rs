use super::state::ChainState;
use super::{g0_sample_unchecked, Hyperparams, Likelihood};
use crate::orderstats::{Atom, Sequence};
use crate::special::log_sum_exp;
use crate::{Error, Result, RngStream};

/// Unnormalised log weights for observation `i` (already removed from the
/// state): `ln N_k + ln f(x_i | theta_k)` for live clusters followed by
/// `ln(nu / c) + ln f(x_i | aux_j)` for the auxiliaries. The common
/// `1 / (N - 1 + nu)` factor is dropped.
fn log_weights<L: Likelihood>(
    i: usize,
    state: &ChainState,
    aux: &[Atom],
    data: &[Sequence],
    lik: &L,
    out: &mut Vec<f64>,
) {
    out.clear();
    let x = &data[i];
    for (atom, &count) in state.atoms().iter().zip(state.counts()) {
        out.push((count as f64).ln() + lik.log_likelihood(x, atom));
    }
    let ln_aux = (state.nu() / aux.len() as f64).ln();
    for atom in aux {
        out.push(ln_aux + lik.log_likelihood(x, atom));
    }
    for v in out.iter_mut().filter(|v| v.is_nan()) {
        *v = f64::NEG_INFINITY;
    }
}

/// Normalised assignment probabilities for observation `i` over the
/// `N*` live clusters followed by the `c` auxiliaries. Observation `i` must
/// have been removed from `state` first.
pub fn assignment_weights<L: Likelihood>(
    i: usize,
    state: &ChainState,
    aux: &[Atom],
    data: &[Sequence],
    lik: &L,
) -> Result<Vec<f64>> {
    if !state.is_removed(i) {
        return Err(Error::domain(format!(
            "observation {i} must be removed from its cluster before weighting"
        )));
    }
    if aux.is_empty() {
        return Err(Error::domain("at least one auxiliary component is required"));
    }
    let mut lw = Vec::new();
    log_weights(i, state, aux, data, lik, &mut lw);
    let total = log_sum_exp(&lw);
    if total == f64::NEG_INFINITY {
        return Err(Error::DegenerateWeights { observation: i });
    }
    Ok(lw.iter().map(|v| (v - total).exp()).collect())
}

fn draw_index(rng: &mut RngStream, log_w: &[f64], total: f64) -> usize {
    let u = rng.unit();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (k, v) in log_w.iter().enumerate() {
        let p = (v - total).exp();
        if p > 0.0 {
            last_positive = k;
        }
        acc += p;
        if u < acc {
            return k;
        }
    }
    last_positive
}

/// One full reassignment pass in index order.
///
/// For each observation: remove it, draw `c` auxiliary atoms from the base
/// measure (a singleton's own atom takes the first auxiliary slot), and
/// draw its new cluster from the normalised weights. An auxiliary that is
/// picked becomes a new live cluster.
pub fn gibbs_assignment_sweep<L: Likelihood>(
    state: &mut ChainState,
    data: &[Sequence],
    h: &Hyperparams,
    aux_count: usize,
    rng: &mut RngStream,
    lik: &L,
) -> Result<()> {
    if aux_count == 0 {
        return Err(Error::Config("aux_count must be at least 1".into()));
    }
    if data.len() != state.n_obs() {
        return Err(Error::domain(format!(
            "state has {} observations but data has {}",
            state.n_obs(),
            data.len()
        )));
    }
    let mut aux = Vec::with_capacity(aux_count);
    let mut lw = Vec::new();
    for i in 0..data.len() {
        aux.clear();
        if let Some(own) = state.remove_observation(i) {
            aux.push(own);
        }
        while aux.len() < aux_count {
            aux.push(g0_sample_unchecked(rng, h));
        }
        log_weights(i, state, &aux, data, lik, &mut lw);
        let total = log_sum_exp(&lw);
        if total == f64::NEG_INFINITY || total.is_nan() {
            return Err(Error::DegenerateWeights { observation: i });
        }
        let live = state.n_clusters();
        let k = draw_index(rng, &lw, total);
        if k < live {
            state.assign(i, k);
        } else {
            state.open_cluster(i, aux[k - live]);
        }
    }
    Ok(())
}
