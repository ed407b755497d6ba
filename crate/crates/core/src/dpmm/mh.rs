use super::chain::AcceptanceStats;
use super::state::ChainState;
use super::{g0_log_density, Hyperparams, KernelLikelihood, Likelihood, MCMCConfig, StepSizes};
use crate::ew::EWParams;
use crate::orderstats::{Atom, Sequence};
use crate::variates::standard_normal;
use crate::{Error, Result, RngStream};

/// Unnormalised log posterior of one cluster atom: base-measure log density
/// plus the members' log-likelihoods. `-inf` outside the parameter space.
pub fn mh_log_target<'a, I>(atom: &Atom, members: I, h: &Hyperparams) -> f64
where
    I: IntoIterator<Item = &'a Sequence>,
{
    mh_log_target_with(atom, members, h, &KernelLikelihood)
}

pub fn mh_log_target_with<'a, I, L>(atom: &Atom, members: I, h: &Hyperparams, lik: &L) -> f64
where
    I: IntoIterator<Item = &'a Sequence>,
    L: Likelihood,
{
    let prior = g0_log_density(atom, h);
    if prior == f64::NEG_INFINITY {
        return prior;
    }
    let mut total = prior;
    for x in members {
        total += lik.log_likelihood(x, atom);
        if total == f64::NEG_INFINITY {
            break;
        }
    }
    if total.is_nan() {
        f64::NEG_INFINITY
    } else {
        total
    }
}

/// Log-normal steps on `(alpha, beta, lambda)`, Gaussian step on `w`.
/// Returns the proposal and `ln(q(current | proposal) / q(proposal | current))`,
/// which for the log-scale moves is `ln(alpha' beta' lambda' / (alpha beta lambda))`.
fn propose(current: &Atom, steps: &StepSizes, rng: &mut RngStream) -> (Atom, f64) {
    let da = steps.alpha * standard_normal(rng);
    let db = steps.beta * standard_normal(rng);
    let dl = steps.lambda * standard_normal(rng);
    let dw = steps.w * standard_normal(rng);
    let proposal = Atom {
        ew: EWParams {
            alpha: current.ew.alpha * da.exp(),
            beta: current.ew.beta * db.exp(),
            lambda: current.ew.lambda * dl.exp(),
        },
        w: current.w + dw,
    };
    (proposal, da + db + dl)
}

/// Runs `mh_inner` Metropolis-Hastings steps on cluster `k`'s atom and keeps
/// the final state. Proposals with `w` outside (0, 1) are rejected outright.
#[allow(clippy::too_many_arguments)]
pub fn mh_cluster_update<L: Likelihood>(
    k: usize,
    state: &mut ChainState,
    data: &[Sequence],
    h: &Hyperparams,
    config: &MCMCConfig,
    rng: &mut RngStream,
    lik: &L,
    stats: &mut AcceptanceStats,
) -> Result<()> {
    if k >= state.n_clusters() {
        return Err(Error::domain(format!("cluster {k} is not live")));
    }
    let members: Vec<&Sequence> = state.members(k).into_iter().map(|i| &data[i]).collect();
    let mut current = state.atoms()[k];
    let mut current_target = mh_log_target_with(&current, members.iter().copied(), h, lik);
    for _ in 0..config.mh_inner {
        stats.proposed += 1;
        let (proposal, ln_hastings) = propose(&current, &config.step_sizes, rng);
        if !(proposal.w > 0.0 && proposal.w < 1.0) {
            stats.w_out_of_range += 1;
            continue;
        }
        let target = mh_log_target_with(&proposal, members.iter().copied(), h, lik);
        let ln_ratio = target - current_target + ln_hastings;
        // an infinite current target (possible only on entry) is always left
        if current_target == f64::NEG_INFINITY && target > f64::NEG_INFINITY
            || rng.open01().ln() < ln_ratio
        {
            current = proposal;
            current_target = target;
            stats.accepted += 1;
        }
    }
    state.set_atom(k, current);
    Ok(())
}
