//! Summary statistics on top of a fitted mixture.

use serde::{Deserialize, Serialize};

use crate::dpmm::Trace;
use crate::orderstats::{length_log_pmf, order_stat_marginal_pdf, sample_top_values};
use crate::partition::Partition;
use crate::special::quantile_sorted;
use crate::variates::binomial_unchecked;
use crate::{Atom, EWParams, Error, Result, RngStream, Sequence};

pub const DEFAULT_EPSILON: f64 = 0.05;
pub const DEFAULT_OC_DRAWS: usize = 100_000;
const MIN_OC_DRAWS: usize = 1_000;

/// Expected first censored entry of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OCResult {
    pub value: f64,
    pub mc_se: f64,
    pub flagged: bool,
    pub epsilon: f64,
    pub draws: usize,
}

/// Mean total of the observed entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ACResult {
    pub value: f64,
    pub per_observation: Vec<f64>,
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// `j`-th ascending order statistic of `n` fresh kernel draws.
fn draw_order_stat(rng: &mut RngStream, ew: &EWParams, j: usize, n: usize, buf: &mut Vec<f64>) -> f64 {
    buf.clear();
    buf.extend((0..n).map(|_| ew.sample(rng)));
    let (_, v, _) = buf.select_nth_unstable_by(j - 1, f64::total_cmp);
    *v
}

/// One draw of the first censored entry; zero when nothing is censored.
fn draw_oc(rng: &mut RngStream, atom: &Atom, n: usize, buf: &mut Vec<f64>) -> f64 {
    let l = 1 + binomial_unchecked(rng, n as u64 - 1, atom.w) as usize;
    if l == n {
        0.0
    } else {
        draw_order_stat(rng, &atom.ew, n - l, n, buf)
    }
}

fn check_draws(draws: usize) -> Result<()> {
    if draws < MIN_OC_DRAWS {
        return Err(Error::domain(format!("need at least {MIN_OC_DRAWS} draws, got {draws}")));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(format!("epsilon must be finite and nonnegative, got {epsilon}")));
    }
    Ok(())
}

fn oc_result(samples: &[f64], epsilon: f64) -> OCResult {
    let (value, mc_se) = mean_and_se(samples);
    OCResult {
        value,
        mc_se,
        flagged: value >= epsilon,
        epsilon,
        draws: samples.len(),
    }
}

/// Monte-Carlo omitted-competitors statistic for one atom.
pub fn oc_statistic(
    atom: &Atom,
    n: usize,
    epsilon: f64,
    draws: usize,
    rng: &mut RngStream,
) -> Result<OCResult> {
    atom.validate()?;
    check_draws(draws)?;
    check_epsilon(epsilon)?;
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let mut buf = Vec::with_capacity(n);
    let samples: Vec<f64> = (0..draws).map(|_| draw_oc(rng, atom, n, &mut buf)).collect();
    Ok(oc_result(&samples, epsilon))
}

/// Monte-Carlo mean and standard error of the `j`-th smallest of `n` draws.
pub fn expected_order_statistic(
    ew: &EWParams,
    j: usize,
    n: usize,
    draws: usize,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    ew.validate()?;
    if j == 0 || j > n {
        return Err(Error::domain(format!("need 1 <= j <= n, got j = {j}, n = {n}")));
    }
    if draws < 2 {
        return Err(Error::domain("need at least 2 draws"));
    }
    let mut buf = Vec::with_capacity(n);
    let samples: Vec<f64> = (0..draws)
        .map(|_| draw_order_stat(rng, ew, j, n, &mut buf))
        .collect();
    Ok(mean_and_se(&samples))
}

/// Picks a retained sample uniformly, then one of `members` uniformly, and
/// returns that observation's atom.
fn posterior_atom<'a>(trace: &'a Trace, members: &[usize], rng: &mut RngStream) -> &'a Atom {
    let s = &trace.samples[rng.below(trace.samples.len())];
    s.atom_of(members[rng.below(members.len())])
}

fn check_members(trace: &Trace, members: &[usize]) -> Result<()> {
    if trace.samples.is_empty() {
        return Err(Error::domain("trace has no retained samples"));
    }
    if members.is_empty() {
        return Err(Error::domain("cluster has no members"));
    }
    if let Some(&i) = members.iter().find(|&&i| i >= trace.n_obs()) {
        return Err(Error::domain(format!("member {i} outside the trace")));
    }
    Ok(())
}

/// OC averaged over the posterior atoms of a group of observations.
pub fn posterior_oc(
    trace: &Trace,
    members: &[usize],
    n: usize,
    epsilon: f64,
    draws: usize,
    rng: &mut RngStream,
) -> Result<OCResult> {
    check_members(trace, members)?;
    check_draws(draws)?;
    check_epsilon(epsilon)?;
    let mut buf = Vec::with_capacity(n);
    let samples: Vec<f64> = (0..draws)
        .map(|_| {
            let atom = *posterior_atom(trace, members, rng);
            draw_oc(rng, &atom, n, &mut buf)
        })
        .collect();
    Ok(oc_result(&samples, epsilon))
}

/// Expected `j`-th smallest of `n` draws averaged over posterior atoms.
pub fn posterior_expected_order_statistic(
    trace: &Trace,
    members: &[usize],
    j: usize,
    n: usize,
    draws: usize,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    check_members(trace, members)?;
    if j == 0 || j > n {
        return Err(Error::domain(format!("need 1 <= j <= n, got j = {j}, n = {n}")));
    }
    if draws < 2 {
        return Err(Error::domain("need at least 2 draws"));
    }
    let mut buf = Vec::with_capacity(n);
    let samples: Vec<f64> = (0..draws)
        .map(|_| {
            let ew = posterior_atom(trace, members, rng).ew;
            draw_order_stat(rng, &ew, j, n, &mut buf)
        })
        .collect();
    Ok(mean_and_se(&samples))
}

pub fn ac_statistic(sequences: &[Sequence]) -> Result<ACResult> {
    if sequences.is_empty() {
        return Err(Error::domain("aggregate competition needs at least one sequence"));
    }
    let per_observation: Vec<f64> = sequences.iter().map(Sequence::total).collect();
    let value = per_observation.iter().sum::<f64>() / per_observation.len() as f64;
    Ok(ACResult {
        value,
        per_observation,
    })
}

/// Posterior predictive check of one partition cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PPCResult {
    pub label: usize,
    pub observed: f64,
    /// Fraction of replicates whose statistic exceeds the observed one.
    pub tail: f64,
    /// `2 (1 - tail)` before clamping.
    pub raw: f64,
    pub p_value: f64,
    pub lower: f64,
    pub upper: f64,
    pub replicates: Vec<f64>,
}

impl PPCResult {
    pub fn covers_observed(&self) -> bool {
        self.lower <= self.observed && self.observed <= self.upper
    }
}

/// For each cluster of `partition`, regenerates the member observations from
/// their atoms `reps` times per retained sample and compares the replicate
/// aggregate competition with the observed one.
pub fn posterior_predictive_pvalue(
    trace: &Trace,
    partition: &Partition,
    data: &[Sequence],
    reps: usize,
    rng: &mut RngStream,
) -> Result<Vec<PPCResult>> {
    if trace.samples.is_empty() {
        return Err(Error::domain("trace has no retained samples"));
    }
    if reps == 0 {
        return Err(Error::domain("need at least one replicate per sample"));
    }
    if data.len() != trace.n_obs() || partition.labels.len() != data.len() {
        return Err(Error::domain(format!(
            "data ({}), trace ({}) and partition ({}) disagree on the number of observations",
            data.len(),
            trace.n_obs(),
            partition.labels.len()
        )));
    }
    let mut out = Vec::new();
    for label in 0..partition.n_clusters() {
        let members = partition.members(label);
        if members.is_empty() {
            continue;
        }
        let observed = members.iter().map(|&i| data[i].total()).sum::<f64>() / members.len() as f64;
        let mut replicates = Vec::with_capacity(trace.samples.len() * reps);
        for s in &trace.samples {
            for _ in 0..reps {
                let total: f64 = members
                    .iter()
                    .map(|&i| {
                        let atom = s.atom_of(i);
                        sample_top_values(rng, &atom.ew, atom.w, data[i].n()).iter().sum::<f64>()
                    })
                    .sum();
                replicates.push(total / members.len() as f64);
            }
        }
        let tail = replicates.iter().filter(|&&r| r > observed).count() as f64 / replicates.len() as f64;
        let raw = 2.0 * (1.0 - tail);
        let mut sorted = replicates.clone();
        sorted.sort_by(f64::total_cmp);
        out.push(PPCResult {
            label,
            observed,
            tail,
            raw,
            p_value: raw.min(1.0),
            lower: quantile_sorted(&sorted, 0.025),
            upper: quantile_sorted(&sorted, 0.975),
            replicates,
        });
    }
    Ok(out)
}

/// What a density grid evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityTarget {
    /// The kernel density of a single uncensored value.
    Pooled,
    /// Marginal density of the `j`-th smallest of `n` values.
    OrderStatistic(usize),
    /// Probability mass of the sequence length; grid points are lengths.
    LengthPmf,
}

impl DensityTarget {
    /// Parses `pooled`, `length` or `os<j>`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pooled" => Ok(DensityTarget::Pooled),
            "length" => Ok(DensityTarget::LengthPmf),
            _ => s
                .strip_prefix("os")
                .and_then(|j| j.parse().ok())
                .map(DensityTarget::OrderStatistic)
                .ok_or_else(|| {
                    Error::Config(format!("unknown density target {s:?}; expected pooled, length or os<j>"))
                }),
        }
    }

    pub fn name(&self) -> String {
        match self {
            DensityTarget::Pooled => "pooled".into(),
            DensityTarget::OrderStatistic(j) => format!("os{j}"),
            DensityTarget::LengthPmf => "length".into(),
        }
    }
}

fn kernel(target: DensityTarget, x: f64, n: usize, atom: &Atom) -> Result<f64> {
    match target {
        DensityTarget::Pooled => atom.ew.pdf(x),
        DensityTarget::OrderStatistic(j) => order_stat_marginal_pdf(x, j, n, &atom.ew),
        DensityTarget::LengthPmf => Ok(length_log_pmf(x as usize, n, atom.w)?.exp()),
    }
}

/// Posterior mean of the mixture `sum_k (N_k / N) kernel(x | atom_k)` over
/// the retained samples, evaluated at every grid point.
pub fn predictive_density_grid(
    trace: &Trace,
    grid: &[f64],
    target: DensityTarget,
    n: usize,
) -> Result<Vec<f64>> {
    if trace.samples.is_empty() {
        return Err(Error::domain("trace has no retained samples"));
    }
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    match target {
        DensityTarget::LengthPmf => {
            if let Some(x) = grid
                .iter()
                .find(|&&x| !(x.fract() == 0.0 && x >= 1.0 && x <= n as f64))
            {
                return Err(Error::domain(format!("length grid point {x} is not an integer in 1..={n}")));
            }
        }
        DensityTarget::OrderStatistic(j) if j == 0 || j > n => {
            return Err(Error::domain(format!("need 1 <= j <= n, got j = {j}, n = {n}")));
        }
        _ => {
            if let Some(x) = grid.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
                return Err(Error::domain(format!("grid point {x} must be positive and finite")));
            }
        }
    }
    let mut out = vec![0.0; grid.len()];
    for s in &trace.samples {
        let sizes = s.cluster_sizes();
        let total = s.assignments.len() as f64;
        for (atom, &size) in s.atoms.iter().zip(&sizes) {
            let weight = size as f64 / total;
            for (o, &x) in out.iter_mut().zip(grid) {
                *o += weight * kernel(target, x, n, atom)?;
            }
        }
    }
    let m = trace.samples.len() as f64;
    for o in &mut out {
        *o /= m;
    }
    Ok(out)
}
