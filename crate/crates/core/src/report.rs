//! Command pipelines: fit, partition, posterior predictive check, diagnose.
//!
//! Randomness after the chain comes from the `analytics` and `ppc`
//! substreams of the run seed, so analytics settings never perturb the chain.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytics::{
    ac_statistic, posterior_expected_order_statistic, posterior_oc, posterior_predictive_pvalue,
    predictive_density_grid, DensityTarget, OCResult, PPCResult,
};
use crate::config::RunConfig;
use crate::dataset::{ingest_csv, Dataset};
use crate::dpmm::{run_chain, AcceptanceStats, Trace};
use crate::fsutil::write_atomic;
use crate::partition::{
    clusterwise_summaries, coincidence_matrix, optimal_partition, ClusterSummary, Partition,
};
use crate::trace_io::{coincidence_csv_string, partition_csv_string, read_trace, write_trace};
use crate::{Error, Result, RngStream};

/// Number of largest order statistics reported per cluster.
pub const TOP_ORDER_STATISTICS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedOrderStat {
    pub j: usize,
    pub value: f64,
    pub mc_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PPCSummary {
    pub observed: f64,
    pub tail: f64,
    pub raw: f64,
    pub p_value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl From<&PPCResult> for PPCSummary {
    fn from(r: &PPCResult) -> Self {
        PPCSummary {
            observed: r.observed,
            tail: r.tail,
            raw: r.raw,
            p_value: r.p_value,
            lower: r.lower,
            upper: r.upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    #[serde(flatten)]
    pub summary: ClusterSummary,
    pub oc: OCResult,
    pub ac: f64,
    pub expected_order_statistics: Vec<ExpectedOrderStat>,
    pub ppc: PPCSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionInfo {
    pub k_star: f64,
    pub score: f64,
    pub n_clusters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub proposed: u64,
    pub accepted: u64,
    pub w_out_of_range: u64,
    pub rate: f64,
}

impl From<&AcceptanceStats> for AcceptanceReport {
    fn from(a: &AcceptanceStats) -> Self {
        AcceptanceReport {
            proposed: a.proposed,
            accepted: a.accepted,
            w_out_of_range: a.w_out_of_range,
            rate: a.rate(),
        }
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n_obs: usize,
    pub n: usize,
    pub retained_samples: usize,
    pub modal_n_star: usize,
    /// Entry `k` counts retained samples with `k` clusters.
    pub n_star_histogram: Vec<usize>,
    pub ac: f64,
    pub partition: PartitionInfo,
    pub clusters: Vec<ClusterReport>,
    pub acceptance: AcceptanceReport,
    pub config: serde_json::Map<String, serde_json::Value>,
}

/// Everything `fit` produces, before anything is written.
#[derive(Debug, Clone)]
pub struct FitOutput {
    pub trace: Trace,
    pub partition: Partition,
    pub summary: Summary,
}

fn check_width(config: &RunConfig, data: &Dataset) -> Result<()> {
    match config.n {
        Some(n) if n != data.n => Err(Error::Config(format!(
            "data.n is {n} but the data rows have width {}",
            data.n
        ))),
        _ => Ok(()),
    }
}

/// Partition selection from a trace.
pub fn select_partition(trace: &Trace, config: &RunConfig) -> Result<Partition> {
    let rho = coincidence_matrix(trace)?;
    optimal_partition(&rho, &config.k_grid)
}

/// Per-cluster tables for a fitted trace and its partition.
pub fn summarize(
    trace: &Trace,
    partition: &Partition,
    data: &Dataset,
    config: &RunConfig,
) -> Result<Summary> {
    let sequences = data.sequences();
    let params = clusterwise_summaries(trace, partition)?;
    let ppc = posterior_predictive_pvalue(
        trace,
        partition,
        &sequences,
        config.ppc_reps,
        &mut RngStream::new(config.seed()).substream("ppc"),
    )?;
    let analytics = RngStream::new(config.seed()).substream("analytics");
    let n = data.n;
    let mut clusters = Vec::with_capacity(params.len());
    for (summary, ppc) in params.into_iter().zip(&ppc) {
        let members = partition.members(summary.label);
        let mut rng = analytics.fork(summary.label as u64);
        let oc = posterior_oc(trace, &members, n, config.epsilon, config.oc_draws, &mut rng)?;
        let member_seqs: Vec<_> = members.iter().map(|&i| sequences[i].clone()).collect();
        let ac = ac_statistic(&member_seqs)?.value;
        let expected_order_statistics = (0..TOP_ORDER_STATISTICS.min(n))
            .map(|k| {
                let j = n - k;
                let (value, mc_se) =
                    posterior_expected_order_statistic(trace, &members, j, n, config.oc_draws, &mut rng)?;
                Ok(ExpectedOrderStat { j, value, mc_se })
            })
            .collect::<Result<_>>()?;
        clusters.push(ClusterReport {
            summary,
            oc,
            ac,
            expected_order_statistics,
            ppc: ppc.into(),
        });
    }
    Ok(Summary {
        n_obs: data.len(),
        n,
        retained_samples: trace.samples.len(),
        modal_n_star: trace.modal_n_star().unwrap_or(0),
        n_star_histogram: trace.n_star_histogram(),
        ac: ac_statistic(&sequences)?.value,
        partition: PartitionInfo {
            k_star: partition.k_star,
            score: partition.score,
            n_clusters: partition.n_clusters(),
        },
        clusters,
        acceptance: (&trace.acceptance).into(),
        config: config.to_flat(),
    })
}

/// Runs the sampler, partition selection and analytics in memory.
pub fn fit_dataset(data: &Dataset, config: &RunConfig) -> Result<FitOutput> {
    config.validate()?;
    check_width(config, data)?;
    let trace = run_chain(&data.sequences(), &config.priors, &config.mcmc)?;
    let partition = select_partition(&trace, config)?;
    let summary = summarize(&trace, &partition, data, config)?;
    Ok(FitOutput {
        trace,
        partition,
        summary,
    })
}

/// Evenly spaced grid for a density target given the data.
pub fn default_grid(target: DensityTarget, data: &Dataset, points: usize) -> Vec<f64> {
    match target {
        DensityTarget::LengthPmf => (1..=data.n).map(|l| l as f64).collect(),
        _ => {
            let max = data
                .rows
                .iter()
                .map(|r| r.sequence.values()[0])
                .fold(0.0, f64::max);
            let hi = 1.25 * max;
            (1..=points).map(|k| hi * k as f64 / points as f64).collect()
        }
    }
}

fn density_csv_string(grid: &[f64], values: &[f64]) -> String {
    let mut s = String::from("x,density\n");
    for (x, v) in grid.iter().zip(values) {
        let _ = writeln!(s, "{x},{v}");
    }
    s
}

fn summary_json_string(summary: &Summary) -> Result<String> {
    let mut s = serde_json::to_string_pretty(summary)?;
    s.push('\n');
    Ok(s)
}

/// `fit`: writes `trace.csv`, `coincidence.csv`, `partition.csv`,
/// `summary.json` and one `density_<target>.csv` per configured target.
pub fn fit(data_path: &Path, config: &RunConfig, out_dir: &Path) -> Result<FitOutput> {
    let data = ingest_csv(data_path)?;
    let targets = config.targets_for(data.n)?;
    let out = fit_dataset(&data, config)?;
    let ids = data.ids();
    write_trace(&out_dir.join("trace.csv"), &out.trace, &ids)?;
    let rho = coincidence_matrix(&out.trace)?;
    write_atomic(&out_dir.join("coincidence.csv"), coincidence_csv_string(&rho, &ids).as_bytes())?;
    write_atomic(&out_dir.join("partition.csv"), partition_csv_string(&out.partition, &ids).as_bytes())?;
    write_atomic(&out_dir.join("summary.json"), summary_json_string(&out.summary)?.as_bytes())?;
    for target in targets {
        let grid = default_grid(target, &data, config.density_points);
        let values = predictive_density_grid(&out.trace, &grid, target, data.n)?;
        write_atomic(
            &out_dir.join(format!("density_{}.csv", target.name())),
            density_csv_string(&grid, &values).as_bytes(),
        )?;
    }
    Ok(out)
}

/// `partition`: recomputes the co-membership matrix and partition from a
/// trace file; writes `coincidence.csv`, `partition.csv` and `clusters.json`.
pub fn partition_from_trace(trace_path: &Path, config: &RunConfig, out_dir: &Path) -> Result<Partition> {
    config.validate()?;
    let loaded = read_trace(trace_path)?;
    let rho = coincidence_matrix(&loaded.trace)?;
    let partition = optimal_partition(&rho, &config.k_grid)?;
    let clusters = clusterwise_summaries(&loaded.trace, &partition)?;
    write_atomic(&out_dir.join("coincidence.csv"), coincidence_csv_string(&rho, &loaded.ids).as_bytes())?;
    write_atomic(&out_dir.join("partition.csv"), partition_csv_string(&partition, &loaded.ids).as_bytes())?;
    let mut json = serde_json::to_string_pretty(&clusters)?;
    json.push('\n');
    write_atomic(&out_dir.join("clusters.json"), json.as_bytes())?;
    Ok(partition)
}

/// `pp-check`: writes `ppc.csv` (one row per cluster) and
/// `ppc_replicates.csv` (every replicate statistic).
pub fn pp_check(trace_path: &Path, data_path: &Path, config: &RunConfig, out_dir: &Path) -> Result<Vec<PPCResult>> {
    config.validate()?;
    let loaded = read_trace(trace_path)?;
    let data = ingest_csv(data_path)?;
    if loaded.ids != data.ids() {
        return Err(Error::domain(format!(
            "{} and {} list different observation ids",
            trace_path.display(),
            data_path.display()
        )));
    }
    let partition = select_partition(&loaded.trace, config)?;
    let results = posterior_predictive_pvalue(
        &loaded.trace,
        &partition,
        &data.sequences(),
        config.ppc_reps,
        &mut RngStream::new(config.seed()).substream("ppc"),
    )?;
    let mut table = String::from("cluster,size,observed,tail,raw,p_value,lower,upper\n");
    let mut reps = String::from("cluster,replicate,ac\n");
    for r in &results {
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{},{}",
            r.label,
            partition.members(r.label).len(),
            r.observed,
            r.tail,
            r.raw,
            r.p_value,
            r.lower,
            r.upper
        );
        for (k, v) in r.replicates.iter().enumerate() {
            let _ = writeln!(reps, "{},{k},{v}", r.label);
        }
    }
    write_atomic(&out_dir.join("ppc.csv"), table.as_bytes())?;
    write_atomic(&out_dir.join("ppc_replicates.csv"), reps.as_bytes())?;
    Ok(results)
}

/// `diagnose`: series, autocorrelation and effective-sample-size tables.
pub fn diagnose_trace(trace_path: &Path, out_dir: &Path) -> Result<()> {
    let loaded = read_trace(trace_path)?;
    crate::diagnostics::diagnose(&loaded.trace, out_dir)
}
