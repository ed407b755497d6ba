//! Posterior co-membership and the linear-loss optimal partition.
//!
//! For a threshold `K`, a hard clustering `C` scores
//! `sum_{i<j} 1[C_i = C_j] (rho_ij - K)`. The optimiser is a best-improvement
//! local search over single-observation moves and whole-cluster merges,
//! started from all-singletons and from ten seeded random partitions.

use serde::{Deserialize, Serialize};

use crate::dpmm::Trace;
use crate::special::quantile_sorted;
use crate::{Error, Result, RngStream};

pub const DEFAULT_K_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

const RANDOM_RESTARTS: usize = 10;
const RESTART_SEED: u64 = 0x5eed_0fc1_u64;
const SCORE_TIE: f64 = 1e-9;

/// Symmetric `N x N` matrix of co-membership proportions with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl CoincidenceMatrix {
    /// Validates a row-major dense matrix.
    pub fn from_dense(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::domain(format!(
                "coincidence matrix needs {} entries, got {}",
                n * n,
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 1.0 {
                return Err(Error::domain(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..i {
                let v = values[i * n + j];
                if !(0.0..=1.0).contains(&v) || v != values[j * n + i] {
                    return Err(Error::domain(format!(
                        "entry ({i}, {j}) must be symmetric and in [0, 1]"
                    )));
                }
            }
        }
        Ok(CoincidenceMatrix { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

/// `rho_ij` = fraction of retained samples placing `i` and `j` together.
pub fn coincidence_matrix(trace: &Trace) -> Result<CoincidenceMatrix> {
    if trace.samples.is_empty() {
        return Err(Error::domain("trace has no retained samples"));
    }
    let n = trace.n_obs();
    let mut counts = vec![0u32; n * n];
    for s in &trace.samples {
        if s.assignments.len() != n {
            return Err(Error::domain("trace samples disagree on the number of observations"));
        }
        for i in 0..n {
            let ci = s.assignments[i];
            let row = &mut counts[i * n..i * n + i];
            for (j, c) in row.iter_mut().enumerate() {
                if s.assignments[j] == ci {
                    *c += 1;
                }
            }
        }
    }
    let m = trace.samples.len() as f64;
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for j in 0..i {
            let v = counts[i * n + j] as f64 / m;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(CoincidenceMatrix { n, values })
}

/// Relabels clusters by order of first appearance.
pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&c| {
            let next = map.len();
            *map.entry(c).or_insert(next)
        })
        .collect()
}

/// The linear-loss objective `sum_{i<j} 1[C_i = C_j] (rho_ij - K)`.
pub fn partition_score(labels: &[usize], rho: &CoincidenceMatrix, k: f64) -> f64 {
    let n = labels.len();
    let mut score = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            if labels[i] == labels[j] {
                score += rho.get(i, j) - k;
            }
        }
    }
    score
}

/// A hard clustering with the threshold that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub labels: Vec<usize>,
    pub k_star: f64,
    pub score: f64,
}

impl Partition {
    pub fn n_clusters(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| (c == cluster).then_some(i))
            .collect()
    }
}

enum Action {
    Move { obs: usize, to: Option<usize> },
    Merge { keep: usize, absorb: usize },
}

/// Local search state. Cluster ids are slots `0..n`; `aff[i * n + c]` is
/// `sum_{j != i, C_j = c} (rho_ij - K)`.
struct Search<'a> {
    n: usize,
    weight: &'a [f64],
    labels: Vec<usize>,
    sizes: Vec<usize>,
    live: Vec<usize>,
    aff: Vec<f64>,
}

impl<'a> Search<'a> {
    fn new(weight: &'a [f64], n: usize, labels: Vec<usize>) -> Self {
        let mut sizes = vec![0; n];
        for &c in &labels {
            sizes[c] += 1;
        }
        let live = (0..n).filter(|&c| sizes[c] > 0).collect();
        let mut aff = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    aff[i * n + labels[j]] += weight[i * n + j];
                }
            }
        }
        Search {
            n,
            weight,
            labels,
            sizes,
            live,
            aff,
        }
    }

    fn best_action(&self) -> Option<Action> {
        let n = self.n;
        let mut best_gain = 1e-12;
        let mut best = None;
        for i in 0..n {
            let own = self.labels[i];
            let cur = self.aff[i * n + own];
            for &c in &self.live {
                if c != own {
                    let g = self.aff[i * n + c] - cur;
                    if g > best_gain {
                        best_gain = g;
                        best = Some(Action::Move { obs: i, to: Some(c) });
                    }
                }
            }
            if self.sizes[own] > 1 && -cur > best_gain {
                best_gain = -cur;
                best = Some(Action::Move { obs: i, to: None });
            }
        }
        // pairwise cluster gains S[a][b] = sum_{i in a} aff[i][b]
        let m = self.live.len();
        let mut pos = vec![usize::MAX; n];
        for (p, &c) in self.live.iter().enumerate() {
            pos[c] = p;
        }
        let mut pair = vec![0.0; m * m];
        for i in 0..n {
            let a = pos[self.labels[i]];
            for (b, &c) in self.live.iter().enumerate().skip(a + 1) {
                pair[a * m + b] += self.aff[i * n + c];
            }
        }
        for a in 0..m {
            for b in (a + 1)..m {
                if pair[a * m + b] > best_gain {
                    best_gain = pair[a * m + b];
                    best = Some(Action::Merge {
                        keep: self.live[a],
                        absorb: self.live[b],
                    });
                }
            }
        }
        best
    }

    fn apply(&mut self, action: Action) {
        let n = self.n;
        match action {
            Action::Move { obs, to } => {
                let from = self.labels[obs];
                let to = to.unwrap_or_else(|| {
                    (0..n).find(|&c| self.sizes[c] == 0).expect("a free slot exists")
                });
                for j in 0..n {
                    if j != obs {
                        let w = self.weight[j * n + obs];
                        self.aff[j * n + from] -= w;
                        self.aff[j * n + to] += w;
                    }
                }
                self.labels[obs] = to;
                self.sizes[from] -= 1;
                if self.sizes[to] == 0 {
                    self.live.push(to);
                }
                self.sizes[to] += 1;
                if self.sizes[from] == 0 {
                    self.live.retain(|&c| c != from);
                }
            }
            Action::Merge { keep, absorb } => {
                for j in 0..n {
                    let v = self.aff[j * n + absorb];
                    self.aff[j * n + keep] += v;
                    self.aff[j * n + absorb] = 0.0;
                }
                for l in self.labels.iter_mut().filter(|l| **l == absorb) {
                    *l = keep;
                }
                self.sizes[keep] += self.sizes[absorb];
                self.sizes[absorb] = 0;
                self.live.retain(|&c| c != absorb);
            }
        }
    }

    fn run(mut self) -> Vec<usize> {
        while let Some(action) = self.best_action() {
            self.apply(action);
        }
        canonical_labels(&self.labels)
    }
}

fn better(score: f64, labels: &[usize], best: &Option<(f64, Vec<usize>)>) -> bool {
    match best {
        None => true,
        Some((s, l)) => score > s + SCORE_TIE || (score >= s - SCORE_TIE && labels < l.as_slice()),
    }
}

/// Best partition found for one threshold `k`.
pub fn optimal_partition_for_k(rho: &CoincidenceMatrix, k: f64) -> Partition {
    let n = rho.n();
    if n == 0 {
        return Partition {
            labels: Vec::new(),
            k_star: k,
            score: 0.0,
        };
    }
    let weight: Vec<f64> = rho.values.iter().map(|v| v - k).collect();
    let mut rng = RngStream::new(RESTART_SEED);
    let mut starts = vec![(0..n).collect::<Vec<_>>()];
    for _ in 0..RANDOM_RESTARTS {
        let groups = 1 + rng.below(n);
        starts.push((0..n).map(|_| rng.below(groups)).collect());
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for start in starts {
        let labels = Search::new(&weight, n, start).run();
        let score = partition_score(&labels, rho, k);
        if better(score, &labels, &best) {
            best = Some((score, labels));
        }
    }
    let (score, labels) = best.expect("at least one start");
    Partition {
        labels,
        k_star: k,
        score,
    }
}

/// Maximises the score jointly over partitions and the thresholds in
/// `k_grid`. Ties go to the smaller `K`, then to the lexicographically
/// smaller canonical labelling.
pub fn optimal_partition(rho: &CoincidenceMatrix, k_grid: &[f64]) -> Result<Partition> {
    if k_grid.is_empty() {
        return Err(Error::domain("threshold grid is empty"));
    }
    if let Some(k) = k_grid.iter().find(|k| !(0.0..=1.0).contains(*k)) {
        return Err(Error::domain(format!("threshold {k} outside [0, 1]")));
    }
    let mut grid = k_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut best: Option<Partition> = None;
    for k in grid {
        let p = optimal_partition_for_k(rho, k);
        let replace = match &best {
            None => true,
            Some(b) => p.score > b.score + SCORE_TIE,
        };
        if replace {
            best = Some(p);
        }
    }
    Ok(best.expect("grid is nonempty"))
}

/// Posterior mean and central 95% interval of one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ParamSummary {
    fn from_draws(mut draws: Vec<f64>) -> Self {
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        draws.sort_by(f64::total_cmp);
        ParamSummary {
            mean,
            lower: quantile_sorted(&draws, 0.025),
            upper: quantile_sorted(&draws, 0.975),
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub label: usize,
    pub size: usize,
    pub alpha: ParamSummary,
    pub beta: ParamSummary,
    pub lambda: ParamSummary,
    pub w: ParamSummary,
}

/// For every cluster of `partition`: at each retained sample, average the
/// members' per-observation atoms; summarise those averages across samples.
pub fn clusterwise_summaries(trace: &Trace, partition: &Partition) -> Result<Vec<ClusterSummary>> {
    if trace.samples.is_empty() {
        return Err(Error::domain("trace has no retained samples"));
    }
    if trace.n_obs() != partition.labels.len() {
        return Err(Error::domain(format!(
            "partition covers {} observations, trace {}",
            partition.labels.len(),
            trace.n_obs()
        )));
    }
    let mut out = Vec::new();
    for c in 0..partition.n_clusters() {
        let members = partition.members(c);
        if members.is_empty() {
            continue;
        }
        let mut draws: [Vec<f64>; 4] = Default::default();
        for s in &trace.samples {
            let mut acc = [0.0; 4];
            for &i in &members {
                for (a, v) in acc.iter_mut().zip(s.atom_of(i).as_array()) {
                    *a += v;
                }
            }
            for (d, a) in draws.iter_mut().zip(acc) {
                d.push(a / members.len() as f64);
            }
        }
        let [alpha, beta, lambda, w] = draws.map(ParamSummary::from_draws);
        out.push(ClusterSummary {
            label: c,
            size: members.len(),
            alpha,
            beta,
            lambda,
            w,
        });
    }
    Ok(out)
}
