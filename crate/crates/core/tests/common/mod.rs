//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code, clippy::excessive_precision, clippy::needless_range_loop)]

use ewmix::{EWParams, RngStream};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let pair = f(c - h * XGK[k]) + f(c + h * XGK[k]);
        kron += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (v, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return v;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss-Kronrod (7-15) quadrature on `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    adapt(&f, a, b, tol, 40)
}

/// [`integrate`] with a tolerance relative to a coarse first estimate.
pub fn integrate_rel<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel: f64) -> f64 {
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    let coarse: f64 = (0..pieces)
        .map(|k| gk15(&f, a + k as f64 * h, a + (k + 1) as f64 * h).0)
        .sum();
    integrate(f, a, b, rel * coarse.abs())
}

/// Log-scale bounds `[s_lo, s_hi]` outside which an EW law has less than
/// about `1e-12` mass, from the closed-form tail behaviour
/// `F(x) ~ (lambda x)^(alpha beta)` near zero and
/// `1 - F(x) <= alpha exp(-(lambda x)^beta)` far out.
pub fn ew_log_support(p: &EWParams) -> (f64, f64) {
    let lo = (-14.0 * 10f64.ln() / (p.alpha * p.beta) - p.lambda.ln()).max(-740.0);
    let hi = (45.0 + p.alpha.ln().max(0.0)).ln() / p.beta - p.lambda.ln();
    (lo, hi)
}

/// `int_0^inf g(x) dx` via `x = e^s` on the log-support of `p`, split at a
/// ladder of quantiles so that narrow peaks are never skipped.
pub fn integrate_positive<G: Fn(f64) -> f64>(g: G, p: &EWParams, tol: f64) -> f64 {
    let (lo, hi) = ew_log_support(p);
    let levels = [
        1e-14, 1e-10, 1e-6, 1e-3, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95,
        0.99, 0.999, 1.0 - 1e-6, 1.0 - 1e-10,
    ];
    let mut cuts = vec![lo];
    cuts.extend(
        levels
            .iter()
            .map(|&u| p.quantile(u).unwrap().ln())
            .filter(|s| s.is_finite() && *s > lo && *s < hi),
    );
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let pieces = cuts.len() - 1;
    cuts.windows(2)
        .map(|w| {
            integrate(
                |s| {
                    let x = s.exp();
                    g(x) * x
                },
                w[0],
                w[1],
                tol / pieces as f64,
            )
        })
        .sum()
}

/// Asymptotic Kolmogorov p-value with the Stephens small-sample correction.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lam = (sn + 0.12 + 0.11 / sn) * d;
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = 2.0 * (-1f64).powi(j - 1) * (-2.0 * (j * j) as f64 * lam * lam).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// One-sample KS statistic of `xs` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(xs: &mut [f64], cdf: F) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

pub fn chi_square_pvalue(stat: f64, df: usize) -> f64 {
    1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat)
}

/// Pearson statistic after pooling adjacent cells until every expected
/// count is at least 5. Returns `(statistic, df)`.
pub fn pooled_chi_square(observed: &[f64], expected: &[f64]) -> (f64, usize) {
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (a, b) in observed.iter().zip(expected) {
        o += a;
        e += b;
        if e >= 5.0 {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    let stat = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    (stat, cells.len().saturating_sub(1))
}

/// Total-variation distance between two probability vectors.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Histogram of `xs` on equal-width bins over `[lo, hi]`, as proportions of
/// all draws (mass outside the range is dropped).
pub fn histogram(xs: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    let width = (hi - lo) / bins as f64;
    for &x in xs {
        if x >= lo && x < hi {
            h[((x - lo) / width) as usize] += 1.0;
        }
    }
    let n = xs.len() as f64;
    h.iter().map(|c| c / n).collect()
}

/// Bin probabilities of an unnormalised log-density on the same bins,
/// integrated by quadrature and normalised over `[lo, hi]`.
pub fn grid_probabilities<F: Fn(f64) -> f64>(ln_density: F, lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let width = (hi - lo) / bins as f64;
    // shift by the maximum on a fine grid to avoid overflow
    let shift = (0..=4000)
        .map(|k| ln_density(lo + (hi - lo) * k as f64 / 4000.0))
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let mass: Vec<f64> = (0..bins)
        .map(|b| {
            let a = lo + b as f64 * width;
            integrate(|x| (ln_density(x) - shift).exp(), a, a + width, 1e-10)
        })
        .collect();
    let total: f64 = mass.iter().sum();
    mass.iter().map(|m| m / total).collect()
}

fn choose2(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index between two labellings.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0.0; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1.0;
    }
    let sum_cells: f64 = table.iter().flatten().map(|&c| choose2(c)).sum();
    let sum_a: f64 = table.iter().map(|r| choose2(r.iter().sum())).sum();
    let sum_b: f64 = (0..kb).map(|j| choose2(table.iter().map(|r| r[j]).sum())).sum();
    let total = choose2(a.len() as f64);
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return 1.0;
    }
    (sum_cells - expected) / (max - expected)
}

/// Maximum of `sum_{i<j, same} (rho_ij - k)` over every set partition,
/// enumerated as restricted growth strings.
pub fn exhaustive_best_score(rho: &[Vec<f64>], k: f64) -> f64 {
    let n = rho.len();
    if n == 0 {
        return 0.0;
    }
    let mut labels = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    fn rec(i: usize, max_label: usize, labels: &mut Vec<usize>, rho: &[Vec<f64>], k: f64, best: &mut f64) {
        let n = labels.len();
        if i == n {
            let mut s = 0.0;
            for a in 0..n {
                for b in (a + 1)..n {
                    if labels[a] == labels[b] {
                        s += rho[a][b] - k;
                    }
                }
            }
            if s > *best {
                *best = s;
            }
            return;
        }
        for c in 0..=max_label + 1 {
            labels[i] = c;
            rec(i + 1, max_label.max(c), labels, rho, k, best);
        }
    }
    labels[0] = 0;
    rec(1, 0, &mut labels, rho, k, &mut best);
    best
}

/// A valid co-membership matrix: average co-clustering over `draws` random
/// partitions of `n` items.
pub fn random_coincidence(rng: &mut RngStream, n: usize, draws: usize) -> Vec<Vec<f64>> {
    let mut rho = vec![vec![0.0; n]; n];
    let groups = 1 + rng.below(n);
    for _ in 0..draws {
        let labels: Vec<usize> = (0..n).map(|_| rng.below(groups)).collect();
        for i in 0..n {
            for j in 0..n {
                if labels[i] == labels[j] {
                    rho[i][j] += 1.0 / draws as f64;
                }
            }
        }
    }
    for (i, row) in rho.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    rho
}

/// Symmetric matrix with independent uniform off-diagonal entries.
pub fn random_uniform_matrix(rng: &mut RngStream, n: usize) -> Vec<Vec<f64>> {
    let mut rho = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in 0..i {
            let v = rng.unit();
            rho[i][j] = v;
            rho[j][i] = v;
        }
    }
    rho
}

pub fn log_uniform(rng: &mut RngStream, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.unit() * (hi.ln() - lo.ln())).exp()
}

/// Monte-Carlo standard error of the mean of a correlated series by
/// non-overlapping batch means.
pub fn batch_means_se(xs: &[f64], batches: usize) -> f64 {
    let size = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

/// `E[N*]` of a Chinese restaurant process with concentration `nu` after
/// `n` customers: `sum_{i<n} nu / (nu + i)`.
pub fn crp_expected_clusters(nu: f64, n: usize) -> f64 {
    (0..n).map(|i| nu / (nu + i as f64)).sum()
}
