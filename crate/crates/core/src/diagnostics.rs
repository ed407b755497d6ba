//! Convergence diagnostics for scalar MCMC series.

use std::fmt::Write as _;
use std::path::Path;

use crate::dpmm::Trace;
use crate::fsutil::write_atomic;
use crate::Result;

pub const MAX_LAG: usize = 50;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Lag-`k` autocovariance sums `sum_t (x_t - m)(x_{t+k} - m)` for `k <= max_lag`.
fn autocov_sums(xs: &[f64], max_lag: usize) -> Vec<f64> {
    let m = mean(xs);
    let c: Vec<f64> = xs.iter().map(|x| x - m).collect();
    (0..=max_lag.min(xs.len().saturating_sub(1)))
        .map(|k| c.iter().zip(&c[k..]).map(|(a, b)| a * b).sum())
        .collect()
}

/// `true` when the series has no variation, so autocorrelations are undefined.
pub fn is_degenerate(xs: &[f64]) -> bool {
    xs.len() < 2 || xs.iter().all(|&x| x == xs[0])
}

/// Autocorrelations at lags `1..=max_lag` with the lag-`k` covariance
/// averaged over its `N - k` products. `None` for degenerate series.
pub fn autocorrelation(xs: &[f64], max_lag: usize) -> Option<Vec<f64>> {
    if is_degenerate(xs) {
        return None;
    }
    let n = xs.len() as f64;
    let s = autocov_sums(xs, max_lag);
    let var = s[0] / n;
    Some(
        s.iter()
            .enumerate()
            .skip(1)
            .map(|(k, v)| v / (n - k as f64) / var)
            .collect(),
    )
}

/// Effective sample size by Geyer's initial positive sequence. Degenerate
/// series report their length.
pub fn effective_sample_size(xs: &[f64]) -> f64 {
    let n = xs.len();
    if is_degenerate(xs) {
        return n as f64;
    }
    let m = mean(xs);
    let c: Vec<f64> = xs.iter().map(|x| x - m).collect();
    let gamma = |k: usize| -> f64 { c.iter().zip(&c[k..]).map(|(a, b)| a * b).sum() };
    let g0 = gamma(0);
    let mut tau = -1.0;
    let mut k = 0;
    while k + 1 < n {
        let pair = (gamma(k) + gamma(k + 1)) / g0;
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        k += 2;
    }
    let floor = 1.0 / (n as f64).log10().max(1.0);
    n as f64 / tau.max(floor)
}

/// A named label-invariant series over retained iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

/// `nu`, `N*` and the observation-averaged atom coordinates per iteration.
pub fn scalar_series(trace: &Trace) -> Vec<Series> {
    let mut out: Vec<Series> = ["nu", "n_star", "mean_alpha", "mean_beta", "mean_lambda", "mean_w"]
        .iter()
        .map(|n| Series {
            name: n.to_string(),
            values: Vec::with_capacity(trace.samples.len()),
        })
        .collect();
    for s in &trace.samples {
        out[0].values.push(s.nu);
        out[1].values.push(s.n_star() as f64);
        let n = s.assignments.len() as f64;
        let mut acc = [0.0; 4];
        for i in 0..s.assignments.len() {
            for (a, v) in acc.iter_mut().zip(s.atom_of(i).as_array()) {
                *a += v;
            }
        }
        for (k, a) in acc.iter().enumerate() {
            out[2 + k].values.push(a / n);
        }
    }
    out
}

/// Writes `series.csv`, `atoms.csv`, `diagnostics.csv` and `acf.csv` under `dir`.
pub fn diagnose(trace: &Trace, dir: &Path) -> Result<()> {
    let series = scalar_series(trace);

    let mut s = String::from("iteration");
    for x in &series {
        let _ = write!(s, ",{}", x.name);
    }
    s.push('\n');
    for (t, sample) in trace.samples.iter().enumerate() {
        let _ = write!(s, "{}", sample.iteration);
        for x in &series {
            let _ = write!(s, ",{}", x.values[t]);
        }
        s.push('\n');
    }
    write_atomic(&dir.join("series.csv"), s.as_bytes())?;

    let mut s = String::from("iteration,cluster,size,alpha,beta,lambda,w,sqrt_alpha,sqrt_beta,sqrt_lambda\n");
    for sample in &trace.samples {
        for (k, (a, size)) in sample.atoms.iter().zip(sample.cluster_sizes()).enumerate() {
            let _ = writeln!(
                s,
                "{},{k},{size},{},{},{},{},{},{},{}",
                sample.iteration,
                a.ew.alpha,
                a.ew.beta,
                a.ew.lambda,
                a.w,
                a.ew.alpha.sqrt(),
                a.ew.beta.sqrt(),
                a.ew.lambda.sqrt()
            );
        }
    }
    write_atomic(&dir.join("atoms.csv"), s.as_bytes())?;

    let mut summary = String::from("series,length,mean,sd,ess,degenerate\n");
    let mut acf = String::from("series,lag,acf\n");
    for x in &series {
        let n = x.values.len();
        let m = mean(&x.values);
        let sd = if n > 1 {
            (x.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let degenerate = is_degenerate(&x.values);
        let _ = writeln!(
            summary,
            "{},{n},{m},{sd},{},{degenerate}",
            x.name,
            effective_sample_size(&x.values)
        );
        match autocorrelation(&x.values, MAX_LAG) {
            Some(r) => {
                for (k, v) in r.iter().enumerate() {
                    let _ = writeln!(acf, "{},{},{v}", x.name, k + 1);
                }
            }
            None => {
                let _ = writeln!(acf, "{},1,", x.name);
            }
        }
    }
    write_atomic(&dir.join("diagnostics.csv"), summary.as_bytes())?;
    write_atomic(&dir.join("acf.csv"), acf.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RngStream;

    #[test]
    fn constant_series_is_flagged() {
        let xs = vec![2.5; 40];
        assert!(autocorrelation(&xs, 5).is_none());
        assert_eq!(effective_sample_size(&xs), 40.0);
    }

    #[test]
    fn alternating_series_lag_one() {
        let xs: Vec<f64> = (0..1000).map(|t| if t % 2 == 0 { 1.0 } else { 3.0 }).collect();
        let r = autocorrelation(&xs, 3).unwrap();
        assert!((r[0] + 1.0).abs() < 1e-6);
        assert!((r[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn white_noise_ess_near_length() {
        let mut rng = RngStream::new(4);
        let mut total = 0.0;
        for _ in 0..100 {
            let xs: Vec<f64> = (0..2000).map(|_| crate::variates::standard_normal(&mut rng)).collect();
            let ess = effective_sample_size(&xs);
            assert!((ess / 2000.0 - 1.0).abs() < 0.3, "{ess}");
            total += ess;
        }
        let mean = total / 100.0 / 2000.0;
        assert!((mean - 1.0).abs() < 0.1, "{mean}");
    }

    #[test]
    fn ar1_ess_matches_theory() {
        let phi: f64 = 0.8;
        let mut rng = RngStream::new(8);
        let mut x = 0.0;
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                x = phi * x + crate::variates::standard_normal(&mut rng);
                x
            })
            .collect();
        let expected = 200_000.0 * (1.0 - phi) / (1.0 + phi);
        let ess = effective_sample_size(&xs);
        assert!((ess / expected - 1.0).abs() < 0.15, "{ess} vs {expected}");
    }
}
