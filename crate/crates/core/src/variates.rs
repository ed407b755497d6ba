//! Gamma, Beta, Binomial and Normal variates on an [`RngStream`].
//!
//! Gamma uses the Marsaglia-Tsang squeeze with the `U^(1/shape)` boost for
//! `shape < 1`. Beta is a ratio of two Gammas.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result, RngStream};

#[inline]
pub fn standard_normal(rng: &mut RngStream) -> f64 {
    rng.sample(StandardNormal)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Gamma with shape-rate parameterisation (mean `shape / rate`).
pub fn gamma_sample(rng: &mut RngStream, shape: f64, rate: f64) -> Result<f64> {
    positive("gamma shape", shape)?;
    positive("gamma rate", rate)?;
    Ok(gamma_unchecked(rng, shape, rate))
}

pub(crate) fn gamma_unchecked(rng: &mut RngStream, shape: f64, rate: f64) -> f64 {
    if shape < 1.0 {
        // G(a) = G(a + 1) U^(1/a), done in log space so tiny shapes don't
        // collapse to zero before the final exponentiation.
        let ln_g = marsaglia_tsang(rng, shape + 1.0).ln() + rng.open01().ln() / shape;
        return (ln_g.exp() / rate).max(f64::MIN_POSITIVE);
    }
    marsaglia_tsang(rng, shape) / rate
}

fn marsaglia_tsang(rng: &mut RngStream, shape: f64) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let (x, v) = loop {
            let x = standard_normal(rng);
            let v = 1.0 + c * x;
            if v > 0.0 {
                break (x, v * v * v);
            }
        };
        let u = rng.open01();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Beta(a, b) as `X / (X + Y)` with `X ~ Gamma(a)`, `Y ~ Gamma(b)`.
pub fn beta_sample(rng: &mut RngStream, a: f64, b: f64) -> Result<f64> {
    positive("beta a", a)?;
    positive("beta b", b)?;
    Ok(beta_unchecked(rng, a, b))
}

pub(crate) fn beta_unchecked(rng: &mut RngStream, a: f64, b: f64) -> f64 {
    let x = gamma_unchecked(rng, a, 1.0);
    let y = gamma_unchecked(rng, b, 1.0);
    x / (x + y)
}

/// Binomial(trials, prob).
pub fn binomial_sample(rng: &mut RngStream, trials: u64, prob: f64) -> Result<u64> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::domain(format!("binomial probability must be in [0, 1], got {prob}")));
    }
    Ok(binomial_unchecked(rng, trials, prob))
}

pub(crate) fn binomial_unchecked(rng: &mut RngStream, trials: u64, prob: f64) -> u64 {
    if trials == 0 || prob == 0.0 {
        return 0;
    }
    if prob == 1.0 {
        return trials;
    }
    if prob > 0.5 {
        return trials - binomial_unchecked(rng, trials, 1.0 - prob);
    }
    // Inversion by sequential search needs (1-p)^n representable; split large
    // problems into independent halves otherwise.
    let ln_q0 = trials as f64 * (-prob).ln_1p();
    if ln_q0 < -600.0 {
        let half = trials / 2;
        return binomial_unchecked(rng, half, prob) + binomial_unchecked(rng, trials - half, prob);
    }
    let ratio = prob / (1.0 - prob);
    let mut pmf = ln_q0.exp();
    let mut cdf = pmf;
    let u = rng.unit();
    let mut k = 0;
    while u >= cdf && k < trials {
        pmf *= ratio * (trials - k) as f64 / (k + 1) as f64;
        k += 1;
        cdf += pmf;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn gamma_first_two_moments() {
        let mut rng = RngStream::new(11);
        for &(shape, rate) in &[(1.0, 2.0), (0.3, 1.0), (7.0, 0.7), (0.5, 1.0), (40.0, 3.0)] {
            let xs: Vec<f64> = (0..100_000)
                .map(|_| gamma_sample(&mut rng, shape, rate).unwrap())
                .collect();
            let (m, v) = mean_var(&xs);
            let true_var = shape / (rate * rate);
            let se = (true_var / xs.len() as f64).sqrt();
            assert!((m - shape / rate).abs() < 3.0 * se, "shape {shape} mean {m}");
            assert!((v / true_var - 1.0).abs() < 0.05, "shape {shape} var {v}");
            assert!(xs.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn beta_moments() {
        let mut rng = RngStream::new(12);
        let (a, b) = (2.0, 3.0);
        let xs: Vec<f64> = (0..100_000).map(|_| beta_sample(&mut rng, a, b).unwrap()).collect();
        let (m, v) = mean_var(&xs);
        let tv = a * b / ((a + b).powi(2) * (a + b + 1.0));
        assert!((m - 0.4).abs() < 3.0 * (tv / 1e5).sqrt());
        assert!((v / tv - 1.0).abs() < 0.05);
    }

    #[test]
    fn binomial_moments() {
        let mut rng = RngStream::new(13);
        for &(n, p) in &[(19u64, 0.65), (9, 0.016), (5000, 0.3), (3, 0.5)] {
            let xs: Vec<f64> = (0..100_000)
                .map(|_| binomial_sample(&mut rng, n, p).unwrap() as f64)
                .collect();
            let (m, v) = mean_var(&xs);
            let tv = n as f64 * p * (1.0 - p);
            assert!((m - n as f64 * p).abs() < 3.0 * (tv / 1e5).sqrt(), "n {n} p {p} mean {m}");
            assert!((v / tv - 1.0).abs() < 0.05, "n {n} p {p} var {v}");
        }
    }

    #[test]
    fn binomial_edges() {
        let mut rng = RngStream::new(1);
        assert_eq!(binomial_sample(&mut rng, 0, 0.3).unwrap(), 0);
        assert_eq!(binomial_sample(&mut rng, 10, 0.0).unwrap(), 0);
        assert_eq!(binomial_sample(&mut rng, 10, 1.0).unwrap(), 10);
        assert!(binomial_sample(&mut rng, 10, 1.5).is_err());
    }

    #[test]
    fn parameter_validation() {
        let mut rng = RngStream::new(1);
        assert!(gamma_sample(&mut rng, 0.0, 1.0).is_err());
        assert!(gamma_sample(&mut rng, 1.0, -1.0).is_err());
        assert!(beta_sample(&mut rng, 1.0, f64::NAN).is_err());
    }
}
