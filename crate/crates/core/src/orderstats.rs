//! Variable-length order-statistics sequences.
//!
//! A [`Sequence`] holds the top `l` order statistics of an `n`-sample,
//! largest first. Its likelihood under an [`Atom`] factorises into a length
//! term, `l ~ 1 + Binomial(n - 1, w)`, and the joint density of the top `l`
//! order statistics given `l`:
//!
//! ```text
//! n!/(n-l)! * F(x_(n-l+1))^(n-l) * prod_j f(x_(j))
//! ```

use serde::{Deserialize, Serialize};

use crate::ew::EWParams;
use crate::special::{ln_choose, ln_falling_factorial, ln_one_minus_exp, ln_one_minus_exp_neg};
use crate::variates::binomial_unchecked;
use crate::{Error, Result, RngStream};

/// The top `l` of `n` order statistics, strictly decreasing and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    n: usize,
    values: Vec<f64>,
    sum_ln_values: f64,
    ln_falling: f64,
    ln_length_coeff: f64,
}

impl Sequence {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        let l = values.len();
        if l == 0 || l > n {
            return Err(Error::domain(format!(
                "sequence length must be in [1, n = {n}], got {l}"
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::domain(format!("sequence values must be positive, got {v}")));
        }
        if let Some(w) = values.windows(2).find(|w| w[0] <= w[1]) {
            return Err(Error::domain(format!(
                "sequence values must be strictly decreasing, got {} then {}",
                w[0], w[1]
            )));
        }
        Ok(Sequence {
            n,
            sum_ln_values: values.iter().map(|v| v.ln()).sum(),
            ln_falling: ln_falling_factorial(n as u64, l as u64),
            ln_length_coeff: ln_choose(n as u64 - 1, l as u64 - 1),
            values,
        })
    }

    /// Potential number of entries.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Observed (uncensored) length.
    pub fn l(&self) -> usize {
        self.values.len()
    }

    /// Observed values, `values()[0]` being the maximum.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sum of the observed entries.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// The full width-`n` vector with censored entries as zeros.
    pub fn padded(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.resize(self.n, 0.0);
        v
    }
}

/// A cluster parameter: the kernel plus the length-model probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub ew: EWParams,
    pub w: f64,
}

impl Atom {
    pub fn new(alpha: f64, beta: f64, lambda: f64, w: f64) -> Result<Self> {
        let atom = Atom {
            ew: EWParams {
                alpha,
                beta,
                lambda,
            },
            w,
        };
        atom.validate()?;
        Ok(atom)
    }

    pub fn validate(&self) -> Result<()> {
        self.ew.validate()?;
        if !(self.w > 0.0 && self.w < 1.0) {
            return Err(Error::domain(format!("w must be in (0, 1), got {}", self.w)));
        }
        Ok(())
    }

    /// `[alpha, beta, lambda, w]`.
    pub fn as_array(&self) -> [f64; 4] {
        [self.ew.alpha, self.ew.beta, self.ew.lambda, self.w]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

fn ln_length_pmf_raw(ln_coeff: f64, l: usize, n: usize, w: f64) -> f64 {
    let succ = (l - 1) as f64;
    let fail = (n - l) as f64;
    let a = if succ == 0.0 { 0.0 } else { succ * w.ln() };
    let b = if fail == 0.0 { 0.0 } else { fail * (-w).ln_1p() };
    ln_coeff + a + b
}

/// `ln p(l | w)` for `l - 1 ~ Binomial(n - 1, w)`.
pub fn length_log_pmf(l: usize, n: usize, w: f64) -> Result<f64> {
    if l == 0 || l > n {
        return Err(Error::domain(format!("length must be in [1, {n}], got {l}")));
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::domain(format!("w must be in [0, 1], got {w}")));
    }
    Ok(ln_length_pmf_raw(ln_choose(n as u64 - 1, l as u64 - 1), l, n, w))
}

/// Sum of `ln f(x)` over the observed values.
fn sum_ln_pdf(seq: &Sequence, p: &EWParams) -> f64 {
    let (a, b) = (p.alpha, p.beta);
    let ln_lambda = p.lambda.ln();
    let per_value = a.ln() + b.ln() + b * ln_lambda;
    let mut acc = 0.0;
    for &x in &seq.values {
        let ln_t = b * (ln_lambda + x.ln());
        let t = ln_t.exp();
        if a != 1.0 {
            acc += (a - 1.0) * ln_one_minus_exp_neg(t, ln_t);
        }
        acc -= t;
    }
    seq.l() as f64 * per_value + (b - 1.0) * seq.sum_ln_values + acc
}

/// Log joint density of the top `l` order statistics given `l`.
pub fn joint_log_density(seq: &Sequence, p: &EWParams) -> f64 {
    let censored = seq.n - seq.l();
    let mut ll = seq.ln_falling + sum_ln_pdf(seq, p);
    if censored > 0 {
        let smallest = seq.values[seq.l() - 1];
        ll += censored as f64 * p.ln_cdf_unchecked(smallest);
    }
    ll
}

/// Log density of `x_(n-j)` given `x_(n-j+1) = x_upper`, supported on
/// `(0, x_upper)`: the `EW((n - j) alpha, beta, lambda)` density truncated
/// to that interval.
pub fn conditional_log_density(
    x_lower: f64,
    x_upper: f64,
    j: usize,
    n: usize,
    p: &EWParams,
) -> Result<f64> {
    p.validate()?;
    if !(x_lower > 0.0 && x_lower < x_upper) {
        return Err(Error::domain(format!(
            "need 0 < x_lower < x_upper, got {x_lower} and {x_upper}"
        )));
    }
    if j == 0 || j >= n {
        return Err(Error::domain(format!("need 1 <= j <= n - 1, got j = {j}, n = {n}")));
    }
    Ok(conditional_raw(x_lower, x_upper, j, n, p))
}

fn conditional_raw(x_lower: f64, x_upper: f64, j: usize, n: usize, p: &EWParams) -> f64 {
    let m = (n - j) as f64;
    let mut v = m.ln() + p.ln_pdf_unchecked(x_lower) - m * p.ln_cdf_unchecked(x_upper);
    if n - j > 1 {
        v += (m - 1.0) * p.ln_cdf_unchecked(x_lower);
    }
    v
}

/// The joint density built as the maximum's marginal times the chain of
/// conditionals. Equal to [`joint_log_density`] by telescoping.
pub fn hierarchical_log_density(seq: &Sequence, p: &EWParams) -> f64 {
    let n = seq.n;
    let top = seq.values[0];
    let mut v = (n as f64).ln() + p.ln_pdf_unchecked(top);
    if n > 1 {
        v += (n - 1) as f64 * p.ln_cdf_unchecked(top);
    }
    for j in 1..seq.l() {
        v += conditional_raw(seq.values[j], seq.values[j - 1], j, n, p);
    }
    v
}

/// `ln f(x | theta) = ln p(l | w) + joint_log_density`, with `w` allowed to
/// sit on the closed interval (degenerate length models give `-inf`).
pub fn log_likelihood(seq: &Sequence, ew: &EWParams, w: f64) -> f64 {
    ln_length_pmf_raw(seq.ln_length_coeff, seq.l(), seq.n, w) + joint_log_density(seq, ew)
}

pub fn sequence_log_likelihood(seq: &Sequence, atom: &Atom) -> f64 {
    log_likelihood(seq, &atom.ew, atom.w)
}

/// Draws `l = 1 + Binomial(n - 1, w)` and `n` iid kernel values, returning
/// the top `l` in decreasing order. No tie check.
pub fn sample_top_values(rng: &mut RngStream, ew: &EWParams, w: f64, n: usize) -> Vec<f64> {
    let l = 1 + binomial_unchecked(rng, n as u64 - 1, w) as usize;
    let mut xs: Vec<f64> = (0..n).map(|_| ew.sample(rng)).collect();
    xs.sort_unstable_by(|a, b| b.total_cmp(a));
    xs.truncate(l);
    xs
}

/// One simulated observation from the generative model.
///
/// Draws that produce floating-point ties (possible only for extremely
/// concentrated kernels) are redrawn.
pub fn sample_sequence(rng: &mut RngStream, atom: &Atom, n: usize) -> Result<Sequence> {
    atom.validate()?;
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    for _ in 0..1000 {
        if let Ok(seq) = Sequence::new(n, sample_top_values(rng, &atom.ew, atom.w, n)) {
            return Ok(seq);
        }
    }
    Err(Error::domain(format!(
        "could not draw a tie-free sequence from {atom:?}; kernel too concentrated"
    )))
}

/// Log density of the `j`-th smallest of `n` iid kernel draws.
pub fn order_stat_marginal_log_pdf(x: f64, j: usize, n: usize, p: &EWParams) -> Result<f64> {
    if j == 0 || j > n {
        return Err(Error::domain(format!("need 1 <= j <= n, got j = {j}, n = {n}")));
    }
    let ln_f = p.ln_pdf(x)?;
    let ln_cdf = p.ln_cdf_unchecked(x);
    let mut v = (n as f64).ln() + ln_f + ln_choose(n as u64 - 1, j as u64 - 1);
    if j > 1 {
        v += (j - 1) as f64 * ln_cdf;
    }
    if j < n {
        v += (n - j) as f64 * ln_one_minus_exp(ln_cdf);
    }
    Ok(v)
}

pub fn order_stat_marginal_pdf(x: f64, j: usize, n: usize, p: &EWParams) -> Result<f64> {
    Ok(order_stat_marginal_log_pdf(x, j, n, p)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp1() -> EWParams {
        EWParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn sequence_validation() {
        assert!(Sequence::new(5, vec![0.8, 0.5, 0.2]).is_ok());
        assert!(Sequence::new(5, vec![0.5, 0.5]).is_err());
        assert!(Sequence::new(5, vec![0.2, 0.5]).is_err());
        assert!(Sequence::new(2, vec![3.0, 2.0, 1.0]).is_err());
        assert!(Sequence::new(2, vec![]).is_err());
        assert!(Sequence::new(2, vec![1.0, 0.0]).is_err());
        let s = Sequence::new(4, vec![2.0, 1.0]).unwrap();
        assert_eq!(s.padded(), vec![2.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn length_pmf_examples() {
        assert_eq!(length_log_pmf(1, 10, 0.0).unwrap(), 0.0);
        let v = length_log_pmf(5, 10, 0.5).unwrap();
        assert!((v - (126.0f64 / 512.0).ln()).abs() < 1e-12);
        assert_eq!(length_log_pmf(2, 10, 0.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(length_log_pmf(10, 10, 1.0).unwrap(), 0.0);
        assert!(length_log_pmf(0, 10, 0.5).is_err());
        assert!(length_log_pmf(11, 10, 0.5).is_err());
        assert!(length_log_pmf(3, 10, 1.1).is_err());
    }

    #[test]
    fn full_sample_of_exponentials() {
        let s = Sequence::new(3, vec![3.0, 2.0, 1.0]).unwrap();
        let v = joint_log_density(&s, &exp1());
        assert!((v - (6f64.ln() - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn single_value_is_density_of_maximum() {
        let p = EWParams::new(0.7, 1.3, 0.4).unwrap();
        let s = Sequence::new(6, vec![2.5]).unwrap();
        let expect = 6f64.ln() + p.ln_pdf(2.5).unwrap() + 5.0 * p.ln_cdf(2.5).unwrap();
        assert!((joint_log_density(&s, &p) - expect).abs() < 1e-12);
        assert!((hierarchical_log_density(&s, &p) - expect).abs() < 1e-12);
        let via_ew = p.maximum_of(6).ln_pdf(2.5).unwrap();
        assert!((expect - via_ew).abs() < 1e-12);
    }

    #[test]
    fn full_pair_hierarchical() {
        let p = EWParams::new(2.0, 0.9, 1.1).unwrap();
        let s = Sequence::new(2, vec![1.5, 0.4]).unwrap();
        let expect = 2f64.ln() + p.ln_pdf(1.5).unwrap() + p.ln_pdf(0.4).unwrap();
        assert!((hierarchical_log_density(&s, &p) - expect).abs() < 1e-12);
        assert!((joint_log_density(&s, &p) - expect).abs() < 1e-12);
    }

    #[test]
    fn conditional_reduces_to_truncated_exponential() {
        let v = conditional_log_density(0.3, 1.2, 2, 3, &exp1()).unwrap();
        let f = (-0.3f64).exp();
        let fu = 1.0 - (-1.2f64).exp();
        assert!((v - (f / fu).ln()).abs() < 1e-12);
        assert!(conditional_log_density(1.2, 0.3, 2, 3, &exp1()).is_err());
        assert!(conditional_log_density(0.1, 0.3, 3, 3, &exp1()).is_err());
    }

    #[test]
    fn likelihood_is_additive_and_respects_degenerate_w() {
        let atom = Atom::new(0.5, 1.5, 1.5, 0.3).unwrap();
        let s = Sequence::new(10, vec![1.0, 0.7, 0.2]).unwrap();
        let total = sequence_log_likelihood(&s, &atom);
        let parts = length_log_pmf(3, 10, 0.3).unwrap() + joint_log_density(&s, &atom.ew);
        assert_eq!(total, parts);
        let pair = Sequence::new(10, vec![1.0, 0.7]).unwrap();
        assert_eq!(log_likelihood(&pair, &atom.ew, 0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn order_stat_marginal_extremes() {
        let p = EWParams::new(0.5, 1.5, 1.5).unwrap();
        let (x, n) = (0.8, 10);
        let f = p.pdf(x).unwrap();
        let cdf = p.cdf(x).unwrap();
        let max = order_stat_marginal_pdf(x, n, n, &p).unwrap();
        assert!((max - n as f64 * f * cdf.powi(9)).abs() < 1e-12 * max);
        let min = order_stat_marginal_pdf(x, 1, n, &p).unwrap();
        assert!((min - n as f64 * f * (1.0 - cdf).powi(9)).abs() < 1e-10 * min);
        assert!(order_stat_marginal_pdf(x, 0, n, &p).is_err());
        assert!(order_stat_marginal_pdf(-1.0, 1, n, &p).is_err());
    }

    #[test]
    fn sampling_near_zero_w_gives_length_one() {
        let atom = Atom::new(0.5, 1.5, 1.5, 1e-12).unwrap();
        let mut rng = RngStream::new(3);
        for _ in 0..1000 {
            assert_eq!(sample_sequence(&mut rng, &atom, 20).unwrap().l(), 1);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let atom = Atom::new(2.5, 3.3, 0.35, 0.75).unwrap();
        let a = sample_sequence(&mut RngStream::new(5), &atom, 20).unwrap();
        let b = sample_sequence(&mut RngStream::new(5), &atom, 20).unwrap();
        assert_eq!(a, b);
    }
}
