//! Small special-function helpers shared by the likelihood code.

pub use statrs::function::gamma::ln_gamma;

/// `ln(1 - e^{-t})` for `t > 0`, given both `t` and `ln t`.
///
/// Passing `ln t` keeps the result finite when `t` itself underflows, which
/// happens for `(lambda x)^beta` with small `x` and large `beta`.
#[inline]
pub fn ln_one_minus_exp_neg(t: f64, ln_t: f64) -> f64 {
    if ln_t < -30.0 {
        // 1 - e^{-t} = t (1 - t/2 + ...)
        ln_t - 0.5 * t
    } else if t < std::f64::consts::LN_2 {
        (-(-t).exp_m1()).ln()
    } else {
        (-(-t).exp()).ln_1p()
    }
}

/// `ln(1 - e^{x})` for `x <= 0`.
#[inline]
pub fn ln_one_minus_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `ln C(n, k)`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `ln(n! / (n - l)!)`.
pub fn ln_falling_factorial(n: u64, l: u64) -> f64 {
    debug_assert!(l <= n);
    ((n - l + 1)..=n).map(|v| (v as f64).ln()).sum()
}

/// Numerically stable `ln(sum(exp(xs)))`; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if m == f64::INFINITY {
        return f64::INFINITY;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Empirical quantile with linear interpolation between order statistics
/// (the default "type 7" rule). `sorted` must be ascending and nonempty.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
