//! The Exponentiated Weibull distribution.
//!
//! `F(x) = (1 - exp(-(lambda x)^beta))^alpha` for `x > 0`. Densities are
//! evaluated in log space through `ln(1 - e^{-t})` with `t = (lambda x)^beta`,
//! which keeps censoring factors like `F^(n-l)` finite long after the raw
//! form underflows.

use serde::{Deserialize, Serialize};

use crate::special::{ln_one_minus_exp, ln_one_minus_exp_neg};
use crate::{Error, Result, RngStream};

/// Parameters `(alpha, beta, lambda)` of one kernel. `lambda` is a rate
/// (units of `1/x`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EWParams {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
}

/// Location of the density's mode, following the usual regime table for the
/// family. Interior values use the closed-form approximation
/// `(1/lambda) [2(ab - 1) / (b(a + 1))]^(1/b)`, which is not exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// `alpha * beta > 1`: density vanishes at 0 and peaks near this value.
    Interior(f64),
    /// `alpha * beta = 1` with `alpha <= 1`: density is finite at 0 and
    /// monotone decreasing.
    AtZero,
    /// `alpha * beta = 1` with `alpha > 1`. Not covered by the regime table;
    /// the formula value is reported as-is.
    Boundary(f64),
    /// `alpha * beta < 1`: density diverges at 0, no mode.
    Unbounded,
}

impl Mode {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Mode::Interior(x) | Mode::Boundary(x) => Some(x),
            Mode::AtZero => Some(0.0),
            Mode::Unbounded => None,
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

impl EWParams {
    pub fn new(alpha: f64, beta: f64, lambda: f64) -> Result<Self> {
        let p = EWParams {
            alpha,
            beta,
            lambda,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("alpha", self.alpha)?;
        check_positive("beta", self.beta)?;
        check_positive("lambda", self.lambda)
    }

    /// Distribution of the maximum of `k` iid draws: `EW(k alpha, beta, lambda)`.
    pub fn maximum_of(&self, k: usize) -> EWParams {
        EWParams {
            alpha: self.alpha * k as f64,
            ..*self
        }
    }

    fn check_x(&self, x: f64) -> Result<()> {
        self.validate()?;
        if x.is_nan() || x <= 0.0 {
            return Err(Error::domain(format!("x must be positive, got {x}")));
        }
        Ok(())
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.ln_pdf(x)?.exp())
    }

    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(self.ln_pdf_unchecked(x))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.ln_cdf(x)?.exp())
    }

    pub fn ln_cdf(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(self.ln_cdf_unchecked(x))
    }

    /// `ln(1 - F(x))`.
    pub fn ln_sf(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(ln_one_minus_exp(self.ln_cdf_unchecked(x)))
    }

    /// `(t, ln t)` with `t = (lambda x)^beta`.
    #[inline]
    fn t_of(&self, ln_x: f64) -> (f64, f64) {
        let ln_t = self.beta * (self.lambda.ln() + ln_x);
        (ln_t.exp(), ln_t)
    }

    /// Log-density without argument checks. `x > 0` and valid parameters
    /// are the caller's responsibility.
    #[inline]
    pub fn ln_pdf_unchecked(&self, x: f64) -> f64 {
        let ln_x = x.ln();
        let (t, ln_t) = self.t_of(ln_x);
        let tail = if self.alpha == 1.0 {
            0.0
        } else {
            (self.alpha - 1.0) * ln_one_minus_exp_neg(t, ln_t)
        };
        self.alpha.ln() + self.beta.ln() + self.beta * self.lambda.ln() + (self.beta - 1.0) * ln_x
            + tail
            - t
    }

    #[inline]
    pub fn ln_cdf_unchecked(&self, x: f64) -> f64 {
        let (t, ln_t) = self.t_of(x.ln());
        self.alpha * ln_one_minus_exp_neg(t, ln_t)
    }

    /// Closed-form inverse of the CDF, for `0 < u < 1`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        self.validate()?;
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("quantile level must be in (0, 1), got {u}")));
        }
        Ok(self.quantile_unchecked(u))
    }

    #[inline]
    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        // y = -ln(1 - u^(1/alpha)), x = y^(1/beta) / lambda
        let y = -ln_one_minus_exp(u.ln() / self.alpha);
        (y.ln() / self.beta).exp() / self.lambda
    }

    /// One draw by inverse transform.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        self.quantile_unchecked(rng.open01())
    }

    pub fn mode(&self) -> Mode {
        let ab = self.alpha * self.beta;
        let on_boundary = (ab - 1.0).abs() <= 1e-12;
        let formula = || {
            let base = 2.0 * (ab - 1.0) / (self.beta * (self.alpha + 1.0));
            base.max(0.0).powf(1.0 / self.beta) / self.lambda
        };
        if on_boundary {
            if self.alpha > 1.0 {
                Mode::Boundary(formula())
            } else {
                Mode::AtZero
            }
        } else if ab > 1.0 {
            Mode::Interior(formula())
        } else {
            Mode::Unbounded
        }
    }
}
