use super::Hyperparams;
use crate::variates::{beta_unchecked, gamma_unchecked};
use crate::{Error, Result, RngStream};

/// One auxiliary-variable Gibbs refresh of the concentration `nu` given
/// `n_obs` observations in `n_clusters` clusters, under `nu ~ Gamma(tau1, tau2)`:
///
/// ```text
/// gamma | nu ~ Beta(nu + 1, N)
/// nu | gamma ~ pi Gamma(tau1 + N*, tau2 - ln gamma) + (1 - pi) Gamma(tau1 + N* - 1, tau2 - ln gamma)
/// pi / (1 - pi) = (tau1 + N* - 1) / (N (tau2 - ln gamma))
/// ```
pub fn nu_update(
    nu: f64,
    n_obs: usize,
    n_clusters: usize,
    h: &Hyperparams,
    rng: &mut RngStream,
) -> Result<f64> {
    if n_obs == 0 || n_clusters == 0 || n_clusters > n_obs {
        return Err(Error::domain(format!(
            "need 1 <= N* <= N, got N* = {n_clusters}, N = {n_obs}"
        )));
    }
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::domain(format!("nu must be positive, got {nu}")));
    }
    let n = n_obs as f64;
    let k = n_clusters as f64;
    let aux = beta_unchecked(rng, nu + 1.0, n);
    let rate = h.tau2 - aux.ln();
    let odds = (h.tau1 + k - 1.0) / (n * rate);
    let pi = odds / (1.0 + odds);
    let shape = if rng.unit() < pi {
        h.tau1 + k
    } else {
        h.tau1 + k - 1.0
    };
    Ok(gamma_unchecked(rng, shape, rate))
}

/// `E[N* | nu] = nu ln((nu + N) / nu)`.
pub fn prior_expected_clusters(nu: f64, n: usize) -> Result<f64> {
    if !(nu.is_finite() && nu > 0.0) || n == 0 {
        return Err(Error::domain(format!("need nu > 0 and N >= 1, got nu = {nu}, N = {n}")));
    }
    Ok(nu * (n as f64 / nu).ln_1p())
}
