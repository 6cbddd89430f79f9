use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::{beta, gamma};
use crate::scalar::Real;
use crate::trace::GammaPrior;

/// Weight `d_eta` of the `Gamma(a0 + L, .)` component in the conditional of
/// the concentration given the auxiliary `eta`, where `n` is the number of
/// draws from the process.
pub fn alpha0_mixture_weight(prior: &GammaPrior, clusters: usize, n: usize, eta: f64) -> f64 {
    let odds = (prior.a + clusters as f64 - 1.0) / (n as f64 * (prior.b - eta.ln()));
    odds / (1.0 + odds)
}

/// One auxiliary-variable update of a DP concentration parameter given `L`
/// occupied clusters among `n` draws.
pub(crate) fn sample_concentration<T: Real, R: Rng + ?Sized>(
    clusters: usize,
    n: usize,
    prior: &GammaPrior,
    current: T,
    rng: &mut R,
) -> Result<T> {
    if clusters == 0 || clusters > n {
        return Err(Error::Domain(format!("need 1 <= L <= n, got L = {clusters}, n = {n}")));
    }
    let eta: f64 = beta(current.as_f64() + 1.0, n as f64, rng)?;
    let d = alpha0_mixture_weight(prior, clusters, n, eta);
    let rate = prior.b - eta.ln();
    let shape = if rng.random::<f64>() < d { prior.a + clusters as f64 } else { prior.a + clusters as f64 - 1.0 };
    let draw: f64 = gamma(shape, rate, rng)?;
    // Guard against underflow to zero for tiny shapes.
    Ok(T::of(draw.max(f64::MIN_POSITIVE)))
}

/// Concentration update for the DP mixture.
pub fn sample_alpha0_dpm<T: Real, R: Rng + ?Sized>(
    clusters: usize,
    n: usize,
    prior: &GammaPrior,
    current: T,
    rng: &mut R,
) -> Result<T> {
    sample_concentration(clusters, n, prior, current, rng)
}

/// Prior mean of the number of occupied clusters among `n` draws from a DP.
pub fn dp_prior_cluster_count_mean(alpha0: f64, n: usize) -> Result<f64> {
    if !(alpha0 > 0.0) || n == 0 {
        return Err(Error::Domain(format!("need alpha0 > 0 and n >= 1, got {alpha0}, {n}")));
    }
    Ok((0..n).map(|i| alpha0 / (alpha0 + i as f64)).sum())
}
