use nalgebra::{DMatrix, DVector};

use super::{log_norm_factorized, ClusterStats, PriorSpec};
use crate::error::{Error, Result};
use crate::graph::{CliqueSequence, DecomposableGraph};
use crate::linalg;
use crate::scalar::Real;

/// Conjugate update of the prior by a cluster's data.
#[derive(Clone, Debug, PartialEq)]
pub struct Posterior<T: Real = f64> {
    /// `delta0 + n`.
    pub delta: T,
    /// `D0 + U + A`.
    pub scale: DMatrix<T>,
    /// Posterior mean `mu_bar = (n xbar + n0 mu0) / (n + n0)`.
    pub mean: DVector<T>,
    /// `n + n0`.
    pub kappa: T,
    pub n: usize,
}

/// Posterior G-Wishart parameters and mean given cluster statistics.
///
/// `D0 + U + A` simplifies to `D0 + sum x x^T + n0 mu0 mu0^T - (n + n0)
/// mu_bar mu_bar^T`, which needs only the raw sums.
pub fn posterior_params<T: Real>(stats: &ClusterStats<T>, prior: &PriorSpec<T>) -> Posterior<T> {
    let gw = prior.gwishart();
    let mut post =
        Posterior { delta: gw.delta(), scale: gw.scale().clone(), mean: prior.mu0().clone(), kappa: prior.n0(), n: 0 };
    posterior_params_into(stats, prior, &mut post);
    post
}

/// [`posterior_params`] written into existing buffers.
pub(crate) fn posterior_params_into<T: Real>(stats: &ClusterStats<T>, prior: &PriorSpec<T>, post: &mut Posterior<T>) {
    let gw = prior.gwishart();
    let n = stats.count();
    post.n = n;
    post.delta = gw.delta() + T::of_usize(n);
    post.kappa = T::of_usize(n) + prior.n0();
    post.scale.copy_from(gw.scale());
    if n == 0 {
        post.mean.copy_from(prior.mu0());
        return;
    }
    post.mean.copy_from(stats.sum());
    post.mean.axpy(prior.n0(), prior.mu0(), T::one());
    post.mean /= post.kappa;
    post.scale += stats.outer();
    post.scale.ger(prior.n0(), prior.mu0(), prior.mu0(), T::one());
    post.scale.ger(-post.kappa, &post.mean, &post.mean, T::one());
    linalg::symmetrize(&mut post.scale);
}

fn check_dims<T: Real>(stats: &ClusterStats<T>, g: &DecomposableGraph, prior: &PriorSpec<T>) -> Result<()> {
    if stats.dim() != prior.dim() || g.order() != prior.dim() {
        return Err(Error::Input(format!(
            "dimension mismatch: data {}, graph {}, prior {}",
            stats.dim(),
            g.order(),
            prior.dim()
        )));
    }
    Ok(())
}

/// `log p(x_1..x_n | G)` with `(mu, K)` integrated out; zero for no data.
pub fn log_marginal_likelihood<T: Real>(
    stats: &ClusterStats<T>,
    g: &DecomposableGraph,
    prior: &PriorSpec<T>,
) -> Result<T> {
    check_dims(stats, g, prior)?;
    log_marginal_with(stats, &g.decompose(), prior)
}

pub(crate) fn log_marginal_with<T: Real>(
    stats: &ClusterStats<T>,
    seq: &CliqueSequence,
    prior: &PriorSpec<T>,
) -> Result<T> {
    if stats.count() == 0 {
        return Ok(T::zero());
    }
    let post = posterior_params(stats, prior);
    let gw = prior.gwishart();
    let prior_norm = log_norm_factorized(seq, gw.delta(), gw.scale())?;
    log_marginal_from_posterior(&post, seq, prior, prior_norm)
}

pub(crate) fn log_marginal_from_posterior<T: Real>(
    post: &Posterior<T>,
    seq: &CliqueSequence,
    prior: &PriorSpec<T>,
    prior_log_norm: T,
) -> Result<T> {
    if post.n == 0 {
        return Ok(T::zero());
    }
    let half = T::of(0.5);
    let p = T::of_usize(prior.dim());
    let n = T::of_usize(post.n);
    let post_norm = log_norm_factorized(seq, post.delta, &post.scale)?;
    Ok(-n * p * half * T::two_pi().ln() + p * half * (prior.n0() / post.kappa).ln() + post_norm - prior_log_norm)
}

/// `log p(x_new | x_1..x_n, G)`, built from the rank-one increment
/// `A~ = -(kappa + 1) mu~ mu~^T + x x^T + kappa mu_bar mu_bar^T`.
pub fn log_predictive<T: Real>(
    x_new: &DVector<T>,
    stats: &ClusterStats<T>,
    g: &DecomposableGraph,
    prior: &PriorSpec<T>,
) -> Result<T> {
    check_dims(stats, g, prior)?;
    if x_new.len() != prior.dim() {
        return Err(Error::Input(format!("observation has length {}, expected {}", x_new.len(), prior.dim())));
    }
    let seq = g.decompose();
    let post = posterior_params(stats, prior);
    let kappa = post.kappa;
    let kappa1 = kappa + T::one();
    let mu_tilde = (x_new + &post.mean * kappa) / kappa1;
    let mut a_tilde = DMatrix::zeros(prior.dim(), prior.dim());
    a_tilde.ger(-kappa1, &mu_tilde, &mu_tilde, T::one());
    a_tilde.ger(T::one(), x_new, x_new, T::one());
    a_tilde.ger(kappa, &post.mean, &post.mean, T::one());
    let mut next = &post.scale + a_tilde;
    linalg::symmetrize(&mut next);

    let half = T::of(0.5);
    let p = T::of_usize(prior.dim());
    let num = log_norm_factorized(&seq, post.delta + T::one(), &next)?;
    let den = log_norm_factorized(&seq, post.delta, &post.scale)?;
    Ok(-p * half * T::two_pi().ln() + p * half * (kappa / kappa1).ln() + num - den)
}
