use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::gwishart::{sample_posterior, ClusterStats, PriorSpec};
use crate::mixture::GraphPrior;
use crate::trace::TraceRecord;

const EIGEN_FLOOR: f64 = 1e-10;

/// Symmetrizes `m` and raises its eigenvalues to at least `1e-10`.
pub fn project_pd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    if sym.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("covariance estimate is not finite".into()));
    }
    let eig = sym.symmetric_eigen();
    let floored = eig.eigenvalues.map(|v| v.max(EIGEN_FLOOR));
    let out = &eig.eigenvectors * DMatrix::from_diagonal(&floored) * eig.eigenvectors.transpose();
    let out = (&out + out.transpose()) * 0.5;
    if out.clone().cholesky().is_none() {
        return Err(Error::Numeric("covariance estimate is not positive definite after projection".into()));
    }
    Ok(out)
}

/// Probabilities of each existing cluster and of a new one for the next
/// observation given one sweep.
fn next_weights(rec: &TraceRecord, discount: f64) -> Result<Vec<f64>> {
    let l = rec.num_clusters();
    let labels = rec.labels();
    match (&rec.gamma, rec.alpha) {
        (Some(gamma), Some(alpha)) => {
            if gamma.len() != l + 1 {
                return Err(Error::Input(format!(
                    "record {} has {} base weights for {l} states",
                    rec.iteration,
                    gamma.len()
                )));
            }
            let last = *labels.last().ok_or_else(|| Error::Input("record has no observations".into()))?;
            let mut out_counts = vec![0.0; l];
            for w in labels.windows(2).filter(|w| w[0] == last) {
                out_counts[w[1]] += 1.0;
            }
            let total: f64 = out_counts.iter().sum::<f64>() + alpha;
            let mut w: Vec<f64> = (0..l).map(|k| (out_counts[k] + alpha * gamma[k]) / total).collect();
            w.push(alpha * gamma[l] / total);
            Ok(w)
        }
        _ => {
            let n = labels.len() as f64;
            let mut sizes = vec![0.0; l];
            for &k in &labels {
                sizes[k] += 1.0;
            }
            let total = n + rec.alpha0;
            let mut w: Vec<f64> = sizes.iter().map(|&r| (r - discount) / total).collect();
            w.push((rec.alpha0 + discount * l as f64) / total);
            Ok(w)
        }
    }
}

/// One-step-ahead mean and covariance averaged over sweeps. Each record must
/// carry sampled parameters; a new cluster contributes one draw from the
/// prior whenever its weight is positive. Records with `gamma` use the
/// transition weights out of the last state, the others the urn weights
/// with the given `discount`.
pub fn predictive_moments<R: Rng + ?Sized>(
    trace: &[TraceRecord],
    prior: &PriorSpec<f64>,
    graph_prior: &GraphPrior,
    discount: f64,
    rng: &mut R,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if trace.is_empty() {
        return Err(Error::Input("empty trace".into()));
    }
    let p = prior.dim();
    let mut mu = DVector::zeros(p);
    let mut sigma = DMatrix::zeros(p, p);
    for rec in trace {
        let params = rec
            .params
            .as_ref()
            .ok_or_else(|| Error::Input(format!("record {} has no sampled parameters", rec.iteration)))?;
        if params.len() != rec.num_clusters() {
            return Err(Error::Input(format!("record {} has {} parameter sets", rec.iteration, params.len())));
        }
        let w = next_weights(rec, discount)?;
        for (cp, &wk) in params.iter().zip(&w) {
            if cp.mean.len() != p || cp.precision.len() != p * p {
                return Err(Error::Input(format!("record {} has parameters of the wrong size", rec.iteration)));
            }
            let k = DMatrix::from_row_slice(p, p, &cp.precision);
            let cov = k
                .cholesky()
                .ok_or_else(|| Error::Numeric(format!("record {}: sampled precision is not PD", rec.iteration)))?
                .inverse();
            mu += DVector::from_column_slice(&cp.mean) * wk;
            sigma += cov * wk;
        }
        let w_new = w[w.len() - 1];
        if w_new > 0.0 {
            let g = graph_prior.sample(p, rng)?;
            let (m_new, k_new) = sample_posterior(&ClusterStats::empty(p), &g, prior, rng)?;
            let cov_new =
                k_new.cholesky().ok_or_else(|| Error::Numeric("prior precision draw is not PD".into()))?.inverse();
            mu += m_new * w_new;
            sigma += cov_new * w_new;
        }
    }
    let s = trace.len() as f64;
    Ok((mu / s, project_pd(&(sigma / s))?))
}

/// Minimum-variance weights with expected return `target`:
/// `w = m S^-1 mu / (mu' S^-1 mu)`.
pub fn min_variance_weights(mu: &DVector<f64>, sigma: &DMatrix<f64>, target: f64) -> Result<DVector<f64>> {
    if sigma.nrows() != mu.len() || sigma.ncols() != mu.len() {
        return Err(Error::Input("mean and covariance sizes differ".into()));
    }
    let chol = sigma.clone().cholesky().ok_or_else(|| Error::Numeric("covariance is not positive definite".into()))?;
    let s_mu = chol.solve(mu);
    let q = mu.dot(&s_mu);
    let tol = 1e-12 * (1.0 + mu.norm_squared());
    if !(q > tol) {
        return Err(Error::Domain(format!(
            "degenerate target: mu' S^-1 mu = {q:e} leaves the return constraint unattainable"
        )));
    }
    Ok(s_mu * (target / q))
}
