use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{posterior_params, ClusterStats, PriorSpec};
use crate::error::{Error, Result};
use crate::graph::{CliqueSequence, DecomposableGraph};
use crate::linalg::{spd_inverse, sub_matrix, symmetrize};
use crate::numeric::{chi_squared, std_normal};
use crate::scalar::Real;

/// Wishart draw with `df` degrees of freedom and scale `V` (mean `df * V`),
/// by the Bartlett decomposition.
pub fn sample_wishart<T: Real, R: Rng + ?Sized>(df: T, scale: &DMatrix<T>, rng: &mut R) -> Result<DMatrix<T>> {
    let k = scale.nrows();
    if !(df > T::of_usize(k) - T::one()) {
        return Err(Error::Domain(format!("Wishart needs df > {}, got {df}", k as f64 - 1.0)));
    }
    let l = scale
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numeric("Wishart scale is not positive definite".into()))?
        .unpack();
    let mut a = DMatrix::zeros(k, k);
    for i in 0..k {
        a[(i, i)] = chi_squared(df - T::of_usize(i), rng)?.sqrt();
        for j in 0..i {
            a[(i, j)] = std_normal(rng);
        }
    }
    let la = l * a;
    let mut w = &la * la.transpose();
    symmetrize(&mut w);
    Ok(w)
}

/// Inverse-Wishart draw `Sigma` with `Sigma^-1 ~ Wishart(df, psi^-1)`.
fn sample_inverse_wishart<T: Real, R: Rng + ?Sized>(df: T, psi: &DMatrix<T>, rng: &mut R) -> Result<DMatrix<T>> {
    let w = sample_wishart(df, &spd_inverse(psi)?, rng)?;
    spd_inverse(&w)
}

/// Draws `K ~ W_G(delta, D)` for a decomposable `G` given by its perfect
/// clique sequence.
///
/// The covariance `Sigma = K^-1` is hyper inverse Wishart. Its first clique
/// marginal is inverse Wishart; every later clique is drawn conditionally on
/// its separator block through the Schur complement `Sigma_{R.S}` and the
/// regression `Sigma_SS^-1 Sigma_SR`. `K` is then assembled as
/// `sum_C [Sigma_C^-1]^0 - sum_S [Sigma_S^-1]^0`, which is exactly zero off
/// the edge set.
pub fn sample_gwishart<T: Real, R: Rng + ?Sized>(
    seq: &CliqueSequence,
    delta: T,
    scale: &DMatrix<T>,
    rng: &mut R,
) -> Result<DMatrix<T>> {
    if !(delta > T::of(2.0)) {
        return Err(Error::Domain(format!("G-Wishart shape must exceed 2, got {delta}")));
    }
    let p = scale.nrows();
    let mut sigma = DMatrix::<T>::zeros(p, p);
    let mut covered = vec![false; p];
    let mut separators: Vec<Vec<usize>> = Vec::new();

    for clique in &seq.cliques {
        let (sep, rest): (Vec<usize>, Vec<usize>) = clique.iter().partition(|&&v| covered[v]);
        let c = T::of_usize(clique.len());
        if sep.is_empty() {
            let block = sample_inverse_wishart(delta + c - T::one(), &sub_matrix(scale, &rest, &rest), rng)?;
            write_block(&mut sigma, &rest, &rest, &block);
        } else {
            let d_ss = sub_matrix(scale, &sep, &sep);
            let d_sr = sub_matrix(scale, &sep, &rest);
            let d_rr = sub_matrix(scale, &rest, &rest);
            let d_ss_inv = spd_inverse(&d_ss)?;
            let regression = &d_ss_inv * &d_sr;
            let mut schur = d_rr - d_sr.transpose() * &regression;
            symmetrize(&mut schur);
            let sigma_r_s = sample_inverse_wishart(delta + c - T::one(), &schur, rng)?;

            let row_chol = chol_lower(&d_ss_inv)?;
            let col_chol = chol_lower(&sigma_r_s)?;
            let z = DMatrix::from_fn(sep.len(), rest.len(), |_, _| std_normal::<T, R>(rng));
            let b = regression + row_chol * z * col_chol.transpose();

            let sigma_ss = sub_matrix(&sigma, &sep, &sep);
            let sigma_sr = &sigma_ss * &b;
            let mut sigma_rr = sigma_r_s + b.transpose() * &sigma_sr;
            symmetrize(&mut sigma_rr);
            write_block(&mut sigma, &sep, &rest, &sigma_sr);
            write_block(&mut sigma, &rest, &sep, &sigma_sr.transpose());
            write_block(&mut sigma, &rest, &rest, &sigma_rr);
            separators.push(sep);
        }
        for &v in clique {
            covered[v] = true;
        }
    }

    let mut k = DMatrix::<T>::zeros(p, p);
    for clique in &seq.cliques {
        add_block(&mut k, clique, &spd_inverse(&sub_matrix(&sigma, clique, clique))?, T::one());
    }
    for sep in &separators {
        add_block(&mut k, sep, &spd_inverse(&sub_matrix(&sigma, sep, sep))?, -T::one());
    }
    symmetrize(&mut k);
    Ok(k)
}

fn chol_lower<T: Real>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    Ok(m.clone().cholesky().ok_or_else(|| Error::Numeric("sampled block is not positive definite".into()))?.unpack())
}

fn write_block<T: Real>(m: &mut DMatrix<T>, rows: &[usize], cols: &[usize], block: &DMatrix<T>) {
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in cols.iter().enumerate() {
            m[(i, j)] = block[(a, b)];
        }
    }
}

fn add_block<T: Real>(m: &mut DMatrix<T>, idx: &[usize], block: &DMatrix<T>, sign: T) {
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            m[(i, j)] += sign * block[(a, b)];
        }
    }
}

/// Draws `(mu, K)` from the posterior of one cluster:
/// `K ~ W_G(delta0 + n, D0 + U + A)`, `mu | K ~ N(mu_bar, [(n + n0) K]^-1)`.
pub fn sample_posterior<T: Real, R: Rng + ?Sized>(
    stats: &ClusterStats<T>,
    g: &DecomposableGraph,
    prior: &PriorSpec<T>,
    rng: &mut R,
) -> Result<(DVector<T>, DMatrix<T>)> {
    let post = posterior_params(stats, prior);
    let k = sample_gwishart(&g.decompose(), post.delta, &post.scale, rng)?;
    let chol = (&k * post.kappa)
        .cholesky()
        .ok_or_else(|| Error::Numeric("sampled precision is not positive definite".into()))?;
    let z = DVector::from_fn(prior.dim(), |_, _| std_normal::<T, R>(rng));
    // (L L^T)^-1 = L^-T L^-1, so L^-T z has the right covariance.
    let offset = chol
        .l()
        .transpose()
        .solve_upper_triangular(&z)
        .ok_or_else(|| Error::Numeric("singular Cholesky factor".into()))?;
    Ok((post.mean + offset, k))
}
