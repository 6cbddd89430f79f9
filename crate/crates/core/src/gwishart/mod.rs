//! Conjugate normal / G-Wishart computations for decomposable graphs.
//!
//! The G-Wishart `W_G(delta, D)` has density proportional to
//! `det(K)^((delta - 2) / 2) exp(-tr(K D) / 2)` on the cone of positive
//! definite matrices with zeros at the non-edges of `G`. All quantities are
//! computed in log space.

mod factors;
mod posterior;
mod sample;
mod stats;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CliqueSequence, DecomposableGraph};
use crate::linalg;
use crate::scalar::Real;

pub use factors::Factorized;
pub(crate) use posterior::posterior_params_into;
pub use posterior::{log_marginal_likelihood, log_predictive, posterior_params, Posterior};
pub use sample::{sample_gwishart, sample_posterior, sample_wishart};
pub use stats::ClusterStats;

/// Shape `delta` and scale `D` of a G-Wishart distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct GWishartParams<T: Real = f64> {
    delta: T,
    scale: DMatrix<T>,
}

impl<T: Real> GWishartParams<T> {
    pub fn new(delta: T, scale: DMatrix<T>) -> Result<Self> {
        if !(delta > T::of(2.0)) {
            return Err(Error::Domain(format!("G-Wishart shape must exceed 2, got {delta}")));
        }
        if !scale.is_square() {
            return Err(Error::Input(format!("scale matrix is {}x{}, expected square", scale.nrows(), scale.ncols())));
        }
        let tol = T::of(1e-12) * (T::one() + scale.amax());
        if (&scale - scale.transpose()).amax() > tol {
            return Err(Error::Input("scale matrix is not symmetric".into()));
        }
        if scale.clone().cholesky().is_none() {
            return Err(Error::Numeric("scale matrix is not positive definite".into()));
        }
        Ok(Self { delta, scale })
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn scale(&self) -> &DMatrix<T> {
        &self.scale
    }

    pub fn dim(&self) -> usize {
        self.scale.nrows()
    }
}

/// Scalar hyperparameters of a [`PriorSpec`] with `mu0 = mu0 * 1` and
/// `D0 = d0 * I`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorSettings {
    pub n0: f64,
    pub delta0: f64,
    pub d0: f64,
    pub mu0: f64,
}

impl Default for PriorSettings {
    fn default() -> Self {
        Self { n0: 1.0, delta0: 3.0, d0: 1.0, mu0: 0.0 }
    }
}

impl PriorSettings {
    pub fn spec<T: Real>(&self, p: usize) -> Result<PriorSpec<T>> {
        let config = |e: Error| Error::Config(format!("prior: {e}"));
        if !(self.d0 > 0.0) {
            return Err(Error::Config(format!("prior: d0 must be positive, got {}", self.d0)));
        }
        let gw = GWishartParams::new(T::of(self.delta0), DMatrix::identity(p, p) * T::of(self.d0)).map_err(config)?;
        PriorSpec::new(DVector::from_element(p, T::of(self.mu0)), T::of(self.n0), gw).map_err(config)
    }
}

/// Normal / G-Wishart prior on `(mu, K)`: `mu | K ~ N(mu0, (n0 K)^-1)`,
/// `K ~ W_G(delta0, D0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorSpec<T: Real = f64> {
    mu0: DVector<T>,
    n0: T,
    gw: GWishartParams<T>,
}

impl<T: Real> PriorSpec<T> {
    pub fn new(mu0: DVector<T>, n0: T, gw: GWishartParams<T>) -> Result<Self> {
        if !(n0 > T::zero()) {
            return Err(Error::Domain(format!("prior precision scale n0 must be positive, got {n0}")));
        }
        if mu0.len() != gw.dim() {
            return Err(Error::Input(format!(
                "prior mean has length {} but scale is {}x{}",
                mu0.len(),
                gw.dim(),
                gw.dim()
            )));
        }
        Ok(Self { mu0, n0, gw })
    }

    /// `mu0 = 0`, `n0 = 1`, `delta0 = 3`, `D0 = I_p`.
    pub fn standard(p: usize) -> Self {
        Self::with_scale(p, T::one(), T::of(3.0), T::one()).expect("standard prior is valid")
    }

    /// Zero prior mean and a scaled identity `D0 = d0 * I_p`.
    pub fn with_scale(p: usize, n0: T, delta0: T, d0: T) -> Result<Self> {
        let gw = GWishartParams::new(delta0, DMatrix::identity(p, p) * d0)?;
        Self::new(DVector::zeros(p), n0, gw)
    }

    pub fn mu0(&self) -> &DVector<T> {
        &self.mu0
    }

    pub fn n0(&self) -> T {
        self.n0
    }

    pub fn gwishart(&self) -> &GWishartParams<T> {
        &self.gw
    }

    pub fn dim(&self) -> usize {
        self.mu0.len()
    }
}

/// Log of the multivariate gamma function `Gamma_p(a)`.
pub fn log_mvgamma<T: Real>(p: usize, a: T) -> Result<T> {
    let half = T::of(0.5);
    if p > 0 && !(a > T::of_usize(p - 1) * half) {
        return Err(Error::Domain(format!(
            "multivariate gamma of order {p} needs a > {}, got {a}",
            (p as f64 - 1.0) / 2.0
        )));
    }
    let mut s = T::of_usize(p * p.saturating_sub(1)) * T::of(0.25) * T::pi().ln();
    for i in 0..p {
        s += (a - T::of_usize(i) * half).ln_gamma();
    }
    Ok(s)
}

/// `log I` of a complete block of size `k` from `log det D_block`.
pub(crate) fn log_norm_block<T: Real>(delta: T, k: usize, log_det: T) -> Result<T> {
    let kt = T::of_usize(k);
    let b = delta + kt - T::one();
    let half = T::of(0.5);
    Ok(b * kt * half * T::ln_2() + log_mvgamma(k, b * half)? - b * half * log_det)
}

/// Normalizing constant of the Wishart (complete-graph) case, evaluated
/// directly on the full matrix without any factorization.
pub fn log_norm_complete<T: Real>(delta: T, scale: &DMatrix<T>) -> Result<T> {
    check_delta(delta)?;
    let p = scale.nrows();
    let chol =
        scale.clone().cholesky().ok_or_else(|| Error::Numeric("scale matrix is not positive definite".into()))?;
    let log_det = T::of(2.0) * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<T>();
    log_norm_block(delta, p, log_det)
}

/// `log I_G(delta, D)` from a perfect clique sequence of `G`.
pub fn log_norm_factorized<T: Real>(seq: &CliqueSequence, delta: T, scale: &DMatrix<T>) -> Result<T> {
    check_delta(delta)?;
    let mut total = T::zero();
    for c in &seq.cliques {
        total += log_norm_block(delta, c.len(), linalg::principal_log_det(scale, c)?)?;
    }
    for s in &seq.separators {
        total -= log_norm_block(delta, s.len(), linalg::principal_log_det(scale, s)?)?;
    }
    Ok(total)
}

/// `log I_G(delta, D)` for a decomposable graph.
pub fn log_norm_constant<T: Real>(g: &DecomposableGraph, params: &GWishartParams<T>) -> Result<T> {
    if g.order() != params.dim() {
        return Err(Error::Input(format!(
            "graph has {} vertices but scale is {}x{}",
            g.order(),
            params.dim(),
            params.dim()
        )));
    }
    log_norm_factorized(&g.decompose(), params.delta, &params.scale)
}

fn check_delta<T: Real>(delta: T) -> Result<()> {
    if !(delta > T::of(2.0)) {
        return Err(Error::Domain(format!("G-Wishart shape must exceed 2, got {delta}")));
    }
    Ok(())
}
