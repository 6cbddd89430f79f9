use nalgebra::DVector;

use super::{log_norm_block, Posterior};
use crate::error::Result;
use crate::graph::CliqueSequence;
use crate::linalg;
use crate::scalar::Real;

/// Clique and separator Cholesky factors of a posterior scale matrix.
///
/// Adding one observation changes the scale by `kappa / (kappa + 1) v v^T`
/// with `v = x - mu_bar`, so each block determinant updates through
/// `det(D + c v v^T) = det(D) (1 + c v^T D^-1 v)` and the predictive density
/// costs one triangular solve per block.
#[derive(Clone, Debug)]
pub struct Factorized<T: Real = f64> {
    kappa: T,
    mean: DVector<T>,
    delta: T,
    blocks: Vec<Block<T>>,
    pred_const: T,
    /// `log Gamma((delta + k) / 2) - log Gamma(delta / 2)` by block size `k`.
    gamma_ratio: Vec<T>,
}

#[derive(Clone, Debug)]
struct Block<T> {
    idx: Vec<usize>,
    chol: Vec<T>,
    log_det: T,
    sign: T,
    /// `(delta + k) / 2`, the exponent applied to the rank-one factor.
    half_shape: T,
}

impl<T: Real> Factorized<T> {
    pub fn new(post: &Posterior<T>, seq: &CliqueSequence) -> Result<Self> {
        let sets = seq.cliques.iter().map(|c| (c, T::one())).chain(seq.separators.iter().map(|s| (s, -T::one())));
        let blocks = sets
            .map(|(idx, sign)| Block {
                idx: idx.clone(),
                chol: vec![T::zero(); idx.len() * idx.len()],
                log_det: T::zero(),
                sign,
                half_shape: T::zero(),
            })
            .collect();
        let mut f = Self {
            kappa: post.kappa,
            mean: post.mean.clone(),
            delta: post.delta,
            blocks,
            pred_const: T::zero(),
            gamma_ratio: Vec::new(),
        };
        f.refresh(post)?;
        Ok(f)
    }

    /// Refactorizes for new posterior parameters on the same graph, reusing
    /// the block buffers.
    pub fn refresh(&mut self, post: &Posterior<T>) -> Result<()> {
        let half = T::of(0.5);
        let delta = post.delta;
        let p = post.mean.len();
        self.kappa = post.kappa;
        self.mean.copy_from(&post.mean);
        self.delta = delta;
        let k_max = self.blocks.iter().map(|b| b.idx.len()).max().unwrap_or(0);
        self.gamma_ratio.clear();
        self.gamma_ratio.push(T::zero());
        if k_max >= 1 {
            self.gamma_ratio.push(((delta + T::one()) * half).ln_gamma() - (delta * half).ln_gamma());
        }
        for k in 2..=k_max {
            // Gamma(a + 1) = a Gamma(a) with a = (delta + k - 2) / 2.
            let prev = self.gamma_ratio[k - 2];
            self.gamma_ratio.push(prev + ((delta + T::of_usize(k - 2)) * half).ln());
        }
        let mut pred_const = T::of_usize(p) * half * ((post.kappa / (post.kappa + T::one())).ln() - T::two_pi().ln());
        for b in &mut self.blocks {
            let k = b.idx.len();
            for (a, &i) in b.idx.iter().enumerate() {
                for (c, &j) in b.idx.iter().enumerate() {
                    b.chol[a * k + c] = post.scale[(i, j)];
                }
            }
            if !linalg::cholesky_in_place(&mut b.chol, k) {
                return Err(linalg::not_pd(&b.idx));
            }
            b.log_det = linalg::chol_log_det(&b.chol, k);
            let kt = T::of_usize(k);
            // log I_k(delta + 1, D') - log I_k(delta, D) without the rank-one term.
            let block_const = kt * half * T::ln_2() + self.gamma_ratio[k] - half * b.log_det;
            pred_const += b.sign * block_const;
            b.half_shape = (delta + kt) * half;
        }
        self.pred_const = pred_const;
        Ok(())
    }

    /// `log I_G(delta_n, D_n)`.
    pub fn log_norm(&self) -> Result<T> {
        let mut total = T::zero();
        for b in &self.blocks {
            total += b.sign * log_norm_block(self.delta, b.idx.len(), b.log_det)?;
        }
        Ok(total)
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// Posterior predictive log density of one new observation.
    pub fn log_predictive(&self, x: &DVector<T>) -> T {
        let c = self.kappa / (self.kappa + T::one());
        let mut total = self.pred_const;
        let mut buf = [T::zero(); 64];
        for b in &self.blocks {
            let k = b.idx.len();
            let z = &mut buf[..k];
            for (zi, &i) in z.iter_mut().zip(&b.idx) {
                *zi = x[i] - self.mean[i];
            }
            linalg::forward_solve(&b.chol, k, z);
            let q: T = z.iter().map(|&v| v * v).sum();
            total -= b.sign * b.half_shape * (c * q).ln_1p();
        }
        total
    }
}
