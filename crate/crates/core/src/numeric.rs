//! Log-space helpers and random variate generation.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `log(sum(exp(xs)))`, returning `-inf` for an empty or all `-inf` slice.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let max = xs.iter().copied().fold(T::neg_infinity(), |a, b| if b > a { b } else { a });
    if !max.is_finite() {
        return max;
    }
    let s: T = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// `log(exp(a) + exp(b))`.
#[inline]
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// Normalizes log-weights into probabilities.
pub fn normalize_log_weights<T: Real>(log_w: &[T]) -> Result<Vec<T>> {
    let z = log_sum_exp(log_w);
    if !z.is_finite() {
        return Err(Error::Numeric(format!("log-weights cannot be normalized (log-normalizer {z})")));
    }
    Ok(log_w.iter().map(|&w| (w - z).exp()).collect())
}

/// Inverse-CDF draw from unnormalized log-weights using one uniform.
pub fn sample_log_categorical<T: Real, R: Rng + ?Sized>(log_w: &[T], rng: &mut R) -> Result<usize> {
    let probs = normalize_log_weights(log_w)?;
    let u = T::of(rng.random::<f64>());
    let mut acc = T::zero();
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return Ok(i);
        }
    }
    // Rounding left `acc` just below one; take the last positive entry.
    Ok(probs.iter().rposition(|&p| p > T::zero()).unwrap_or(probs.len() - 1))
}

pub fn std_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let z: f64 = StandardNormal.sample(rng);
    T::of(z)
}

/// Gamma variate with the given shape and *rate*.
pub fn gamma<T: Real, R: Rng + ?Sized>(shape: T, rate: T, rng: &mut R) -> Result<T> {
    let g = Gamma::new(shape.as_f64(), 1.0 / rate.as_f64())
        .map_err(|e| Error::Domain(format!("gamma(shape={shape}, rate={rate}): {e}")))?;
    Ok(T::of(g.sample(rng)))
}

pub fn beta<T: Real, R: Rng + ?Sized>(a: T, b: T, rng: &mut R) -> Result<T> {
    let d = Beta::new(a.as_f64(), b.as_f64()).map_err(|e| Error::Domain(format!("beta({a}, {b}): {e}")))?;
    Ok(T::of(d.sample(rng)))
}

/// Chi-squared variate with `k` (possibly fractional) degrees of freedom.
pub fn chi_squared<T: Real, R: Rng + ?Sized>(k: T, rng: &mut R) -> Result<T> {
    gamma(k / T::of(2.0), T::of(0.5), rng)
}

/// Dirichlet draw as normalized independent gammas.
pub fn dirichlet<T: Real, R: Rng + ?Sized>(params: &[T], rng: &mut R) -> Result<Vec<T>> {
    let mut draws = Vec::with_capacity(params.len());
    for &a in params {
        draws.push(gamma(a, T::one(), rng)?);
    }
    let total: T = draws.iter().copied().sum();
    if !(total > T::zero()) {
        // Every gamma underflowed; fall back to the mean.
        let s: T = params.iter().copied().sum();
        return Ok(params.iter().map(|&a| a / s).collect());
    }
    Ok(draws.into_iter().map(|g| g / total).collect())
}
