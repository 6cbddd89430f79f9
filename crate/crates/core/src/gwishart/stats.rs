use nalgebra::{DMatrix, DVector};

use crate::scalar::Real;

/// Sufficient statistics of a set of observations: count, sum and sum of
/// outer products. Observations can be added and removed in `O(p^2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterStats<T: Real = f64> {
    n: usize,
    sum: DVector<T>,
    outer: DMatrix<T>,
}

impl<T: Real> ClusterStats<T> {
    pub fn empty(p: usize) -> Self {
        Self { n: 0, sum: DVector::zeros(p), outer: DMatrix::zeros(p, p) }
    }

    pub fn from_rows<'a, I>(p: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = &'a DVector<T>>,
    {
        let mut s = Self::empty(p);
        for x in rows {
            s.push(x);
        }
        s
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.sum.len()
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.n
    }

    pub fn sum(&self) -> &DVector<T> {
        &self.sum
    }

    pub fn outer(&self) -> &DMatrix<T> {
        &self.outer
    }

    pub fn push(&mut self, x: &DVector<T>) {
        self.n += 1;
        self.sum += x;
        self.outer.ger(T::one(), x, x, T::one());
    }

    /// Removes an observation previously added with [`push`](Self::push).
    pub fn remove(&mut self, x: &DVector<T>) {
        assert!(self.n > 0, "removing from empty cluster statistics");
        self.n -= 1;
        if self.n == 0 {
            self.sum.fill(T::zero());
            self.outer.fill(T::zero());
        } else {
            self.sum -= x;
            self.outer.ger(-T::one(), x, x, T::one());
        }
    }

    /// Sample mean; zero when empty.
    pub fn mean(&self) -> DVector<T> {
        if self.n == 0 {
            return DVector::zeros(self.dim());
        }
        &self.sum / T::of_usize(self.n)
    }

    /// Centred scatter matrix `sum (x - xbar)(x - xbar)^T`.
    pub fn scatter(&self) -> DMatrix<T> {
        if self.n == 0 {
            return DMatrix::zeros(self.dim(), self.dim());
        }
        let mut u = self.outer.clone();
        u.ger(-T::one() / T::of_usize(self.n), &self.sum, &self.sum, T::one());
        u
    }

    /// Largest absolute elementwise difference to `other` (count must match).
    pub fn max_abs_diff(&self, other: &Self) -> Option<T> {
        if self.n != other.n {
            return None;
        }
        let a = (&self.sum - &other.sum).amax();
        let b = (&self.outer - &other.outer).amax();
        Some(if a > b { a } else { b })
    }
}
