use crate::scalar::Real;

/// Log unsigned Stirling numbers of the first kind, `log S(n, m)` for
/// `0 <= m <= n <= n_max`, filled in log space because the raw values
/// overflow near `n = 170`.
#[derive(Clone, Debug)]
pub struct LogStirling1Table<T: Real = f64> {
    rows: Vec<Vec<T>>,
}

impl<T: Real> LogStirling1Table<T> {
    pub fn new(n_max: usize) -> Self {
        let mut rows: Vec<Vec<T>> = Vec::with_capacity(n_max + 1);
        rows.push(vec![T::zero()]);
        for n in 1..=n_max {
            let prev = &rows[n - 1];
            let log_nm1 = T::of_usize(n - 1).ln();
            let mut row = vec![T::neg_infinity(); n + 1];
            for (m, slot) in row.iter_mut().enumerate().skip(1) {
                // S(n, m) = S(n-1, m-1) + (n-1) S(n-1, m)
                let a = prev[m - 1];
                let b = if m < n { prev[m] + log_nm1 } else { T::neg_infinity() };
                *slot = crate::numeric::log_add_exp(a, b);
            }
            rows.push(row);
        }
        Self { rows }
    }

    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// `log S(n, m)`; `-inf` when `m > n` or `m = 0 < n`.
    pub fn get(&self, n: usize, m: usize) -> T {
        if m > n {
            return T::neg_infinity();
        }
        self.rows[n][m]
    }

    pub fn row(&self, n: usize) -> &[T] {
        &self.rows[n]
    }
}
