use rand::Rng;
use serde::{Deserialize, Serialize};

use super::LogStirling1Table;
use crate::error::{Error, Result};
use crate::mixture::sample_concentration;
use crate::numeric::{beta, dirichlet, gamma, sample_log_categorical};
use crate::scalar::Real;
use crate::trace::GammaPrior;

/// Table counts `m_{ll'}` with `P(m) ∝ S(r_{ll'}, m) (alpha gamma_{l'})^m`
/// on `1..=r_{ll'}`, and zero where there are no transitions.
pub fn sample_m<T: Real, R: Rng + ?Sized>(
    counts: &[Vec<usize>],
    alpha: T,
    gamma: &[T],
    table: &LogStirling1Table<T>,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    let mut m = vec![vec![0; counts.len()]; counts.len()];
    let mut w = Vec::new();
    for (l, row) in counts.iter().enumerate() {
        for (lp, &r) in row.iter().enumerate() {
            if r == 0 {
                continue;
            }
            if r > table.n_max() {
                return Err(Error::Input(format!("transition count {r} exceeds the Stirling table")));
            }
            let log_rate = (alpha * gamma[lp]).ln();
            w.clear();
            w.extend((1..=r).map(|k| table.get(r, k) + T::of_usize(k) * log_rate));
            m[l][lp] = 1 + sample_log_categorical(&w, rng)?;
        }
    }
    Ok(m)
}

/// Column totals `m_{.l'}`, plus one table for the state at the first time
/// point, which is drawn from the base weights directly.
pub fn table_totals(m: &[Vec<usize>], initial: Option<usize>) -> Vec<usize> {
    let mut cols = vec![0; m.len()];
    for row in m {
        for (c, &v) in cols.iter_mut().zip(row) {
            *c += v;
        }
    }
    if let Some(s) = initial {
        cols[s] += 1;
    }
    cols
}

/// `gamma ~ Dirichlet(m_{.1}, ..., m_{.L}, alpha0)`; `initial` adds the first
/// state's table as in [`table_totals`].
pub fn update_gamma<T: Real, R: Rng + ?Sized>(
    m: &[Vec<usize>],
    initial: Option<usize>,
    alpha0: T,
    rng: &mut R,
) -> Result<Vec<T>> {
    let cols = table_totals(m, initial);
    if let Some(l) = cols.iter().position(|&c| c == 0) {
        return Err(Error::Numeric(format!("state {} has no tables", l + 1)));
    }
    let mut params: Vec<T> = cols.iter().map(|&c| T::of_usize(c)).collect();
    params.push(alpha0);
    let mut g = dirichlet(&params, rng)?;
    // Keep every entry strictly positive.
    let floor = T::of(f64::MIN_POSITIVE);
    for v in &mut g {
        if *v < floor {
            *v = floor;
        }
    }
    let total: T = g.iter().copied().sum();
    g.iter_mut().for_each(|v| *v /= total);
    Ok(g)
}

/// Splits the remainder mass `gamma[L]` into `v * rest` for a new state and
/// `(1 - v) * rest` for the new remainder.
pub fn split_remainder<T: Real>(gamma: &mut Vec<T>, v: T) {
    let rest = *gamma.last().expect("gamma holds the remainder");
    let l = gamma.len() - 1;
    gamma[l] = v * rest;
    gamma.push(rest - gamma[l]);
}

/// Distribution of the stick fraction `v` given to a newly opened state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpawnRule {
    /// `v ~ Beta(1, alpha0)`, the stick-breaking conditional of the base
    /// weights.
    #[default]
    StickBreaking,
    /// `v ~ Beta(alpha0, 1)`.
    Reversed,
}

pub fn spawn_fraction<T: Real, R: Rng + ?Sized>(rule: SpawnRule, alpha0: T, rng: &mut R) -> Result<T> {
    match rule {
        SpawnRule::StickBreaking => beta(T::one(), alpha0, rng),
        SpawnRule::Reversed => beta(alpha0, T::one(), rng),
    }
}

/// Auxiliary-variable update of the transition concentration from the row
/// totals `r_{l.}` and the total table count `m_{..}`.
pub fn sample_alpha_from<T: Real, R: Rng + ?Sized>(
    row_totals: &[usize],
    m_total: usize,
    prior: &GammaPrior,
    current: T,
    rng: &mut R,
) -> Result<T> {
    let mut shape = prior.a + m_total as f64;
    let mut rate = prior.b;
    let a = current.as_f64();
    for &r in row_totals.iter().filter(|&&r| r > 0) {
        let rf = r as f64;
        let s: f64 = beta(a + 1.0, rf, rng)?;
        rate -= s.ln();
        if rng.random::<f64>() < rf / (a + rf) {
            shape -= 1.0;
        }
    }
    let draw: f64 = gamma(shape, rate, rng)?;
    Ok(T::of(draw.max(f64::MIN_POSITIVE)))
}

/// Top-level concentration update with `n` replaced by the table total.
pub fn sample_alpha0_ihmm<T: Real, R: Rng + ?Sized>(
    states: usize,
    m_total: usize,
    prior: &GammaPrior,
    current: T,
    rng: &mut R,
) -> Result<T> {
    sample_concentration(states, m_total, prior, current, rng)
}
