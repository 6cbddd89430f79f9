//! Collapsed Gibbs sampling for an infinite hidden Markov model whose states
//! emit from decomposable Gaussian graphical models.

mod hyper;
mod stirling;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use hyper::{
    sample_alpha0_ihmm, sample_alpha_from, sample_m, spawn_fraction, split_remainder, table_totals, update_gamma,
    SpawnRule,
};
pub use stirling::LogStirling1Table;

use crate::component::{Component, PriorPredictive};
use crate::error::{Error, Result};
use crate::graph::DecomposableGraph;
use crate::gwishart::{ClusterStats, PriorSpec};
use crate::mixture::{check_data, draw_params, mh_graph_update, GraphPrior, SweepInfo};
use crate::numeric::sample_log_categorical;
use crate::scalar::Real;
use crate::trace::{ChainSettings, GammaPrior, TraceRecord};

const UNASSIGNED: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IhmmConfig {
    pub alpha0: f64,
    pub alpha0_prior: GammaPrior,
    pub resample_alpha0: bool,
    pub alpha: f64,
    pub alpha_prior: GammaPrior,
    pub resample_alpha: bool,
    pub spawn: SpawnRule,
    pub graph_mh_repeats: usize,
    pub graph_prior: GraphPrior,
    pub recompute_every: usize,
    pub sample_params: bool,
}

impl Default for IhmmConfig {
    fn default() -> Self {
        Self {
            alpha0: 1.0,
            alpha0_prior: GammaPrior::default(),
            resample_alpha0: true,
            alpha: 1.0,
            alpha_prior: GammaPrior::default(),
            resample_alpha: true,
            spawn: SpawnRule::StickBreaking,
            graph_mh_repeats: 5,
            graph_prior: GraphPrior::Uniform,
            recompute_every: 100,
            sample_params: false,
        }
    }
}

impl IhmmConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha0", self.alpha0), ("ihmm.alpha", self.alpha)] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        self.alpha0_prior.validate()?;
        self.alpha_prior.validate()?;
        self.graph_prior.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Clone, Debug)]
pub struct HmmState<T: Real = f64> {
    xi: Vec<usize>,
    states: Vec<Component<T>>,
    /// `counts[l][l']`: transitions `l -> l'` between consecutive times.
    counts: Vec<Vec<usize>>,
    /// Base weights of the `L` states followed by the remainder mass.
    gamma: Vec<T>,
    alpha: T,
    alpha0: T,
    m: Vec<Vec<usize>>,
    iteration: usize,
}

impl<T: Real> HmmState<T> {
    /// One state with the empty graph; `gamma` set to the prior mean of the
    /// first stick.
    pub fn new(data: &[DVector<T>], prior: &PriorSpec<T>, alpha: T, alpha0: T) -> Result<Self> {
        check_data(data, prior)?;
        if !(alpha > T::zero() && alpha0 > T::zero()) {
            return Err(Error::Domain(format!("concentrations must be positive, got {alpha}, {alpha0}")));
        }
        let n = data.len();
        let stats = ClusterStats::from_rows(prior.dim(), data);
        let state = Component::new(DecomposableGraph::empty(prior.dim())?, stats, prior)?;
        let first = T::one() / (T::one() + alpha0);
        Ok(Self {
            xi: vec![0; n],
            states: vec![state],
            counts: vec![vec![n - 1]],
            gamma: vec![first, T::one() - first],
            alpha,
            alpha0,
            m: vec![vec![usize::from(n > 1)]],
            iteration: 0,
        })
    }

    /// Builds a state from a 0-based trajectory, graphs and base weights.
    pub fn from_trajectory(
        data: &[DVector<T>],
        prior: &PriorSpec<T>,
        xi: &[usize],
        graphs: Vec<DecomposableGraph>,
        gamma: Vec<T>,
        alpha: T,
        alpha0: T,
    ) -> Result<Self> {
        let mut s = Self::new(data, prior, alpha, alpha0)?;
        let l = graphs.len();
        if xi.len() != data.len() || gamma.len() != l + 1 || xi.iter().any(|&k| k >= l) {
            return Err(Error::Input("trajectory, graphs and gamma are inconsistent".into()));
        }
        let mut states = Vec::with_capacity(l);
        for (k, g) in graphs.into_iter().enumerate() {
            let rows: Vec<&DVector<T>> = data.iter().zip(xi).filter(|(_, &c)| c == k).map(|(x, _)| x).collect();
            if rows.is_empty() {
                return Err(Error::Input(format!("state {} is never visited", k + 1)));
            }
            states.push(Component::new(g, ClusterStats::from_rows(prior.dim(), rows), prior)?);
        }
        s.xi = xi.to_vec();
        s.states = states;
        s.gamma = gamma;
        s.counts = recount(&s.xi, l);
        s.m = vec![vec![0; l]; l];
        Ok(s)
    }

    pub fn trajectory(&self) -> &[usize] {
        &self.xi
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn gamma(&self) -> &[T] {
        &self.gamma
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn alpha0(&self) -> T {
        self.alpha0
    }

    pub fn tables(&self) -> &[Vec<usize>] {
        &self.m
    }

    pub fn graph(&self, l: usize) -> &DecomposableGraph {
        self.states[l].graph()
    }

    pub fn state_stats(&self, l: usize) -> &ClusterStats<T> {
        self.states[l].stats()
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Replaces the graph of state `l`.
    pub fn set_state_graph(&mut self, l: usize, g: DecomposableGraph, prior: &PriorSpec<T>) -> Result<()> {
        self.states.get_mut(l).ok_or_else(|| Error::Input(format!("no state {}", l + 1)))?.set_graph(g, prior)
    }

    /// Transitions out of each state.
    pub fn row_totals(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    fn neighbors(&self, j: usize) -> (Option<usize>, Option<usize>) {
        let prev = if j > 0 { Some(self.xi[j - 1]) } else { None };
        let next = self.xi.get(j + 1).copied();
        (prev, next)
    }

    fn members<'a>(xi: &[usize], data: &'a [DVector<T>], k: usize) -> Vec<&'a DVector<T>> {
        data.iter().zip(xi).filter(|(_, &l)| l == k).map(|(x, _)| x).collect()
    }

    /// Takes time `j` out of its state and out of the transition counts,
    /// deleting the state (and folding its weight into the remainder) if it
    /// is no longer visited.
    pub fn remove_time(&mut self, j: usize, data: &[DVector<T>], prior: &PriorSpec<T>) -> Result<()> {
        let k = self.xi[j];
        if k == UNASSIGNED {
            return Err(Error::Input(format!("time {} is not assigned", j + 1)));
        }
        let (prev, next) = self.neighbors(j);
        if let Some(p) = prev.filter(|&p| p != UNASSIGNED) {
            self.counts[p][k] -= 1;
        }
        if let Some(q) = next.filter(|&q| q != UNASSIGNED) {
            self.counts[k][q] -= 1;
        }
        self.xi[j] = UNASSIGNED;
        let xi = &self.xi;
        self.states[k].remove(&data[j], prior, || Self::members(xi, data, k))?;
        if self.states[k].count() == 0 {
            self.delete_state(k);
        }
        Ok(())
    }

    fn delete_state(&mut self, k: usize) {
        let last = self.states.len() - 1;
        let rem = self.gamma.len() - 1;
        let freed = self.gamma[k];
        self.gamma[rem] += freed;
        self.gamma[k] = self.gamma[last];
        self.gamma.remove(last);
        self.states.swap_remove(k);
        for table in [&mut self.counts, &mut self.m] {
            if table.len() <= last {
                continue;
            }
            table.swap_remove(k);
            for row in table.iter_mut() {
                row.swap_remove(k);
            }
        }
        if k != last {
            for l in self.xi.iter_mut().filter(|l| **l == last) {
                *l = k;
            }
        }
    }

    /// Appends a state with graph `g`, splitting the remainder mass with
    /// stick fraction `v`.
    fn push_state(&mut self, state: Component<T>, v: T) {
        split_remainder(&mut self.gamma, v);
        self.states.push(state);
        let l = self.states.len();
        for table in [&mut self.counts, &mut self.m] {
            for row in table.iter_mut() {
                row.push(0);
            }
            table.push(vec![0; l]);
        }
    }

    /// Opens a new state with graph `g` after drawing its stick fraction.
    pub fn spawn_state<R: Rng + ?Sized>(
        &mut self,
        g: DecomposableGraph,
        prior: &PriorSpec<T>,
        rule: SpawnRule,
        rng: &mut R,
    ) -> Result<()> {
        let v = spawn_fraction(rule, self.alpha0, rng)?;
        self.push_state(Component::empty(g, prior)?, v);
        Ok(())
    }

    /// Puts time `j` into existing state `label`.
    pub fn insert_time(&mut self, j: usize, label: usize, data: &[DVector<T>], prior: &PriorSpec<T>) -> Result<()> {
        if self.xi[j] != UNASSIGNED {
            return Err(Error::Input(format!("time {} is already assigned", j + 1)));
        }
        if label >= self.states.len() {
            return Err(Error::Input(format!("no state {}", label + 1)));
        }
        let (prev, next) = self.neighbors(j);
        if let Some(p) = prev.filter(|&p| p != UNASSIGNED) {
            self.counts[p][label] += 1;
        }
        if let Some(q) = next.filter(|&q| q != UNASSIGNED) {
            self.counts[label][q] += 1;
        }
        self.xi[j] = label;
        let xi = &self.xi;
        self.states[label].add(&data[j], prior, || Self::members(xi, data, label))
    }

    /// Warm start for a growing series: `data` holds one more row than the
    /// state, and the new last time stays in the previous time's state.
    pub fn append_time(&mut self, data: &[DVector<T>], prior: &PriorSpec<T>) -> Result<()> {
        let n = self.xi.len();
        if data.len() != n + 1 {
            return Err(Error::Input(format!("expected {} rows, got {}", n + 1, data.len())));
        }
        check_data(data, prior)?;
        let label = self.xi[n - 1];
        self.xi.push(UNASSIGNED);
        self.insert_time(n, label, data, prior)
    }

    fn transition_log_weights(&self, j: usize) -> Vec<T> {
        let (prev, next) = self.neighbors(j);
        let l_count = self.states.len();
        let alpha = self.alpha;
        let g = &self.gamma;
        let rem = g[l_count];
        let mut w = Vec::with_capacity(l_count + 1);
        for l in 0..l_count {
            let incoming = match prev {
                Some(p) => T::of_usize(self.counts[p][l]) + alpha * g[l],
                None => g[l],
            };
            let outgoing = match next {
                Some(q) => {
                    let same = usize::from(prev == Some(l));
                    let stay = usize::from(prev == Some(l) && q == l);
                    let out_total: usize = self.counts[l].iter().sum();
                    (T::of_usize(self.counts[l][q] + stay) + alpha * g[q]) / (T::of_usize(out_total + same) + alpha)
                }
                None => T::one(),
            };
            w.push(incoming.ln() + outgoing.ln());
        }
        let incoming = if prev.is_some() { alpha * rem } else { rem };
        let outgoing = match next {
            Some(q) => g[q],
            None => T::one(),
        };
        w.push(incoming.ln() + outgoing.ln());
        w
    }

    fn recompute_all(&mut self, data: &[DVector<T>], prior: &PriorSpec<T>) -> Result<()> {
        for k in 0..self.states.len() {
            let rows = Self::members(&self.xi, data, k);
            self.states[k].rebuild(rows, prior)?;
        }
        Ok(())
    }

    fn to_record<R: Rng + ?Sized>(
        &self,
        info: SweepInfo,
        prior: &PriorSpec<T>,
        sample_params: bool,
        rng: &mut R,
    ) -> Result<TraceRecord> {
        let params = if sample_params {
            Some(draw_params(self.states.iter().map(|c| (c.stats(), c.graph())), prior, rng)?)
        } else {
            None
        };
        Ok(TraceRecord {
            iteration: self.iteration,
            assignments: self.xi.iter().map(|&l| l + 1).collect(),
            graphs: self.states.iter().map(|c| TraceRecord::encode_graph(c.graph())).collect(),
            alpha0: self.alpha0.as_f64(),
            alpha: Some(self.alpha.as_f64()),
            gamma: Some(self.gamma.iter().map(|v| v.as_f64()).collect()),
            mh_accepted: info.mh_accepted,
            mh_proposed: info.mh_proposed,
            params,
        })
    }
}

/// Transition counts of a complete trajectory with `l` states.
pub fn recount(xi: &[usize], l: usize) -> Vec<Vec<usize>> {
    let mut c = vec![vec![0; l]; l];
    for w in xi.windows(2) {
        c[w[0]][w[1]] += 1;
    }
    c
}

/// Log weights for time `j`, which must currently be removed: one entry per
/// existing state (transition factors times the emission predictive) and a
/// last entry for a new state with graph `new_graph`.
///
/// At the first time point the incoming factor is the base weight `gamma_l`;
/// at the last the outgoing factor is dropped.
pub fn state_log_weights<T: Real>(
    j: usize,
    state: &HmmState<T>,
    data: &[DVector<T>],
    prior: &PriorSpec<T>,
    new_graph: &DecomposableGraph,
) -> Result<Vec<T>> {
    if state.xi[j] != UNASSIGNED {
        return Err(Error::Input(format!("time {} must be removed first", j + 1)));
    }
    let fresh = PriorPredictive::new(prior).log_predictive(&new_graph.decompose(), &data[j])?;
    Ok(state.emission_weights(j, &data[j], fresh))
}

impl<T: Real> HmmState<T> {
    fn emission_weights(&self, j: usize, x: &DVector<T>, fresh_log_pred: T) -> Vec<T> {
        let mut w = self.transition_log_weights(j);
        let l = self.states.len();
        for (wk, s) in w.iter_mut().zip(&self.states) {
            *wk += s.log_predictive(x);
        }
        w[l] += fresh_log_pred;
        w
    }
}

/// Resamples the trajectory once, in time order.
pub fn trajectory_sweep<T: Real, R: Rng + ?Sized>(
    state: &mut HmmState<T>,
    data: &[DVector<T>],
    prior: &PriorSpec<T>,
    graph_prior: &GraphPrior,
    spawn: SpawnRule,
    rng: &mut R,
) -> Result<()> {
    let p = prior.dim();
    let mut prior_pred = PriorPredictive::new(prior);
    for j in 0..data.len() {
        state.remove_time(j, data, prior)?;
        let g = graph_prior.sample(p, rng)?;
        let seq = g.decompose();
        let fresh = prior_pred.log_predictive(&seq, &data[j])?;
        let w = state.emission_weights(j, &data[j], fresh);
        let label = sample_log_categorical(&w, rng)?;
        if label == state.states.len() {
            let v = spawn_fraction(spawn, state.alpha0, rng)?;
            state.push_state(Component::empty_with(g, seq, prior)?, v);
        }
        state.insert_time(j, label, data, prior)?;
    }
    Ok(())
}

/// Table counts, base weights and both concentrations given the trajectory.
pub fn update_hyperparameters<T: Real, R: Rng + ?Sized>(
    state: &mut HmmState<T>,
    config: &IhmmConfig,
    table: &LogStirling1Table<T>,
    rng: &mut R,
) -> Result<()> {
    state.m = sample_m(&state.counts, state.alpha, &state.gamma, table, rng)?;
    let initial = state.xi.first().copied();
    state.gamma = update_gamma(&state.m, initial, state.alpha0, rng)?;
    let transitions: usize = state.m.iter().flatten().sum();
    if config.resample_alpha {
        state.alpha = sample_alpha_from(&state.row_totals(), transitions, &config.alpha_prior, state.alpha, rng)?;
    }
    if config.resample_alpha0 {
        let tables = transitions + usize::from(initial.is_some());
        state.alpha0 = sample_alpha0_ihmm(state.num_states(), tables, &config.alpha0_prior, state.alpha0, rng)?;
    }
    Ok(())
}

/// One full iteration: trajectory, graphs, then hyperparameters.
pub fn sweep<T: Real, R: Rng + ?Sized>(
    state: &mut HmmState<T>,
    data: &[DVector<T>],
    prior: &PriorSpec<T>,
    config: &IhmmConfig,
    table: &LogStirling1Table<T>,
    rng: &mut R,
) -> Result<SweepInfo> {
    trajectory_sweep(state, data, prior, &config.graph_prior, config.spawn, rng)?;
    let mut info = SweepInfo::default();
    for s in &mut state.states {
        let (g, accepted) =
            mh_graph_update(s.graph(), s.stats(), prior, &config.graph_prior, config.graph_mh_repeats, rng)?;
        info.mh_accepted += accepted;
        info.mh_proposed += if config.graph_prior.is_fixed() { 0 } else { config.graph_mh_repeats };
        if accepted > 0 {
            s.set_graph(g, prior)?;
        }
    }
    update_hyperparameters(state, config, table, rng)?;
    state.iteration += 1;
    if config.recompute_every > 0 && state.iteration.is_multiple_of(config.recompute_every) {
        state.recompute_all(data, prior)?;
    }
    Ok(info)
}

/// Continues a chain from `state`, returning the retained records.
pub fn continue_ihmm<T: Real, R: Rng + ?Sized>(
    state: &mut HmmState<T>,
    data: &[DVector<T>],
    prior: &PriorSpec<T>,
    config: &IhmmConfig,
    chain: &ChainSettings,
    rng: &mut R,
) -> Result<Vec<TraceRecord>> {
    chain.validate()?;
    let table = LogStirling1Table::new(data.len());
    let mut trace = Vec::with_capacity(chain.retained());
    for it in 1..=chain.sweeps {
        let info = sweep(state, data, prior, config, &table, rng)?;
        if chain.retains(it) {
            trace.push(state.to_record(info, prior, config.sample_params, rng)?);
        }
    }
    Ok(trace)
}

/// Runs the iHMM sampler from a single-state start.
pub fn run_ihmm<T: Real, R: Rng + ?Sized>(
    data: &[DVector<T>],
    prior: &PriorSpec<T>,
    config: &IhmmConfig,
    chain: &ChainSettings,
    rng: &mut R,
) -> Result<Vec<TraceRecord>> {
    config.validate()?;
    let mut state = HmmState::new(data, prior, T::of(config.alpha), T::of(config.alpha0))?;
    if config.graph_prior.is_fixed() {
        state.set_state_graph(0, config.graph_prior.initial(prior.dim())?, prior)?;
    }
    continue_ihmm(&mut state, data, prior, config, chain, rng)
}

#[cfg(test)]
mod tests;
