//! Collapsed Gibbs sampling for Dirichlet-process and Pitman-Yor mixtures of
//! decomposable Gaussian graphical models.

mod concentration;
mod graph_prior;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use crate::component::mh_graph_update;
pub(crate) use concentration::sample_concentration;
pub use concentration::{alpha0_mixture_weight, dp_prior_cluster_count_mean, sample_alpha0_dpm};
pub use graph_prior::GraphPrior;

use crate::component::{Component, PriorPredictive};
use crate::error::{Error, Result};
use crate::graph::DecomposableGraph;
use crate::gwishart::{sample_posterior, ClusterStats, PriorSpec};
use crate::numeric::sample_log_categorical;
use crate::scalar::Real;
use crate::trace::{ChainSettings, ClusterParams, GammaPrior, TraceRecord};

#[cfg(test)]
pub(crate) use concentration::tests::{ks_distance, quadrature_cdf};

const UNASSIGNED: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixtureConfig {
    pub alpha0: f64,
    pub alpha0_prior: GammaPrior,
    /// Resample `alpha0` each sweep (DP only; it stays fixed when
    /// `discount > 0`).
    pub resample_alpha0: bool,
    pub discount: f64,
    pub graph_mh_repeats: usize,
    pub graph_prior: GraphPrior,
    /// Sweeps between full recomputations of the cluster statistics.
    pub recompute_every: usize,
    /// Draw `(mu, K)` for each cluster into the trace.
    pub sample_params: bool,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        Self {
            alpha0: 1.0,
            alpha0_prior: GammaPrior::default(),
            resample_alpha0: true,
            discount: 0.0,
            graph_mh_repeats: 5,
            graph_prior: GraphPrior::Uniform,
            recompute_every: 100,
            sample_params: false,
        }
    }
}

impl MixtureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.discount >= 0.0 && self.discount < 1.0) {
            return Err(Error::Config(format!("discount must lie in [0, 1), got {}", self.discount)));
        }
        if !(self.alpha0 > 0.0) {
            return Err(Error::Config(format!("alpha0 must be positive, got {}", self.alpha0)));
        }
        self.alpha0_prior.validate()?;
        self.graph_prior.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

/// Moves made during one sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepInfo {
    pub mh_accepted: usize,
    pub mh_proposed: usize,
}

#[derive(Clone, Debug)]
pub struct MixtureState<T: Real = f64> {
    xi: Vec<usize>,
    clusters: Vec<Component<T>>,
    alpha0: T,
    discount: T,
    iteration: usize,
}

pub(crate) fn check_data<T: Real>(data: &[DVector<T>], prior: &PriorSpec<T>) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Input("no observations".into()));
    }
    if let Some(row) = data.iter().position(|x| x.len() != prior.dim()) {
        return Err(Error::Input(format!(
            "observation {} has length {}, expected {}",
            row + 1,
            data[row].len(),
            prior.dim()
        )));
    }
    Ok(())
}

impl<T: Real> MixtureState<T> {
    /// All observations in one cluster with the empty graph.
    pub fn new(data: &[DVector<T>], prior: &PriorSpec<T>, alpha0: T, discount: T) -> Result<Self> {
        check_data(data, prior)?;
        if !(discount >= T::zero() && discount < T::one()) {
            return Err(Error::Domain(format!("discount must lie in [0, 1), got {discount}")));
        }
        if !(alpha0 > T::zero()) {
            return Err(Error::Domain(format!("alpha0 must be positive, got {alpha0}")));
        }
        let stats = ClusterStats::from_rows(prior.dim(), data);
        let cluster = Component::new(DecomposableGraph::empty(prior.dim())?, stats, prior)?;
        Ok(Self { xi: vec![0; data.len()], clusters: vec![cluster], alpha0, discount, iteration: 0 })
    }

    /// Builds a state from 0-based labels and graphs.
    pub fn from_assignments(
        data: &[DVector<T>],
        prior: &PriorSpec<T>,
        labels: &[usize],
        graphs: Vec<DecomposableGraph>,
        alpha0: T,
        discount: T,
    ) -> Result<Self> {
        check_data(data, prior)?;
        let mut s = Self::new(data, prior, alpha0, discount)?;
        if labels.len() != data.len() {
            return Err(Error::Input(format!("{} labels for {} observations", labels.len(), data.len())));
        }
        let l = graphs.len();
        let mut clusters = Vec::with_capacity(l);
        for (k, g) in graphs.into_iter().enumerate() {
            let rows: Vec<&DVector<T>> = data.iter().zip(labels).filter(|(_, &c)| c == k).map(|(x, _)| x).collect();
            if rows.is_empty() {
                return Err(Error::Input(format!("cluster {} is empty", k + 1)));
            }
            clusters.push(Component::new(g, ClusterStats::from_rows(prior.dim(), rows), prior)?);
        }
        if labels.iter().any(|&c| c >= l) {
            return Err(Error::Input("label exceeds the number of graphs".into()));
        }
        s.xi = labels.to_vec();
        s.clusters = clusters;
        Ok(s)
    }

    /// 0-based cluster label of every observation.
    pub fn assignments(&self) -> &[usize] {
        &self.xi
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn graph(&self, l: usize) -> &DecomposableGraph {
        self.clusters[l].graph()
    }

    pub fn cluster_stats(&self, l: usize) -> &ClusterStats<T> {
        self.clusters[l].stats()
    }

    /// Replaces the graph of cluster `l`.
    pub fn set_cluster_graph(&mut self, l: usize, g: DecomposableGraph, prior: &PriorSpec<T>) -> Result<()> {
        self.clusters.get_mut(l).ok_or_else(|| Error::Input(format!("no cluster {}", l + 1)))?.set_graph(g, prior)
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.count()).collect()
    }

    pub fn alpha0(&self) -> T {
        self.alpha0
    }

    pub fn set_alpha0(&mut self, alpha0: T) {
        self.alpha0 = alpha0;
    }

    pub fn discount(&self) -> T {
        self.discount
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    fn members<'a>(xi: &[usize], data: &'a [DVector<T>], k: usize) -> Vec<&'a DVector<T>> {
        data.iter().zip(xi).filter(|(_, &l)| l == k).map(|(x, _)| x).collect()
    }

    /// Takes observation `j` out of its cluster, deleting the cluster if it
    /// empties (the last cluster takes over its label).
    pub fn remove_observation(&mut self, j: usize, data: &[DVector<T>], prior: &PriorSpec<T>) -> Result<()> {
        let k = self.xi[j];
        if k == UNASSIGNED {
            return Err(Error::Input(format!("observation {} is not assigned", j + 1)));
        }
        self.xi[j] = UNASSIGNED;
        let xi = &self.xi;
        self.clusters[k].remove(&data[j], prior, || Self::members(xi, data, k))?;
        if self.clusters[k].count() == 0 {
            self.clusters.swap_remove(k);
            let moved = self.clusters.len();
            if k != moved {
                for l in self.xi.iter_mut().filter(|l| **l == moved) {
                    *l = k;
                }
            }
        }
        Ok(())
    }

    /// Puts observation `j` into cluster `label`, or into a new cluster with
    /// graph `new_graph` when `label == num_clusters()`.
    pub fn insert_observation(
        &mut self,
        j: usize,
        label: usize,
        new_graph: Option<DecomposableGraph>,
        data: &[DVector<T>],
        prior: &PriorSpec<T>,
    ) -> Result<()> {
        if self.xi[j] != UNASSIGNED {
            return Err(Error::Input(format!("observation {} is already assigned", j + 1)));
        }
        if label == self.clusters.len() {
            let g = match new_graph {
                Some(g) => g,
                None => DecomposableGraph::empty(prior.dim())?,
            };
            self.clusters.push(Component::empty(g, prior)?);
        } else if label > self.clusters.len() {
            return Err(Error::Input(format!("no cluster {}", label + 1)));
        }
        self.xi[j] = label;
        let xi = &self.xi;
        self.clusters[label].add(&data[j], prior, || Self::members(xi, data, label))
    }

    /// Warm start for a growing data set: `data` holds one more row than the
    /// state, and that row joins the cluster of the row before it.
    pub fn append_observation(&mut self, data: &[DVector<T>], prior: &PriorSpec<T>) -> Result<()> {
        let n = self.xi.len();
        if data.len() != n + 1 {
            return Err(Error::Input(format!("expected {} rows, got {}", n + 1, data.len())));
        }
        check_data(data, prior)?;
        let label = self.xi[n - 1];
        self.xi.push(UNASSIGNED);
        self.insert_observation(n, label, None, data, prior)
    }

    fn urn_weights_with(&self, x: &DVector<T>, fresh_log_pred: T) -> Vec<T> {
        let l = self.clusters.len();
        let mut w = Vec::with_capacity(l + 1);
        for c in &self.clusters {
            w.push((T::of_usize(c.count()) - self.discount).ln() + c.log_predictive(x));
        }
        w.push((self.alpha0 + self.discount * T::of_usize(l)).ln() + fresh_log_pred);
        w
    }

    fn recompute_all(&mut self, data: &[DVector<T>], prior: &PriorSpec<T>) -> Result<()> {
        for k in 0..self.clusters.len() {
            let rows = Self::members(&self.xi, data, k);
            self.clusters[k].rebuild(rows, prior)?;
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
            Some(draw_params(self.clusters.iter().map(|c| (c.stats(), c.graph())), prior, rng)?)
        } else {
            None
        };
        Ok(TraceRecord {
            iteration: self.iteration,
            assignments: self.xi.iter().map(|&l| l + 1).collect(),
            graphs: self.clusters.iter().map(|c| TraceRecord::encode_graph(c.graph())).collect(),
            alpha0: self.alpha0.as_f64(),
            alpha: None,
            gamma: None,
            mh_accepted: info.mh_accepted,
            mh_proposed: info.mh_proposed,
            params,
        })
    }
}

pub(crate) fn draw_params<'a, T: Real + 'a, R: Rng + ?Sized>(
    clusters: impl Iterator<Item = (&'a ClusterStats<T>, &'a DecomposableGraph)>,
    prior: &PriorSpec<T>,
    rng: &mut R,
) -> Result<Vec<ClusterParams>> {
    clusters
        .map(|(stats, g)| {
            let (mu, k) = sample_posterior(stats, g, prior, rng)?;
            Ok(ClusterParams {
                mean: mu.iter().map(|v| v.as_f64()).collect(),
                precision: k.transpose().iter().map(|v| v.as_f64()).collect(),
            })
        })
        .collect()
}

/// Log urn weights for observation `j`, which must currently be removed:
/// `log(r_l - d) + log p(x_j | cluster l)` for every cluster and
/// `log(alpha0 + d L) + log p(x_j | G_new)` for a new one.
pub fn urn_log_weights<T: Real>(
    j: usize,
    state: &MixtureState<T>,
    data: &[DVector<T>],
    prior: &PriorSpec<T>,
    new_graph: &DecomposableGraph,
) -> Result<Vec<T>> {
    if state.xi[j] != UNASSIGNED {
        return Err(Error::Input(format!("observation {} must be removed first", j + 1)));
    }
    let fresh = PriorPredictive::new(prior).log_predictive(&new_graph.decompose(), &data[j])?;
    Ok(state.urn_weights_with(&data[j], fresh))
}

/// Resamples every assignment once, in index order.
pub fn gibbs_sweep<T: Real, R: Rng + ?Sized>(
    state: &mut MixtureState<T>,
    data: &[DVector<T>],
    prior: &PriorSpec<T>,
    graph_prior: &GraphPrior,
    rng: &mut R,
) -> Result<()> {
    let p = prior.dim();
    let mut prior_pred = PriorPredictive::new(prior);
    for j in 0..data.len() {
        state.remove_observation(j, data, prior)?;
        let g = graph_prior.sample(p, rng)?;
        let seq = g.decompose();
        let fresh = prior_pred.log_predictive(&seq, &data[j])?;
        let w = state.urn_weights_with(&data[j], fresh);
        let label = sample_log_categorical(&w, rng)?;
        if label == state.clusters.len() {
            state.clusters.push(Component::empty_with(g, seq, prior)?);
        }
        state.insert_observation(j, label, None, data, prior)?;
    }
    Ok(())
}

/// Runs the graph move on every cluster.
pub fn update_graphs<T: Real, R: Rng + ?Sized>(
    state: &mut MixtureState<T>,
    prior: &PriorSpec<T>,
    graph_prior: &GraphPrior,
    repeats: usize,
    rng: &mut R,
) -> Result<SweepInfo> {
    let mut info = SweepInfo::default();
    for c in &mut state.clusters {
        let (g, accepted) = mh_graph_update(c.graph(), c.stats(), prior, graph_prior, repeats, rng)?;
        info.mh_accepted += accepted;
        info.mh_proposed += if graph_prior.is_fixed() { 0 } else { repeats };
        if accepted > 0 {
            c.set_graph(g, prior)?;
        }
    }
    Ok(info)
}

/// One full iteration: assignments, graphs, then `alpha0`.
pub fn sweep<T: Real, R: Rng + ?Sized>(
    state: &mut MixtureState<T>,
    data: &[DVector<T>],
    prior: &PriorSpec<T>,
    config: &MixtureConfig,
    rng: &mut R,
) -> Result<SweepInfo> {
    gibbs_sweep(state, data, prior, &config.graph_prior, rng)?;
    let info = update_graphs(state, prior, &config.graph_prior, config.graph_mh_repeats, rng)?;
    if config.resample_alpha0 && state.discount == T::zero() {
        state.alpha0 = sample_alpha0_dpm(state.num_clusters(), data.len(), &config.alpha0_prior, state.alpha0, rng)?;
    }
    state.iteration += 1;
    if config.recompute_every > 0 && state.iteration.is_multiple_of(config.recompute_every) {
        state.recompute_all(data, prior)?;
    }
    Ok(info)
}

/// Continues a chain from `state`, returning the retained records.
pub fn continue_dpm<T: Real, R: Rng + ?Sized>(
    state: &mut MixtureState<T>,
    data: &[DVector<T>],
    prior: &PriorSpec<T>,
    config: &MixtureConfig,
    chain: &ChainSettings,
    rng: &mut R,
) -> Result<Vec<TraceRecord>> {
    chain.validate()?;
    let mut trace = Vec::with_capacity(chain.retained());
    for it in 1..=chain.sweeps {
        let info = sweep(state, data, prior, config, rng)?;
        if chain.retains(it) {
            trace.push(state.to_record(info, prior, config.sample_params, rng)?);
        }
    }
    Ok(trace)
}

/// Runs a DP (or Pitman-Yor, when `discount > 0`) mixture sampler from a
/// single-cluster start.
pub fn run_dpm<T: Real, R: Rng + ?Sized>(
    data: &[DVector<T>],
    prior: &PriorSpec<T>,
    config: &MixtureConfig,
    chain: &ChainSettings,
    rng: &mut R,
) -> Result<Vec<TraceRecord>> {
    config.validate()?;
    let mut state = MixtureState::new(data, prior, T::of(config.alpha0), T::of(config.discount))?;
    if config.graph_prior.is_fixed() {
        state.set_cluster_graph(0, config.graph_prior.initial(prior.dim())?, prior)?;
    }
    continue_dpm(&mut state, data, prior, config, chain, rng)
}

#[cfg(test)]
mod tests;
