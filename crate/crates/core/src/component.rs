use std::collections::HashMap;

use nalgebra::DVector;
use rand::Rng;

use crate::error::Result;
use crate::graph::{CliqueSequence, DecomposableGraph};
use crate::gwishart::{
    log_norm_block, posterior_params, posterior_params_into, ClusterStats, Factorized, Posterior, PriorSpec,
};
use crate::linalg;
use crate::mixture::GraphPrior;
use crate::scalar::Real;

/// A cluster (or hidden state) with its graph, sufficient statistics and a
/// factorization of its posterior, kept in sync on every change.
#[derive(Clone, Debug)]
pub(crate) struct Component<T: Real> {
    graph: DecomposableGraph,
    seq: CliqueSequence,
    stats: ClusterStats<T>,
    post: Posterior<T>,
    fact: Factorized<T>,
}

impl<T: Real> Component<T> {
    pub fn new(graph: DecomposableGraph, stats: ClusterStats<T>, prior: &PriorSpec<T>) -> Result<Self> {
        let seq = graph.decompose();
        let post = posterior_params(&stats, prior);
        let fact = Factorized::new(&post, &seq)?;
        Ok(Self { graph, seq, stats, post, fact })
    }

    pub fn empty(graph: DecomposableGraph, prior: &PriorSpec<T>) -> Result<Self> {
        Self::new(graph, ClusterStats::empty(prior.dim()), prior)
    }

    /// A new empty component reusing an existing decomposition of `graph`.
    pub fn empty_with(graph: DecomposableGraph, seq: CliqueSequence, prior: &PriorSpec<T>) -> Result<Self> {
        let stats = ClusterStats::empty(prior.dim());
        let post = posterior_params(&stats, prior);
        let fact = Factorized::new(&post, &seq)?;
        Ok(Self { graph, seq, stats, post, fact })
    }

    pub fn graph(&self) -> &DecomposableGraph {
        &self.graph
    }

    pub fn stats(&self) -> &ClusterStats<T> {
        &self.stats
    }

    pub fn count(&self) -> usize {
        self.stats.count()
    }

    pub fn log_predictive(&self, x: &DVector<T>) -> T {
        self.fact.log_predictive(x)
    }

    fn refresh(&mut self, prior: &PriorSpec<T>) -> Result<()> {
        posterior_params_into(&self.stats, prior, &mut self.post);
        self.fact.refresh(&self.post)
    }

    /// Adds `x`; on a factorization failure the statistics are rebuilt from
    /// `members` (which must then include `x`) and the factorization retried.
    pub fn add<'a>(
        &mut self,
        x: &DVector<T>,
        prior: &PriorSpec<T>,
        members: impl FnOnce() -> Vec<&'a DVector<T>>,
    ) -> Result<()>
    where
        T: 'a,
    {
        self.stats.push(x);
        self.refresh_or_rebuild(prior, members)
    }

    pub fn remove<'a>(
        &mut self,
        x: &DVector<T>,
        prior: &PriorSpec<T>,
        members: impl FnOnce() -> Vec<&'a DVector<T>>,
    ) -> Result<()>
    where
        T: 'a,
    {
        self.stats.remove(x);
        self.refresh_or_rebuild(prior, members)
    }

    fn refresh_or_rebuild<'a>(
        &mut self,
        prior: &PriorSpec<T>,
        members: impl FnOnce() -> Vec<&'a DVector<T>>,
    ) -> Result<()>
    where
        T: 'a,
    {
        if self.refresh(prior).is_ok() {
            return Ok(());
        }
        self.rebuild(members(), prior)
    }

    /// Recomputes the statistics from scratch.
    pub fn rebuild<'a>(&mut self, rows: Vec<&'a DVector<T>>, prior: &PriorSpec<T>) -> Result<()>
    where
        T: 'a,
    {
        self.stats = ClusterStats::from_rows(prior.dim(), rows);
        self.refresh(prior)
    }

    pub fn set_graph(&mut self, graph: DecomposableGraph, prior: &PriorSpec<T>) -> Result<()> {
        self.seq = graph.decompose();
        self.graph = graph;
        posterior_params_into(&self.stats, prior, &mut self.post);
        self.fact = Factorized::new(&self.post, &self.seq)?;
        Ok(())
    }
}

/// Prior predictive density `log p(x | G)` of a single observation for
/// arbitrary graphs, with per-vertex-set Cholesky factors of `D0` memoized.
pub(crate) struct PriorPredictive<'a, T: Real> {
    prior: &'a PriorSpec<T>,
    pred_const: T,
    gamma_ratio: Vec<T>,
    cache: HashMap<u64, (Vec<T>, T)>,
    buf: Vec<T>,
}

impl<'a, T: Real> PriorPredictive<'a, T> {
    pub fn new(prior: &'a PriorSpec<T>) -> Self {
        let half = T::of(0.5);
        let p = prior.dim();
        let delta = prior.gwishart().delta();
        let kappa = prior.n0();
        let mut gamma_ratio = vec![T::zero()];
        if p >= 1 {
            gamma_ratio.push(((delta + T::one()) * half).ln_gamma() - (delta * half).ln_gamma());
        }
        for k in 2..=p {
            let prev = gamma_ratio[k - 2];
            gamma_ratio.push(prev + ((delta + T::of_usize(k - 2)) * half).ln());
        }
        Self {
            prior,
            pred_const: T::of_usize(p) * half * ((kappa / (kappa + T::one())).ln() - T::two_pi().ln()),
            gamma_ratio,
            cache: HashMap::new(),
            buf: vec![T::zero(); p],
        }
    }

    pub fn log_predictive(&mut self, seq: &CliqueSequence, x: &DVector<T>) -> Result<T> {
        let half = T::of(0.5);
        let delta = self.prior.gwishart().delta();
        let kappa = self.prior.n0();
        let c = kappa / (kappa + T::one());
        let mu0 = self.prior.mu0();
        let mut total = self.pred_const;
        let sets = seq.cliques.iter().map(|s| (s, T::one())).chain(seq.separators.iter().map(|s| (s, -T::one())));
        for (set, sign) in sets {
            let k = set.len();
            let key = set.iter().fold(0u64, |acc, &v| acc | (1u64 << v));
            if !self.cache.contains_key(&key) {
                let mut chol = linalg::principal(self.prior.gwishart().scale(), set);
                if !linalg::cholesky_in_place(&mut chol, k) {
                    return Err(linalg::not_pd(set));
                }
                let log_det = linalg::chol_log_det(&chol, k);
                let kt = T::of_usize(k);
                let block_const = kt * half * T::ln_2() + self.gamma_ratio[k] - half * log_det;
                self.cache.insert(key, (chol, block_const));
            }
            let (chol, block_const) = &self.cache[&key];
            let z = &mut self.buf[..k];
            for (zi, &i) in z.iter_mut().zip(set) {
                *zi = x[i] - mu0[i];
            }
            linalg::forward_solve(chol, k, z);
            let q: T = z.iter().map(|&v| v * v).sum();
            total += sign * (*block_const - (delta + T::of_usize(k)) * half * (c * q).ln_1p());
        }
        Ok(total)
    }
}

/// Graph-dependent part of the log marginal likelihood of one cluster:
/// `log I_G(delta_n, D_n) - log I_G(delta0, D0)`, with per-vertex-set terms
/// memoized across the proposals of one update.
pub(crate) struct GraphScore<'a, T: Real> {
    post_delta: T,
    post_scale: nalgebra::DMatrix<T>,
    prior: &'a PriorSpec<T>,
    empty: bool,
    cache: HashMap<u64, T>,
}

impl<'a, T: Real> GraphScore<'a, T> {
    pub fn new(stats: &ClusterStats<T>, prior: &'a PriorSpec<T>) -> Self {
        let post = posterior_params(stats, prior);
        Self { post_delta: post.delta, post_scale: post.scale, prior, empty: stats.count() == 0, cache: HashMap::new() }
    }

    fn block(&mut self, set: &[usize]) -> Result<T> {
        let key = set.iter().fold(0u64, |acc, &v| acc | (1u64 << v));
        if let Some(&v) = self.cache.get(&key) {
            return Ok(v);
        }
        let gw = self.prior.gwishart();
        let k = set.len();
        let post = log_norm_block(self.post_delta, k, linalg::principal_log_det(&self.post_scale, set)?)?;
        let prior = log_norm_block(gw.delta(), k, linalg::principal_log_det(gw.scale(), set)?)?;
        self.cache.insert(key, post - prior);
        Ok(post - prior)
    }

    pub fn score(&mut self, g: &DecomposableGraph) -> Result<T> {
        if self.empty {
            return Ok(T::zero());
        }
        let seq = g.decompose();
        let mut total = T::zero();
        for c in &seq.cliques {
            total += self.block(c)?;
        }
        for s in &seq.separators {
            total -= self.block(s)?;
        }
        Ok(total)
    }
}

/// Metropolis-Hastings over decomposable graphs for one cluster's data,
/// proposing uniformly from the single-edge neighborhood. Returns the final
/// graph and the number of accepted moves.
pub fn mh_graph_update<T: Real, R: Rng + ?Sized>(
    graph: &DecomposableGraph,
    stats: &ClusterStats<T>,
    prior: &PriorSpec<T>,
    graph_prior: &GraphPrior,
    repeats: usize,
    rng: &mut R,
) -> Result<(DecomposableGraph, usize)> {
    if graph_prior.is_fixed() {
        return Ok((graph.clone(), 0));
    }
    let mut scorer = GraphScore::new(stats, prior);
    let mut current = graph.clone();
    let mut current_score = scorer.score(&current)? + graph_prior.log_prior::<T>(&current);
    let mut accepted = 0;
    for _ in 0..repeats {
        let Some(prop) = current.uniform_neighbor(rng) else {
            break;
        };
        let score = scorer.score(&prop.graph)? + graph_prior.log_prior::<T>(&prop.graph);
        let log_ratio =
            score - current_score + T::of_usize(prop.current_size).ln() - T::of_usize(prop.proposal_size).ln();
        if log_ratio >= T::zero() || T::of(rng.random::<f64>()).ln() < log_ratio {
            current = prop.graph;
            current_score = score;
            accepted += 1;
        }
    }
    Ok((current, accepted))
}
