use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::portfolio::{min_variance_weights, predictive_moments};
use crate::error::{Error, Result};
use crate::graph::DecomposableGraph;
use crate::gwishart::{ClusterStats, PriorSettings, PriorSpec};
use crate::ihmm::{continue_ihmm, HmmState, IhmmConfig};
use crate::io::chain_seed;
use crate::mixture::{continue_dpm, draw_params, mh_graph_update, GraphPrior, MixtureConfig, MixtureState};
use crate::trace::{ChainSettings, TraceRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BacktestModel {
    /// iHMM with graph learning.
    GgmIhmm,
    /// iHMM whose states all use the complete graph.
    FullGraphIhmm,
    /// One Gaussian graphical model for the whole series.
    SingleGgm,
    Dpm,
}

impl BacktestModel {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GgmIhmm => "ggm-ihmm",
            Self::FullGraphIhmm => "full-graph-ihmm",
            Self::SingleGgm => "single-ggm",
            Self::Dpm => "dpm",
        }
    }
}

/// Rolling window and chain lengths of a backtest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestWindow {
    /// Rows in the first fitting window.
    pub start: usize,
    /// Last fitting window size plus one; `None` runs to the end of the data.
    pub end: Option<usize>,
    pub target_return: f64,
    /// Chain for the first window.
    pub initial: ChainSettings,
    /// Chain continued after each new row.
    pub refit: ChainSettings,
}

impl Default for BacktestWindow {
    fn default() -> Self {
        Self {
            start: 20,
            end: None,
            target_return: 0.001,
            initial: ChainSettings { sweeps: 200, burnin: 100, thin: 1 },
            refit: ChainSettings { sweeps: 20, burnin: 10, thin: 1 },
        }
    }
}

impl BacktestWindow {
    pub fn validate(&self) -> Result<()> {
        self.initial.validate()?;
        self.refit.validate()?;
        if self.start < 2 || self.end.is_some_and(|e| e <= self.start) {
            return Err(Error::Config(format!(
                "backtest window must start at 2 or later and end after its start, got [{}, {:?})",
                self.start, self.end
            )));
        }
        Ok(())
    }

    fn bounds(&self, n: usize) -> Result<(usize, usize)> {
        let end = self.end.unwrap_or(n);
        if end > n {
            return Err(Error::Input(format!("backtest window ends at {end} but the data has {n} rows")));
        }
        if self.start < 2 || self.start >= end {
            return Err(Error::Input(format!("backtest window [{}, {end}) is empty or too short", self.start)));
        }
        Ok((self.start, end))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestConfig {
    pub window: BacktestWindow,
    pub prior: PriorSettings,
    pub ihmm: IhmmConfig,
    pub mixture: MixtureConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortfolioStep {
    /// Rows used for fitting; the return is realized on row `t + 1`
    /// (1-based).
    pub t: usize,
    pub weights: Vec<f64>,
    pub ret: f64,
    pub cumulative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortfolioTrace {
    pub model: BacktestModel,
    pub steps: Vec<PortfolioStep>,
}

impl PortfolioTrace {
    pub fn cumulative(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.cumulative)
    }
}

/// Shift and scale fixed on the first window. Columns that are constant
/// there are only centred.
struct Scaling {
    mean: DVector<f64>,
    sd: DVector<f64>,
}

impl Scaling {
    fn fit(rows: &[DVector<f64>]) -> Self {
        let n = rows.len() as f64;
        let p = rows[0].len();
        let mean = rows.iter().fold(DVector::zeros(p), |a, x| a + x) / n;
        let var = rows.iter().fold(DVector::zeros(p), |a: DVector<f64>, x| {
            let d = x - &mean;
            a + d.component_mul(&d)
        }) / (n - 1.0);
        let sd = var.map(|v| if v > 0.0 { v.sqrt() } else { 1.0 });
        Self { mean, sd }
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        (x - &self.mean).component_div(&self.sd)
    }
}

struct SingleGgm {
    graph: DecomposableGraph,
    stats: ClusterStats<f64>,
}

enum Fitter {
    Ihmm(HmmState<f64>, IhmmConfig),
    Dpm(MixtureState<f64>, MixtureConfig),
    Single(SingleGgm, GraphPrior, usize),
}

impl Fitter {
    fn new(
        model: BacktestModel,
        data: &[DVector<f64>],
        prior: &PriorSpec<f64>,
        config: &BacktestConfig,
    ) -> Result<Self> {
        let p = prior.dim();
        Ok(match model {
            BacktestModel::GgmIhmm | BacktestModel::FullGraphIhmm => {
                let mut cfg = IhmmConfig { sample_params: true, ..config.ihmm.clone() };
                if model == BacktestModel::FullGraphIhmm {
                    cfg.graph_prior = GraphPrior::Complete;
                }
                cfg.validate()?;
                let mut state = HmmState::new(data, prior, cfg.alpha, cfg.alpha0)?;
                if cfg.graph_prior.is_fixed() {
                    state.set_state_graph(0, cfg.graph_prior.initial(p)?, prior)?;
                }
                Fitter::Ihmm(state, cfg)
            }
            BacktestModel::Dpm => {
                let cfg = MixtureConfig { sample_params: true, ..config.mixture.clone() };
                cfg.validate()?;
                Fitter::Dpm(MixtureState::new(data, prior, cfg.alpha0, cfg.discount)?, cfg)
            }
            BacktestModel::SingleGgm => Fitter::Single(
                SingleGgm { graph: config.ihmm.graph_prior.initial(p)?, stats: ClusterStats::from_rows(p, data) },
                config.ihmm.graph_prior,
                config.ihmm.graph_mh_repeats,
            ),
        })
    }

    fn append(&mut self, data: &[DVector<f64>], prior: &PriorSpec<f64>) -> Result<()> {
        match self {
            Fitter::Ihmm(s, _) => s.append_time(data, prior),
            Fitter::Dpm(s, _) => s.append_observation(data, prior),
            Fitter::Single(s, _, _) => {
                s.stats.push(&data[data.len() - 1]);
                Ok(())
            }
        }
    }

    fn run<R: Rng + ?Sized>(
        &mut self,
        data: &[DVector<f64>],
        prior: &PriorSpec<f64>,
        chain: &ChainSettings,
        rng: &mut R,
    ) -> Result<Vec<TraceRecord>> {
        match self {
            Fitter::Ihmm(s, cfg) => continue_ihmm(s, data, prior, cfg, chain, rng),
            Fitter::Dpm(s, cfg) => continue_dpm(s, data, prior, cfg, chain, rng),
            Fitter::Single(s, graph_prior, repeats) => {
                chain.validate()?;
                let mut out = Vec::with_capacity(chain.retained());
                for it in 1..=chain.sweeps {
                    let (g, accepted) = mh_graph_update(&s.graph, &s.stats, prior, graph_prior, *repeats, rng)?;
                    s.graph = g;
                    if chain.retains(it) {
                        let params = draw_params(std::iter::once((&s.stats, &s.graph)), prior, rng)?;
                        out.push(TraceRecord {
                            iteration: it,
                            assignments: vec![1; data.len()],
                            graphs: vec![TraceRecord::encode_graph(&s.graph)],
                            // No new cluster: the urn weight of the existing one is 1.
                            alpha0: 0.0,
                            alpha: None,
                            gamma: None,
                            mh_accepted: accepted,
                            mh_proposed: if graph_prior.is_fixed() { 0 } else { *repeats },
                            params: Some(params),
                        });
                    }
                }
                Ok(out)
            }
        }
    }

    fn graph_prior(&self) -> GraphPrior {
        match self {
            Fitter::Ihmm(_, c) => c.graph_prior,
            Fitter::Dpm(_, c) => c.graph_prior,
            Fitter::Single(_, g, _) => *g,
        }
    }

    fn discount(&self) -> f64 {
        match self {
            Fitter::Dpm(_, c) => c.discount,
            _ => 0.0,
        }
    }
}

/// Rolling one-step-ahead portfolio. For each window size `T` the model is
/// refitted on the first `T` rows (warm-started from the previous window),
/// minimum-variance weights are formed from the predictive moments on the
/// original scale, and the return on row `T + 1` is accumulated additively.
/// The data are standardized with the mean and scale of the first window.
pub fn backtest<R: Rng + ?Sized>(
    raw: &[DVector<f64>],
    model: BacktestModel,
    config: &BacktestConfig,
    rng: &mut R,
) -> Result<PortfolioTrace> {
    let win = &config.window;
    let (start, end) = win.bounds(raw.len())?;
    let p = raw[0].len();
    if raw.iter().any(|x| x.len() != p) {
        return Err(Error::Input("rows differ in length".into()));
    }
    win.initial.validate()?;
    win.refit.validate()?;
    let scaling = Scaling::fit(&raw[..start]);
    let z: Vec<DVector<f64>> = raw.iter().map(|x| scaling.apply(x)).collect();
    let prior: PriorSpec<f64> = config.prior.spec(p)?;
    let mut fitter = Fitter::new(model, &z[..start], &prior, config)?;
    let scale = DMatrix::from_diagonal(&scaling.sd);
    let mut steps = Vec::with_capacity(end - start);
    let mut cumulative = 0.0;
    for t in start..end {
        let chain = if t == start {
            win.initial
        } else {
            fitter.append(&z[..t], &prior)?;
            win.refit
        };
        let trace = fitter.run(&z[..t], &prior, &chain, rng)?;
        let (mu, sigma) = predictive_moments(&trace, &prior, &fitter.graph_prior(), fitter.discount(), rng)?;
        let mu_raw = scaling.mean.clone() + mu.component_mul(&scaling.sd);
        let sigma_raw = &scale * sigma * &scale;
        let w = min_variance_weights(&mu_raw, &sigma_raw, win.target_return)?;
        let ret = w.dot(&raw[t]);
        cumulative += ret;
        steps.push(PortfolioStep { t, weights: w.iter().copied().collect(), ret, cumulative });
    }
    Ok(PortfolioTrace { model, steps })
}

/// The three-way comparison: graph-learning iHMM, complete-graph iHMM and a
/// single model. Model `k` runs on its own stream `chain_seed(seed, k)`.
pub fn backtest_comparison(raw: &[DVector<f64>], config: &BacktestConfig, seed: u64) -> Result<Vec<PortfolioTrace>> {
    [BacktestModel::GgmIhmm, BacktestModel::FullGraphIhmm, BacktestModel::SingleGgm]
        .into_iter()
        .enumerate()
        .map(|(k, model)| backtest(raw, model, config, &mut ChaCha8Rng::seed_from_u64(chain_seed(seed, k))))
        .collect()
}
