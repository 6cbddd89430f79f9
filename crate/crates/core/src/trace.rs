use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DecomposableGraph;

/// Length and retention pattern of one MCMC run. `sweeps` counts all
/// iterations, burn-in included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSettings {
    pub sweeps: usize,
    pub burnin: usize,
    pub thin: usize,
}

impl ChainSettings {
    pub fn new(sweeps: usize, burnin: usize, thin: usize) -> Result<Self> {
        let s = Self { sweeps, burnin, thin };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps <= self.burnin {
            return Err(Error::Config(format!("sweeps ({}) must exceed burnin ({})", self.sweeps, self.burnin)));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        Ok(())
    }

    /// Whether 1-based iteration `it` is kept.
    pub fn retains(&self, it: usize) -> bool {
        it > self.burnin && (it - self.burnin).is_multiple_of(self.thin)
    }

    pub fn retained(&self) -> usize {
        (self.sweeps - self.burnin) / self.thin
    }
}

/// Gamma prior with shape `a` and rate `b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammaPrior {
    pub a: f64,
    pub b: f64,
}

impl GammaPrior {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let g = Self { a, b };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0) {
            return Err(Error::Config(format!(
                "gamma prior needs positive shape and rate, got ({}, {})",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

impl Default for GammaPrior {
    fn default() -> Self {
        Self { a: 1.0, b: 1.0 }
    }
}

/// Sampled mean and precision of one cluster.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub mean: Vec<f64>,
    /// Row-major `p x p`.
    pub precision: Vec<f64>,
}

/// One retained sweep. Labels, vertices and edges are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub assignments: Vec<usize>,
    pub graphs: Vec<Vec<[usize; 2]>>,
    pub alpha0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    pub mh_accepted: usize,
    pub mh_proposed: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<ClusterParams>>,
}

impl TraceRecord {
    pub fn num_clusters(&self) -> usize {
        self.graphs.len()
    }

    /// 0-based label of every observation.
    pub fn labels(&self) -> Vec<usize> {
        self.assignments.iter().map(|&l| l - 1).collect()
    }

    pub fn graph(&self, label: usize, p: usize) -> Result<DecomposableGraph> {
        let edges: Vec<(usize, usize)> = self.graphs[label].iter().map(|&[i, j]| (i - 1, j - 1)).collect();
        DecomposableGraph::new(p, &edges)
    }

    pub(crate) fn encode_graph(g: &DecomposableGraph) -> Vec<[usize; 2]> {
        g.edges().into_iter().map(|(i, j)| [i + 1, j + 1]).collect()
    }
}
