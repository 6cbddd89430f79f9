use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DecomposableGraph;
use crate::scalar::Real;

/// Prior over decomposable graphs on a fixed vertex set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GraphPrior {
    #[default]
    Uniform,
    /// Each edge present independently with probability `q`, restricted to
    /// decomposable graphs.
    Bernoulli { q: f64 },
    /// Point mass on the complete graph; structure is never learned.
    Complete,
}

impl GraphPrior {
    pub fn bernoulli(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("edge probability must lie in (0, 1), got {q}")));
        }
        Ok(Self::Bernoulli { q })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Uniform | Self::Complete => Ok(()),
            Self::Bernoulli { q } => Self::bernoulli(q).map(|_| ()),
        }
    }

    /// Graph every chain starts from.
    pub fn initial(&self, p: usize) -> Result<DecomposableGraph> {
        match self {
            Self::Complete => DecomposableGraph::complete(p),
            _ => DecomposableGraph::empty(p),
        }
    }

    /// Whether the graph is ever moved.
    pub fn is_fixed(&self) -> bool {
        *self == Self::Complete
    }

    /// Unnormalized log prior mass.
    pub fn log_prior<T: Real>(&self, g: &DecomposableGraph) -> T {
        match *self {
            Self::Uniform => T::zero(),
            Self::Complete => {
                if g.edge_count() == g.order() * g.order().saturating_sub(1) / 2 {
                    T::zero()
                } else {
                    T::neg_infinity()
                }
            }
            Self::Bernoulli { q } => {
                let p = g.order();
                let edges = g.edge_count() as f64;
                let pairs = (p * p.saturating_sub(1) / 2) as f64;
                T::of(edges * q.ln() + (pairs - edges) * (1.0 - q).ln())
            }
        }
    }

    /// Approximate draw: a random walk of `3p` Metropolis steps started at
    /// the empty graph, each proposing to flip a uniformly chosen vertex pair.
    pub fn sample<R: Rng + ?Sized>(&self, p: usize, rng: &mut R) -> Result<DecomposableGraph> {
        if *self == Self::Complete {
            return DecomposableGraph::complete(p);
        }
        let mut g = DecomposableGraph::empty(p)?;
        self.walk(&mut g, 3 * p, rng);
        Ok(g)
    }

    /// Runs `steps` prior-invariant moves from `g` in place.
    pub fn walk<R: Rng + ?Sized>(&self, g: &mut DecomposableGraph, steps: usize, rng: &mut R) {
        let p = g.order();
        if p < 2 || *self == Self::Complete {
            return;
        }
        for _ in 0..steps {
            let i = rng.random_range(0..p);
            let mut j = rng.random_range(0..p - 1);
            if j >= i {
                j += 1;
            }
            if !g.can_flip(i, j) {
                continue;
            }
            let accept = match *self {
                Self::Uniform | Self::Complete => true,
                Self::Bernoulli { q } => {
                    let odds = if g.has_edge(i, j) { (1.0 - q) / q } else { q / (1.0 - q) };
                    odds >= 1.0 || rng.random::<f64>() < odds
                }
            };
            if accept {
                g.toggle_unchecked(i, j);
            }
        }
    }
}
