//! Synthetic data from Gaussian graphical models.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;
use crate::numeric::std_normal;
use crate::scalar::Real;

/// Mean, precision and the graph of the precision's nonzero pattern. The
/// graph need not be decomposable.
#[derive(Clone, Debug, PartialEq)]
pub struct GgmSpec<T: Real = f64> {
    mu: DVector<T>,
    precision: DMatrix<T>,
    graph: UndirectedGraph,
    chol: DMatrix<T>,
}

impl<T: Real> GgmSpec<T> {
    /// Checks that `precision` is symmetric positive definite and zero at
    /// every non-edge of `graph`.
    pub fn new(mu: DVector<T>, precision: DMatrix<T>, graph: UndirectedGraph) -> Result<Self> {
        let p = mu.len();
        if precision.nrows() != p || precision.ncols() != p || graph.order() != p {
            return Err(Error::Input(format!(
                "mean of length {p}, precision {}x{}, graph on {} vertices",
                precision.nrows(),
                precision.ncols(),
                graph.order()
            )));
        }
        for i in 0..p {
            for j in 0..i {
                if precision[(i, j)] != precision[(j, i)] {
                    return Err(Error::Input(format!("precision is not symmetric at ({}, {})", i + 1, j + 1)));
                }
                if !graph.has_edge(i, j) && precision[(i, j)] != T::zero() {
                    return Err(Error::Structure(format!("precision is nonzero at non-edge ({}, {})", i + 1, j + 1)));
                }
            }
        }
        let chol = precision
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Numeric("precision matrix is not positive definite".into()))?
            .unpack();
        Ok(Self { mu, precision, graph, chol })
    }

    pub fn mu(&self) -> &DVector<T> {
        &self.mu
    }

    pub fn precision(&self) -> &DMatrix<T> {
        &self.precision
    }

    pub fn graph(&self) -> &UndirectedGraph {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

/// `n` independent draws from `N(mu, K^-1)`: with `K = L L^T`, `L^T y = z`
/// gives `cov(y) = K^-1`.
pub fn sample_ggm<T: Real, R: Rng + ?Sized>(spec: &GgmSpec<T>, n: usize, rng: &mut R) -> Vec<DVector<T>> {
    let p = spec.dim();
    let upper = spec.chol.transpose();
    (0..n)
        .map(|_| {
            let z = DVector::from_fn(p, |_, _| std_normal::<T, R>(rng));
            let y = upper.solve_upper_triangular(&z).expect("Cholesky factor has a positive diagonal");
            y + &spec.mu
        })
        .collect()
}

/// Unit diagonal plus `coupling` on every edge of `graph`.
pub fn coupled_precision<T: Real>(graph: &UndirectedGraph, coupling: T) -> DMatrix<T> {
    let p = graph.order();
    let mut k = DMatrix::identity(p, p);
    for (i, j) in graph.edges() {
        k[(i, j)] = coupling;
        k[(j, i)] = coupling;
    }
    k
}

/// Star centered on the first vertex.
pub fn star_graph(p: usize) -> Result<UndirectedGraph> {
    let edges: Vec<_> = (1..p).map(|j| (0, j)).collect();
    UndirectedGraph::from_edges(p, &edges)
}

/// Two-cluster benchmark: 100 draws from a 10-dimensional star model with
/// mean 0.5 followed by 100 from a 10-cycle model with mean -0.5, all
/// couplings 0.3 and unit diagonals.
#[derive(Clone, Debug)]
pub struct SimulationDataset {
    pub data: Vec<DVector<f64>>,
    /// 0-based generating cluster of each row.
    pub labels: Vec<usize>,
    pub specs: Vec<GgmSpec<f64>>,
}

impl SimulationDataset {
    pub fn graphs(&self) -> Vec<&UndirectedGraph> {
        self.specs.iter().map(|s| s.graph()).collect()
    }
}

pub fn simulation_specs() -> Result<Vec<GgmSpec<f64>>> {
    let p = 10;
    let star = star_graph(p)?;
    let cycle = UndirectedGraph::cycle(p)?;
    Ok(vec![
        GgmSpec::new(DVector::from_element(p, 0.5), coupled_precision(&star, 0.3), star)?,
        GgmSpec::new(DVector::from_element(p, -0.5), coupled_precision(&cycle, 0.3), cycle)?,
    ])
}

pub fn paper_simulation_dataset<R: Rng + ?Sized>(rng: &mut R) -> Result<SimulationDataset> {
    let specs = simulation_specs()?;
    let mut data = sample_ggm(&specs[0], 100, rng);
    data.extend(sample_ggm(&specs[1], 100, rng));
    let labels = (0..200).map(|i| i / 100).collect();
    Ok(SimulationDataset { data, labels, specs })
}

/// Sequential data that cycles through `specs` in consecutive segments of
/// `segment` rows until `n` rows are produced.
pub fn regime_switching_dataset<R: Rng + ?Sized>(
    specs: &[GgmSpec<f64>],
    segment: usize,
    n: usize,
    rng: &mut R,
) -> Result<SimulationDataset> {
    if specs.is_empty() || segment == 0 {
        return Err(Error::Input("need at least one regime and a positive segment length".into()));
    }
    let mut data = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for t in 0..n {
        let r = (t / segment) % specs.len();
        data.extend(sample_ggm(&specs[r], 1, rng));
        labels.push(r);
    }
    Ok(SimulationDataset { data, labels, specs: specs.to_vec() })
}
