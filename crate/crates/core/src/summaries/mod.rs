//! Post-processing of retained sweeps: co-clustering, edge-inclusion
//! probabilities, point partitions and the portfolio backtest.

mod backtest;
mod portfolio;
mod report;

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;
use crate::trace::TraceRecord;

pub use backtest::{
    backtest, backtest_comparison, BacktestConfig, BacktestModel, BacktestWindow, PortfolioStep, PortfolioTrace,
};
pub use portfolio::{min_variance_weights, predictive_moments, project_pd};
pub use report::{summarize, Summary};

pub type Matrix = DMatrix<f64>;

fn nonempty(trace: &[TraceRecord]) -> Result<usize> {
    let n = trace.first().map(|r| r.assignments.len()).ok_or_else(|| Error::Input("empty trace".into()))?;
    if trace.iter().any(|r| r.assignments.len() != n) {
        return Err(Error::Input("trace records disagree on the number of observations".into()));
    }
    Ok(n)
}

/// Fraction of sweeps in which observations `i` and `j` share a cluster.
pub fn coclustering(trace: &[TraceRecord]) -> Result<DMatrix<f64>> {
    let n = nonempty(trace)?;
    let mut counts = vec![0u32; n * n];
    for rec in trace {
        let a = &rec.assignments;
        for i in 0..n {
            for j in 0..i {
                if a[i] == a[j] {
                    counts[i * n + j] += 1;
                }
            }
        }
    }
    let s = trace.len() as f64;
    Ok(DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Greater => counts[i * n + j] as f64 / s,
        std::cmp::Ordering::Less => counts[j * n + i] as f64 / s,
    }))
}

/// Per observation, the fraction of sweeps in which the graph of its
/// cluster contains each edge. Vertices are 0-based in the output.
pub fn edge_probabilities(trace: &[TraceRecord], p: usize) -> Result<Vec<DMatrix<f64>>> {
    let n = nonempty(trace)?;
    let mut maps = vec![DMatrix::<f64>::zeros(p, p); n];
    let mut adj = Vec::new();
    for rec in trace {
        adj.clear();
        for edges in &rec.graphs {
            let mut m = DMatrix::<f64>::zeros(p, p);
            for &[a, b] in edges {
                if a == 0 || b == 0 || a > p || b > p || a == b {
                    return Err(Error::Input(format!("edge ({a}, {b}) is invalid for {p} vertices")));
                }
                m[(a - 1, b - 1)] = 1.0;
                m[(b - 1, a - 1)] = 1.0;
            }
            adj.push(m);
        }
        for (map, &l) in maps.iter_mut().zip(&rec.assignments) {
            let g = adj.get(l.wrapping_sub(1)).ok_or_else(|| Error::Input(format!("label {l} has no graph")))?;
            *map += g;
        }
    }
    let s = trace.len() as f64;
    for m in &mut maps {
        *m /= s;
    }
    Ok(maps)
}

/// Average of the per-observation maps over `members`.
pub fn mean_edge_probabilities(maps: &[DMatrix<f64>], members: &[usize]) -> Result<DMatrix<f64>> {
    let first = maps.first().ok_or_else(|| Error::Input("no edge maps".into()))?;
    if members.is_empty() {
        return Err(Error::Input("no members to average over".into()));
    }
    let mut acc = DMatrix::zeros(first.nrows(), first.ncols());
    for &j in members {
        acc += maps.get(j).ok_or_else(|| Error::Input(format!("observation {} out of range", j + 1)))?;
    }
    Ok(acc / members.len() as f64)
}

/// Edges whose inclusion probability exceeds `level`.
pub fn threshold_edges(map: &DMatrix<f64>, level: f64) -> Vec<(usize, usize)> {
    let p = map.nrows();
    let mut out = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            if map[(i, j)] > level {
                out.push((i, j));
            }
        }
    }
    out
}

pub const DEFAULT_EDGE_THRESHOLD: f64 = 0.8;

/// Area under the ROC curve of the edge scores in `map` against the edges
/// of `truth`, with ties counted as one half.
pub fn edge_auc(map: &DMatrix<f64>, truth: &UndirectedGraph) -> Result<f64> {
    let p = truth.order();
    if map.nrows() != p || map.ncols() != p {
        return Err(Error::Input(format!("score matrix is {}x{}, graph has {p} vertices", map.nrows(), map.ncols())));
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            if truth.has_edge(i, j) {
                pos.push(map[(i, j)]);
            } else {
                neg.push(map[(i, j)]);
            }
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Input("AUC needs both edges and non-edges".into()));
    }
    let mut wins = 0.0;
    for &a in &pos {
        for &b in &neg {
            wins += if a > b {
                1.0
            } else if a == b {
                0.5
            } else {
                0.0
            };
        }
    }
    Ok(wins / (pos.len() * neg.len()) as f64)
}

/// Relabels a partition by order of first appearance, starting at 0.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Most frequent partition among the sweeps (0-based canonical labels) and
/// its relative frequency. Ties go to the partition seen first.
pub fn modal_partition(trace: &[TraceRecord]) -> Result<(Vec<usize>, f64)> {
    nonempty(trace)?;
    let mut counts: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
    for (k, rec) in trace.iter().enumerate() {
        counts.entry(canonical(&rec.assignments)).or_insert((0, k)).0 += 1;
    }
    let (part, (c, _)) =
        counts.into_iter().max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1))).expect("nonempty");
    Ok((part, c as f64 / trace.len() as f64))
}

/// Cuts an average-linkage dendrogram built on `1 - similarity` into `k`
/// groups. Labels are canonical.
pub fn average_linkage_cut(similarity: &DMatrix<f64>, k: usize) -> Result<Vec<usize>> {
    let n = similarity.nrows();
    if similarity.ncols() != n || k == 0 || k > n {
        return Err(Error::Input(format!("cannot cut {n} items into {k} groups")));
    }
    let mut dist = DMatrix::from_fn(n, n, |i, j| 1.0 - similarity[(i, j)]);
    let mut size = vec![1usize; n];
    let mut alive: Vec<bool> = vec![true; n];
    let mut group: Vec<usize> = (0..n).collect();
    for _ in 0..n - k {
        let mut best = (f64::INFINITY, 0, 0);
        for i in (0..n).filter(|&i| alive[i]) {
            for j in (i + 1..n).filter(|&j| alive[j]) {
                if dist[(i, j)] < best.0 {
                    best = (dist[(i, j)], i, j);
                }
            }
        }
        let (_, a, b) = best;
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for c in (0..n).filter(|&c| alive[c] && c != a && c != b) {
            let d = (na * dist[(a, c)] + nb * dist[(b, c)]) / (na + nb);
            dist[(a, c)] = d;
            dist[(c, a)] = d;
        }
        size[a] += size[b];
        alive[b] = false;
        for g in group.iter_mut().filter(|g| **g == b) {
            *g = a;
        }
    }
    Ok(canonical(&group))
}

/// Two-group point partition from the co-clustering matrix.
pub fn two_block_partition(coclustering: &DMatrix<f64>) -> Result<Vec<usize>> {
    average_linkage_cut(coclustering, 2.min(coclustering.nrows()))
}

fn contingency(a: &[usize], b: &[usize]) -> Result<Vec<Vec<usize>>> {
    if a.len() != b.len() {
        return Err(Error::Input(format!("partitions of {} and {} items", a.len(), b.len())));
    }
    let (a, b) = (canonical(a), canonical(b));
    let ra = a.iter().max().map_or(0, |m| m + 1);
    let rb = b.iter().max().map_or(0, |m| m + 1);
    let mut t = vec![vec![0; rb]; ra];
    for (&x, &y) in a.iter().zip(&b) {
        t[x][y] += 1;
    }
    Ok(t)
}

pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    let t = contingency(a, b)?;
    let pairs = |x: usize| (x * x.saturating_sub(1) / 2) as f64;
    let n = a.len();
    let index: f64 = t.iter().flatten().map(|&c| pairs(c)).sum();
    let rows: f64 = t.iter().map(|r| pairs(r.iter().sum())).sum();
    let cols: f64 = (0..t.first().map_or(0, Vec::len)).map(|j| pairs(t.iter().map(|r| r[j]).sum())).sum();
    let expected = rows * cols / pairs(n).max(1.0);
    let max = 0.5 * (rows + cols);
    if max == expected {
        // Both partitions trivial in the same way.
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Items outside the best one-to-one matching between the groups of
/// `estimate` and `truth`.
pub fn misclassified(estimate: &[usize], truth: &[usize]) -> Result<usize> {
    let mut t = contingency(estimate, truth)?;
    if t.len() < t.first().map_or(0, Vec::len) {
        t = (0..t[0].len()).map(|j| t.iter().map(|r| r[j]).collect()).collect();
    }
    // Rows are the larger side; exact assignment over subsets of columns.
    let cols = t.first().map_or(0, Vec::len);
    if cols > 16 {
        return Err(Error::Input(format!("matching supports at most 16 groups on the smaller side, got {cols}")));
    }
    let mut best = vec![0usize; 1 << cols];
    for row in &t {
        let prev = best.clone();
        for (mask, &base) in prev.iter().enumerate() {
            for (c, &count) in row.iter().enumerate() {
                if mask & (1 << c) == 0 {
                    let next = mask | (1 << c);
                    best[next] = best[next].max(base + count);
                }
            }
        }
    }
    let matched = best.into_iter().max().unwrap_or(0);
    Ok(estimate.len() - matched)
}
