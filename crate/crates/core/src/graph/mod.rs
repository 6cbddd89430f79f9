//! Undirected graphs, decomposable graphs and their junction-tree ordering.
//!
//! Vertices are `0..p` in the Rust API. The text edge-list format is
//! 1-indexed:
//!
//! ```text
//! p 3
//! 1 2
//! 2 3
//! ```
//!
//! Graphs are limited to [`MAX_VERTICES`] vertices so that adjacency fits in
//! one machine word per vertex.

mod chordal;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use chordal::{bit, iter_bits};

pub const MAX_VERTICES: usize = 64;

/// A simple undirected graph on `p` vertices. Equality and hashing follow the
/// canonical (sorted) edge list.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UndirectedGraph {
    adj: Vec<u64>,
}

impl UndirectedGraph {
    pub fn empty(p: usize) -> Result<Self> {
        check_order(p)?;
        Ok(Self { adj: vec![0; p] })
    }

    pub fn complete(p: usize) -> Result<Self> {
        check_order(p)?;
        let all = if p == 64 { u64::MAX } else { (1u64 << p) - 1 };
        Ok(Self { adj: (0..p).map(|v| all & !bit(v)).collect() })
    }

    /// Builds a graph from 0-indexed vertex pairs. Duplicate pairs (in either
    /// orientation) collapse; self-loops and out-of-range indices are errors.
    pub fn from_edges(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(p)?;
        for &(a, b) in edges {
            if a >= p || b >= p {
                return Err(Error::Input(format!("edge ({}, {}) references a vertex outside 1..={p}", a + 1, b + 1)));
            }
            if a == b {
                return Err(Error::Input(format!("self-loop at vertex {}", a + 1)));
            }
            g.adj[a] |= bit(b);
            g.adj[b] |= bit(a);
        }
        Ok(g)
    }

    /// Cycle `0 - 1 - ... - (p-1) - 0`.
    pub fn cycle(p: usize) -> Result<Self> {
        let edges: Vec<_> = (0..p).map(|i| (i, (i + 1) % p)).collect();
        Self::from_edges(p, &edges)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i] & bit(j) != 0
    }

    /// Sorted list of `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.order() {
            for j in iter_bits(self.adj[i] >> (i + 1)) {
                out.push((i, i + 1 + j));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|m| m.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> {
        iter_bits(self.adj[v])
    }

    pub fn is_chordal(&self) -> bool {
        chordal::is_chordal(&self.adj)
    }

    fn toggle(&mut self, i: usize, j: usize) {
        self.adj[i] ^= bit(j);
        self.adj[j] ^= bit(i);
    }
}

fn check_order(p: usize) -> Result<()> {
    if p > MAX_VERTICES {
        return Err(Error::Input(format!("{p} vertices exceeds the supported maximum of {MAX_VERTICES}")));
    }
    Ok(())
}

/// Chordality test on 0-indexed pairs.
pub fn is_decomposable(p: usize, edges: &[(usize, usize)]) -> Result<bool> {
    Ok(UndirectedGraph::from_edges(p, edges)?.is_chordal())
}

/// A chordal graph.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DecomposableGraph(UndirectedGraph);

impl DecomposableGraph {
    pub fn new(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::try_from(UndirectedGraph::from_edges(p, edges)?)
    }

    pub fn empty(p: usize) -> Result<Self> {
        Ok(Self(UndirectedGraph::empty(p)?))
    }

    pub fn complete(p: usize) -> Result<Self> {
        Ok(Self(UndirectedGraph::complete(p)?))
    }

    /// Star with every other vertex attached to `centre`.
    pub fn star(p: usize, centre: usize) -> Result<Self> {
        let edges: Vec<_> = (0..p).filter(|&v| v != centre).map(|v| (centre, v)).collect();
        Self::new(p, &edges)
    }

    pub fn path(p: usize) -> Result<Self> {
        let edges: Vec<_> = (1..p).map(|v| (v - 1, v)).collect();
        Self::new(p, &edges)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.0.order()
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.0.has_edge(i, j)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges()
    }

    pub fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    pub fn as_graph(&self) -> &UndirectedGraph {
        &self.0
    }

    /// Perfect sequence of cliques from a maximum cardinality search started
    /// at vertex 0 with lowest-index tie-breaking.
    pub fn decompose(&self) -> CliqueSequence {
        self.decompose_ranked(None)
    }

    /// Same as [`decompose`](Self::decompose) but with MCS ties broken by
    /// `rank` (lower rank first). Any ranking yields a valid perfect sequence.
    pub fn decompose_with_rank(&self, rank: &[usize]) -> Result<CliqueSequence> {
        if rank.len() != self.order() {
            return Err(Error::Input(format!("rank has {} entries for {} vertices", rank.len(), self.order())));
        }
        Ok(self.decompose_ranked(Some(rank)))
    }

    fn decompose_ranked(&self, rank: Option<&[usize]>) -> CliqueSequence {
        let adj = &self.0.adj;
        let (order, weight) = chordal::mcs(adj, rank);
        let mut cliques: Vec<u64> = Vec::new();
        let mut separators: Vec<u64> = Vec::new();
        let mut seen = 0u64;
        let mut current = 0u64;
        let mut prev_weight: i64 = -1;
        for (&v, &w) in order.iter().zip(&weight) {
            let earlier = adj[v] & seen;
            if i64::from(w) <= prev_weight {
                cliques.push(current);
                if earlier != 0 {
                    separators.push(earlier);
                }
                current = earlier;
            }
            current |= bit(v);
            seen |= bit(v);
            prev_weight = i64::from(w);
        }
        if self.order() > 0 {
            cliques.push(current);
        }
        CliqueSequence {
            cliques: cliques.into_iter().map(mask_to_vec).collect(),
            separators: separators.into_iter().map(mask_to_vec).collect(),
        }
    }

    /// Whether toggling `{i, j}` yields another decomposable graph.
    pub fn can_flip(&self, i: usize, j: usize) -> bool {
        i != j && chordal::flip_keeps_chordal(&self.0.adj, i, j)
    }

    /// The graph with `{i, j}` toggled, if it stays decomposable.
    pub fn flipped(&self, i: usize, j: usize) -> Option<Self> {
        if !self.can_flip(i, j) {
            return None;
        }
        let mut g = self.0.clone();
        g.toggle(i, j);
        Some(Self(g))
    }

    /// Vertex pairs whose toggle keeps the graph decomposable.
    pub fn neighbor_flips(&self) -> Vec<(usize, usize)> {
        let p = self.order();
        let mut out = Vec::with_capacity(p * p.saturating_sub(1) / 2);
        for i in 0..p {
            for j in i + 1..p {
                if chordal::flip_keeps_chordal(&self.0.adj, i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// All decomposable graphs one edge away.
    pub fn neighborhood(&self) -> Vec<Self> {
        self.neighbor_flips()
            .into_iter()
            .map(|(i, j)| {
                let mut g = self.0.clone();
                g.toggle(i, j);
                Self(g)
            })
            .collect()
    }

    pub fn neighborhood_size(&self) -> usize {
        let p = self.order();
        let mut n = 0;
        for i in 0..p {
            for j in i + 1..p {
                n += usize::from(chordal::flip_keeps_chordal(&self.0.adj, i, j));
            }
        }
        n
    }

    /// Uniform draw from the neighborhood. `None` when it is empty (p < 2).
    pub fn uniform_neighbor<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Proposal> {
        let flips = self.neighbor_flips();
        if flips.is_empty() {
            return None;
        }
        let (i, j) = flips[rng.random_range(0..flips.len())];
        let mut g = self.0.clone();
        g.toggle(i, j);
        let graph = Self(g);
        let proposal_size = graph.neighborhood_size();
        Some(Proposal { graph, flipped: (i, j), current_size: flips.len(), proposal_size })
    }

    /// Serializes to the 1-indexed edge-list text format.
    pub fn to_edge_list(&self) -> String {
        self.to_string()
    }

    pub(crate) fn toggle_unchecked(&mut self, i: usize, j: usize) {
        self.0.toggle(i, j);
    }
}

impl TryFrom<UndirectedGraph> for DecomposableGraph {
    type Error = Error;

    fn try_from(g: UndirectedGraph) -> Result<Self> {
        if !g.is_chordal() {
            return Err(Error::Structure(format!(
                "graph on {} vertices with edges {} is not chordal",
                g.order(),
                format_edges(&g.edges())
            )));
        }
        Ok(Self(g))
    }
}

/// A uniformly drawn single-edge perturbation and the neighborhood sizes the
/// Metropolis-Hastings ratio needs.
#[derive(Clone, Debug)]
pub struct Proposal {
    pub graph: DecomposableGraph,
    pub flipped: (usize, usize),
    pub current_size: usize,
    pub proposal_size: usize,
}

/// Cliques `C_1..C_k` in a perfect order with the separators
/// `S_j = C_j ∩ (C_1 ∪ ... ∪ C_{j-1})`.
///
/// Empty separators, which arise between connected components, are omitted:
/// they contribute nothing to any factorized quantity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueSequence {
    pub cliques: Vec<Vec<usize>>,
    pub separators: Vec<Vec<usize>>,
}

impl CliqueSequence {
    /// Checks the running-intersection property: each clique's overlap with the
    /// union of its predecessors lies inside a single earlier clique.
    pub fn has_running_intersection(&self) -> bool {
        let masks: Vec<u64> = self.cliques.iter().map(|c| vec_to_mask(c)).collect();
        let mut union = 0u64;
        let mut seps = Vec::new();
        for (j, &c) in masks.iter().enumerate() {
            if j > 0 {
                let s = c & union;
                if !masks[..j].iter().any(|&prev| s & !prev == 0) {
                    return false;
                }
                if s != 0 {
                    seps.push(s);
                }
            }
            union |= c;
        }
        let mut given: Vec<u64> = self.separators.iter().map(|s| vec_to_mask(s)).collect();
        seps.sort_unstable();
        given.sort_unstable();
        seps == given
    }
}

fn mask_to_vec(m: u64) -> Vec<usize> {
    iter_bits(m).collect()
}

fn vec_to_mask(v: &[usize]) -> u64 {
    v.iter().fold(0u64, |m, &i| m | bit(i))
}

fn format_edges(edges: &[(usize, usize)]) -> String {
    let parts: Vec<String> = edges.iter().map(|(a, b)| format!("{}-{}", a + 1, b + 1)).collect();
    format!("[{}]", parts.join(", "))
}

impl fmt::Debug for UndirectedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(p={}, {})", self.order(), format_edges(&self.edges()))
    }
}

impl fmt::Debug for DecomposableGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Decomposable(p={}, {})", self.order(), format_edges(&self.edges()))
    }
}

impl fmt::Display for UndirectedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p {}", self.order())?;
        for (i, j) in self.edges() {
            writeln!(f, "{} {}", i + 1, j + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for DecomposableGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for UndirectedGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::Parse { path: "<edge list>".into(), line, msg };
        let mut lines =
            s.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (first_no, first) = lines.next().ok_or_else(|| bad(1, "missing `p <int>` header".into()))?;
        let p = match first.split_whitespace().collect::<Vec<_>>()[..] {
            ["p", n] => n.parse::<usize>().map_err(|e| bad(first_no, format!("vertex count {n:?}: {e}")))?,
            _ => return Err(bad(first_no, format!("expected `p <int>`, found {first:?}"))),
        };
        let mut edges = Vec::new();
        for (no, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [a, b] = fields[..] else {
                return Err(bad(no, format!("expected `i j`, found {line:?}")));
            };
            let parse = |t: &str| -> Result<usize> {
                let v: usize = t.parse().map_err(|e| bad(no, format!("vertex {t:?}: {e}")))?;
                if v == 0 || v > p {
                    return Err(bad(no, format!("vertex {v} outside 1..={p}")));
                }
                Ok(v - 1)
            };
            edges.push((parse(a)?, parse(b)?));
        }
        UndirectedGraph::from_edges(p, &edges)
    }
}

impl FromStr for DecomposableGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::try_from(s.parse::<UndirectedGraph>()?)
    }
}

/// Every decomposable graph on `p` vertices (exponential; for tests and
/// exhaustive posteriors at tiny `p`).
pub fn all_decomposable(p: usize) -> Result<Vec<DecomposableGraph>> {
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).collect();
    if pairs.len() > 20 {
        return Err(Error::Input(format!("refusing to enumerate graphs on {p} vertices")));
    }
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << pairs.len()) {
        let edges: Vec<_> = pairs.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, &e)| e).collect();
        let g = UndirectedGraph::from_edges(p, &edges)?;
        if g.is_chordal() {
            out.push(DecomposableGraph(g));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::{HashMap, HashSet, VecDeque};

    fn g(p: usize, e: &[(usize, usize)]) -> DecomposableGraph {
        DecomposableGraph::new(p, e).unwrap()
    }

    #[test]
    fn decomposability_examples() {
        assert!(is_decomposable(3, &[(0, 1), (1, 2)]).unwrap());
        assert!(!is_decomposable(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap());
        assert!(UndirectedGraph::complete(5).unwrap().is_chordal());
        assert!(matches!(is_decomposable(3, &[(0, 3)]), Err(Error::Input(_))));
        assert!(matches!(is_decomposable(3, &[(1, 1)]), Err(Error::Input(_))));
    }

    #[test]
    fn non_chordal_rejected_with_structure_error() {
        let e = DecomposableGraph::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(matches!(e, Err(Error::Structure(_))));
    }

    #[test]
    fn duplicates_collapse() {
        let a = g(3, &[(0, 1), (1, 0), (0, 1)]);
        assert_eq!(a.edges(), vec![(0, 1)]);
        assert_eq!(a, g(3, &[(0, 1)]));
    }

    #[test]
    fn decompose_examples() {
        let d = DecomposableGraph::path(3).unwrap().decompose();
        assert_eq!(d.cliques, vec![vec![0, 1], vec![1, 2]]);
        assert_eq!(d.separators, vec![vec![1]]);

        let d = DecomposableGraph::complete(4).unwrap().decompose();
        assert_eq!(d.cliques, vec![vec![0, 1, 2, 3]]);
        assert!(d.separators.is_empty());

        let d = DecomposableGraph::star(10, 0).unwrap().decompose();
        assert_eq!(d.cliques.len(), 9);
        for (k, c) in d.cliques.iter().enumerate() {
            assert_eq!(c, &vec![0, k + 1]);
        }
        assert_eq!(d.separators, vec![vec![0]; 8]);

        let d = DecomposableGraph::empty(2).unwrap().decompose();
        assert_eq!(d.cliques, vec![vec![0], vec![1]]);
        assert!(d.separators.is_empty());
    }

    #[test]
    fn neighborhood_examples() {
        assert_eq!(DecomposableGraph::empty(3).unwrap().neighborhood().len(), 3);
        let path = DecomposableGraph::path(3).unwrap();
        let nbd: HashSet<_> = path.neighborhood().into_iter().collect();
        assert_eq!(nbd.len(), 3);
        assert!(nbd.contains(&g(3, &[(0, 1)])));
        assert!(nbd.contains(&g(3, &[(1, 2)])));
        assert!(nbd.contains(&g(3, &[(0, 1), (1, 2), (0, 2)])));
        assert_eq!(DecomposableGraph::complete(3).unwrap().neighborhood().len(), 3);
        assert!(DecomposableGraph::empty(1).unwrap().neighborhood().is_empty());
    }

    #[test]
    fn uniform_neighbor_singleton() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let prop = DecomposableGraph::empty(2).unwrap().uniform_neighbor(&mut rng).unwrap();
        assert_eq!(prop.graph, g(2, &[(0, 1)]));
        assert_eq!((prop.current_size, prop.proposal_size), (1, 1));
        assert!(DecomposableGraph::empty(1).unwrap().uniform_neighbor(&mut rng).is_none());
    }

    #[test]
    fn uniform_neighbor_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let path = DecomposableGraph::path(3).unwrap();
        let mut counts: HashMap<DecomposableGraph, usize> = HashMap::new();
        let draws = 100_000;
        for _ in 0..draws {
            let prop = path.uniform_neighbor(&mut rng).unwrap();
            assert!(prop.graph.as_graph().is_chordal());
            *counts.entry(prop.graph).or_default() += 1;
        }
        assert_eq!(counts.len(), 3);
        for c in counts.values() {
            assert!((*c as f64 / draws as f64 - 1.0 / 3.0).abs() < 0.01);
        }
    }

    /// A graph is chordal iff no vertex subset of size >= 4 induces a cycle.
    fn brute_force_chordal(g: &UndirectedGraph) -> bool {
        let p = g.order();
        for subset in 0u64..(1u64 << p) {
            if subset.count_ones() < 4 {
                continue;
            }
            let vs: Vec<usize> = iter_bits(subset).collect();
            let all_deg2 = vs.iter().all(|&v| vs.iter().filter(|&&w| g.has_edge(v, w)).count() == 2);
            if !all_deg2 {
                continue;
            }
            // Connected 2-regular induced subgraph = induced cycle.
            let mut seen = bit(vs[0]);
            let mut stack = vec![vs[0]];
            while let Some(v) = stack.pop() {
                for &w in &vs {
                    if g.has_edge(v, w) && seen & bit(w) == 0 {
                        seen |= bit(w);
                        stack.push(w);
                    }
                }
            }
            if seen == subset {
                return false;
            }
        }
        true
    }

    fn all_graphs(p: usize) -> impl Iterator<Item = UndirectedGraph> {
        let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).collect();
        (0u32..(1u32 << pairs.len())).map(move |mask| {
            let edges: Vec<_> =
                pairs.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, &e)| e).collect();
            UndirectedGraph::from_edges(p, &edges).unwrap()
        })
    }

    #[test]
    fn chordality_matches_induced_cycle_oracle() {
        for p in 1..=6 {
            for g in all_graphs(p) {
                assert_eq!(g.is_chordal(), brute_force_chordal(&g), "{g:?}");
            }
        }
    }

    #[test]
    fn flip_predicate_matches_full_test() {
        for p in 2..=6 {
            for g in all_graphs(p).filter(|g| g.is_chordal()) {
                let d = DecomposableGraph(g.clone());
                for i in 0..p {
                    for j in i + 1..p {
                        let mut h = g.clone();
                        h.toggle(i, j);
                        assert_eq!(d.can_flip(i, j), h.is_chordal(), "{g:?} flip {i}-{j}");
                    }
                }
            }
        }
    }

    #[test]
    fn decomposable_counts() {
        // Labelled chordal graphs on 1..=5 vertices.
        let expected = [1, 2, 8, 61, 822];
        for (p, &n) in (1..=5).zip(&expected) {
            assert_eq!(all_decomposable(p).unwrap().len(), n);
        }
    }

    #[test]
    fn neighborhood_is_symmetric() {
        for p in 2..=5 {
            let all = all_decomposable(p).unwrap();
            for g in &all {
                for h in g.neighborhood() {
                    assert!(h.neighborhood().contains(g));
                    let diff =
                        g.as_graph().adj.iter().zip(&h.as_graph().adj).map(|(a, b)| (a ^ b).count_ones()).sum::<u32>();
                    assert_eq!(diff, 2);
                }
            }
        }
    }

    #[test]
    fn move_graph_is_connected() {
        for p in 1..=4 {
            let all: HashSet<_> = all_decomposable(p).unwrap().into_iter().collect();
            let start = DecomposableGraph::empty(p).unwrap();
            let mut seen = HashSet::from([start.clone()]);
            let mut queue = VecDeque::from([start]);
            while let Some(g) = queue.pop_front() {
                for h in g.neighborhood() {
                    if seen.insert(h.clone()) {
                        queue.push_back(h);
                    }
                }
            }
            assert_eq!(seen, all);
        }
    }

    #[test]
    fn decomposition_covers_graph_and_has_rip() {
        for p in 1..=5 {
            for g in all_decomposable(p).unwrap() {
                let d = g.decompose();
                assert!(d.has_running_intersection(), "{g:?} {d:?}");
                let mut covered = UndirectedGraph::empty(p).unwrap();
                let mut verts = 0u64;
                for c in &d.cliques {
                    for &a in c {
                        verts |= bit(a);
                        for &b in c {
                            assert!(a == b || g.has_edge(a, b));
                            if a < b {
                                covered.adj[a] |= bit(b);
                                covered.adj[b] |= bit(a);
                            }
                        }
                    }
                }
                assert_eq!(verts.count_ones() as usize, p);
                assert_eq!(&covered, g.as_graph());
            }
        }
    }

    #[test]
    fn ranked_decompositions_are_perfect() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for g in all_decomposable(5).unwrap() {
            let mut rank: Vec<usize> = (0..5).collect();
            rand::seq::SliceRandom::shuffle(&mut rank[..], &mut rng);
            let d = g.decompose_with_rank(&rank).unwrap();
            assert!(d.has_running_intersection());
            assert_eq!(d.cliques.len(), g.decompose().cliques.len());
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let g = DecomposableGraph::star(5, 2).unwrap();
        let text = g.to_edge_list();
        assert_eq!(text, "p 5\n1 3\n2 3\n3 4\n3 5\n");
        assert_eq!(text.parse::<DecomposableGraph>().unwrap(), g);
        assert!("p 4\n1 2\n2 3\n3 4\n4 1\n".parse::<DecomposableGraph>().is_err());
        assert!("p 3\n1 4\n".parse::<UndirectedGraph>().is_err());
        assert!("1 2\n".parse::<UndirectedGraph>().is_err());
        let cyc: UndirectedGraph = "p 4\n1 2\n2 3\n3 4\n1 4\n".parse().unwrap();
        assert_eq!(cyc, UndirectedGraph::cycle(4).unwrap());
    }
}
