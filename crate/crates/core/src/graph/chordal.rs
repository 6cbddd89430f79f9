//! Maximum cardinality search and chordality predicates on bitset adjacency.
//!
//! `adj[v]` has bit `w` set iff `{v, w}` is an edge.

#[inline]
pub(crate) fn bit(v: usize) -> u64 {
    1u64 << v
}

#[inline]
pub(crate) fn iter_bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(v)
        }
    })
}

/// Visit order of a maximum cardinality search together with the number of
/// previously visited neighbors each vertex had when it was picked.
///
/// Ties are broken by the smallest `rank[v]`; with the identity ranking the
/// search starts at vertex 0 and prefers lower indices.
pub(crate) fn mcs(adj: &[u64], rank: Option<&[usize]>) -> (Vec<usize>, Vec<u32>) {
    let p = adj.len();
    let mut weight = vec![0u32; p];
    let mut visited = 0u64;
    let mut order = Vec::with_capacity(p);
    let mut picked_weight = Vec::with_capacity(p);
    for _ in 0..p {
        let mut best = usize::MAX;
        for v in 0..p {
            if visited & bit(v) != 0 {
                continue;
            }
            if best == usize::MAX || weight[v] > weight[best] {
                best = v;
            } else if weight[v] == weight[best] {
                if let Some(r) = rank {
                    if r[v] < r[best] {
                        best = v;
                    }
                }
            }
        }
        visited |= bit(best);
        order.push(best);
        picked_weight.push(weight[best]);
        for w in iter_bits(adj[best] & !visited) {
            weight[w] += 1;
        }
    }
    (order, picked_weight)
}

/// True iff `order` is a perfect elimination ordering read backwards, i.e.
/// every vertex's earlier-visited neighbors form a clique.
pub(crate) fn zero_fill_in(adj: &[u64], order: &[usize]) -> bool {
    let p = adj.len();
    let mut pos = vec![0usize; p];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut before = vec![0u64; p];
    let mut seen = 0u64;
    for &v in order {
        before[v] = adj[v] & seen;
        seen |= bit(v);
    }
    for &v in order {
        let earlier = before[v];
        if earlier == 0 {
            continue;
        }
        let parent = iter_bits(earlier).max_by_key(|&u| pos[u]).unwrap();
        let rest = earlier & !bit(parent);
        if rest & !before[parent] != 0 {
            return false;
        }
    }
    true
}

pub(crate) fn is_chordal(adj: &[u64]) -> bool {
    let (order, _) = mcs(adj, None);
    zero_fill_in(adj, &order)
}

/// For a chordal graph, whether toggling `{u, v}` leaves it chordal.
///
/// Deleting an edge is safe iff the common neighborhood of its endpoints is
/// complete. Adding an edge is safe iff the common neighborhood separates
/// the endpoints.
pub(crate) fn flip_keeps_chordal(adj: &[u64], u: usize, v: usize) -> bool {
    let common = adj[u] & adj[v];
    if adj[u] & bit(v) != 0 {
        iter_bits(common).all(|w| common & !bit(w) & !adj[w] == 0)
    } else {
        let allowed = !common;
        let mut frontier = bit(u);
        let mut reached = bit(u);
        while frontier != 0 {
            let mut next = 0u64;
            for w in iter_bits(frontier) {
                next |= adj[w];
            }
            next &= allowed & !reached;
            if next & bit(v) != 0 {
                return false;
            }
            reached |= next;
            frontier = next;
        }
        true
    }
}
