//! Solver output and the exact ratio bounds it is checked against.

use num_rational::Ratio;

use crate::graph::{Graph, Vertex, Weight};

/// An exact non-negative rational.
pub type Bound = Ratio<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Cubic,
    ClawFree,
    Exact,
}

impl Algorithm {
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Cubic => "cubic",
            Algorithm::ClawFree => "clawfree",
            Algorithm::Exact => "exact",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTreeSolution {
    /// Normalized: `u < v`, sorted lexicographically.
    pub tree_edges: Vec<(Vertex, Vertex)>,
    pub internal_weight: Weight,
    pub total_weight: Weight,
    /// Proven lower bound on `internal_weight / total_weight` for the
    /// instance, clamped at zero.
    pub guarantee: Bound,
    pub algorithm: Algorithm,
}

impl SpanningTreeSolution {
    pub(crate) fn from_edges(
        g: &Graph,
        edges: impl IntoIterator<Item = (Vertex, Vertex)>,
        guarantee: Bound,
        algorithm: Algorithm,
    ) -> Self {
        let tree_edges = normalize_edges(edges);
        let internal_weight = internal_weight(g, &tree_edges);
        SpanningTreeSolution { tree_edges, internal_weight, total_weight: g.total_weight(), guarantee, algorithm }
    }
}

/// Bucketed by the smaller endpoint, so linear when degrees are bounded.
pub fn normalize_edges(edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Vec<(Vertex, Vertex)> {
    let edges: Vec<_> = edges.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
    let Some(top) = edges.iter().map(|e| e.0).max() else {
        return edges;
    };
    let mut start = vec![0usize; top + 2];
    for &(u, _) in &edges {
        start[u + 1] += 1;
    }
    for u in 0..=top {
        start[u + 1] += start[u];
    }
    let mut fill = start.clone();
    let mut out = vec![(0, 0); edges.len()];
    for &e in &edges {
        out[fill[e.0]] = e;
        fill[e.0] += 1;
    }
    for u in 0..=top {
        out[start[u]..start[u + 1]].sort_unstable();
    }
    out
}

/// Sum of weights of vertices with degree at least 2 in the edge set.
pub fn internal_weight(g: &Graph, edges: &[(Vertex, Vertex)]) -> Weight {
    let mut degree = vec![0usize; g.n()];
    for &(u, v) in edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    degree.iter().enumerate().filter(|(_, &d)| d >= 2).map(|(v, _)| g.weight(v)).sum()
}

fn clamped(num: i128, den: i128) -> Bound {
    if num <= 0 {
        Bound::from_integer(0)
    } else {
        Bound::new(num as u64, den as u64)
    }
}

/// `max(0, 3/4 - 3/n)`.
pub fn cubic_bound(n: usize) -> Bound {
    let n = n as i128;
    clamped(3 * n - 12, 4 * n)
}

/// `max(0, 3/5 - 3/(5n))`.
pub fn clawfree_bound(n: usize) -> Bound {
    let n = n as i128;
    clamped(3 * n - 3, 5 * n)
}

/// `max(0, 1/2 - 1/n)`, met by the claw-free DFS tree before any rewiring.
pub fn interim_bound(n: usize) -> Bound {
    let n = n as i128;
    clamped(n - 2, 2 * n)
}

/// `internal >= bound * total`, by cross-multiplication.
pub fn meets_bound(internal: Weight, total: Weight, bound: Bound) -> bool {
    internal as u128 * *bound.denom() as u128 >= *bound.numer() as u128 * total as u128
}
