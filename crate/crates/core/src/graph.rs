//! Immutable vertex-weighted simple graphs.

use std::collections::VecDeque;

use thiserror::Error;

pub type Vertex = usize;
pub type Weight = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("vertex {vertex} has negative weight {weight}")]
    NegativeWeight { vertex: Vertex, weight: i64 },
    #[error("edge ({u}, {v}) references a vertex outside 0..{n}")]
    IndexOutOfRange { u: Vertex, v: Vertex, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(Vertex, Vertex),
    #[error("graph is disconnected")]
    Disconnected,
}

/// A connected simple undirected graph with non-negative integer vertex
/// weights. Neighbor lists are kept sorted so adjacency tests are a binary
/// search.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    /// Neighbors of `v` are `targets[offsets[v]..offsets[v + 1]]`.
    offsets: Vec<usize>,
    targets: Vec<Vertex>,
    weights: Vec<Weight>,
    m: usize,
}

/// Builds a graph from signed weights, rejecting negative entries.
pub fn build_graph(n: usize, weights: &[i64], edges: &[(Vertex, Vertex)]) -> Result<Graph, GraphError> {
    if weights.len() != n {
        return Err(GraphError::WeightCount { expected: n, got: weights.len() });
    }
    let mut unsigned = Vec::with_capacity(n);
    for (vertex, &weight) in weights.iter().enumerate() {
        if weight < 0 {
            return Err(GraphError::NegativeWeight { vertex, weight });
        }
        unsigned.push(weight as Weight);
    }
    Graph::new(unsigned, edges)
}

impl Graph {
    /// Vertex count is `weights.len()`.
    pub fn new(weights: Vec<Weight>, edges: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        let n = weights.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut offsets = vec![0usize; n + 1];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::IndexOutOfRange { u, v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            offsets[u + 1] += 1;
            offsets[v + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0; 2 * edges.len()];
        for &(u, v) in edges {
            targets[fill[u]] = v;
            fill[u] += 1;
            targets[fill[v]] = u;
            fill[v] += 1;
        }
        for u in 0..n {
            let list = &mut targets[offsets[u]..offsets[u + 1]];
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                let v = w[0];
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
        }
        let g = Graph { offsets, targets, weights, m: edges.len() };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    /// Same structure, different weights.
    pub fn with_weights(&self, weights: Vec<Weight>) -> Graph {
        assert_eq!(weights.len(), self.n(), "weight vector length mismatch");
        Graph { offsets: self.offsets.clone(), targets: self.targets.clone(), weights, m: self.m }
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn weight(&self, v: Vertex) -> Weight {
        self.weights[v]
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn total_weight(&self) -> Weight {
        self.weights.iter().sum()
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n() && v < self.n() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (0..self.n()).flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    /// `w(v)` plus the weights of all neighbors of `v`.
    pub fn closed_neighborhood_weight(&self, v: Vertex) -> Weight {
        self.weights[v] + self.neighbors(v).iter().map(|&u| self.weights[u]).sum::<Weight>()
    }

    pub fn is_cubic(&self) -> bool {
        (0..self.n()).all(|v| self.degree(v) == 3)
    }

    /// True iff no vertex has three pairwise non-adjacent neighbors.
    /// Runs in O(sum of deg^3 * log deg).
    pub fn is_claw_free(&self) -> bool {
        self.find_claw().is_none()
    }

    /// A center and three pairwise non-adjacent neighbors, if one exists.
    pub fn find_claw(&self) -> Option<(Vertex, [Vertex; 3])> {
        for center in 0..self.n() {
            let list = self.neighbors(center);
            for (i, &x) in list.iter().enumerate() {
                for (j, &y) in list.iter().enumerate().skip(i + 1) {
                    if self.has_edge(x, y) {
                        continue;
                    }
                    for &z in &list[j + 1..] {
                        if !self.has_edge(x, z) && !self.has_edge(y, z) {
                            return Some((center, [x, y, z]));
                        }
                    }
                }
            }
        }
        None
    }

    fn is_connected(&self) -> bool {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == n
    }
}
