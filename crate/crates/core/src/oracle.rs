//! Exact maximum internal-weight spanning tree by exhaustive search.
//!
//! Include/exclude branching over the edges in lexicographic order. A
//! rollback union-find rejects cycle-closing inclusions, exclusions that
//! disconnect the remaining edge set are pruned, and a branch is cut when
//! `w(V)` minus the weight of the vertices that can no longer reach degree 2
//! (and at least the two lightest, since every tree has two leaves) cannot
//! beat the best tree found so far. Because inclusion is tried first, trees
//! are reached in lexicographic order of their sorted edge lists, and only
//! strict improvements replace the incumbent; the result is therefore the
//! lexicographically smallest optimal tree.

use crate::error::SolveError;
use crate::graph::{Graph, Vertex, Weight};
use crate::solution::{internal_weight, Algorithm, Bound, SpanningTreeSolution};

pub const DEFAULT_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub best_tree: Vec<(Vertex, Vertex)>,
    pub opt_internal_weight: Weight,
    pub trees_explored: u64,
}

impl OracleResult {
    pub fn into_solution(self, g: &Graph) -> SpanningTreeSolution {
        SpanningTreeSolution::from_edges(g, self.best_tree, Bound::from_integer(0), Algorithm::Exact)
    }
}

pub fn optimal_internal_spanning_tree(g: &Graph, cap: usize) -> Result<OracleResult, SolveError> {
    let n = g.n();
    if n > cap {
        return Err(SolveError::ExactSolveTooLarge { n, cap });
    }
    let edges: Vec<(Vertex, Vertex)> = g.edges().collect();
    let mut by_weight: Vec<Vertex> = (0..n).collect();
    by_weight.sort_by_key(|&v| (g.weight(v), v));

    let mut search = Search {
        g,
        edges: &edges,
        by_weight,
        uf_parent: (0..n).collect(),
        uf_size: vec![1; n],
        history: Vec::new(),
        excluded: vec![false; edges.len()],
        possible_degree: (0..n).map(|v| g.degree(v)).collect(),
        tree_degree: vec![0; n],
        chosen: Vec::with_capacity(n.saturating_sub(1)),
        best: None,
        ceiling: 0,
        explored: 0,
    };
    search.ceiling = search.leaf_bound();
    search.run(0);

    let (opt, best_tree) = search.best.expect("a connected graph has a spanning tree");
    debug_assert_eq!(internal_weight(g, &best_tree), opt);
    Ok(OracleResult { best_tree, opt_internal_weight: opt, trees_explored: search.explored })
}

struct Search<'a> {
    g: &'a Graph,
    edges: &'a [(Vertex, Vertex)],
    by_weight: Vec<Vertex>,
    uf_parent: Vec<Vertex>,
    uf_size: Vec<usize>,
    history: Vec<Option<(Vertex, Vertex)>>,
    excluded: Vec<bool>,
    possible_degree: Vec<usize>,
    tree_degree: Vec<usize>,
    chosen: Vec<(Vertex, Vertex)>,
    best: Option<(Weight, Vec<(Vertex, Vertex)>)>,
    /// Bound at the root of the search; reaching it ends the search.
    ceiling: Weight,
    explored: u64,
}

impl Search<'_> {
    fn find(&self, mut v: Vertex) -> Vertex {
        while self.uf_parent[v] != v {
            v = self.uf_parent[v];
        }
        v
    }

    fn union(&mut self, a: Vertex, b: Vertex) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.uf_size[ra] < self.uf_size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.uf_parent[rb] = ra;
        self.uf_size[ra] += self.uf_size[rb];
        self.history.push(Some((ra, rb)));
        true
    }

    fn rollback(&mut self) {
        if let Some(Some((ra, rb))) = self.history.pop() {
            self.uf_parent[rb] = rb;
            self.uf_size[ra] -= self.uf_size[rb];
        }
    }

    /// Vertices that can no longer get two tree edges are leaves; every
    /// spanning tree on two or more vertices has at least two leaves.
    fn leaf_bound(&self) -> Weight {
        let n = self.g.n();
        if n <= 2 {
            return 0;
        }
        let mut bound = self.g.total_weight();
        let mut leaves = 0;
        for v in 0..n {
            if self.possible_degree[v] <= 1 {
                bound -= self.g.weight(v);
                leaves += 1;
            }
        }
        for &v in &self.by_weight {
            if leaves >= 2 {
                break;
            }
            if self.possible_degree[v] > 1 {
                bound -= self.g.weight(v);
                leaves += 1;
            }
        }
        bound
    }

    fn remaining_connected(&self) -> bool {
        let n = self.g.n();
        let mut adj = vec![Vec::new(); n];
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if !self.excluded[i] {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    fn done(&self) -> bool {
        matches!(self.best, Some((w, _)) if w >= self.ceiling)
    }

    fn run(&mut self, idx: usize) {
        let n = self.g.n();
        if self.chosen.len() + 1 == n {
            self.explored += 1;
            let value = self
                .tree_degree
                .iter()
                .enumerate()
                .filter(|(_, &d)| d >= 2)
                .map(|(v, _)| self.g.weight(v))
                .sum::<Weight>();
            if self.best.as_ref().is_none_or(|(b, _)| value > *b) {
                self.best = Some((value, self.chosen.clone()));
            }
            return;
        }
        if idx == self.edges.len() || self.done() {
            return;
        }
        if let Some((b, _)) = &self.best {
            if self.leaf_bound() <= *b {
                return;
            }
        }
        let (u, v) = self.edges[idx];

        if self.union(u, v) {
            self.chosen.push((u, v));
            self.tree_degree[u] += 1;
            self.tree_degree[v] += 1;
            self.run(idx + 1);
            self.tree_degree[u] -= 1;
            self.tree_degree[v] -= 1;
            self.chosen.pop();
            self.rollback();
            if self.done() {
                return;
            }
        }

        self.excluded[idx] = true;
        self.possible_degree[u] -= 1;
        self.possible_degree[v] -= 1;
        if self.remaining_connected() {
            self.run(idx + 1);
        }
        self.possible_degree[u] += 1;
        self.possible_degree[v] += 1;
        self.excluded[idx] = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Graph::new(vec![1; n], &edges).unwrap()
    }

    fn prism() -> Graph {
        let edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)];
        Graph::new(vec![1; 6], &edges).unwrap()
    }

    #[test]
    fn small_optima() {
        let r = optimal_internal_spanning_tree(&complete(4), DEFAULT_CAP).unwrap();
        assert_eq!(r.opt_internal_weight, 2);
        assert_eq!(r.best_tree, vec![(0, 1), (0, 2), (1, 3)]);

        let star = Graph::new(vec![1; 4], &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let r = optimal_internal_spanning_tree(&star, DEFAULT_CAP).unwrap();
        assert_eq!(r.opt_internal_weight, 1);
        assert_eq!(r.trees_explored, 1);

        let r = optimal_internal_spanning_tree(&prism(), DEFAULT_CAP).unwrap();
        assert_eq!(r.opt_internal_weight, 4);
    }

    #[test]
    fn tiny_graphs() {
        let single = Graph::new(vec![5], &[]).unwrap();
        let r = optimal_internal_spanning_tree(&single, DEFAULT_CAP).unwrap();
        assert_eq!((r.opt_internal_weight, r.best_tree.len()), (0, 0));
        let pair = Graph::new(vec![5, 6], &[(0, 1)]).unwrap();
        assert_eq!(optimal_internal_spanning_tree(&pair, DEFAULT_CAP).unwrap().opt_internal_weight, 0);
    }

    #[test]
    fn cap_is_enforced() {
        assert_eq!(optimal_internal_spanning_tree(&prism(), 5), Err(SolveError::ExactSolveTooLarge { n: 6, cap: 5 }));
    }
}
