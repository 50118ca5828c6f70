//! Cubic graphs: the ratio-greedy DFS tree rooted at the vertex with the
//! lightest closed neighborhood, and a checker for the alternating-path
//! argument that bounds it.

use std::collections::HashMap;

use crate::dfs::{run_greedy_dfs, BranchCriterion, DfsTree};
use crate::error::{require_cubic, SolveError, Violation};
use crate::graph::{Graph, Vertex, Weight};
use crate::oracle::{optimal_internal_spanning_tree, DEFAULT_CAP};
use crate::solution::{cubic_bound, meets_bound, Algorithm, Bound, SpanningTreeSolution};

/// Vertex minimizing `w(N[v])`, ties to the smallest index.
pub fn select_root_cubic(g: &Graph) -> Result<Vertex, SolveError> {
    require_cubic(g)?;
    Ok((0..g.n()).min_by_key(|&v| (g.closed_neighborhood_weight(v), v)).expect("graph is non-empty"))
}

/// The greedy tree itself, with the ancestor property checked.
pub fn greedy_cubic_tree(g: &Graph) -> Result<DfsTree, SolveError> {
    let root = select_root_cubic(g)?;
    let tree = run_greedy_dfs(g, root, BranchCriterion::RatioWeightOverUnvisited);
    tree.check_ancestor_property(g)?;
    Ok(tree)
}

pub fn solve_cubic(g: &Graph) -> Result<SpanningTreeSolution, SolveError> {
    let tree = greedy_cubic_tree(g)?;
    let sol = SpanningTreeSolution::from_edges(g, tree.tree_edges(), cubic_bound(g.n()), Algorithm::Cubic);
    if !meets_bound(sol.internal_weight, sol.total_weight, sol.guarantee) {
        return Err(SolveError::invariant(
            "cubic-bound",
            format!("internal weight {} of {} is below {}", sol.internal_weight, sol.total_weight, sol.guarantee),
        ));
    }
    Ok(sol)
}

/// Exact answer when `n <= 3 / epsilon`, the greedy tree otherwise.
pub fn approx_cubic(g: &Graph, epsilon: Bound) -> Result<SpanningTreeSolution, SolveError> {
    approx_cubic_with_cap(g, epsilon, DEFAULT_CAP)
}

pub fn approx_cubic_with_cap(g: &Graph, epsilon: Bound, cap: usize) -> Result<SpanningTreeSolution, SolveError> {
    require_cubic(g)?;
    if *epsilon.numer() == 0 {
        return Err(SolveError::InvalidEpsilon(format!("{epsilon} is not positive")));
    }
    let small = g.n() as u128 * *epsilon.numer() as u128 <= 3 * *epsilon.denom() as u128;
    if small {
        Ok(optimal_internal_spanning_tree(g, cap)?.into_solution(g))
    } else {
        solve_cubic(g)
    }
}

/// The two alternating paths collected for one leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafPaths {
    pub leaf: Vertex,
    /// Lower component of each tree edge on the path that starts with the
    /// deeper of the leaf's two backward edges.
    pub near: Vec<Vertex>,
    /// Same for the path starting with the shallower backward edge.
    pub far: Vec<Vertex>,
    pub near_weight: Weight,
    pub far_weight: Weight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathLemmaReport {
    pub leaves: Vec<LeafPaths>,
}

/// Rebuilds, for every leaf `a`, the two alternating backward/tree-edge
/// paths and checks that the near path carries at least `2 w(a)`, the far
/// path at least `w(a)`, that the inner path vertices have tree degree 2,
/// and that the collected vertex sets only overlap at the root's unique
/// child, at most twice.
pub fn check_path_lemma(g: &Graph, t: &DfsTree) -> Result<PathLemmaReport, SolveError> {
    require_cubic(g)?;
    let mut leaves = Vec::new();
    let mut occurrences: HashMap<Vertex, usize> = HashMap::new();
    for a in t.leaves() {
        let mut uppers: Vec<Vertex> = g.neighbors(a).iter().copied().filter(|&y| Some(y) != t.parent[a]).collect();
        if uppers.len() != 2 {
            return Err(lemma_violation(a, format!("leaf has {} backward edges", uppers.len())));
        }
        uppers.sort_by_key(|&y| std::cmp::Reverse(t.disc[y]));
        let (near, near_u) = follow_path(g, t, a, uppers[0])?;
        let (far, far_u) = follow_path(g, t, a, uppers[1])?;
        let near_weight: Weight = near.iter().map(|&v| g.weight(v)).sum();
        let far_weight: Weight = far.iter().map(|&v| g.weight(v)).sum();
        let w = g.weight(a) as u128;
        if near_u != 1 || far_u != 2 {
            return Err(lemma_violation(a, format!("unvisited counts ({near_u}, {far_u}), expected (1, 2)")));
        }
        if (near_weight as u128) < 2 * w {
            return Err(lemma_violation(a, format!("near path weight {near_weight} < 2 * {w}")));
        }
        if (far_weight as u128) < w {
            return Err(lemma_violation(a, format!("far path weight {far_weight} < {w}")));
        }
        if (near_weight as u128 + far_weight as u128) < 3 * w {
            return Err(lemma_violation(a, "combined path weight below 3 w(a)"));
        }
        for v in near.iter().chain(far.iter()) {
            *occurrences.entry(*v).or_default() += 1;
        }
        leaves.push(LeafPaths { leaf: a, near, far, near_weight, far_weight });
    }

    let root_child = match *t.children(t.root) {
        [c] => Some(c),
        _ => None,
    };
    for (&v, &count) in &occurrences {
        if count > 1 && (Some(v) != root_child || count > 2) {
            return Err(SolveError::invariant(
                "lemma-1/disjoint",
                format!("vertex {v} appears in {count} collected path sets"),
            ));
        }
    }
    Ok(PathLemmaReport { leaves })
}

fn lemma_violation(leaf: Vertex, detail: impl std::fmt::Display) -> SolveError {
    SolveError::InvariantViolation(Violation::new("lemma-1", format!("leaf {leaf}: {detail}")))
}

/// Follows the alternating path from leaf `a` through its backward edge to
/// `start`. Returns the lower tree-edge endpoints `x_1..x_k` and `u(a)` at
/// the moment `x_1` was chosen.
fn follow_path(g: &Graph, t: &DfsTree, a: Vertex, start: Vertex) -> Result<(Vec<Vertex>, usize), SolveError> {
    let mut upper = start;
    let mut path = Vec::new();
    let mut leaf_unvisited = None;
    loop {
        let x =
            t.child_toward(upper, a).ok_or_else(|| lemma_violation(a, format!("{upper} is not a proper ancestor")))?;
        // the decision to descend into x was taken right after the vertex
        // discovered just before x
        let probe = t.order[t.disc[x] - 1];
        if leaf_unvisited.is_none() {
            leaf_unvisited = Some(t.unvisited_count_at(g, a, probe));
        }
        path.push(x);
        if path.len() > g.n() {
            return Err(lemma_violation(a, "path does not terminate"));
        }
        if t.unvisited_count_at(g, x, probe) >= 2 {
            if t.parent[upper].is_some() && t.tree_degree(upper) != 2 {
                return Err(lemma_violation(
                    a,
                    format!("last upper endpoint {upper} has tree degree {}", t.tree_degree(upper)),
                ));
            }
            break;
        }
        if t.tree_degree(x) != 2 || t.tree_degree(upper) != 2 {
            return Err(lemma_violation(a, format!("inner path vertices {upper}, {x} are not of tree degree 2")));
        }
        upper = g
            .neighbors(x)
            .iter()
            .copied()
            .find(|&y| t.disc[y] < t.disc[x] && t.parent[x] != Some(y))
            .ok_or_else(|| lemma_violation(a, format!("{x} has no backward edge upwards")))?;
    }
    Ok((path, leaf_unvisited.unwrap_or(0)))
}
