//! Greedy depth-first search.
//!
//! At each branching step the search looks at the current vertex's
//! unvisited neighbors and descends into the best one according to a
//! [`BranchCriterion`]; when none is left it backtracks. The neighbor list
//! is rescanned on every step, so a vertex with `c` children is scanned
//! `c + 1` times. That is linear on bounded-degree inputs and on the binary
//! trees produced on claw-free inputs.

use std::cmp::Ordering;

use crate::error::Violation;
use crate::graph::{Graph, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchCriterion {
    /// Maximize `w(x) / u(x)` where `u(x)` is the number of unvisited
    /// neighbors of `x`; `u(x) = 0` ranks above every finite ratio.
    RatioWeightOverUnvisited,
    /// Maximize `w(x)`.
    MaxWeight,
}

/// A rooted DFS spanning tree. `disc` is the preorder discovery index and
/// every non-tree edge is recorded as `(lower, upper)` with `upper`
/// discovered first, grouped by `lower` in discovery order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfsTree {
    pub root: Vertex,
    pub parent: Vec<Option<Vertex>>,
    pub disc: Vec<usize>,
    /// Inverse of `disc`.
    pub order: Vec<Vertex>,
    pub backward_edges: Vec<(Vertex, Vertex)>,
    pub depth: Vec<usize>,
    /// Subtree sizes and child ranges are indexed by discovery index: the
    /// children of `v` are `child_list[child_start[i]..child_start[i + 1]]`
    /// with `i = disc[v]`, in discovery order.
    subtree_size: Vec<usize>,
    child_start: Vec<usize>,
    child_list: Vec<Vertex>,
}

/// Per-vertex search state. Up to [`INLINE`] neighbors are stored in the
/// slot itself; for larger degrees `near[0]` indexes the overflow list.
#[derive(Clone, Copy)]
struct Slot {
    weight: u64,
    /// Unvisited neighbor count, with [`VISITED`] set once discovered.
    state: u32,
    degree: u32,
    near: [u32; INLINE],
}

const INLINE: usize = 4;
const VISITED: u32 = 1 << 31;

fn slot_neighbors<'a>(slot: &'a Slot, overflow: &'a [u32]) -> &'a [u32] {
    let d = slot.degree as usize;
    if d <= INLINE {
        &slot.near[..d]
    } else {
        let start = slot.near[0] as usize;
        &overflow[start..start + d]
    }
}

/// Greedy DFS from `root`. Graphs are limited to `2^31` vertices and
/// adjacency entries.
pub fn run_greedy_dfs(g: &Graph, root: Vertex, criterion: BranchCriterion) -> DfsTree {
    let n = g.n();
    assert!(root < n, "root {root} out of range");
    assert!(2 * g.m() < VISITED as usize, "graph too large for the search");
    let mut overflow: Vec<u32> = Vec::new();
    let mut slots: Vec<Slot> = (0..n)
        .map(|v| {
            let nb = g.neighbors(v);
            let mut near = [0u32; INLINE];
            if nb.len() <= INLINE {
                for (slot, &x) in near.iter_mut().zip(nb) {
                    *slot = x as u32;
                }
            } else {
                near[0] = overflow.len() as u32;
                overflow.extend(nb.iter().map(|&x| x as u32));
            }
            Slot { weight: g.weight(v), state: nb.len() as u32, degree: nb.len() as u32, near }
        })
        .collect();

    let mut backward_edges = Vec::with_capacity(g.m() + 1 - n);
    let mut visit = |v: usize, from: u32, slots: &mut [Slot]| {
        slots[v].state |= VISITED;
        let slot = slots[v];
        for &x in slot_neighbors(&slot, &overflow) {
            let s = &mut slots[x as usize];
            s.state -= 1;
            if s.state & VISITED != 0 && x != from {
                backward_edges.push((v, x as usize));
            }
        }
    };

    let mut parent = vec![None; n];
    let mut disc = vec![usize::MAX; n];
    let mut depth = vec![0; n];
    // (vertex, discovery index of its parent) in discovery order
    let mut found: Vec<(u32, u32)> = Vec::with_capacity(n);
    let mut stack: Vec<(u32, u32)> = Vec::with_capacity(n);
    visit(root, root as u32, &mut slots);
    disc[root] = 0;
    found.push((root as u32, 0));
    stack.push((root as u32, 0));
    while let Some(&(v, i)) = stack.last() {
        match pick(&overflow, v as usize, &slots, criterion) {
            Some(x) => {
                visit(x as usize, v, &mut slots);
                let xu = x as usize;
                disc[xu] = found.len();
                parent[xu] = Some(v as usize);
                depth[xu] = stack.len();
                stack.push((x, found.len() as u32));
                found.push((x, i));
            }
            None => {
                stack.pop();
            }
        }
    }
    debug_assert_eq!(found.len(), n, "graph must be connected");

    let order: Vec<Vertex> = found.iter().map(|&(v, _)| v as usize).collect();
    let mut child_start = vec![0usize; n + 1];
    for &(_, pi) in &found[1..] {
        child_start[pi as usize + 1] += 1;
    }
    for i in 0..n {
        child_start[i + 1] += child_start[i];
    }
    let mut fill = child_start.clone();
    let mut child_list = vec![0; n - 1];
    for &(v, pi) in &found[1..] {
        child_list[fill[pi as usize]] = v as usize;
        fill[pi as usize] += 1;
    }
    let mut subtree_size = vec![1; n];
    for (i, &(_, pi)) in found.iter().enumerate().skip(1).rev() {
        subtree_size[pi as usize] += subtree_size[i];
    }

    DfsTree { root, parent, disc, order, backward_edges, depth, subtree_size, child_start, child_list }
}

fn pick(overflow: &[u32], v: usize, slots: &[Slot], criterion: BranchCriterion) -> Option<u32> {
    if slots[v].state & !VISITED == 0 {
        return None;
    }
    let mut best: Option<(u32, u64, u64)> = None;
    for &x in slot_neighbors(&slots[v], overflow) {
        let s = slots[x as usize];
        if s.state & VISITED != 0 {
            continue;
        }
        let (w, u) = (s.weight, (s.state & !VISITED) as u64);
        let better = match (best, criterion) {
            (None, _) => true,
            (Some((_, bw, _)), BranchCriterion::MaxWeight) => w > bw,
            (Some((_, bw, bu)), BranchCriterion::RatioWeightOverUnvisited) => {
                compare_ratio(w, u, bw, bu) == Ordering::Greater
            }
        };
        if better {
            best = Some((x, w, u));
        }
    }
    best.map(|(x, _, _)| x)
}

/// Compares `wa/ua` with `wb/ub` exactly, with `u = 0` meaning `+inf`.
pub fn compare_ratio(wa: u64, ua: u64, wb: u64, ub: u64) -> Ordering {
    match (ua, ub) {
        (0, 0) => Ordering::Equal,
        (0, _) => Ordering::Greater,
        (_, 0) => Ordering::Less,
        _ => (wa as u128 * ub as u128).cmp(&(wb as u128 * ua as u128)),
    }
}

impl DfsTree {
    pub fn n(&self) -> usize {
        self.parent.len()
    }

    /// True iff `u` lies on the tree path from the root to `v` (inclusive).
    pub fn is_ancestor(&self, u: Vertex, v: Vertex) -> bool {
        self.disc[u] <= self.disc[v] && self.disc[v] < self.disc[u] + self.subtree_size[self.disc[u]]
    }

    pub fn children(&self, v: Vertex) -> &[Vertex] {
        let i = self.disc[v];
        &self.child_list[self.child_start[i]..self.child_start[i + 1]]
    }

    pub fn child_count(&self, v: Vertex) -> usize {
        let i = self.disc[v];
        self.child_start[i + 1] - self.child_start[i]
    }

    pub fn is_leaf(&self, v: Vertex) -> bool {
        v != self.root && self.child_count(v) == 0
    }

    /// Leaves in discovery order; the root is never a leaf.
    pub fn leaves(&self) -> Vec<Vertex> {
        self.order.iter().copied().filter(|&v| self.is_leaf(v)).collect()
    }

    /// The child of `ancestor` on the tree path towards `descendant`.
    pub fn child_toward(&self, ancestor: Vertex, descendant: Vertex) -> Option<Vertex> {
        if ancestor == descendant || !self.is_ancestor(ancestor, descendant) {
            return None;
        }
        self.children(ancestor).iter().copied().find(|&c| self.is_ancestor(c, descendant))
    }

    pub fn tree_degree(&self, v: Vertex) -> usize {
        self.child_count(v) + usize::from(self.parent[v].is_some())
    }

    /// Tree edges as `(parent, child)` in discovery order of the child.
    pub fn tree_edges(&self) -> Vec<(Vertex, Vertex)> {
        self.order.iter().filter_map(|&v| self.parent[v].map(|p| (p, v))).collect()
    }

    /// Number of neighbors of `x` still unvisited right after `probe` was
    /// discovered.
    pub fn unvisited_count_at(&self, g: &Graph, x: Vertex, probe: Vertex) -> usize {
        let t = self.disc[probe];
        g.neighbors(x).iter().filter(|&&y| self.disc[y] > t).count()
    }

    /// Every non-tree edge joins a vertex to one of its ancestors.
    pub fn check_ancestor_property(&self, g: &Graph) -> Result<(), Violation> {
        let non_tree = g.m() + 1 - self.n();
        if self.backward_edges.len() != non_tree {
            return Err(Violation::new(
                "observation-1",
                format!("{} backward edges recorded, graph has {non_tree} non-tree edges", self.backward_edges.len()),
            ));
        }
        for &(lower, upper) in &self.backward_edges {
            if lower == upper || !self.is_ancestor(upper, lower) || !g.has_edge(lower, upper) {
                return Err(Violation::new(
                    "observation-1",
                    format!("backward edge ({lower}, {upper}) does not join a vertex to an ancestor"),
                ));
            }
        }
        Ok(())
    }

    /// Every node has at most two children.
    pub fn check_binary(&self) -> Result<(), Violation> {
        match (0..self.n()).find(|&v| self.child_count(v) > 2) {
            Some(v) => Err(Violation::new("lemma-2", format!("vertex {v} has {} children", self.child_count(v)))),
            None => Ok(()),
        }
    }
}
