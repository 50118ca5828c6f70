//! Claw-free graphs without degree-2 vertices.
//!
//! A maximum-weight greedy DFS from a minimum-weight vertex gives a binary
//! tree `T`. Internal charge is then pushed to the leaves (Rules 1 and 2),
//! and `T` is rewired into `T'` until every non-root leaf holds at least
//! `2.5 w` of charge, which yields the `3/5 - 3/(5n)` ratio. Every step of
//! the argument is checked as it runs; a broken step aborts the run with an
//! [`SolveError::InvariantViolation`] naming it.
//!
//! Degree-1 vertices are accepted: they are leaves of every spanning tree,
//! so they run with weight 0 and their leaves are left unprocessed.

use std::collections::{BTreeMap, HashSet};

use crate::charge::{ChargeLedger, Fraction, Holder, InsufficientCharge};
use crate::dfs::{run_greedy_dfs, BranchCriterion, DfsTree};
use crate::error::{SolveError, Violation};
use crate::graph::{Graph, Vertex, Weight};
use crate::oracle::{optimal_internal_spanning_tree, DEFAULT_CAP};
use crate::solution::{
    clawfree_bound, interim_bound, internal_weight, meets_bound, Algorithm, Bound, SpanningTreeSolution,
};
use crate::trace::{BadLeafCase, CaseKind, Phase, TraceEvent};

use Holder::{Free, Vertex as At};

/// Where a leaf of `T` attaches to the rest of the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafAnnotation {
    pub leaf: Vertex,
    /// Upper endpoints of the leaf's backward edges, deepest first.
    pub a_list: Vec<Vertex>,
    /// `a_prime_list[i]` is the child of `a_list[i]` towards the leaf.
    pub a_prime_list: Vec<Vertex>,
    /// Closest ancestor with two children, or the root.
    pub a_star: Vertex,
    pub a_prime_star: Vertex,
    /// The leaf's parent is `a_star`.
    pub short: bool,
}

impl LeafAnnotation {
    pub fn k(&self) -> usize {
        self.a_list.len()
    }

    fn a1(&self) -> Vertex {
        self.a_list[0]
    }

    fn a2(&self) -> Vertex {
        self.a_list[1]
    }

    fn a1p(&self) -> Vertex {
        self.a_prime_list[0]
    }

    fn a2p(&self) -> Vertex {
        self.a_prime_list[1]
    }
}

/// One annotation per leaf of `t`, in discovery order.
pub fn annotate_leaves(t: &DfsTree, g: &Graph) -> Vec<LeafAnnotation> {
    t.leaves()
        .into_iter()
        .map(|a| {
            let parent = t.parent[a].expect("leaves are not the root");
            let mut a_list: Vec<Vertex> = g.neighbors(a).iter().copied().filter(|&y| y != parent).collect();
            a_list.sort_by_key(|&y| std::cmp::Reverse(t.disc[y]));
            let a_prime_list = a_list.iter().map(|&y| t.child_toward(y, a).expect("backward edges go up")).collect();
            let mut a_star = parent;
            while a_star != t.root && t.child_count(a_star) < 2 {
                a_star = t.parent[a_star].expect("non-root");
            }
            let a_prime_star = t.child_toward(a_star, a).expect("a_star is above the leaf");
            LeafAnnotation { leaf: a, a_list, a_prime_list, a_star, a_prime_star, short: a_star == parent }
        })
        .collect()
}

/// Weights used during the run: degree-1 vertices count as 0.
pub fn working_weights(g: &Graph) -> Vec<Weight> {
    (0..g.n()).map(|v| if g.degree(v) == 1 { 0 } else { g.weight(v) }).collect()
}

/// Checks the input class: no degree-2 vertex and no induced claw.
pub fn check_clawfree_input(g: &Graph) -> Result<(), SolveError> {
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) == 2) {
        return Err(SolveError::HasDegreeTwoVertex(v));
    }
    if let Some((center, leaves)) = g.find_claw() {
        return Err(SolveError::NotClawFree { center, leaves });
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CaseStats {
    pub rule1: usize,
    pub rule2: usize,
    pub good: usize,
    pub bad: usize,
    pub e_edges: usize,
    pub cases: BTreeMap<CaseKind, usize>,
    pub bad_leaf: BTreeMap<BadLeafCase, usize>,
}

#[derive(Debug, Clone)]
pub struct ClawFreeRun {
    pub solution: SpanningTreeSolution,
    /// The greedy tree `T` before rewiring.
    pub dfs: DfsTree,
    pub working_weights: Vec<Weight>,
    pub annotations: Vec<LeafAnnotation>,
    /// Internal weight of `T`.
    pub interim_internal_weight: Weight,
    pub ledger: ChargeLedger,
    /// Empty unless tracing was requested.
    pub trace: Vec<TraceEvent>,
    pub stats: CaseStats,
}

pub fn solve_clawfree(g: &Graph) -> Result<SpanningTreeSolution, SolveError> {
    run_clawfree(g, false).map(|run| run.solution)
}

/// Exact answer when `n < 1 / epsilon`, the rewired tree otherwise.
pub fn approx_clawfree(g: &Graph, epsilon: Bound) -> Result<SpanningTreeSolution, SolveError> {
    approx_clawfree_with_cap(g, epsilon, DEFAULT_CAP)
}

pub fn approx_clawfree_with_cap(g: &Graph, epsilon: Bound, cap: usize) -> Result<SpanningTreeSolution, SolveError> {
    if *epsilon.numer() == 0 || epsilon >= Bound::new(3, 5) {
        return Err(SolveError::InvalidEpsilon(format!("{epsilon} is not in (0, 3/5)")));
    }
    check_clawfree_input(g)?;
    if (g.n() as u128) * (*epsilon.numer() as u128) < *epsilon.denom() as u128 {
        Ok(optimal_internal_spanning_tree(g, cap)?.into_solution(g))
    } else {
        solve_clawfree(g)
    }
}

/// Runs the full pipeline; with `trace` set, records every event and also
/// checks that `T'` spans after each rewiring step.
pub fn run_clawfree(g: &Graph, trace: bool) -> Result<ClawFreeRun, SolveError> {
    check_clawfree_input(g)?;
    let weights = working_weights(g);
    let wg = g.with_weights(weights.clone());
    let root = (0..g.n()).min_by_key(|&v| (weights[v], v)).expect("graph is non-empty");
    let t = run_greedy_dfs(&wg, root, BranchCriterion::MaxWeight);
    t.check_ancestor_property(&wg)?;
    t.check_binary()?;
    let annotations = annotate_leaves(&t, &wg);

    let mut state = Rewrite::new(&wg, &t, &annotations, trace);
    state.record_tree();
    state.check_leaf_adjacency()?;
    state.check_greedy_property()?;
    state.distribute_rules()?;

    let interim_internal_weight = internal_weight(&wg, &t.tree_edges());
    let w_total = wg.total_weight();
    if !meets_bound(interim_internal_weight, w_total, interim_bound(g.n())) {
        return Err(SolveError::invariant(
            "interim-bound",
            format!("T has internal weight {interim_internal_weight} of {w_total}, below {}", interim_bound(g.n())),
        ));
    }

    state.classify()?;
    state.build_e();
    state.check_twins()?;
    state.process_e()?;
    state.check_e_properties()?;
    state.handle_bad_leaves()?;
    state.finish()?;

    let edges = state.tree_edges();
    let solution = SpanningTreeSolution::from_edges(g, edges, clawfree_bound(g.n()), Algorithm::ClawFree);
    if !meets_bound(solution.internal_weight, w_total, solution.guarantee) {
        return Err(SolveError::invariant(
            "bound",
            format!("internal weight {} of {w_total} is below {}", solution.internal_weight, solution.guarantee),
        ));
    }
    let Rewrite { ledger, events, stats, .. } = state;
    Ok(ClawFreeRun {
        solution,
        dfs: t,
        working_weights: weights,
        annotations,
        interim_internal_weight,
        ledger,
        trace: events.unwrap_or_default(),
        stats,
    })
}

fn key(u: Vertex, v: Vertex) -> (Vertex, Vertex) {
    (u.min(v), u.max(v))
}

fn violation(label: &str, detail: String) -> SolveError {
    SolveError::InvariantViolation(Violation::new(label, detail))
}

fn relabel(label: &'static str) -> impl Fn(InsufficientCharge) -> SolveError {
    move |e| violation(label, e.to_string())
}

struct Rewrite<'a> {
    g: &'a Graph,
    t: &'a DfsTree,
    ann: &'a [LeafAnnotation],
    /// `slots[q]`: processed leaves `a` with `q = a_i`, as `(annotation, i)`
    /// for `i` in `{0, 1}`.
    slots: Vec<Vec<(usize, usize)>>,
    adj: Vec<Vec<Vertex>>,
    removed: HashSet<(Vertex, Vertex)>,
    added: HashSet<(Vertex, Vertex)>,
    ledger: ChargeLedger,
    /// Tree edge `(parent(x), x)` lies in `E`.
    in_e: Vec<bool>,
    /// Tree edge `(parent(x), x)` lies on a leaf-branch.
    on_branch: Vec<bool>,
    star_count: Vec<u32>,
    /// Annotation indices of the leaves introducing `E`, in order.
    e: Vec<usize>,
    introducer: Vec<bool>,
    saturated: Vec<Option<Vertex>>,
    good: Vec<bool>,
    held_after_rules: Vec<u64>,
    case_of: Vec<Option<CaseKind>>,
    events: Option<Vec<TraceEvent>>,
    check_steps: bool,
    stats: CaseStats,
}

impl<'a> Rewrite<'a> {
    fn new(g: &'a Graph, t: &'a DfsTree, ann: &'a [LeafAnnotation], trace: bool) -> Self {
        let n = g.n();
        let mut slots = vec![Vec::new(); n];
        let mut on_branch = vec![false; n];
        let mut star_count = vec![0; n];
        for (idx, la) in ann.iter().enumerate() {
            star_count[la.a_star] += 1;
            let mut x = la.leaf;
            loop {
                on_branch[x] = true;
                if x == la.a_prime_star {
                    break;
                }
                x = t.parent[x].expect("below a_star");
            }
            if la.k() >= 2 {
                slots[la.a1()].push((idx, 0));
                slots[la.a2()].push((idx, 1));
            }
        }
        let mut adj = vec![Vec::new(); n];
        for (p, c) in t.tree_edges() {
            adj[p].push(c);
            adj[c].push(p);
        }
        Rewrite {
            g,
            t,
            ann,
            slots,
            adj,
            removed: HashSet::new(),
            added: HashSet::new(),
            ledger: ChargeLedger::new(g.weights()),
            in_e: vec![false; n],
            on_branch,
            star_count,
            e: Vec::new(),
            introducer: vec![false; n],
            saturated: vec![None; n],
            good: vec![true; n],
            held_after_rules: Vec::new(),
            case_of: vec![None; n],
            events: trace.then(Vec::new),
            check_steps: trace,
            stats: CaseStats::default(),
        }
    }

    fn emit(&mut self, event: TraceEvent) {
        if let Some(events) = &mut self.events {
            events.push(event);
        }
    }

    fn w(&self, v: Vertex) -> u64 {
        self.g.weight(v)
    }

    fn processed(&self) -> impl Iterator<Item = &'a LeafAnnotation> + 'a {
        let ann: &'a [LeafAnnotation] = self.ann;
        ann.iter().filter(|la| la.k() >= 2)
    }

    fn record_tree(&mut self) {
        if self.events.is_none() {
            return;
        }
        self.emit(TraceEvent::Root(self.t.root));
        for (parent, child) in self.t.tree_edges() {
            self.emit(TraceEvent::Tree { parent, child });
        }
        for i in 0..self.t.backward_edges.len() {
            let (lower, upper) = self.t.backward_edges[i];
            self.emit(TraceEvent::Back { lower, upper });
        }
    }

    fn move_amount(&mut self, source: Vertex, amount: u64, from: Holder, to: Holder) -> Result<(), InsufficientCharge> {
        let mv = self.ledger.move_amount(source, amount, from, to)?;
        if amount > 0 && from != to {
            self.emit(TraceEvent::Move(mv));
        }
        Ok(())
    }

    fn transfer(
        &mut self,
        source: Vertex,
        fraction: Fraction,
        from: Holder,
        to: Holder,
    ) -> Result<(), InsufficientCharge> {
        let amount = self.ledger.fraction_of(source, fraction);
        self.move_amount(source, amount, from, to)
    }

    fn move_all(&mut self, source: Vertex, from: Holder, to: Holder) {
        let amount = self.ledger.amount(source, from);
        self.move_amount(source, amount, from, to).expect("moving what is there");
    }

    /// Pulls `source`'s charge from itself and the free pool into `to`,
    /// then insists `to` holds all of it.
    fn gather(&mut self, source: Vertex, to: Vertex) -> Result<(), SolveError> {
        self.move_all(source, At(source), At(to));
        self.move_all(source, Free, At(to));
        let have = self.ledger.amount(source, At(to));
        if have != self.ledger.charge_of(source) {
            return Err(violation(
                "charge",
                format!("{to} collects {have} of {} half-units of vertex {source}", self.ledger.charge_of(source)),
            ));
        }
        Ok(())
    }

    fn require_held(&self, v: Vertex, label: &str, what: &str) -> Result<(), SolveError> {
        let held = self.ledger.held(v);
        if (held as u128) < 5 * self.w(v) as u128 {
            return Err(violation(label, format!("{what} {v} holds {held} half-units, needs {}", 5 * self.w(v))));
        }
        Ok(())
    }

    fn tree_degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    fn is_leaf_now(&self, v: Vertex) -> bool {
        v != self.t.root && self.adj[v].len() == 1
    }

    fn remove_edge(&mut self, u: Vertex, v: Vertex, case_iv: bool) -> Result<(), SolveError> {
        let k = key(u, v);
        if self.removed.contains(&k) || !self.adj[u].contains(&v) {
            return Err(violation("double-removal", format!("edge ({u}, {v}) is not in T'")));
        }
        let child = if self.t.parent[v] == Some(u) {
            Some(v)
        } else if self.t.parent[u] == Some(v) {
            Some(u)
        } else {
            None
        };
        let allowed = case_iv || child.is_some_and(|c| self.in_e[c] || self.on_branch[c]);
        if !allowed {
            return Err(violation("(E5)", format!("edge ({u}, {v}) is neither in E nor on a leaf-branch")));
        }
        self.removed.insert(k);
        self.adj[u].retain(|&x| x != v);
        self.adj[v].retain(|&x| x != u);
        self.emit(TraceEvent::Remove(u, v));
        Ok(())
    }

    fn add_edge(&mut self, u: Vertex, v: Vertex) -> Result<(), SolveError> {
        if !self.g.has_edge(u, v) {
            return Err(violation("non-graph-edge", format!("({u}, {v}) is not an edge of G")));
        }
        let k = key(u, v);
        if self.added.contains(&k) || self.adj[u].contains(&v) {
            return Err(violation("double-add", format!("edge ({u}, {v}) is already in T'")));
        }
        self.added.insert(k);
        self.adj[u].push(v);
        self.adj[v].push(u);
        self.emit(TraceEvent::Add(u, v));
        Ok(())
    }

    fn check_spanning(&self, when: &str) -> Result<(), SolveError> {
        let n = self.g.n();
        let edges: usize = self.adj.iter().map(Vec::len).sum::<usize>() / 2;
        let mut seen = vec![false; n];
        let mut stack = vec![self.t.root];
        seen[self.t.root] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        if edges + 1 != n || count != n {
            return Err(violation("spanning", format!("after {when}: {edges} edges reaching {count} of {n} vertices")));
        }
        Ok(())
    }

    fn step_done(&self, when: &str) -> Result<(), SolveError> {
        if self.check_steps {
            self.check_spanning(when)?;
        }
        Ok(())
    }

    fn tree_edges(&self) -> Vec<(Vertex, Vertex)> {
        (0..self.g.n()).flat_map(|u| self.adj[u].iter().filter(move |&&v| u < v).map(move |&v| (u, v))).collect()
    }

    fn check_leaf_adjacency(&self) -> Result<(), SolveError> {
        let mut count = vec![0usize; self.g.n()];
        for la in self.ann {
            for &q in &la.a_list {
                count[q] += 1;
                if count[q] > 2 {
                    return Err(violation("lemma-3", format!("vertex {q} is adjacent to three or more leaves of T")));
                }
            }
        }
        Ok(())
    }

    fn check_greedy_property(&self) -> Result<(), SolveError> {
        for la in self.processed() {
            for &x in &la.a_prime_list {
                if self.w(x) < self.w(la.leaf) {
                    return Err(violation(
                        "greedy-property",
                        format!("w({x}) = {} < w({}) = {}", self.w(x), la.leaf, self.w(la.leaf)),
                    ));
                }
            }
        }
        Ok(())
    }

    fn distribute_rules(&mut self) -> Result<(), SolveError> {
        self.emit(TraceEvent::Phase(Phase::Rules));
        let ann = self.ann;
        for pos in 0..self.t.order.len() {
            let q = self.t.order[pos];
            let slots = self.slots[q].clone();
            let (rule, fraction) = match slots.len() {
                0 => continue,
                1 => (1, Fraction::Whole),
                2 => (2, Fraction::Half),
                s => return Err(violation("lemma-3", format!("{s} leaves use vertex {q} as a_1 or a_2"))),
            };
            for (idx, i) in slots {
                let la = &ann[idx];
                let (leaf, source) = (la.leaf, la.a_prime_list[i]);
                self.emit(TraceEvent::Rule { rule, q, leaf, source });
                self.transfer(source, fraction, At(source), At(leaf)).map_err(relabel("charge"))?;
                if rule == 1 {
                    self.stats.rule1 += 1;
                } else {
                    self.stats.rule2 += 1;
                }
            }
        }
        self.emit(TraceEvent::Phase(Phase::Edges));
        for la in self.processed() {
            let held = self.ledger.held(la.leaf);
            if (held as u128) < 4 * self.w(la.leaf) as u128 {
                return Err(violation("rules/2w", format!("leaf {} holds {held} half-units after the rules", la.leaf)));
            }
        }
        self.held_after_rules = (0..self.g.n()).map(|v| self.ledger.held(v)).collect();
        Ok(())
    }

    fn classify(&mut self) -> Result<(), SolveError> {
        for la in self.processed() {
            let a = la.leaf;
            let good = self.ledger.held(a) as u128 >= 5 * self.w(a) as u128;
            self.good[a] = good;
            self.emit(TraceEvent::Classify { leaf: a, good });
            if good {
                self.stats.good += 1;
                continue;
            }
            self.stats.bad += 1;
            if !(self.t.is_ancestor(la.a1(), la.a_star) && self.t.is_ancestor(la.a2(), la.a_star)) {
                return Err(violation("(B1)", format!("bad leaf {a}: a_1 = {} is below a_* = {}", la.a1(), la.a_star)));
            }
        }
        Ok(())
    }

    /// The other leaf `b` and index `j` with `b'_j = a'_2`.
    fn twin(&self, la: &LeafAnnotation) -> Option<(&'a LeafAnnotation, usize)> {
        self.slots[la.a2()]
            .iter()
            .map(|&(idx, j)| (&self.ann[idx], j))
            .find(|(lb, j)| lb.leaf != la.leaf && lb.a_prime_list[*j] == la.a2p())
    }

    fn check_twins(&self) -> Result<(), SolveError> {
        for la in self.processed() {
            let a = la.leaf;
            if !self.good[a] && !self.introducer[a] && self.twin(la).is_none() {
                return Err(violation("(B2)", format!("bad leaf {a}: no other leaf shares a'_2 = {}", la.a2p())));
            }
        }
        Ok(())
    }

    fn build_e(&mut self) {
        let ann = self.ann;
        for (idx, la) in ann.iter().enumerate() {
            if la.k() < 2 {
                continue;
            }
            let (a1, a2) = (la.a1(), la.a2());
            let qualifies =
                self.t.is_ancestor(a1, la.a_star) && self.t.is_ancestor(a2, la.a_star) && self.t.parent[a1] == Some(a2);
            if qualifies && !self.in_e[a1] {
                self.in_e[a1] = true;
                self.introducer[la.leaf] = true;
                self.e.push(idx);
                self.emit(TraceEvent::EdgeSet { a1, a2, leaf: la.leaf });
            }
        }
        self.stats.e_edges = self.e.len();
    }

    fn is_deep(&self, v: Vertex) -> bool {
        v != self.t.root && self.t.child_count(v) == 2 && self.star_count[v] == 2
    }

    /// Replaces `(a1, a2)` by `(a, a1)` and `(a, a2)` after removing `cut`.
    fn reattach(&mut self, la: &LeafAnnotation, cut: (Vertex, Vertex)) -> Result<(), SolveError> {
        self.remove_edge(cut.0, cut.1, false)?;
        self.remove_edge(la.a1(), la.a2(), false)?;
        self.add_edge(la.leaf, la.a1())?;
        self.add_edge(la.leaf, la.a2())
    }

    fn release_half_a2p(&mut self, la: &LeafAnnotation) -> Result<(), SolveError> {
        self.transfer(la.a2p(), Fraction::Half, At(la.leaf), Free).map_err(relabel("(E4)"))
    }

    fn process_e(&mut self) -> Result<(), SolveError> {
        let ann = self.ann;
        for i in 0..self.e.len() {
            let la = &ann[self.e[i]];
            let kind = self.process_entry(la)?;
            self.case_of[la.leaf] = Some(kind);
            if kind.releases_half() {
                let src = la.a2p();
                if self.ledger.free(src) < self.ledger.fraction_of(src, Fraction::Half) {
                    return Err(violation(
                        "(E4)",
                        format!("half of a'_2 = {src} was not released by leaf {}", la.leaf),
                    ));
                }
            }
            *self.stats.cases.entry(kind).or_default() += 1;
            self.step_done(&format!("case {} of leaf {}", kind.label(), la.leaf))?;
        }
        Ok(())
    }

    fn process_entry(&mut self, la: &'a LeafAnnotation) -> Result<CaseKind, SolveError> {
        let a = la.leaf;
        let star = la.a_star;
        let w_a = self.w(a);
        let sat = self.saturated[star].is_some();
        let kind = if !sat {
            if la.short {
                CaseKind::Case11
            } else if la.a1() == star && self.t.parent[a] == Some(la.a_prime_star) {
                CaseKind::Case12Swap
            } else if self.w(self.t.parent[a].expect("non-root")) >= w_a {
                CaseKind::Case12Keep
            } else {
                CaseKind::Case12Rewire
            }
        } else if self.t.parent[star] == Some(la.a1()) {
            CaseKind::Case2
        } else if la.short {
            if self.w(star) >= w_a {
                CaseKind::Case31Keep
            } else {
                CaseKind::Case31Rewire
            }
        } else if self.w(star) + self.w(la.a_prime_star) >= w_a {
            CaseKind::Case32Keep
        } else {
            CaseKind::Case32Rewire
        };
        self.emit(TraceEvent::Case { kind, leaf: a });

        match kind {
            CaseKind::Case11 => {
                self.reattach(la, (a, star))?;
                for source in [la.a1p(), la.a2p()] {
                    self.move_all(source, At(a), Free);
                }
                if self.is_deep(star) {
                    self.saturated[star] = Some(a);
                    self.emit(TraceEvent::Saturate { vertex: star, leaf: a });
                }
            }
            CaseKind::Case12Swap => {
                self.remove_edge(la.a1(), la.a2(), false)?;
                self.add_edge(a, la.a2())?;
                for source in [la.a1p(), la.a2p()] {
                    self.move_all(source, At(a), Free);
                }
                if self.is_deep(star) {
                    self.saturated[star] = Some(a);
                    self.emit(TraceEvent::Saturate { vertex: star, leaf: a });
                }
            }
            CaseKind::Case12Keep => {
                let a_prime = self.t.parent[a].expect("non-root");
                self.gather(a_prime, a)?;
                self.release_half_a2p(la)?;
                self.require_held(a, "(E1)", "leaf")?;
            }
            CaseKind::Case12Rewire => {
                let a_prime = self.t.parent[a].expect("non-root");
                self.reattach(la, (a, a_prime))?;
                self.transfer(a, Fraction::Whole, At(a), At(a_prime)).map_err(relabel("charge"))?;
                self.transfer(la.a1p(), Fraction::Half, At(a), At(a_prime)).map_err(relabel("charge"))?;
                self.release_half_a2p(la)?;
                self.require_new_leaf(a_prime)?;
            }
            CaseKind::Case2 => {
                self.gather(star, a)?;
                self.require_held(a, "(E1)", "leaf")?;
            }
            CaseKind::Case31Keep => {
                self.gather(star, a)?;
                self.release_half_a2p(la)?;
                self.require_held(a, "(E1)", "leaf")?;
            }
            CaseKind::Case31Rewire => {
                self.reattach(la, (a, star))?;
                self.transfer(a, Fraction::Whole, At(a), At(star)).map_err(relabel("charge"))?;
                self.transfer(la.a1p(), Fraction::Half, At(a), At(star)).map_err(relabel("charge"))?;
                self.release_half_a2p(la)?;
                self.move_all(star, Free, At(star));
                self.require_new_leaf(star)?;
            }
            CaseKind::Case32Keep => {
                self.gather(star, a)?;
                self.gather(la.a_prime_star, a)?;
                self.release_half_a2p(la)?;
                self.require_held(a, "(E1)", "leaf")?;
            }
            CaseKind::Case32Rewire => {
                let sp = la.a_prime_star;
                self.reattach(la, (star, sp))?;
                let parcels = [(a, 2 * w_a), (la.a1p(), self.w(la.a1p()))];
                let moves = self
                    .ledger
                    .split_transfer_to_two(a, &parcels, (star, 3 * self.w(star)), (sp, 3 * self.w(sp)))
                    .map_err(relabel("charge"))?;
                for mv in moves {
                    self.emit(TraceEvent::Move(mv));
                }
                self.release_half_a2p(la)?;
                self.move_all(star, Free, At(star));
                self.move_all(sp, Free, At(sp));
                self.require_new_leaf(star)?;
                self.require_new_leaf(sp)?;
            }
        }
        Ok(kind)
    }

    fn require_new_leaf(&self, v: Vertex) -> Result<(), SolveError> {
        if !self.is_leaf_now(v) {
            return Err(violation("(E2)", format!("{v} should be a new leaf but has degree {}", self.tree_degree(v))));
        }
        self.require_held(v, "(E2)", "new leaf")
    }

    fn check_e_properties(&mut self) -> Result<(), SolveError> {
        self.emit(TraceEvent::Phase(Phase::Bad));
        let t_leaf: Vec<bool> = (0..self.g.n()).map(|v| self.t.is_leaf(v)).collect();
        for &idx in &self.e {
            let la = &self.ann[idx];
            let a = la.leaf;
            if self.is_leaf_now(a) {
                self.require_held(a, "(E1)", "introducing leaf")?;
            }
        }
        for (v, &was_leaf) in t_leaf.iter().enumerate() {
            if !self.is_leaf_now(v) {
                continue;
            }
            if !was_leaf {
                self.require_held(v, "(E2)", "new leaf")?;
            } else if !self.introducer[v] && self.ledger.held(v) != self.held_after_rules[v] {
                return Err(violation(
                    "(E3)",
                    format!("untouched leaf {v} holds {} instead of {}", self.ledger.held(v), self.held_after_rules[v]),
                ));
            }
        }
        Ok(())
    }

    fn handle_bad_leaves(&mut self) -> Result<(), SolveError> {
        for la in self.processed() {
            let a = la.leaf;
            if self.good[a] || self.introducer[a] || !self.is_leaf_now(a) {
                continue;
            }
            if self.ledger.held(a) as u128 >= 5 * self.w(a) as u128 {
                continue;
            }
            let (lb, j) = self.twin(la).ok_or_else(|| violation("(B2)", format!("bad leaf {a} has no twin")))?;
            let b = lb.leaf;
            let target = la.a2p();
            let case = if self.g.has_edge(a, target) {
                BadLeafCase::LeafAdjacent
            } else if self.g.has_edge(b, target) {
                if j == 1 {
                    BadLeafCase::SiblingSecond
                } else if self.in_e[lb.a1()] && self.t.parent[lb.a1()] == Some(lb.a2()) {
                    BadLeafCase::SiblingFirstProcessed
                } else {
                    BadLeafCase::SiblingFirstRewire
                }
            } else {
                return Err(violation(
                    "bad-leaf",
                    format!("bad leaf {a}: neither ({a}, {target}) nor ({b}, {target}) is an edge"),
                ));
            };
            self.emit(TraceEvent::BadLeaf { leaf: a, case });
            match case {
                BadLeafCase::LeafAdjacent | BadLeafCase::SiblingSecond | BadLeafCase::SiblingFirstProcessed => {
                    self.transfer(target, Fraction::Half, Free, At(a)).map_err(relabel("bad-leaf"))?;
                }
                BadLeafCase::SiblingFirstRewire => {
                    let b_star = self.t.parent[b].expect("non-root");
                    let b1 = lb.a1();
                    if self.t.parent[b_star] != Some(b1) || !self.is_leaf_now(b) {
                        return Err(violation(
                            "bad-leaf",
                            format!("bad leaf {a}: twin {b} is not a short-branch leaf under {b1} in T'"),
                        ));
                    }
                    self.remove_edge(b_star, b1, true)?;
                    self.add_edge(b, b1)?;
                    self.transfer(target, Fraction::Half, At(b), At(a)).map_err(relabel("bad-leaf"))?;
                }
            }
            *self.stats.bad_leaf.entry(case).or_default() += 1;
            self.require_held(a, "bad-leaf", "bad leaf")?;
            self.step_done(&format!("bad leaf {a}"))?;
        }
        self.emit(TraceEvent::Phase(Phase::Done));
        Ok(())
    }

    fn finish(&self) -> Result<(), SolveError> {
        self.check_spanning("rewiring")?;
        for v in 0..self.g.n() {
            if self.is_leaf_now(v) {
                self.require_held(v, "final-leaf-charge", "leaf")?;
            }
        }
        self.ledger.check_conservation()?;
        Ok(())
    }
}
