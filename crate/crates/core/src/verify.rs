//! Independent checks of solver output.
//!
//! [`verify_solution`] looks only at the graph and an edge list.
//! [`audit_invariants`] replays a claw-free trace from scratch: it rebuilds
//! the DFS tree, the leaf annotations and the charge ledger from the events
//! alone and stops at the first event that breaks an invariant.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::charge::Holder;
use crate::error::Violation;
use crate::graph::{Graph, Vertex, Weight};
use crate::solution::{Bound, SpanningTreeSolution};
use crate::trace::{BadLeafCase, CaseKind, Phase, TraceEvent};

/// Which guarantee a tree is held to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Cubic,
    ClawFree,
    None,
}

impl BoundKind {
    /// `max(0, 3/4 - 3/n)`, `max(0, 3/5 - 3/(5n))` or 0.
    pub fn bound(self, n: usize) -> Bound {
        let n = n as i128;
        match self {
            BoundKind::Cubic => clamp(3 * n - 12, 4 * n),
            BoundKind::ClawFree => clamp(3 * n - 3, 5 * n),
            BoundKind::None => Bound::from_integer(0),
        }
    }
}

impl FromStr for BoundKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cubic" => Ok(BoundKind::Cubic),
            "clawfree" => Ok(BoundKind::ClawFree),
            "none" => Ok(BoundKind::None),
            _ => Err(format!("unknown bound kind {s:?}, expected cubic, clawfree or none")),
        }
    }
}

fn clamp(num: i128, den: i128) -> Bound {
    if num <= 0 {
        Bound::from_integer(0)
    } else {
        Bound::new(num as u64, den as u64)
    }
}

fn satisfies(internal: Weight, total: Weight, bound: Bound) -> bool {
    internal as u128 * *bound.denom() as u128 >= *bound.numer() as u128 * total as u128
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub is_spanning: bool,
    pub internal_weight: Weight,
    pub total_weight: Weight,
    /// Total weight with degree-1 vertices counted as 0.
    pub zeroed_total_weight: Weight,
    pub bound: Bound,
    /// `internal_weight >= bound * zeroed_total_weight`, exactly.
    pub bound_satisfied: bool,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, label: &str) -> bool {
        self.violations.iter().any(|v| v.label == label)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        writeln!(out, "is_spanning {}", self.is_spanning)?;
        writeln!(out, "internal_weight {}", self.internal_weight)?;
        writeln!(out, "total_weight {}", self.total_weight)?;
        writeln!(out, "zeroed_total_weight {}", self.zeroed_total_weight)?;
        writeln!(out, "bound {}/{}", self.bound.numer(), self.bound.denom())?;
        writeln!(out, "bound_satisfied {}", self.bound_satisfied)?;
        writeln!(out, "violations {}", self.violations.len())?;
        for v in &self.violations {
            writeln!(out, "violation {} {}", v.label, v.detail)?;
        }
        f.write_str(&out)
    }
}

fn zeroed_total(g: &Graph) -> Weight {
    (0..g.n()).filter(|&v| g.degree(v) != 1).map(|v| g.weight(v)).sum()
}

pub fn verify_solution(g: &Graph, sol: &SpanningTreeSolution, kind: BoundKind) -> VerificationReport {
    verify_tree_edges(g, &sol.tree_edges, kind)
}

/// Checks that `edges` form a spanning tree of `g` and measures it.
pub fn verify_tree_edges(g: &Graph, edges: &[(Vertex, Vertex)], kind: BoundKind) -> VerificationReport {
    let n = g.n();
    let mut violations = Vec::new();
    let mut uf = UnionFind::new(n);
    let mut degree = vec![0usize; n];
    let mut seen = HashSet::new();
    let mut clean = true;
    for &(u, v) in edges {
        if u >= n || v >= n {
            violations.push(Violation::new("invalid-vertex", format!("edge ({u}, {v}) with n = {n}")));
            clean = false;
            continue;
        }
        if !g.has_edge(u, v) {
            violations.push(Violation::new("non-graph-edge", format!("({u}, {v}) is not an edge of G")));
            clean = false;
        }
        if !seen.insert((u.min(v), u.max(v))) {
            violations.push(Violation::new("duplicate-edge", format!("({u}, {v}) listed twice")));
            clean = false;
            continue;
        }
        if !uf.union(u, v) {
            violations.push(Violation::new("cycle", format!("({u}, {v}) closes a cycle")));
            clean = false;
        }
        degree[u] += 1;
        degree[v] += 1;
    }
    let components = uf.components();
    if clean && (edges.len() + 1 != n || components != 1) {
        violations.push(Violation::new(
            "spanning",
            format!("{} edges and {components} components on {n} vertices", edges.len()),
        ));
    }
    let is_spanning = clean && edges.len() + 1 == n && components == 1;
    let internal_weight = (0..n).filter(|&v| degree[v] >= 2).map(|v| g.weight(v)).sum();
    let zeroed_total_weight = zeroed_total(g);
    let bound = kind.bound(n);
    let bound_satisfied = satisfies(internal_weight, zeroed_total_weight, bound);
    if !bound_satisfied {
        violations.push(Violation::new(
            "bound",
            format!("internal weight {internal_weight} of {zeroed_total_weight} is below {bound}"),
        ));
    }
    VerificationReport {
        is_spanning,
        internal_weight,
        total_weight: g.total_weight(),
        zeroed_total_weight,
        bound,
        bound_satisfied,
        violations,
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    sets: usize,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), rank: vec![0; n], sets: n }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        self.sets -= 1;
        true
    }

    fn components(&self) -> usize {
        self.sets
    }
}

/// Replays a claw-free solver trace against `g` and reports the first
/// broken invariant. The measured fields describe the final tree of the
/// replay, or the tree at the point where it stopped.
pub fn audit_invariants(g: &Graph, trace: &[TraceEvent]) -> VerificationReport {
    let mut replay = Replay::new(g);
    let violations = match replay.run(trace) {
        Ok(()) => Vec::new(),
        Err(v) => vec![v],
    };
    let n = g.n();
    let is_spanning = replay.has_tree && replay.spans();
    let internal_weight = (0..n).filter(|&v| replay.adj[v].len() >= 2).map(|v| g.weight(v)).sum();
    let zeroed_total_weight = zeroed_total(g);
    let bound = BoundKind::ClawFree.bound(n);
    VerificationReport {
        is_spanning,
        internal_weight,
        total_weight: g.total_weight(),
        zeroed_total_weight,
        bound,
        bound_satisfied: satisfies(internal_weight, zeroed_total_weight, bound),
        violations,
    }
}

struct LeafInfo {
    leaf: Vertex,
    a: Vec<Vertex>,
    a_prime: Vec<Vertex>,
    star: Vertex,
}

impl LeafInfo {
    fn processed(&self) -> bool {
        self.a.len() >= 2
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Stage {
    Header,
    Rules,
    Classify,
    EdgeSet,
    Cases,
    Bad,
    Done,
}

enum GroupKind {
    Case(CaseKind),
    Bad(BadLeafCase),
}

struct Group {
    kind: GroupKind,
    leaf: usize,
    events: Vec<TraceEvent>,
    removed: Vec<(Vertex, Vertex)>,
}

type Check = Result<(), Violation>;

struct Replay<'a> {
    g: &'a Graph,
    n: usize,
    w: Vec<Weight>,
    root: Vertex,
    has_tree: bool,
    parent: Vec<Option<Vertex>>,
    children: Vec<Vec<Vertex>>,
    depth: Vec<usize>,
    tin: Vec<usize>,
    tout: Vec<usize>,
    t_leaf: Vec<bool>,
    leaves: Vec<LeafInfo>,
    leaf_of: Vec<Option<usize>>,
    slots: Vec<Vec<(usize, usize)>>,
    on_branch: Vec<bool>,
    expected_e: Vec<usize>,
    introducer: Vec<bool>,
    in_e: Vec<bool>,
    adj: Vec<Vec<Vertex>>,
    removed: HashSet<(Vertex, Vertex)>,
    added: HashSet<(Vertex, Vertex)>,
    parcels: HashMap<(Vertex, Holder), u64>,
    held: Vec<u64>,
    held_after_rules: Vec<u64>,
    rules_seen: HashSet<(Vertex, Vertex)>,
    classified: Vec<Option<bool>>,
    e_seen: usize,
    cases_seen: usize,
    group: Option<Group>,
    stage: Stage,
}

fn key(u: Vertex, v: Vertex) -> (Vertex, Vertex) {
    (u.min(v), u.max(v))
}

fn vertices_of(e: &TraceEvent) -> Vec<Vertex> {
    let holders = |h: Holder| match h {
        Holder::Vertex(v) => Some(v),
        Holder::Free => None,
    };
    match *e {
        TraceEvent::Root(v) => vec![v],
        TraceEvent::Tree { parent, child } => vec![parent, child],
        TraceEvent::Back { lower, upper } => vec![lower, upper],
        TraceEvent::Phase(_) => vec![],
        TraceEvent::Rule { q, leaf, source, .. } => vec![q, leaf, source],
        TraceEvent::Move(m) => std::iter::once(m.source).chain(holders(m.from)).chain(holders(m.to)).collect(),
        TraceEvent::Classify { leaf, .. } => vec![leaf],
        TraceEvent::EdgeSet { a1, a2, leaf } => vec![a1, a2, leaf],
        TraceEvent::Case { leaf, .. } => vec![leaf],
        TraceEvent::Remove(u, v) | TraceEvent::Add(u, v) => vec![u, v],
        TraceEvent::Saturate { vertex, leaf } => vec![vertex, leaf],
        TraceEvent::BadLeaf { leaf, .. } => vec![leaf],
    }
}

impl<'a> Replay<'a> {
    fn new(g: &'a Graph) -> Self {
        let n = g.n();
        let w: Vec<Weight> = (0..n).map(|v| if g.degree(v) == 1 { 0 } else { g.weight(v) }).collect();
        let mut parcels = HashMap::new();
        for (v, &wv) in w.iter().enumerate() {
            if wv > 0 {
                parcels.insert((v, Holder::Vertex(v)), 2 * wv);
            }
        }
        Replay {
            g,
            n,
            held: w.iter().map(|&x| 2 * x).collect(),
            w,
            root: 0,
            has_tree: false,
            parent: vec![None; n],
            children: vec![Vec::new(); n],
            depth: vec![0; n],
            tin: vec![0; n],
            tout: vec![0; n],
            t_leaf: vec![false; n],
            leaves: Vec::new(),
            leaf_of: vec![None; n],
            slots: vec![Vec::new(); n],
            on_branch: vec![false; n],
            expected_e: Vec::new(),
            introducer: vec![false; n],
            in_e: vec![false; n],
            adj: vec![Vec::new(); n],
            removed: HashSet::new(),
            added: HashSet::new(),
            parcels,
            held_after_rules: Vec::new(),
            rules_seen: HashSet::new(),
            classified: vec![None; n],
            e_seen: 0,
            cases_seen: 0,
            group: None,
            stage: Stage::Header,
        }
    }

    fn run(&mut self, trace: &[TraceEvent]) -> Check {
        let mut backs = Vec::new();
        let mut tree = Vec::new();
        let mut i = 0;
        for (idx, e) in trace.iter().enumerate() {
            if let Some(&v) = vertices_of(e).iter().find(|&&v| v >= self.n) {
                return Err(at("trace", idx, e, format!("vertex {v} out of range")));
            }
        }
        match trace.first() {
            Some(&TraceEvent::Root(r)) => self.root = r,
            _ => return Err(Violation::new("trace", "trace does not start with a root event")),
        }
        i += 1;
        while i < trace.len() {
            match trace[i] {
                TraceEvent::Tree { parent, child } => tree.push((parent, child)),
                TraceEvent::Back { lower, upper } => backs.push((lower, upper)),
                _ => break,
            }
            i += 1;
        }
        self.build_tree(&tree)?;
        self.check_dfs(&backs)?;
        self.annotate()?;
        if trace.get(i) != Some(&TraceEvent::Phase(Phase::Rules)) {
            return Err(Violation::new("trace", format!("event {i}: expected phase rules")));
        }
        self.stage = Stage::Rules;
        i += 1;
        while i < trace.len() {
            let e = trace[i];
            let next = trace.get(i + 1).copied();
            let consumed = self.step(i, e, next)?;
            i += consumed;
            if self.stage == Stage::Done {
                break;
            }
        }
        if self.stage != Stage::Done {
            return Err(Violation::new("trace", "trace ends before phase done"));
        }
        if i < trace.len() {
            return Err(at("trace", i, &trace[i], "events after phase done".into()));
        }
        Ok(())
    }

    /// Handles one event; returns how many events were consumed.
    fn step(&mut self, i: usize, e: TraceEvent, next: Option<TraceEvent>) -> Result<usize, Violation> {
        let out_of_place = || at("trace", i, &e, "event out of place".into());
        match (self.stage, e) {
            (Stage::Rules, TraceEvent::Rule { .. }) => {
                return self.rule(i, e, next);
            }
            (Stage::Rules, TraceEvent::Phase(Phase::Edges)) => {
                self.end_rules()?;
                self.stage = Stage::Classify;
            }
            (Stage::Classify, TraceEvent::Classify { leaf, good }) => self.classify(i, &e, leaf, good)?,
            (Stage::Classify | Stage::EdgeSet, TraceEvent::EdgeSet { a1, a2, leaf }) => {
                if self.stage == Stage::Classify {
                    self.end_classify()?;
                    self.stage = Stage::EdgeSet;
                }
                self.edge_set(i, &e, a1, a2, leaf)?;
            }
            (Stage::Classify | Stage::EdgeSet | Stage::Cases, TraceEvent::Case { kind, leaf }) => {
                self.enter_cases()?;
                self.close_group()?;
                let expected = self.expected_e.get(self.cases_seen).map(|&idx| self.leaves[idx].leaf);
                if expected != Some(leaf) {
                    return Err(at("trace", i, &e, format!("expected the next edge-set introducer {expected:?}")));
                }
                self.group = Some(Group {
                    kind: GroupKind::Case(kind),
                    leaf: self.expected_e[self.cases_seen],
                    events: Vec::new(),
                    removed: Vec::new(),
                });
                self.cases_seen += 1;
            }
            (Stage::Classify | Stage::EdgeSet | Stage::Cases, TraceEvent::Phase(Phase::Bad)) => {
                self.enter_cases()?;
                self.close_group()?;
                self.start_bad()?;
                self.stage = Stage::Bad;
            }
            (
                Stage::Cases,
                TraceEvent::Move(_) | TraceEvent::Remove(..) | TraceEvent::Add(..) | TraceEvent::Saturate { .. },
            ) if self.group.is_some() => self.group_event(i, e)?,
            (Stage::Bad, TraceEvent::BadLeaf { leaf, case }) => {
                self.close_group()?;
                self.open_bad(i, &e, leaf, case)?;
            }
            (Stage::Bad, TraceEvent::Move(m)) => {
                self.apply_move(i, &e, m.source, m.amount, m.from, m.to)?;
                if let Some(group) = &mut self.group {
                    group.events.push(e);
                }
            }
            (Stage::Bad, TraceEvent::Remove(..) | TraceEvent::Add(..)) if self.group.is_some() => {
                self.group_event(i, e)?
            }
            (Stage::Bad, TraceEvent::Phase(Phase::Done)) => {
                self.close_group()?;
                self.finish()?;
                self.stage = Stage::Done;
            }
            _ => return Err(out_of_place()),
        }
        Ok(1)
    }

    fn is_ancestor(&self, u: Vertex, v: Vertex) -> bool {
        self.tin[u] <= self.tin[v] && self.tout[v] <= self.tout[u]
    }

    fn build_tree(&mut self, tree: &[(Vertex, Vertex)]) -> Check {
        let n = self.n;
        for &(p, c) in tree {
            if c == self.root || self.parent[c].is_some() || p == c {
                return Err(Violation::new("spanning", format!("tree edge ({p}, {c}) gives {c} a second parent")));
            }
            if !self.g.has_edge(p, c) {
                return Err(Violation::new("non-graph-edge", format!("tree edge ({p}, {c}) is not an edge of G")));
            }
            self.parent[c] = Some(p);
            self.children[p].push(c);
            self.adj[p].push(c);
            self.adj[c].push(p);
        }
        let mut clock = 0;
        let mut stack = vec![(self.root, 0usize)];
        let mut reached = 0;
        while let Some(top) = stack.last_mut() {
            let (v, next) = *top;
            if next == 0 {
                self.tin[v] = clock;
                clock += 1;
                reached += 1;
            }
            if next < self.children[v].len() {
                top.1 += 1;
                let c = self.children[v][next];
                self.depth[c] = self.depth[v] + 1;
                stack.push((c, 0));
            } else {
                self.tout[v] = clock;
                stack.pop();
            }
        }
        if tree.len() + 1 != n || reached != n {
            return Err(Violation::new(
                "spanning",
                format!("T has {} edges reaching {reached} of {n} vertices", tree.len()),
            ));
        }
        self.has_tree = true;
        if let Some(v) = (0..n).find(|&v| self.children[v].len() > 2) {
            return Err(Violation::new("lemma-2", format!("vertex {v} has {} children in T", self.children[v].len())));
        }
        Ok(())
    }

    fn check_dfs(&self, backs: &[(Vertex, Vertex)]) -> Check {
        let non_tree = self.g.m() + 1 - self.n;
        if backs.len() != non_tree {
            return Err(Violation::new(
                "observation-1",
                format!("{} backward edges listed, G has {non_tree} non-tree edges", backs.len()),
            ));
        }
        let mut seen = HashSet::new();
        for &(lower, upper) in backs {
            let ok = lower != upper
                && self.g.has_edge(lower, upper)
                && self.parent[lower] != Some(upper)
                && self.is_ancestor(upper, lower)
                && seen.insert(key(lower, upper));
            if !ok {
                return Err(Violation::new(
                    "observation-1",
                    format!("({lower}, {upper}) does not join a vertex to a proper ancestor"),
                ));
            }
        }
        Ok(())
    }

    fn annotate(&mut self) -> Check {
        let n = self.n;
        let mut order: Vec<Vertex> = (0..n).collect();
        order.sort_by_key(|&v| self.tin[v]);
        for &a in &order {
            if a == self.root || !self.children[a].is_empty() {
                continue;
            }
            self.t_leaf[a] = true;
            let mut path = vec![a];
            while let Some(p) = self.parent[*path.last().unwrap()] {
                path.push(p);
            }
            let toward = |q: Vertex| path[self.depth[a] - self.depth[q] - 1];
            let parent = path[1];
            let mut list: Vec<Vertex> = self.g.neighbors(a).iter().copied().filter(|&y| y != parent).collect();
            list.sort_by_key(|&y| std::cmp::Reverse(self.depth[y]));
            let a_prime = list.iter().map(|&q| toward(q)).collect();
            let mut star = parent;
            while star != self.root && self.children[star].len() < 2 {
                star = self.parent[star].unwrap();
            }
            for &x in &path[..self.depth[a] - self.depth[star]] {
                self.on_branch[x] = true;
            }
            self.leaf_of[a] = Some(self.leaves.len());
            self.leaves.push(LeafInfo { leaf: a, a: list, a_prime, star });
        }

        let mut count = vec![0usize; n];
        for la in &self.leaves {
            for &q in &la.a {
                count[q] += 1;
                if count[q] > 2 {
                    return Err(Violation::new("lemma-3", format!("vertex {q} is adjacent to three leaves of T")));
                }
            }
        }
        for (idx, la) in self.leaves.iter().enumerate() {
            if !la.processed() {
                continue;
            }
            self.slots[la.a[0]].push((idx, 0));
            self.slots[la.a[1]].push((idx, 1));
            for &x in &la.a_prime {
                if self.w[x] < self.w[la.leaf] {
                    return Err(Violation::new(
                        "greedy-property",
                        format!("w({x}) = {} is below w({}) = {}", self.w[x], la.leaf, self.w[la.leaf]),
                    ));
                }
            }
        }
        let mut taken = vec![false; n];
        for (idx, la) in self.leaves.iter().enumerate() {
            if !la.processed() {
                continue;
            }
            let (a1, a2) = (la.a[0], la.a[1]);
            if self.is_ancestor(a1, la.star)
                && self.is_ancestor(a2, la.star)
                && self.parent[a1] == Some(a2)
                && !taken[a1]
            {
                taken[a1] = true;
                self.introducer[la.leaf] = true;
                self.expected_e.push(idx);
            }
        }

        let internal: Weight = (0..n).filter(|&v| self.adj[v].len() >= 2).map(|v| self.w[v]).sum();
        let total: Weight = self.w.iter().sum();
        let interim = clamp(n as i128 - 2, 2 * n as i128);
        if !satisfies(internal, total, interim) {
            return Err(Violation::new(
                "interim-bound",
                format!("T has internal weight {internal} of {total}, below {interim}"),
            ));
        }
        Ok(())
    }

    fn amount(&self, source: Vertex, holder: Holder) -> u64 {
        self.parcels.get(&(source, holder)).copied().unwrap_or(0)
    }

    fn apply_move(&mut self, i: usize, e: &TraceEvent, source: Vertex, amount: u64, from: Holder, to: Holder) -> Check {
        if amount == 0 || from == to {
            return Err(at("trace", i, e, "empty move".into()));
        }
        let available = self.amount(source, from);
        if available < amount {
            return Err(at(
                "conservation",
                i,
                e,
                format!("{from} has {available} half-units of {source}'s charge, {amount} moved"),
            ));
        }
        *self.parcels.get_mut(&(source, from)).unwrap() -= amount;
        *self.parcels.entry((source, to)).or_insert(0) += amount;
        if let Holder::Vertex(v) = from {
            self.held[v] -= amount;
        }
        if let Holder::Vertex(v) = to {
            self.held[v] += amount;
        }
        Ok(())
    }

    /// A rule is followed by its move unless the moved amount is zero.
    fn rule(&mut self, i: usize, e: TraceEvent, next: Option<TraceEvent>) -> Result<usize, Violation> {
        let TraceEvent::Rule { rule, q, leaf, source } = e else { unreachable!() };
        let slot = self.slots[q].iter().find(|&&(idx, _)| self.leaves[idx].leaf == leaf).copied();
        let Some((idx, j)) = slot else {
            return Err(at("rules", i, &e, format!("{leaf} does not use {q} as a_1 or a_2")));
        };
        let expected_rule = if self.slots[q].len() == 1 { 1 } else { 2 };
        let amount = if expected_rule == 1 { 2 * self.w[source] } else { self.w[source] };
        let mut consumed = 1;
        let mut moved = (source, 0, Holder::Vertex(source), Holder::Vertex(leaf));
        if amount > 0 {
            let Some(TraceEvent::Move(m)) = next else {
                return Err(at("trace", i, &e, "rule without a following move".into()));
            };
            self.apply_move(i + 1, &TraceEvent::Move(m), m.source, m.amount, m.from, m.to)?;
            moved = (m.source, m.amount, m.from, m.to);
            consumed = 2;
        }
        let expected_move = (source, amount, Holder::Vertex(source), Holder::Vertex(leaf));
        if rule != expected_rule || source != self.leaves[idx].a_prime[j] || moved != expected_move {
            return Err(at(
                "rules",
                i,
                &e,
                format!("expected rule {expected_rule} moving from {}", self.leaves[idx].a_prime[j]),
            ));
        }
        if !self.rules_seen.insert((q, leaf)) {
            return Err(at("rules", i, &e, "applied twice".into()));
        }
        Ok(consumed)
    }

    fn end_rules(&mut self) -> Check {
        for la in self.leaves.iter().filter(|la| la.processed()) {
            let held = self.held[la.leaf];
            if (held as u128) < 4 * self.w[la.leaf] as u128 {
                return Err(Violation::new(
                    "rules/2w",
                    format!("leaf {} holds {held} half-units after the rules", la.leaf),
                ));
            }
        }
        let slots: usize = self.slots.iter().map(Vec::len).sum();
        if self.rules_seen.len() != slots {
            return Err(Violation::new(
                "rules",
                format!("{} rule applications for {slots} slots", self.rules_seen.len()),
            ));
        }
        self.held_after_rules = self.held.clone();
        Ok(())
    }

    fn twin(&self, idx: usize) -> bool {
        let la = &self.leaves[idx];
        self.slots[la.a[1]].iter().any(|&(other, j)| other != idx && self.leaves[other].a_prime[j] == la.a_prime[1])
    }

    fn classify(&mut self, i: usize, e: &TraceEvent, leaf: Vertex, good: bool) -> Check {
        let Some(idx) = self.leaf_of[leaf].filter(|&idx| self.leaves[idx].processed()) else {
            return Err(at("trace", i, e, format!("{leaf} is not a processed leaf of T")));
        };
        if self.classified[leaf].is_some() {
            return Err(at("classify", i, e, "classified twice".into()));
        }
        self.classified[leaf] = Some(good);
        if !good {
            let la = &self.leaves[idx];
            if !(self.is_ancestor(la.a[0], la.star) && self.is_ancestor(la.a[1], la.star)) {
                return Err(at("(B1)", i, e, format!("a_1 = {} is below a_* = {}", la.a[0], la.star)));
            }
            if !self.introducer[leaf] && !self.twin(idx) {
                return Err(at("(B2)", i, e, format!("no other leaf shares a'_2 = {}", la.a_prime[1])));
            }
        }
        let actual = self.held[leaf] as u128 >= 5 * self.w[leaf] as u128;
        if actual != good {
            return Err(at("classify", i, e, format!("holds {} half-units", self.held[leaf])));
        }
        Ok(())
    }

    fn end_classify(&self) -> Check {
        if let Some(la) = self.leaves.iter().find(|la| la.processed() && self.classified[la.leaf].is_none()) {
            return Err(Violation::new("classify", format!("leaf {} was never classified", la.leaf)));
        }
        Ok(())
    }

    fn edge_set(&mut self, i: usize, e: &TraceEvent, a1: Vertex, a2: Vertex, leaf: Vertex) -> Check {
        let expected = self.expected_e.get(self.e_seen).map(|&idx| {
            let la = &self.leaves[idx];
            (la.a[0], la.a[1], la.leaf)
        });
        if expected != Some((a1, a2, leaf)) {
            return Err(at("edge-set", i, e, format!("expected {expected:?}")));
        }
        self.in_e[a1] = true;
        self.e_seen += 1;
        Ok(())
    }

    fn enter_cases(&mut self) -> Check {
        if self.stage == Stage::Classify {
            self.end_classify()?;
        }
        if self.stage != Stage::Cases && self.e_seen != self.expected_e.len() {
            return Err(Violation::new(
                "edge-set",
                format!("{} edge-set entries listed, {} expected", self.e_seen, self.expected_e.len()),
            ));
        }
        self.stage = Stage::Cases;
        Ok(())
    }

    fn remove(&mut self, i: usize, e: &TraceEvent, u: Vertex, v: Vertex, exempt: bool) -> Check {
        let k = key(u, v);
        if self.removed.contains(&k) {
            return Err(at("double-removal", i, e, "edge removed twice".into()));
        }
        if !self.adj[u].contains(&v) {
            return Err(at("double-removal", i, e, "edge is not in T'".into()));
        }
        if !exempt {
            let child = if self.parent[v] == Some(u) {
                Some(v)
            } else if self.parent[u] == Some(v) {
                Some(u)
            } else {
                None
            };
            if !child.is_some_and(|c| self.in_e[c] || self.on_branch[c]) {
                return Err(at("(E5)", i, e, "edge is neither in E nor on a leaf-branch".into()));
            }
        }
        self.removed.insert(k);
        self.adj[u].retain(|&x| x != v);
        self.adj[v].retain(|&x| x != u);
        Ok(())
    }

    fn add(&mut self, i: usize, e: &TraceEvent, u: Vertex, v: Vertex) -> Check {
        if u == v || !self.g.has_edge(u, v) {
            return Err(at("non-graph-edge", i, e, "not an edge of G".into()));
        }
        if self.added.contains(&key(u, v)) || self.adj[u].contains(&v) {
            return Err(at("double-add", i, e, "edge is already in T'".into()));
        }
        self.added.insert(key(u, v));
        self.adj[u].push(v);
        self.adj[v].push(u);
        Ok(())
    }

    fn group_event(&mut self, i: usize, e: TraceEvent) -> Check {
        let group = self.group.as_ref().expect("inside a group");
        let exempt = matches!(group.kind, GroupKind::Bad(BadLeafCase::SiblingFirstRewire)) && group.events.is_empty();
        match e {
            TraceEvent::Move(m) => self.apply_move(i, &e, m.source, m.amount, m.from, m.to)?,
            TraceEvent::Remove(u, v) => {
                self.remove(i, &e, u, v, exempt)?;
                self.group.as_mut().unwrap().removed.push((u, v));
            }
            TraceEvent::Add(u, v) => self.add(i, &e, u, v)?,
            _ => {}
        }
        self.group.as_mut().unwrap().events.push(e);
        Ok(())
    }

    fn is_leaf_now(&self, v: Vertex) -> bool {
        v != self.root && self.adj[v].len() == 1
    }

    fn has_charge(&self, v: Vertex) -> bool {
        self.held[v] as u128 >= 5 * self.w[v] as u128
    }

    fn short_of(&self, label: &str, what: &str, v: Vertex) -> Violation {
        Violation::new(label, format!("{what} {v} holds {} half-units, needs {}", self.held[v], 5 * self.w[v]))
    }

    fn spans(&self) -> bool {
        let edges: usize = self.adj.iter().map(Vec::len).sum::<usize>() / 2;
        if edges + 1 != self.n {
            return false;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![self.root];
        seen[self.root] = true;
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
        count == self.n
    }

    fn close_group(&mut self) -> Check {
        let Some(group) = self.group.take() else { return Ok(()) };
        let la = &self.leaves[group.leaf];
        let a = la.leaf;
        if let GroupKind::Bad(BadLeafCase::SiblingFirstRewire) = group.kind {
            self.check_case_iv(&group)?;
        }
        if !self.spans() {
            return Err(Violation::new("spanning", format!("T' is not a spanning tree after the step of leaf {a}")));
        }
        match group.kind {
            GroupKind::Case(kind) => {
                let src = la.a_prime[1];
                if kind.releases_half() && self.amount(src, Holder::Free) < self.w[src] {
                    return Err(Violation::new(
                        "(E4)",
                        format!("half of a'_2 = {src} is not free after case {} of {a}", kind.label()),
                    ));
                }
                if self.is_leaf_now(a) && !self.has_charge(a) {
                    return Err(self.short_of("(E1)", "introducing leaf", a));
                }
                for &(u, v) in &group.removed {
                    for x in [u, v] {
                        if self.is_leaf_now(x) && !self.t_leaf[x] && !self.has_charge(x) {
                            return Err(self.short_of("(E2)", "new leaf", x));
                        }
                    }
                }
            }
            GroupKind::Bad(_) => {
                if !self.has_charge(a) {
                    return Err(self.short_of("bad-leaf", "bad leaf", a));
                }
            }
        }
        Ok(())
    }

    fn check_case_iv(&self, group: &Group) -> Check {
        let la = &self.leaves[group.leaf];
        let fail = |detail: &str| Violation::new("case-iv", format!("bad leaf {}: {detail}", la.leaf));
        let [TraceEvent::Remove(x, y), TraceEvent::Add(p, q), TraceEvent::Move(m)] = group.events[..] else {
            return Err(fail("expected one removal, one addition and one move"));
        };
        let (b, b1) = if p == x || p == y {
            (q, p)
        } else if q == x || q == y {
            (p, q)
        } else {
            return Err(fail("added edge does not meet the removed edge"));
        };
        let b_star = if b1 == x { y } else { x };
        let mut nb = self.adj[b].clone();
        nb.sort_unstable();
        if !self.t_leaf[b] || self.parent[b] != Some(b_star) || nb != [b_star.min(b1), b_star.max(b1)] {
            return Err(fail("the twin is not re-hung from b_* to b_1"));
        }
        let src = la.a_prime[1];
        if (m.source, m.amount, m.from, m.to) != (src, self.w[src], Holder::Vertex(b), Holder::Vertex(la.leaf)) {
            return Err(fail("the twin does not hand over half of a'_2"));
        }
        Ok(())
    }

    fn start_bad(&self) -> Check {
        if self.cases_seen != self.expected_e.len() {
            return Err(Violation::new(
                "trace",
                format!("{} of {} edge-set entries processed", self.cases_seen, self.expected_e.len()),
            ));
        }
        for v in 0..self.n {
            if !self.is_leaf_now(v) {
                continue;
            }
            if self.introducer[v] {
                if !self.has_charge(v) {
                    return Err(self.short_of("(E1)", "introducing leaf", v));
                }
            } else if !self.t_leaf[v] {
                if !self.has_charge(v) {
                    return Err(self.short_of("(E2)", "new leaf", v));
                }
            } else if self.held[v] != self.held_after_rules[v] {
                return Err(Violation::new(
                    "(E3)",
                    format!("untouched leaf {v} holds {} instead of {}", self.held[v], self.held_after_rules[v]),
                ));
            }
        }
        Ok(())
    }

    fn open_bad(&mut self, i: usize, e: &TraceEvent, leaf: Vertex, case: BadLeafCase) -> Check {
        let idx = self.leaf_of[leaf].filter(|&idx| self.leaves[idx].processed());
        let eligible = self.classified[leaf] == Some(false) && !self.introducer[leaf] && self.is_leaf_now(leaf);
        match idx {
            Some(idx) if eligible && !self.has_charge(leaf) => {
                self.group =
                    Some(Group { kind: GroupKind::Bad(case), leaf: idx, events: Vec::new(), removed: Vec::new() });
                Ok(())
            }
            _ => Err(at("bad-leaf", i, e, "not an uncovered bad leaf".into())),
        }
    }

    fn finish(&self) -> Check {
        if !self.spans() {
            return Err(Violation::new("spanning", "final T' is not a spanning tree"));
        }
        let internal: Weight = (0..self.n).filter(|&v| self.adj[v].len() >= 2).map(|v| self.w[v]).sum();
        let total: Weight = self.w.iter().sum();
        let bound = BoundKind::ClawFree.bound(self.n);
        if !satisfies(internal, total, bound) {
            return Err(Violation::new("bound", format!("internal weight {internal} of {total} is below {bound}")));
        }
        if let Some(v) = (0..self.n).find(|&v| self.is_leaf_now(v) && !self.has_charge(v)) {
            return Err(self.short_of("final-leaf-charge", "leaf", v));
        }
        let mut per_source = vec![0u64; self.n];
        for (&(s, _), &a) in &self.parcels {
            per_source[s] += a;
        }
        if let Some(s) = (0..self.n).find(|&s| per_source[s] != 2 * self.w[s]) {
            return Err(Violation::new("conservation", format!("vertex {s} ends with {} half-units", per_source[s])));
        }
        Ok(())
    }
}

fn at(label: &str, i: usize, e: &TraceEvent, detail: String) -> Violation {
    Violation::new(label, format!("event {i} `{e}`: {detail}"))
}
