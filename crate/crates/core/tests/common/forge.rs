//! Forged claw-free traces, each breaking exactly one audited invariant.

use std::collections::{HashMap, HashSet};

use maxwist::charge::{Holder, Move};
use maxwist::clawfree::run_clawfree;
use maxwist::trace::{BadLeafCase, CaseKind, Phase, TraceEvent};
use maxwist::{Graph, Vertex};

use super::{complete, pin, PINS};

pub struct Forgery {
    pub label: &'static str,
    pub what: &'static str,
    pub graph: Graph,
    pub trace: Vec<TraceEvent>,
}

fn forgery(label: &'static str, what: &'static str, graph: &Graph, trace: Vec<TraceEvent>) -> Forgery {
    Forgery { label, what, graph: graph.clone(), trace }
}

/// Every audit label with the forgeries expected to trip it.
pub fn all() -> Vec<Forgery> {
    let builders: [fn() -> Vec<Forgery>; 18] = [
        structure,
        tree_header,
        leaf_adjacency,
        weights,
        rules,
        classification,
        twinless,
        edge_set,
        removals,
        additions,
        introducer_charge,
        new_leaf_charge,
        untouched_leaf,
        released_half,
        bad_leaves,
        case_iv,
        final_leaves,
        final_bound,
    ];
    builders.iter().flat_map(|b| b()).collect()
}

pub const LABELS: [&str; 26] = [
    "trace",
    "spanning",
    "observation-1",
    "lemma-2",
    "lemma-3",
    "greedy-property",
    "interim-bound",
    "rules",
    "conservation",
    "rules/2w",
    "classify",
    "(B1)",
    "(B2)",
    "edge-set",
    "double-removal",
    "(E5)",
    "double-add",
    "non-graph-edge",
    "(E1)",
    "(E2)",
    "(E3)",
    "(E4)",
    "bad-leaf",
    "case-iv",
    "final-leaf-charge",
    "bound",
];

fn unit_trace(n: usize) -> (Graph, Vec<TraceEvent>) {
    let g = complete(n, vec![1; n]);
    let trace = run_clawfree(&g, true).unwrap().trace;
    (g, trace)
}

fn position(trace: &[TraceEvent], f: impl Fn(&TraceEvent) -> bool) -> usize {
    trace.iter().position(f).expect("event present")
}

/// Index one past the last event of the group opened at `start`.
fn group_end(trace: &[TraceEvent], start: usize) -> usize {
    start
        + 1
        + trace[start + 1..]
            .iter()
            .position(|e| matches!(e, TraceEvent::Case { .. } | TraceEvent::BadLeaf { .. } | TraceEvent::Phase(_)))
            .unwrap()
}

fn mv(source: Vertex, amount: u64, from: Holder, to: Holder) -> TraceEvent {
    TraceEvent::Move(Move { source, amount, from, to })
}

fn introducers(trace: &[TraceEvent]) -> HashSet<Vertex> {
    trace.iter().filter_map(|e| if let TraceEvent::EdgeSet { leaf, .. } = e { Some(*leaf) } else { None }).collect()
}

/// Parcels `(source, holder) -> amount` after replaying the moves of `prefix`.
fn ledger_after(g: &Graph, prefix: &[TraceEvent]) -> HashMap<(Vertex, Holder), u64> {
    let mut parcels: HashMap<(Vertex, Holder), u64> =
        (0..g.n()).map(|v| ((v, Holder::Vertex(v)), 2 * g.weight(v))).collect();
    for e in prefix {
        if let TraceEvent::Move(m) = e {
            *parcels.get_mut(&(m.source, m.from)).unwrap() -= m.amount;
            *parcels.entry((m.source, m.to)).or_default() += m.amount;
        }
    }
    parcels.retain(|_, a| *a > 0);
    parcels
}

/// Moves that empty `holder` into `to`.
fn drain(g: &Graph, prefix: &[TraceEvent], holder: Holder, to: Holder) -> Vec<TraceEvent> {
    let mut parcels: Vec<_> = ledger_after(g, prefix).into_iter().filter(|((_, h), _)| *h == holder).collect();
    parcels.sort();
    parcels.into_iter().map(|((s, _), a)| mv(s, a, holder, to)).collect()
}

/// First pinned case group matching `want`, as `(graph, trace, start, end, leaf)`.
fn find_group(
    want: impl Fn(&Graph, &[TraceEvent], CaseKind, Vertex, usize, usize) -> bool,
) -> (Graph, Vec<TraceEvent>, usize, usize, Vertex) {
    for &(name, ..) in PINS {
        let (g, run) = pin(name);
        let t = run.trace;
        for (start, e) in t.iter().enumerate() {
            if let TraceEvent::Case { kind, leaf } = *e {
                let end = group_end(&t, start);
                if want(&g, &t, kind, leaf, start, end) {
                    return (g, t, start, end, leaf);
                }
            }
        }
    }
    panic!("no pinned case group fits");
}

fn spliced(mut t: Vec<TraceEvent>, at: usize, events: Vec<TraceEvent>) -> Vec<TraceEvent> {
    t.splice(at..at, events);
    t
}

fn structure() -> Vec<Forgery> {
    let (g, base) = unit_trace(5);
    let mut no_root = base.clone();
    no_root.remove(0);
    let mut trailing = base.clone();
    trailing.push(TraceEvent::Phase(Phase::Rules));
    let mut truncated = base;
    truncated.pop();
    vec![
        forgery("trace", "missing root event", &g, no_root),
        forgery("trace", "events after phase done", &g, trailing),
        forgery("trace", "no phase done", &g, truncated),
    ]
}

fn tree_header() -> Vec<Forgery> {
    let (g, base) = unit_trace(4);
    let mut t = base.clone();
    t.remove(position(&t, |e| matches!(e, TraceEvent::Tree { .. })));
    let mut b = base;
    b.remove(position(&b, |e| matches!(e, TraceEvent::Back { .. })));
    let star = vec![
        TraceEvent::Root(0),
        TraceEvent::Tree { parent: 0, child: 1 },
        TraceEvent::Tree { parent: 0, child: 2 },
        TraceEvent::Tree { parent: 0, child: 3 },
    ];
    vec![
        forgery("spanning", "tree edge dropped", &g, t),
        forgery("observation-1", "backward edge dropped", &g, b),
        forgery("lemma-2", "root with three children", &g, star),
    ]
}

fn leaf_adjacency() -> Vec<Forgery> {
    let tree = [(0, 5), (5, 1), (5, 6), (1, 2), (1, 3), (6, 4)];
    let back = [(2, 0), (3, 0), (4, 0)];
    let edges: Vec<_> = tree.iter().chain(back.iter()).copied().collect();
    let g = Graph::new(vec![1; 7], &edges).unwrap();
    let mut t = vec![TraceEvent::Root(0)];
    t.extend(tree.iter().map(|&(parent, child)| TraceEvent::Tree { parent, child }));
    t.extend(back.iter().map(|&(lower, upper)| TraceEvent::Back { lower, upper }));
    vec![forgery("lemma-3", "root adjacent to three leaves", &g, t)]
}

fn weights() -> Vec<Forgery> {
    let (g, t) = unit_trace(4);
    let leaf =
        (0..4).find(|&v| !t.iter().any(|e| matches!(e, TraceEvent::Tree { parent, .. } if *parent == v))).unwrap();
    let mut heavy_leaf = vec![1; 4];
    heavy_leaf[leaf] = 5;
    let TraceEvent::Root(root) = t[0] else { panic!() };
    let mut heavy_root = vec![1; 4];
    heavy_root[root] = 100;
    vec![
        forgery("greedy-property", "leaf heavier than its path", &g.with_weights(heavy_leaf), t.clone()),
        forgery("interim-bound", "root outweighs the rest", &g.with_weights(heavy_root), t),
    ]
}

fn rules() -> Vec<Forgery> {
    let (g, base) = unit_trace(5);
    let r = position(&base, |e| matches!(e, TraceEvent::Rule { .. }));
    let mut wrong_rule = base.clone();
    if let TraceEvent::Rule { rule, .. } = &mut wrong_rule[r] {
        *rule = 2;
    }
    let mut wrong_q = base.clone();
    if let TraceEvent::Rule { q, .. } = &mut wrong_q[r] {
        *q = 3;
    }
    let mut created = base.clone();
    if let TraceEvent::Move(m) = &mut created[r + 1] {
        m.amount += 1;
    }
    let mut none = base;
    none.retain(|e| !matches!(e, TraceEvent::Rule { .. } | TraceEvent::Move(_)));
    vec![
        forgery("rules", "rule 2 where one leaf uses q", &g, wrong_rule),
        forgery("rules", "rule at a vertex the leaf does not use", &g, wrong_q),
        forgery("conservation", "move creates charge", &g, created),
        forgery("rules/2w", "no rules applied", &g, none),
    ]
}

fn classification() -> Vec<Forgery> {
    let (g, base) = unit_trace(5);
    let c = position(&base, |e| matches!(e, TraceEvent::Classify { .. }));
    let mut twice = base.clone();
    twice.insert(c, twice[c]);
    let mut missing = base.clone();
    missing.remove(c);
    // on the path tree of K5 the leaf's a_1 sits below a_* = root
    let mut flipped = base;
    if let TraceEvent::Classify { good, .. } = &mut flipped[c] {
        *good = false;
    }
    vec![
        forgery("classify", "leaf classified twice", &g, twice),
        forgery("classify", "leaf never classified", &g, missing),
        forgery("(B1)", "good path leaf declared bad", &g, flipped),
    ]
}

fn twinless() -> Vec<Forgery> {
    for &(name, ..) in PINS {
        let (g, run) = pin(name);
        let intro = introducers(&run.trace);
        let (t, ann) = (&run.dfs, &run.annotations);
        let candidate = ann.iter().find(|la| {
            la.k() >= 2
                && !intro.contains(&la.leaf)
                && t.is_ancestor(la.a_list[0], la.a_star)
                && t.is_ancestor(la.a_list[1], la.a_star)
                && !ann.iter().any(|lb| {
                    lb.leaf != la.leaf
                        && (0..lb.k().min(2))
                            .any(|j| lb.a_list[j] == la.a_list[1] && lb.a_prime_list[j] == la.a_prime_list[1])
                })
        });
        let Some(la) = candidate else { continue };
        let mut forged = run.trace.clone();
        let c = position(&forged, |e| matches!(e, TraceEvent::Classify { leaf, .. } if *leaf == la.leaf));
        forged[c] = TraceEvent::Classify { leaf: la.leaf, good: false };
        return vec![forgery("(B2)", "twinless good leaf declared bad", &g, forged)];
    }
    panic!("no pinned instance has a twinless leaf");
}

fn edge_set() -> Vec<Forgery> {
    let (g, run) = pin("case-1.1");
    let mut missing = run.trace;
    let e = position(&missing, |e| matches!(e, TraceEvent::EdgeSet { .. }));
    let TraceEvent::EdgeSet { a1, a2, leaf } = missing.remove(e) else { panic!() };
    let mut swapped = missing.clone();
    swapped.insert(e, TraceEvent::EdgeSet { a1: a2, a2: a1, leaf });
    vec![forgery("edge-set", "entry dropped", &g, missing), forgery("edge-set", "entry reversed", &g, swapped)]
}

fn removals() -> Vec<Forgery> {
    let (g, run) = pin("case-1.1");
    let r = position(&run.trace, |e| matches!(e, TraceEvent::Remove(..)));
    let mut twice = run.trace.clone();
    twice.insert(r, twice[r]);

    let mut allowed: HashSet<Vertex> = HashSet::new();
    for la in &run.annotations {
        let mut x = la.leaf;
        loop {
            allowed.insert(x);
            if x == la.a_prime_star {
                break;
            }
            x = run.dfs.parent[x].unwrap();
        }
    }
    for e in &run.trace {
        if let TraceEvent::EdgeSet { a1, .. } = e {
            allowed.insert(*a1);
        }
    }
    let (p, c) = run.dfs.tree_edges().into_iter().find(|&(_, c)| !allowed.contains(&c)).expect("an interior edge");
    let start = position(&run.trace, |e| matches!(e, TraceEvent::Case { kind: CaseKind::Case11, .. }));
    let interior = spliced(run.trace, start + 1, vec![TraceEvent::Remove(p, c)]);
    vec![
        forgery("double-removal", "edge removed twice", &g, twice),
        forgery("(E5)", "interior tree edge removed", &g, interior),
    ]
}

fn additions() -> Vec<Forgery> {
    let (g, run) = pin("case-1.1");
    let a = position(&run.trace, |e| matches!(e, TraceEvent::Add(..)));
    let mut twice = run.trace.clone();
    twice.insert(a, twice[a]);
    let TraceEvent::Add(u, _) = run.trace[a] else { panic!() };
    let stranger = (0..g.n()).find(|&x| x != u && !g.has_edge(u, x)).unwrap();
    let mut foreign = run.trace.clone();
    foreign[a] = TraceEvent::Add(u, stranger);
    let mut dropped = run.trace;
    dropped.remove(a);
    vec![
        forgery("double-add", "edge added twice", &g, twice),
        forgery("non-graph-edge", "added edge missing from G", &g, foreign),
        forgery("spanning", "rewired tree left disconnected", &g, dropped),
    ]
}

fn introducer_charge() -> Vec<Forgery> {
    let keeps = [CaseKind::Case12Keep, CaseKind::Case2, CaseKind::Case31Keep, CaseKind::Case32Keep];
    let (g, t, _, end, leaf) = find_group(|g, _, kind, leaf, _, _| keeps.contains(&kind) && g.weight(leaf) > 0);
    let stolen = drain(&g, &t[..end], Holder::Vertex(leaf), Holder::Free);
    vec![forgery("(E1)", "introducing leaf emptied", &g, spliced(t, end, stolen))]
}

fn new_leaf_charge() -> Vec<Forgery> {
    let new_leaf = |t: &[TraceEvent], start: usize, end: usize| {
        t[start + 1..end].iter().find_map(|e| match e {
            TraceEvent::Move(Move { to: Holder::Vertex(x), .. }) => Some(*x),
            _ => None,
        })
    };
    let rewires = [CaseKind::Case12Rewire, CaseKind::Case32Rewire];
    let (g, t, start, end, _) = find_group(|g, t, kind, _, start, end| {
        rewires.contains(&kind) && new_leaf(t, start, end).is_some_and(|x| g.weight(x) > 0)
    });
    let x = new_leaf(&t, start, end).unwrap();
    let stolen = drain(&g, &t[..end], Holder::Vertex(x), Holder::Free);
    vec![forgery("(E2)", "new leaf emptied", &g, spliced(t, end, stolen))]
}

fn untouched_leaf() -> Vec<Forgery> {
    for &(name, ..) in PINS {
        let (g, run) = pin(name);
        let intro = introducers(&run.trace);
        if intro.is_empty() {
            continue;
        }
        let victim = run.trace.iter().find_map(|e| match e {
            TraceEvent::Classify { leaf, .. } if !intro.contains(leaf) && g.weight(*leaf) > 0 => Some(*leaf),
            _ => None,
        });
        let Some(victim) = victim else { continue };
        let bad = position(&run.trace, |e| *e == TraceEvent::Phase(Phase::Bad));
        let t = spliced(run.trace, bad, vec![mv(victim, 1, Holder::Vertex(victim), Holder::Free)]);
        return vec![forgery("(E3)", "untouched leaf loses charge", &g, t)];
    }
    panic!("no pinned instance has an untouched leaf");
}

fn released_half() -> Vec<Forgery> {
    let (g, t, _, end, leaf) = find_group(|_, t, kind, _, start, end| {
        kind.releases_half()
            && t[start + 1..end].iter().any(|e| matches!(e, TraceEvent::Move(m) if m.to == Holder::Free))
    });
    let taken = drain(&g, &t[..end], Holder::Free, Holder::Vertex(leaf));
    vec![forgery("(E4)", "released half taken back", &g, spliced(t, end, taken))]
}

fn bad_leaves() -> Vec<Forgery> {
    let (g, run) = pin("bad-i");
    let mut t = run.trace;
    let b = position(&t, |e| matches!(e, TraceEvent::BadLeaf { case: BadLeafCase::LeafAdjacent, .. }));
    t.remove(b + 1);
    vec![forgery("bad-leaf", "bad leaf claims nothing", &g, t)]
}

fn case_iv() -> Vec<Forgery> {
    let (g, run) = pin("bad-iv");
    let b = position(&run.trace, |e| matches!(e, TraceEvent::BadLeaf { case: BadLeafCase::SiblingFirstRewire, .. }));
    let mut no_add = run.trace.clone();
    no_add.remove(b + 2);
    let mut relabeled = run.trace;
    let TraceEvent::BadLeaf { leaf, .. } = relabeled[b] else { panic!() };
    relabeled[b] = TraceEvent::BadLeaf { leaf, case: BadLeafCase::LeafAdjacent };
    vec![
        forgery("case-iv", "twin not re-hung", &g, no_add),
        forgery("(E5)", "case-iv removal outside case iv", &g, relabeled),
    ]
}

fn final_leaves() -> Vec<Forgery> {
    let (g, run) = pin("case-2");
    let mut degree = vec![0; g.n()];
    for &(u, v) in &run.solution.tree_edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    let TraceEvent::Root(root) = run.trace[0] else { panic!() };
    let leaf = (0..g.n()).find(|&v| v != root && degree[v] == 1 && g.weight(v) > 0).unwrap();
    let bad = position(&run.trace, |e| *e == TraceEvent::Phase(Phase::Bad));
    let t = spliced(run.trace, bad + 1, vec![mv(leaf, 2 * g.weight(leaf), Holder::Vertex(leaf), Holder::Free)]);
    vec![forgery("final-leaf-charge", "final leaf emptied", &g, t)]
}

fn final_bound() -> Vec<Forgery> {
    // every step checks out, but the root is the heaviest vertex
    let (g, t) = unit_trace(5);
    vec![forgery("bound", "heavy root", &g.with_weights(vec![5, 1, 1, 1, 1]), t)]
}
