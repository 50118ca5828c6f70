//! Event log of a claw-free solver run.
//!
//! One event per line, space separated:
//!
//! ```text
//! root <v>
//! tree <parent> <child>
//! back <lower> <upper>
//! phase <rules|edges|bad|done>
//! rule <1|2> <q> <leaf> <source>
//! move <source> <amount> <from> <to>      holders are vertex ids or `free`
//! classify <leaf> <good|bad>
//! e <a1> <a2> <introducing leaf>
//! case <1.1|1.2a|1.2b|1.2c|2|3.1a|3.1b|3.2a|3.2b> <leaf>
//! remove <u> <v>
//! add <u> <v>
//! saturate <v> <leaf>
//! badleaf <leaf> <i|ii|iii|iv>
//! ```
//!
//! Amounts are in half-weight units. Case labels ending in `a` keep the
//! tree and move charge only; labels ending in `b` rewire it.

use std::fmt;
use std::str::FromStr;

use crate::charge::{Holder, Move};
use crate::graph::Vertex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Rules,
    Edges,
    Bad,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseKind {
    /// Unsaturated branching vertex, short branch: the leaf takes over the
    /// tree edge `(a1, a2)`.
    Case11,
    /// Long branch, the leaf's neighbor is at least as heavy: charge only.
    Case12Keep,
    /// Long branch of two edges hanging from `a_1 = a_*`: the leaf takes
    /// over the parent edge of `a_*`.
    Case12Swap,
    /// Long branch, lighter neighbor becomes the new leaf.
    Case12Rewire,
    /// Saturated branching vertex whose parent is `a1`.
    Case2,
    Case31Keep,
    Case31Rewire,
    Case32Keep,
    Case32Rewire,
}

impl CaseKind {
    pub const ALL: [CaseKind; 9] = [
        CaseKind::Case11,
        CaseKind::Case12Keep,
        CaseKind::Case12Swap,
        CaseKind::Case12Rewire,
        CaseKind::Case2,
        CaseKind::Case31Keep,
        CaseKind::Case31Rewire,
        CaseKind::Case32Keep,
        CaseKind::Case32Rewire,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CaseKind::Case11 => "1.1",
            CaseKind::Case12Keep => "1.2a",
            CaseKind::Case12Swap => "1.2c",
            CaseKind::Case12Rewire => "1.2b",
            CaseKind::Case2 => "2",
            CaseKind::Case31Keep => "3.1a",
            CaseKind::Case31Rewire => "3.1b",
            CaseKind::Case32Keep => "3.2a",
            CaseKind::Case32Rewire => "3.2b",
        }
    }

    /// Cases 1 and 3 leave a free half-charge of `a'_2` behind.
    pub fn releases_half(self) -> bool {
        self != CaseKind::Case2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BadLeafCase {
    /// The bad leaf is adjacent to `a'_2`.
    LeafAdjacent,
    /// The sibling leaf `b` is adjacent to `b'_2 = a'_2`.
    SiblingSecond,
    /// `b'_1 = a'_2` and `(b1, b2)` was processed in case 1.1.
    SiblingFirstProcessed,
    /// `b'_1 = a'_2` and `(b1, b2)` was never in the edge set: `b` is
    /// attached to `b1` instead of `b_*`.
    SiblingFirstRewire,
}

impl BadLeafCase {
    pub const ALL: [BadLeafCase; 4] = [
        BadLeafCase::LeafAdjacent,
        BadLeafCase::SiblingSecond,
        BadLeafCase::SiblingFirstProcessed,
        BadLeafCase::SiblingFirstRewire,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BadLeafCase::LeafAdjacent => "i",
            BadLeafCase::SiblingSecond => "ii",
            BadLeafCase::SiblingFirstProcessed => "iii",
            BadLeafCase::SiblingFirstRewire => "iv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    Root(Vertex),
    Tree { parent: Vertex, child: Vertex },
    Back { lower: Vertex, upper: Vertex },
    Phase(Phase),
    Rule { rule: u8, q: Vertex, leaf: Vertex, source: Vertex },
    Move(Move),
    Classify { leaf: Vertex, good: bool },
    EdgeSet { a1: Vertex, a2: Vertex, leaf: Vertex },
    Case { kind: CaseKind, leaf: Vertex },
    Remove(Vertex, Vertex),
    Add(Vertex, Vertex),
    Saturate { vertex: Vertex, leaf: Vertex },
    BadLeaf { leaf: Vertex, case: BadLeafCase },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TraceEvent::Root(v) => write!(f, "root {v}"),
            TraceEvent::Tree { parent, child } => write!(f, "tree {parent} {child}"),
            TraceEvent::Back { lower, upper } => write!(f, "back {lower} {upper}"),
            TraceEvent::Phase(p) => {
                let name = match p {
                    Phase::Rules => "rules",
                    Phase::Edges => "edges",
                    Phase::Bad => "bad",
                    Phase::Done => "done",
                };
                write!(f, "phase {name}")
            }
            TraceEvent::Rule { rule, q, leaf, source } => write!(f, "rule {rule} {q} {leaf} {source}"),
            TraceEvent::Move(m) => write!(f, "move {} {} {} {}", m.source, m.amount, m.from, m.to),
            TraceEvent::Classify { leaf, good } => write!(f, "classify {leaf} {}", if good { "good" } else { "bad" }),
            TraceEvent::EdgeSet { a1, a2, leaf } => write!(f, "e {a1} {a2} {leaf}"),
            TraceEvent::Case { kind, leaf } => write!(f, "case {} {leaf}", kind.label()),
            TraceEvent::Remove(u, v) => write!(f, "remove {u} {v}"),
            TraceEvent::Add(u, v) => write!(f, "add {u} {v}"),
            TraceEvent::Saturate { vertex, leaf } => write!(f, "saturate {vertex} {leaf}"),
            TraceEvent::BadLeaf { leaf, case } => write!(f, "badleaf {leaf} {}", case.label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse trace line {line:?}")]
pub struct TraceParseError {
    pub line: String,
}

impl FromStr for TraceEvent {
    type Err = TraceParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || TraceParseError { line: s.to_string() };
        let tokens: Vec<&str> = s.split_whitespace().collect();
        let num =
            |i: usize| -> Result<usize, TraceParseError> { tokens.get(i).and_then(|t| t.parse().ok()).ok_or_else(err) };
        let holder = |i: usize| -> Result<Holder, TraceParseError> {
            match tokens.get(i) {
                Some(&"free") => Ok(Holder::Free),
                Some(t) => t.parse().map(Holder::Vertex).map_err(|_| err()),
                None => Err(err()),
            }
        };
        let arity = |k: usize| if tokens.len() == k { Ok(()) } else { Err(err()) };
        let event = match tokens.first().copied() {
            Some("root") => {
                arity(2)?;
                TraceEvent::Root(num(1)?)
            }
            Some("tree") => {
                arity(3)?;
                TraceEvent::Tree { parent: num(1)?, child: num(2)? }
            }
            Some("back") => {
                arity(3)?;
                TraceEvent::Back { lower: num(1)?, upper: num(2)? }
            }
            Some("phase") => {
                arity(2)?;
                TraceEvent::Phase(match tokens[1] {
                    "rules" => Phase::Rules,
                    "edges" => Phase::Edges,
                    "bad" => Phase::Bad,
                    "done" => Phase::Done,
                    _ => return Err(err()),
                })
            }
            Some("rule") => {
                arity(5)?;
                let rule = num(1)? as u8;
                if rule != 1 && rule != 2 {
                    return Err(err());
                }
                TraceEvent::Rule { rule, q: num(2)?, leaf: num(3)?, source: num(4)? }
            }
            Some("move") => {
                arity(5)?;
                TraceEvent::Move(Move { source: num(1)?, amount: num(2)? as u64, from: holder(3)?, to: holder(4)? })
            }
            Some("classify") => {
                arity(3)?;
                let good = match tokens[2] {
                    "good" => true,
                    "bad" => false,
                    _ => return Err(err()),
                };
                TraceEvent::Classify { leaf: num(1)?, good }
            }
            Some("e") => {
                arity(4)?;
                TraceEvent::EdgeSet { a1: num(1)?, a2: num(2)?, leaf: num(3)? }
            }
            Some("case") => {
                arity(3)?;
                let kind = CaseKind::ALL.into_iter().find(|k| k.label() == tokens[1]).ok_or_else(err)?;
                TraceEvent::Case { kind, leaf: num(2)? }
            }
            Some("remove") => {
                arity(3)?;
                TraceEvent::Remove(num(1)?, num(2)?)
            }
            Some("add") => {
                arity(3)?;
                TraceEvent::Add(num(1)?, num(2)?)
            }
            Some("saturate") => {
                arity(3)?;
                TraceEvent::Saturate { vertex: num(1)?, leaf: num(2)? }
            }
            Some("badleaf") => {
                arity(3)?;
                let case = BadLeafCase::ALL.into_iter().find(|k| k.label() == tokens[2]).ok_or_else(err)?;
                TraceEvent::BadLeaf { leaf: num(1)?, case }
            }
            _ => return Err(err()),
        };
        Ok(event)
    }
}

pub fn render_trace(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}

/// Parses a rendered trace, skipping blank lines and `#` comments.
pub fn parse_trace(text: &str) -> Result<Vec<TraceEvent>, TraceParseError> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::parse).collect()
}
