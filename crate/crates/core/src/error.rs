use thiserror::Error;

use crate::graph::{Graph, Vertex};

/// A failed internal check. The label names the property that broke
/// (for example `"(E5)"` or `"conservation"`); the detail says where.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{label}: {detail}")]
pub struct Violation {
    pub label: String,
    pub detail: String,
}

impl Violation {
    pub fn new(label: impl Into<String>, detail: impl Into<String>) -> Self {
        Violation { label: label.into(), detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("graph is not cubic")]
    NotCubic,
    #[error("graph is not claw-free: vertex {center} has independent neighbors {leaves:?}")]
    NotClawFree { center: Vertex, leaves: [Vertex; 3] },
    #[error("vertex {0} has degree 2")]
    HasDegreeTwoVertex(Vertex),
    #[error("exact solve needs n = {n} but the oracle cap is {cap}")]
    ExactSolveTooLarge { n: usize, cap: usize },
    #[error("invalid epsilon: {0}")]
    InvalidEpsilon(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(#[from] Violation),
}

impl SolveError {
    pub(crate) fn invariant(label: impl Into<String>, detail: impl Into<String>) -> Self {
        SolveError::InvariantViolation(Violation::new(label, detail))
    }
}

pub(crate) fn require_cubic(g: &Graph) -> Result<(), SolveError> {
    if g.is_cubic() {
        Ok(())
    } else {
        Err(SolveError::NotCubic)
    }
}
