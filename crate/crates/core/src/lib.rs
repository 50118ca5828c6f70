//! Approximation algorithms for the maximum weight internal spanning tree
//! problem: find a spanning tree whose non-leaf vertices have maximum total
//! weight.
//!
//! - [`cubic::solve_cubic`]: greedy DFS tree on cubic graphs, at least
//!   `3/4 - 3/n` of the total weight is internal.
//! - [`clawfree::solve_clawfree`]: rewired greedy DFS tree on claw-free
//!   graphs without degree-2 vertices, at least `3/5 - 3/(5n)`.
//! - [`oracle::optimal_internal_spanning_tree`]: exhaustive search for small
//!   graphs, used by the `epsilon` wrappers and in tests.

pub mod bench;
pub mod charge;
pub mod clawfree;
pub mod cubic;
pub mod dfs;
pub mod error;
pub mod format;
pub mod generators;
pub mod graph;
pub mod oracle;
pub mod solution;
pub mod trace;
pub mod verify;

pub use clawfree::{approx_clawfree, run_clawfree, solve_clawfree};
pub use cubic::{approx_cubic, solve_cubic};
pub use error::{SolveError, Violation};
pub use graph::{Graph, GraphError, Vertex, Weight};
pub use oracle::optimal_internal_spanning_tree;
pub use solution::{Algorithm, Bound, SpanningTreeSolution};
