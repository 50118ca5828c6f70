#![allow(dead_code)]

pub mod forge;

use maxwist::clawfree::{run_clawfree, ClawFreeRun};
use maxwist::generators::{Family, GenSpec, WeightScheme};
use maxwist::Graph;

/// Smallest instances of the line-graph family that exercise each case.
pub const PINS: &[(&str, usize, u64, &str)] = &[
    ("case-1.1", 4, 1, "uniform:10"),
    ("case-1.2a", 6, 11, "zero-one:0.5"),
    ("case-1.2b", 6, 24, "uniform:10"),
    ("case-1.2c", 6, 4, "zero-one:0.5"),
    ("case-2", 6, 0, "unit"),
    ("case-3.1a", 6, 16, "uniform:10"),
    ("case-3.2a", 6, 7, "uniform:100"),
    ("case-3.2b", 8, 274, "uniform:10"),
    ("bad-i", 4, 49, "uniform:10"),
    ("bad-ii", 6, 132, "uniform:10"),
    ("bad-iii", 6, 222, "uniform:10"),
    ("bad-iv", 8, 362, "uniform:10"),
];

pub fn line_graph(n: usize, seed: u64, weights: WeightScheme) -> Graph {
    GenSpec { family: Family::LineGraphOfCubicRandom, n, weights, seed }.generate().unwrap()
}

pub fn pin_graph(name: &str) -> Graph {
    let &(_, n, seed, w) = PINS.iter().find(|p| p.0 == name).expect("known pin");
    line_graph(n, seed, w.parse().unwrap())
}

pub fn pin(name: &str) -> (Graph, ClawFreeRun) {
    let g = pin_graph(name);
    let run = run_clawfree(&g, true).unwrap();
    (g, run)
}

pub fn complete(n: usize, weights: Vec<u64>) -> Graph {
    let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    Graph::new(weights, &edges).unwrap()
}
