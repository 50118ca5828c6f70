//! Seeded graph families for tests and benchmarks.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)`: stream 0 drives
//! the structure and stream 1 the weights, so the same [`GenSpec`] gives the
//! same graph on every platform.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, GraphError, Vertex, Weight};

pub const MAX_RETRIES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid vertex count {0}")]
    InvalidN(usize),
    #[error("line graph vertex for base edge ({}, {}) has degree {degree}", edge.0, edge.1)]
    ResultHasDegreeTwo { edge: (Vertex, Vertex), degree: usize },
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("unknown weight scheme {0:?}")]
    UnknownWeights(String),
    #[error("no simple connected pairing found after {0} attempts")]
    TooManyRetries(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    CubicRandom,
    LineGraphOfCubicRandom,
    Complete,
    Prism,
    K13,
    Petersen,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::CubicRandom,
        Family::LineGraphOfCubicRandom,
        Family::Complete,
        Family::Prism,
        Family::K13,
        Family::Petersen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::CubicRandom => "cubic-random",
            Family::LineGraphOfCubicRandom => "line-graph-of-cubic-random",
            Family::Complete => "complete",
            Family::Prism => "prism",
            Family::K13 => "k13",
            Family::Petersen => "petersen",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| GenError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightScheme {
    Unit,
    /// Independent integers in `[0, max]`.
    Uniform(Weight),
    /// Weight 1 with the given probability, else 0.
    ZeroOne(f64),
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightScheme::Unit => f.write_str("unit"),
            WeightScheme::Uniform(max) => write!(f, "uniform:{max}"),
            WeightScheme::ZeroOne(p) => write!(f, "zero-one:{p}"),
        }
    }
}

impl FromStr for WeightScheme {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GenError::UnknownWeights(s.to_string());
        match s.split_once(':') {
            None if s == "unit" => Ok(WeightScheme::Unit),
            Some(("uniform", max)) => max.parse().map(WeightScheme::Uniform).map_err(|_| bad()),
            Some(("zero-one", p)) => match p.parse::<f64>() {
                Ok(p) if (0.0..=1.0).contains(&p) => Ok(WeightScheme::ZeroOne(p)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub family: Family,
    /// Vertex count; for line graphs, the vertex count of the cubic base.
    /// Ignored by the fixed-size families.
    pub n: usize,
    pub weights: WeightScheme,
    pub seed: u64,
}

impl GenSpec {
    pub fn generate(&self) -> Result<Graph, GenError> {
        let g = match self.family {
            Family::CubicRandom => gen_cubic_random(self.n, self.seed)?,
            Family::LineGraphOfCubicRandom => gen_line_graph(&gen_cubic_random(self.n, self.seed)?, true)?,
            other => gen_named(other, self.n)?,
        };
        Ok(assign_weights(&g, self.weights, self.seed))
    }
}

fn structure_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn weight_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Random connected simple cubic graph with unit weights.
pub fn gen_cubic_random(n: usize, seed: u64) -> Result<Graph, GenError> {
    gen_cubic_random_counted(n, seed).map(|(g, _)| g)
}

/// Like [`gen_cubic_random`], also returning the number of rejected pairings.
pub fn gen_cubic_random_counted(n: usize, seed: u64) -> Result<(Graph, usize), GenError> {
    if n < 4 || n % 2 == 1 {
        return Err(GenError::InvalidN(n));
    }
    gen_configuration(&vec![3; n], seed)
}

/// Configuration model: random pairing of `degrees[v]` stubs per vertex,
/// rejecting pairings with loops, parallel edges or several components.
pub fn gen_configuration(degrees: &[usize], seed: u64) -> Result<(Graph, usize), GenError> {
    let n = degrees.len();
    if n == 0 || degrees.iter().sum::<usize>() % 2 == 1 {
        return Err(GenError::InvalidN(n));
    }
    let mut rng = structure_rng(seed);
    let mut stubs: Vec<Vertex> = degrees.iter().enumerate().flat_map(|(v, &d)| std::iter::repeat_n(v, d)).collect();
    for attempt in 0..MAX_RETRIES {
        stubs.shuffle(&mut rng);
        let mut edges: Vec<(Vertex, Vertex)> =
            stubs.chunks_exact(2).map(|p| (p[0].min(p[1]), p[0].max(p[1]))).collect();
        if edges.iter().any(|&(u, v)| u == v) {
            continue;
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        match Graph::new(vec![1; n], &edges) {
            Ok(g) => return Ok((g, attempt)),
            Err(GraphError::Disconnected) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(GenError::TooManyRetries(MAX_RETRIES))
}

/// Vertex `i` of the result is the `i`-th edge of `base` in lexicographic
/// order; two are adjacent when the edges share an endpoint. Weights are 1.
/// In strict mode every result vertex must have degree at least 3.
pub fn gen_line_graph(base: &Graph, strict: bool) -> Result<Graph, GenError> {
    let base_edges: Vec<(Vertex, Vertex)> = base.edges().collect();
    if strict {
        for &(u, v) in &base_edges {
            let degree = base.degree(u) + base.degree(v) - 2;
            if degree < 3 {
                return Err(GenError::ResultHasDegreeTwo { edge: (u, v), degree });
            }
        }
    }
    let mut incident: Vec<Vec<Vertex>> = vec![Vec::new(); base.n()];
    for (i, &(u, v)) in base_edges.iter().enumerate() {
        incident[u].push(i);
        incident[v].push(i);
    }
    let mut edges = Vec::new();
    for list in &incident {
        for (x, &e) in list.iter().enumerate() {
            for &f in &list[x + 1..] {
                edges.push((e, f));
            }
        }
    }
    Ok(Graph::new(vec![1; base_edges.len()], &edges)?)
}

/// Fixed constructions with unit weights; `n` is used by `complete` only.
pub fn gen_named(family: Family, n: usize) -> Result<Graph, GenError> {
    let edges: Vec<(Vertex, Vertex)> = match family {
        Family::Complete => {
            if n == 0 {
                return Err(GenError::InvalidN(n));
            }
            (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()
        }
        Family::Prism => vec![(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)],
        Family::K13 => vec![(0, 1), (0, 2), (0, 3)],
        Family::Petersen => (0..5).flat_map(|i| [(i, (i + 1) % 5), (i, i + 5), (5 + i, 5 + (i + 2) % 5)]).collect(),
        other => return Err(GenError::UnknownFamily(other.name().to_string())),
    };
    let n = match family {
        Family::Complete => n,
        Family::Prism => 6,
        Family::K13 => 4,
        _ => 10,
    };
    Ok(Graph::new(vec![1; n], &edges)?)
}

pub fn assign_weights(g: &Graph, scheme: WeightScheme, seed: u64) -> Graph {
    let mut rng = weight_rng(seed);
    let weights = (0..g.n())
        .map(|_| match scheme {
            WeightScheme::Unit => 1,
            WeightScheme::Uniform(max) => rng.gen_range(0..=max),
            WeightScheme::ZeroOne(p) => Weight::from(rng.gen_bool(p)),
        })
        .collect();
    g.with_weights(weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_random_small() {
        for seed in 0..20 {
            let g = gen_cubic_random(4, seed).unwrap();
            assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
            assert!(gen_cubic_random(6, seed).unwrap().is_cubic());
        }
        assert_eq!(gen_cubic_random(7, 1), Err(GenError::InvalidN(7)));
        assert_eq!(gen_cubic_random(2, 1), Err(GenError::InvalidN(2)));
    }

    #[test]
    fn cubic_random_retries_are_bounded() {
        for seed in 0..10 {
            let (g, retries) = gen_cubic_random_counted(100, seed).unwrap();
            assert!(g.is_cubic());
            assert!(retries < MAX_RETRIES);
        }
    }

    #[test]
    fn line_graphs() {
        let k4 = gen_named(Family::Complete, 4).unwrap();
        let l = gen_line_graph(&k4, true).unwrap();
        assert_eq!((l.n(), l.m()), (6, 12));
        assert!((0..6).all(|v| l.degree(v) == 4));
        assert!(l.is_claw_free());

        let triangle = gen_named(Family::Complete, 3).unwrap();
        assert!(matches!(gen_line_graph(&triangle, true), Err(GenError::ResultHasDegreeTwo { degree: 2, .. })));
        assert_eq!(gen_line_graph(&triangle, false).unwrap().m(), 3);

        let base = gen_cubic_random(20, 3).unwrap();
        let l = gen_line_graph(&base, true).unwrap();
        assert_eq!(l.n(), 30);
        assert!(l.is_claw_free() && (0..30).all(|v| l.degree(v) == 4));
    }

    #[test]
    fn named_families() {
        let p = gen_named(Family::Prism, 0).unwrap();
        assert!((p.n(), p.m()) == (6, 9) && p.is_cubic());
        let pet = gen_named(Family::Petersen, 0).unwrap();
        assert!((pet.n(), pet.m()) == (10, 15) && pet.is_cubic());
        assert!(!pet.is_claw_free());
        assert!(!gen_named(Family::K13, 0).unwrap().is_claw_free());
        assert!(matches!(gen_named(Family::CubicRandom, 8), Err(GenError::UnknownFamily(_))));
        assert!(matches!("wheel".parse::<Family>(), Err(GenError::UnknownFamily(_))));
    }

    #[test]
    fn weights_are_deterministic() {
        let k4 = gen_named(Family::Complete, 4).unwrap();
        assert_eq!(assign_weights(&k4, WeightScheme::Unit, 0).weights(), &[1, 1, 1, 1]);
        let g = gen_cubic_random(50, 11).unwrap();
        let a = assign_weights(&g, WeightScheme::Uniform(100), 7);
        let b = assign_weights(&g, WeightScheme::Uniform(100), 7);
        assert_eq!(a.weights(), b.weights());
        assert!(a.weights().iter().all(|&w| w <= 100));
        let z = assign_weights(&g, WeightScheme::ZeroOne(0.5), 7);
        assert!(z.weights().iter().all(|&w| w <= 1));
    }

    #[test]
    fn spec_round_trip() {
        let spec =
            GenSpec { family: Family::LineGraphOfCubicRandom, n: 10, weights: "uniform:9".parse().unwrap(), seed: 5 };
        let g = spec.generate().unwrap();
        assert_eq!(g, spec.generate().unwrap());
        assert_eq!(g.n(), 15);
        assert_eq!("zero-one:0.25".parse::<WeightScheme>().unwrap(), WeightScheme::ZeroOne(0.25));
        assert!("zero-one:2".parse::<WeightScheme>().is_err());
        assert!("gauss".parse::<WeightScheme>().is_err());
    }
}
