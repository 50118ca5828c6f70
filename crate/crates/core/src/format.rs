//! Plain-text graph and solution formats.
//!
//! Graph files: blank lines and lines starting with `#` are ignored. The
//! first data line is `<n> <m>`, the second holds `n` whitespace-separated
//! weights, followed by `m` lines `<u> <v>`. [`write_graph`] always emits
//! edges as `u < v` in lexicographic order, so `write_graph(read_graph(s))`
//! reproduces any file written by it byte for byte.
//!
//! Weights may be written as fixed-point decimals when the reader is given a
//! number of decimal places `d`: each weight is scaled by `10^d` and must be
//! exactly representable after scaling (`1.25` with `d = 2` becomes `125`).

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Graph, GraphError, Vertex, Weight};
use crate::solution::SpanningTreeSolution;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: expected {what}")]
    Missing { line: usize, what: &'static str },
    #[error("line {line}: invalid token {token:?}")]
    BadToken { line: usize, token: String },
    #[error("line {line}: weight {token:?} has more than {decimals} decimal places")]
    TooManyDecimals { line: usize, token: String, decimals: u32 },
    #[error("line {line}: expected {expected} values, found {found}")]
    WrongCount { line: usize, expected: usize, found: usize },
    #[error("unexpected trailing data at line {line}")]
    Trailing { line: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_uint(line: usize, token: &str) -> Result<u64, ParseError> {
    token.parse().map_err(|_| ParseError::BadToken { line, token: token.to_string() })
}

fn parse_weight(line: usize, token: &str, decimals: u32) -> Result<Weight, ParseError> {
    let bad = || ParseError::BadToken { line, token: token.to_string() };
    let (int_part, frac_part) = match token.split_once('.') {
        Some((i, f)) => (i, f),
        None => (token, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    if frac_part.len() > decimals as usize {
        return Err(ParseError::TooManyDecimals { line, token: token.to_string(), decimals });
    }
    let scale = 10u64.checked_pow(decimals).ok_or_else(bad)?;
    let int_value: u64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| bad())? };
    let mut frac_value: u64 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| bad())? };
    for _ in frac_part.len()..decimals as usize {
        frac_value *= 10;
    }
    int_value.checked_mul(scale).and_then(|x| x.checked_add(frac_value)).ok_or_else(bad)
}

/// Reads a graph with integer weights.
pub fn read_graph(text: &str) -> Result<Graph, ParseError> {
    read_graph_scaled(text, 0)
}

/// Reads a graph whose weights may carry up to `decimals` decimal places.
pub fn read_graph_scaled(text: &str, decimals: u32) -> Result<Graph, ParseError> {
    let mut lines = data_lines(text);
    let (line, header) = lines.next().ok_or(ParseError::Missing { line: 1, what: "header \"<n> <m>\"" })?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(ParseError::WrongCount { line, expected: 2, found: head.len() });
    }
    let n = parse_uint(line, head[0])? as usize;
    let m = parse_uint(line, head[1])? as usize;

    let weights = if n == 0 {
        Vec::new()
    } else {
        let (line, wline) = lines.next().ok_or(ParseError::Missing { line: line + 1, what: "weight line" })?;
        let tokens: Vec<&str> = wline.split_whitespace().collect();
        if tokens.len() != n {
            return Err(ParseError::WrongCount { line, expected: n, found: tokens.len() });
        }
        tokens.iter().map(|t| parse_weight(line, t, decimals)).collect::<Result<Vec<_>, _>>()?
    };

    let mut edges = Vec::with_capacity(m);
    let mut last_line = line;
    for _ in 0..m {
        let (line, eline) = lines.next().ok_or(ParseError::Missing { line: last_line + 1, what: "edge line" })?;
        last_line = line;
        let tokens: Vec<&str> = eline.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(ParseError::WrongCount { line, expected: 2, found: tokens.len() });
        }
        let u = parse_uint(line, tokens[0])? as Vertex;
        let v = parse_uint(line, tokens[1])? as Vertex;
        edges.push((u.min(v), u.max(v)));
    }
    if let Some((line, _)) = lines.next() {
        return Err(ParseError::Trailing { line });
    }
    Ok(Graph::new(weights, &edges)?)
}

pub fn write_graph(g: &Graph) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", g.n(), g.m()).unwrap();
    let weights: Vec<String> = g.weights().iter().map(|w| w.to_string()).collect();
    writeln!(out, "{}", weights.join(" ")).unwrap();
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

/// Header line followed by the normalized tree edges.
pub fn write_solution(g: &Graph, sol: &SpanningTreeSolution) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "internal {} total {} bound {}/{} n {} m {} algo {}",
        sol.internal_weight,
        sol.total_weight,
        sol.guarantee.numer(),
        sol.guarantee.denom(),
        g.n(),
        g.m(),
        sol.algorithm
    )
    .unwrap();
    for &(u, v) in &sol.tree_edges {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

/// Reads the edge list of a tree file. Accepts the output of
/// [`write_solution`] (the `internal ...` header is skipped) or a bare edge
/// list.
pub fn read_tree_edges(text: &str) -> Result<Vec<(Vertex, Vertex)>, ParseError> {
    let mut edges = Vec::new();
    for (line, l) in data_lines(text) {
        if l.starts_with("internal ") {
            continue;
        }
        let tokens: Vec<&str> = l.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(ParseError::WrongCount { line, expected: 2, found: tokens.len() });
        }
        edges.push((parse_uint(line, tokens[0])? as Vertex, parse_uint(line, tokens[1])? as Vertex));
    }
    Ok(edges)
}

/// Graphviz rendering of a tree over the graph's vertices.
pub fn write_dot(g: &Graph, tree_edges: &[(Vertex, Vertex)]) -> String {
    let mut out = String::from("graph T {\n");
    for v in 0..g.n() {
        writeln!(out, "  {v} [label=\"{v}:{}\"];", g.weight(v)).unwrap();
    }
    for &(u, v) in tree_edges {
        writeln!(out, "  {u} -- {v};").unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const PRISM: &str = "6 9\n1 1 1 1 1 1\n0 1\n0 2\n0 3\n1 2\n1 4\n2 5\n3 4\n3 5\n4 5\n";

    #[test]
    fn prism_round_trips_bit_exact() {
        let g = read_graph(PRISM).unwrap();
        assert_eq!(g.n(), 6);
        assert_eq!(g.m(), 9);
        assert_eq!(write_graph(&g), PRISM);
    }

    #[test]
    fn ignores_comments_and_blank_lines() {
        let text = "# a triangle\n\n3 3\n# weights\n1 2 3\n0 1\n\n1 2\n2 0\n";
        let g = read_graph(text).unwrap();
        assert_eq!(g.weights(), &[1, 2, 3]);
        assert_eq!(write_graph(&g), "3 3\n1 2 3\n0 1\n0 2\n1 2\n");
    }

    #[test]
    fn scaled_decimal_weights() {
        let g = read_graph_scaled("2 1\n1.25 3\n0 1\n", 2).unwrap();
        assert_eq!(g.weights(), &[125, 300]);
        let g = read_graph_scaled("2 1\n.5 2.\n0 1\n", 1).unwrap();
        assert_eq!(g.weights(), &[5, 20]);
        assert!(matches!(read_graph_scaled("2 1\n1.255 3\n0 1\n", 2), Err(ParseError::TooManyDecimals { .. })));
        assert!(matches!(read_graph("2 1\n1.5 3\n0 1\n"), Err(ParseError::TooManyDecimals { .. })));
    }

    #[test]
    fn reports_errors() {
        assert!(matches!(read_graph(""), Err(ParseError::Missing { .. })));
        assert!(matches!(read_graph("3 1\n1 1\n0 1\n"), Err(ParseError::WrongCount { line: 2, .. })));
        assert!(matches!(read_graph("2 1\n1 -1\n0 1\n"), Err(ParseError::BadToken { .. })));
        assert!(matches!(read_graph("2 2\n1 1\n0 1\n"), Err(ParseError::Missing { .. })));
        assert!(matches!(read_graph("2 1\n1 1\n0 1\n0 1\n"), Err(ParseError::Trailing { line: 4 })));
        assert_eq!(read_graph("2 0\n0 0\n"), Err(ParseError::Graph(GraphError::Disconnected)));
        assert_eq!(read_graph("0 0\n"), Err(ParseError::Graph(GraphError::Empty)));
    }

    #[test]
    fn tree_edges_skip_header() {
        let text = "internal 2 total 4 bound 0/1 n 4 m 6 algo cubic\n0 1\n1 2\n2 3\n";
        assert_eq!(read_tree_edges(text).unwrap(), vec![(0, 1), (1, 2), (2, 3)]);
    }
}
