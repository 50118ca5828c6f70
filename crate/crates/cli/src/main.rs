//! `maxwist`: solve, generate, verify and benchmark internal spanning tree
//! instances.
//!
//! Exit status is 0 on success, 2 for usage, I/O and parse errors, and 3
//! when a solver precondition or an invariant check fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use maxwist::bench::{bench_cubic, render_csv};
use maxwist::format::{read_graph_scaled, read_tree_edges, write_dot, write_graph, write_solution};
use maxwist::generators::{Family, GenSpec, WeightScheme};
use maxwist::oracle::DEFAULT_CAP;
use maxwist::trace::render_trace;
use maxwist::verify::{verify_tree_edges, BoundKind};
use maxwist::{
    approx_clawfree, approx_cubic, optimal_internal_spanning_tree, run_clawfree, solve_cubic, Bound, Graph, SolveError,
};

#[derive(Parser)]
#[command(name = "maxwist", version, about = "Approximate maximum weight internal spanning trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the tree.
    Solve {
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long)]
        input: PathBuf,
        /// Accuracy for the small-n exact branch, as a decimal or `p/q`.
        #[arg(long)]
        epsilon: Option<String>,
        /// Event trace of the claw-free run.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Emit the tree as Graphviz instead of the edge list.
        #[arg(long)]
        dot: bool,
        /// Decimal places allowed in weights; weights are scaled by 10^d.
        #[arg(long, default_value_t = 0)]
        decimals: u32,
    },
    /// Generate a seeded instance.
    Gen {
        #[arg(long)]
        family: Family,
        /// Vertex count (base graph size for line graphs).
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, default_value = "unit")]
        weights: WeightScheme,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a tree against a graph and print the report.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, default_value = "none")]
        kind: BoundKind,
        #[arg(long, default_value_t = 0)]
        decimals: u32,
    },
    /// Time the cubic solver and print `n,millis` rows.
    Bench {
        #[arg(long, default_value = "cubic-random")]
        family: Family,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Cubic,
    Clawfree,
    Exact,
}

enum Failure {
    Usage(String),
    Solve(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Solve(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Solve(m) => m,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn solve_err(e: impl std::fmt::Display) -> Failure {
    Failure::Solve(e.to_string())
}

/// Parses `0.25`, `.25` or `1/4` into an exact positive rational.
fn parse_epsilon(text: &str) -> Result<Bound, String> {
    let bad = || format!("invalid epsilon {text:?}");
    let value = if let Some((p, q)) = text.split_once('/') {
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        Bound::new(p, q)
    } else {
        let (int_part, frac_part) = text.split_once('.').unwrap_or((text, ""));
        if (int_part.is_empty() && frac_part.is_empty())
            || !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit())
            || frac_part.len() > 18
        {
            return Err(bad());
        }
        let scale = 10u64.pow(frac_part.len() as u32);
        let digits: u64 = format!("{int_part}{frac_part}").parse().map_err(|_| bad())?;
        Bound::new(digits, scale)
    };
    if *value.numer() == 0 {
        return Err(format!("epsilon must be positive, got {text:?}"));
    }
    Ok(value)
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_input(path: &Path, decimals: u32) -> Result<Graph, Failure> {
    read_graph_scaled(&read_text(path)?, decimals).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { algo, input, epsilon, trace, output, dot, decimals } => {
            let g = read_input(&input, decimals)?;
            let epsilon = epsilon.as_deref().map(parse_epsilon).transpose().map_err(usage)?;
            if trace.is_some() && !matches!(algo, Algo::Clawfree) {
                return Err(usage("--trace is only available with --algo clawfree"));
            }
            if epsilon.is_some() && matches!(algo, Algo::Exact) {
                return Err(usage("--epsilon does not apply to --algo exact"));
            }
            let sol = match (algo, epsilon) {
                (Algo::Cubic, None) => solve_cubic(&g),
                (Algo::Cubic, Some(e)) => approx_cubic(&g, e),
                (Algo::Clawfree, Some(e)) if trace.is_none() => approx_clawfree(&g, e),
                (Algo::Clawfree, Some(_)) => return Err(usage("--trace cannot be combined with --epsilon")),
                (Algo::Clawfree, None) => {
                    let run = run_clawfree(&g, trace.is_some()).map_err(solve_err)?;
                    if let Some(path) = &trace {
                        emit(Some(path), &render_trace(&run.trace))?;
                    }
                    Ok(run.solution)
                }
                (Algo::Exact, _) => optimal_internal_spanning_tree(&g, DEFAULT_CAP).map(|r| r.into_solution(&g)),
            }
            .map_err(|e| match e {
                SolveError::InvalidEpsilon(_) => usage(e),
                e => solve_err(e),
            })?;
            let text = if dot { write_dot(&g, &sol.tree_edges) } else { write_solution(&g, &sol) };
            emit(output.as_deref(), &text)
        }
        Command::Gen { family, n, weights, seed, out } => {
            let g = GenSpec { family, n, weights, seed }.generate().map_err(usage)?;
            emit(out.as_deref(), &write_graph(&g))
        }
        Command::Verify { input, tree, kind, decimals } => {
            let g = read_input(&input, decimals)?;
            let edges = read_tree_edges(&read_text(&tree)?).map_err(|e| usage(format!("{}: {e}", tree.display())))?;
            let report = verify_tree_edges(&g, &edges, kind);
            print!("{report}");
            if report.is_ok() {
                Ok(())
            } else {
                Err(Failure::Solve(format!("{} violation(s)", report.violations.len())))
            }
        }
        Command::Bench { family, sizes, seed, repeats } => {
            if family != Family::CubicRandom {
                return Err(usage(format!("bench supports only cubic-random, got {family}")));
            }
            let points = bench_cubic(&sizes, seed, repeats).map_err(solve_err)?;
            print!("{}", render_csv(&points));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
