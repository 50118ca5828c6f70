//! Wall-clock timing of the cubic solver on seeded random instances.

use std::time::Instant;

use crate::cubic::solve_cubic;
use crate::error::SolveError;
use crate::generators::{assign_weights, gen_cubic_random, GenError, WeightScheme};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchPoint {
    pub n: usize,
    /// Best of the repeats, in milliseconds.
    pub millis: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Bytes swept between runs so every run starts with cold caches.
const EVICT_BYTES: usize = 256 << 20;

/// Times `solve_cubic` on one random cubic graph per size, weights uniform
/// in `[0, 100]`. Generation is not timed, and caches are flushed before
/// each timed run.
pub fn bench_cubic(sizes: &[usize], seed: u64, repeats: usize) -> Result<Vec<BenchPoint>, BenchError> {
    let mut points = Vec::with_capacity(sizes.len());
    let mut sweep = vec![0u8; EVICT_BYTES];
    for &n in sizes {
        let g = assign_weights(&gen_cubic_random(n, seed)?, WeightScheme::Uniform(100), seed);
        let mut best = f64::INFINITY;
        for _ in 0..repeats.max(1) {
            evict(&mut sweep);
            let start = Instant::now();
            let sol = solve_cubic(&g)?;
            best = best.min(start.elapsed().as_secs_f64() * 1e3);
            std::hint::black_box(sol);
        }
        points.push(BenchPoint { n, millis: best });
    }
    Ok(points)
}

fn evict(sweep: &mut [u8]) {
    for line in sweep.chunks_mut(64) {
        line[0] = line[0].wrapping_add(1);
    }
    std::hint::black_box(sweep);
}

/// Least-squares slope of `ln(millis)` against `ln(n)`.
pub fn loglog_slope(points: &[BenchPoint]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.millis.max(1e-6).ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn render_csv(points: &[BenchPoint]) -> String {
    let mut out = String::from("n,millis\n");
    for p in points {
        out.push_str(&format!("{},{:.3}\n", p.n, p.millis));
    }
    out
}
