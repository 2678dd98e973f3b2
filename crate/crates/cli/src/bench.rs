//! Iterations and time to reach a relative error, averaged over seeded repeats.
//! A cell is NaN when any repeat misses the tolerance within the caps.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use warpd_core::report::SolveReport;

use crate::config::{Algorithm, BenchSpec, ExperimentConfig};
use crate::run::execute;
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct BenchCell {
    pub algorithm: Algorithm,
    pub tol: f64,
    pub mean_iters: f64,
    pub mean_seconds: f64,
    pub reached: usize,
    pub repeats: usize,
}

/// First (iterations, seconds) at which the error column drops to `tol`. Uses the relative
/// error to truth when present, the objective error metric otherwise.
pub fn first_hit(report: &SolveReport, tol: f64) -> Option<(usize, f64)> {
    report
        .rows
        .iter()
        .find(|r| r.rel_l2_error_to_truth.or(r.error_metric).is_some_and(|e| e <= tol))
        .map(|r| (r.inner_iter_cumulative, r.wall_seconds))
}

pub fn run_bench(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<BenchCell>, CliError> {
    let spec = cfg.bench.clone().unwrap_or_default();
    let jobs: Vec<(Algorithm, usize)> = spec
        .algorithms
        .iter()
        .flat_map(|&a| (0..spec.repeats).map(move |r| (a, r)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Config(e.to_string()))?;
    let base_seed = cfg.instance.seed();
    let results: Vec<Result<(Algorithm, SolveReport), CliError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(alg, rep)| {
                let mut c = cfg.clone();
                c.instance.set_seed(base_seed.wrapping_add(rep as u64));
                if let Some(s) = spec.max_seconds {
                    c.max_seconds = Some(s);
                }
                let o = execute(&c, Some(alg), Some(spec.max_iters))?;
                Ok((alg, o.report))
            })
            .collect()
    });
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(tabulate(&spec, &results))
}

fn tabulate(spec: &BenchSpec, results: &[(Algorithm, SolveReport)]) -> Vec<BenchCell> {
    let mut cells = Vec::new();
    for &alg in &spec.algorithms {
        for &tol in &spec.tolerances {
            let hits: Vec<Option<(usize, f64)>> = results
                .iter()
                .filter(|(a, _)| *a == alg)
                .map(|(_, r)| first_hit(r, tol).filter(|(it, _)| *it <= spec.max_iters))
                .collect();
            let reached = hits.iter().filter(|h| h.is_some()).count();
            let (mi, ms) = if reached == hits.len() && reached > 0 {
                let n = reached as f64;
                (
                    hits.iter().flatten().map(|h| h.0 as f64).sum::<f64>() / n,
                    hits.iter().flatten().map(|h| h.1).sum::<f64>() / n,
                )
            } else {
                (f64::NAN, f64::NAN)
            };
            cells.push(BenchCell { algorithm: alg, tol, mean_iters: mi, mean_seconds: ms, reached, repeats: hits.len() });
        }
    }
    cells
}

pub fn render(cells: &[BenchCell]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<10} {:>8} {:>12} {:>12} {:>8}", "algorithm", "tol", "mean_iters", "mean_secs", "reached");
    for c in cells {
        let _ = writeln!(
            s,
            "{:<10} {:>8.0e} {:>12.1} {:>12.4} {:>5}/{}",
            c.algorithm.name(),
            c.tol,
            c.mean_iters,
            c.mean_seconds,
            c.reached,
            c.repeats
        );
    }
    s
}

pub fn write_bench(dir: &Path, cells: &[BenchCell]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(e.to_string()))?;
    let mut w = csv::Writer::from_path(dir.join("bench.csv")).map_err(|e| CliError::Io(e.to_string()))?;
    w.write_record(["algorithm", "tol", "mean_iters", "mean_seconds", "reached", "repeats"])
        .map_err(|e| CliError::Io(e.to_string()))?;
    for c in cells {
        w.write_record([
            c.algorithm.name().to_string(),
            c.tol.to_string(),
            c.mean_iters.to_string(),
            c.mean_seconds.to_string(),
            c.reached.to_string(),
            c.repeats.to_string(),
        ])
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}
