//! Running one configured solve and writing its artifacts.

use std::fs;
use std::path::Path;

use serde::Serialize;

use warpd_core::linops::LinearOp;
use warpd_core::problems::{io::write_pgm, mixed_operator, relative_error, Family};
use warpd_core::report::{SolveReport, TraceRow, TRACE_COLUMNS};
use warpd_core::restart::{plain_pd_baseline, solve, SolveOptions};
use warpd_core::vector::{dist, norm2, sub, C64};

use crate::config::{normalized_weights, Algorithm, Built, ExperimentConfig, Resolved};
use crate::CliError;

pub struct Outcome {
    pub x: Vec<C64>,
    pub report: SolveReport,
    pub built: Built,
    pub resolved: Resolved,
}

/// Builds the instance and runs the configured algorithm.
pub fn execute(cfg: &ExperimentConfig, algorithm: Option<Algorithm>, max_iters: Option<usize>) -> Result<Outcome, CliError> {
    let built = cfg.instance.build()?;
    let mut spec = cfg.solver.clone();
    if let Some(a) = algorithm {
        spec.algorithm = a;
    }
    let mut resolved = spec.resolve(&cfg.instance, &built.inst)?;
    if let Some(cap) = max_iters {
        resolved.baseline.total_iters = cap;
        if resolved.algorithm != Algorithm::Pd {
            let k = warpd_core::restart::make_schedule(&resolved.warpd, norm2(&built.inst.b), built.inst.q())
                .map_err(|e| CliError::Config(e.to_string()))?
                .k;
            resolved.warpd.n_restarts = cap.div_ceil(k).max(1);
        }
    }
    let (x, report) = run_solver(cfg, &built, &resolved, &spec)?;
    Ok(Outcome { x, report, built, resolved })
}

fn run_solver(
    cfg: &ExperimentConfig,
    built: &Built,
    resolved: &Resolved,
    spec: &crate::config::SolverSpec,
) -> Result<(Vec<C64>, SolveReport), CliError> {
    let inst = &built.inst;
    let solver_err = CliError::Solver;
    let mut opts = SolveOptions {
        truth: inst.truth.as_deref(),
        trace_stride: cfg.trace_stride,
        max_seconds: cfg.max_seconds,
        ..Default::default()
    };
    if let Some(r) = spec.initial_rank {
        opts.initial_rank = r;
    }
    if resolved.algorithm == Algorithm::Pd {
        let out = plain_pd_baseline(&inst.b, &inst.a, inst.b_op.as_ref(), &inst.j, &resolved.baseline, opts);
        return out.map_err(solver_err);
    }
    let mut hook = match (&built.reweighting, spec.reweight) {
        (Some((frame, groups, shape, tv_weight)), true) => {
            let (frame, groups, shape, tv_weight) = (frame.clone(), groups.clone(), *shape, *tv_weight);
            Some(move |x: &[C64]| -> warpd_core::Result<Option<LinearOp>> {
                let w = normalized_weights(x, &frame, &groups)?;
                Ok(Some(mixed_operator(&frame, &w, tv_weight, shape)?))
            })
        }
        _ => None,
    };
    if let Some(h) = hook.as_mut() {
        opts.reweight = Some(h);
    }
    solve(&resolved.warpd, &inst.b, &inst.a, inst.b_op.as_ref(), &inst.j, opts).map_err(solver_err)
}

// ------------------------------------------------------------------ trace CSV

/// Writes the trace with the fixed header; absent optional columns are empty fields.
pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(io_err)?;
    w.write_record(TRACE_COLUMNS).map_err(io_err)?;
    for r in rows {
        w.serialize(r).map_err(io_err)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>, CliError> {
    let mut rd = csv::Reader::from_path(path).map_err(io_err)?;
    let header: Vec<String> = rd.headers().map_err(io_err)?.iter().map(str::to_string).collect();
    if header != TRACE_COLUMNS {
        return Err(CliError::Io(format!("unexpected trace header {header:?}")));
    }
    rd.deserialize().collect::<Result<Vec<TraceRow>, _>>().map_err(io_err)
}

fn io_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

// ------------------------------------------------------------------ summary

#[derive(Serialize)]
pub struct InstanceSummary {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    pub q: usize,
    pub noise_level: f64,
    pub noise_norm: f64,
    pub b_norm: f64,
}

#[derive(Serialize)]
pub struct FinalSummary {
    pub objective: f64,
    pub residual: f64,
    pub feasibility_gap: f64,
    pub error_to_truth: Option<f64>,
    pub rel_error_to_truth: Option<f64>,
    pub total_inner_iters: usize,
    pub prox_calls: usize,
    pub wall_seconds: f64,
}

#[derive(Serialize)]
pub struct Summary<'a> {
    pub config: &'a ExperimentConfig,
    pub resolved: &'a Resolved,
    pub instance: InstanceSummary,
    #[serde(rename = "final")]
    pub fin: FinalSummary,
    pub report: ReportNoRows<'a>,
}

/// The report without its trace rows, which live in `trace.csv`.
#[derive(Serialize)]
pub struct ReportNoRows<'a> {
    pub algorithm: &'a str,
    pub restarts: &'a [warpd_core::report::RestartRecord],
    pub schedule: &'a Option<warpd_core::restart::Schedule>,
    pub lambda: Option<f64>,
    pub environment: &'a warpd_core::report::EnvStamp,
    pub notes: &'a [String],
}

pub fn summarize<'a>(cfg: &'a ExperimentConfig, o: &'a Outcome) -> Result<Summary<'a>, CliError> {
    let inst = &o.built.inst;
    let solver_err = CliError::Solver;
    let residual = norm2(&sub(&inst.a.apply(&o.x).map_err(solver_err)?, &inst.b));
    let objective = warpd_core::pd_inner::objective(&o.x, inst.b_op.as_ref(), &inst.j).map_err(CliError::Solver)?;
    let (err, rel) = match &inst.truth {
        Some(t) => (Some(dist(&o.x, t)), Some(relative_error(&o.x, t).map_err(CliError::Solver)?)),
        None => (None, None),
    };
    Ok(Summary {
        config: cfg,
        resolved: &o.resolved,
        instance: InstanceSummary {
            family: inst.family,
            n: inst.n(),
            m: inst.a.n_out(),
            q: inst.q(),
            noise_level: inst.noise_level,
            noise_norm: inst.noise_norm,
            b_norm: norm2(&inst.b),
        },
        fin: FinalSummary {
            objective,
            residual,
            feasibility_gap: residual - o.resolved.warpd.epsilon,
            error_to_truth: err,
            rel_error_to_truth: rel,
            total_inner_iters: o.report.total_inner_iters,
            prox_calls: o.report.prox_calls,
            wall_seconds: o.report.rows.last().map_or(0.0, |r| r.wall_seconds),
        },
        report: ReportNoRows {
            algorithm: &o.report.algorithm,
            restarts: &o.report.restarts,
            schedule: &o.report.schedule,
            lambda: o.report.lambda,
            environment: &o.report.environment,
            notes: &o.report.notes,
        },
    })
}

/// Writes `trace.csv`, `summary.json` and, for image unknowns, `recon.pgm` into `dir`.
pub fn write_artifacts(dir: &Path, cfg: &ExperimentConfig, o: &Outcome) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    write_trace(&dir.join("trace.csv"), &o.report.rows)?;
    let summary = summarize(cfg, o)?;
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(dir.join("summary.json"), json + "\n").map_err(|e| CliError::Io(e.to_string()))?;
    if cfg.output.recon_pgm {
        if let Some(shape) = o.built.inst.shape.filter(|s| s.cols > 1) {
            if matches!(o.built.inst.family, Family::Tv | Family::MixedAnalysisTv) {
                let vals: Vec<f64> = o.x.iter().map(|v| v.re).collect();
                write_pgm(&dir.join("recon.pgm"), shape, &vals).map_err(|e| CliError::Io(e.to_string()))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(i: usize, opt: bool) -> TraceRow {
        TraceRow {
            restart_index: i,
            inner_iter_cumulative: 17 * i,
            objective: 1.0 / (i as f64 + 3.0),
            feasibility_gap: -2.5e-17 * i as f64,
            gap_g_eta: opt.then_some(0.1 + i as f64),
            error_metric: None,
            rel_l2_error_to_truth: opt.then_some(std::f64::consts::PI.powi(-(i as i32))),
            wall_seconds: 1e-3 * i as f64,
        }
    }

    #[test]
    fn trace_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("trace.csv");
        let rows: Vec<TraceRow> = (0..7).map(|i| row(i, i % 2 == 0)).collect();
        write_trace(&p, &rows).unwrap();
        assert_eq!(read_trace(&p).unwrap(), rows);
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().next().unwrap(), TRACE_COLUMNS.join(","));
    }
}
