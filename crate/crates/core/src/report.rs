//! Solve reports: per-restart records and the flat trace emitted as CSV.

use serde::{Deserialize, Serialize};

use crate::restart::{Schedule, WarpdConfig};

/// One trace row; column order is the CSV schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub restart_index: usize,
    pub inner_iter_cumulative: usize,
    pub objective: f64,
    pub feasibility_gap: f64,
    pub gap_g_eta: Option<f64>,
    pub error_metric: Option<f64>,
    pub rel_l2_error_to_truth: Option<f64>,
    pub wall_seconds: f64,
}

pub const TRACE_COLUMNS: [&str; 8] = [
    "restart_index",
    "inner_iter_cumulative",
    "objective",
    "feasibility_gap",
    "gap_g_eta",
    "error_metric",
    "rel_l2_error_to_truth",
    "wall_seconds",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub index: usize,
    pub k: usize,
    pub beta: f64,
    /// ε_{j−1} of the schedule.
    pub eps_prev: f64,
    pub inner_iter_cumulative: usize,
    pub objective: f64,
    pub feasibility_gap: f64,
    pub gap_g_eta: Option<f64>,
    pub error_metric: Option<f64>,
    pub error_to_truth: Option<f64>,
    pub rel_l2_error_to_truth: Option<f64>,
    /// C₁(δ/(1−υ) + υʲC₂‖b‖), reported for zero-initialized duals only.
    pub theoretical_bound: Option<f64>,
    pub svd_tol: Option<f64>,
    pub r_prime: Option<usize>,
    pub prox_calls: usize,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvStamp {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
}

impl Default for EnvStamp {
    fn default() -> Self {
        EnvStamp {
            package: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub algorithm: String,
    pub rows: Vec<TraceRow>,
    pub restarts: Vec<RestartRecord>,
    pub config: Option<WarpdConfig>,
    pub schedule: Option<Schedule>,
    pub lambda: Option<f64>,
    pub q: usize,
    pub b_norm: f64,
    pub total_inner_iters: usize,
    pub prox_calls: usize,
    pub environment: EnvStamp,
    pub notes: Vec<String>,
}

impl SolveReport {
    /// First cumulative inner-iteration count at which the relative error to truth is ≤ `tol`.
    pub fn iters_to_rel_error(&self, tol: f64) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.rel_l2_error_to_truth.is_some_and(|e| e <= tol))
            .map(|r| r.inner_iter_cumulative)
    }

    /// Same, on the error metric column.
    pub fn iters_to_error_metric(&self, tol: f64) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.error_metric.is_some_and(|e| e <= tol))
            .map(|r| r.inner_iter_cumulative)
    }
}
