//! Experiment runner: JSON configs in; `trace.csv`, `summary.json` and `recon.pgm` out.

pub mod bench;
pub mod config;
pub mod run;

use std::path::{Path, PathBuf};

use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(#[from] warpd_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) | CliError::Io(_) => 3,
        }
    }
}

/// Command-line overrides applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trace_stride: Option<usize>,
    pub max_seconds: Option<f64>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
        if let Some(s) = self.seed {
            cfg.instance.set_seed(s);
        }
        if let Some(t) = self.trace_stride {
            cfg.trace_stride = t;
        }
        if let Some(m) = self.max_seconds {
            cfg.max_seconds = Some(m);
        }
        if let Some(o) = &self.out {
            cfg.output.dir = o.clone();
        }
        cfg.validate()
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

/// Runs one solve and writes its artifacts; returns the output directory.
pub fn cmd_solve_config(mut cfg: ExperimentConfig, ov: &Overrides) -> Result<PathBuf, CliError> {
    ov.apply(&mut cfg)?;
    let outcome = run::execute(&cfg, None, None)?;
    run::write_artifacts(&cfg.output.dir, &cfg, &outcome)?;
    Ok(cfg.output.dir.clone())
}

pub fn cmd_bench_config(mut cfg: ExperimentConfig, ov: &Overrides, threads: Option<usize>) -> Result<String, CliError> {
    ov.apply(&mut cfg)?;
    let cells = bench::run_bench(&cfg, threads)?;
    bench::write_bench(&cfg.output.dir, &cells)?;
    Ok(bench::render(&cells))
}

/// Canned configs, one per demo family.
pub const DEMOS: [(&str, &str); 7] = [
    ("trivial", include_str!("../configs/trivial.json")),
    ("sparse", include_str!("../configs/sparse.json")),
    ("sparse-gaussian", include_str!("../configs/sparse-gaussian.json")),
    ("matrix-completion", include_str!("../configs/matrix-completion.json")),
    ("pauli", include_str!("../configs/pauli.json")),
    ("tv", include_str!("../configs/tv.json")),
    ("mixed", include_str!("../configs/mixed.json")),
];

pub fn demo_config(family: &str) -> Result<ExperimentConfig, CliError> {
    let names: Vec<&str> = DEMOS.iter().map(|d| d.0).collect();
    let text = DEMOS
        .iter()
        .find(|d| d.0 == family)
        .map(|d| d.1)
        .ok_or_else(|| CliError::Config(format!("unknown demo family {family:?}; expected one of {names:?}")))?;
    ExperimentConfig::from_json(text)
}

/// `WARPD_THREADS` caps the bench worker pool.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("WARPD_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("WARPD_THREADS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}
