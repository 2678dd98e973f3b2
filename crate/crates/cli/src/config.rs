//! JSON experiment configuration. Every struct rejects unknown fields.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use warpd_core::linops::{dwt_scale_groups, LinearOp, MaskSpec, OpSpec, Shape, WaveletFilter};
use warpd_core::problems::{
    build_lowrank_pauli, build_matrix_completion, build_mixed, build_sparse_cs, build_sparse_gaussian, build_tv,
    io::read_pgm, phantom, reweight_update, Family, GroupIndex, ProblemInstance, Sampling, SparseTruth,
};
use warpd_core::prox::{Constraint, Regularizer, SvdEngine};
use warpd_core::restart::{BaselineConfig, Variant, WarpdConfig};
use warpd_core::sharpness::{
    lowrank_constants, matcomp_constants, matcomp_dual_cert_constants, sparse_levels_constants, tv_constants,
    DualCertParams, NspParams, SparsityPattern,
};
use warpd_core::vector::{norm2, C64};

use crate::CliError;

fn default_stride() -> usize {
    10
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    pub solver: SolverSpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Inner iterations between trace rows; 0 keeps one row per restart.
    #[serde(default = "default_stride")]
    pub trace_stride: usize,
    #[serde(default)]
    pub max_seconds: Option<f64>,
    #[serde(default)]
    pub bench: Option<BenchSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    /// Write `recon.pgm` for image-shaped unknowns.
    #[serde(default = "yes")]
    pub recon_pgm: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_out(), recon_pgm: true }
    }
}

// ------------------------------------------------------------------ instances

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RegSpec {
    Zero,
    L1,
    WeightedL1 { weights: Vec<f64> },
    Nuclear { rows: usize, cols: usize, #[serde(default = "lanczos")] engine: SvdEngine },
}

fn lanczos() -> SvdEngine {
    SvdEngine::Lanczos
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseInstance {
    pub a: OpSpec,
    #[serde(default)]
    pub b_op: Option<OpSpec>,
    pub regularizer: RegSpec,
    #[serde(default)]
    pub constraint: Option<Constraint>,
    /// Real measurements; give either `b` or `truth`.
    #[serde(default)]
    pub b: Option<Vec<f64>>,
    #[serde(default)]
    pub truth: Option<Vec<f64>>,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseGaussianInstance {
    pub m: usize,
    pub n: usize,
    pub s: usize,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

fn db2() -> WaveletFilter {
    WaveletFilter::Db2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseCsInstance {
    pub n: usize,
    pub mask: MaskSpec,
    #[serde(default = "db2")]
    pub wavelet: WaveletFilter,
    pub levels: usize,
    pub s: usize,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PauliInstance {
    pub qubits: usize,
    pub r: usize,
    /// Defaults to ⌈3·r·n·ln n⌉ with n = 2^qubits.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixCompletionInstance {
    pub n1: usize,
    pub n2: usize,
    pub r: usize,
    pub p: f64,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Either a P5 image file or a generated phantom of side `side`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageSource {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub side: Option<usize>,
    #[serde(default)]
    pub phantom_seed: u64,
}

fn three() -> usize {
    3
}

fn one_f() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TvInstance {
    pub image: ImageSource,
    pub mask: MaskSpec,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
    /// Wavelet part of the mixed analysis operator (ignored by plain `tv`).
    #[serde(default = "db2")]
    pub wavelet: WaveletFilter,
    #[serde(default = "three")]
    pub levels: usize,
    #[serde(default = "one_f")]
    pub tv_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum InstanceSpec {
    Dense(DenseInstance),
    SparseGaussian(SparseGaussianInstance),
    SparseFourier(SparseCsInstance),
    SparseWalsh(SparseCsInstance),
    LowrankPauli(PauliInstance),
    MatrixCompletion(MatrixCompletionInstance),
    Tv(TvInstance),
    MixedAnalysisTv(TvInstance),
}

/// A built instance plus what the solver layer needs to know about it.
pub struct Built {
    pub inst: ProblemInstance,
    /// Analysis frame and scale groups driving reweighting (mixed family only).
    pub reweighting: Option<(LinearOp, GroupIndex, Shape, f64)>,
}

fn cfg_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl InstanceSpec {
    pub fn family(&self) -> Family {
        match self {
            InstanceSpec::Dense(_) => Family::Dense,
            InstanceSpec::SparseGaussian(_) => Family::SparseGaussian,
            InstanceSpec::SparseFourier(_) => Family::SparseFourier,
            InstanceSpec::SparseWalsh(_) => Family::SparseWalsh,
            InstanceSpec::LowrankPauli(_) => Family::LowrankPauli,
            InstanceSpec::MatrixCompletion(_) => Family::MatrixCompletion,
            InstanceSpec::Tv(_) => Family::Tv,
            InstanceSpec::MixedAnalysisTv(_) => Family::MixedAnalysisTv,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            InstanceSpec::Dense(d) => d.seed,
            InstanceSpec::SparseGaussian(d) => d.seed,
            InstanceSpec::SparseFourier(d) | InstanceSpec::SparseWalsh(d) => d.seed,
            InstanceSpec::LowrankPauli(d) => d.seed,
            InstanceSpec::MatrixCompletion(d) => d.seed,
            InstanceSpec::Tv(d) | InstanceSpec::MixedAnalysisTv(d) => d.seed,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            InstanceSpec::Dense(d) => d.seed = seed,
            InstanceSpec::SparseGaussian(d) => d.seed = seed,
            InstanceSpec::SparseFourier(d) | InstanceSpec::SparseWalsh(d) => d.seed = seed,
            InstanceSpec::LowrankPauli(d) => d.seed = seed,
            InstanceSpec::MatrixCompletion(d) => d.seed = seed,
            InstanceSpec::Tv(d) | InstanceSpec::MixedAnalysisTv(d) => d.seed = seed,
        }
    }

    pub fn build(&self) -> Result<Built, CliError> {
        let plain = |inst| Built { inst, reweighting: None };
        Ok(match self {
            InstanceSpec::Dense(d) => plain(build_dense(d)?),
            InstanceSpec::SparseGaussian(d) => plain(build_sparse_gaussian(d.m, d.n, d.s, d.noise, d.seed).map_err(cfg_err)?),
            InstanceSpec::SparseFourier(d) | InstanceSpec::SparseWalsh(d) => {
                let (sampling, mask) = if matches!(self, InstanceSpec::SparseFourier(_)) {
                    (Sampling::Fourier, d.mask.build_dft(Shape::line(d.n)))
                } else {
                    (Sampling::Walsh, d.mask.build_wht(d.n))
                };
                let mask = mask.map_err(cfg_err)?;
                plain(
                    build_sparse_cs(d.n, sampling, mask, d.wavelet, d.levels, SparseTruth::Random { s: d.s }, d.noise, d.seed)
                        .map_err(cfg_err)?,
                )
            }
            InstanceSpec::LowrankPauli(d) => {
                let n = 1usize << d.qubits;
                let m = d.m.unwrap_or_else(|| (3.0 * (d.r * n) as f64 * (n as f64).ln()).ceil() as usize);
                plain(build_lowrank_pauli(d.qubits, d.r, m, d.noise, d.seed).map_err(cfg_err)?)
            }
            InstanceSpec::MatrixCompletion(d) => {
                plain(build_matrix_completion(d.n1, d.n2, d.r, d.p, d.noise, d.seed).map_err(cfg_err)?)
            }
            InstanceSpec::Tv(d) => {
                let (shape, img) = load_image(&d.image)?;
                let mask = d.mask.build_dft(shape).map_err(cfg_err)?;
                plain(build_tv(&img, shape, mask, d.noise, d.seed).map_err(cfg_err)?)
            }
            InstanceSpec::MixedAnalysisTv(d) => {
                let (shape, img) = load_image(&d.image)?;
                let mask = d.mask.build_dft(shape).map_err(cfg_err)?;
                let frame = LinearOp::dwt(shape, d.levels, d.wavelet).map_err(cfg_err)?;
                let groups = GroupIndex::from_labels(dwt_scale_groups(shape, d.levels));
                // initial weights from the back-projection A*b, normalized by their maximum
                let probe = build_tv(&img, shape, mask.clone(), d.noise, d.seed).map_err(cfg_err)?;
                let x0 = probe.a.adjoint(&probe.b).map_err(cfg_err)?;
                let w = normalized_weights(&x0, &frame, &groups).map_err(cfg_err)?;
                let inst = build_mixed(&img, shape, mask, &frame, &w, d.tv_weight, d.noise, d.seed).map_err(cfg_err)?;
                Built { inst, reweighting: Some((frame, groups, shape, d.tv_weight)) }
            }
        })
    }
}

/// Reweighting update scaled so the largest weight is one.
pub fn normalized_weights(x: &[C64], frame: &LinearOp, groups: &GroupIndex) -> warpd_core::Result<Vec<f64>> {
    let mut w = reweight_update(x, frame, groups, 1e-5)?;
    let wmax = w.iter().cloned().fold(0.0, f64::max);
    if wmax > 0.0 {
        w.iter_mut().for_each(|v| *v /= wmax);
    }
    Ok(w)
}

fn load_image(src: &ImageSource) -> Result<(Shape, Vec<f64>), CliError> {
    match (&src.path, src.side) {
        (Some(p), None) => read_pgm(p).map_err(cfg_err),
        (None, Some(side)) => Ok((Shape::new(side, side), phantom(side, src.phantom_seed))),
        _ => Err(CliError::Config("image needs exactly one of `path` or `side`".into())),
    }
}

fn build_dense(d: &DenseInstance) -> Result<ProblemInstance, CliError> {
    use rand::SeedableRng;
    let a = d.a.build().map_err(cfg_err)?;
    let b_op = d.b_op.as_ref().map(|s| s.build()).transpose().map_err(cfg_err)?;
    if let Some(bo) = &b_op {
        if bo.n_in() != a.n_in() {
            return Err(CliError::Config(format!("b_op input size {} differs from a's {}", bo.n_in(), a.n_in())));
        }
    }
    let n = a.n_in();
    let j = match &d.regularizer {
        RegSpec::Zero => Regularizer::zero(n),
        RegSpec::L1 => Regularizer::l1(n),
        RegSpec::WeightedL1 { weights } => Regularizer::weighted_l1(weights.clone()).map_err(cfg_err)?,
        RegSpec::Nuclear { rows, cols, engine } => Regularizer::nuclear(*rows, *cols, *engine),
    };
    if j.dim() != n {
        return Err(CliError::Config(format!("regularizer acts on {} entries, operator on {n}", j.dim())));
    }
    let j = match d.constraint {
        Some(c) => j.with_constraint(c).map_err(cfg_err)?,
        None => j,
    };
    let real = |v: &[f64]| v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>();
    let (b, truth, noise_norm) = match (&d.b, &d.truth) {
        (Some(b), None) => {
            if b.len() != a.n_out() {
                return Err(CliError::Config(format!("b has {} entries, operator outputs {}", b.len(), a.n_out())));
            }
            (real(b), None, 0.0)
        }
        (None, Some(t)) => {
            if t.len() != n {
                return Err(CliError::Config(format!("truth has {} entries, operator takes {n}", t.len())));
            }
            let t = real(t);
            let clean = a.apply(&t).map_err(cfg_err)?;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(d.seed);
            let (b, e) = warpd_core::problems::add_noise(&clean, d.noise, false, &mut rng).map_err(cfg_err)?;
            (b, Some(t), e)
        }
        _ => return Err(CliError::Config("dense instance needs exactly one of `b` or `truth`".into())),
    };
    Ok(ProblemInstance {
        family: Family::Dense,
        a,
        b_op,
        j,
        b,
        truth,
        noise_level: d.noise,
        noise_norm,
        shape: None,
    })
}

// ------------------------------------------------------------------ solver

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Warpd,
    WarpdSr,
    Pd,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Warpd => "warpd",
            Algorithm::WarpdSr => "warpd-sr",
            Algorithm::Pd => "pd",
        }
    }
}

fn default_restarts() -> usize {
    20
}

fn default_pd_iters() -> usize {
    2000
}

/// Solver settings. Unset constants fall back to the family's calculator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default)]
    pub c2: Option<f64>,
    /// Null space property parameters for the sparse and low-rank calculators.
    #[serde(default)]
    pub nsp: Option<NspParams>,
    #[serde(default)]
    pub l: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub upsilon: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default = "default_restarts")]
    pub n_restarts: usize,
    /// Iterations of the plain primal-dual baseline.
    #[serde(default = "default_pd_iters")]
    pub total_iters: usize,
    #[serde(default)]
    pub ergodic: Option<bool>,
    #[serde(default)]
    pub warm_start_duals: bool,
    /// Reweight the mixed analysis operator after every restart.
    #[serde(default = "yes")]
    pub reweight: bool,
    #[serde(default)]
    pub initial_rank: Option<usize>,
}

/// Fully resolved solver parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolved {
    pub algorithm: Algorithm,
    pub warpd: WarpdConfig,
    pub baseline: BaselineConfig,
    pub constants_source: String,
}

const DEFAULT_NSP: NspParams = NspParams { rho: 0.5, gamma: 2.0 };

impl SolverSpec {
    pub fn resolve(&self, spec: &InstanceSpec, inst: &ProblemInstance) -> Result<Resolved, CliError> {
        let nsp = self.nsp.unwrap_or(DEFAULT_NSP);
        let (c1, c2, source) = match (self.c1, self.c2) {
            (Some(c1), Some(c2)) => (c1, c2, "configured".to_string()),
            (None, None) => {
                let c = match spec {
                    InstanceSpec::Dense(_) => {
                        return Err(CliError::Config("dense instances need explicit `c1` and `c2`".into()))
                    }
                    InstanceSpec::SparseGaussian(SparseGaussianInstance { n, s, .. })
                    | InstanceSpec::SparseFourier(SparseCsInstance { n, s, .. })
                    | InstanceSpec::SparseWalsh(SparseCsInstance { n, s, .. }) => {
                        sparse_levels_constants(&SparsityPattern::single(*n, *s).map_err(cfg_err)?, nsp)
                    }
                    InstanceSpec::LowrankPauli(p) => lowrank_constants(p.r, nsp),
                    InstanceSpec::MatrixCompletion(m) if self.algorithm == Algorithm::WarpdSr => {
                        // The penalised form needs the global certificate constant: with Ĉ₂ = 1 the
                        // zero matrix beats the truth once ‖M‖_* > ‖b‖. Idealised certificate
                        // z = P_Ω(UV*)/p, so ‖z‖ ≈ √(r/p) and A is bounded below on T by √p.
                        let frac = inst.b.len() as f64 / (m.n1 * m.n2) as f64;
                        matcomp_dual_cert_constants(DualCertParams {
                            alpha1: 0.0,
                            alpha2: 0.5,
                            gamma: frac.sqrt(),
                            z_norm: (m.r as f64 / frac).sqrt(),
                            op_norm: 1.0,
                        })
                    }
                    InstanceSpec::MatrixCompletion(m) => matcomp_constants(m.n1, m.n2, inst.b.len()).map(|v| v.0),
                    InstanceSpec::Tv(_) | InstanceSpec::MixedAnalysisTv(_) => {
                        let truth = inst.truth.as_ref().expect("image instances carry their truth");
                        let grad = LinearOp::periodic_gradient_shape(inst.shape.expect("image shape")).map_err(cfg_err)?;
                        let support = grad.apply(truth).map_err(cfg_err)?.iter().filter(|v| v.norm() > 1e-12).count();
                        tv_constants(support.max(1), inst.n() as f64, 1.0)
                    }
                }
                .map_err(cfg_err)?;
                (c.c1, c.c2, format!("{:?} calculator", spec.family()))
            }
            _ => return Err(CliError::Config("set both `c1` and `c2` or neither".into())),
        };
        let l = match self.l {
            Some(l) => l,
            None => {
                let bn = inst.b_op.as_ref().map_or(0.0, |o| o.norm());
                1.001 * (inst.a.norm().powi(2) + bn * bn).sqrt()
            }
        };
        let epsilon = self.epsilon.unwrap_or(inst.noise_norm);
        let delta = match self.delta {
            Some(d) => d,
            None if epsilon > 0.0 => c2 * epsilon,
            None => 1e-10 * c2 * norm2(&inst.b).max(f64::MIN_POSITIVE),
        };
        let mut w = WarpdConfig::new(c1, c2, l, delta, epsilon, self.n_restarts);
        if let Some(t) = self.tau {
            w.tau = t;
        }
        if let Some(u) = self.upsilon {
            w.upsilon = u;
        }
        if let Some(e) = self.ergodic {
            w.ergodic = e;
        }
        w.warm_start_duals = self.warm_start_duals;
        w.variant = if self.algorithm == Algorithm::WarpdSr { Variant::Warpdsr } else { Variant::Warpd };
        w.validate().map_err(cfg_err)?;
        let baseline = BaselineConfig {
            total_iters: self.total_iters,
            epsilon,
            l,
            tau: w.tau,
            ergodic: w.ergodic,
            c2,
        };
        Ok(Resolved { algorithm: self.algorithm, warpd: w, baseline, constants_source: source })
    }
}

// ------------------------------------------------------------------ bench

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Warpd, Algorithm::WarpdSr, Algorithm::Pd]
}

fn default_tolerances() -> Vec<f64> {
    vec![1e-4, 1e-6]
}

fn five() -> usize {
    5
}

fn default_cap() -> usize {
    6000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_tolerances")]
    pub tolerances: Vec<f64>,
    #[serde(default = "five")]
    pub repeats: usize,
    /// Inner-iteration cap per run; a tolerance not reached within it is NaN.
    #[serde(default = "default_cap")]
    pub max_iters: usize,
    /// Wall-clock cap per run.
    #[serde(default)]
    pub max_seconds: Option<f64>,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            algorithms: default_algorithms(),
            tolerances: default_tolerances(),
            repeats: 5,
            max_iters: default_cap(),
            max_seconds: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(cfg_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(s) = self.max_seconds {
            if !(s > 0.0) {
                return Err(CliError::Config(format!("max_seconds must be positive, got {s}")));
            }
        }
        if let Some(b) = &self.bench {
            if b.repeats == 0 || b.algorithms.is_empty() || b.tolerances.is_empty() {
                return Err(CliError::Config("bench needs at least one repeat, algorithm and tolerance".into()));
            }
            if b.tolerances.iter().any(|t| !(*t > 0.0)) {
                return Err(CliError::Config("bench tolerances must be positive".into()));
            }
        }
        Ok(())
    }
}
