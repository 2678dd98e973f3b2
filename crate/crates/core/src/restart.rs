//! Restart drivers: WARPd (constrained) and WARPdSR (square-root), their
//! ε/k/β schedules, and a plain non-restarted primal-dual baseline.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linops::LinearOp;
use crate::pd_inner::{inner_it, inner_it_sr, objective, InnerOptions, IterView};
use crate::problems::metrics::objective_error;
use crate::prox::{ProxState, Regularizer, RegularizerKind};
use crate::partial_svd::RankState;
use crate::report::{RestartRecord, SolveReport, TraceRow};
use crate::vector::{dist, is_finite, norm2, scaled, sub, C64};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Warpd,
    Warpdsr,
}

fn default_tau() -> f64 {
    0.99
}

fn default_upsilon() -> f64 {
    (-1.0f64).exp()
}

fn default_true() -> bool {
    true
}

/// Scalars of the restart schemes. For the square-root variant `c1`, `c2` are Ĉ₁, Ĉ₂
/// and `epsilon` is only used for reporting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpdConfig {
    pub c1: f64,
    pub c2: f64,
    /// Upper bound for √(‖A‖² + ‖B‖²).
    pub l: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_upsilon")]
    pub upsilon: f64,
    pub delta: f64,
    #[serde(default)]
    pub epsilon: f64,
    pub n_restarts: usize,
    #[serde(default = "default_true")]
    pub ergodic: bool,
    #[serde(default)]
    pub warm_start_duals: bool,
    #[serde(default)]
    pub variant: Variant,
}

impl WarpdConfig {
    pub fn new(c1: f64, c2: f64, l: f64, delta: f64, epsilon: f64, n_restarts: usize) -> Self {
        WarpdConfig {
            c1,
            c2,
            l,
            tau: default_tau(),
            upsilon: default_upsilon(),
            delta,
            epsilon,
            n_restarts,
            ergodic: true,
            warm_start_duals: false,
            variant: Variant::Warpd,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what} = {v} out of range")));
        if !(self.c1 > 0.0 && self.c1.is_finite()) {
            return bad("C1", self.c1);
        }
        if !(self.c2 > 0.0 && self.c2.is_finite()) {
            return bad("C2", self.c2);
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return bad("L", self.l);
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad("tau", self.tau);
        }
        if !(self.upsilon > 0.0 && self.upsilon < 1.0) {
            return bad("upsilon", self.upsilon);
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad("delta", self.delta);
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon", self.epsilon);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// ε₀ … ε_{n−1}.
    pub eps_seq: Vec<f64>,
    pub k: usize,
    /// β₁ … β_n.
    pub beta_seq: Vec<f64>,
}

/// ε/k/β schedule for `q` rows of B. Only k is rounded.
pub fn make_schedule(cfg: &WarpdConfig, b_norm: f64, q: usize) -> Result<Schedule> {
    cfg.validate()?;
    let qf = q as f64;
    let root = (cfg.c2 * cfg.c2 + qf).sqrt();
    let n = cfg.n_restarts;
    let mut eps_seq = Vec::with_capacity(n);
    let mut e = cfg.c2 * b_norm;
    for _ in 0..n {
        eps_seq.push(e);
        e = cfg.upsilon * (cfg.delta + e);
    }
    let (kf, denom) = match cfg.variant {
        Variant::Warpd => (2.0 * cfg.l * cfg.c1 * root / (cfg.upsilon * cfg.tau), root),
        Variant::Warpdsr => (
            4.0 * cfg.l * cfg.c1 * root / (cfg.upsilon * cfg.tau),
            2.0 * (1.0 + qf / (cfg.c2 * cfg.c2)).sqrt(),
        ),
    };
    if !kf.is_finite() || kf > 1e12 {
        return Err(Error::InvalidParameter(format!("inner iteration count {kf} is not representable")));
    }
    let beta_seq = eps_seq.iter().map(|e| cfg.c1 * (cfg.delta + e) / denom).collect();
    Ok(Schedule {
        eps_seq,
        k: kf.ceil().max(1.0) as usize,
        beta_seq,
    })
}

/// Hook called after every restart with the current reconstruction; may return a new B.
pub type Reweight<'a> = dyn FnMut(&[C64]) -> Result<Option<LinearOp>> + 'a;

pub struct SolveOptions<'a> {
    /// Ground truth ϰ for error-to-truth and G_η columns.
    pub truth: Option<&'a [C64]>,
    /// Reference minimizer x* for the relative objective error metric.
    pub optimum: Option<&'a [C64]>,
    /// Extra rows every `trace_stride` inner iterations (0 = restart rows only).
    pub trace_stride: usize,
    pub max_seconds: Option<f64>,
    pub reweight: Option<&'a mut Reweight<'a>>,
    /// Initial predicted rank for the Lanczos nuclear prox.
    pub initial_rank: usize,
    /// Overrides the derived Lanczos tolerance.
    pub svd_tol: Option<f64>,
    /// Starting point φ₀ (zero when absent).
    pub initial: Option<&'a [C64]>,
}

impl Default for SolveOptions<'_> {
    fn default() -> Self {
        SolveOptions {
            truth: None,
            optimum: None,
            trace_stride: 0,
            max_seconds: None,
            reweight: None,
            initial_rank: 5,
            svd_tol: None,
            initial: None,
        }
    }
}

/// Evaluates trace quantities of a full-scale iterate.
struct Metrics<'a> {
    a: &'a LinearOp,
    b: &'a [C64],
    j: &'a Regularizer,
    c2: f64,
    epsilon: f64,
    truth: Option<&'a [C64]>,
    optimum: Option<&'a [C64]>,
    j_truth: Option<f64>,
    j_opt: Option<f64>,
}

struct Eval {
    objective: f64,
    feasibility_gap: f64,
    gap: Option<f64>,
    metric: Option<f64>,
    err: Option<f64>,
    rel: Option<f64>,
}

impl<'a> Metrics<'a> {
    fn new(
        a: &'a LinearOp,
        b: &'a [C64],
        j: &'a Regularizer,
        b_op: Option<&LinearOp>,
        c2: f64,
        epsilon: f64,
        truth: Option<&'a [C64]>,
        optimum: Option<&'a [C64]>,
    ) -> Result<Self> {
        if let Some(t) = truth {
            check_len(a.n_in(), t.len())?;
        }
        if let Some(o) = optimum {
            check_len(a.n_in(), o.len())?;
        }
        let mut m = Metrics {
            a,
            b,
            j,
            c2,
            epsilon,
            truth,
            optimum,
            j_truth: None,
            j_opt: None,
        };
        m.refresh(b_op)?;
        Ok(m)
    }

    fn refresh(&mut self, b_op: Option<&LinearOp>) -> Result<()> {
        self.j_truth = self.truth.map(|t| objective(t, b_op, self.j)).transpose()?;
        self.j_opt = self.optimum.map(|o| objective(o, b_op, self.j)).transpose()?;
        Ok(())
    }

    fn eval(&self, x: &[C64], b_op: Option<&LinearOp>) -> Result<Eval> {
        let obj = objective(x, b_op, self.j)?;
        let res = norm2(&sub(&self.a.apply(x)?, self.b));
        let feas = res - self.epsilon;
        let err = self.truth.map(|t| dist(x, t));
        Ok(Eval {
            objective: obj,
            feasibility_gap: feas,
            gap: self.j_truth.map(|jt| obj - jt + self.c2 * feas),
            metric: self.j_opt.map(|jo| objective_error(obj, jo, res, self.epsilon, self.c2)),
            err,
            rel: self.truth.map(|t| {
                let nt = norm2(t);
                let e = err.unwrap_or(0.0);
                if nt > 0.0 {
                    e / nt
                } else {
                    e
                }
            }),
        })
    }
}

fn row(restart: usize, cumulative: usize, e: &Eval, wall: f64) -> TraceRow {
    TraceRow {
        restart_index: restart,
        inner_iter_cumulative: cumulative,
        objective: e.objective,
        feasibility_gap: e.feasibility_gap,
        gap_g_eta: e.gap,
        error_metric: e.metric,
        rel_l2_error_to_truth: e.rel,
        wall_seconds: wall,
    }
}

fn derived_svd_tol(cfg: &WarpdConfig, q: usize, j: &Regularizer, b_norm: f64, beta: f64) -> f64 {
    let root = (cfg.c2 * cfg.c2 + q as f64).sqrt();
    let rel = cfg.delta / (cfg.l * cfg.c1 * root * (j.unit_bound() + cfg.c2 * cfg.l));
    let scale = (b_norm / beta).max(f64::MIN_POSITIVE);
    (rel / scale).clamp(1e-14, 1e-6)
}

/// WARPd (constrained) or WARPdSR (square-root), selected by `cfg.variant`.
pub fn solve(
    cfg: &WarpdConfig,
    b: &[C64],
    a: &LinearOp,
    b_op: Option<&LinearOp>,
    j: &Regularizer,
    mut opts: SolveOptions<'_>,
) -> Result<(Vec<C64>, SolveReport)> {
    let start = Instant::now();
    check_len(a.n_out(), b.len())?;
    let q = b_op.map(|o| o.n_out()).unwrap_or(0);
    let b_norm = norm2(b);
    let sched = make_schedule(cfg, b_norm, q)?;
    let sr = cfg.variant == Variant::Warpdsr;
    let step = cfg.tau / cfg.l;
    let mut report = SolveReport {
        algorithm: if sr { "warpd_sr" } else { "warpd" }.to_string(),
        config: Some(cfg.clone()),
        schedule: Some(sched.clone()),
        lambda: sr.then(|| 1.0 / cfg.c2),
        q,
        b_norm,
        ..Default::default()
    };
    if sr && cfg.warm_start_duals {
        report.notes.push("square-root variant always threads duals between restarts".into());
    }
    let mut cur_b: Option<LinearOp> = b_op.cloned();
    let mut metrics = Metrics::new(a, b, j, cur_b.as_ref(), cfg.c2, cfg.epsilon, opts.truth, opts.optimum)?;
    let mut state = ProxState {
        rank: RankState::new(opts.initial_rank),
        ..Default::default()
    };
    let nuclear = matches!(j.kind(), RegularizerKind::Nuclear { .. });
    let mut phi = match opts.initial {
        Some(x0) => {
            check_len(a.n_in(), x0.len())?;
            x0.to_vec()
        }
        None => vec![C64::new(0.0, 0.0); a.n_in()],
    };
    let mut z1: Option<Vec<C64>> = None;
    let mut z2: Option<Vec<C64>> = None;
    let mut cumulative = 0usize;

    for jr in 1..=cfg.n_restarts {
        let beta = sched.beta_seq[jr - 1];
        if !(beta >= 1e-300) {
            report.notes.push(format!("restart scale underflow at restart {jr}"));
            return Err(Error::Underflow {
                restart: jr,
                report: Box::new(report),
            });
        }
        state.svd.tol = opts
            .svd_tol
            .unwrap_or_else(|| derived_svd_tol(cfg, q, j, b_norm, beta));
        let bs = scaled(b, 1.0 / beta);
        let x0 = scaled(&phi, 1.0 / beta);
        let mut inner_rows: Vec<TraceRow> = Vec::new();
        let mut inner_err: Option<Error> = None;
        let stride = opts.trace_stride;
        let k = sched.k;
        let ergodic = cfg.ergodic;
        let base = cumulative;
        let mut observer = |v: &IterView<'_>| {
            if stride == 0 || v.iter % stride != 0 || v.iter == k || inner_err.is_some() {
                return;
            }
            let xo = if ergodic { v.ergodic } else { v.x };
            match metrics.eval(&scaled(xo, beta), cur_b.as_ref()) {
                Ok(e) => inner_rows.push(row(jr, base + v.iter, &e, start.elapsed().as_secs_f64())),
                Err(e) => inner_err = Some(e),
            }
        };
        let inner_opts = InnerOptions {
            ergodic,
            z1_init: z1.as_deref(),
            z2_init: z2.as_deref(),
            beta,
            trace_stride: 0,
            observer: Some(&mut observer),
        };
        let out = if sr {
            inner_it_sr(&bs, &x0, a, cur_b.as_ref(), k, step, step, 1.0 / cfg.c2, j, &mut state, inner_opts)?
        } else {
            inner_it(&bs, &x0, a, cur_b.as_ref(), k, step, step, cfg.epsilon / beta, j, &mut state, inner_opts)?
        };
        if let Some(e) = inner_err {
            return Err(e);
        }
        cumulative += k;
        phi = scaled(&out.x_out, beta);
        if sr {
            z1 = Some(out.z1_avg);
            z2 = Some(out.z2_avg);
        } else if cfg.warm_start_duals {
            z1 = Some(out.z1);
            z2 = Some(out.z2);
        }
        report.rows.extend(inner_rows);
        if !is_finite(&phi) {
            report.total_inner_iters = cumulative;
            report.prox_calls = state.calls;
            return Err(Error::NonFinite {
                restart: jr,
                report: Box::new(report),
            });
        }
        let e = metrics.eval(&phi, cur_b.as_ref())?;
        let wall = start.elapsed().as_secs_f64();
        report.rows.push(row(jr, cumulative, &e, wall));
        let bound = (opts.truth.is_some() && (sr || !cfg.warm_start_duals)).then(|| {
            cfg.c1 * (cfg.delta / (1.0 - cfg.upsilon) + cfg.upsilon.powi(jr as i32) * cfg.c2 * b_norm)
        });
        report.restarts.push(RestartRecord {
            index: jr,
            k,
            beta,
            eps_prev: sched.eps_seq[jr - 1],
            inner_iter_cumulative: cumulative,
            objective: e.objective,
            feasibility_gap: e.feasibility_gap,
            gap_g_eta: e.gap,
            error_metric: e.metric,
            error_to_truth: e.err,
            rel_l2_error_to_truth: e.rel,
            theoretical_bound: bound,
            svd_tol: nuclear.then_some(state.svd.tol),
            r_prime: nuclear.then_some(state.rank.r_prime),
            prox_calls: state.calls,
            wall_seconds: wall,
        });
        if let Some(hook) = opts.reweight.as_mut() {
            if let Some(nb) = hook(&phi)? {
                check_len(a.n_in(), nb.n_in())?;
                check_len(q, nb.n_out())?;
                cur_b = Some(nb);
                metrics.refresh(cur_b.as_ref())?;
            }
        }
        if let Some(cap) = opts.max_seconds {
            if wall > cap && jr < cfg.n_restarts {
                report.notes.push(format!("time cap {cap}s reached after restart {jr}"));
                break;
            }
        }
    }
    report.total_inner_iters = cumulative;
    report.prox_calls = state.calls;
    Ok((phi, report))
}

/// Algorithm with the constrained inner loop; `cfg.variant` must be `warpd`.
pub fn warpd(
    cfg: &WarpdConfig,
    b: &[C64],
    a: &LinearOp,
    b_op: Option<&LinearOp>,
    j: &Regularizer,
    opts: SolveOptions<'_>,
) -> Result<(Vec<C64>, SolveReport)> {
    if cfg.variant != Variant::Warpd {
        return Err(Error::InvalidParameter("warpd called with a square-root config".into()));
    }
    solve(cfg, b, a, b_op, j, opts)
}

/// Noise-blind square-root variant with λ = 1/Ĉ₂; `cfg.variant` must be `warpdsr`.
pub fn warpd_sr(
    cfg: &WarpdConfig,
    b: &[C64],
    a: &LinearOp,
    b_op: Option<&LinearOp>,
    j: &Regularizer,
    opts: SolveOptions<'_>,
) -> Result<(Vec<C64>, SolveReport)> {
    if cfg.variant != Variant::Warpdsr {
        return Err(Error::InvalidParameter("warpd_sr called with a constrained config".into()));
    }
    solve(cfg, b, a, b_op, j, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    pub total_iters: usize,
    #[serde(default)]
    pub epsilon: f64,
    pub l: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_true")]
    pub ergodic: bool,
    /// Feasibility weight of the G_η and error-metric columns.
    #[serde(default = "one_f64")]
    pub c2: f64,
}

fn one_f64() -> f64 {
    1.0
}

/// Non-restarted primal-dual: one inner call of `total_iters` updates with τ/L steps.
/// The trace has a row every `opts.trace_stride` updates (10 when zero) and at the end.
pub fn plain_pd_baseline(
    b: &[C64],
    a: &LinearOp,
    b_op: Option<&LinearOp>,
    j: &Regularizer,
    cfg: &BaselineConfig,
    opts: SolveOptions<'_>,
) -> Result<(Vec<C64>, SolveReport)> {
    let start = Instant::now();
    if !(cfg.l > 0.0 && cfg.tau > 0.0 && cfg.tau < 1.0) {
        return Err(Error::InvalidParameter("baseline needs L > 0 and tau in (0,1)".into()));
    }
    let metrics = Metrics::new(a, b, j, b_op, cfg.c2, cfg.epsilon, opts.truth, opts.optimum)?;
    let stride = if opts.trace_stride == 0 { 10 } else { opts.trace_stride };
    let mut state = ProxState {
        rank: RankState::new(opts.initial_rank),
        ..Default::default()
    };
    if let Some(t) = opts.svd_tol {
        state.svd.tol = t;
    }
    let total = cfg.total_iters;
    let mut rows = Vec::new();
    let mut err: Option<Error> = None;
    let mut stopped = false;
    let cap = opts.max_seconds;
    let mut observer = |v: &IterView<'_>| {
        if err.is_some() || stopped {
            return;
        }
        if v.iter % stride == 0 || v.iter == total {
            let xo = if cfg.ergodic { v.ergodic } else { v.x };
            match metrics.eval(xo, b_op) {
                Ok(e) => rows.push(row(0, v.iter, &e, start.elapsed().as_secs_f64())),
                Err(e) => err = Some(e),
            }
            if cap.is_some_and(|c| start.elapsed().as_secs_f64() > c) {
                stopped = true;
            }
        }
    };
    let x0 = match opts.initial {
        Some(x0) => {
            check_len(a.n_in(), x0.len())?;
            x0.to_vec()
        }
        None => vec![C64::new(0.0, 0.0); a.n_in()],
    };
    let step = cfg.tau / cfg.l;
    let out = inner_it(
        b,
        &x0,
        a,
        b_op,
        total,
        step,
        step,
        cfg.epsilon,
        j,
        &mut state,
        InnerOptions {
            ergodic: cfg.ergodic,
            trace_stride: 0,
            observer: Some(&mut observer),
            ..Default::default()
        },
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    let mut report = SolveReport {
        algorithm: "pd".into(),
        rows,
        q: b_op.map(|o| o.n_out()).unwrap_or(0),
        b_norm: norm2(b),
        total_inner_iters: total,
        prox_calls: state.calls,
        ..Default::default()
    };
    if stopped {
        report.notes.push("time cap reached; later rows were not evaluated".into());
    }
    Ok((out.x_out, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn schedule_examples() {
        let e = (-1.0f64).exp();
        let mut cfg = WarpdConfig::new(10.0, 1.0, 1.0, 0.01, 0.0, 3);
        cfg.tau = 1.0 - 1e-16;
        cfg.upsilon = e;
        // tau = 1 is outside (0,1); evaluate the formula at the boundary via a tiny offset
        let s = make_schedule(&cfg, 1.0, 0).unwrap();
        assert_eq!(s.k, 55);
        assert!((s.eps_seq[1] - e * 1.01).abs() < 1e-12);
        assert!((s.beta_seq[0] - 10.1).abs() < 1e-12);
        cfg.variant = Variant::Warpdsr;
        let s = make_schedule(&cfg, 1.0, 0).unwrap();
        assert_eq!(s.k, 109);
        assert!((s.beta_seq[0] - 5.05).abs() < 1e-12);
    }

    #[test]
    fn trivial_fixed_point() {
        let a = LinearOp::identity(1);
        let j = Regularizer::zero(1);
        let one = [r(1.0)];
        for variant in [Variant::Warpd, Variant::Warpdsr] {
            for n in [1, 2, 5] {
                let mut cfg = WarpdConfig::new(1.0, 1.0, 1.0, 1e-3, 0.0, n);
                cfg.variant = variant;
                let opts = SolveOptions {
                    initial: Some(&one),
                    ..Default::default()
                };
                let (x, _) = solve(&cfg, &one, &a, None, &j, opts).unwrap();
                assert!((x[0] - r(1.0)).norm() < 1e-15, "{variant:?} n={n}: {}", x[0]);
                // from zero, the error obeys the restart bound and tends to zero
                let opts = SolveOptions {
                    truth: Some(&one),
                    ..Default::default()
                };
                let (x, rep) = solve(&cfg, &one, &a, None, &j, opts).unwrap();
                assert_eq!(rep.restarts.len(), n);
                if variant == Variant::Warpd {
                    let last = rep.restarts.last().unwrap();
                    assert!(last.error_to_truth.unwrap() <= last.theoretical_bound.unwrap());
                }
                assert!((x[0] - r(1.0)).norm() < 0.5f64.powi(n as i32), "{variant:?} n={n}: {}", x[0]);
            }
        }
        let cfg = WarpdConfig::new(1.0, 1.0, 1.0, 1e-12, 0.0, 30);
        let (x, _) = warpd(&cfg, &one, &a, None, &j, SolveOptions::default()).unwrap();
        assert!((x[0] - r(1.0)).norm() < 1e-10);
    }

    #[test]
    fn zero_restarts_return_zero() {
        let a = LinearOp::identity(2);
        let j = Regularizer::zero(2);
        let cfg = WarpdConfig::new(1.0, 1.0, 1.0, 1e-3, 0.0, 0);
        let (x, rep) = warpd(&cfg, &[r(1.0), r(2.0)], &a, None, &j, SolveOptions::default()).unwrap();
        assert_eq!(x, vec![r(0.0); 2]);
        assert!(rep.rows.is_empty());
    }

    #[test]
    fn lambda_is_reported() {
        let a = LinearOp::identity(1);
        let j = Regularizer::zero(1);
        let mut cfg = WarpdConfig::new(1.0, 4.0, 1.0, 1e-3, 0.0, 1);
        cfg.variant = Variant::Warpdsr;
        let (_, rep) = warpd_sr(&cfg, &[r(1.0)], &a, None, &j, SolveOptions::default()).unwrap();
        assert_eq!(rep.lambda, Some(0.25));
        assert!(warpd(&cfg, &[r(1.0)], &a, None, &j, SolveOptions::default()).is_err());
    }

    #[test]
    fn baseline_trace_length() {
        let a = LinearOp::identity(2);
        let j = Regularizer::zero(2);
        let cfg = BaselineConfig {
            total_iters: 25,
            epsilon: 0.0,
            l: 1.0,
            tau: 0.9,
            ergodic: true,
            c2: 1.0,
        };
        let opts = SolveOptions {
            trace_stride: 10,
            ..Default::default()
        };
        let (x, rep) = plain_pd_baseline(&[r(0.0); 2], &a, None, &j, &cfg, opts).unwrap();
        assert_eq!(rep.rows.len(), 3);
        assert_eq!(x, vec![r(0.0); 2]);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = WarpdConfig::new(1.0, 1.0, 1.0, 0.0, 0.0, 1);
        assert!(make_schedule(&cfg, 1.0, 0).is_err());
        cfg.delta = 1.0;
        cfg.upsilon = 1.0;
        assert!(make_schedule(&cfg, 1.0, 0).is_err());
    }
}
