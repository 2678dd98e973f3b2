//! Primal-dual inner iterations for the constrained problem and for its
//! square-root (data-fit in the objective) variant, plus the gap functional.

use crate::error::{check_len, Error, Result};
use crate::linops::LinearOp;
use crate::prox::{clip_linf, project_l2_unit, shrink_l2, ProxState, Regularizer};
use crate::vector::{norm1, norm2, sub, C64};

/// Snapshot handed to an observer after each update.
pub struct IterView<'a> {
    /// Number of completed updates (1-based).
    pub iter: usize,
    pub x: &'a [C64],
    pub ergodic: &'a [C64],
    pub z1: &'a [C64],
    pub z2: &'a [C64],
}

pub type Observer<'a> = dyn FnMut(&IterView<'_>) + 'a;

pub struct InnerOptions<'a> {
    /// Return the ergodic average instead of the last iterate.
    pub ergodic: bool,
    pub z1_init: Option<&'a [C64]>,
    pub z2_init: Option<&'a [C64]>,
    /// Restart scale used for the constraint set projection.
    pub beta: f64,
    /// Record objective/feasibility of the output iterate every `trace_stride` updates (0 = off).
    pub trace_stride: usize,
    pub observer: Option<&'a mut Observer<'a>>,
}

impl Default for InnerOptions<'_> {
    fn default() -> Self {
        InnerOptions {
            ergodic: true,
            z1_init: None,
            z2_init: None,
            beta: 1.0,
            trace_stride: 10,
            observer: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerTracePoint {
    pub iter: usize,
    pub objective: f64,
    /// ‖Ax − b‖ − ε (zero radius for the square-root variant).
    pub feasibility_gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerOutput {
    /// Ergodic average or last iterate, per `ergodic`.
    pub x_out: Vec<C64>,
    pub x_last: Vec<C64>,
    pub z1: Vec<C64>,
    pub z2: Vec<C64>,
    /// Ergodic dual averages (square-root variant only; empty otherwise).
    pub z1_avg: Vec<C64>,
    pub z2_avg: Vec<C64>,
    pub iterations: usize,
    pub trace: Vec<InnerTracePoint>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapParams {
    pub eta: f64,
    pub epsilon: f64,
}

/// `J(x) + ‖Bx‖₁`.
pub fn objective(x: &[C64], b_op: Option<&LinearOp>, j: &Regularizer) -> Result<f64> {
    let mut v = j.value(x)?;
    if let Some(bo) = b_op {
        v += norm1(&bo.apply(x)?);
    }
    Ok(v)
}

/// G_η(x̂, x) = J̃(x̂) − J̃(x) + η(‖Ax̂ − b‖ − ε), J̃ = J + ‖B·‖₁.
pub fn gap(
    x_hat: &[C64],
    x_ref: &[C64],
    b: &[C64],
    a: &LinearOp,
    b_op: Option<&LinearOp>,
    j: &Regularizer,
    p: GapParams,
) -> Result<f64> {
    let res = norm2(&sub(&a.apply(x_hat)?, b));
    Ok(objective(x_hat, b_op, j)? - objective(x_ref, b_op, j)? + p.eta * (res - p.epsilon))
}

/// τ₁τ₂(‖A‖² + ‖B‖²) with cached norm estimates.
pub fn step_product(a: &LinearOp, b_op: Option<&LinearOp>, tau1: f64, tau2: f64) -> f64 {
    let nb = b_op.map(|o| o.norm()).unwrap_or(0.0);
    tau1 * tau2 * (a.norm().powi(2) + nb.powi(2))
}

fn check_inputs(
    b: &[C64],
    x0: &[C64],
    a: &LinearOp,
    b_op: Option<&LinearOp>,
    k: usize,
    tau1: f64,
    tau2: f64,
    j: &Regularizer,
) -> Result<()> {
    check_len(a.n_out(), b.len())?;
    check_len(a.n_in(), x0.len())?;
    check_len(a.n_in(), j.dim())?;
    if let Some(bo) = b_op {
        check_len(a.n_in(), bo.n_in())?;
    }
    if k == 0 {
        return Err(Error::InvalidParameter("inner iteration count must be at least 1".into()));
    }
    if !(tau1 > 0.0 && tau2 > 0.0) {
        return Err(Error::InvalidParameter(format!("step sizes must be positive ({tau1}, {tau2})")));
    }
    let prod = step_product(a, b_op, tau1, tau2);
    if !(prod < 1.0) {
        return Err(Error::StepSize(prod));
    }
    Ok(())
}

fn init_dual(init: Option<&[C64]>, n: usize) -> Result<Vec<C64>> {
    match init {
        Some(z) => {
            check_len(n, z.len())?;
            Ok(z.to_vec())
        }
        None => Ok(vec![C64::new(0.0, 0.0); n]),
    }
}

enum Variant {
    Constrained { epsilon: f64 },
    SquareRoot { lambda: f64 },
}

#[allow(clippy::too_many_arguments)]
fn run(
    b: &[C64],
    x0: &[C64],
    a: &LinearOp,
    b_op: Option<&LinearOp>,
    k: usize,
    tau1: f64,
    tau2: f64,
    variant: Variant,
    j: &Regularizer,
    state: &mut ProxState,
    mut opts: InnerOptions<'_>,
) -> Result<InnerOutput> {
    check_inputs(b, x0, a, b_op, k, tau1, tau2, j)?;
    let q = b_op.map(|o| o.n_out()).unwrap_or(0);
    let sr = matches!(variant, Variant::SquareRoot { .. });
    let (prox_t, eps, clip) = match variant {
        Variant::Constrained { epsilon } => (tau1, epsilon, 1.0),
        Variant::SquareRoot { lambda } => (lambda * tau1, 0.0, lambda),
    };
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut z1 = init_dual(opts.z1_init, b.len())?;
    let mut z2 = init_dual(opts.z2_init, q)?;
    let mut xa = vec![C64::new(0.0, 0.0); n];
    let mut z1a = if sr { vec![C64::new(0.0, 0.0); z1.len()] } else { Vec::new() };
    let mut z2a = if sr { vec![C64::new(0.0, 0.0); q] } else { Vec::new() };
    let mut trace = Vec::new();

    for it in 0..k {
        let mut g = a.adjoint(&z1)?;
        if let Some(bo) = b_op {
            for (gi, hi) in g.iter_mut().zip(bo.adjoint(&z2)?) {
                *gi += hi;
            }
        }
        let arg: Vec<C64> = x.iter().zip(&g).map(|(xi, gi)| xi - gi * tau1).collect();
        let x_new = j.prox(&arg, prox_t, opts.beta, state)?;
        let xbar: Vec<C64> = x_new.iter().zip(&x).map(|(p, o)| p * 2.0 - o).collect();

        let ax = a.apply(&xbar)?;
        let y1: Vec<C64> = z1
            .iter()
            .zip(&ax)
            .zip(b)
            .map(|((zi, ai), bi)| zi + (ai - bi) * tau2)
            .collect();
        z1 = if sr { project_l2_unit(&y1) } else { shrink_l2(&y1, tau2 * eps) };
        if let Some(bo) = b_op {
            let bx = bo.apply(&xbar)?;
            let y2: Vec<C64> = z2.iter().zip(&bx).map(|(zi, bi)| zi + bi * tau2).collect();
            z2 = clip_linf(&y2, clip);
            debug_assert!(z2.iter().all(|v| v.norm() <= clip * (1.0 + 1e-12)));
        }
        x = x_new;

        let w = 1.0 / (it + 1) as f64;
        for (m, v) in xa.iter_mut().zip(&x) {
            *m += (v - *m) * w;
        }
        if sr {
            for (m, v) in z1a.iter_mut().zip(&z1) {
                *m += (v - *m) * w;
            }
            for (m, v) in z2a.iter_mut().zip(&z2) {
                *m += (v - *m) * w;
            }
        }
        let done = it + 1;
        if opts.trace_stride > 0 && (done % opts.trace_stride == 0 || done == k) {
            let xo = if opts.ergodic { &xa } else { &x };
            let res = norm2(&sub(&a.apply(xo)?, b));
            trace.push(InnerTracePoint {
                iter: done,
                objective: objective(xo, b_op, j)?,
                feasibility_gap: res - eps,
            });
        }
        if let Some(obs) = opts.observer.as_mut() {
            obs(&IterView {
                iter: done,
                x: &x,
                ergodic: &xa,
                z1: &z1,
                z2: &z2,
            });
        }
    }
    let x_out = if opts.ergodic { xa } else { x.clone() };
    Ok(InnerOutput {
        x_out,
        x_last: x,
        z1,
        z2,
        z1_avg: z1a,
        z2_avg: z2a,
        iterations: k,
        trace,
    })
}

/// Exact primal-dual iterations for min J(x) + ‖Bx‖₁ s.t. ‖Ax − b‖ ≤ ε.
#[allow(clippy::too_many_arguments)]
pub fn inner_it(
    b: &[C64],
    x0: &[C64],
    a: &LinearOp,
    b_op: Option<&LinearOp>,
    k: usize,
    tau1: f64,
    tau2: f64,
    epsilon: f64,
    j: &Regularizer,
    state: &mut ProxState,
    opts: InnerOptions<'_>,
) -> Result<InnerOutput> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    run(b, x0, a, b_op, k, tau1, tau2, Variant::Constrained { epsilon }, j, state, opts)
}

/// Primal-dual iterations for min λ(J(x) + ‖Bx‖₁) + ‖Ax − b‖. Dual warm starts come
/// from `opts.z1_init` / `opts.z2_init`; both ergodic averages are returned.
#[allow(clippy::too_many_arguments)]
pub fn inner_it_sr(
    b: &[C64],
    x0: &[C64],
    a: &LinearOp,
    b_op: Option<&LinearOp>,
    k: usize,
    tau1: f64,
    tau2: f64,
    lambda: f64,
    j: &Regularizer,
    state: &mut ProxState,
    opts: InnerOptions<'_>,
) -> Result<InnerOutput> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    run(b, x0, a, b_op, k, tau1, tau2, Variant::SquareRoot { lambda }, j, state, opts)
}
