//! Relative objective error metrics.

use crate::error::{check_len, Error, Result};
use crate::linops::LinearOp;
use crate::partial_svd::dense_singular_values;
use crate::vector::{dist, norm2, C64};

/// (|Ĵ(x) − Ĵ(x*)| + C₂·|‖Ax − b‖ − ε|) / Ĵ(x*) from precomputed pieces.
pub fn objective_error(j_x: f64, j_star: f64, residual: f64, epsilon: f64, c2: f64) -> f64 {
    ((j_x - j_star).abs() + c2 * (residual - epsilon).abs()) / j_star
}

fn residual(x: &[C64], a: &LinearOp, b: &[C64]) -> Result<f64> {
    check_len(a.n_out(), b.len())?;
    Ok(dist(&a.apply(x)?, b))
}

/// Error metric for weighted-ℓ¹ problems with weights `w`.
pub fn error_metric_sparse(
    x: &[C64],
    x_star: &[C64],
    a: &LinearOp,
    b: &[C64],
    c2: f64,
    epsilon: f64,
    w: &[f64],
) -> Result<f64> {
    check_len(x.len(), x_star.len())?;
    check_len(x.len(), w.len())?;
    let wl1 = |v: &[C64]| v.iter().zip(w).map(|(c, wi)| wi * c.norm()).sum::<f64>();
    let js = wl1(x_star);
    if !(js > 0.0) {
        return Err(Error::InvalidParameter("reference has zero weighted l1 norm".into()));
    }
    Ok(objective_error(wl1(x), js, residual(x, a, b)?, epsilon, c2))
}

/// Error metric for nuclear-norm problems on column-major `rows × cols` matrices.
#[allow(clippy::too_many_arguments)]
pub fn error_metric_nuclear(
    m: &[C64],
    m_star: &[C64],
    rows: usize,
    cols: usize,
    a: &LinearOp,
    b: &[C64],
    c2: f64,
    epsilon: f64,
) -> Result<f64> {
    check_len(m.len(), m_star.len())?;
    let js: f64 = dense_singular_values(rows, cols, m_star)?.iter().sum();
    if !(js > 0.0) {
        return Err(Error::InvalidParameter("reference has zero nuclear norm".into()));
    }
    let jx: f64 = dense_singular_values(rows, cols, m)?.iter().sum();
    Ok(objective_error(jx, js, residual(m, a, b)?, epsilon, c2))
}

/// ‖x − ϰ‖ / ‖ϰ‖.
pub fn relative_error(x: &[C64], truth: &[C64]) -> Result<f64> {
    check_len(truth.len(), x.len())?;
    let n = norm2(truth);
    if n == 0.0 {
        return Ok(norm2(x));
    }
    Ok(dist(x, truth) / n)
}
