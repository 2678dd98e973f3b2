//! Linear operators: fast transforms, masks, combinators and power-method norms.
//!
//! Vectors are dense `Complex64` slices. Two-dimensional quantities are
//! vectorized column-major (entry `(i, j)` of an `rows × cols` array lives at
//! `i + rows * j`).

mod mask;
mod pauli;
mod spec;
mod transforms;

use std::sync::{Arc, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::vector::{norm2, randn_complex, C64};

pub use mask::{dft_frequency_order, wht_sequency_order, MaskScheme, SamplingMask};
pub use pauli::{random_pauli_strings, PauliOp};
pub use spec::*;
pub use transforms::{
    dwt_scale_groups, db2_taps, fwht_in_place, sequency_rank, DftPlan, Shape, WaveletFilter,
};

#[derive(Clone, Debug)]
pub enum OpKind {
    Identity,
    /// Row-major `n_out × n_in`.
    Dense(Arc<Vec<C64>>),
    SubsampledDft { plan: Arc<DftPlan>, mask: SamplingMask },
    SubsampledWht { mask: SamplingMask },
    Dwt { shape: Shape, levels: usize, filter: WaveletFilter },
    PeriodicGradient { shape: Shape },
    MaskProjection { indices: Arc<Vec<usize>> },
    Pauli(Arc<PauliOp>),
    Diagonal(Arc<Vec<f64>>),
    /// `outer ∘ inner`.
    Composite(Box<LinearOp>, Box<LinearOp>),
    Scaled(f64, Box<LinearOp>),
    Stacked(Vec<LinearOp>),
    Adjoint(Box<LinearOp>),
}

#[derive(Clone, Debug)]
pub struct LinearOp {
    n_in: usize,
    n_out: usize,
    kind: OpKind,
    norm_cache: Arc<OnceLock<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl LinearOp {
    fn new(n_in: usize, n_out: usize, kind: OpKind) -> Self {
        LinearOp {
            n_in,
            n_out,
            kind,
            norm_cache: Arc::new(OnceLock::new()),
        }
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn kind(&self) -> &OpKind {
        &self.kind
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, n, OpKind::Identity)
    }

    /// Dense matrix from row-major entries.
    pub fn dense(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        check_len(rows * cols, data.len())?;
        Ok(Self::new(cols, rows, OpKind::Dense(Arc::new(data))))
    }

    pub fn dense_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::dense(rows, cols, data.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    /// Rows of the unitary DFT on a `shape` grid restricted to `mask`.
    pub fn subsampled_dft(shape: Shape, mask: SamplingMask) -> Result<Self> {
        if !shape.rows.is_power_of_two() || !shape.cols.is_power_of_two() {
            return Err(Error::InvalidOperator(format!(
                "dft sizes must be powers of two, got {}x{}",
                shape.rows, shape.cols
            )));
        }
        if mask.ambient() != shape.len() {
            return Err(Error::InvalidMask(format!(
                "mask ambient size {} does not match transform size {}",
                mask.ambient(),
                shape.len()
            )));
        }
        let m = mask.len();
        Ok(Self::new(
            shape.len(),
            m,
            OpKind::SubsampledDft {
                plan: Arc::new(DftPlan::new(shape)),
                mask,
            },
        ))
    }

    /// Rows of the naturally ordered Hadamard matrix, scaled by 1/√N.
    pub fn subsampled_wht(n: usize, mask: SamplingMask) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::InvalidOperator(format!(
                "wht size must be a power of two, got {n}"
            )));
        }
        if mask.ambient() != n {
            return Err(Error::InvalidMask(format!(
                "mask ambient size {} does not match transform size {n}",
                mask.ambient()
            )));
        }
        let m = mask.len();
        Ok(Self::new(n, m, OpKind::SubsampledWht { mask }))
    }

    /// Orthonormal periodic wavelet analysis. `shape.cols == 1` gives the 1-D transform.
    pub fn dwt(shape: Shape, levels: usize, filter: WaveletFilter) -> Result<Self> {
        let block = 1usize
            .checked_shl(levels as u32)
            .ok_or_else(|| Error::InvalidOperator("too many wavelet levels".into()))?;
        let cols_ok = shape.cols == 1 || shape.cols % block == 0;
        if shape.rows % block != 0 || !cols_ok || shape.len() == 0 {
            return Err(Error::InvalidOperator(format!(
                "size {}x{} not divisible by 2^{levels}",
                shape.rows, shape.cols
            )));
        }
        Ok(Self::new(
            shape.len(),
            shape.len(),
            OpKind::Dwt {
                shape,
                levels,
                filter,
            },
        ))
    }

    /// Periodic forward differences of an `n_side × n_side` image: ∇₁ then ∇₂.
    pub fn periodic_gradient(n_side: usize) -> Result<Self> {
        Self::periodic_gradient_shape(Shape::new(n_side, n_side))
    }

    pub fn periodic_gradient_shape(shape: Shape) -> Result<Self> {
        if shape.len() == 0 {
            return Err(Error::InvalidOperator("empty gradient domain".into()));
        }
        Ok(Self::new(
            shape.len(),
            2 * shape.len(),
            OpKind::PeriodicGradient { shape },
        ))
    }

    /// Coordinate selection `x ↦ x[indices]`.
    pub fn mask_projection(n: usize, indices: Vec<usize>) -> Result<Self> {
        let mask = SamplingMask::from_indices(n, indices)?;
        let m = mask.len();
        Ok(Self::new(
            n,
            m,
            OpKind::MaskProjection {
                indices: Arc::new(mask.indices().to_vec()),
            },
        ))
    }

    pub fn pauli_measurement(qubits: usize, strings: &[String]) -> Result<Self> {
        let op = PauliOp::new(qubits, strings)?;
        let n = op.dim();
        Ok(Self::new(n * n, strings.len(), OpKind::Pauli(Arc::new(op))))
    }

    pub fn diagonal(weights: Vec<f64>) -> Self {
        let n = weights.len();
        Self::new(n, n, OpKind::Diagonal(Arc::new(weights)))
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: LinearOp, inner: LinearOp) -> Result<Self> {
        if outer.n_in != inner.n_out {
            return Err(Error::DimensionMismatch {
                expected: outer.n_in,
                got: inner.n_out,
            });
        }
        let (n_in, n_out) = (inner.n_in, outer.n_out);
        Ok(Self::new(
            n_in,
            n_out,
            OpKind::Composite(Box::new(outer), Box::new(inner)),
        ))
    }

    pub fn scale(factor: f64, op: LinearOp) -> Self {
        let (n_in, n_out) = (op.n_in, op.n_out);
        Self::new(n_in, n_out, OpKind::Scaled(factor, Box::new(op)))
    }

    /// Vertical concatenation `(A₁; A₂; …)`.
    pub fn stack(parts: Vec<LinearOp>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidOperator("empty stack".into()))?;
        let n_in = first.n_in;
        for p in &parts {
            check_len(n_in, p.n_in)?;
        }
        let n_out = parts.iter().map(|p| p.n_out).sum();
        Ok(Self::new(n_in, n_out, OpKind::Stacked(parts)))
    }

    pub fn adjoint_op(op: LinearOp) -> Self {
        let (n_in, n_out) = (op.n_out, op.n_in);
        Self::new(n_in, n_out, OpKind::Adjoint(Box::new(op)))
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        check_len(self.n_in, x.len())?;
        Ok(self.forward(x))
    }

    pub fn adjoint(&self, y: &[C64]) -> Result<Vec<C64>> {
        check_len(self.n_out, y.len())?;
        Ok(self.backward(y))
    }

    // Unchecked kernels; lengths are validated at the public entry points and
    // by construction for children.
    fn forward(&self, x: &[C64]) -> Vec<C64> {
        match &self.kind {
            OpKind::Identity => x.to_vec(),
            OpKind::Dense(a) => (0..self.n_out)
                .map(|i| {
                    let row = &a[i * self.n_in..(i + 1) * self.n_in];
                    row.iter().zip(x).map(|(r, v)| r * v).sum()
                })
                .collect(),
            OpKind::SubsampledDft { plan, mask } => {
                let mut buf = x.to_vec();
                plan.forward(&mut buf);
                mask.indices().iter().map(|&i| buf[i]).collect()
            }
            OpKind::SubsampledWht { mask } => {
                let mut buf = x.to_vec();
                fwht_in_place(&mut buf);
                let s = 1.0 / (self.n_in as f64).sqrt();
                mask.indices().iter().map(|&i| buf[i] * s).collect()
            }
            OpKind::Dwt {
                shape,
                levels,
                filter,
            } => transforms::dwt_forward(x, *shape, *levels, *filter),
            OpKind::PeriodicGradient { shape } => transforms::gradient_forward(x, *shape),
            OpKind::MaskProjection { indices } => indices.iter().map(|&i| x[i]).collect(),
            OpKind::Pauli(p) => p.forward(x),
            OpKind::Diagonal(w) => x.iter().zip(w.iter()).map(|(v, &d)| v * d).collect(),
            OpKind::Composite(outer, inner) => outer.forward(&inner.forward(x)),
            OpKind::Scaled(c, op) => {
                let mut y = op.forward(x);
                y.iter_mut().for_each(|v| *v *= *c);
                y
            }
            OpKind::Stacked(parts) => {
                let mut y = Vec::with_capacity(self.n_out);
                for p in parts {
                    y.extend(p.forward(x));
                }
                y
            }
            OpKind::Adjoint(op) => op.backward(x),
        }
    }

    fn backward(&self, y: &[C64]) -> Vec<C64> {
        match &self.kind {
            OpKind::Identity => y.to_vec(),
            OpKind::Dense(a) => {
                let mut x = vec![C64::new(0.0, 0.0); self.n_in];
                for (i, yi) in y.iter().enumerate() {
                    let row = &a[i * self.n_in..(i + 1) * self.n_in];
                    for (xj, r) in x.iter_mut().zip(row) {
                        *xj += r.conj() * yi;
                    }
                }
                x
            }
            OpKind::SubsampledDft { plan, mask } => {
                let mut buf = vec![C64::new(0.0, 0.0); self.n_in];
                for (&i, v) in mask.indices().iter().zip(y) {
                    buf[i] = *v;
                }
                plan.inverse(&mut buf);
                buf
            }
            OpKind::SubsampledWht { mask } => {
                let mut buf = vec![C64::new(0.0, 0.0); self.n_in];
                for (&i, v) in mask.indices().iter().zip(y) {
                    buf[i] = *v;
                }
                fwht_in_place(&mut buf);
                let s = 1.0 / (self.n_in as f64).sqrt();
                buf.iter_mut().for_each(|v| *v *= s);
                buf
            }
            OpKind::Dwt {
                shape,
                levels,
                filter,
            } => transforms::dwt_inverse(y, *shape, *levels, *filter),
            OpKind::PeriodicGradient { shape } => transforms::gradient_adjoint(y, *shape),
            OpKind::MaskProjection { indices } => {
                let mut x = vec![C64::new(0.0, 0.0); self.n_in];
                for (&i, v) in indices.iter().zip(y) {
                    x[i] = *v;
                }
                x
            }
            OpKind::Pauli(p) => p.adjoint(y),
            OpKind::Diagonal(w) => y.iter().zip(w.iter()).map(|(v, &d)| v * d).collect(),
            OpKind::Composite(outer, inner) => inner.backward(&outer.backward(y)),
            OpKind::Scaled(c, op) => {
                let mut x = op.backward(y);
                x.iter_mut().for_each(|v| *v *= *c);
                x
            }
            OpKind::Stacked(parts) => {
                let mut x = vec![C64::new(0.0, 0.0); self.n_in];
                let mut offset = 0;
                for p in parts {
                    let part = p.backward(&y[offset..offset + p.n_out]);
                    for (a, b) in x.iter_mut().zip(part) {
                        *a += b;
                    }
                    offset += p.n_out;
                }
                x
            }
            OpKind::Adjoint(op) => op.forward(y),
        }
    }

    /// Closed-form operator norm where one is available.
    pub fn exact_norm(&self) -> Option<f64> {
        match &self.kind {
            OpKind::Identity | OpKind::Dwt { .. } => Some(if self.n_in == 0 { 0.0 } else { 1.0 }),
            OpKind::SubsampledDft { mask, .. } | OpKind::SubsampledWht { mask } => {
                Some(if mask.is_empty() { 0.0 } else { 1.0 })
            }
            OpKind::MaskProjection { indices } => Some(if indices.is_empty() { 0.0 } else { 1.0 }),
            OpKind::Pauli(p) => Some(if p.len() == 0 { 0.0 } else { 1.0 }),
            OpKind::Diagonal(w) => Some(w.iter().fold(0.0_f64, |m, v| m.max(v.abs()))),
            OpKind::PeriodicGradient { shape } => Some(transforms::gradient_norm(*shape)),
            OpKind::Scaled(c, op) => op.exact_norm().map(|v| c.abs() * v),
            OpKind::Adjoint(op) => op.exact_norm(),
            _ => None,
        }
    }

    /// Cached operator norm: exact when known, otherwise a converged power-method estimate.
    pub fn norm(&self) -> f64 {
        *self.norm_cache.get_or_init(|| {
            self.exact_norm()
                .unwrap_or_else(|| estimate_norm(self, 2000, 1e-10).value)
        })
    }

    /// Densified row-major matrix (testing and small problems).
    pub fn to_dense(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n_in * self.n_out];
        let mut e = vec![C64::new(0.0, 0.0); self.n_in];
        for j in 0..self.n_in {
            e[j] = C64::new(1.0, 0.0);
            let col = self.forward(&e);
            for (i, v) in col.into_iter().enumerate() {
                out[i * self.n_in + j] = v;
            }
            e[j] = C64::new(0.0, 0.0);
        }
        out
    }
}

/// Power iteration on `op* ∘ op` from a fixed-seed random start.
///
/// Returns the largest `‖op v‖` seen over unit iterates; `converged` means the
/// relative change of the estimate dropped below `tol`.
pub fn estimate_norm(op: &LinearOp, max_iters: usize, tol: f64) -> NormEstimate {
    if op.n_in == 0 || op.n_out == 0 {
        return NormEstimate {
            value: 0.0,
            converged: true,
            iterations: 0,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9);
    let mut v = randn_complex(&mut rng, op.n_in);
    let nv = norm2(&v);
    v.iter_mut().for_each(|c| *c /= nv);
    let mut best = 0.0_f64;
    let mut prev = 0.0_f64;
    for it in 1..=max_iters.max(1) {
        let av = op.forward(&v);
        let est = norm2(&av);
        best = best.max(est);
        if est == 0.0 {
            return NormEstimate {
                value: best,
                converged: true,
                iterations: it,
            };
        }
        let mut w = op.backward(&av);
        let nw = norm2(&w);
        if nw == 0.0 {
            return NormEstimate {
                value: best,
                converged: true,
                iterations: it,
            };
        }
        w.iter_mut().for_each(|c| *c /= nw);
        v = w;
        if it > 1 && (est - prev).abs() <= tol * est {
            return NormEstimate {
                value: best,
                converged: true,
                iterations: it,
            };
        }
        prev = est;
    }
    NormEstimate {
        value: best,
        converged: false,
        iterations: max_iters,
    }
}
