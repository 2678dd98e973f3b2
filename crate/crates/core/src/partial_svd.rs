//! Partial SVD by Golub–Kahan–Lanczos bidiagonalization with full
//! re-orthogonalization, and singular value thresholding with an adaptive
//! predicted rank.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{inner, norm2, randn_complex, C64};

/// Matrix-free operand: products with `M` (`rows × cols`) and `M*`.
pub trait SvdOperand {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `M v` for `v` of length `cols`.
    fn mul(&self, v: &[C64]) -> Vec<C64>;
    /// `M* u` for `u` of length `rows`.
    fn mul_adjoint(&self, u: &[C64]) -> Vec<C64>;
}

/// Borrowed column-major dense matrix.
pub struct DenseMatrix<'a> {
    rows: usize,
    cols: usize,
    data: &'a [C64],
}

impl<'a> DenseMatrix<'a> {
    pub fn new(rows: usize, cols: usize, data: &'a [C64]) -> Result<Self> {
        crate::error::check_len(rows * cols, data.len())?;
        Ok(DenseMatrix { rows, cols, data })
    }
}

impl SvdOperand for DenseMatrix<'_> {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn mul(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for (j, vj) in v.iter().enumerate() {
            let col = &self.data[j * self.rows..(j + 1) * self.rows];
            for (o, m) in out.iter_mut().zip(col) {
                *o += m * vj;
            }
        }
        out
    }
    fn mul_adjoint(&self, u: &[C64]) -> Vec<C64> {
        (0..self.cols)
            .map(|j| {
                let col = &self.data[j * self.rows..(j + 1) * self.rows];
                col.iter().zip(u).map(|(m, x)| m.conj() * x).sum()
            })
            .collect()
    }
}

/// `U diag(S) V*` plus an optional sparse addend of `(row, col, value)` triplets.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredMatrix {
    pub rows: usize,
    pub cols: usize,
    /// `rows × r`, column-major.
    pub u: Vec<C64>,
    pub s: Vec<f64>,
    /// `cols × r`, column-major.
    pub v: Vec<C64>,
    pub sparse: Vec<(usize, usize, C64)>,
}

impl FactoredMatrix {
    pub fn empty(rows: usize, cols: usize) -> Self {
        FactoredMatrix {
            rows,
            cols,
            u: Vec::new(),
            s: Vec::new(),
            v: Vec::new(),
            sparse: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn u_col(&self, k: usize) -> &[C64] {
        &self.u[k * self.rows..(k + 1) * self.rows]
    }

    pub fn v_col(&self, k: usize) -> &[C64] {
        &self.v[k * self.cols..(k + 1) * self.cols]
    }

    /// Column-major dense matrix.
    pub fn to_dense(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.rows * self.cols];
        for k in 0..self.rank() {
            let (u, v, s) = (self.u_col(k), self.v_col(k), self.s[k]);
            for j in 0..self.cols {
                let c = v[j].conj() * s;
                let col = &mut out[j * self.rows..(j + 1) * self.rows];
                for (o, ui) in col.iter_mut().zip(u) {
                    *o += ui * c;
                }
            }
        }
        for &(i, j, val) in &self.sparse {
            out[i + self.rows * j] += val;
        }
        out
    }

    /// max(‖U*U − I‖_max, ‖V*V − I‖_max).
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for a in 0..self.rank() {
            for b in 0..self.rank() {
                let target = if a == b { 1.0 } else { 0.0 };
                let gu = inner(self.u_col(b), self.u_col(a));
                let gv = inner(self.v_col(b), self.v_col(a));
                worst = worst.max((gu - target).norm()).max((gv - target).norm());
            }
        }
        worst
    }
}

impl SvdOperand for FactoredMatrix {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn mul(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for k in 0..self.rank() {
            let c = inner(x, self.v_col(k)) * self.s[k];
            for (o, u) in out.iter_mut().zip(self.u_col(k)) {
                *o += u * c;
            }
        }
        for &(i, j, val) in &self.sparse {
            out[i] += val * x[j];
        }
        out
    }
    fn mul_adjoint(&self, y: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.cols];
        for k in 0..self.rank() {
            let c = inner(y, self.u_col(k)) * self.s[k];
            for (o, v) in out.iter_mut().zip(self.v_col(k)) {
                *o += v * c;
            }
        }
        for &(i, j, val) in &self.sparse {
            out[j] += val.conj() * y[i];
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankState {
    pub r_prime: usize,
    /// +1 / 0 / −1 per call.
    pub history: Vec<i8>,
}

impl Default for RankState {
    fn default() -> Self {
        RankState {
            r_prime: 5,
            history: Vec::new(),
        }
    }
}

impl RankState {
    pub fn new(r_prime: usize) -> Self {
        RankState {
            r_prime: r_prime.max(1),
            history: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvdOptions {
    /// Residual tolerance relative to σ₁.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions { tol: 1e-10, seed: 0x5eed }
    }
}

const MAX_RESTARTS: usize = 3;

fn project_out(x: &mut [C64], basis: &[Vec<C64>]) {
    // two passes of classical Gram–Schmidt
    for _ in 0..2 {
        for q in basis {
            let c = inner(x, q);
            for (a, b) in x.iter_mut().zip(q) {
                *a -= b * c;
            }
        }
    }
}

/// One-sided Jacobi SVD of a small real `k × kc` matrix (`kc ≥ k`), returning
/// `(σ descending, left vectors k × k, right vectors kc × k)`. nalgebra's SVD loses
/// accuracy on upper bidiagonals with a tiny diagonal entry, which Lanczos produces
/// whenever the operand is exactly low rank.
fn jacobi_svd(b: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
    let k = b.nrows();
    // rotate the columns of Bᵀ until they are mutually orthogonal: Bᵀ V = W
    let mut w = b.transpose();
    let mut v = DMatrix::<f64>::identity(k, k);
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..k {
            for j in i + 1..k {
                let (ci, cj) = (w.column(i), w.column(j));
                let a = ci.norm_squared();
                let c = cj.norm_squared();
                let g = ci.dot(&cj);
                if g.abs() <= f64::EPSILON * (a * c).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (c - a) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for m in [&mut w, &mut v] {
                    for r in 0..m.nrows() {
                        let (x, y) = (m[(r, i)], m[(r, j)]);
                        m[(r, i)] = cs * x - sn * y;
                        m[(r, j)] = sn * x + cs * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..k).map(|i| w.column(i).norm()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let sig: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let p = v.select_columns(order.iter());
    let mut q = w.select_columns(order.iter());
    for (c, &s) in sig.iter().enumerate() {
        if s > 0.0 {
            q.column_mut(c).scale_mut(1.0 / s);
        } else {
            q.column_mut(c).fill(0.0);
        }
    }
    (sig, p, q)
}

/// Growing Golub–Kahan bidiagonalization `M V_k = U_k B_k`.
struct Bidiag<'a> {
    op: &'a dyn SvdOperand,
    u: Vec<Vec<C64>>,
    v: Vec<Vec<C64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    next_v: Option<Vec<C64>>,
    /// Right residual direction once the left space is exhausted (rows < cols).
    tail: Option<Vec<C64>>,
    rng: ChaCha8Rng,
    restarts: usize,
    scale: f64,
}

impl<'a> Bidiag<'a> {
    fn new(op: &'a dyn SvdOperand, seed: u64) -> Result<Self> {
        let mut b = Bidiag {
            op,
            u: Vec::new(),
            v: Vec::new(),
            alpha: Vec::new(),
            beta: Vec::new(),
            next_v: None,
            tail: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
            restarts: 0,
            scale: 0.0,
        };
        b.next_v = Some(b.fresh(op.cols(), true)?);
        Ok(b)
    }

    fn max_steps(&self) -> usize {
        self.op.rows().min(self.op.cols())
    }

    /// Random unit vector orthogonal to the current left (`right == false`) or right basis.
    fn fresh(&mut self, n: usize, right: bool) -> Result<Vec<C64>> {
        loop {
            let mut x = randn_complex(&mut self.rng, n);
            let basis = if right { &self.v } else { &self.u };
            project_out(&mut x, basis);
            let nx = norm2(&x);
            if nx > 1e-8 * (n as f64).sqrt() {
                x.iter_mut().for_each(|c| *c /= nx);
                return Ok(x);
            }
            self.restarts += 1;
            if self.restarts > MAX_RESTARTS {
                return Err(Error::Svd(format!(
                    "krylov breakdown: no fresh direction after {MAX_RESTARTS} restarts at step {}",
                    self.v.len()
                )));
            }
        }
    }

    fn len(&self) -> usize {
        self.alpha.len()
    }

    fn step(&mut self) -> Result<()> {
        let vj = self.next_v.take().expect("pending right vector");
        let mut uj = self.op.mul(&vj);
        if let (Some(prev), Some(&b)) = (self.u.last(), self.beta.last()) {
            for (a, p) in uj.iter_mut().zip(prev) {
                *a -= p * b;
            }
        }
        project_out(&mut uj, &self.u);
        let mut a = norm2(&uj);
        self.scale = self.scale.max(a);
        let tiny = 1e-13 * self.scale.max(f64::MIN_POSITIVE);
        if a <= tiny {
            a = 0.0;
            uj = self.fresh(self.op.rows(), false)?;
        } else {
            uj.iter_mut().for_each(|c| *c /= a);
        }
        self.v.push(vj);
        self.alpha.push(a);
        let last = self.len() == self.max_steps();
        if last && self.op.cols() <= self.op.rows() {
            self.u.push(uj);
            self.beta.push(0.0);
            return Ok(());
        }
        let mut vn = self.op.mul_adjoint(&uj);
        let vj = self.v.last().unwrap();
        for (x, p) in vn.iter_mut().zip(vj) {
            *x -= p * a;
        }
        project_out(&mut vn, &self.v);
        self.u.push(uj);
        let mut b = norm2(&vn);
        self.scale = self.scale.max(b);
        if last {
            // the left space is exhausted: M = U_k [B_k  β_k e_k] [V_k v_{k+1}]*
            if b > 1e-13 * self.scale.max(f64::MIN_POSITIVE) {
                vn.iter_mut().for_each(|c| *c /= b);
                self.tail = Some(vn);
            } else {
                b = 0.0;
            }
            self.beta.push(b);
            return Ok(());
        }
        if b <= 1e-13 * self.scale.max(f64::MIN_POSITIVE) {
            b = 0.0;
            vn = self.fresh(self.op.cols(), true)?;
        } else {
            vn.iter_mut().for_each(|c| *c /= b);
        }
        self.beta.push(b);
        self.next_v = Some(vn);
        Ok(())
    }

    /// Ritz triplets of the current bidiagonal: (σ descending, left coeffs, right coeffs, residual bounds).
    fn ritz(&self) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>, Vec<f64>) {
        let k = self.len();
        let kc = if self.tail.is_some() { k + 1 } else { k };
        let mut bmat = DMatrix::<f64>::zeros(k, kc);
        for i in 0..k {
            bmat[(i, i)] = self.alpha[i];
            if i + 1 < kc {
                bmat[(i, i + 1)] = self.beta[i];
            }
        }
        let (sig, p, q) = jacobi_svd(&bmat);
        let beta_k = if self.tail.is_some() { 0.0 } else { self.beta[k - 1] };
        let res = (0..k).map(|i| beta_k * p[(k - 1, i)].abs()).collect();
        (sig, p, q, res)
    }

    fn assemble(&self, p: &DMatrix<f64>, q: &DMatrix<f64>, sig: &[f64], r: usize) -> FactoredMatrix {
        let (n1, n2, k) = (self.op.rows(), self.op.cols(), self.len());
        let mut u = vec![C64::new(0.0, 0.0); n1 * r];
        let mut v = vec![C64::new(0.0, 0.0); n2 * r];
        for c in 0..r {
            for t in 0..k {
                let pc = p[(t, c)];
                for (o, x) in u[c * n1..(c + 1) * n1].iter_mut().zip(&self.u[t]) {
                    *o += x * pc;
                }
            }
            for t in 0..q.nrows() {
                let qc = q[(t, c)];
                let basis = if t < k { &self.v[t] } else { self.tail.as_ref().expect("tail vector") };
                for (o, x) in v[c * n2..(c + 1) * n2].iter_mut().zip(basis) {
                    *o += x * qc;
                }
            }
        }
        FactoredMatrix {
            rows: n1,
            cols: n2,
            u,
            s: sig[..r].to_vec(),
            v,
            sparse: Vec::new(),
        }
    }

    /// Extend until the leading `r` Ritz triplets have residual ≤ tol·σ₁.
    fn converge(&mut self, r: usize, tol: f64) -> Result<(Vec<f64>, DMatrix<f64>, DMatrix<f64>)> {
        let cap = self.max_steps();
        let r = r.min(cap);
        let mut target = (r + 10).min(cap).max(self.len());
        loop {
            while self.len() < target {
                self.step()?;
            }
            let (sig, p, q, res) = self.ritz();
            let s1 = sig.first().copied().unwrap_or(0.0);
            let ok = self.len() == cap || res[..r].iter().all(|&e| e <= tol * s1.max(f64::MIN_POSITIVE));
            if ok {
                return Ok((sig, p, q));
            }
            target = (target + (target / 2).max(5)).min(cap);
        }
    }
}

/// Leading `r_prime` singular triplets of `m` and the smallest computed value.
pub fn top_svd(m: &dyn SvdOperand, r_prime: usize, opts: &SvdOptions) -> Result<(FactoredMatrix, f64)> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok((FactoredMatrix::empty(m.rows(), m.cols()), 0.0));
    }
    let mut bd = Bidiag::new(m, opts.seed)?;
    let r = r_prime.max(1).min(bd.max_steps());
    let (sig, p, q) = bd.converge(r, opts.tol)?;
    let f = bd.assemble(&p, &q, &sig, r);
    let smallest = sig[r - 1];
    Ok((f, smallest))
}

/// Singular value thresholding `U max(Σ − threshold, 0) V*` with the adaptive-rank rule:
/// the next `r′` grows by one when every one of the `r′` computed values exceeded the
/// threshold, shrinks by one (floor 1) when at least two fell at or below it.
pub fn svt_step(
    m: &dyn SvdOperand,
    threshold: f64,
    state: RankState,
    opts: &SvdOptions,
) -> Result<(FactoredMatrix, RankState)> {
    let (n1, n2) = (m.rows(), m.cols());
    if n1 == 0 || n2 == 0 {
        return Ok((FactoredMatrix::empty(n1, n2), state));
    }
    let mut bd = Bidiag::new(m, opts.seed)?;
    let cap = bd.max_steps();
    let r0 = state.r_prime.max(1).min(cap);
    let (mut sig, mut p, mut q) = bd.converge(r0, opts.tol)?;
    let above = sig[..r0].iter().filter(|&&s| s > threshold).count();
    let mut next = state.clone();
    if above == r0 && r0 < cap {
        next.r_prime = r0 + 1;
        next.history.push(1);
    } else if r0 - above >= 2 {
        next.r_prime = (r0 - 1).max(1);
        next.history.push(-1);
    } else {
        next.r_prime = r0;
        next.history.push(0);
    }
    // make sure every value above the threshold is captured
    let mut r = r0;
    while r < cap && sig[r - 1] > threshold {
        r = (r + (r / 2).max(2)).min(cap);
        let out = bd.converge(r, opts.tol)?;
        sig = out.0;
        p = out.1;
        q = out.2;
    }
    let keep = sig.iter().take(r).filter(|&&s| s > threshold).count();
    let mut f = bd.assemble(&p, &q, &sig, keep);
    f.s.iter_mut().for_each(|s| *s -= threshold);
    Ok((f, next))
}

/// Dense complex SVD thresholding (column-major input), the reference engine.
pub fn dense_svt(rows: usize, cols: usize, x: &[C64], threshold: f64) -> Result<Vec<C64>> {
    crate::error::check_len(rows * cols, x.len())?;
    let m = DMatrix::from_column_slice(rows, cols, x);
    let svd = m
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Svd(format!("dense svd of {rows}x{cols} did not converge")))?;
    let u = svd.u.expect("left vectors requested");
    let vt = svd.v_t.expect("right vectors requested");
    let mut out = DMatrix::<C64>::zeros(rows, cols);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let shrunk = s - threshold;
        if shrunk > 0.0 {
            out += u.column(k) * vt.row(k) * C64::new(shrunk, 0.0);
        }
    }
    Ok(out.as_slice().to_vec())
}

/// Singular values (descending) of a column-major dense matrix.
pub fn dense_singular_values(rows: usize, cols: usize, x: &[C64]) -> Result<Vec<f64>> {
    crate::error::check_len(rows * cols, x.len())?;
    let m = DMatrix::from_column_slice(rows, cols, x);
    let svd = m
        .try_svd(false, false, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Svd(format!("dense svd of {rows}x{cols} did not converge")))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(vals: &[f64], rows: usize, cols: usize) -> Vec<C64> {
        let mut m = vec![C64::new(0.0, 0.0); rows * cols];
        for (i, &v) in vals.iter().enumerate() {
            m[i + rows * i] = C64::new(v, 0.0);
        }
        m
    }

    #[test]
    fn diagonal_top_two() {
        let m = diag(&[5.0, 3.0, 1.0], 3, 3);
        let op = DenseMatrix::new(3, 3, &m).unwrap();
        let (f, smallest) = top_svd(&op, 2, &SvdOptions::default()).unwrap();
        assert!((f.s[0] - 5.0).abs() < 1e-12 && (f.s[1] - 3.0).abs() < 1e-12);
        assert!((smallest - 3.0).abs() < 1e-12);
        for k in 0..2 {
            assert!((f.u_col(k)[k].norm() - 1.0).abs() < 1e-10);
            assert!((f.v_col(k)[k].norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rank_one_outer_product() {
        let u: Vec<f64> = vec![1.0, 2.0, -1.0, 0.5];
        let v: Vec<f64> = vec![3.0, -1.0, 2.0];
        let mut m = vec![C64::new(0.0, 0.0); 12];
        for j in 0..3 {
            for i in 0..4 {
                m[i + 4 * j] = C64::new(u[i] * v[j], 0.0);
            }
        }
        let op = DenseMatrix::new(4, 3, &m).unwrap();
        let (f, _) = top_svd(&op, 1, &SvdOptions::default()).unwrap();
        let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((f.s[0] - nu * nv).abs() < 1e-12);
    }

    #[test]
    fn svt_rule_examples() {
        let opts = SvdOptions::default();
        let m = diag(&[5.0, 3.0, 1.0], 3, 3);
        let op = DenseMatrix::new(3, 3, &m).unwrap();
        let (f, st) = svt_step(&op, 2.0, RankState::new(3), &opts).unwrap();
        assert_eq!(f.rank(), 2);
        assert!((f.s[0] - 3.0).abs() < 1e-12 && (f.s[1] - 1.0).abs() < 1e-12);
        assert_eq!(st.r_prime, 3);

        let (f, st) = svt_step(&op, 6.0, RankState::new(3), &opts).unwrap();
        assert_eq!(f.rank(), 0);
        assert_eq!(st.r_prime, 2);

        let m = diag(&[9.0, 8.0, 7.0], 4, 4);
        let op = DenseMatrix::new(4, 4, &m).unwrap();
        let (f, st) = svt_step(&op, 1.0, RankState::new(2), &opts).unwrap();
        assert_eq!(st.r_prime, 3);
        // values beyond r′ above the threshold are still returned
        assert_eq!(f.rank(), 3);
        assert!((f.s[2] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn factored_operand_with_sparse_addend() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let base = randn_complex(&mut rng, 6 * 5);
        let op = DenseMatrix::new(6, 5, &base).unwrap();
        let (mut f, _) = top_svd(&op, 2, &SvdOptions::default()).unwrap();
        assert!(f.orthonormality_error() < 1e-8);
        f.sparse.push((1, 3, C64::new(2.0, -1.0)));
        let dense = f.to_dense();
        let dm = DenseMatrix::new(6, 5, &dense).unwrap();
        let x = randn_complex(&mut rng, 5);
        let y = randn_complex(&mut rng, 6);
        let (a, b) = (f.mul(&x), dm.mul(&x));
        let (c, d) = (f.mul_adjoint(&y), dm.mul_adjoint(&y));
        assert!(a.iter().zip(&b).all(|(p, q)| (p - q).norm() < 1e-12));
        assert!(c.iter().zip(&d).all(|(p, q)| (p - q).norm() < 1e-12));
    }

    #[test]
    fn svt_matches_dense_on_rank_deficient_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = randn_complex(&mut rng, 12 * 2);
        let r = randn_complex(&mut rng, 9 * 2);
        let mut m = vec![C64::new(0.0, 0.0); 12 * 9];
        for j in 0..9 {
            for i in 0..12 {
                m[i + 12 * j] = l[i] * r[j].conj() + l[12 + i] * r[9 + j].conj();
            }
        }
        let op = DenseMatrix::new(12, 9, &m).unwrap();
        let (f, _) = svt_step(&op, 0.5, RankState::new(5), &SvdOptions::default()).unwrap();
        let expect = dense_svt(12, 9, &m, 0.5).unwrap();
        let got = f.to_dense();
        let err: f64 = got.iter().zip(&expect).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn exactly_low_rank_operand() {
        // Krylov breakdown after r steps leaves a tiny but nonzero diagonal entry
        let (m, n, r) = (60, 70, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for scale in [1e2, 1e4, 1e7] {
            for tol in [1e-8, 1e-10, 1e-12, 1e-14] {
                let u = randn_complex(&mut rng, m * r);
                let v = randn_complex(&mut rng, n * r);
                let mut x = vec![C64::new(0.0, 0.0); m * n];
                for k in 0..r {
                    let s = scale * (1.0 - 0.1 * k as f64) / ((m * n) as f64).sqrt();
                    for j in 0..n {
                        for i in 0..m {
                            x[i + m * j] += u[i + m * k] * v[j + n * k].conj() * s;
                        }
                    }
                }
                let reference = dense_svt(m, n, &x, 0.99).unwrap();
                let op = DenseMatrix::new(m, n, &x).unwrap();
                let (f, _) = svt_step(&op, 0.99, RankState::new(r + 1), &SvdOptions { tol, seed: 3 }).unwrap();
                let err = crate::vector::dist(&f.to_dense(), &reference) / norm2(&reference);
                assert!(err < 1e-11, "scale {scale} tol {tol}: {err}");
            }
        }
    }

    #[test]
    fn ritz_svd_on_graded_bidiagonal() {
        // produced by Lanczos on an exactly rank-5 200×220 matrix
        let alpha = [1315.5063766688777, 2103.6583247473404, 3723.738404085954, 867.8941617041007, 851.6381038077362, 2.3536698553248058e-09, 0.0, 0.0];
        let beta = [7975.423364573778, 6523.471776842232, 8072.849094783106, 7409.007819607543, 6888.667701185552, 0.0, 0.0];
        let k = alpha.len();
        let mut b = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            b[(i, i)] = alpha[i];
            if i + 1 < k {
                b[(i, i + 1)] = beta[i];
            }
        }
        let (sig, p, q) = jacobi_svd(&b);
        let rec = &p * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(sig.clone())) * q.transpose();
        assert!((rec - &b).norm() < 1e-10 * b.norm());
        assert!(sig.windows(2).all(|w| w[0] >= w[1]));
        let ptp = p.transpose() * &p;
        assert!((ptp - DMatrix::<f64>::identity(k, k)).norm() < 1e-12);
    }
}
