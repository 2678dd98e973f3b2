use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::vector::C64;

/// Grid shape; `cols == 1` for one-dimensional signals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
}

impl Shape {
    pub fn new(rows: usize, cols: usize) -> Self {
        Shape { rows, cols }
    }

    pub fn line(n: usize) -> Self {
        Shape { rows: n, cols: 1 }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Unitary 2-D DFT on a column-major grid.
pub struct DftPlan {
    shape: Shape,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DftPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DftPlan").field("shape", &self.shape).finish()
    }
}

impl DftPlan {
    pub fn new(shape: Shape) -> Self {
        let mut planner = FftPlanner::new();
        DftPlan {
            shape,
            col_fwd: planner.plan_fft_forward(shape.rows),
            col_inv: planner.plan_fft_inverse(shape.rows),
            row_fwd: planner.plan_fft_forward(shape.cols),
            row_inv: planner.plan_fft_inverse(shape.cols),
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn forward(&self, buf: &mut [C64]) {
        self.run(buf, &self.col_fwd, &self.row_fwd);
    }

    pub fn inverse(&self, buf: &mut [C64]) {
        self.run(buf, &self.col_inv, &self.row_inv);
    }

    fn run(&self, buf: &mut [C64], col: &Arc<dyn Fft<f64>>, row: &Arc<dyn Fft<f64>>) {
        let Shape { rows, cols } = self.shape;
        if rows > 1 {
            col.process(buf);
        }
        if cols > 1 {
            let mut t = transpose(buf, rows, cols);
            row.process(&mut t);
            let back = transpose(&t, cols, rows);
            buf.copy_from_slice(&back);
        }
        let s = 1.0 / ((rows * cols) as f64).sqrt();
        buf.iter_mut().for_each(|v| *v *= s);
    }
}

/// Column-major `rows × cols` to column-major `cols × rows`.
fn transpose(x: &[C64], rows: usize, cols: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); x.len()];
    for j in 0..cols {
        for i in 0..rows {
            out[j + cols * i] = x[i + rows * j];
        }
    }
    out
}

/// Unnormalized in-place Walsh–Hadamard transform in natural (Kronecker) order.
pub fn fwht_in_place(x: &mut [C64]) {
    let n = x.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for i in start..start + h {
                let (a, b) = (x[i], x[i + h]);
                x[i] = a + b;
                x[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Sequency (number of sign changes) of row `k` of the natural-order Hadamard matrix of size `n`.
pub fn sequency_rank(k: usize, n: usize) -> usize {
    let bits = n.trailing_zeros();
    let rev = if bits == 0 {
        0
    } else {
        k.reverse_bits() >> (usize::BITS - bits)
    };
    // inverse Gray code
    let mut s = rev;
    let mut shift = rev >> 1;
    while shift != 0 {
        s ^= shift;
        shift >>= 1;
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletFilter {
    Haar,
    Db2,
}

pub fn db2_taps() -> [f64; 4] {
    let r3 = 3f64.sqrt();
    let d = 4.0 * 2f64.sqrt();
    [(1.0 + r3) / d, (3.0 + r3) / d, (3.0 - r3) / d, (1.0 - r3) / d]
}

impl WaveletFilter {
    fn lowpass(&self) -> Vec<f64> {
        match self {
            WaveletFilter::Haar => vec![std::f64::consts::FRAC_1_SQRT_2; 2],
            WaveletFilter::Db2 => db2_taps().to_vec(),
        }
    }

    /// Quadrature mirror pair (h, g) with g_k = (−1)^k h_{L−1−k}.
    fn pair(&self) -> (Vec<f64>, Vec<f64>) {
        let h = self.lowpass();
        let l = h.len();
        let g = (0..l)
            .map(|k| if k % 2 == 0 { h[l - 1 - k] } else { -h[l - 1 - k] })
            .collect();
        (h, g)
    }
}

/// One periodic analysis step on `src` (even length): writes [approx | detail] to `dst`.
fn analysis_step(src: &[C64], dst: &mut [C64], h: &[f64], g: &[f64]) {
    let n = src.len();
    let half = n / 2;
    for i in 0..half {
        let mut a = C64::new(0.0, 0.0);
        let mut d = C64::new(0.0, 0.0);
        for (k, (&hk, &gk)) in h.iter().zip(g).enumerate() {
            let v = src[(2 * i + k) % n];
            a += v * hk;
            d += v * gk;
        }
        dst[i] = a;
        dst[half + i] = d;
    }
}

fn synthesis_step(src: &[C64], dst: &mut [C64], h: &[f64], g: &[f64]) {
    let n = src.len();
    let half = n / 2;
    dst.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
    for i in 0..half {
        let (a, d) = (src[i], src[half + i]);
        for (k, (&hk, &gk)) in h.iter().zip(g).enumerate() {
            dst[(2 * i + k) % n] += a * hk + d * gk;
        }
    }
}

/// Apply a 1-D step to every column (length `r`) and then every row (length `c`)
/// of the top-left `r × c` block of a column-major `rows`-tall array.
fn block_pass(
    data: &mut [C64],
    rows: usize,
    r: usize,
    c: usize,
    step: &dyn Fn(&[C64], &mut [C64]),
) {
    let mut src = vec![C64::new(0.0, 0.0); r.max(c)];
    let mut dst = src.clone();
    if r > 1 {
        for j in 0..c {
            src[..r].copy_from_slice(&data[rows * j..rows * j + r]);
            step(&src[..r], &mut dst[..r]);
            data[rows * j..rows * j + r].copy_from_slice(&dst[..r]);
        }
    }
    if c > 1 {
        for i in 0..r {
            for j in 0..c {
                src[j] = data[i + rows * j];
            }
            step(&src[..c], &mut dst[..c]);
            for j in 0..c {
                data[i + rows * j] = dst[j];
            }
        }
    }
}

pub(crate) fn dwt_forward(x: &[C64], shape: Shape, levels: usize, filter: WaveletFilter) -> Vec<C64> {
    let (h, g) = filter.pair();
    let step = |s: &[C64], d: &mut [C64]| analysis_step(s, d, &h, &g);
    let mut out = x.to_vec();
    let (mut r, mut c) = (shape.rows, shape.cols);
    for _ in 0..levels {
        block_pass(&mut out, shape.rows, r, c, &step);
        r = if r > 1 { r / 2 } else { 1 };
        c = if c > 1 { c / 2 } else { 1 };
    }
    out
}

pub(crate) fn dwt_inverse(y: &[C64], shape: Shape, levels: usize, filter: WaveletFilter) -> Vec<C64> {
    let (h, g) = filter.pair();
    let mut out = y.to_vec();
    let sizes: Vec<(usize, usize)> = (0..levels)
        .scan((shape.rows, shape.cols), |st, _| {
            let cur = *st;
            st.0 = if st.0 > 1 { st.0 / 2 } else { 1 };
            st.1 = if st.1 > 1 { st.1 / 2 } else { 1 };
            Some(cur)
        })
        .collect();
    for &(r, c) in sizes.iter().rev() {
        // rows first on the way back, then columns
        let mut src = vec![C64::new(0.0, 0.0); r.max(c)];
        let mut dst = src.clone();
        if c > 1 {
            for i in 0..r {
                for j in 0..c {
                    src[j] = out[i + shape.rows * j];
                }
                synthesis_step(&src[..c], &mut dst[..c], &h, &g);
                for j in 0..c {
                    out[i + shape.rows * j] = dst[j];
                }
            }
        }
        if r > 1 {
            for j in 0..c {
                let base = shape.rows * j;
                src[..r].copy_from_slice(&out[base..base + r]);
                synthesis_step(&src[..r], &mut dst[..r], &h, &g);
                out[base..base + r].copy_from_slice(&dst[..r]);
            }
        }
    }
    out
}

/// Scale label of each wavelet coefficient: 0 for the coarsest approximation,
/// `l` (1 = coarsest detail) for detail bands. Labels partition the coefficients.
pub fn dwt_scale_groups(shape: Shape, levels: usize) -> Vec<usize> {
    let mut label = vec![0usize; shape.len()];
    let (mut r, mut c) = (shape.rows, shape.cols);
    for lvl in 0..levels {
        let (hr, hc) = (if r > 1 { r / 2 } else { 1 }, if c > 1 { c / 2 } else { 1 });
        for j in 0..c {
            for i in 0..r {
                if i >= hr || j >= hc {
                    label[i + shape.rows * j] = levels - lvl;
                }
            }
        }
        r = hr;
        c = hc;
    }
    label
}

pub(crate) fn gradient_forward(x: &[C64], shape: Shape) -> Vec<C64> {
    let Shape { rows, cols } = shape;
    let n = rows * cols;
    let mut out = vec![C64::new(0.0, 0.0); 2 * n];
    for j in 0..cols {
        let jn = (j + 1) % cols;
        for i in 0..rows {
            let inext = (i + 1) % rows;
            let v = x[i + rows * j];
            out[i + rows * j] = x[inext + rows * j] - v;
            out[n + i + rows * j] = x[i + rows * jn] - v;
        }
    }
    out
}

pub(crate) fn gradient_adjoint(y: &[C64], shape: Shape) -> Vec<C64> {
    let Shape { rows, cols } = shape;
    let n = rows * cols;
    let (y1, y2) = y.split_at(n);
    let mut out = vec![C64::new(0.0, 0.0); n];
    for j in 0..cols {
        let jp = (j + cols - 1) % cols;
        for i in 0..rows {
            let ip = (i + rows - 1) % rows;
            out[i + rows * j] =
                y1[ip + rows * j] - y1[i + rows * j] + y2[i + rows * jp] - y2[i + rows * j];
        }
    }
    out
}

/// ‖∇‖ from the Fourier symbol: max over frequencies of 4 sin²(πk/rows) + 4 sin²(πl/cols).
pub(crate) fn gradient_norm(shape: Shape) -> f64 {
    let axis = |n: usize| {
        (0..n)
            .map(|k| 4.0 * (PI * k as f64 / n as f64).sin().powi(2))
            .fold(0.0, f64::max)
    };
    (axis(shape.rows) + axis(shape.cols)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{LinearOp, SamplingMask};
    use crate::vector::{norm2, randn_complex};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn dft_two_point_and_dc_row() {
        let op = LinearOp::subsampled_dft(Shape::line(2), SamplingMask::full(2)).unwrap();
        let y = op.apply(&[r(1.0), r(1.0)]).unwrap();
        assert!((y[0] - r(2f64.sqrt())).norm() < 1e-15 && y[1].norm() < 1e-15);
        let op = LinearOp::subsampled_dft(
            Shape::line(4),
            SamplingMask::from_indices(4, vec![0]).unwrap(),
        )
        .unwrap();
        let y = op.apply(&[r(1.0), r(0.0), r(0.0), r(0.0)]).unwrap();
        assert!((y[0] - r(0.5)).norm() < 1e-15);
    }

    #[test]
    fn dft_matches_direct_sum_2d() {
        let shape = Shape::new(4, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = randn_complex(&mut rng, 32);
        let op = LinearOp::subsampled_dft(shape, SamplingMask::full(32)).unwrap();
        let y = op.apply(&x).unwrap();
        for k1 in 0..4 {
            for k2 in 0..8 {
                let mut acc = C64::new(0.0, 0.0);
                for n1 in 0..4 {
                    for n2 in 0..8 {
                        let ph = -2.0 * PI * ((k1 * n1) as f64 / 4.0 + (k2 * n2) as f64 / 8.0);
                        acc += x[n1 + 4 * n2] * C64::from_polar(1.0, ph);
                    }
                }
                acc /= 32f64.sqrt();
                assert!((acc - y[k1 + 4 * k2]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn wht_examples() {
        let op = LinearOp::subsampled_wht(2, SamplingMask::full(2)).unwrap();
        let y = op.apply(&[r(1.0), r(1.0)]).unwrap();
        assert!((y[0] - r(2f64.sqrt())).norm() < 1e-15 && y[1].norm() < 1e-15);
        // second row of natural-order H₄ is (1,−1,1,−1)
        let op = LinearOp::subsampled_wht(4, SamplingMask::from_indices(4, vec![1]).unwrap()).unwrap();
        let y = op.apply(&[r(1.0), r(-1.0), r(1.0), r(-1.0)]).unwrap();
        assert!((y[0] - r(2.0)).norm() < 1e-15);
    }

    #[test]
    fn wht_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = randn_complex(&mut rng, 64);
        let op = LinearOp::subsampled_wht(64, SamplingMask::full(64)).unwrap();
        let back = op.adjoint(&op.apply(&x).unwrap()).unwrap();
        let twice = op.apply(&op.apply(&x).unwrap()).unwrap();
        for i in 0..64 {
            assert!((back[i] - x[i]).norm() < 1e-12);
            assert!((twice[i] - x[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn sequency_counts_sign_changes() {
        let n = 16;
        let mut seen = vec![false; n];
        for k in 0..n {
            let mut e = vec![r(0.0); n];
            e[k] = r(1.0);
            fwht_in_place(&mut e); // row k of H (H is symmetric)
            let changes = e.windows(2).filter(|w| w[0].re * w[1].re < 0.0).count();
            assert_eq!(sequency_rank(k, n), changes);
            seen[changes] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn haar_one_level_example() {
        let op = LinearOp::dwt(Shape::line(4), 1, WaveletFilter::Haar).unwrap();
        let y = op.apply(&[r(1.0), r(1.0), r(0.0), r(0.0)]).unwrap();
        let expect = [2f64.sqrt(), 0.0, 0.0, 0.0];
        for (a, b) in y.iter().zip(expect) {
            assert!((a - r(b)).norm() < 1e-15);
        }
    }

    #[test]
    fn db2_orthonormality_identities() {
        let h = db2_taps();
        assert!((h.iter().sum::<f64>() - 2f64.sqrt()).abs() < 1e-15);
        let e: f64 = h.iter().map(|v| v * v).sum();
        assert!((e - 1.0).abs() < 1e-15);
        let shift2 = h[0] * h[2] + h[1] * h[3];
        assert!(shift2.abs() < 1e-15);
    }

    #[test]
    fn dwt_round_trip_and_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (shape, levels) in [(Shape::line(32), 3), (Shape::new(16, 8), 2), (Shape::new(8, 8), 3)] {
            for filter in [WaveletFilter::Haar, WaveletFilter::Db2] {
                let op = LinearOp::dwt(shape, levels, filter).unwrap();
                let x = randn_complex(&mut rng, shape.len());
                let y = op.apply(&x).unwrap();
                assert!((norm2(&y) - norm2(&x)).abs() < 1e-12 * norm2(&x));
                let back = op.adjoint(&y).unwrap();
                for i in 0..x.len() {
                    assert!((back[i] - x[i]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dwt_rejects_indivisible_sizes() {
        assert!(LinearOp::dwt(Shape::line(12), 3, WaveletFilter::Haar).is_err());
    }

    #[test]
    fn scale_groups_partition() {
        let g = dwt_scale_groups(Shape::line(8), 2);
        assert_eq!(g, vec![0, 0, 1, 1, 2, 2, 2, 2]);
        let g2 = dwt_scale_groups(Shape::new(4, 4), 1);
        assert_eq!(g2.iter().filter(|&&v| v == 0).count(), 4);
    }

    #[test]
    fn gradient_examples() {
        let op = LinearOp::periodic_gradient(2).unwrap();
        // X = [[1,2],[3,4]] column-major
        let x = [r(1.0), r(3.0), r(2.0), r(4.0)];
        let y = op.apply(&x).unwrap();
        assert_eq!(y.len(), 8);
        // ∇₁ at (1,1): X₂₁ − X₁₁ = 2; the ∇₁ block reads (2,−2,2,−2) column-major
        assert_eq!(&y[..4], &[r(2.0), r(-2.0), r(2.0), r(-2.0)]);
        let cst = op.apply(&[r(5.0); 4]).unwrap();
        assert!(cst.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn gradient_norm_bound() {
        for side in [2, 3, 8, 9] {
            let op = LinearOp::periodic_gradient(side).unwrap();
            let exact = op.norm();
            assert!(exact <= 8f64.sqrt() + 1e-12);
            let est = crate::linops::estimate_norm(&op, 20000, 1e-12).value;
            assert!((est - exact).abs() < 1e-3 * exact, "{side}: {est} vs {exact}");
        }
    }
}
