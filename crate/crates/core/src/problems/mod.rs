//! Problem instances: builders for each experiment family, noise, the scale-wise
//! reweighting rule, error metrics and file formats.

pub mod io;
pub mod metrics;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linops::{random_pauli_strings, LinearOp, SamplingMask, Shape, WaveletFilter};
use crate::prox::{Regularizer, SvdEngine};
use crate::vector::{dist, norm2, randn_complex, randn_real, real, C64};

pub use metrics::{error_metric_nuclear, error_metric_sparse, objective_error, relative_error};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Dense,
    SparseGaussian,
    SparseFourier,
    SparseWalsh,
    LowrankPauli,
    MatrixCompletion,
    Tv,
    MixedAnalysisTv,
}

#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub family: Family,
    pub a: LinearOp,
    pub b_op: Option<LinearOp>,
    pub j: Regularizer,
    pub b: Vec<C64>,
    pub truth: Option<Vec<C64>>,
    /// Requested ‖e‖/‖Aϰ‖.
    pub noise_level: f64,
    /// Realized ‖b − Aϰ‖.
    pub noise_norm: f64,
    /// Image grid or matrix dimensions of the unknown, when it has one.
    pub shape: Option<Shape>,
}

impl ProblemInstance {
    pub fn q(&self) -> usize {
        self.b_op.as_ref().map_or(0, |o| o.n_out())
    }

    pub fn n(&self) -> usize {
        self.a.n_in()
    }

    /// Whether the ground truth is feasible for the constraint radius `epsilon`.
    pub fn truth_feasible(&self, epsilon: f64) -> Result<bool> {
        match &self.truth {
            Some(t) => Ok(dist(&self.a.apply(t)?, &self.b) <= epsilon * (1.0 + 1e-12)),
            None => Ok(true),
        }
    }
}

/// Partition of coefficient indices into groups (wavelet scales, frame bands).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupIndex {
    labels: Vec<usize>,
    sizes: Vec<usize>,
}

impl GroupIndex {
    pub fn from_labels(labels: Vec<usize>) -> Self {
        let g = labels.iter().max().map_or(0, |m| m + 1);
        let mut sizes = vec![0; g];
        for &l in &labels {
            sizes[l] += 1;
        }
        GroupIndex { labels, sizes }
    }

    pub fn single(n: usize) -> Self {
        Self::from_labels(vec![0; n])
    }

    /// Concatenation; labels of `other` are shifted past ours.
    pub fn concat(&self, other: &GroupIndex) -> Self {
        let off = self.sizes.len();
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().map(|l| l + off));
        Self::from_labels(labels)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_groups(&self) -> usize {
        self.sizes.iter().filter(|&&s| s > 0).count()
    }
}

/// Adds noise rescaled so that ‖e‖ = level·‖clean‖ exactly. Returns (b, ‖e‖).
pub fn add_noise<R: Rng + ?Sized>(clean: &[C64], level: f64, complex: bool, rng: &mut R) -> Result<(Vec<C64>, f64)> {
    if !(level >= 0.0 && level.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise level {level}")));
    }
    if level == 0.0 || clean.is_empty() {
        return Ok((clean.to_vec(), 0.0));
    }
    let e = if complex {
        randn_complex(rng, clean.len())
    } else {
        randn_real(rng, clean.len())
    };
    let target = level * norm2(clean);
    let c = target / norm2(&e);
    let b = clean.iter().zip(&e).map(|(x, n)| x + n * c).collect();
    Ok((b, target))
}

/// Random s-sparse vector with standard Gaussian nonzeros.
pub fn sparse_vector<R: Rng + ?Sized>(n: usize, s: usize, complex: bool, rng: &mut R) -> Result<Vec<C64>> {
    if s > n {
        return Err(Error::InvalidParameter(format!("sparsity {s} exceeds dimension {n}")));
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    let vals = if complex { randn_complex(rng, s) } else { randn_real(rng, s) };
    for (i, v) in rand::seq::index::sample(rng, n, s).iter().zip(vals) {
        x[i] = v;
    }
    Ok(x)
}

/// Real Gaussian `m × n` matrix with N(0, 1/m) entries, row-major.
pub fn gaussian_matrix<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Vec<f64> {
    let s = 1.0 / (m as f64).sqrt();
    randn_real(rng, m * n).iter().map(|v| v.re * s).collect()
}

/// Gaussian measurements of an s-sparse vector, J = ℓ¹.
pub fn build_sparse_gaussian(m: usize, n: usize, s: usize, noise: f64, seed: u64) -> Result<ProblemInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = LinearOp::dense_real(m, n, &gaussian_matrix(m, n, &mut rng))?;
    let truth = sparse_vector(n, s, false, &mut rng)?;
    let (b, noise_norm) = add_noise(&a.apply(&truth)?, noise, false, &mut rng)?;
    Ok(ProblemInstance {
        family: Family::SparseGaussian,
        a,
        b_op: None,
        j: Regularizer::l1(n),
        b,
        truth: Some(truth),
        noise_level: noise,
        noise_norm,
        shape: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    Fourier,
    Walsh,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SparseTruth {
    Given(Vec<C64>),
    /// s random nonzero wavelet coefficients.
    Random { s: usize },
}

/// Subsampled unitary measurements A = P_mask·V·Ψ* of wavelet coefficients, J = weighted ℓ¹
/// (unit weights). The unknown is the coefficient vector of a length-`n` signal.
#[allow(clippy::too_many_arguments)]
pub fn build_sparse_cs(
    n: usize,
    sampling: Sampling,
    mask: SamplingMask,
    wavelet: WaveletFilter,
    levels: usize,
    truth: SparseTruth,
    noise: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let synth = LinearOp::adjoint_op(LinearOp::dwt(Shape::line(n), levels, wavelet)?);
    let v = match sampling {
        Sampling::Fourier => LinearOp::subsampled_dft(Shape::line(n), mask)?,
        Sampling::Walsh => LinearOp::subsampled_wht(n, mask)?,
    };
    let a = LinearOp::compose(v, synth)?;
    let truth = match truth {
        SparseTruth::Given(t) => {
            check_len(n, t.len())?;
            t
        }
        SparseTruth::Random { s } => sparse_vector(n, s, false, &mut rng)?,
    };
    let (b, noise_norm) = add_noise(&a.apply(&truth)?, noise, true, &mut rng)?;
    Ok(ProblemInstance {
        family: match sampling {
            Sampling::Fourier => Family::SparseFourier,
            Sampling::Walsh => Family::SparseWalsh,
        },
        a,
        b_op: None,
        j: Regularizer::l1(n),
        b,
        truth: Some(truth),
        noise_level: noise,
        noise_norm,
        shape: Some(Shape::line(n)),
    })
}

/// M = M̃/tr(M̃) with M̃ = M_L M_R* M_R M_L*, M_L, M_R complex Gaussian n×r; column-major.
pub fn random_density_matrix<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Vec<C64> {
    let ml = randn_complex(rng, n * r);
    let mr = randn_complex(rng, n * r);
    // G = M_R* M_R (r×r), then K = M_L G, M̃ = K M_L*
    let mut g = vec![C64::new(0.0, 0.0); r * r];
    for a in 0..r {
        for b in 0..r {
            g[a + r * b] = (0..n).map(|i| mr[i + n * a].conj() * mr[i + n * b]).sum();
        }
    }
    let mut k = vec![C64::new(0.0, 0.0); n * r];
    for b in 0..r {
        for i in 0..n {
            k[i + n * b] = (0..r).map(|a| ml[i + n * a] * g[a + r * b]).sum();
        }
    }
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..n {
            m[i + n * j] = (0..r).map(|a| k[i + n * a] * ml[j + n * a].conj()).sum();
        }
    }
    let tr: f64 = (0..n).map(|i| m[i + n * i].re).sum();
    m.iter().map(|v| v / tr).collect()
}

/// Random Pauli measurements of a rank-r density matrix on `qubits` qubits; J = nuclear norm.
pub fn build_lowrank_pauli(qubits: usize, r: usize, m: usize, noise: f64, seed: u64) -> Result<ProblemInstance> {
    if qubits == 0 || qubits > 12 {
        return Err(Error::InvalidParameter(format!("qubit count {qubits} outside 1..=12")));
    }
    let n = 1usize << qubits;
    if r == 0 || r > n {
        return Err(Error::InvalidParameter(format!("rank {r} outside 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = random_density_matrix(n, r, &mut rng);
    let strings = random_pauli_strings(qubits, m, rng.random())?;
    let a = LinearOp::pauli_measurement(qubits, &strings)?;
    let (b, noise_norm) = add_noise(&a.apply(&truth)?, noise, true, &mut rng)?;
    Ok(ProblemInstance {
        family: Family::LowrankPauli,
        a,
        b_op: None,
        j: Regularizer::nuclear(n, n, SvdEngine::Lanczos),
        b,
        truth: Some(truth),
        noise_level: noise,
        noise_norm,
        shape: Some(Shape::new(n, n)),
    })
}

/// Real rank-r `n1 × n2` matrix M_L M_Rᵀ observed on a Bernoulli(p) mask; J = nuclear norm.
pub fn build_matrix_completion(n1: usize, n2: usize, r: usize, p: f64, noise: f64, seed: u64) -> Result<ProblemInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ml = randn_real(&mut rng, n1 * r);
    let mr = randn_real(&mut rng, n2 * r);
    let mut truth = vec![C64::new(0.0, 0.0); n1 * n2];
    for j in 0..n2 {
        for i in 0..n1 {
            truth[i + n1 * j] = C64::new((0..r).map(|a| ml[i + n1 * a].re * mr[j + n2 * a].re).sum(), 0.0);
        }
    }
    let mask = SamplingMask::bernoulli(n1 * n2, p, rng.random())?;
    let a = LinearOp::mask_projection(n1 * n2, mask.indices().to_vec())?;
    let (b, noise_norm) = add_noise(&a.apply(&truth)?, noise, false, &mut rng)?;
    Ok(ProblemInstance {
        family: Family::MatrixCompletion,
        a,
        b_op: None,
        j: Regularizer::nuclear(n1, n2, SvdEngine::Lanczos),
        b,
        truth: Some(truth),
        noise_level: noise,
        noise_norm,
        shape: Some(Shape::new(n1, n2)),
    })
}

/// Masked orthonormal 2-D DFT of an image with B = periodic gradient, J = 0.
pub fn build_tv(image: &[f64], shape: Shape, mask: SamplingMask, noise: f64, seed: u64) -> Result<ProblemInstance> {
    check_len(shape.len(), image.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = LinearOp::subsampled_dft(shape, mask)?;
    let truth = real(image);
    let (b, noise_norm) = add_noise(&a.apply(&truth)?, noise, true, &mut rng)?;
    Ok(ProblemInstance {
        family: Family::Tv,
        a,
        b_op: Some(LinearOp::periodic_gradient_shape(shape)?),
        j: Regularizer::zero(shape.len()),
        b,
        truth: Some(truth),
        noise_level: noise,
        noise_norm,
        shape: Some(shape),
    })
}

/// B = [W·D*; λ∇] for an analysis operator `frame` (D*), weights W and TV weight λ.
pub fn mixed_operator(frame: &LinearOp, weights: &[f64], tv_weight: f64, shape: Shape) -> Result<LinearOp> {
    check_len(frame.n_out(), weights.len())?;
    check_len(shape.len(), frame.n_in())?;
    LinearOp::stack(vec![
        LinearOp::compose(LinearOp::diagonal(weights.to_vec()), frame.clone())?,
        LinearOp::scale(tv_weight, LinearOp::periodic_gradient_shape(shape)?),
    ])
}

/// TV instance with B replaced by the weighted analysis-plus-TV stack.
#[allow(clippy::too_many_arguments)]
pub fn build_mixed(
    image: &[f64],
    shape: Shape,
    mask: SamplingMask,
    frame: &LinearOp,
    weights: &[f64],
    tv_weight: f64,
    noise: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    let mut inst = build_tv(image, shape, mask, noise, seed)?;
    inst.family = Family::MixedAnalysisTv;
    inst.b_op = Some(mixed_operator(frame, weights, tv_weight, shape)?);
    Ok(inst)
}

/// W_jj = mean_{k∈I(j)} max(|(D*x)_k|, floor) / max(|(D*x)_j|, floor), with D* = `analysis`.
pub fn reweight_update(x: &[C64], analysis: &LinearOp, groups: &GroupIndex, floor: f64) -> Result<Vec<f64>> {
    if !(floor > 0.0) {
        return Err(Error::InvalidParameter(format!("reweighting floor {floor} must be positive")));
    }
    let c = analysis.apply(x)?;
    check_len(c.len(), groups.len())?;
    let mags: Vec<f64> = c.iter().map(|v| v.norm().max(floor)).collect();
    let mut sum = vec![0.0; groups.sizes.len()];
    for (m, &l) in mags.iter().zip(&groups.labels) {
        sum[l] += m;
    }
    Ok(mags
        .iter()
        .zip(&groups.labels)
        .map(|(m, &l)| sum[l] / groups.sizes[l] as f64 / m)
        .collect())
}

/// Seeded piecewise-constant phantom in [0, 1] on an `n × n` grid (column-major):
/// a large ellipse with smaller ellipses and rectangles painted inside it.
pub fn phantom(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = vec![0.0; n * n];
    let nf = n as f64;
    let c = (nf - 1.0) / 2.0;
    let paint_ellipse = |img: &mut [f64], cy: f64, cx: f64, ry: f64, rx: f64, v: f64| {
        for j in 0..n {
            for i in 0..n {
                let (dy, dx) = ((i as f64 - cy) / ry, (j as f64 - cx) / rx);
                if dy * dy + dx * dx <= 1.0 {
                    img[i + n * j] = v;
                }
            }
        }
    };
    paint_ellipse(&mut img, c, c, 0.42 * nf, 0.34 * nf, 0.5);
    for k in 0..6 {
        let cy = c + rng.random_range(-0.22..0.22) * nf;
        let cx = c + rng.random_range(-0.16..0.16) * nf;
        let ry = rng.random_range(0.05..0.14) * nf;
        let rx = rng.random_range(0.05..0.12) * nf;
        let v = rng.random_range(1..=10) as f64 / 10.0;
        if k % 2 == 0 {
            paint_ellipse(&mut img, cy, cx, ry, rx, v);
        } else {
            for j in 0..n {
                for i in 0..n {
                    if (i as f64 - cy).abs() <= ry && (j as f64 - cx).abs() <= rx {
                        img[i + n * j] = v;
                    }
                }
            }
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::dwt_scale_groups;
    use crate::partial_svd::dense_singular_values;

    #[test]
    fn reweight_examples() {
        let id = LinearOp::identity(2);
        let g = GroupIndex::single(2);
        let w = reweight_update(&real(&[1.0, 3.0]), &id, &g, 1e-12).unwrap();
        assert!((w[0] - 2.0).abs() < 1e-15 && (w[1] - 2.0 / 3.0).abs() < 1e-15);
        let w = reweight_update(&real(&[5.0, -5.0]), &id, &g, 1e-5).unwrap();
        assert_eq!(w, vec![1.0, 1.0]);
        // below the floor: both sides clamp
        let w = reweight_update(&real(&[0.0, 1e-9]), &id, &g, 1e-5).unwrap();
        assert_eq!(w, vec![1.0, 1.0]);
        let w = reweight_update(&real(&[0.0, 2e-5]), &id, &g, 1e-5).unwrap();
        assert!((w[0] - 1.5).abs() < 1e-12 && (w[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn noise_has_exact_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let clean = randn_complex(&mut rng, 50);
        let (b, e) = add_noise(&clean, 0.05, true, &mut rng).unwrap();
        assert!((dist(&b, &clean) / norm2(&clean) - 0.05).abs() < 1e-12);
        assert!((e - 0.05 * norm2(&clean)).abs() < 1e-12);
    }

    #[test]
    fn sparse_cs_full_mask_is_isometric() {
        for sampling in [Sampling::Fourier, Sampling::Walsh] {
            let inst = build_sparse_cs(
                64,
                sampling,
                SamplingMask::full(64),
                WaveletFilter::Db2,
                3,
                SparseTruth::Random { s: 6 },
                0.0,
                11,
            )
            .unwrap();
            let t = inst.truth.as_ref().unwrap();
            assert!((norm2(&inst.b) - norm2(t)).abs() < 1e-12);
            assert_eq!(t.iter().filter(|v| v.norm() > 0.0).count(), 6);
            let again = build_sparse_cs(64, sampling, SamplingMask::full(64), WaveletFilter::Db2, 3,
                SparseTruth::Random { s: 6 }, 0.0, 11).unwrap();
            assert_eq!(again.b, inst.b);
        }
    }

    #[test]
    fn pauli_truth_is_normalized_rank_r() {
        let inst = build_lowrank_pauli(3, 2, 30, 0.0, 5).unwrap();
        let t = inst.truth.as_ref().unwrap();
        let tr: C64 = (0..8).map(|i| t[i + 8 * i]).sum();
        assert!((tr - C64::new(1.0, 0.0)).norm() < 1e-12);
        let sv = dense_singular_values(8, 8, t).unwrap();
        assert_eq!(sv.iter().filter(|s| **s > 1e-10 * sv[0]).count(), 2);
        assert_eq!(inst.q(), 0);
        assert!(inst.truth_feasible(0.0).unwrap());
    }

    #[test]
    fn matrix_completion_mask_size() {
        let (n1, n2, p) = (40, 60, 0.3);
        let inst = build_matrix_completion(n1, n2, 3, p, 0.0, 9).unwrap();
        let m = inst.b.len() as f64;
        let nn = (n1 * n2) as f64;
        assert!((m - p * nn).abs() <= 4.0 * (nn * p * (1.0 - p)).sqrt());
        let t = inst.truth.as_ref().unwrap();
        let pa = inst.a.adjoint(&inst.a.apply(t).unwrap()).unwrap();
        assert_eq!(inst.a.apply(&pa).unwrap(), inst.b);
    }

    #[test]
    fn tv_instance_shapes() {
        let n = 16;
        let img = phantom(n, 1);
        assert!(img.iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(img, phantom(n, 1));
        let shape = Shape::new(n, n);
        let mask = SamplingMask::inverse_square(shape, 80, 2).unwrap();
        let inst = build_tv(&img, shape, mask.clone(), 0.0, 3).unwrap();
        assert_eq!(inst.q(), 2 * n * n);
        let flat = real(&vec![0.7; n * n]);
        let tv: f64 = inst.b_op.as_ref().unwrap().apply(&flat).unwrap().iter().map(|v| v.norm()).sum();
        assert!(tv < 1e-12);

        let dwt = LinearOp::dwt(shape, 2, WaveletFilter::Haar).unwrap();
        let zero = build_mixed(&img, shape, mask, &dwt, &vec![0.0; n * n], 1.0, 0.0, 3).unwrap();
        let x = real(&img);
        let bz = zero.b_op.as_ref().unwrap().apply(&x).unwrap();
        let bt = inst.b_op.as_ref().unwrap().apply(&x).unwrap();
        assert_eq!(zero.q(), 3 * n * n);
        assert!(bz[..n * n].iter().all(|v| v.norm() == 0.0));
        assert_eq!(&bz[n * n..], &bt[..]);
        let g = GroupIndex::from_labels(dwt_scale_groups(shape, 2));
        assert_eq!(g.n_groups(), 3);
    }
}
