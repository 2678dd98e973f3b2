//! Sharpness constants (C₁, C₂) and approximation-term recipes for each problem
//! family, plus a brute-force null space property estimator for small matrices.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Local sparsities s_k over levels [M_{k−1}, M_k) with level weights w_(k).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparsityPattern {
    /// Level end points M₁ < … < M_r = N.
    pub m_levels: Vec<usize>,
    pub s_levels: Vec<usize>,
    pub w_levels: Vec<f64>,
}

impl SparsityPattern {
    pub fn new(m_levels: Vec<usize>, s_levels: Vec<usize>, w_levels: Vec<f64>) -> Result<Self> {
        let p = SparsityPattern {
            m_levels,
            s_levels,
            w_levels,
        };
        p.validate()?;
        Ok(p)
    }

    /// One level of size `n` with sparsity `s` and unit weight.
    pub fn single(n: usize, s: usize) -> Result<Self> {
        Self::new(vec![n], vec![s], vec![1.0])
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.m_levels.len();
        if r == 0 || self.s_levels.len() != r || self.w_levels.len() != r {
            return Err(Error::InvalidParameter("levels, sparsities and weights must have equal nonzero length".into()));
        }
        let mut lo = 0;
        for (k, &hi) in self.m_levels.iter().enumerate() {
            if hi <= lo && !(k == 0 && hi > 0) {
                return Err(Error::InvalidParameter("level boundaries must increase".into()));
            }
            if self.s_levels[k] > hi - lo {
                return Err(Error::InvalidParameter(format!("level {k} cannot hold {} nonzeros", self.s_levels[k])));
            }
            lo = hi;
        }
        if self.w_levels.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter("level weights must be positive".into()));
        }
        if self.zeta() <= 0.0 {
            return Err(Error::InvalidParameter("every level needs a positive sparsity".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        *self.m_levels.last().unwrap_or(&0)
    }

    /// ξ = Σ w_(k)² s_k.
    pub fn xi(&self) -> f64 {
        self.w_levels.iter().zip(&self.s_levels).map(|(w, &s)| w * w * s as f64).sum()
    }

    /// ζ = min_k w_(k)² s_k.
    pub fn zeta(&self) -> f64 {
        self.w_levels
            .iter()
            .zip(&self.s_levels)
            .map(|(w, &s)| w * w * s as f64)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn kappa(&self) -> f64 {
        self.xi() / self.zeta()
    }

    /// Per-coordinate weights.
    pub fn weights(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.n());
        let mut lo = 0;
        for (&hi, &wk) in self.m_levels.iter().zip(&self.w_levels) {
            w.extend(std::iter::repeat_n(wk, hi - lo));
            lo = hi;
        }
        w
    }
}

/// Null space constants; ρ = 0 is accepted as the degenerate injective case.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NspParams {
    pub rho: f64,
    pub gamma: f64,
}

impl NspParams {
    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.rho) || !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= rho < 1 and gamma > 0 (got {}, {})",
                self.rho, self.gamma
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualCertParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub gamma: f64,
    pub z_norm: f64,
    pub op_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRipParams {
    pub s: usize,
    pub t: usize,
    pub delta_t: f64,
    pub delta_st: f64,
}

impl FrameRipParams {
    pub fn rho(&self) -> f64 {
        self.s as f64 / self.t as f64
    }

    /// ω = 1 − ρ − √(ρ(1+δ_t)) / √(1−δ_{s+t}).
    pub fn omega(&self) -> f64 {
        let rho = self.rho();
        1.0 - rho - (rho * (1.0 + self.delta_t)).sqrt() / (1.0 - self.delta_st).sqrt()
    }
}

/// The approximation term c(x, b) = a·σ(x) + C₂(‖Ax − b‖ + ε), where σ is the
/// family's best-approximation error (ℓ¹ tail, nuclear tail, …) and a its coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaRecipe {
    pub tail_coeff: f64,
    pub c2: f64,
}

impl DeltaRecipe {
    pub fn approx_term(&self, tail: f64, residual: f64, epsilon: f64) -> f64 {
        self.tail_coeff * tail + self.c2 * (residual + epsilon)
    }

    /// Worst case of c(x, b) over feasible x with zero tail: 2C₂ε.
    pub fn guaranteed_delta(&self, epsilon: f64) -> f64 {
        self.approx_term(0.0, epsilon, epsilon)
    }

    /// The practical default δ = C₂ε.
    pub fn default_delta(&self, epsilon: f64) -> f64 {
        self.c2 * epsilon
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c1: f64,
    pub c2: f64,
    pub delta: DeltaRecipe,
    /// Set when only the order of the constants is known.
    pub order_only: bool,
}

impl Constants {
    fn new(c1: f64, c2: f64, tail_coeff: f64) -> Self {
        Constants {
            c1,
            c2,
            delta: DeltaRecipe { tail_coeff, c2 },
            order_only: false,
        }
    }
}

/// Weighted robust null space property in levels → (C₁, C₂).
pub fn sparse_levels_constants(p: &SparsityPattern, nsp: NspParams) -> Result<Constants> {
    p.validate()?;
    nsp.validate()?;
    let NspParams { rho, gamma } = nsp;
    let k4 = p.kappa().powf(0.25);
    let c1 = (rho + (1.0 + rho) * k4 / 2.0) * (1.0 + rho) / (p.xi().sqrt() * (1.0 - rho));
    let c2 = gamma / c1 * (2.0 + 2.0 * rho + (3.0 + rho) * k4) / (2.0 * (1.0 - rho));
    Ok(Constants::new(c1, c2, 2.0))
}

/// Frobenius-robust rank null space property of order r → (C₁, C₂).
pub fn lowrank_constants(r: usize, nsp: NspParams) -> Result<Constants> {
    nsp.validate()?;
    if r == 0 {
        return Err(Error::InvalidParameter("rank must be positive".into()));
    }
    let NspParams { rho, gamma } = nsp;
    let sr = (r as f64).sqrt();
    let c1 = (1.0 + rho).powi(2) / ((1.0 - rho) * sr);
    let c2 = gamma * (3.0 + rho) * sr / (1.0 + rho).powi(2);
    Ok(Constants::new(c1, c2, 2.0))
}

/// Practical matrix-completion choice C₁ = √(n₁n₂/|Ω|), C₂ = 1 and the norm bound
/// L = min{1.6√(|Ω|/(n₁n₂)), 1}.
pub fn matcomp_constants(n1: usize, n2: usize, omega_size: usize) -> Result<(Constants, f64)> {
    if omega_size == 0 || omega_size > n1 * n2 {
        return Err(Error::InvalidParameter(format!("|Omega| = {omega_size} outside 1..={}", n1 * n2)));
    }
    let frac = omega_size as f64 / (n1 * n2) as f64;
    let l = (1.6 * frac.sqrt()).min(1.0);
    Ok((Constants::new(frac.recip().sqrt(), 1.0, 0.0), l))
}

/// Local constants from an approximate dual certificate.
pub fn matcomp_dual_cert_constants(p: DualCertParams) -> Result<Constants> {
    let DualCertParams {
        alpha1,
        alpha2,
        gamma,
        z_norm,
        op_norm,
    } = p;
    if !(alpha1 >= 0.0 && (0.0..1.0).contains(&alpha2) && gamma > 0.0 && z_norm >= 0.0 && op_norm > 0.0) {
        return Err(Error::InvalidParameter("dual certificate parameters out of range".into()));
    }
    let denom = (1.0 - alpha2) * gamma - alpha1 * op_norm;
    if !(denom > 0.0) {
        return Err(Error::Hypothesis(format!(
            "alpha1*|A| = {} must be below (1-alpha2)*gamma = {}",
            alpha1 * op_norm,
            (1.0 - alpha2) * gamma
        )));
    }
    let c1 = (gamma + op_norm) / denom;
    let c2 = (alpha1 + 1.0 - alpha2) / (gamma + op_norm) + z_norm;
    Ok(Constants::new(c1, c2, 0.0))
}

/// D-RIP based constants for analysis-ℓ¹ with a frame; needs ω > 0.
pub fn frame_constants(p: FrameRipParams) -> Result<Constants> {
    if p.s == 0 || p.t <= p.s {
        return Err(Error::InvalidParameter(format!("need 0 < s < t (got s={}, t={})", p.s, p.t)));
    }
    if !(0.0..1.0).contains(&p.delta_t) || !(0.0..1.0).contains(&p.delta_st) {
        return Err(Error::InvalidParameter("D-RIP constants must lie in [0,1)".into()));
    }
    let w = p.omega();
    if !(w > 0.0) {
        return Err(Error::Hypothesis(format!("omega(A,D) = {w} is not positive")));
    }
    let rho = p.rho();
    let a = (rho * rho + rho).sqrt() + 1.0 - w;
    let ss = (p.s as f64).sqrt();
    let c1 = a / (w * ss);
    let c2 = ss / a / (1.0 - p.delta_st).sqrt();
    Ok(Constants::new(c1, c2, 2.0))
}

/// Order-only TV constants c/√(s ln N̂) and c√(s ln N̂).
pub fn tv_constants(s: usize, n_hat: f64, c_scale: f64) -> Result<Constants> {
    if s == 0 || !(n_hat > 1.0) || !(c_scale > 0.0) {
        return Err(Error::InvalidParameter("need s > 0, N > 1 and c_scale > 0".into()));
    }
    let g = (s as f64 * n_hat.ln()).sqrt();
    let mut c = Constants::new(c_scale / g, c_scale * g, 1.0);
    c.order_only = true;
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NspEstimate {
    /// Certified upper bound on ρ over all supports.
    pub rho_hat: f64,
    pub gamma_hat: f64,
    /// Largest ρ attained by an explicit null vector (a lower bound).
    pub rho_lower: f64,
    /// Smallest nonzero singular value of A.
    pub sigma_min: f64,
    pub supports_checked: usize,
}

fn supports(p: &SparsityPattern) -> Vec<Vec<usize>> {
    fn combos(lo: usize, hi: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in lo..hi {
            for mut rest in combos(first + 1, hi, k - 1) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }
    let mut acc = vec![vec![]];
    let mut lo = 0;
    for (&hi, &s) in p.m_levels.iter().zip(&p.s_levels) {
        let level = combos(lo, hi, s);
        acc = acc
            .iter()
            .flat_map(|a| {
                level.iter().map(move |c| {
                    let mut v: Vec<usize> = a.clone();
                    v.extend(c);
                    v
                })
            })
            .collect();
        lo = hi;
    }
    acc
}

/// Unit directions covering a half-sphere of ℝ^d with the cosine of the covering angle.
fn direction_net(d: usize) -> Result<(Vec<Vec<f64>>, f64)> {
    use std::f64::consts::PI;
    match d {
        1 => Ok((vec![vec![1.0]], 1.0)),
        2 => {
            let k = 24;
            let dirs = (0..k)
                .map(|i| {
                    let a = PI * i as f64 / k as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect();
            Ok((dirs, (PI / (2.0 * k as f64)).cos()))
        }
        3 => {
            // polar/azimuth grid; geodesic covering radius ≤ half the cell diagonal
            let (np, na) = (10usize, 40usize);
            let (hp, ha) = (PI / 2.0 / np as f64, 2.0 * PI / na as f64);
            let mut dirs = Vec::new();
            for i in 0..=np {
                let phi = i as f64 * hp;
                let ring = if i == 0 { 1 } else { na };
                for j in 0..ring {
                    let th = j as f64 * ha;
                    dirs.push(vec![phi.sin() * th.cos(), phi.sin() * th.sin(), phi.cos()]);
                }
            }
            Ok((dirs, (0.5 * (hp * hp + ha * ha).sqrt()).cos()))
        }
        _ => Err(Error::InvalidParameter(format!("support size {d} exceeds 3"))),
    }
}

/// Estimates weighted rNSPL constants of a small real matrix (row-major `rows × cols`)
/// by enumerating every support of `pattern`. For each support Δ the null space ratio
/// ρ₀(Δ) = sup_{v∈ker A} √ξ‖v_Δ‖₂/‖v_{Δᶜ}‖_{1,w} is bounded through linear programs
/// along a net of directions. With σ_min the smallest nonzero singular value,
/// γ̂ = (1 + ρ̂‖w‖₂/√ξ)/σ_min then works for every x.
pub fn verify_nsp_smallscale(a: &[f64], rows: usize, cols: usize, pattern: &SparsityPattern) -> Result<NspEstimate> {
    pattern.validate()?;
    crate::error::check_len(rows * cols, a.len())?;
    crate::error::check_len(cols, pattern.n())?;
    if cols > 24 || pattern.s_levels.iter().sum::<usize>() > 3 {
        return Err(Error::InvalidParameter("exhaustive check limited to N <= 24 and s <= 3".into()));
    }
    let am = DMatrix::from_row_slice(rows, cols, a);
    let eig = SymmetricEigen::new(am.transpose() * &am);
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if !(lmax > 0.0) {
        return Err(Error::Hypothesis("zero matrix has no null space property".into()));
    }
    let tol = lmax * 1e-12 * cols as f64;
    let sigma_min = eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > tol)
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .sqrt();
    let kernel: Vec<Vec<f64>> = (0..cols)
        .filter(|&i| eig.eigenvalues[i] <= tol)
        .map(|i| eig.eigenvectors.column(i).iter().cloned().collect())
        .collect();
    let w = pattern.weights();
    let sxi = pattern.xi().sqrt();
    let all = supports(pattern);
    let mut rho_hi: f64 = 0.0;
    let mut rho_lo: f64 = 0.0;
    if !kernel.is_empty() {
        for delta in &all {
            let (dirs, cos) = direction_net(delta.len())?;
            let mut best_dir: f64 = 0.0;
            for u in &dirs {
                let mut lp = Problem::new(OptimizationDirection::Maximize);
                let coef: Vec<f64> = kernel
                    .iter()
                    .map(|k| delta.iter().zip(u).map(|(&i, ui)| ui * k[i]).sum())
                    .collect();
                let c: Vec<_> = coef.iter().map(|&cf| lp.add_var(cf, (f64::NEG_INFINITY, f64::INFINITY))).collect();
                let mut budget = Vec::new();
                for i in (0..cols).filter(|i| !delta.contains(i)) {
                    let t = lp.add_var(0.0, (0.0, f64::INFINITY));
                    budget.push((t, w[i]));
                    for sign in [1.0, -1.0] {
                        let mut expr: Vec<_> = c.iter().zip(&kernel).map(|(&v, k)| (v, sign * k[i])).collect();
                        expr.push((t, -1.0));
                        lp.add_constraint(expr, ComparisonOp::Le, 0.0);
                    }
                }
                lp.add_constraint(budget, ComparisonOp::Le, 1.0);
                let sol = match lp.solve() {
                    Ok(out) => out
                        .into_solution()
                        .map_err(|_| Error::Hypothesis("linear program interrupted".into()))?,
                    Err(microlp::Error::Unbounded) => {
                        return Err(Error::Hypothesis(format!(
                            "null space contains a vector supported on {delta:?}"
                        )))
                    }
                    Err(e) => return Err(Error::Hypothesis(format!("linear program failed: {e}"))),
                };
                best_dir = best_dir.max(sol.objective());
                let v: Vec<f64> = (0..cols)
                    .map(|i| c.iter().zip(&kernel).map(|(&var, k)| sol.var_value(var) * k[i]).sum())
                    .collect();
                let on: f64 = delta.iter().map(|&i| v[i] * v[i]).sum::<f64>().sqrt();
                let off: f64 = (0..cols).filter(|i| !delta.contains(i)).map(|i| w[i] * v[i].abs()).sum();
                if off > 0.0 {
                    rho_lo = rho_lo.max(sxi * on / off);
                }
            }
            rho_hi = rho_hi.max(sxi * best_dir / cos);
            if rho_lo >= 1.0 {
                break;
            }
        }
    }
    if rho_hi >= 1.0 {
        return Err(Error::Hypothesis(format!("estimated rho {rho_hi} (lower {rho_lo}) is not below one")));
    }
    let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(NspEstimate {
        rho_hat: rho_hi,
        gamma_hat: (1.0 + rho_hi * wn / sxi) / sigma_min,
        rho_lower: rho_lo,
        sigma_min,
        supports_checked: all.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn sparse_levels_example() {
        let p = SparsityPattern::single(100, 10).unwrap();
        let c = sparse_levels_constants(&p, NspParams { rho: 0.5, gamma: 1.0 }).unwrap();
        assert!(close(c.c1, 3.75 / 10f64.sqrt(), 1e-14));
        assert!(close(c.c1, 1.18585, 1e-5));
        // C2 = (1/C1)(2+1+3.5)/1
        assert!(close(c.c2, 6.5 / c.c1, 1e-14));
        assert!(close(c.c2, 5.4813, 1e-4));
        // homogeneity in the weights
        let p2 = SparsityPattern::new(vec![100], vec![10], vec![3.0]).unwrap();
        let c2 = sparse_levels_constants(&p2, NspParams { rho: 0.5, gamma: 1.0 }).unwrap();
        assert!(close(c2.c1, c.c1 / 3.0, 1e-14) && close(c2.c2, c.c2 * 3.0, 1e-14));
        // rho = 0: C1 = 1/(2 sqrt(xi)), C2 = 5/(2 C1)
        let c0 = sparse_levels_constants(&p, NspParams { rho: 0.0, gamma: 1.0 }).unwrap();
        assert!(close(c0.c1, 0.5 / 10f64.sqrt(), 1e-14) && close(c0.c2, 2.5 / c0.c1, 1e-14));
    }

    #[test]
    fn lowrank_examples() {
        let c = lowrank_constants(4, NspParams { rho: 0.5, gamma: 2.0 }).unwrap();
        assert!(close(c.c1, 2.25, 1e-15) && close(c.c2, 14.0 / 2.25, 1e-14));
        for r in [1, 7, 30] {
            let c = lowrank_constants(r, NspParams { rho: 0.3, gamma: 1.7 }).unwrap();
            assert!(close(c.c1 * c.c2, 1.7 * 3.3 / 0.7, 1e-13));
        }
        let c = lowrank_constants(1, NspParams { rho: 0.0, gamma: 1.0 }).unwrap();
        assert_eq!((c.c1, c.c2), (1.0, 3.0));
    }

    #[test]
    fn matcomp_examples() {
        let (c, l) = matcomp_constants(1000, 1000, 100_000).unwrap();
        assert!(close(c.c1, 10f64.sqrt(), 1e-15) && c.c2 == 1.0);
        assert!(close(l, 1.6 * 0.1f64.sqrt(), 1e-15));
        let (c, l) = matcomp_constants(30, 20, 600).unwrap();
        assert_eq!((c.c1, l), (1.0, 1.0));
        let d = DualCertParams {
            alpha1: 0.1,
            alpha2: 0.5,
            gamma: 1.0,
            z_norm: 0.2,
            op_norm: 1.0,
        };
        let c = matcomp_dual_cert_constants(d).unwrap();
        assert!(close(c.c1, 2.0 / 0.4, 1e-14) && close(c.c2, 0.6 / 2.0 + 0.2, 1e-14));
        assert!(matcomp_dual_cert_constants(DualCertParams { alpha1: 0.6, ..d }).is_err());
    }

    #[test]
    fn frame_examples() {
        let p = FrameRipParams {
            s: 25,
            t: 100,
            delta_t: 0.1,
            delta_st: 0.2,
        };
        let w = p.omega();
        assert!(close(w, 0.75 - (0.25f64 * 1.1).sqrt() / 0.8f64.sqrt(), 1e-15));
        let c = frame_constants(p).unwrap();
        let a = (0.0625f64 + 0.25).sqrt() + 1.0 - w;
        assert!(close(c.c1, a / (w * 5.0), 1e-14));
        assert!(close(c.c2, 5.0 / a / 0.8f64.sqrt(), 1e-14));
        assert!(close(w, 0.16370, 1e-4) && close(c.c1, 1.70473, 1e-4) && close(c.c2, 4.00639, 1e-4));
        let z = FrameRipParams { delta_t: 0.0, delta_st: 0.0, ..p };
        assert!(close(z.omega(), 0.75 - 0.5, 1e-15));
        assert!(frame_constants(FrameRipParams { delta_t: 0.9, delta_st: 0.9, ..p }).is_err());
    }

    #[test]
    fn tv_examples() {
        let c = tv_constants(1, std::f64::consts::E, 1.0).unwrap();
        assert!(close(c.c1, 1.0, 1e-15) && close(c.c2, 1.0, 1e-15) && c.order_only);
        let a = tv_constants(4, 100.0, 2.0).unwrap();
        let b = tv_constants(16, 100.0, 2.0).unwrap();
        assert!(close(b.c1, a.c1 / 2.0, 1e-14) && close(b.c2, 2.0 * a.c2, 1e-14));
        let c = tv_constants(16, 256.0, 1.0).unwrap();
        assert!(close(c.c1, 1.0 / (16.0 * 256f64.ln()).sqrt(), 1e-15));
        assert!(close(c.c2, (16.0 * 256f64.ln()).sqrt(), 1e-15));
        // quoted reference values 0.10607 / 9.4276 agree to 0.2%
        assert!((c.c1 / 0.10607 - 1.0).abs() < 2e-3 && (c.c2 / 9.4276 - 1.0).abs() < 2e-3);
    }

    #[test]
    fn delta_recipe() {
        let c = sparse_levels_constants(&SparsityPattern::single(10, 2).unwrap(), NspParams { rho: 0.4, gamma: 2.0 }).unwrap();
        assert_eq!(c.delta.default_delta(0.1), c.c2 * 0.1);
        assert!(close(c.delta.guaranteed_delta(0.1), 2.0 * c.c2 * 0.1, 1e-15));
        assert!(close(c.delta.approx_term(0.5, 0.0, 0.1), 1.0 + c.c2 * 0.1, 1e-15));
    }

    #[test]
    fn nsp_identity_and_zero() {
        let n = 8;
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        let p = SparsityPattern::single(n, 2).unwrap();
        let e = verify_nsp_smallscale(&id, n, n, &p).unwrap();
        assert_eq!(e.rho_hat, 0.0);
        assert!(close(e.gamma_hat, 1.0, 1e-12));
        assert!(verify_nsp_smallscale(&vec![0.0; 4 * n], 4, n, &p).is_err());
    }

    #[test]
    fn nsp_random_gaussian() {
        // order-2 rNSP fails for most 12×24 draws; take the first certifying one
        let p = SparsityPattern::single(24, 2).unwrap();
        let (a, e) = (0..64u64)
            .find_map(|seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = crate::problems::gaussian_matrix(12, 24, &mut rng);
                verify_nsp_smallscale(&a, 12, 24, &p).ok().map(|e| (a, e))
            })
            .expect("no certifying draw");
        let mut rng = ChaCha8Rng::seed_from_u64(1000);
        assert!(e.rho_hat.is_finite() && e.rho_hat < 1.0 && e.gamma_hat.is_finite());
        assert!(e.rho_lower <= e.rho_hat * (1.0 + 1e-9));
        assert_eq!(e.supports_checked, 276);
        // the bound holds on random vectors
        for _ in 0..200 {
            let x: Vec<f64> = crate::vector::randn_real(&mut rng, 24).iter().map(|v| v.re).collect();
            let ax: f64 = (0..12)
                .map(|i| (0..24).map(|j| a[i * 24 + j] * x[j]).sum::<f64>().powi(2))
                .sum::<f64>()
                .sqrt();
            let mut idx: Vec<usize> = (0..24).collect();
            idx.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()));
            let on = (x[idx[0]].powi(2) + x[idx[1]].powi(2)).sqrt();
            let off: f64 = idx[2..].iter().map(|&i| x[i].abs()).sum();
            assert!(on <= e.rho_hat * off / 2f64.sqrt() + e.gamma_hat * ax + 1e-12);
        }
    }
}
