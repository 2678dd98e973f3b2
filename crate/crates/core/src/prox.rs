//! Proximal maps of the regularizer and the dual-ball projections of the inner iterations.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::partial_svd::{
    dense_singular_values, dense_svt, svt_step, DenseMatrix, RankState, SvdOptions,
};
use crate::vector::{norm2, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SvdEngine {
    /// Full dense SVD.
    Dense,
    /// Lanczos partial SVD with adaptive predicted rank.
    Lanczos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RegularizerKind {
    Zero,
    WeightedL1 { weights: Vec<f64> },
    /// Column-major `rows × cols` matrix variable.
    Nuclear { rows: usize, cols: usize, engine: SvdEngine },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "set", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Constraint {
    None,
    NonnegativeReal,
    L2Ball { radius: f64 },
}

/// `J` of the problem, optionally intersected with a convex set `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct Regularizer {
    kind: RegularizerKind,
    constraint: Constraint,
    n: usize,
}

/// Per-solve mutable state of the prox (adaptive rank, Lanczos tolerance, counters).
#[derive(Clone, Debug, PartialEq)]
pub struct ProxState {
    pub rank: RankState,
    pub svd: SvdOptions,
    pub calls: usize,
    pub last_rank: usize,
}

impl Default for ProxState {
    fn default() -> Self {
        ProxState {
            rank: RankState::default(),
            svd: SvdOptions::default(),
            calls: 0,
            last_rank: 0,
        }
    }
}

impl Regularizer {
    pub fn zero(n: usize) -> Self {
        Regularizer {
            kind: RegularizerKind::Zero,
            constraint: Constraint::None,
            n,
        }
    }

    pub fn l1(n: usize) -> Self {
        Regularizer {
            kind: RegularizerKind::WeightedL1 {
                weights: vec![1.0; n],
            },
            constraint: Constraint::None,
            n,
        }
    }

    pub fn weighted_l1(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidParameter(format!("invalid weight {w}")));
        }
        let n = weights.len();
        Ok(Regularizer {
            kind: RegularizerKind::WeightedL1 { weights },
            constraint: Constraint::None,
            n,
        })
    }

    pub fn nuclear(rows: usize, cols: usize, engine: SvdEngine) -> Self {
        Regularizer {
            kind: RegularizerKind::Nuclear { rows, cols, engine },
            constraint: Constraint::None,
            n: rows * cols,
        }
    }

    /// Attach a constraint set. Only pairs whose prox factors as
    /// "prox of J, then projection" are accepted.
    pub fn with_constraint(mut self, constraint: Constraint) -> Result<Self> {
        match (&self.kind, constraint) {
            (RegularizerKind::Nuclear { .. }, Constraint::NonnegativeReal) => {
                return Err(Error::InvalidParameter(
                    "nonnegativity does not commute with singular value thresholding".into(),
                ))
            }
            (_, Constraint::L2Ball { radius }) if !(radius > 0.0) => {
                return Err(Error::InvalidParameter(format!("ball radius {radius} must be positive")))
            }
            _ => {}
        }
        self.constraint = constraint;
        Ok(self)
    }

    pub fn kind(&self) -> &RegularizerKind {
        &self.kind
    }

    pub fn constraint(&self) -> Constraint {
        self.constraint
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `J(x)` (the constraint indicator is not included).
    pub fn value(&self, x: &[C64]) -> Result<f64> {
        check_len(self.n, x.len())?;
        Ok(match &self.kind {
            RegularizerKind::Zero => 0.0,
            RegularizerKind::WeightedL1 { weights } => {
                x.iter().zip(weights).map(|(v, w)| w * v.norm()).sum()
            }
            RegularizerKind::Nuclear { rows, cols, .. } => {
                dense_singular_values(*rows, *cols, x)?.iter().sum()
            }
        })
    }

    /// sup over unit vectors of `J`, used for the inexact-prox tolerance.
    pub fn unit_bound(&self) -> f64 {
        match &self.kind {
            RegularizerKind::Zero => 0.0,
            RegularizerKind::WeightedL1 { weights } => {
                weights.iter().map(|w| w * w).sum::<f64>().sqrt()
            }
            RegularizerKind::Nuclear { rows, cols, .. } => ((*rows).min(*cols) as f64).sqrt(),
        }
    }

    /// argmin_z t·J(z) + ½‖z − x‖², then projection onto (1/beta)·S.
    pub fn prox(&self, x: &[C64], t: f64, beta: f64, state: &mut ProxState) -> Result<Vec<C64>> {
        check_len(self.n, x.len())?;
        if !(t > 0.0) || !(beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "prox needs t > 0 and beta > 0 (got {t}, {beta})"
            )));
        }
        state.calls += 1;
        let mut z = match &self.kind {
            RegularizerKind::Zero => x.to_vec(),
            RegularizerKind::WeightedL1 { weights } => x
                .iter()
                .zip(weights)
                .map(|(v, w)| soft_threshold(*v, t * w))
                .collect(),
            RegularizerKind::Nuclear { rows, cols, engine } => match engine {
                SvdEngine::Dense => {
                    let z = dense_svt(*rows, *cols, x, t)?;
                    state.last_rank = usize::MAX;
                    z
                }
                SvdEngine::Lanczos => {
                    let op = DenseMatrix::new(*rows, *cols, x)?;
                    let (f, next) = svt_step(&op, t, state.rank.clone(), &state.svd)?;
                    state.rank = next;
                    state.last_rank = f.rank();
                    f.to_dense()
                }
            },
        };
        match self.constraint {
            Constraint::None => {}
            Constraint::NonnegativeReal => {
                z.iter_mut().for_each(|v| *v = C64::new(v.re.max(0.0), 0.0));
            }
            Constraint::L2Ball { radius } => {
                let r = radius / beta;
                let nz = norm2(&z);
                if nz > r {
                    z.iter_mut().for_each(|v| *v *= r / nz);
                }
            }
        }
        Ok(z)
    }
}

/// Complex soft thresholding `max{0, 1 − τ/|x|}·x`.
pub fn soft_threshold(x: C64, tau: f64) -> C64 {
    let m = x.norm();
    if m <= tau {
        C64::new(0.0, 0.0)
    } else {
        x * (1.0 - tau / m)
    }
}

/// Stateless prox with a fresh adaptive-rank state.
pub fn prox_regularizer(r: &Regularizer, x: &[C64], t: f64, beta: f64) -> Result<Vec<C64>> {
    r.prox(x, t, beta, &mut ProxState::default())
}

/// γ_ρ(y) = max{0, 1 − ρ/‖y‖}·y, with γ_ρ(0) = 0.
pub fn shrink_l2(y: &[C64], rho: f64) -> Vec<C64> {
    let n = norm2(y);
    if n <= rho || n == 0.0 {
        vec![C64::new(0.0, 0.0); y.len()]
    } else {
        let c = 1.0 - rho / n;
        y.iter().map(|v| v * c).collect()
    }
}

/// ς_ρ(z)_j = min{1, ρ/|z_j|}·z_j.
pub fn clip_linf(z: &[C64], rho: f64) -> Vec<C64> {
    z.iter()
        .map(|v| {
            let m = v.norm();
            if m > rho {
                v * (rho / m)
            } else {
                *v
            }
        })
        .collect()
}

/// ϑ(y) = min{1, 1/‖y‖}·y.
pub fn project_l2_unit(y: &[C64]) -> Vec<C64> {
    let n = norm2(y);
    if n > 1.0 {
        y.iter().map(|v| v / n).collect()
    } else {
        y.to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn weighted_l1_examples() {
        let reg = Regularizer::l1(2);
        let z = prox_regularizer(&reg, &[r(3.0), r(0.5)], 1.0, 1.0).unwrap();
        assert_eq!(z, vec![r(2.0), r(0.0)]);
        let zero = Regularizer::zero(2);
        let x = [C64::new(1.0, -2.0), r(4.0)];
        assert_eq!(prox_regularizer(&zero, &x, 3.0, 1.0).unwrap(), x.to_vec());
    }

    #[test]
    fn nuclear_diagonal_example() {
        for engine in [SvdEngine::Dense, SvdEngine::Lanczos] {
            let reg = Regularizer::nuclear(3, 3, engine);
            let mut m = vec![r(0.0); 9];
            m[0] = r(3.0);
            m[4] = r(1.0);
            m[8] = r(0.2);
            let z = prox_regularizer(&reg, &m, 0.5, 1.0).unwrap();
            let mut expect = vec![r(0.0); 9];
            expect[0] = r(2.5);
            expect[4] = r(0.5);
            for (a, b) in z.iter().zip(&expect) {
                assert!((a - b).norm() < 1e-12, "{engine:?}");
            }
        }
    }

    #[test]
    fn dual_maps_examples() {
        let y = shrink_l2(&[r(3.0), r(4.0)], 1.0);
        assert!((y[0] - r(2.4)).norm() < 1e-15 && (y[1] - r(3.2)).norm() < 1e-15);
        assert_eq!(shrink_l2(&[r(3.0), r(4.0)], 0.0), vec![r(3.0), r(4.0)]);
        assert_eq!(shrink_l2(&[r(0.3), r(0.4)], 0.5), vec![r(0.0), r(0.0)]);
        assert_eq!(shrink_l2(&[r(0.0)], 0.0), vec![r(0.0)]);

        let z = clip_linf(&[C64::new(0.0, 2.0), r(0.5)], 1.0);
        assert_eq!(z, vec![C64::new(0.0, 1.0), r(0.5)]);
        assert_eq!(clip_linf(&[r(-3.0)], 1.0), vec![r(-1.0)]);

        assert_eq!(project_l2_unit(&[r(0.3), r(0.4)]), vec![r(0.3), r(0.4)]);
        assert_eq!(project_l2_unit(&[r(0.0), r(2.0)]), vec![r(0.0), r(1.0)]);
        assert_eq!(project_l2_unit(&[r(0.0)]), vec![r(0.0)]);
    }

    #[test]
    fn constraints_compose_after_prox() {
        let reg = Regularizer::l1(3)
            .with_constraint(Constraint::NonnegativeReal)
            .unwrap();
        let z = prox_regularizer(&reg, &[r(3.0), r(-2.0), C64::new(0.5, 4.0)], 1.0, 1.0).unwrap();
        assert_eq!(z[0], r(2.0));
        assert_eq!(z[1], r(0.0));
        assert!(z[2].im == 0.0 && z[2].re >= 0.0);

        let ball = Regularizer::zero(2)
            .with_constraint(Constraint::L2Ball { radius: 2.0 })
            .unwrap();
        // radius is rescaled to 2/beta
        let z = prox_regularizer(&ball, &[r(3.0), r(4.0)], 1.0, 2.0).unwrap();
        assert!((norm2(&z) - 1.0).abs() < 1e-15);

        assert!(Regularizer::nuclear(2, 2, SvdEngine::Dense)
            .with_constraint(Constraint::NonnegativeReal)
            .is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Regularizer::weighted_l1(vec![1.0, -1.0]).is_err());
        assert!(prox_regularizer(&Regularizer::l1(1), &[r(1.0)], 0.0, 1.0).is_err());
        assert!(prox_regularizer(&Regularizer::l1(2), &[r(1.0)], 1.0, 1.0).is_err());
    }
}
