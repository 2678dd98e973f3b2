//! Serializable operator descriptions (kind tag + parameters + seed).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mask::{dft_frequency_order, wht_sequency_order};
use super::{random_pauli_strings, LinearOp, SamplingMask, Shape, WaveletFilter};
use crate::error::{Error, Result};
use crate::vector::{randn_real, C64};

fn one() -> usize {
    1
}

/// Strict empty parameter set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoParams {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitMask {
    pub indices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultilevelMask {
    pub boundaries: Vec<usize>,
    pub counts: Vec<usize>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseSquareMask {
    pub m: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BernoulliMask {
    pub p: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum MaskSpec {
    Full(NoParams),
    Explicit(ExplicitMask),
    MultilevelUniform(MultilevelMask),
    InverseSquare(InverseSquareMask),
    Bernoulli(BernoulliMask),
}

#[derive(Clone, Copy)]
enum Ranking {
    Dft(Shape),
    Sequency(usize),
    Natural(usize),
}

impl MaskSpec {
    /// Mask over DFT outputs of `shape`, ranked by frequency magnitude.
    pub fn build_dft(&self, shape: Shape) -> Result<SamplingMask> {
        self.build(Ranking::Dft(shape))
    }

    /// Mask over Walsh–Hadamard outputs, ranked by sequency.
    pub fn build_wht(&self, n: usize) -> Result<SamplingMask> {
        self.build(Ranking::Sequency(n))
    }

    /// Mask over plain indices `0..n`.
    pub fn build_natural(&self, n: usize) -> Result<SamplingMask> {
        self.build(Ranking::Natural(n))
    }

    fn build(&self, ranking: Ranking) -> Result<SamplingMask> {
        let (n, shape) = match ranking {
            Ranking::Dft(s) => (s.len(), s),
            Ranking::Sequency(n) | Ranking::Natural(n) => (n, Shape::line(n)),
        };
        match self {
            MaskSpec::Full(_) => Ok(SamplingMask::full(n)),
            MaskSpec::Explicit(e) => SamplingMask::from_indices(n, e.indices.clone()),
            MaskSpec::MultilevelUniform(MultilevelMask {
                boundaries,
                counts,
                seed,
            }) => {
                let order = match ranking {
                    Ranking::Dft(s) => dft_frequency_order(s),
                    Ranking::Sequency(n) => wht_sequency_order(n),
                    Ranking::Natural(n) => (0..n).collect(),
                };
                SamplingMask::multilevel(&order, boundaries, counts, *seed)
            }
            MaskSpec::InverseSquare(InverseSquareMask { m, seed }) => match ranking {
                Ranking::Dft(_) => SamplingMask::inverse_square(shape, *m, *seed),
                _ => Err(Error::InvalidMask(
                    "inverse-square density is defined for dft sampling only".into(),
                )),
            },
            MaskSpec::Bernoulli(BernoulliMask { p, seed }) => SamplingMask::bernoulli(n, *p, *seed),
        }
    }
}

macro_rules! strict {
    ($(#[$m:meta])* $name:ident { $($(#[$fm:meta])* $f:ident : $t:ty),* $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name { $($(#[$fm])* pub $f: $t),* }
    };
}

strict!(IdentitySpec { n: usize });
strict!(
    /// Row-major entries; `im` may be omitted for real matrices.
    DenseSpec { rows: usize, cols: usize, re: Vec<f64>, #[serde(default)] im: Vec<f64> }
);
strict!(
    /// Real Gaussian entries with variance 1/rows.
    GaussianDenseSpec { rows: usize, cols: usize, seed: u64 }
);
strict!(DftSpec { rows: usize, #[serde(default = "one")] cols: usize, mask: MaskSpec });
strict!(WhtSpec { n: usize, mask: MaskSpec });
strict!(DwtSpec { rows: usize, #[serde(default = "one")] cols: usize, levels: usize, filter: WaveletFilter });
strict!(GradientSpec { side: usize });
strict!(MaskProjectionSpec { n: usize, mask: MaskSpec });
strict!(
    /// Either explicit `strings` or `m` random distinct strings drawn from `seed`.
    PauliSpec {
        qubits: usize,
        #[serde(default)] strings: Option<Vec<String>>,
        #[serde(default)] m: Option<usize>,
        #[serde(default)] seed: u64,
    }
);
strict!(CompositeSpec { outer: Box<OpSpec>, inner: Box<OpSpec> });
strict!(ScaledSpec { factor: f64, op: Box<OpSpec> });
strict!(StackedSpec { ops: Vec<OpSpec> });
strict!(AdjointSpec { op: Box<OpSpec> });

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OpSpec {
    Identity(IdentitySpec),
    Dense(DenseSpec),
    GaussianDense(GaussianDenseSpec),
    SubsampledDft(DftSpec),
    SubsampledWht(WhtSpec),
    Dwt(DwtSpec),
    PeriodicGradient(GradientSpec),
    MaskProjection(MaskProjectionSpec),
    PauliMeasurement(PauliSpec),
    Composite(CompositeSpec),
    Scaled(ScaledSpec),
    Stacked(StackedSpec),
    Adjoint(AdjointSpec),
}

impl OpSpec {
    pub fn build(&self) -> Result<LinearOp> {
        match self {
            OpSpec::Identity(IdentitySpec { n }) => Ok(LinearOp::identity(*n)),
            OpSpec::Dense(DenseSpec { rows, cols, re, im }) => {
                if !im.is_empty() && im.len() != re.len() {
                    return Err(Error::InvalidOperator("re/im length mismatch".into()));
                }
                let data = re
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| C64::new(r, im.get(i).copied().unwrap_or(0.0)))
                    .collect();
                LinearOp::dense(*rows, *cols, data)
            }
            OpSpec::GaussianDense(GaussianDenseSpec { rows, cols, seed }) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let s = 1.0 / (*rows as f64).sqrt();
                let data = randn_real(&mut rng, rows * cols)
                    .into_iter()
                    .map(|v| v * s)
                    .collect();
                LinearOp::dense(*rows, *cols, data)
            }
            OpSpec::SubsampledDft(DftSpec { rows, cols, mask }) => {
                let shape = Shape::new(*rows, *cols);
                LinearOp::subsampled_dft(shape, mask.build(Ranking::Dft(shape))?)
            }
            OpSpec::SubsampledWht(WhtSpec { n, mask }) => {
                LinearOp::subsampled_wht(*n, mask.build(Ranking::Sequency(*n))?)
            }
            OpSpec::Dwt(DwtSpec { rows, cols, levels, filter }) => LinearOp::dwt(Shape::new(*rows, *cols), *levels, *filter),
            OpSpec::PeriodicGradient(GradientSpec { side }) => LinearOp::periodic_gradient(*side),
            OpSpec::MaskProjection(MaskProjectionSpec { n, mask }) => {
                let m = mask.build(Ranking::Natural(*n))?;
                LinearOp::mask_projection(*n, m.indices().to_vec())
            }
            OpSpec::PauliMeasurement(PauliSpec { qubits, strings, m, seed }) => {
                let strings = match (strings, m) {
                    (Some(s), None) => s.clone(),
                    (None, Some(m)) => random_pauli_strings(*qubits, *m, *seed)?,
                    _ => {
                        return Err(Error::InvalidOperator(
                            "pauli-measurement needs exactly one of `strings` or `m`".into(),
                        ))
                    }
                };
                LinearOp::pauli_measurement(*qubits, &strings)
            }
            OpSpec::Composite(CompositeSpec { outer, inner }) => LinearOp::compose(outer.build()?, inner.build()?),
            OpSpec::Scaled(ScaledSpec { factor, op }) => Ok(LinearOp::scale(*factor, op.build()?)),
            OpSpec::Stacked(StackedSpec { ops }) => {
                LinearOp::stack(ops.iter().map(|o| o.build()).collect::<Result<_>>()?)
            }
            OpSpec::Adjoint(AdjointSpec { op }) => Ok(LinearOp::adjoint_op(op.build()?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_builds_nested_specs() {
        let json = r#"{"kind":"composite",
            "outer":{"kind":"subsampled-dft","rows":16,"mask":{"scheme":"multilevel-uniform","boundaries":[4,16],"counts":[4,4],"seed":3}},
            "inner":{"kind":"adjoint","op":{"kind":"dwt","rows":16,"levels":2,"filter":"db2"}}}"#;
        let spec: OpSpec = serde_json::from_str(json).unwrap();
        let op = spec.build().unwrap();
        assert_eq!((op.n_in(), op.n_out()), (16, 8));
        let again: OpSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = r#"{"kind":"identity","n":3,"extra":1}"#;
        assert!(serde_json::from_str::<OpSpec>(bad).is_err());
        let bad_mask = r#"{"kind":"mask-projection","n":3,"mask":{"scheme":"full","seed":1}}"#;
        assert!(serde_json::from_str::<OpSpec>(bad_mask).is_err());
    }

    #[test]
    fn seeded_builds_are_reproducible() {
        let spec = OpSpec::GaussianDense(GaussianDenseSpec {
            rows: 3,
            cols: 5,
            seed: 7,
        });
        assert_eq!(spec.build().unwrap().to_dense(), spec.build().unwrap().to_dense());
    }
}
