use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::transforms::{sequency_rank, Shape};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MaskScheme {
    Full,
    Explicit,
    /// Uniform draws without replacement inside each frequency band.
    /// `boundaries` are cumulative band ends over the frequency ranking.
    MultilevelUniform { boundaries: Vec<usize>, counts: Vec<usize> },
    /// Weighted draw without replacement with weight 1/(1 + |k|²).
    InverseSquare { m: usize },
    Bernoulli { p: f64 },
}

/// Sorted, unique retained indices of a length-`n` transform output.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingMask {
    n: usize,
    indices: Arc<Vec<usize>>,
    scheme: MaskScheme,
    seed: u64,
}

impl SamplingMask {
    pub fn full(n: usize) -> Self {
        SamplingMask {
            n,
            indices: Arc::new((0..n).collect()),
            scheme: MaskScheme::Full,
            seed: 0,
        }
    }

    /// Explicit index set; must be unique and in range (order is irrelevant).
    pub fn from_indices(n: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::InvalidMask(format!("index {last} out of range {n}")));
            }
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidMask("duplicate indices".into()));
        }
        Ok(SamplingMask {
            n,
            indices: Arc::new(indices),
            scheme: MaskScheme::Explicit,
            seed: 0,
        })
    }

    pub fn bernoulli(n: usize, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidMask(format!("probability {p} outside [0,1]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let indices = (0..n).filter(|_| rng.random::<f64>() < p).collect();
        Ok(SamplingMask {
            n,
            indices: Arc::new(indices),
            scheme: MaskScheme::Bernoulli { p },
            seed,
        })
    }

    /// Multilevel mask over a frequency ranking `order` (a permutation of 0..n, low to high).
    pub fn multilevel(order: &[usize], boundaries: &[usize], counts: &[usize], seed: u64) -> Result<Self> {
        let n = order.len();
        if boundaries.len() != counts.len() || boundaries.is_empty() {
            return Err(Error::InvalidMask("boundaries and counts must be nonempty and of equal length".into()));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) || *boundaries.last().unwrap() != n {
            return Err(Error::InvalidMask("level boundaries must increase strictly and end at N".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut indices = Vec::new();
        let mut lo = 0;
        for (&hi, &cnt) in boundaries.iter().zip(counts) {
            if cnt > hi - lo {
                return Err(Error::InvalidMask(format!(
                    "level [{lo},{hi}) cannot hold {cnt} samples"
                )));
            }
            let picked = rand::seq::index::sample(&mut rng, hi - lo, cnt);
            indices.extend(picked.iter().map(|i| order[lo + i]));
            lo = hi;
        }
        let mut mask = Self::from_indices(n, indices)?;
        mask.scheme = MaskScheme::MultilevelUniform {
            boundaries: boundaries.to_vec(),
            counts: counts.to_vec(),
        };
        mask.seed = seed;
        Ok(mask)
    }

    /// `m` DFT frequencies of a `shape` grid drawn without replacement with
    /// probability weight 1/(1 + k₁² + k₂²) over centred frequencies.
    pub fn inverse_square(shape: Shape, m: usize, seed: u64) -> Result<Self> {
        let n = shape.len();
        if m > n {
            return Err(Error::InvalidMask(format!("cannot draw {m} of {n} frequencies")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Efraimidis–Spirakis: keep the m largest ln(u)/w.
        let mut keys: Vec<(f64, usize)> = (0..n)
            .map(|idx| {
                let w = 1.0 / (1.0 + dft_radius_sq(shape, idx));
                let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                (u.ln() / w, idx)
            })
            .collect();
        keys.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut mask = Self::from_indices(n, keys[..m].iter().map(|k| k.1).collect())?;
        mask.scheme = MaskScheme::InverseSquare { m };
        mask.seed = seed;
        Ok(mask)
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn scheme(&self) -> &MaskScheme {
        &self.scheme
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

fn centred(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Squared centred frequency radius of linear (column-major) index `idx`.
pub(crate) fn dft_radius_sq(shape: Shape, idx: usize) -> f64 {
    let k1 = centred(idx % shape.rows, shape.rows);
    let k2 = centred(idx / shape.rows, shape.cols);
    k1 * k1 + k2 * k2
}

/// DFT output indices ranked by centred frequency magnitude (ties by index).
pub fn dft_frequency_order(shape: Shape) -> Vec<usize> {
    let mut order: Vec<usize> = (0..shape.len()).collect();
    order.sort_by(|&a, &b| {
        dft_radius_sq(shape, a)
            .total_cmp(&dft_radius_sq(shape, b))
            .then(a.cmp(&b))
    });
    order
}

/// Natural-order Hadamard rows ranked by sequency.
pub fn wht_sequency_order(n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&k| sequency_rank(k, n));
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_masks_are_validated() {
        assert!(SamplingMask::from_indices(3, vec![0, 3]).is_err());
        assert!(SamplingMask::from_indices(3, vec![1, 1]).is_err());
        let m = SamplingMask::from_indices(5, vec![4, 0, 2]).unwrap();
        assert_eq!(m.indices(), &[0, 2, 4]);
    }

    #[test]
    fn bernoulli_count_within_four_sigma() {
        let n = 20000;
        let p = 0.3;
        let m = SamplingMask::bernoulli(n, p, 9).unwrap();
        let mean = p * n as f64;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((m.len() as f64 - mean).abs() <= 4.0 * sd);
        assert_eq!(m, SamplingMask::bernoulli(n, p, 9).unwrap());
    }

    #[test]
    fn multilevel_counts_per_level() {
        let order = dft_frequency_order(Shape::line(64));
        let m = SamplingMask::multilevel(&order, &[4, 16, 64], &[4, 6, 10], 1).unwrap();
        assert_eq!(m.len(), 20);
        let rank: Vec<usize> = {
            let mut r = vec![0; 64];
            for (pos, &i) in order.iter().enumerate() {
                r[i] = pos;
            }
            r
        };
        let in_level = |lo: usize, hi: usize| m.indices().iter().filter(|&&i| rank[i] >= lo && rank[i] < hi).count();
        assert_eq!((in_level(0, 4), in_level(4, 16), in_level(16, 64)), (4, 6, 10));
        assert!(SamplingMask::multilevel(&order, &[4, 64], &[5, 1], 1).is_err());
    }

    #[test]
    fn inverse_square_prefers_low_frequencies() {
        let shape = Shape::new(32, 32);
        let m = SamplingMask::inverse_square(shape, 300, 5).unwrap();
        assert_eq!(m.len(), 300);
        assert!(m.indices().contains(&0));
        let low = m.indices().iter().filter(|&&i| dft_radius_sq(shape, i) <= 16.0).count();
        let high = m.indices().iter().filter(|&&i| dft_radius_sq(shape, i) > 100.0).count();
        assert!(low > 40, "low {low}");
        assert!(high < 200);
    }
}
