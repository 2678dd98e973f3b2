use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::vector::C64;

/// Measurements `y_j = tr(M A_j*)` with `A_j = P_j / √n`, `P_j` a tensor product
/// of Pauli matrices and `M` an `n × n` matrix stored column-major.
///
/// Each `P_j` has one nonzero per row: `P[a, a ⊕ flip] = (−i)^{#Y} (−1)^{|a ∧ zmask|}`
/// where `flip` marks X/Y letters and `zmask` marks Z/Y letters. The first letter
/// acts on the most significant qubit.
#[derive(Clone, Debug)]
pub struct PauliOp {
    qubits: usize,
    labels: Vec<String>,
    flip: Vec<usize>,
    zmask: Vec<usize>,
    phase: Vec<C64>,
}

impl PauliOp {
    pub fn new(qubits: usize, strings: &[String]) -> Result<Self> {
        if qubits == 0 || qubits > 16 {
            return Err(Error::InvalidOperator(format!("unsupported qubit count {qubits}")));
        }
        let mut flip = Vec::with_capacity(strings.len());
        let mut zmask = Vec::with_capacity(strings.len());
        let mut phase = Vec::with_capacity(strings.len());
        for s in strings {
            let letters: Vec<char> = s.chars().collect();
            if letters.len() != qubits {
                return Err(Error::InvalidOperator(format!(
                    "pauli string {s:?} has {} letters, expected {qubits}",
                    letters.len()
                )));
            }
            let (mut f, mut z, mut ny) = (0usize, 0usize, 0u32);
            for (pos, ch) in letters.iter().enumerate() {
                let bit = 1usize << (qubits - 1 - pos);
                match ch {
                    'I' => {}
                    'X' => f |= bit,
                    'Y' => {
                        f |= bit;
                        z |= bit;
                        ny += 1;
                    }
                    'Z' => z |= bit,
                    _ => {
                        return Err(Error::InvalidOperator(format!("bad pauli letter {ch:?} in {s:?}")))
                    }
                }
            }
            flip.push(f);
            zmask.push(z);
            phase.push(C64::new(0.0, -1.0).powu(ny));
        }
        Ok(PauliOp {
            qubits,
            labels: strings.to_vec(),
            flip,
            zmask,
            phase,
        })
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    fn entry(&self, j: usize, a: usize) -> C64 {
        if (a & self.zmask[j]).count_ones() % 2 == 1 {
            -self.phase[j]
        } else {
            self.phase[j]
        }
    }

    pub(crate) fn forward(&self, m: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let s = 1.0 / (n as f64).sqrt();
        (0..self.len())
            .map(|j| {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..n {
                    let b = a ^ self.flip[j];
                    acc += m[a + n * b] * self.entry(j, a).conj();
                }
                acc * s
            })
            .collect()
    }

    pub(crate) fn adjoint(&self, y: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let s = 1.0 / (n as f64).sqrt();
        let mut m = vec![C64::new(0.0, 0.0); n * n];
        for (j, yj) in y.iter().enumerate() {
            let c = yj * s;
            for a in 0..n {
                let b = a ^ self.flip[j];
                m[a + n * b] += c * self.entry(j, a);
            }
        }
        m
    }
}

/// `m` distinct Pauli strings drawn uniformly without replacement.
pub fn random_pauli_strings(qubits: usize, m: usize, seed: u64) -> Result<Vec<String>> {
    let total = 4usize
        .checked_pow(qubits as u32)
        .ok_or_else(|| Error::InvalidParameter("too many qubits".into()))?;
    if m > total {
        return Err(Error::InvalidParameter(format!(
            "cannot draw {m} distinct strings from {total}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, total, m);
    Ok(picked
        .iter()
        .map(|mut v| {
            let mut s = String::with_capacity(qubits);
            for _ in 0..qubits {
                s.push(['I', 'X', 'Y', 'Z'][v % 4]);
                v /= 4;
            }
            s
        })
        .collect())
}
