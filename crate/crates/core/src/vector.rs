//! Dense complex vector helpers.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;

pub fn norm2(x: &[C64]) -> f64 {
    // scaled accumulation avoids overflow for huge entries
    let scale = x.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = x.iter().map(|v| (v / scale).norm_sqr()).sum();
    scale * s.sqrt()
}

pub fn norm1(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm()).sum()
}

pub fn norm_inf(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// ⟨x, y⟩ = Σ x_i conj(y_i).
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn sub(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn add(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

pub fn scaled(x: &[C64], c: f64) -> Vec<C64> {
    x.iter().map(|v| v * c).collect()
}

pub fn dist(x: &[C64], y: &[C64]) -> f64 {
    norm2(&sub(x, y))
}

/// ‖x − y‖ / ‖y‖, falling back to the absolute distance when y = 0.
pub fn rel_err(x: &[C64], y: &[C64]) -> f64 {
    let d = dist(x, y);
    let n = norm2(y);
    if n > 0.0 {
        d / n
    } else {
        d
    }
}

pub fn is_finite(x: &[C64]) -> bool {
    x.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

pub fn real(x: &[f64]) -> Vec<C64> {
    x.iter().map(|&v| C64::new(v, 0.0)).collect()
}

pub fn randn_real<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.sample(StandardNormal), 0.0))
        .collect()
}

/// Standard complex Gaussian: real and imaginary parts N(0, 1/2).
pub fn randn_complex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * s, im * s)
        })
        .collect()
}
