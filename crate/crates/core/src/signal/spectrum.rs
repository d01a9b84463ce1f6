//! Unitary DFT helpers.
//!
//! Both directions carry a `1/√N` factor so that `Σ|x|²` equals `Σ|X|²`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

pub fn forward(samples: &[Complex64]) -> Vec<Complex64> {
    transform(samples, false)
}

pub fn inverse(spectrum: &[Complex64]) -> Vec<Complex64> {
    transform(spectrum, true)
}

fn transform(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = input.len();
    let mut buf = input.to_vec();
    if n == 0 {
        return buf;
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    fft.process(&mut buf);
    let s = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|x| *x *= s);
    buf
}

/// Angular frequency of each bin in FFT order for `n` samples spaced `dt`.
///
/// Bin `k` multiplies `exp(+iω_k t)` in the inverse transform.
pub fn angular_frequencies(n: usize, dt: f64) -> Vec<f64> {
    let span = n as f64 * dt;
    (0..n)
        .map(|k| {
            let k = if k < n.div_ceil(2) {
                k as f64
            } else {
                k as f64 - n as f64
            };
            2.0 * PI * k / span
        })
        .collect()
}
