//! Discrete-time complex-envelope algebra.
//!
//! Every envelope lives on a uniform [`TimeGrid`]; integrals are Riemann sums
//! with weight `dt`. A [`Wavepacket`] carries samples in units of s^(-1/2) so
//! that `Σ|ξ|²·dt` is dimensionless.

mod convolve;
mod grid;
mod modes;
pub mod spectrum;

pub use grid::TimeGrid;
pub use modes::{gram_schmidt_residual, ModeDecomposition, Residual};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance under which a wavepacket counts as normalized.
pub const NORMALIZED_TOL: f64 = 1e-9;

/// Complex envelope sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavepacket {
    grid: TimeGrid,
    samples: Vec<Complex64>,
}

impl Wavepacket {
    pub fn new(grid: TimeGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.len()
            )));
        }
        if samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::invalid("wavepacket samples must be finite"));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: TimeGrid, f: impl FnMut(f64) -> Complex64) -> Self {
        let samples = grid.times().map(f).collect();
        Self { grid, samples }
    }

    pub fn from_real_fn(grid: TimeGrid, mut f: impl FnMut(f64) -> f64) -> Self {
        Self::from_fn(grid, |t| Complex64::new(f(t), 0.0))
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `Σ|ξ_k|²·dt`.
    pub fn norm_sq(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.grid.dt()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq() - 1.0).abs() <= NORMALIZED_TOL
    }

    pub fn normalize(&self) -> Result<Wavepacket> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::DegenerateWavepacket);
        }
        Ok(self.scale(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Wavepacket {
        Wavepacket {
            grid: self.grid,
            samples: self.samples.iter().map(|s| s * c).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Wavepacket {
        let samples = self.grid.times().zip(&self.samples).map(|(t, &s)| f(t, s)).collect();
        Wavepacket {
            grid: self.grid,
            samples,
        }
    }

    /// `self + c·other` on a shared grid.
    pub fn add_scaled(&self, c: Complex64, other: &Wavepacket) -> Result<Wavepacket> {
        self.grid.ensure_same(&other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(Wavepacket {
            grid: self.grid,
            samples,
        })
    }

    /// `Σ conj(self_k)·other_k·dt`.
    pub fn inner_product(&self, other: &Wavepacket) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid)?;
        let sum: Complex64 = self.samples.iter().zip(&other.samples).map(|(a, b)| a.conj() * b).sum();
        Ok(sum * self.grid.dt())
    }

    /// Squared modulus of the overlap with `other`.
    pub fn overlap_sq(&self, other: &Wavepacket) -> Result<f64> {
        Ok(self.inner_product(other)?.norm_sqr())
    }

    /// Fraction of `Σ|ξ|²` carried by samples with `lo <= t <= hi`.
    pub fn energy_fraction_within(&self, lo: f64, hi: f64) -> f64 {
        let total: f64 = self.samples.iter().map(|s| s.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let inside: f64 = self
            .grid
            .times()
            .zip(&self.samples)
            .filter(|(t, _)| *t >= lo && *t <= hi)
            .map(|(_, s)| s.norm_sqr())
            .sum();
        inside / total
    }

    /// Intensity-weighted mean time.
    pub fn centroid(&self) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (t, s) in self.grid.times().zip(&self.samples) {
            let w = s.norm_sqr();
            num += w * t;
            den += w;
        }
        num / den
    }

    /// Full width at half maximum of `|ξ(t)|²`, with linear interpolation
    /// of the half-maximum crossings. `None` for an all-zero envelope or a
    /// peak touching the grid edge.
    pub fn intensity_fwhm(&self) -> Option<f64> {
        let intensity: Vec<f64> = self.samples.iter().map(|s| s.norm_sqr()).collect();
        let (peak_idx, &peak) = intensity.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
        if peak <= 0.0 {
            return None;
        }
        let half = peak / 2.0;
        let mut left = None;
        for k in (0..peak_idx).rev() {
            if intensity[k] < half {
                let frac = (half - intensity[k]) / (intensity[k + 1] - intensity[k]);
                left = Some(self.grid.time(k) + frac * self.grid.dt());
                break;
            }
        }
        let mut right = None;
        for k in peak_idx + 1..intensity.len() {
            if intensity[k] < half {
                let frac = (intensity[k - 1] - half) / (intensity[k - 1] - intensity[k]);
                right = Some(self.grid.time(k - 1) + frac * self.grid.dt());
                break;
            }
        }
        Some(right? - left?)
    }

    /// Resample onto another grid by linear interpolation; zero outside
    /// the source support.
    pub fn resample(&self, grid: TimeGrid) -> Wavepacket {
        let src = &self.grid;
        Wavepacket::from_fn(grid, |t| {
            let x = src.fractional_index(t);
            if x < 0.0 || x > (src.len() - 1) as f64 {
                return Complex64::new(0.0, 0.0);
            }
            let k = x.floor() as usize;
            if k + 1 >= src.len() {
                return self.samples[src.len() - 1];
            }
            let f = x - k as f64;
            self.samples[k] * (1.0 - f) + self.samples[k + 1] * f
        })
    }
}

impl std::ops::Neg for &Wavepacket {
    type Output = Wavepacket;

    fn neg(self) -> Wavepacket {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}
