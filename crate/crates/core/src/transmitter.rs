//! Pulse shapes and Gaussian I/Q modulation of photon-wavepacket coherent
//! states.
//!
//! The modulator is modelled by its output: every symbol is a coherent
//! state with complex amplitude `γ_i` on one shared, normalized envelope.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::signal::{TimeGrid, Wavepacket};

/// Minimum fraction of pulse energy a rendering grid must capture.
pub const MIN_CAPTURED_ENERGY: f64 = 0.9999;

/// Default root-raised-cosine truncation, in symbols (total, centred).
pub const DEFAULT_RRC_SPAN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    /// Gaussian envelope; `fwhm` is the FWHM of the intensity `|ξ|²`.
    Gaussian {
        fwhm: f64,
    },
    Rectangular {
        width: f64,
    },
    /// Root-raised-cosine truncated to `span` symbol periods and renormalized.
    Rrc {
        rolloff: f64,
        symbol_period: f64,
        span: usize,
    },
}

impl PulseShape {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PulseShape::Gaussian { fwhm } if !(fwhm > 0.0) => {
                Err(Error::invalid(format!("gaussian fwhm must be positive, got {fwhm}")))
            }
            PulseShape::Rectangular { width } if !(width > 0.0) => Err(Error::invalid(format!(
                "rectangular width must be positive, got {width}"
            ))),
            PulseShape::Rrc {
                rolloff,
                symbol_period,
                span,
            } => {
                if !(rolloff > 0.0 && rolloff <= 1.0) {
                    Err(Error::invalid(format!("rrc rolloff must lie in (0, 1], got {rolloff}")))
                } else if !(symbol_period > 0.0) {
                    Err(Error::invalid("rrc symbol period must be positive"))
                } else if span == 0 {
                    Err(Error::invalid("rrc span must be at least one symbol"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Unnormalized real amplitude at time `t` for a pulse centred at zero.
    pub fn amplitude(&self, t: f64) -> f64 {
        match *self {
            PulseShape::Gaussian { fwhm } => {
                let t0 = gaussian_t0(fwhm);
                (-t * t / (2.0 * t0 * t0)).exp()
            }
            PulseShape::Rectangular { width } => {
                if t >= -width / 2.0 && t < width / 2.0 {
                    1.0
                } else {
                    0.0
                }
            }
            PulseShape::Rrc {
                rolloff,
                symbol_period,
                span,
            } => {
                if t.abs() > span as f64 * symbol_period / 2.0 {
                    0.0
                } else {
                    rrc_impulse(t / symbol_period, rolloff)
                }
            }
        }
    }

    /// Half-width beyond which the pulse carries no appreciable energy.
    pub fn half_support(&self) -> f64 {
        match *self {
            PulseShape::Gaussian { fwhm } => 10.0 * gaussian_t0(fwhm),
            PulseShape::Rectangular { width } => width / 2.0,
            PulseShape::Rrc {
                symbol_period, span, ..
            } => span as f64 * symbol_period / 2.0,
        }
    }

    /// Narrowest time feature, used for grid resolution checks.
    pub fn feature_width(&self) -> f64 {
        match *self {
            PulseShape::Gaussian { fwhm } => fwhm,
            PulseShape::Rectangular { width } => width,
            PulseShape::Rrc {
                symbol_period, rolloff, ..
            } => symbol_period / (1.0 + rolloff),
        }
    }
}

/// `T₀` of `exp(−t²/2T₀²)` whose intensity has the given FWHM.
pub fn gaussian_t0(fwhm: f64) -> f64 {
    fwhm / (2.0 * 2f64.ln().sqrt())
}

/// Root-raised-cosine impulse response at `x = t/T`, unit symbol period.
pub fn rrc_impulse(x: f64, rolloff: f64) -> f64 {
    let a = rolloff;
    if x.abs() < 1e-12 {
        return 1.0 + a * (4.0 / PI - 1.0);
    }
    if (x.abs() - 1.0 / (4.0 * a)).abs() < 1e-9 {
        let arg = PI / (4.0 * a);
        return a / 2f64.sqrt() * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos());
    }
    let num = (PI * x * (1.0 - a)).sin() + 4.0 * a * x * (PI * x * (1.0 + a)).cos();
    let den = PI * x * (1.0 - (4.0 * a * x).powi(2));
    num / den
}

/// Renders `shape` centred at `center` as a normalized wavepacket.
///
/// The captured energy is the fraction of the pulse's discrete energy (on
/// the grid's sampling lattice, extended to the full support) that falls on
/// the grid; below [`MIN_CAPTURED_ENERGY`] this is a truncation error.
pub fn render_pulse(shape: &PulseShape, grid: TimeGrid, center: f64) -> Result<Wavepacket> {
    shape.validate()?;
    grid.check_resolution(shape.feature_width());
    let dt = grid.dt();
    let half = shape.half_support();
    let k_lo = ((center - half - grid.t_start()) / dt).floor() as i64 - 1;
    let k_hi = ((center + half - grid.t_start()) / dt).ceil() as i64 + 1;
    let mut total = 0.0;
    let mut inside = 0.0;
    for k in k_lo..=k_hi {
        let a = shape.amplitude(grid.t_start() + k as f64 * dt - center);
        let e = a * a;
        total += e;
        if k >= 0 && (k as usize) < grid.len() {
            inside += e;
        }
    }
    if total == 0.0 {
        return Err(Error::DegenerateWavepacket);
    }
    let captured = inside / total;
    if captured < MIN_CAPTURED_ENERGY {
        return Err(Error::Truncation(format!(
            "grid captures {:.6} of the pulse energy (need {MIN_CAPTURED_ENERGY})",
            captured
        )));
    }
    Wavepacket::from_real_fn(grid, |t| shape.amplitude(t - center)).normalize()
}

/// Gaussian-modulated symbol sequence sharing one pulse shape.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTrain {
    /// Quadrature pairs `(x_i, p_i)`, each drawn from `N(0, V_A/2)`.
    pub quadratures: Vec<(f64, f64)>,
    pub period: f64,
    pub shape: PulseShape,
    pub modulation_variance: f64,
    pub seed: u64,
}

impl SymbolTrain {
    /// Coherent amplitude of symbol `i`, `γ_i = (x_i + i·p_i)/√2`.
    ///
    /// With the quadrature convention `X_θ = A†e^{iθ} + A e^{−iθ}` the
    /// homodyne mean is `2·Re(γ e^{−iθ}) = √2·x_i`, so the ensemble variance
    /// of the measured quadrature is `V_A` in shot-noise units and the mean
    /// photon number is `V_A/2`.
    pub fn displacement(&self, i: usize) -> Complex64 {
        let (x, p) = self.quadratures[i];
        Complex64::new(x, p) / 2f64.sqrt()
    }

    pub fn displacements(&self) -> Vec<Complex64> {
        (0..self.len()).map(|i| self.displacement(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.quadratures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quadratures.is_empty()
    }

    /// Centre time of symbol `i` when the train starts at `t0`.
    pub fn symbol_center(&self, t0: f64, i: usize) -> f64 {
        t0 + i as f64 * self.period
    }
}

pub fn make_symbol_train(
    seed: u64,
    n_symbols: usize,
    modulation_variance: f64,
    shape: PulseShape,
    period: f64,
) -> Result<SymbolTrain> {
    if n_symbols == 0 {
        return Err(Error::invalid("symbol train needs at least one symbol"));
    }
    if !(modulation_variance > 0.0) || !modulation_variance.is_finite() {
        return Err(Error::invalid(format!(
            "modulation variance must be positive, got {modulation_variance}"
        )));
    }
    if !(period > 0.0) {
        return Err(Error::invalid("symbol period must be positive"));
    }
    shape.validate()?;
    let normal = Normal::new(0.0, (modulation_variance / 2.0).sqrt()).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quadratures = (0..n_symbols)
        .map(|_| (normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    Ok(SymbolTrain {
        quadratures,
        period,
        shape,
        modulation_variance,
        seed,
    })
}
