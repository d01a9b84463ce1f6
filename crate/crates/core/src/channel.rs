//! Fiber propagation: scalar attenuation plus first- and second-order
//! dispersion applied through the frequency-domain transfer function.
//!
//! Loss never touches the temporal mode; it is returned as a transmittance
//! that scales the coherent amplitude.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::signal::{spectrum, Wavepacket};
use crate::transmitter::{render_pulse, PulseShape};

/// Largest tolerated fraction of energy pushed outside the window.
pub const MAX_LEAKAGE: f64 = 1e-3;

/// Zero-padding factor of the propagation FFT.
const PAD_FACTOR: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub loss_db_per_km: f64,
    /// Inverse group velocity, s/km. Applied as a pure delay.
    pub k1_s_per_km: f64,
    /// Second-order dispersion, ps²/km.
    pub beta2_ps2_per_km: f64,
    pub z_km: f64,
}

impl ChannelSpec {
    pub fn new(loss_db_per_km: f64, k1_s_per_km: f64, beta2_ps2_per_km: f64, z_km: f64) -> Result<Self> {
        let ch = Self {
            loss_db_per_km,
            k1_s_per_km,
            beta2_ps2_per_km,
            z_km,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.loss_db_per_km >= 0.0) || !self.loss_db_per_km.is_finite() {
            return Err(Error::invalid("loss must be a finite non-negative dB/km value"));
        }
        if !(self.z_km >= 0.0) || !self.z_km.is_finite() {
            return Err(Error::invalid("distance must be finite and non-negative"));
        }
        if !self.k1_s_per_km.is_finite() || !self.beta2_ps2_per_km.is_finite() {
            return Err(Error::invalid("dispersion coefficients must be finite"));
        }
        Ok(())
    }

    pub fn at_distance(&self, z_km: f64) -> Self {
        Self { z_km, ..*self }
    }

    /// Same fiber with the group delay removed (ideal timing recovery).
    pub fn delay_compensated(&self) -> Self {
        Self {
            k1_s_per_km: 0.0,
            ..*self
        }
    }

    /// Power transmittance `10^(−α·z/10)`.
    pub fn transmittance(&self) -> f64 {
        10f64.powf(-self.loss_db_per_km * self.z_km / 10.0)
    }

    /// Factor applied to the coherent amplitude, `√T_ch`.
    pub fn amplitude_transmittance(&self) -> f64 {
        self.transmittance().sqrt()
    }

    pub fn group_delay(&self) -> f64 {
        self.k1_s_per_km * self.z_km
    }

    /// Accumulated second-order dispersion `β₂·z` in s².
    pub fn accumulated_dispersion(&self) -> f64 {
        self.beta2_ps2_per_km * 1e-24 * self.z_km
    }
}

/// Propagates a normalized envelope through `ch`.
///
/// Returns the renormalized output envelope on the input grid and the power
/// transmittance. The spectrum is multiplied by
/// `exp(i·k₁·Ω·z + i·(β₂/2)·Ω²·z)` with `Ω` the frequency of the `e^{−iΩt}`
/// component, i.e. a positive `k₁` delays the pulse.
pub fn propagate(input: &Wavepacket, ch: &ChannelSpec) -> Result<(Wavepacket, f64)> {
    ch.validate()?;
    if (input.norm_sq() - 1.0).abs() > 1e-6 {
        return Err(Error::invalid("channel input must be normalized"));
    }
    let grid = *input.grid();
    let t_ch = ch.transmittance();
    if ch.z_km == 0.0 {
        return Ok((input.clone(), t_ch));
    }
    let delay = ch.group_delay();
    if delay.abs() >= grid.duration() {
        return Err(Error::Truncation(format!(
            "group delay {delay:e} s exceeds the {:e} s window; compensate k1",
            grid.duration()
        )));
    }

    // Centre the input inside a zero-padded buffer so that spreading in
    // either direction lands in the padding rather than wrapping around.
    let n = grid.len();
    let m = PAD_FACTOR * n;
    let offset = (m - n) / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[offset..offset + n].copy_from_slice(input.samples());

    let mut spec = spectrum::forward(&buf);
    let omega = spectrum::angular_frequencies(m, grid.dt());
    let d2 = ch.accumulated_dispersion();
    for (s, &w) in spec.iter_mut().zip(&omega) {
        // FFT bin ω multiplies e^{+iωt}, so Ω = −ω.
        let phase = -delay * w + 0.5 * d2 * w * w;
        *s *= Complex64::from_polar(1.0, phase);
    }
    let out = spectrum::inverse(&spec);

    let total: f64 = out.iter().map(|s| s.norm_sqr()).sum();
    let window: Vec<Complex64> = out[offset..offset + n].to_vec();
    let inside: f64 = window.iter().map(|s| s.norm_sqr()).sum();
    let leakage = 1.0 - inside / total;
    if leakage > MAX_LEAKAGE {
        return Err(Error::Truncation(format!(
            "{leakage:.3e} of the propagated energy leaves the window (limit {MAX_LEAKAGE:e})"
        )));
    }
    let output = Wavepacket::new(grid, window)?.normalize()?;
    Ok((output, t_ch))
}

/// Mode-matching efficiency between a fixed receiver mode and the
/// propagated signal at each distance. Group delay is compensated.
pub fn dispersion_eta_vs_distance(
    shape: &PulseShape,
    center: f64,
    receiver_tm: &Wavepacket,
    template: &ChannelSpec,
    z_km: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let input = render_pulse(shape, *receiver_tm.grid(), center)?;
    let base = template.delay_compensated();
    z_km.par_iter()
        .map(|&z| {
            let (out, _) = propagate(&input, &base.at_distance(z))?;
            Ok((z, receiver_tm.overlap_sq(&out)?.min(1.0)))
        })
        .collect()
}
