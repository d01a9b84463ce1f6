//! Asymptotic secret key rate of Gaussian-modulated coherent-state CVQKD
//! with reverse reconciliation against collective attacks.
//!
//! Closed-form entanglement-based analysis: Alice's EPR variance is
//! `V = V_A + 1`, the channel has transmittance `T`, and Bob's detector is
//! a trusted beamsplitter of efficiency `η` followed by electronic noise
//! `v_el`. Excess noise `ε` is specified at the fiber output; referred to
//! the channel input it is `ε/T_ch`.
//!
//! ```text
//! K = β·I_AB − χ_BE,   clamped at 0
//! ```
//!
//! The receiver's mode-matching efficiency acts as one more beamsplitter.
//! Whether it belongs to the trusted detector or to the channel Eve
//! controls is a modelling choice, selected by [`EtaConvention`].

use rayon::prelude::*;

use crate::channel::{dispersion_eta_vs_distance, propagate, ChannelSpec};
use crate::error::{Error, Result};
use crate::receiver::ReceiverChain;
use crate::signal::Wavepacket;
use crate::transmitter::{render_pulse, PulseShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detection {
    Homodyne,
    Heterodyne,
}

/// Where the mode-matching efficiency `η_tm` is booked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EtaConvention {
    /// `η_tm` multiplies the trusted detector efficiency.
    #[default]
    Trusted,
    /// `η_tm` multiplies the channel transmittance and is attributed to Eve.
    Untrusted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRateParams {
    /// Modulation variance `V_A`, SNU.
    pub v_a: f64,
    /// Channel power transmittance.
    pub t_ch: f64,
    /// Temporal-mode matching efficiency.
    pub eta_tm: f64,
    /// Detector efficiency.
    pub eta_det: f64,
    /// Excess noise at the fiber output, SNU.
    pub epsilon: f64,
    /// Reconciliation efficiency.
    pub beta: f64,
    /// Electronic noise, SNU.
    pub v_el: f64,
    pub detection: Detection,
    pub convention: EtaConvention,
}

impl Default for KeyRateParams {
    fn default() -> Self {
        Self {
            v_a: 4.0,
            t_ch: 1.0,
            eta_tm: 1.0,
            eta_det: 0.6,
            epsilon: 0.01,
            beta: 0.95,
            v_el: 0.05,
            detection: Detection::Homodyne,
            convention: EtaConvention::Trusted,
        }
    }
}

impl KeyRateParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64, open_low: bool| {
            if open_low {
                x > 0.0 && x <= 1.0
            } else {
                (0.0..=1.0).contains(&x)
            }
        };
        if !(self.v_a > 0.0) || !self.v_a.is_finite() {
            return Err(Error::invalid(format!("V_A must be positive, got {}", self.v_a)));
        }
        if !unit(self.t_ch, true) {
            return Err(Error::invalid(format!(
                "channel transmittance must lie in (0, 1], got {}",
                self.t_ch
            )));
        }
        if !unit(self.eta_tm, false) {
            return Err(Error::invalid(format!(
                "eta_tm must lie in [0, 1], got {}",
                self.eta_tm
            )));
        }
        if !unit(self.eta_det, true) {
            return Err(Error::invalid(format!(
                "eta_det must lie in (0, 1], got {}",
                self.eta_det
            )));
        }
        if !unit(self.beta, true) {
            return Err(Error::invalid(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::invalid(format!(
                "excess noise must be non-negative, got {}",
                self.epsilon
            )));
        }
        if !(self.v_el >= 0.0) || !self.v_el.is_finite() {
            return Err(Error::invalid(format!(
                "electronic noise must be non-negative, got {}",
                self.v_el
            )));
        }
        Ok(())
    }

    /// `(T, η)`: transmittance seen by Eve and trusted detector efficiency.
    pub fn split(&self) -> (f64, f64) {
        match self.convention {
            EtaConvention::Trusted => (self.t_ch, self.eta_det * self.eta_tm),
            EtaConvention::Untrusted => (self.t_ch * self.eta_tm, self.eta_det),
        }
    }

    /// `T_ch·η_tm·η_det`.
    pub fn total_transmittance(&self) -> f64 {
        self.t_ch * self.eta_tm * self.eta_det
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRateResult {
    /// Secret bits per symbol, never negative.
    pub rate: f64,
    /// `β·I_AB − χ_BE` before clamping.
    pub raw_rate: f64,
    pub mutual_info: f64,
    pub holevo: f64,
    pub below_threshold: bool,
}

impl KeyRateResult {
    fn zero() -> Self {
        Self {
            rate: 0.0,
            raw_rate: 0.0,
            mutual_info: 0.0,
            holevo: 0.0,
            below_threshold: true,
        }
    }
}

/// Von Neumann entropy of a thermal state with symplectic eigenvalue `ν`,
/// `g((ν−1)/2)` with `g(x) = (x+1)·log₂(x+1) − x·log₂x`.
pub fn thermal_entropy(nu: f64) -> f64 {
    let x = (nu - 1.0) / 2.0;
    if x <= 0.0 {
        return 0.0;
    }
    (x + 1.0) * (x + 1.0).log2() - x * x.log2()
}

/// Symplectic eigenvalues from the invariants `a = Δ`, `b = det`:
/// `ν² = (a ± √(a² − 4b))/2`.
fn symplectic_pair(a: f64, b: f64) -> (f64, f64) {
    let disc = (a * a - 4.0 * b).max(0.0).sqrt();
    let hi = (0.5 * (a + disc)).max(0.0).sqrt();
    let lo = (0.5 * (a - disc)).max(0.0).sqrt();
    (hi, lo)
}

pub fn key_rate(params: &KeyRateParams) -> Result<KeyRateResult> {
    params.validate()?;
    let (t, eta) = params.split();
    if t == 0.0 || eta == 0.0 {
        return Ok(KeyRateResult::zero());
    }
    let v = params.v_a + 1.0;
    let chi_line = 1.0 / t - 1.0 + params.epsilon / params.t_ch;
    let chi_det = match params.detection {
        Detection::Homodyne => (1.0 - eta + params.v_el) / eta,
        Detection::Heterodyne => (2.0 - eta + 2.0 * params.v_el) / eta,
    };
    let chi_tot = chi_line + chi_det / t;

    let snr_ratio = (v + chi_tot) / (1.0 + chi_tot);
    let mutual_info = match params.detection {
        Detection::Homodyne => 0.5 * snr_ratio.log2(),
        Detection::Heterodyne => snr_ratio.log2(),
    };

    let a = v * v * (1.0 - 2.0 * t) + 2.0 * t + t * t * (v + chi_line).powi(2);
    let b = t * t * (v * chi_line + 1.0).powi(2);
    let (l1, l2) = symplectic_pair(a, b);
    let sb = b.sqrt();
    let bob = t * (v + chi_tot);
    let (c, d) = match params.detection {
        Detection::Homodyne => {
            let c = (v * sb + t * (v + chi_line) + a * chi_det) / bob;
            let d = sb * (v + sb * chi_det) / bob;
            (c, d)
        }
        Detection::Heterodyne => {
            let c = (a * chi_det * chi_det
                + b
                + 1.0
                + 2.0 * chi_det * (v * sb + t * (v + chi_line))
                + 2.0 * t * (v * v - 1.0))
                / (bob * bob);
            let d = ((v + sb * chi_det) / bob).powi(2);
            (c, d)
        }
    };
    let (l3, l4) = symplectic_pair(c, d);
    let holevo = (thermal_entropy(l1) + thermal_entropy(l2) - thermal_entropy(l3) - thermal_entropy(l4)).max(0.0);
    let raw_rate = params.beta * mutual_info - holevo;
    Ok(KeyRateResult {
        rate: raw_rate.max(0.0),
        raw_rate,
        mutual_info,
        holevo,
        below_threshold: raw_rate <= 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub z_km: f64,
    pub eta_tm: f64,
    pub transmittance: f64,
    pub result: KeyRateResult,
}

/// Key rate along the fiber for a fixed receiver tuned at `t_j`.
///
/// The pulse of `shape` centred at `center` is propagated with the group
/// delay compensated; `η_tm` is its overlap with the receiver mode and the
/// channel loss comes from `ch_template` at each distance.
pub fn rate_vs_distance(
    shape: &PulseShape,
    center: f64,
    chain: &ReceiverChain,
    t_j: f64,
    ch_template: &ChannelSpec,
    params: &KeyRateParams,
    z_km: &[f64],
) -> Result<Vec<RatePoint>> {
    params.validate()?;
    let mode = chain.dsp_temporal_mode(t_j)?;
    let etas = dispersion_eta_vs_distance(shape, center, &mode, ch_template, z_km)?;
    etas.into_par_iter()
        .map(|(z, eta_tm)| {
            let t_ch = ch_template.at_distance(z).transmittance();
            let result = key_rate(&KeyRateParams {
                t_ch,
                eta_tm,
                ..*params
            })?;
            Ok(RatePoint {
                z_km: z,
                eta_tm,
                transmittance: t_ch,
                result,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetPoint {
    /// Shift of the output time from the optimum, s.
    pub offset: f64,
    pub eta: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffsetScan {
    /// Output time maximizing `η` for the propagated pulse.
    pub t_opt: f64,
    pub points: Vec<OffsetPoint>,
}

impl OffsetScan {
    /// Central second difference of `η` around the largest sample, per s².
    /// `None` if the maximum sits on either end of the scan or the spacing
    /// is uneven.
    pub fn peak_curvature(&self) -> Option<f64> {
        let p = &self.points;
        let (i, _) = p.iter().enumerate().max_by(|a, b| a.1.eta.total_cmp(&b.1.eta))?;
        if i == 0 || i + 1 >= p.len() {
            return None;
        }
        let h1 = p[i].offset - p[i - 1].offset;
        let h2 = p[i + 1].offset - p[i].offset;
        if (h1 - h2).abs() > 1e-9 * h1.abs() {
            return None;
        }
        Some((p[i + 1].eta - 2.0 * p[i].eta + p[i - 1].eta) / (h1 * h1))
    }
}

/// `η` and key rate as the output time moves away from its optimum.
///
/// The pulse is propagated through `ch` (group delay compensated); the
/// optimum is searched within `search` (absolute output times, s) and
/// `offsets` are taken relative to it.
pub fn sampling_offset_sensitivity(
    chain: &ReceiverChain,
    shape: &PulseShape,
    center: f64,
    ch: &ChannelSpec,
    search: (f64, f64),
    offsets: &[f64],
    params: &KeyRateParams,
) -> Result<OffsetScan> {
    params.validate()?;
    let signal = propagated(shape, center, chain, ch)?;
    let (t_opt, _) = chain.optimal_output_time(&signal, search.0, search.1, 64)?;
    let t_ch = ch.transmittance();
    let points = offsets
        .par_iter()
        .map(|&offset| {
            let eta = chain.mode_match_eta(t_opt + offset, &signal)?;
            let rate = key_rate(&KeyRateParams {
                t_ch,
                eta_tm: eta,
                ..*params
            })?
            .rate;
            Ok(OffsetPoint { offset, eta, rate })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OffsetScan { t_opt, points })
}

fn propagated(shape: &PulseShape, center: f64, chain: &ReceiverChain, ch: &ChannelSpec) -> Result<Wavepacket> {
    let input = render_pulse(shape, *chain.grid(), center)?;
    Ok(propagate(&input, &ch.delay_compensated())?.0)
}
