//! Scenario files: a versioned TOML document describing one simulation.
//!
//! Parsing is strict (unknown keys are rejected) and every error carries the
//! dotted path of the offending field. [`Scenario::build`] then turns the
//! description into validated core objects before any computation starts.

use serde::{Deserialize, Serialize};

use cvqkd_core::channel::ChannelSpec;
use cvqkd_core::keyrate::{Detection, EtaConvention, KeyRateParams};
use cvqkd_core::receiver::{DetectorFilter, DspKernel, LocalOscillator, ReceiverChain, SamplingSchedule};
use cvqkd_core::transmitter::{gaussian_t0, render_pulse, PulseShape, DEFAULT_RRC_SPAN};
use cvqkd_core::{TimeGrid, Wavepacket, PS};

use crate::error::CliError;

/// Version understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

pub const MAX_GRID_POINTS: usize = 1 << 22;
pub const MAX_TAPS: usize = 1 << 14;
pub const MAX_SWEEP_STEPS: usize = 100_000;
pub const MAX_SHOTS: usize = 100_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    pub grid: GridConfig,
    pub transmitter: TransmitterConfig,
    pub channel: ChannelConfig,
    pub receiver: ReceiverConfig,
    #[serde(default)]
    pub keyrate: KeyRateConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub montecarlo: Option<MonteCarloConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kernels: Vec<NamedKernel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// The window spans `[−half_width, half_width]`.
    pub half_width_ps: f64,
    pub dt_ps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeConfig {
    Gaussian {
        fwhm_ps: f64,
    },
    Rectangular {
        width_ps: f64,
    },
    Rrc {
        rolloff: f64,
        symbol_period_ps: f64,
        #[serde(default = "default_rrc_span")]
        span: usize,
    },
}

fn default_rrc_span() -> usize {
    DEFAULT_RRC_SPAN
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmitterConfig {
    pub shape: ShapeConfig,
    #[serde(default)]
    pub center_ps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub loss_db_per_km: f64,
    #[serde(default)]
    pub k1_ps_per_km: f64,
    pub beta2_ps2_per_km: f64,
    #[serde(default)]
    pub z_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoEnvelopeConfig {
    Cw,
    Pulsed { fwhm_ps: f64, center_ps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoConfig {
    pub envelope: LoEnvelopeConfig,
    /// Mean photon number of the LO over the window.
    pub mu: f64,
    #[serde(default)]
    pub offset_ghz: f64,
    #[serde(default)]
    pub theta_rad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IrfConfig {
    Delta,
    OnePole { bandwidth_ghz: f64 },
    Gaussian { fwhm_ps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub integration_time_ps: f64,
    pub period_ps: f64,
    pub samples_per_period: usize,
    /// Output time `t_j`; searched for the undispersed pulse when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_time_ps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DspConfig {
    SinglePoint,
    UniformAverage {
        taps: usize,
    },
    Weights {
        coefficients: Vec<f64>,
        offset: usize,
    },
    /// Transmitter envelope sampled at the window centres.
    Envelope {
        taps: usize,
    },
    /// Optimal real weights over `taps` samples for the undispersed pulse.
    Matched {
        taps: usize,
    },
    Rrc {
        rolloff: f64,
        span: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverConfig {
    pub lo: LoConfig,
    pub irf: IrfConfig,
    pub sampling: SamplingConfig,
    pub dsp: DspConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionConfig {
    Homodyne,
    Heterodyne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConventionConfig {
    Trusted,
    Untrusted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KeyRateConfig {
    pub v_a: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub eta_det: f64,
    pub v_el: f64,
    pub detection: DetectionConfig,
    pub eta_convention: ConventionConfig,
}

impl Default for KeyRateConfig {
    fn default() -> Self {
        let p = KeyRateParams::default();
        Self {
            v_a: p.v_a,
            epsilon: p.epsilon,
            beta: p.beta,
            eta_det: p.eta_det,
            v_el: p.v_el,
            detection: DetectionConfig::Homodyne,
            eta_convention: ConventionConfig::Trusted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    ZKm,
    OffsetPs,
    IrfWidthPs,
}

impl SweepVariable {
    pub fn column(&self) -> &'static str {
        match self {
            SweepVariable::ZKm => "z_km",
            SweepVariable::OffsetPs => "offset_ps",
            SweepVariable::IrfWidthPs => "irf_width_ps",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepConfig {
    /// `steps` evenly spaced values from `start` to `stop` inclusive.
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|k| self.start + k as f64 * h).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub n_shots: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedKernel {
    pub name: String,
    pub dsp: DspConfig,
}

/// Core objects built from a validated scenario.
#[derive(Debug, Clone)]
pub struct Setup {
    pub grid: TimeGrid,
    pub shape: PulseShape,
    pub center: f64,
    pub channel: ChannelSpec,
    /// Receiver chain with its configured DSP kernel.
    pub chain: ReceiverChain,
    pub t_j: f64,
    pub keyrate: KeyRateParams,
    /// Undispersed signal mode at the receiver.
    pub signal: Wavepacket,
}

/// Maps a core error raised while checking `ctx` to a validation failure.
fn v(ctx: &str) -> impl FnOnce(cvqkd_core::Error) -> CliError + '_ {
    move |e| CliError::Validation(format!("{ctx}: {e}"))
}

fn path_message(path: &str, inner: &str) -> String {
    // serde reports "missing field `x`" at the enclosing path.
    if let Some(rest) = inner.strip_prefix("missing field `") {
        let field = rest.split('`').next().unwrap_or(rest);
        return if path.is_empty() || path == "." {
            format!("missing field: {field}")
        } else {
            format!("missing field: {path}.{field}")
        };
    }
    if path.is_empty() || path == "." {
        inner.to_string()
    } else {
        format!("{path}: {inner}")
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| CliError::Parse(e.to_string()))?;
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Parse(path_message(&path, inner.message()))
        })?;
        if scenario.schema != SCHEMA_VERSION {
            return Err(CliError::Parse(format!(
                "schema: unsupported version {} (expected {SCHEMA_VERSION})",
                scenario.schema
            )));
        }
        Ok(scenario)
    }

    pub fn dump(&self) -> String {
        toml::to_string(self).expect("scenario types serialize to TOML")
    }

    pub fn shape(&self) -> PulseShape {
        match self.transmitter.shape {
            ShapeConfig::Gaussian { fwhm_ps } => PulseShape::Gaussian { fwhm: fwhm_ps * PS },
            ShapeConfig::Rectangular { width_ps } => PulseShape::Rectangular { width: width_ps * PS },
            ShapeConfig::Rrc {
                rolloff,
                symbol_period_ps,
                span,
            } => PulseShape::Rrc {
                rolloff,
                symbol_period: symbol_period_ps * PS,
                span,
            },
        }
    }

    pub fn keyrate_params(&self) -> KeyRateParams {
        let k = &self.keyrate;
        KeyRateParams {
            v_a: k.v_a,
            epsilon: k.epsilon,
            beta: k.beta,
            eta_det: k.eta_det,
            v_el: k.v_el,
            detection: match k.detection {
                DetectionConfig::Homodyne => Detection::Homodyne,
                DetectionConfig::Heterodyne => Detection::Heterodyne,
            },
            convention: match k.eta_convention {
                ConventionConfig::Trusted => EtaConvention::Trusted,
                ConventionConfig::Untrusted => EtaConvention::Untrusted,
            },
            ..KeyRateParams::default()
        }
    }

    pub fn filter(&self, irf: IrfConfig, dt: f64) -> cvqkd_core::Result<DetectorFilter> {
        match irf {
            IrfConfig::Delta => DetectorFilter::delta_like(dt),
            IrfConfig::OnePole { bandwidth_ghz } => DetectorFilter::one_pole_lowpass(bandwidth_ghz * 1e9, dt),
            IrfConfig::Gaussian { fwhm_ps } => DetectorFilter::gaussian_irf(fwhm_ps * PS, dt),
        }
    }

    /// Rejects sizes that would exhaust memory or time before any allocation.
    fn check_limits(&self) -> Result<(), CliError> {
        let too_big = |what: &str, limit: usize| CliError::Validation(format!("{what}: exceeds the limit of {limit}"));
        let points = 2.0 * self.grid.half_width_ps / self.grid.dt_ps;
        if points.is_finite() && points > MAX_GRID_POINTS as f64 {
            return Err(too_big("grid", MAX_GRID_POINTS));
        }
        let taps = |d: &DspConfig| match d {
            DspConfig::UniformAverage { taps } | DspConfig::Envelope { taps } | DspConfig::Matched { taps } => *taps,
            DspConfig::Weights { coefficients, offset } => coefficients.len().max(*offset),
            DspConfig::Rrc { span, .. } => span.saturating_mul(self.receiver.sampling.samples_per_period),
            DspConfig::SinglePoint => 1,
        };
        let dsps = std::iter::once(&self.receiver.dsp).chain(self.kernels.iter().map(|k| &k.dsp));
        if dsps.map(taps).max().unwrap_or(1) > MAX_TAPS || self.receiver.sampling.samples_per_period > MAX_TAPS {
            return Err(too_big("receiver.dsp taps", MAX_TAPS));
        }
        if let ShapeConfig::Rrc { span, .. } = self.transmitter.shape {
            if span > MAX_TAPS {
                return Err(too_big("transmitter.shape.span", MAX_TAPS));
            }
        }
        if self.sweep.is_some_and(|sw| sw.steps > MAX_SWEEP_STEPS) {
            return Err(too_big("sweep.steps", MAX_SWEEP_STEPS));
        }
        if self.montecarlo.is_some_and(|mc| mc.n_shots > MAX_SHOTS) {
            return Err(too_big("montecarlo.n_shots", MAX_SHOTS));
        }
        Ok(())
    }

    /// Validates every block against the core preconditions and builds the
    /// objects the commands run on.
    pub fn build(&self) -> Result<Setup, CliError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(CliError::Validation(
                "name: must be a non-empty file-name-safe string".into(),
            ));
        }
        self.check_limits()?;
        let grid = TimeGrid::centered(self.grid.half_width_ps * PS, self.grid.dt_ps * PS).map_err(v("grid"))?;
        let shape = self.shape();
        shape.validate().map_err(v("transmitter.shape"))?;
        let center = self.transmitter.center_ps * PS;
        let signal = render_pulse(&shape, grid, center).map_err(v("transmitter"))?;

        let c = &self.channel;
        let channel = ChannelSpec::new(c.loss_db_per_km, c.k1_ps_per_km * PS, c.beta2_ps2_per_km, c.z_km)
            .map_err(v("channel"))?;

        let r = &self.receiver;
        let envelope = match r.lo.envelope {
            LoEnvelopeConfig::Cw => Wavepacket::from_real_fn(grid, |_| 1.0),
            LoEnvelopeConfig::Pulsed { fwhm_ps, center_ps } => {
                if !(fwhm_ps > 0.0) {
                    return Err(CliError::Validation(
                        "receiver.lo.envelope.fwhm_ps: must be positive".into(),
                    ));
                }
                let t0 = gaussian_t0(fwhm_ps * PS);
                let c0 = center_ps * PS;
                Wavepacket::from_real_fn(grid, |t| (-(t - c0).powi(2) / (2.0 * t0 * t0)).exp())
            }
        };
        let envelope = envelope.normalize().map_err(v("receiver.lo.envelope"))?;
        let omega = 2.0 * std::f64::consts::PI * r.lo.offset_ghz * 1e9;
        let lo = LocalOscillator::new(r.lo.mu, envelope, omega, r.lo.theta_rad).map_err(v("receiver.lo"))?;
        let filter = self.filter(r.irf, grid.dt()).map_err(v("receiver.irf"))?;
        let s = &r.sampling;
        let sampling = SamplingSchedule::new(s.integration_time_ps * PS, s.period_ps * PS, s.samples_per_period)
            .map_err(v("receiver.sampling"))?;
        let base = ReceiverChain::new(lo, filter, sampling, DspKernel::single_point()).map_err(v("receiver"))?;

        let t_j = match s.output_time_ps {
            Some(t) => t * PS,
            None => default_output_time(&base, &shape, center, &signal).map_err(v("receiver.sampling"))?,
        };
        let dsp = build_dsp(&r.dsp, &base, &shape, center, t_j, &signal).map_err(v("receiver.dsp"))?;
        let chain = base.with_dsp(dsp);
        chain.snu_sigma(t_j).map_err(v("receiver"))?;

        let keyrate = self.keyrate_params();
        keyrate.validate().map_err(v("keyrate"))?;

        if let Some(sw) = &self.sweep {
            if sw.steps == 0 || !sw.start.is_finite() || !sw.stop.is_finite() {
                return Err(CliError::Validation(
                    "sweep: need finite bounds and at least one step".into(),
                ));
            }
            if sw.variable == SweepVariable::ZKm && sw.start.min(sw.stop) < 0.0 {
                return Err(CliError::Validation("sweep: distances must be non-negative".into()));
            }
            if sw.variable == SweepVariable::IrfWidthPs {
                if matches!(r.irf, IrfConfig::Delta) {
                    return Err(CliError::Validation(
                        "sweep: irf_width_ps needs a one_pole or gaussian IRF".into(),
                    ));
                }
                if sw.start.min(sw.stop) <= 0.0 {
                    return Err(CliError::Validation("sweep: IRF widths must be positive".into()));
                }
            }
        }
        if let Some(mc) = &self.montecarlo {
            if mc.n_shots < cvqkd_core::montecarlo::MIN_CALIBRATION_SHOTS {
                return Err(CliError::Validation(format!(
                    "montecarlo.n_shots: need at least {}",
                    cvqkd_core::montecarlo::MIN_CALIBRATION_SHOTS
                )));
            }
        }
        for (i, k) in self.kernels.iter().enumerate() {
            if k.name.is_empty() {
                return Err(CliError::Validation(format!("kernels[{i}].name: must not be empty")));
            }
            build_dsp(&k.dsp, &base, &shape, center, t_j, &signal)
                .and_then(|d| base.with_dsp(d).snu_sigma(t_j))
                .map_err(v(&format!("kernels[{i}]")))?;
        }

        Ok(Setup {
            grid,
            shape,
            center,
            channel,
            chain,
            t_j,
            keyrate,
            signal,
        })
    }
}

/// Output time maximizing `η` for the undispersed pulse, searched around
/// the single-window alignment.
pub fn default_output_time(
    chain: &ReceiverChain,
    shape: &PulseShape,
    center: f64,
    signal: &Wavepacket,
) -> cvqkd_core::Result<f64> {
    let aligned = chain.aligned_output_time(center);
    let reach = shape.feature_width().max(chain.filter().characteristic_width());
    let grid = chain.grid();
    let delta = chain.sampling().integration_time;
    let lo = (aligned - reach).max(grid.t_start());
    let hi = (aligned + reach).min(grid.t_last() - delta);
    if !(hi > lo) {
        return Ok(aligned);
    }
    let (t, _) = chain.optimal_output_time(signal, lo, hi, 41)?;
    Ok(t)
}

pub fn build_dsp(
    cfg: &DspConfig,
    chain: &ReceiverChain,
    shape: &PulseShape,
    center: f64,
    t_j: f64,
    signal: &Wavepacket,
) -> cvqkd_core::Result<DspKernel> {
    let s = chain.sampling();
    match cfg {
        DspConfig::SinglePoint => Ok(DspKernel::single_point()),
        DspConfig::UniformAverage { taps } => DspKernel::uniform_average(*taps),
        DspConfig::Weights { coefficients, offset } => DspKernel::new(coefficients.clone(), *offset),
        DspConfig::Envelope { taps } => {
            let shape = *shape;
            DspKernel::envelope_weights(
                move |t| shape.amplitude(t),
                *taps,
                s.interval(),
                s.integration_time,
                center + chain.filter().group_delay(),
                t_j,
            )
        }
        DspConfig::Matched { taps } => {
            let layout = chain.with_dsp(DspKernel::uniform_average(*taps)?);
            layout.matched_kernel(t_j, signal)
        }
        DspConfig::Rrc { rolloff, span } => DspKernel::rrc(*rolloff, s.samples_per_period, *span),
    }
}
