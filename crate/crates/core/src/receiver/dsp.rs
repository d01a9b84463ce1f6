use crate::error::{Error, Result};
use crate::transmitter::rrc_impulse;

/// Integral-sampling ADC clocked at `samples_per_period` per symbol period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSchedule {
    /// Length of each integration window `Δt_s`.
    pub integration_time: f64,
    pub period: f64,
    pub samples_per_period: usize,
}

impl SamplingSchedule {
    pub fn new(integration_time: f64, period: f64, samples_per_period: usize) -> Result<Self> {
        let s = Self {
            integration_time,
            period,
            samples_per_period,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.integration_time > 0.0) || !self.integration_time.is_finite() {
            return Err(Error::invalid("integration time must be positive"));
        }
        if !(self.period > 0.0) || !self.period.is_finite() {
            return Err(Error::invalid("symbol period must be positive"));
        }
        if self.samples_per_period == 0 {
            return Err(Error::invalid("need at least one sample per period"));
        }
        Ok(())
    }

    /// Spacing between consecutive sampling instants.
    pub fn interval(&self) -> f64 {
        self.period / self.samples_per_period as f64
    }

    /// Window start times feeding the DSP output aligned with `t_j`, one per
    /// kernel coefficient, strictly increasing.
    pub fn sample_times(&self, t_j: f64, kernel: &DspKernel) -> Vec<f64> {
        let s = self.interval();
        (0..kernel.len())
            .map(|i| t_j + (i as f64 - kernel.offset() as f64) * s)
            .collect()
    }
}

/// Linear DSP: output `Σ_i f_i·D(t_j + (i − offset)·interval)`.
///
/// `offset` is the index of the coefficient applied to the sample taken at
/// `t_j` itself.
#[derive(Debug, Clone, PartialEq)]
pub struct DspKernel {
    coefficients: Vec<f64>,
    offset: usize,
}

impl DspKernel {
    pub fn new(coefficients: Vec<f64>, offset: usize) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::DegenerateKernel("kernel has no coefficients".into()));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("kernel coefficients must be finite"));
        }
        if coefficients.iter().all(|&c| c == 0.0) {
            return Err(Error::DegenerateKernel("all kernel coefficients are zero".into()));
        }
        if offset >= coefficients.len() {
            return Err(Error::invalid(format!(
                "kernel offset {offset} outside {} coefficients",
                coefficients.len()
            )));
        }
        Ok(Self { coefficients, offset })
    }

    /// Keep the one sample at `t_j`.
    pub fn single_point() -> Self {
        Self {
            coefficients: vec![1.0],
            offset: 0,
        }
    }

    /// Equal weights over `taps` samples centred on `t_j`.
    pub fn uniform_average(taps: usize) -> Result<Self> {
        if taps == 0 {
            return Err(Error::DegenerateKernel("uniform average over zero taps".into()));
        }
        Self::new(vec![1.0 / taps as f64; taps], taps / 2)
    }

    /// Weights `w(t_i)` sampled from a real envelope at the window centres
    /// relative to `center`, over `taps` samples centred on `t_j`.
    pub fn envelope_weights(
        envelope: impl Fn(f64) -> f64,
        taps: usize,
        interval: f64,
        integration_time: f64,
        center: f64,
        t_j: f64,
    ) -> Result<Self> {
        let offset = taps / 2;
        let coefficients = (0..taps)
            .map(|i| {
                let t = t_j + (i as f64 - offset as f64) * interval + integration_time / 2.0;
                envelope(t - center)
            })
            .collect();
        Self::new(coefficients, offset)
    }

    /// Root-raised-cosine matched filter sampled at `samples_per_symbol`
    /// taps per symbol over `span` symbols.
    pub fn rrc(rolloff: f64, samples_per_symbol: usize, span: usize) -> Result<Self> {
        if !(rolloff > 0.0 && rolloff <= 1.0) {
            return Err(Error::invalid(format!("rrc rolloff must lie in (0, 1], got {rolloff}")));
        }
        if samples_per_symbol == 0 || span == 0 {
            return Err(Error::invalid("rrc kernel needs positive span and oversampling"));
        }
        let half = span * samples_per_symbol / 2;
        let coefficients = (0..=2 * half)
            .map(|i| rrc_impulse((i as f64 - half as f64) / samples_per_symbol as f64, rolloff))
            .collect();
        Self::new(coefficients, half)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.coefficients.iter().map(|x| x * c).collect(), self.offset)
    }
}
