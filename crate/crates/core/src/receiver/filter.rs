use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::signal::{TimeGrid, Wavepacket};

/// Tail mass below which a one-pole response is cut off.
const ONE_POLE_TAIL: f64 = 1e-13;
/// Gaussian responses are delayed and truncated at this many standard
/// deviations on each side of their peak.
const GAUSSIAN_HALF_SPAN_SIGMAS: f64 = 7.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterKind {
    DeltaLike,
    /// `g(t) = e^{−t/τc}/τc` with `τc = 1/(2π·bandwidth)`.
    OnePoleLowpass {
        bandwidth_hz: f64,
    },
    /// Causal Gaussian bump of the given FWHM, delayed so that the
    /// truncated left tail is negligible.
    GaussianIrf {
        fwhm: f64,
    },
    Custom,
}

/// Band-limited detector response, stored as its step response
/// `C(u) = ∫₀^u g(s) ds` on the knots `u = m·dt`.
///
/// Between knots `C` is linearly interpolated, which lets integration
/// windows start anywhere, not just on grid points. The response is causal
/// (`C(u) = 0` for `u ≤ 0`) and has unit DC gain.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorFilter {
    kind: FilterKind,
    dt: f64,
    step: Vec<f64>,
}

impl DetectorFilter {
    /// Single cell of height `1/dt` at `t = 0`.
    pub fn delta_like(dt: f64) -> Result<Self> {
        check_dt(dt)?;
        Ok(Self {
            kind: FilterKind::DeltaLike,
            dt,
            step: vec![0.0, 1.0],
        })
    }

    pub fn one_pole_lowpass(bandwidth_hz: f64, dt: f64) -> Result<Self> {
        check_dt(dt)?;
        if !(bandwidth_hz > 0.0) || !bandwidth_hz.is_finite() {
            return Err(Error::invalid(format!(
                "bandwidth must be positive, got {bandwidth_hz}"
            )));
        }
        let tau = one_pole_time_constant(bandwidth_hz);
        let span = -ONE_POLE_TAIL.ln() * tau;
        let knots = (span / dt).ceil().max(1.0) as usize;
        let tail = 1.0 - (-(knots as f64) * dt / tau).exp();
        let step = (0..=knots)
            .map(|m| (1.0 - (-(m as f64) * dt / tau).exp()) / tail)
            .collect();
        Ok(Self {
            kind: FilterKind::OnePoleLowpass { bandwidth_hz },
            dt,
            step,
        })
    }

    pub fn gaussian_irf(fwhm: f64, dt: f64) -> Result<Self> {
        check_dt(dt)?;
        if !(fwhm > 0.0) || !fwhm.is_finite() {
            return Err(Error::invalid(format!("IRF fwhm must be positive, got {fwhm}")));
        }
        let sigma = gaussian_sigma(fwhm);
        let delay = GAUSSIAN_HALF_SPAN_SIGMAS * sigma;
        let knots = (2.0 * delay / dt).ceil().max(1.0) as usize;
        let normal = Normal::new(delay, sigma).map_err(|e| Error::invalid(e.to_string()))?;
        let c0 = normal.cdf(0.0);
        let c1 = normal.cdf(knots as f64 * dt);
        let step = (0..=knots)
            .map(|m| (normal.cdf(m as f64 * dt) - c0) / (c1 - c0))
            .collect();
        Ok(Self {
            kind: FilterKind::GaussianIrf { fwhm },
            dt,
            step,
        })
    }

    /// Arbitrary causal real IRF sampled from `t = 0`; samples are cell
    /// averages over `[t_k, t_k + dt)`. Rescaled to unit DC gain.
    pub fn from_irf(irf: &Wavepacket) -> Result<Self> {
        let grid = irf.grid();
        if grid.t_start().abs() > 1e-9 * grid.dt() {
            return Err(Error::invalid("custom IRF must start at t = 0"));
        }
        if irf.samples().iter().any(|s| s.im != 0.0) {
            return Err(Error::invalid("IRF must be real"));
        }
        let dt = grid.dt();
        let mut step = Vec::with_capacity(irf.len() + 1);
        step.push(0.0);
        let mut acc = 0.0;
        for s in irf.samples() {
            acc += s.re * dt;
            step.push(acc);
        }
        if acc == 0.0 || !acc.is_finite() {
            return Err(Error::DegenerateKernel("IRF has zero DC gain".into()));
        }
        step.iter_mut().for_each(|c| *c /= acc);
        Ok(Self {
            kind: FilterKind::Custom,
            dt,
            step,
        })
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Length of the support, `L·dt`.
    pub fn support(&self) -> f64 {
        (self.step.len() - 1) as f64 * self.dt
    }

    /// `C(u)`, linearly interpolated between knots.
    pub fn step_response(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let x = u / self.dt;
        let last = self.step.len() - 1;
        if x >= last as f64 {
            return self.step[last];
        }
        let m = x.floor() as usize;
        let f = x - m as f64;
        self.step[m] * (1.0 - f) + self.step[m + 1] * f
    }

    /// Cell masses `h_l = C((l+1)·dt) − C(l·dt)`.
    pub fn taps(&self) -> Vec<f64> {
        self.step.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Cell-averaged impulse response `g_l = h_l/dt` on a grid starting at 0.
    pub fn irf(&self) -> Wavepacket {
        let taps = self.taps();
        let n = taps.len().max(2);
        let grid = TimeGrid::new(0.0, self.dt, n).expect("dt validated on construction");
        let dt = self.dt;
        let mut k = 0;
        Wavepacket::from_real_fn(grid, |_| {
            let v = taps.get(k).copied().unwrap_or(0.0) / dt;
            k += 1;
            v
        })
    }

    /// Mean delay `∫ t·g(t) dt`.
    pub fn group_delay(&self) -> f64 {
        self.taps()
            .iter()
            .enumerate()
            .map(|(l, h)| h * (l as f64 + 0.5) * self.dt)
            .sum()
    }

    /// Time scale of the response: `dt` for delta-like, `τc` for one-pole,
    /// the FWHM for Gaussian, the support for custom responses.
    pub fn characteristic_width(&self) -> f64 {
        match self.kind {
            FilterKind::DeltaLike => self.dt,
            FilterKind::OnePoleLowpass { bandwidth_hz } => one_pole_time_constant(bandwidth_hz),
            FilterKind::GaussianIrf { fwhm } => fwhm,
            FilterKind::Custom => self.support(),
        }
    }
}

pub fn one_pole_time_constant(bandwidth_hz: f64) -> f64 {
    1.0 / (2.0 * std::f64::consts::PI * bandwidth_hz)
}

/// Standard deviation of a Gaussian with the given FWHM.
pub fn gaussian_sigma(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * 2f64.ln()).sqrt())
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("filter spacing must be positive, got {dt}")))
    }
}
