//! Band-limited homodyne detection, integral sampling and linear DSP.
//!
//! For an output aligned with sampling time `t_j` the chain reduces to a real
//! weighting kernel
//!
//! ```text
//! G(τ) = Σ_i f_i ∫_{t_i}^{t_i+Δt_s} g(t − τ) dt
//! ```
//!
//! and the shot-noise-normalized DSP output is the quadrature of the single
//! temporal mode
//!
//! ```text
//! Ξ(τ) = √μ_LO · ξ_LO(τ) · G(τ) · e^{−iω_LO τ} / (Δt_s · σ_SNU)
//! σ²_SNU = (μ_LO/Δt_s²) ∫ |ξ_LO(τ)|² G(τ)² dτ
//! ```
//!
//! `ω_LO` is the LO frequency offset from the frame in which signal
//! envelopes are written, so a zero offset means a carrier-matched LO.

mod dsp;
mod filter;

pub use dsp::{DspKernel, SamplingSchedule};
pub use filter::{gaussian_sigma, one_pole_time_constant, DetectorFilter, FilterKind};

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::{TimeGrid, Wavepacket};

#[derive(Debug, Clone, PartialEq)]
pub struct LocalOscillator {
    /// Mean photon number in the envelope (or in the window for a CW LO).
    pub mu: f64,
    pub envelope: Wavepacket,
    /// Frequency offset from the signal frame, rad/s.
    pub omega: f64,
    /// Measurement phase, rad.
    pub theta: f64,
}

impl LocalOscillator {
    pub fn new(mu: f64, envelope: Wavepacket, omega: f64, theta: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::invalid(format!("LO photon number must be positive, got {mu}")));
        }
        if !envelope.is_normalized() {
            return Err(Error::invalid("LO envelope must be normalized"));
        }
        if !omega.is_finite() || !theta.is_finite() {
            return Err(Error::invalid("LO frequency and phase must be finite"));
        }
        Ok(Self {
            mu,
            envelope,
            omega,
            theta,
        })
    }

    /// Continuous-wave LO: constant envelope normalized over the window.
    pub fn cw(grid: TimeGrid, mu: f64) -> Result<Self> {
        let envelope = Wavepacket::from_real_fn(grid, |_| 1.0).normalize()?;
        Self::new(mu, envelope, 0.0, 0.0)
    }

    pub fn with_phase(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_offset(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn grid(&self) -> &TimeGrid {
        self.envelope.grid()
    }
}

/// LO, detector filter, sampling schedule and DSP kernel on one grid.
/// Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverChain {
    lo: LocalOscillator,
    filter: DetectorFilter,
    sampling: SamplingSchedule,
    dsp: DspKernel,
}

/// Everything the chain induces for one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedMode {
    pub t_j: f64,
    /// `G(τ)`, real and unnormalized.
    pub kernel: Wavepacket,
    pub sigma_snu: f64,
    /// `Ξ_DSP`, normalized.
    pub mode: Wavepacket,
}

/// First two moments of the normalized DSP output, in shot-noise units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveMeasurement {
    pub mean: f64,
    pub variance: f64,
    pub eta: f64,
    /// `⟨Ξ_DSP, ξ_signal⟩`.
    pub overlap: Complex64,
}

/// Pairwise overlaps of the modes induced at several output times.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosstalkMatrix {
    pub times: Vec<f64>,
    pub entries: Vec<Vec<Complex64>>,
}

impl CrosstalkMatrix {
    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.entries.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i != j {
                    worst = worst.max(v.norm());
                }
            }
        }
        worst
    }

    /// Index pairs `(i, j)`, `i < j`, whose overlap magnitude exceeds `tol`.
    pub fn violations(&self, tol: f64) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, row) in self.entries.iter().enumerate() {
            for (j, v) in row.iter().enumerate().skip(i + 1) {
                if v.norm() > tol {
                    out.push((i, j, v.norm()));
                }
            }
        }
        out
    }
}

impl ReceiverChain {
    pub fn new(
        lo: LocalOscillator,
        filter: DetectorFilter,
        sampling: SamplingSchedule,
        dsp: DspKernel,
    ) -> Result<Self> {
        sampling.validate()?;
        if !lo.grid().same_spacing(&TimeGrid::new(0.0, filter.dt(), 2)?) {
            return Err(Error::GridMismatch(format!(
                "filter spacing {:e} differs from LO grid spacing {:e}",
                filter.dt(),
                lo.grid().dt()
            )));
        }
        let width = filter.characteristic_width();
        if !matches!(filter.kind(), FilterKind::DeltaLike) {
            lo.grid().check_resolution(width);
        }
        Ok(Self {
            lo,
            filter,
            sampling,
            dsp,
        })
    }

    pub fn lo(&self) -> &LocalOscillator {
        &self.lo
    }

    pub fn filter(&self) -> &DetectorFilter {
        &self.filter
    }

    pub fn sampling(&self) -> &SamplingSchedule {
        &self.sampling
    }

    pub fn dsp(&self) -> &DspKernel {
        &self.dsp
    }

    pub fn grid(&self) -> &TimeGrid {
        self.lo.grid()
    }

    pub fn with_dsp(&self, dsp: DspKernel) -> Self {
        Self { dsp, ..self.clone() }
    }

    pub fn with_lo(&self, lo: LocalOscillator) -> Result<Self> {
        Self::new(lo, self.filter.clone(), self.sampling, self.dsp.clone())
    }

    /// Output time that centres a single-window response on `peak`:
    /// `peak + group delay − Δt_s/2`.
    pub fn aligned_output_time(&self, peak: f64) -> f64 {
        peak + self.filter.group_delay() - self.sampling.integration_time / 2.0
    }

    pub fn sample_times(&self, t_j: f64) -> Vec<f64> {
        self.sampling.sample_times(t_j, &self.dsp)
    }

    /// `G(τ)` on the chain grid.
    pub fn gdsp_kernel(&self, t_j: f64) -> Result<Wavepacket> {
        let grid = *self.grid();
        let starts = self.sample_times(t_j);
        let delta = self.sampling.integration_time;
        for &s in &starts {
            if !grid.contains(s) || !grid.contains(s + delta) {
                return Err(Error::Truncation(format!(
                    "sampling window [{s:e}, {:e}] leaves the grid [{:e}, {:e}]",
                    s + delta,
                    grid.t_start(),
                    grid.t_last()
                )));
            }
        }
        let mut g = vec![0.0; grid.len()];
        let support = self.filter.support();
        for (&f, &s) in self.dsp.coefficients().iter().zip(&starts) {
            if f == 0.0 {
                continue;
            }
            // G_i(τ) is non-zero only for s − support < τ < s + Δt_s.
            let lo = (grid.fractional_index(s - support).floor().max(0.0)) as usize;
            let hi = (grid.fractional_index(s + delta).ceil() as usize).min(grid.len() - 1);
            for (k, gk) in g.iter_mut().enumerate().take(hi + 1).skip(lo) {
                let tau = grid.time(k);
                *gk += f * (self.filter.step_response(s + delta - tau) - self.filter.step_response(s - tau));
            }
        }
        Wavepacket::new(grid, g.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
    }

    fn sigma_from_kernel(&self, kernel: &Wavepacket) -> Result<f64> {
        let dt = self.grid().dt();
        let integral: f64 = self
            .lo
            .envelope
            .samples()
            .iter()
            .zip(kernel.samples())
            .map(|(x, g)| x.norm_sqr() * g.re * g.re)
            .sum::<f64>()
            * dt;
        let delta = self.sampling.integration_time;
        let var = self.lo.mu / (delta * delta) * integral;
        if !(var > 0.0) || !var.is_finite() {
            return Err(Error::DegenerateKernel(format!(
                "shot-noise variance is {var:e}; the kernel does not see the LO"
            )));
        }
        Ok(var.sqrt())
    }

    /// `scale·ξ_LO(τ)·G(τ)·e^{−iωτ}`.
    fn weighted_lo(&self, kernel: &Wavepacket, scale: f64) -> Result<Wavepacket> {
        let omega = self.lo.omega;
        let samples = self
            .grid()
            .times()
            .zip(self.lo.envelope.samples())
            .zip(kernel.samples())
            .map(|((t, x), g)| x * (g.re * scale) * Complex64::from_polar(1.0, -omega * t))
            .collect();
        Wavepacket::new(*self.grid(), samples)
    }

    /// Shot-noise standard deviation of the raw DSP output.
    pub fn snu_sigma(&self, t_j: f64) -> Result<f64> {
        self.sigma_from_kernel(&self.gdsp_kernel(t_j)?)
    }

    pub fn induced_mode(&self, t_j: f64) -> Result<InducedMode> {
        let kernel = self.gdsp_kernel(t_j)?;
        let sigma = self.sigma_from_kernel(&kernel)?;
        let scale = self.lo.mu.sqrt() / (self.sampling.integration_time * sigma);
        let mode = self.weighted_lo(&kernel, scale)?;
        Ok(InducedMode {
            t_j,
            kernel,
            sigma_snu: sigma,
            mode,
        })
    }

    /// `Ξ_DSP` for output time `t_j`.
    pub fn dsp_temporal_mode(&self, t_j: f64) -> Result<Wavepacket> {
        Ok(self.induced_mode(t_j)?.mode)
    }

    /// `|⟨Ξ_DSP, signal⟩|²`.
    pub fn mode_match_eta(&self, t_j: f64, signal_tm: &Wavepacket) -> Result<f64> {
        check_normalized(signal_tm)?;
        let mode = self.dsp_temporal_mode(t_j)?;
        Ok(mode.overlap_sq(signal_tm)?.min(1.0))
    }

    pub fn crosstalk_matrix(&self, t_list: &[f64]) -> Result<CrosstalkMatrix> {
        let modes = t_list
            .iter()
            .map(|&t| self.dsp_temporal_mode(t))
            .collect::<Result<Vec<_>>>()?;
        let mut entries = vec![vec![Complex64::new(0.0, 0.0); modes.len()]; modes.len()];
        for i in 0..modes.len() {
            for j in i..modes.len() {
                let v = modes[i].inner_product(&modes[j])?;
                entries[i][j] = v;
                entries[j][i] = v.conj();
            }
        }
        Ok(CrosstalkMatrix {
            times: t_list.to_vec(),
            entries,
        })
    }

    /// Mean `2·Re(γ·c·e^{−iθ})` with `c = ⟨Ξ_DSP, ξ⟩` and unit variance.
    ///
    /// For a phase-aligned overlap (`c = √η`) the mean is
    /// `2√η·Re(γ e^{−iθ})`.
    pub fn effective_measurement(
        &self,
        t_j: f64,
        gamma: Complex64,
        signal_tm: &Wavepacket,
    ) -> Result<EffectiveMeasurement> {
        check_normalized(signal_tm)?;
        let mode = self.dsp_temporal_mode(t_j)?;
        let overlap = mode.inner_product(signal_tm)?;
        let mean = 2.0 * (gamma * overlap * Complex64::from_polar(1.0, -self.lo.theta)).re;
        Ok(EffectiveMeasurement {
            mean,
            variance: 1.0,
            eta: overlap.norm_sqr().min(1.0),
            overlap,
        })
    }

    /// Scans `steps` output times across `[t_lo, t_hi]`, then refines the
    /// best one by golden-section search. Returns `(t_j, η)`.
    pub fn optimal_output_time(
        &self,
        signal_tm: &Wavepacket,
        t_lo: f64,
        t_hi: f64,
        steps: usize,
    ) -> Result<(f64, f64)> {
        if !(t_hi > t_lo) || steps < 2 {
            return Err(Error::invalid("search needs t_hi > t_lo and at least two steps"));
        }
        let eta = |t: f64| self.mode_match_eta(t, signal_tm);
        let h = (t_hi - t_lo) / (steps - 1) as f64;
        let mut best = (t_lo, f64::NEG_INFINITY);
        for k in 0..steps {
            let t = t_lo + k as f64 * h;
            let e = eta(t)?;
            if e > best.1 {
                best = (t, e);
            }
        }
        let (mut a, mut b) = ((best.0 - h).max(t_lo), (best.0 + h).min(t_hi));
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let (mut fc, mut fd) = (eta(c)?, eta(d)?);
        for _ in 0..60 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = eta(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = eta(d)?;
            }
        }
        let t = 0.5 * (a + b);
        let e = eta(t)?;
        Ok(if e >= best.1 { (t, e) } else { best })
    }

    /// DSP kernel on the current tap layout that maximizes `η` against
    /// `signal_tm`.
    ///
    /// Each coefficient contributes a basis mode `φ_i = ξ_LO·G_i·e^{−iωτ}`;
    /// with Gram matrix `Γ` and overlaps `b = ⟨φ, ξ⟩` the optimum over real
    /// weights lies in the span of `Γ⁻¹Re b` and `Γ⁻¹Im b`.
    pub fn matched_kernel(&self, t_j: f64, signal_tm: &Wavepacket) -> Result<DspKernel> {
        check_normalized(signal_tm)?;
        let n = self.dsp.len();
        let basis = (0..n)
            .map(|i| {
                let mut unit = vec![0.0; n];
                unit[i] = 1.0;
                let chain = self.with_dsp(DspKernel::new(unit, self.dsp.offset())?);
                self.weighted_lo(&chain.gdsp_kernel(t_j)?, 1.0)
            })
            .collect::<Result<Vec<_>>>()?;
        let gram = DMatrix::from_fn(n, n, |i, j| {
            basis[i].inner_product(&basis[j]).map(|c| c.re).unwrap_or(0.0)
        });
        let b = basis
            .iter()
            .map(|phi| phi.inner_product(signal_tm))
            .collect::<Result<Vec<_>>>()?;
        let b_re = DVector::from_iterator(n, b.iter().map(|c| c.re));
        let b_im = DVector::from_iterator(n, b.iter().map(|c| c.im));
        let chol = gram
            .clone()
            .cholesky()
            .ok_or_else(|| Error::DegenerateKernel("tap responses are linearly dependent".into()))?;
        let u_re = chol.solve(&b_re);
        let u_im = chol.solve(&b_im);
        let m = Matrix2::new(b_re.dot(&u_re), b_re.dot(&u_im), b_im.dot(&u_re), b_im.dot(&u_im));
        let eig = SymmetricEigen::new(m);
        let top = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
        let v = eig.eigenvectors.column(top);
        let mut w = &u_re * v[0] + &u_im * v[1];
        let peak = w
            .iter()
            .cloned()
            .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
        if peak != 0.0 {
            w /= peak;
        }
        DspKernel::new(w.iter().copied().collect(), self.dsp.offset())
    }
}

fn check_normalized(w: &Wavepacket) -> Result<()> {
    if (w.norm_sq() - 1.0).abs() > 1e-6 {
        Err(Error::invalid(format!(
            "signal mode must be normalized (norm² = {})",
            w.norm_sq()
        )))
    } else {
        Ok(())
    }
}
