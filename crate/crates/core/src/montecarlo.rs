//! Seeded Monte Carlo simulation of sampled homodyne traces.
//!
//! Vacuum noise enters the difference photocurrent as white Gaussian noise
//! weighted by the LO envelope: the sample on fine-grid cell `m` has
//! variance `μ_LO·|ξ_LO(τ_m)|²/dt`. The photocurrent is filtered by the
//! detector's cell taps, integrated over each sampling window and combined
//! by the DSP kernel, exactly the path that defines `G(τ)` analytically.
//!
//! Every shot draws from its own ChaCha8 stream `(seed, shot_index)`, and
//! within a shot the normal deviate for grid cell `m` sits at a fixed
//! position of that stream. Results therefore do not depend on the thread
//! count, and a shot simulated on a sub-window of the grid sees the same
//! noise as the full-grid trace.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::statistics::Statistics;

use crate::error::{Error, Result};
use crate::receiver::{DspKernel, FilterKind, ReceiverChain};
use crate::signal::{TimeGrid, Wavepacket};
use crate::transmitter::SymbolTrain;

/// Smallest number of shots accepted by the calibration routine.
pub const MIN_CALIBRATION_SHOTS: usize = 1000;

/// Filtered photocurrent, one cell average per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrace {
    pub grid: TimeGrid,
    pub samples: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationReport {
    pub sigma_empirical: f64,
    pub sigma_analytic: f64,
    pub n_shots: usize,
    /// `(σ²_emp − σ²_ana)/stderr(σ²_emp)`.
    pub z_score: f64,
    pub mean: f64,
    pub seed: u64,
}

impl CalibrationReport {
    pub fn passes(&self, max_abs_z: f64) -> bool {
        self.z_score.abs() < max_abs_z
    }
}

impl std::fmt::Display for CalibrationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "n_shots          {}", self.n_shots)?;
        writeln!(f, "seed             {}", self.seed)?;
        writeln!(f, "sigma_empirical  {:.11e}", self.sigma_empirical)?;
        writeln!(f, "sigma_analytic   {:.11e}", self.sigma_analytic)?;
        writeln!(f, "mean             {:.11e}", self.mean)?;
        write!(f, "z_score          {:.6}", self.z_score)
    }
}

/// What the vacuum calibration run feeds into the variance estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationMode {
    /// Vacuum data pass through the same sampling and DSP as the signal.
    SameDsp,
    /// Only the raw sample at `t_j` is used, without DSP. This is a wrong
    /// procedure, kept to show that it fails the comparison.
    RawSamples,
}

/// Sample mean and unbiased variance of a batch of shots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleStats {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
}

impl EnsembleStats {
    fn from_samples(x: &[f64]) -> Self {
        Self {
            n: x.len(),
            mean: x.mean(),
            variance: x.variance(),
        }
    }

    /// Standard error of the mean.
    pub fn mean_stderr(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }

    /// Large-sample standard error of the variance of Gaussian data.
    pub fn variance_stderr(&self) -> f64 {
        self.variance * (2.0 / (self.n as f64 - 1.0)).sqrt()
    }
}

/// Per-symbol data of a prepare-and-measure run.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolRun {
    /// Alice's reference quadrature `2·Re(γ_k)`, variance `V_A`.
    pub reference: Vec<f64>,
    /// Bob's normalized homodyne outputs.
    pub measured: Vec<f64>,
}

/// Transmittance and excess noise inferred from correlated data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcessNoiseEstimate {
    /// Estimated `t²` where `measured ≈ t·reference + noise`.
    pub transmittance: f64,
    /// Input-referred excess noise in SNU.
    pub epsilon: f64,
    /// Large-sample standard error of `epsilon`.
    pub epsilon_stderr: f64,
}

fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Standard normals for cells `lo..hi`. Cells `2p` and `2p + 1` share one
/// Box-Muller pair stored at word offset `4p`, so any sub-range reproduces
/// the corresponding slice of the full draw.
fn normals(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> Vec<f64> {
    let first_pair = lo / 2;
    rng.set_word_pos(4 * first_pair as u128);
    let mut out = Vec::with_capacity(hi - lo + 1);
    let mut m = 2 * first_pair;
    while m < hi {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        for z in [r * c, r * s] {
            if m >= lo && m < hi {
                out.push(z);
            }
            m += 1;
        }
    }
    out
}

fn check_resolution(chain: &ReceiverChain) -> Result<()> {
    let filter = chain.filter();
    if matches!(filter.kind(), FilterKind::DeltaLike) {
        return Ok(());
    }
    let width = filter.characteristic_width();
    let dt = chain.grid().dt();
    if width < 2.0 * dt {
        return Err(Error::Resolution(format!(
            "detector response width {width:e} s is below two grid steps ({dt:e} s)"
        )));
    }
    Ok(())
}

/// Precomputed geometry of one DSP output: which noise cells matter, the
/// filter taps and the integration windows.
struct ShotPlan {
    dt: f64,
    /// First noise cell that reaches the windows through the filter.
    m_lo: usize,
    /// First and one-past-last knot of the cumulative trace.
    k_lo: usize,
    k_hi: usize,
    taps: Vec<f64>,
    /// `√(μ/dt)·|ξ_LO|` for cells `m_lo..k_hi`.
    noise_std: Vec<f64>,
    /// `(coefficient, fractional start index, fractional end index)`.
    windows: Vec<(f64, f64, f64)>,
    delta: f64,
}

impl ShotPlan {
    fn new(chain: &ReceiverChain, t_j: f64) -> Result<Self> {
        check_resolution(chain)?;
        // Validates that every window lies on the grid.
        chain.gdsp_kernel(t_j)?;
        let grid = *chain.grid();
        let delta = chain.sampling().integration_time;
        let windows: Vec<(f64, f64, f64)> = chain
            .dsp()
            .coefficients()
            .iter()
            .zip(chain.sample_times(t_j))
            .map(|(&f, s)| (f, grid.fractional_index(s), grid.fractional_index(s + delta)))
            .collect();
        let lo = windows.iter().map(|w| w.1).fold(f64::INFINITY, f64::min);
        let hi = windows.iter().map(|w| w.2).fold(f64::NEG_INFINITY, f64::max);
        let k_lo = (lo.floor().max(0.0)) as usize;
        let k_hi = ((hi.floor() as usize) + 2).min(grid.len() + 1);
        Self::with_range(chain, k_lo, k_hi, windows)
    }

    /// Plan covering every knot of the grid, with no windows.
    fn full(chain: &ReceiverChain) -> Result<Self> {
        check_resolution(chain)?;
        Self::with_range(chain, 0, chain.grid().len() + 1, Vec::new())
    }

    fn with_range(chain: &ReceiverChain, k_lo: usize, k_hi: usize, windows: Vec<(f64, f64, f64)>) -> Result<Self> {
        let grid = chain.grid();
        let dt = grid.dt();
        let taps = chain.filter().taps();
        let m_lo = k_lo.saturating_sub(taps.len() - 1);
        let m_hi = (k_hi.max(1) - 1).min(grid.len());
        let scale = (chain.lo().mu / dt).sqrt();
        let noise_std = chain.lo().envelope.samples()[m_lo..m_hi]
            .iter()
            .map(|x| scale * x.norm())
            .collect();
        Ok(Self {
            dt,
            m_lo,
            k_lo,
            k_hi,
            taps,
            noise_std,
            windows,
            delta: chain.sampling().integration_time,
        })
    }

    /// Photocurrent on cells `m_lo..`: vacuum noise plus an optional
    /// deterministic signal term.
    fn photocurrent(&self, rng: &mut ChaCha8Rng, mean: Option<&[f64]>) -> Vec<f64> {
        let m_hi = self.m_lo + self.noise_std.len();
        let mut n = normals(rng, self.m_lo, m_hi);
        for (x, s) in n.iter_mut().zip(&self.noise_std) {
            *x *= s;
        }
        if let Some(mean) = mean {
            for (x, m) in n.iter_mut().zip(mean) {
                *x += m;
            }
        }
        n
    }

    /// Filtered photocurrent `f_k = Σ_l h_l·n_{k−l}` for cells
    /// `k_lo..k_hi − 1`.
    fn filtered(&self, current: &[f64]) -> Vec<f64> {
        let cells = self.k_hi - 1 - self.k_lo;
        (0..cells)
            .map(|c| {
                let k = self.k_lo + c;
                let reach = (k + 1 - self.m_lo).min(self.taps.len());
                self.taps[..reach]
                    .iter()
                    .enumerate()
                    .map(|(l, h)| h * current[k - l - self.m_lo])
                    .sum()
            })
            .collect()
    }

    /// `Σ_i f_i·∫_{window i} f(t) dt / Δt_s` from the cumulative trace.
    fn dsp_output(&self, trace: &[f64]) -> f64 {
        let mut cumulative = Vec::with_capacity(trace.len() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for v in trace {
            acc += v * self.dt;
            cumulative.push(acc);
        }
        let at = |u: f64| {
            let x = u - self.k_lo as f64;
            let k = (x.floor().max(0.0) as usize).min(cumulative.len() - 2);
            let frac = x - k as f64;
            cumulative[k] * (1.0 - frac) + cumulative[k + 1] * frac
        };
        self.windows.iter().map(|&(f, a, b)| f * (at(b) - at(a))).sum::<f64>() / self.delta
    }

    fn shot(&self, seed: u64, index: u64, mean: Option<&[f64]>) -> f64 {
        let mut rng = shot_rng(seed, index);
        let current = self.photocurrent(&mut rng, mean);
        self.dsp_output(&self.filtered(&current))
    }

    /// Mean photocurrent `√μ·2·Re(ξ_LO*·e^{i(ωτ−θ)}·γ·ξ)` on the plan cells.
    fn signal_current(&self, chain: &ReceiverChain, gamma: Complex64, signal_tm: &Wavepacket) -> Result<Vec<f64>> {
        chain.grid().ensure_same(signal_tm.grid())?;
        let lo = chain.lo();
        let root_mu = lo.mu.sqrt();
        let grid = chain.grid();
        Ok((self.m_lo..self.m_lo + self.noise_std.len())
            .map(|m| {
                let phase = Complex64::from_polar(1.0, lo.omega * grid.time(m) - lo.theta);
                root_mu * 2.0 * (lo.envelope.samples()[m].conj() * phase * gamma * signal_tm.samples()[m]).re
            })
            .collect())
    }
}

/// Full-grid vacuum photocurrent after the detector filter, stream 0 of
/// `seed`.
pub fn simulate_vacuum_trace(chain: &ReceiverChain, seed: u64) -> Result<NoiseTrace> {
    let plan = ShotPlan::full(chain)?;
    let mut rng = shot_rng(seed, 0);
    let current = plan.photocurrent(&mut rng, None);
    Ok(NoiseTrace {
        grid: *chain.grid(),
        samples: plan.filtered(&current),
        seed,
    })
}

/// Integral sampling and DSP applied to a full-grid trace: the raw
/// (unnormalized) output aligned with `t_j`.
pub fn sample_trace(chain: &ReceiverChain, trace: &NoiseTrace, t_j: f64) -> Result<f64> {
    chain.grid().ensure_same(&trace.grid)?;
    let mut plan = ShotPlan::new(chain, t_j)?;
    plan.k_lo = 0;
    Ok(plan.dsp_output(&trace.samples))
}

/// Raw vacuum DSP outputs for shots `0..n`.
fn vacuum_outputs(chain: &ReceiverChain, t_j: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let plan = ShotPlan::new(chain, t_j)?;
    Ok((0..n as u64)
        .into_par_iter()
        .map(|i| plan.shot(seed, i, None))
        .collect())
}

/// One normalized signal datum (SNU) for shot `shot_index` of `seed`.
pub fn simulate_signal_shot(
    chain: &ReceiverChain,
    t_j: f64,
    gamma: Complex64,
    signal_tm: &Wavepacket,
    seed: u64,
    shot_index: u64,
) -> Result<f64> {
    let plan = ShotPlan::new(chain, t_j)?;
    let sigma = chain.snu_sigma(t_j)?;
    let mean = plan.signal_current(chain, gamma, signal_tm)?;
    Ok(plan.shot(seed, shot_index, Some(&mean)) / sigma)
}

/// Statistics of `n` normalized signal shots with a fixed amplitude.
pub fn simulate_signal_ensemble(
    chain: &ReceiverChain,
    t_j: f64,
    gamma: Complex64,
    signal_tm: &Wavepacket,
    n: usize,
    seed: u64,
) -> Result<EnsembleStats> {
    if n < 2 {
        return Err(Error::invalid("an ensemble needs at least two shots"));
    }
    let plan = ShotPlan::new(chain, t_j)?;
    let sigma = chain.snu_sigma(t_j)?;
    let mean = plan.signal_current(chain, gamma, signal_tm)?;
    let data: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| plan.shot(seed, i, Some(&mean)) / sigma)
        .collect();
    Ok(EnsembleStats::from_samples(&data))
}

/// Sends every symbol of `train`, scaled by `amplitude_transmittance`,
/// through the chain; symbol `k` is shot `k` of `seed`.
///
/// The homodyne reference is `2·Re(γ_k)`, the quadrature measured at
/// `θ = 0` by a phase-aligned receiver.
pub fn simulate_symbols(
    chain: &ReceiverChain,
    t_j: f64,
    train: &SymbolTrain,
    amplitude_transmittance: f64,
    signal_tm: &Wavepacket,
    seed: u64,
) -> Result<SymbolRun> {
    let plan = ShotPlan::new(chain, t_j)?;
    let sigma = chain.snu_sigma(t_j)?;
    // The signal term is linear in γ: precompute the responses to 1 and i.
    let re = plan.signal_current(chain, Complex64::new(1.0, 0.0), signal_tm)?;
    let im = plan.signal_current(chain, Complex64::new(0.0, 1.0), signal_tm)?;
    let gammas = train.displacements();
    let measured = gammas
        .par_iter()
        .enumerate()
        .map(|(k, g)| {
            let g = g * amplitude_transmittance;
            let mean: Vec<f64> = re.iter().zip(&im).map(|(a, b)| g.re * a + g.im * b).collect();
            plan.shot(seed, k as u64, Some(&mean)) / sigma
        })
        .collect();
    Ok(SymbolRun {
        reference: gammas.iter().map(|g| 2.0 * g.re).collect(),
        measured,
    })
}

/// Linear-regression estimate of `t²` and input-referred excess noise from
/// `measured = t·reference + noise`, with shot noise fixed to 1 SNU.
pub fn estimate_excess_noise(run: &SymbolRun) -> Result<ExcessNoiseEstimate> {
    let n = run.reference.len();
    if n < 3 || run.measured.len() != n {
        return Err(Error::invalid("excess-noise estimate needs matched data of length ≥ 3"));
    }
    let var_x = run.reference.iter().variance();
    let var_y = run.measured.iter().variance();
    let cov = run.reference.iter().covariance(run.measured.iter());
    if !(var_x > 0.0) {
        return Err(Error::invalid("reference data have zero variance"));
    }
    let t = cov / var_x;
    if t == 0.0 {
        return Err(Error::invalid("no correlation between reference and measured data"));
    }
    let t2 = t * t;
    let epsilon = (var_y - 1.0 - t2 * var_x) / t2;
    // The residual variance dominates the uncertainty: var ≈ 2/n per unit.
    let residual = var_y - t2 * var_x;
    let epsilon_stderr = residual * (2.0 / n as f64).sqrt() / t2;
    Ok(ExcessNoiseEstimate {
        transmittance: t2,
        epsilon,
        epsilon_stderr,
    })
}

/// Vacuum calibration through the identical sampling and DSP path.
pub fn calibrate_snu_empirical(
    chain: &ReceiverChain,
    t_j: f64,
    n_shots: usize,
    seed: u64,
) -> Result<CalibrationReport> {
    calibrate_snu_with(chain, t_j, n_shots, seed, CalibrationMode::SameDsp)
}

pub fn calibrate_snu_with(
    chain: &ReceiverChain,
    t_j: f64,
    n_shots: usize,
    seed: u64,
    mode: CalibrationMode,
) -> Result<CalibrationReport> {
    if n_shots < MIN_CALIBRATION_SHOTS {
        return Err(Error::invalid(format!(
            "calibration needs at least {MIN_CALIBRATION_SHOTS} shots, got {n_shots}"
        )));
    }
    let sigma_analytic = chain.snu_sigma(t_j)?;
    let data = match mode {
        CalibrationMode::SameDsp => vacuum_outputs(chain, t_j, n_shots, seed)?,
        CalibrationMode::RawSamples => {
            let raw = chain.with_dsp(DspKernel::single_point());
            vacuum_outputs(&raw, t_j, n_shots, seed)?
        }
    };
    let stats = EnsembleStats::from_samples(&data);
    let z_score = (stats.variance - sigma_analytic * sigma_analytic) / stats.variance_stderr();
    Ok(CalibrationReport {
        sigma_empirical: stats.variance.sqrt(),
        sigma_analytic,
        n_shots,
        z_score,
        mean: stats.mean,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::receiver::{DetectorFilter, LocalOscillator, SamplingSchedule};
    use crate::transmitter::{make_symbol_train, render_pulse, PulseShape};
    use crate::PS;

    fn chain_with(filter: DetectorFilter, dsp: DspKernel) -> ReceiverChain {
        let g = TimeGrid::centered(100.0 * PS, 0.5 * PS).unwrap();
        let lo = LocalOscillator::cw(g, 1e6).unwrap();
        let sampling = SamplingSchedule::new(4.0 * PS, 40.0 * PS, 10).unwrap();
        ReceiverChain::new(lo, filter, sampling, dsp).unwrap()
    }

    fn delta_chain(dsp: DspKernel) -> ReceiverChain {
        chain_with(DetectorFilter::delta_like(0.5 * PS).unwrap(), dsp)
    }

    #[test]
    fn normals_are_index_addressable() {
        let full = normals(&mut shot_rng(9, 4), 0, 101);
        let part = normals(&mut shot_rng(9, 4), 37, 60);
        assert_eq!(&full[37..60], &part[..]);
        let odd = normals(&mut shot_rng(9, 4), 1, 2);
        assert_eq!(odd[0], full[1]);
        assert_ne!(normals(&mut shot_rng(9, 5), 0, 10), full[..10].to_vec());
    }

    #[test]
    fn identical_seeds_give_identical_traces() {
        let rx = chain_with(
            DetectorFilter::one_pole_lowpass(30e9, 0.5 * PS).unwrap(),
            DspKernel::single_point(),
        );
        let a = simulate_vacuum_trace(&rx, 17).unwrap();
        let b = simulate_vacuum_trace(&rx, 17).unwrap();
        let c = simulate_vacuum_trace(&rx, 18).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.samples, c.samples);
        assert_eq!(a.samples.len(), rx.grid().len());
    }

    #[test]
    fn windowed_shot_matches_full_trace() {
        let rx = chain_with(
            DetectorFilter::gaussian_irf(6.0 * PS, 0.5 * PS).unwrap(),
            DspKernel::new(vec![0.3, 1.0, -0.4], 1).unwrap(),
        );
        let t_j = 3.3 * PS;
        let trace = simulate_vacuum_trace(&rx, 5).unwrap();
        let full = sample_trace(&rx, &trace, t_j).unwrap();
        let plan = ShotPlan::new(&rx, t_j).unwrap();
        let windowed = plan.shot(5, 0, None);
        assert!(
            (full - windowed).abs() < 1e-9 * full.abs().max(1.0),
            "{full} vs {windowed}"
        );
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let rx = chain_with(
            DetectorFilter::gaussian_irf(0.8 * PS, 0.5 * PS).unwrap(),
            DspKernel::single_point(),
        );
        assert!(matches!(simulate_vacuum_trace(&rx, 1), Err(Error::Resolution(_))));
        assert!(matches!(
            calibrate_snu_empirical(&rx, 0.0, 1000, 1),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn vacuum_data_normalize_to_one() {
        let rx = chain_with(
            DetectorFilter::one_pole_lowpass(40e9, 0.5 * PS).unwrap(),
            DspKernel::uniform_average(5).unwrap(),
        );
        let n = 20_000;
        let report = calibrate_snu_empirical(&rx, 0.0, n, 2024).unwrap();
        assert!(report.passes(3.0), "{report}");
        let normalized_var = (report.sigma_empirical / report.sigma_analytic).powi(2);
        assert!((normalized_var - 1.0).abs() < 3.0 * (2.0 / n as f64).sqrt());
        assert!((report.mean / report.sigma_analytic).abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn calibration_rejects_too_few_shots() {
        let rx = delta_chain(DspKernel::single_point());
        assert!(calibrate_snu_empirical(&rx, 0.0, 999, 0).is_err());
    }

    #[test]
    fn skipping_dsp_in_calibration_is_detected() {
        let taps = 9;
        let rx = delta_chain(
            DspKernel::envelope_weights(
                |t| (-t * t / (2.0 * (12.0 * PS).powi(2))).exp(),
                taps,
                4.0 * PS,
                4.0 * PS,
                0.0,
                0.0,
            )
            .unwrap(),
        );
        let report = calibrate_snu_with(&rx, 0.0, 5000, 3, CalibrationMode::RawSamples).unwrap();
        assert!(report.z_score.abs() > 5.0, "{report}");
    }

    #[test]
    fn signal_mean_follows_effective_measurement() {
        let rx = delta_chain(DspKernel::uniform_average(7).unwrap());
        let g = *rx.grid();
        let signal = render_pulse(&PulseShape::Gaussian { fwhm: 20.0 * PS }, g, 2.0 * PS).unwrap();
        let gamma = Complex64::new(1.2, -0.5);
        let t_j = -2.0 * PS;
        let expected = rx.effective_measurement(t_j, gamma, &signal).unwrap();
        let n = 20_000;
        let stats = simulate_signal_ensemble(&rx, t_j, gamma, &signal, n, 77).unwrap();
        assert!(
            (stats.mean - expected.mean).abs() < 3.0 / (n as f64).sqrt(),
            "{stats:?} vs {expected:?}"
        );
        assert!((stats.variance - 1.0).abs() < 3.0 * (2.0 / n as f64).sqrt());
        let single = simulate_signal_shot(&rx, t_j, gamma, &signal, 77, 3).unwrap();
        assert!(single.is_finite());
    }

    #[test]
    fn loss_only_channel_has_no_excess_noise() {
        let rx = delta_chain(DspKernel::single_point());
        let g = *rx.grid();
        let t_j = -2.0 * PS;
        let tm = rx.dsp_temporal_mode(t_j).unwrap();
        let train = make_symbol_train(11, 8000, 4.0, PulseShape::Gaussian { fwhm: 20.0 * PS }, 100.0 * PS).unwrap();
        let t_ch: f64 = 0.4;
        let run = simulate_symbols(&rx, t_j, &train, t_ch.sqrt(), &tm, 12).unwrap();
        let est = estimate_excess_noise(&run).unwrap();
        assert!((est.transmittance - t_ch).abs() < 0.05, "{est:?}");
        assert!(est.epsilon.abs() < 3.0 * est.epsilon_stderr, "{est:?}");
        assert_eq!(g, *tm.grid());
    }
}
