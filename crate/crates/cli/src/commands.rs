//! Subcommand implementations. Each returns the CSV table and the text
//! report; writing them out is left to the caller.

use rayon::prelude::*;

use cvqkd_core::channel::{propagate, ChannelSpec};
use cvqkd_core::keyrate::{key_rate, rate_vs_distance, sampling_offset_sensitivity, KeyRateParams, RatePoint};
use cvqkd_core::montecarlo::calibrate_snu_empirical;
use cvqkd_core::receiver::ReceiverChain;
use cvqkd_core::transmitter::render_pulse;
use cvqkd_core::{Wavepacket, PS};

use crate::error::CliError;
use crate::scenario::{build_dsp, IrfConfig, Scenario, Setup, SweepConfig, SweepVariable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Calibrate,
    CompareKernels,
    Sweep,
}

/// Result files of one run. `failure` is set when the files should still
/// be written but the process must exit non-zero.
#[derive(Debug)]
pub struct Output {
    pub csv: String,
    pub report: String,
    pub failure: Option<CliError>,
}

/// Twelve significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        writer.write_record(header).expect("writing to memory");
        Self { writer }
    }

    fn row(&mut self, fields: Vec<String>) {
        self.writer.write_record(&fields).expect("writing to memory");
    }

    fn finish(self) -> String {
        String::from_utf8(self.writer.into_inner().expect("in-memory buffer")).expect("CSV is UTF-8")
    }
}

pub fn execute(command: Command, scenario: &Scenario, seed_override: Option<u64>) -> Result<Output, CliError> {
    let setup = scenario.build()?;
    match command {
        Command::Simulate => simulate(scenario, &setup),
        Command::Sweep => sweep(scenario, &setup),
        Command::Calibrate => calibrate(scenario, &setup, seed_override),
        Command::CompareKernels => compare_kernels(scenario, &setup),
    }
}

fn header(scenario: &Scenario, setup: &Setup, title: &str) -> String {
    format!(
        "scenario       {}\ncommand        {title}\noutput_time_ps {}\n",
        scenario.name,
        num(setup.t_j / PS)
    )
}

fn require_sweep(scenario: &Scenario, variable: Option<SweepVariable>) -> Result<SweepConfig, CliError> {
    let sweep = scenario
        .sweep
        .ok_or_else(|| CliError::Validation("missing field: sweep".into()))?;
    if let Some(v) = variable {
        if sweep.variable != v {
            return Err(CliError::Validation(format!(
                "sweep.variable: this command needs {}, got {}",
                v.column(),
                sweep.variable.column()
            )));
        }
    }
    Ok(sweep)
}

const RATE_COLUMNS: [&str; 8] = [
    "beta2_ps2_per_km",
    "z_km",
    "eta_tm",
    "transmittance",
    "rate_bits_per_symbol",
    "mutual_info_bits",
    "holevo_bits",
    "below_threshold",
];

fn rate_rows(table: &mut Table, beta2: f64, points: &[RatePoint]) {
    for p in points {
        table.row(vec![
            num(beta2),
            num(p.z_km),
            num(p.eta_tm),
            num(p.transmittance),
            num(p.result.rate),
            num(p.result.mutual_info),
            num(p.result.holevo),
            p.result.below_threshold.to_string(),
        ]);
    }
}

/// Last distance with a positive rate, if any.
pub fn cutoff(points: &[RatePoint]) -> Option<f64> {
    points.iter().rev().find(|p| p.result.rate > 0.0).map(|p| p.z_km)
}

fn curve(setup: &Setup, beta2: f64, z: &[f64]) -> Result<Vec<RatePoint>, CliError> {
    let template = ChannelSpec {
        beta2_ps2_per_km: beta2,
        ..setup.channel
    };
    Ok(rate_vs_distance(
        &setup.shape,
        setup.center,
        &setup.chain,
        setup.t_j,
        &template,
        &setup.keyrate,
        z,
    )?)
}

fn curve_summary(beta2: f64, points: &[RatePoint]) -> String {
    let cut = cutoff(points).map_or("none".to_string(), num);
    let monotone = points.windows(2).all(|w| w[1].result.rate <= w[0].result.rate);
    format!(
        "beta2_ps2_per_km {}: rate(z=0) {} bits/symbol, cutoff_km {cut}, monotone {monotone}\n",
        num(beta2),
        num(points.first().map_or(0.0, |p| p.result.rate)),
    )
}

fn simulate(scenario: &Scenario, setup: &Setup) -> Result<Output, CliError> {
    let sweep = require_sweep(scenario, Some(SweepVariable::ZKm))?;
    let z = sweep.values();
    let configured = setup.channel.beta2_ps2_per_km;
    let mut betas = vec![configured];
    if configured != 0.0 {
        betas.push(0.0);
    }
    let mut table = Table::new(&RATE_COLUMNS);
    let mut report = header(scenario, setup, "simulate");
    report.push_str(&format!("eta_convention {:?}\n", setup.keyrate.convention));
    for &b in &betas {
        let points = curve(setup, b, &z)?;
        rate_rows(&mut table, b, &points);
        report.push_str(&curve_summary(b, &points));
    }
    Ok(Output {
        csv: table.finish(),
        report,
        failure: None,
    })
}

fn sweep(scenario: &Scenario, setup: &Setup) -> Result<Output, CliError> {
    let sweep = require_sweep(scenario, None)?;
    let values = sweep.values();
    let mut report = header(scenario, setup, "sweep");
    let csv = match sweep.variable {
        SweepVariable::ZKm => {
            let points = curve(setup, setup.channel.beta2_ps2_per_km, &values)?;
            report.push_str(&curve_summary(setup.channel.beta2_ps2_per_km, &points));
            let mut table = Table::new(&RATE_COLUMNS);
            rate_rows(&mut table, setup.channel.beta2_ps2_per_km, &points);
            table.finish()
        }
        SweepVariable::OffsetPs => {
            let offsets: Vec<f64> = values.iter().map(|v| v * PS).collect();
            let scan = sampling_offset_sensitivity(
                &setup.chain,
                &setup.shape,
                setup.center,
                &setup.channel,
                search_window(&setup.chain, setup.center),
                &offsets,
                &setup.keyrate,
            )?;
            report.push_str(&format!("optimal_output_time_ps {}\n", num(scan.t_opt / PS)));
            if let Some(c) = scan.peak_curvature() {
                report.push_str(&format!("peak_curvature_per_ps2 {}\n", num(c * PS * PS)));
            }
            let mut table = Table::new(&["offset_ps", "eta_tm", "rate_bits_per_symbol"]);
            for p in &scan.points {
                table.row(vec![num(p.offset / PS), num(p.eta), num(p.rate)]);
            }
            table.finish()
        }
        SweepVariable::IrfWidthPs => {
            let signal = received_signal(setup)?;
            let t_ch = setup.channel.transmittance();
            let rows = values
                .par_iter()
                .map(|&w| irf_point(scenario, setup, &signal, t_ch, w))
                .collect::<Result<Vec<_>, CliError>>()?;
            let mut table = Table::new(&["irf_width_ps", "output_time_ps", "eta_tm", "rate_bits_per_symbol"]);
            for r in rows {
                table.row(r.iter().map(|x| num(*x)).collect());
            }
            table.finish()
        }
    };
    Ok(Output {
        csv,
        report,
        failure: None,
    })
}

/// Range searched for the optimal output time: half the window either side
/// of the single-window alignment, kept on the grid.
fn search_window(chain: &ReceiverChain, center: f64) -> (f64, f64) {
    let grid = chain.grid();
    let aligned = chain.aligned_output_time(center);
    let reach = 0.25 * grid.duration();
    let delta = chain.sampling().integration_time;
    (
        (aligned - reach).max(grid.t_start()),
        (aligned + reach).min(grid.t_last() - delta),
    )
}

fn received_signal(setup: &Setup) -> Result<Wavepacket, CliError> {
    let input = render_pulse(&setup.shape, setup.grid, setup.center)?;
    Ok(propagate(&input, &setup.channel.delay_compensated())?.0)
}

fn irf_point(
    scenario: &Scenario,
    setup: &Setup,
    signal: &Wavepacket,
    t_ch: f64,
    width_ps: f64,
) -> Result<[f64; 4], CliError> {
    let irf = match scenario.receiver.irf {
        IrfConfig::Gaussian { .. } => IrfConfig::Gaussian { fwhm_ps: width_ps },
        IrfConfig::OnePole { .. } => IrfConfig::OnePole {
            bandwidth_ghz: 1.0 / (2.0 * std::f64::consts::PI * width_ps * PS) / 1e9,
        },
        IrfConfig::Delta => unreachable!("rejected during validation"),
    };
    let filter = scenario.filter(irf, setup.grid.dt())?;
    let base = ReceiverChain::new(
        setup.chain.lo().clone(),
        filter,
        *setup.chain.sampling(),
        setup.chain.dsp().clone(),
    )?;
    let window = search_window(&base, setup.center);
    let (t_j, _) = base.optimal_output_time(signal, window.0, window.1, 64)?;
    let dsp = build_dsp(&scenario.receiver.dsp, &base, &setup.shape, setup.center, t_j, signal)?;
    let chain = base.with_dsp(dsp);
    let eta = chain.mode_match_eta(t_j, signal)?;
    let rate = key_rate(&KeyRateParams {
        t_ch,
        eta_tm: eta,
        ..setup.keyrate
    })?
    .rate;
    Ok([width_ps, t_j / PS, eta, rate])
}

fn calibrate(scenario: &Scenario, setup: &Setup, seed_override: Option<u64>) -> Result<Output, CliError> {
    let mc = scenario
        .montecarlo
        .ok_or_else(|| CliError::Validation("missing field: montecarlo".into()))?;
    let seed = seed_override.unwrap_or(mc.seed);
    let report = calibrate_snu_empirical(&setup.chain, setup.t_j, mc.n_shots, seed)?;
    let mut table = Table::new(&[
        "n_shots",
        "seed",
        "sigma_empirical_au",
        "sigma_analytic_au",
        "mean_au",
        "z_score",
    ]);
    table.row(vec![
        report.n_shots.to_string(),
        report.seed.to_string(),
        num(report.sigma_empirical),
        num(report.sigma_analytic),
        num(report.mean),
        num(report.z_score),
    ]);
    let mut text = header(scenario, setup, "calibrate");
    text.push_str(&report.to_string());
    text.push('\n');
    let failure = (!report.passes(3.0)).then_some(CliError::Calibration(report.z_score.abs()));
    text.push_str(if failure.is_none() {
        "status         pass\n"
    } else {
        "status         FAIL\n"
    });
    Ok(Output {
        csv: table.finish(),
        report: text,
        failure,
    })
}

/// `(name, η)` sorted by descending `η`, ties broken by name.
pub fn rank(mut entries: Vec<(String, f64)>) -> Vec<(String, f64)> {
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    entries
}

fn compare_kernels(scenario: &Scenario, setup: &Setup) -> Result<Output, CliError> {
    if scenario.kernels.len() < 2 {
        return Err(CliError::Validation(format!(
            "kernels: need at least two kernels to compare, got {}",
            scenario.kernels.len()
        )));
    }
    let signal = received_signal(setup)?;
    let t_ch = setup.channel.transmittance();
    let entries = scenario
        .kernels
        .par_iter()
        .map(|k| {
            let dsp = build_dsp(&k.dsp, &setup.chain, &setup.shape, setup.center, setup.t_j, &signal)?;
            let eta = setup.chain.with_dsp(dsp).mode_match_eta(setup.t_j, &signal)?;
            Ok((k.name.clone(), eta))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let ranked = rank(entries);
    let mut table = Table::new(&["rank", "kernel", "eta_tm", "rate_bits_per_symbol"]);
    let mut report = header(scenario, setup, "compare-kernels");
    for (i, (name, eta)) in ranked.iter().enumerate() {
        let rate = key_rate(&KeyRateParams {
            t_ch,
            eta_tm: *eta,
            ..setup.keyrate
        })?
        .rate;
        table.row(vec![(i + 1).to_string(), name.clone(), num(*eta), num(rate)]);
        report.push_str(&format!("{:>3}  {:<24} eta {}\n", i + 1, name, num(*eta)));
    }
    Ok(Output {
        csv: table.finish(),
        report,
        failure: None,
    })
}
