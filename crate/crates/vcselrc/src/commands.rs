//! One function per CLI verb. Each validates its config block, computes
//! everything in memory and returns the files to write.

use serde::Serialize;

use vcselrc_core::array::{
    calibrate_to_target, homogeneity_report, locked_fraction, sample_array, sweep_targets, CalibrationResult,
    HomogeneityReport,
};
use vcselrc_core::budget::{array_budget, BudgetReport};
use vcselrc_core::device::{
    beta_scurve, fit_beta, fit_li, li_output, wavelength_of_current, BetaFit, DeviceParams, LiFit,
};
use vcselrc_core::locking::{
    bias_dependent_slope, calibrate_q_law, fit_locking_boundaries, locking_bounds, nu_over_q_at,
    rc_locking_extrapolation, synth_locking_map, BoundaryFit, BoundaryPoint, LockingParams, RcExtrapolation,
};
use vcselrc_core::numeric::Summary;
use vcselrc_core::reservoir::{build_doe_coupling, run_task, ReadoutWeights, TaskReport};
use vcselrc_core::Bound;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{Cell, Format, OutputSet, Provenance, Table, TOOL, VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Characterize,
    Locking,
    Calibrate,
    Rc,
    Budget,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Characterize => "characterize",
            Command::Locking => "locking",
            Command::Calibrate => "calibrate",
            Command::Rc => "rc",
            Command::Budget => "budget",
        }
    }
}

pub fn run(command: Command, config: &RunConfig, format: Format) -> Result<OutputSet> {
    let prov = Provenance {
        tool: TOOL,
        version: VERSION,
        command: command.name().to_owned(),
        seed: config.seed,
        config_sha256: config.sha256()?,
    };
    let mut out = OutputSet::default();
    match command {
        Command::Characterize => characterize(config, &prov, format, &mut out)?,
        Command::Locking => locking(config, &prov, format, &mut out)?,
        Command::Calibrate => calibrate(config, &prov, format, &mut out)?,
        Command::Rc => rc(config, &prov, format, &mut out)?,
        Command::Budget => budget(config, &prov, format, &mut out)?,
    }
    out.report(&format!("{}_provenance", command.name()), &prov, &serde_json::json!({ "config": config }))?;
    Ok(out)
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
}

fn logspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.log10(), hi.log10());
    linspace(a, b, n).map(|e| 10f64.powf(e))
}

#[derive(Serialize)]
struct CharacterizeSummary {
    device: DeviceParams,
    li_fit: LiFit,
    li_fit_window_ua: f64,
    beta_fit: BetaFit,
}

fn characterize(config: &RunConfig, prov: &Provenance, format: Format, out: &mut OutputSet) -> Result<()> {
    let c = &config.characterize;
    c.validate()?;
    let d = &c.device;
    let mut li = Table::new("li_sweep", &["current_uA", "power_mW", "wavelength_nm"]);
    let mut fit_samples = Vec::new();
    for i in linspace(0.0, c.i_max_ua, c.li_points) {
        let p = li_output(d, i)?;
        let lambda = if i >= d.i_th { Some(wavelength_of_current(d, i)?) } else { None };
        li.push(vec![i.into(), p.into(), lambda.into()]);
        if i <= c.fit_max_ua {
            fit_samples.push((i, p));
        }
    }
    let li_fit = fit_li(&fit_samples)?;

    let mut scurve = Table::new("scurve", &["pump_rel", "photons_au"]);
    let mut beta_samples = Vec::new();
    for pump in logspace(c.pump_min, c.pump_max, c.pump_points) {
        let n = beta_scurve(d.beta, pump)?;
        scurve.push(vec![pump.into(), n.into()]);
        beta_samples.push((pump, n));
    }
    let beta_fit = fit_beta(&beta_samples)?;

    out.table(&li, prov, format)?;
    out.table(&scurve, prov, format)?;
    out.report(
        "characterize_summary",
        prov,
        &CharacterizeSummary { device: *d, li_fit, li_fit_window_ua: c.fit_max_ua, beta_fit },
    )
}

#[derive(Serialize)]
struct SlopeRow {
    bias_ua: f64,
    slope_ghz_per_sqrt_ratio: f64,
    nu_over_q_ghz: f64,
    q_factor: f64,
    slave_power_mw: f64,
    feed: RcExtrapolation,
}

#[derive(Serialize)]
struct LockingSummary {
    device: DeviceParams,
    q_ref: f64,
    q_slope_per_ma: f64,
    operating_bias_ua: f64,
    operating_ratio: f64,
    operating_slope_ghz_per_sqrt_ratio: f64,
    operating_width_ghz: f64,
    operating_lower_ghz: f64,
    operating_upper_ghz: f64,
    boundary_fit: BoundaryFit,
    slopes: Vec<SlopeRow>,
    feed_range_min_ghz: f64,
    feed_range_max_ghz: f64,
}

fn locking(config: &RunConfig, prov: &Provenance, format: Format, out: &mut OutputSet) -> Result<()> {
    let l = &config.locking;
    config.array.validate()?;
    let mut device = config.array.stats.nominal_device();
    l.validate(&device)?;
    let (q_ref, q_slope) =
        calibrate_q_law(device.lambda_ref, device.i_ref, l.slope_low, l.slope_high, &l.model, device.q_law)?;
    device.q_ref = q_ref;
    device.q_slope = q_slope;

    let mut slopes = Table::new(
        "locking_slopes",
        &[
            "bias_uA",
            "slope_GHz_per_sqrt_ratio",
            "nu_over_q_GHz",
            "q_factor",
            "slave_power_mW",
            "feed_injected_mW",
            "feed_power_ratio",
            "feed_range_GHz",
        ],
    );
    let mut slope_rows = Vec::new();
    let mut biases = l.biases_ua.clone();
    for anchor in [l.slope_low.0, l.slope_high.0] {
        if !biases.contains(&anchor) {
            biases.push(anchor);
        }
    }
    biases.sort_by(f64::total_cmp);
    for &i in &biases {
        let slope = bias_dependent_slope(&device, i, &l.model)?;
        let slave = li_output(&device, i)?;
        let feed =
            rc_locking_extrapolation(l.feed.input_power_mw, l.feed.lasers, l.feed.injection_fraction, slave, slope)?;
        let row = SlopeRow {
            bias_ua: i,
            slope_ghz_per_sqrt_ratio: slope,
            nu_over_q_ghz: nu_over_q_at(&device, i)?,
            q_factor: device.q_at(i)?,
            slave_power_mw: slave,
            feed,
        };
        slopes.push(vec![
            i.into(),
            slope.into(),
            row.nu_over_q_ghz.into(),
            row.q_factor.into(),
            slave.into(),
            feed.injected_mw.into(),
            feed.power_ratio.into(),
            feed.range_ghz.into(),
        ]);
        slope_rows.push(row);
    }

    let op = LockingParams::for_device(&device, l.operating_bias_ua, l.model.alpha)?;
    let mut boundaries =
        Table::new("locking_boundaries", &["power_ratio", "sqrt_ratio", "lower_GHz", "upper_GHz", "width_GHz"]);
    let mut points = Vec::new();
    for r in linspace(0.0, l.ratio_max, l.ratio_points) {
        let b = locking_bounds(&op, r)?;
        boundaries.push(vec![r.into(), r.sqrt().into(), b.lower.into(), b.upper.into(), b.width().into()]);
        points.push(BoundaryPoint { sqrt_ratio: r.sqrt(), lower: b.lower, upper: b.upper });
    }
    let boundary_fit = fit_locking_boundaries(&points)?;

    let mut widths = Table::new("locking_widths", &["bias_uA", "power_ratio", "sqrt_ratio", "width_GHz"]);
    for &i in &biases {
        let lp = LockingParams::for_device(&device, i, l.model.alpha)?;
        for r in linspace(0.0, l.ratio_max, l.ratio_points) {
            widths.push(vec![i.into(), r.into(), r.sqrt().into(), locking_bounds(&lp, r)?.width().into()]);
        }
    }

    let detunings: Vec<f64> = linspace(l.map_detuning_ghz.0, l.map_detuning_ghz.1, l.map_detuning_points).collect();
    let freqs: Vec<f64> = linspace(l.map_frequency_ghz.0, l.map_frequency_ghz.1, l.map_frequency_points).collect();
    let map = synth_locking_map(&op, l.operating_ratio, &detunings, &freqs, l.map_shape)?;
    let mut map_table = Table::new("locking_map", &["detuning_GHz", "frequency_GHz", "intensity_rel"]);
    for (d, row) in map.detunings.iter().zip(&map.intensity) {
        for (f, v) in map.frequencies.iter().zip(row) {
            map_table.push(vec![(*d).into(), (*f).into(), (*v).into()]);
        }
    }

    let op_bounds = locking_bounds(&op, l.operating_ratio)?;
    let ranges: Vec<f64> = slope_rows.iter().map(|s| s.feed.range_ghz).collect();
    let summary = LockingSummary {
        device,
        q_ref,
        q_slope_per_ma: q_slope,
        operating_bias_ua: l.operating_bias_ua,
        operating_ratio: l.operating_ratio,
        operating_slope_ghz_per_sqrt_ratio: bias_dependent_slope(&device, l.operating_bias_ua, &l.model)?,
        operating_width_ghz: op_bounds.width(),
        operating_lower_ghz: op_bounds.lower,
        operating_upper_ghz: op_bounds.upper,
        boundary_fit,
        feed_range_min_ghz: ranges.iter().copied().fold(f64::INFINITY, f64::min),
        feed_range_max_ghz: ranges.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        slopes: slope_rows,
    };
    out.table(&slopes, prov, format)?;
    out.table(&boundaries, prov, format)?;
    out.table(&widths, prov, format)?;
    out.table(&map_table, prov, format)?;
    out.report("locking_summary", prov, &summary)
}

#[derive(Serialize)]
struct CalibrationSummary {
    target_nm: f64,
    converged: usize,
    failed: usize,
    current_ua: Summary,
    power_mw: Summary,
    locked_fraction_after: Option<f64>,
}

#[derive(Serialize)]
struct CalibrateSummary {
    seed: u64,
    homogeneity: HomogeneityReport,
    calibration: CalibrationSummary,
}

fn status(cal: &CalibrationResult, row: usize, col: usize) -> &'static str {
    match cal.failures.iter().find(|f| f.row == row && f.col == col) {
        None => "ok",
        Some(f) => match f.bound {
            Some(Bound::Lower) => "below_band",
            Some(Bound::Upper) => "above_band",
            None => "no_convergence",
        },
    }
}

fn calibrate(config: &RunConfig, prov: &Provenance, format: Format, out: &mut OutputSet) -> Result<()> {
    let c = &config.calibrate;
    config.array.validate()?;
    c.validate()?;
    let array = sample_array(&config.array.stats, &config.array.spec, config.seed)?;
    let homogeneity = homogeneity_report(&array, c.homogeneity_bias_ua)?;
    let cal = calibrate_to_target(&array, c.target_nm, c.i_max_ua)?;
    let trend = sweep_targets(&array, c.sweep_from_nm, c.sweep_to_nm, c.sweep_steps, c.i_max_ua)?;

    let mut table = Table::new(
        "calibration",
        &[
            "row",
            "col",
            "i_th_uA",
            "slope_W_per_A",
            "lambda_ref_nm",
            "pol_deg",
            "current_uA",
            "power_mW",
            "lambda_nm",
            "status",
        ],
    );
    for d in &array.devices {
        let hit = cal.devices.iter().find(|x| x.row == d.row && x.col == d.col);
        table.push(vec![
            d.row.into(),
            d.col.into(),
            d.params.i_th.into(),
            d.params.slope_eff.into(),
            d.params.lambda_ref.into(),
            d.params.pol_angle.into(),
            hit.map(|h| h.current_ua).into(),
            hit.map(|h| h.power_mw).into(),
            hit.map(|h| h.lambda_nm).into(),
            status(&cal, d.row, d.col).into(),
        ]);
    }

    let mut sweep = Table::new(
        "tuning_sweep",
        &[
            "target_nm",
            "mean_current_uA",
            "std_current_uA",
            "span_current_uA",
            "mean_power_mW",
            "std_power_mW",
            "span_power_mW",
            "rel_power_std",
            "rel_power_span",
        ],
    );
    for r in &trend {
        sweep.push(
            [
                r.target_nm,
                r.mean_current_ua,
                r.std_current_ua,
                r.span_current_ua,
                r.mean_power_mw,
                r.std_power_mw,
                r.span_power_mw,
                r.rel_power_std,
                r.rel_power_span,
            ]
            .into_iter()
            .map(Cell::from)
            .collect(),
        );
    }

    let locked_fraction_after = if cal.failures.is_empty() {
        let mut tuned = array.clone();
        cal.apply(&mut tuned);
        Some(
            locked_fraction(&tuned, &tuned.currents(), config.rc.reservoir.master_power_mw, &config.locking.model)?
                .fraction,
        )
    } else {
        None
    };
    let summary = CalibrateSummary {
        seed: config.seed,
        homogeneity,
        calibration: CalibrationSummary {
            target_nm: c.target_nm,
            converged: cal.devices.len(),
            failed: cal.failures.len(),
            current_ua: cal.current_ua,
            power_mw: cal.power_mw,
            locked_fraction_after,
        },
    };
    out.table(&table, prov, format)?;
    out.table(&sweep, prov, format)?;
    out.report("calibrate_summary", prov, &summary)
}

#[derive(Serialize)]
struct RcMetrics {
    report: TaskReport,
    calibrated_to_nm: Option<f64>,
    calibration_failures: usize,
    node_mask: Vec<bool>,
    readout: ReadoutWeights,
}

fn rc(config: &RunConfig, prov: &Provenance, format: Format, out: &mut OutputSet) -> Result<()> {
    let c = &config.rc;
    config.array.validate()?;
    c.validate(config.array.spec.len())?;
    let coupling = build_doe_coupling(&config.array.spec, &c.reservoir.coupling).map_err(CliError::validation)?;
    let mut array = sample_array(&config.array.stats, &config.array.spec, config.seed)?;
    let mut failures = 0;
    if let Some(target) = c.calibrate_to_nm {
        let cal = calibrate_to_target(&array, target, c.i_max_ua)?;
        failures = cal.failures.len();
        cal.apply(&mut array);
    }
    let run = run_task(&array, &coupling, &c.reservoir, config.seed)?;

    let n = array.devices.len();
    let mut columns: Vec<String> =
        ["step", "phase", "input", "target", "prediction"].iter().map(|s| s.to_string()).collect();
    columns.extend((0..n).map(|k| format!("node_{k:02}")));
    let mut states = Table::with_columns("rc_states", columns);
    let r = &c.reservoir;
    let test_start = r.washout + r.train;
    for t in 0..run.states.rows {
        let phase = if t < r.washout {
            "washout"
        } else if t < test_start {
            "train"
        } else {
            "test"
        };
        let pred = (t >= test_start).then(|| run.predictions[t - test_start]);
        let mut row =
            vec![t.into(), phase.into(), run.series.inputs[t].into(), run.series.targets[t].into(), pred.into()];
        row.extend(run.states.row(t).iter().map(|&x| Cell::from(x)));
        states.push(row);
    }
    let metrics = RcMetrics {
        report: run.report,
        calibrated_to_nm: c.calibrate_to_nm,
        calibration_failures: failures,
        node_mask: run.node_mask,
        readout: run.readout,
    };
    out.table(&states, prov, format)?;
    out.report("rc_metrics", prov, &metrics)
}

fn budget(config: &RunConfig, prov: &Provenance, format: Format, out: &mut OutputSet) -> Result<()> {
    let b = &config.budget;
    b.validate()?;
    let report: BudgetReport =
        array_budget(&b.currents(), b.voltage_v, &b.injection, b.bandwidth_ghz, b.master_overhead_mw)?;
    let mut table =
        Table::new("budget_devices", &["device", "bias_uA", "electrical_mW", "injection_mW", "total_mW", "energy_fJ"]);
    for (k, d) in report.devices.iter().enumerate() {
        table.push(vec![
            k.into(),
            d.bias_ua.into(),
            d.electrical_mw.into(),
            d.injection_mw.into(),
            d.total_mw.into(),
            d.energy_fj.into(),
        ]);
    }
    out.table(&table, prov, format)?;
    out.report("budget", prov, &report)
}
