use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::coupling::{CouplingMatrix, CouplingSpec};
use super::dynamics::{run_reservoir, Nonlinearity, Reservoir, ReservoirState};
use super::readout::{nmse, train_readout_masked, ReadoutWeights};
use super::TIME_STEP_PS;
use crate::array::{locked_fraction, ArrayModel};
use crate::device::{injection_efficiency, li_output};
use crate::linalg::Matrix;
use crate::locking::LockingModel;
use crate::sampling::stream;
use crate::{Error, Result};

// Stream indices well clear of the per-device indices used for arrays.
const TASK_STREAM: u64 = 1 << 40;
const WEIGHT_STREAM: u64 = (1 << 40) + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Task {
    #[default]
    Narma10,
    MackeyGlass,
}

/// Input sequence and the aligned target the readout must produce after
/// consuming each input.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSeries {
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
}

/// Tenth-order NARMA driven by `U(0, 0.5)` input; the target after input
/// `u(t)` is `y(t+1)`.
pub fn narma10(len: usize, seed: u64) -> Result<TaskSeries> {
    let mut rng = stream(seed, TASK_STREAM);
    let u: Vec<f64> = (0..len).map(|_| 0.5 * rng.random::<f64>()).collect();
    let mut y = vec![0.0; len + 1];
    for t in 9..len {
        let window: f64 = y[t - 9..=t].iter().sum();
        y[t + 1] = 0.3 * y[t] + 0.05 * y[t] * window + 1.5 * u[t - 9] * u[t] + 0.1;
        if !y[t + 1].is_finite() || y[t + 1].abs() > 1e3 {
            return Err(Error::ModelRange { what: "NARMA10 sequence", value: y[t + 1] });
        }
    }
    Ok(TaskSeries { inputs: u, targets: y[1..].to_vec() })
}

/// Mackey–Glass delay system (τ = 17, β = 0.2, γ = 0.1, n = 10), Euler
/// integrated at 0.1 and sampled once per time unit. The target is the
/// series `horizon` samples ahead; inputs are scaled into roughly [0.15, 0.5].
pub fn mackey_glass(len: usize, seed: u64, horizon: usize) -> Result<TaskSeries> {
    const TAU: f64 = 17.0;
    const BETA: f64 = 0.2;
    const GAMMA: f64 = 0.1;
    const POWER: i32 = 10;
    const DT: f64 = 0.1;
    const SUBSTEPS: usize = 10;
    const TRANSIENT: usize = 1000;
    const SCALE: f64 = 1.0 / 2.6;
    if horizon == 0 {
        return Err(Error::InvalidParameter { what: "horizon", reason: "must be at least one sample" });
    }
    let lag = (TAU / DT) as usize;
    let mut rng = stream(seed, TASK_STREAM);
    let mut hist: Vec<f64> = (0..=lag).map(|_| 1.2 + 0.05 * (2.0 * rng.random::<f64>() - 1.0)).collect();
    let samples = TRANSIENT + len + horizon;
    let mut series = Vec::with_capacity(samples);
    for _ in 0..samples {
        for _ in 0..SUBSTEPS {
            let n = hist.len();
            let x = hist[n - 1];
            let xd = hist[n - 1 - lag];
            let next = x + DT * (BETA * xd / (1.0 + libm::pow(xd, POWER as f64)) - GAMMA * x);
            hist.push(next);
        }
        let x = *hist.last().unwrap_or(&0.0);
        if !x.is_finite() {
            return Err(Error::ModelRange { what: "Mackey-Glass sequence", value: x });
        }
        series.push(x);
        // keep only what the delay needs
        if hist.len() > 4 * (lag + 1) {
            hist.drain(..hist.len() - (lag + 1));
        }
    }
    let s = &series[TRANSIENT..];
    Ok(TaskSeries { inputs: s[..len].iter().map(|x| x * SCALE).collect(), targets: s[horizon..len + horizon].to_vec() })
}

/// Committed defaults tuned for NARMA10 on the calibrated array.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct ReservoirConfig {
    pub task: Task,
    pub coupling: CouplingSpec,
    pub leak: f64,
    pub nonlinearity: Nonlinearity,
    /// Input weights are `U(−1, 1)·input_scale·injection_efficiency`.
    pub input_scale: f64,
    /// Node biases are `U(−bias_spread, bias_spread)`.
    pub bias_spread: f64,
    pub washout: usize,
    pub train: usize,
    pub test: usize,
    pub ridge: f64,
    /// Samples ahead for the Mackey–Glass target.
    pub horizon: usize,
    /// Master power delivered to each device when deciding which nodes are
    /// locked, mW.
    pub master_power_mw: f64,
    pub locking: LockingModel,
    /// Explicit readout mask; overrides the locking census when set.
    pub node_mask: Option<Vec<bool>>,
}

impl Default for ReservoirConfig {
    fn default() -> Self {
        ReservoirConfig {
            task: Task::Narma10,
            coupling: CouplingSpec::default(),
            leak: 0.5,
            nonlinearity: Nonlinearity::Saturating,
            input_scale: 0.05,
            bias_spread: 0.1,
            washout: 200,
            train: 4100,
            test: 1000,
            ridge: 1e-8,
            horizon: 1,
            master_power_mw: 2.0,
            locking: LockingModel::default(),
            node_mask: None,
        }
    }
}

impl ReservoirConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.leak > 0.0 && self.leak <= 1.0) {
            return Err(Error::Domain { what: "leak", value: self.leak });
        }
        if !(self.input_scale >= 0.0 && self.input_scale.is_finite()) {
            return Err(Error::Domain { what: "input_scale", value: self.input_scale });
        }
        if !(self.bias_spread >= 0.0 && self.bias_spread.is_finite()) {
            return Err(Error::Domain { what: "bias_spread", value: self.bias_spread });
        }
        if self.train < 50 {
            return Err(Error::InvalidParameter {
                what: "train length",
                reason: "need at least 50 samples after washout",
            });
        }
        if self.test < 2 {
            return Err(Error::InvalidParameter { what: "test length", reason: "need at least two samples" });
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::Domain { what: "ridge", value: self.ridge });
        }
        if !(self.master_power_mw >= 0.0) {
            return Err(Error::Domain { what: "master power", value: self.master_power_mw });
        }
        Ok(())
    }

    pub fn total_len(&self) -> usize {
        self.washout + self.train + self.test
    }
}

/// Physical reservoir over `array` at its present biases: node ceilings
/// follow each device's output power, input weights its polarization
/// overlap with the master.
pub fn build_reservoir(
    array: &ArrayModel,
    coupling: &CouplingMatrix,
    config: &ReservoirConfig,
    seed: u64,
) -> Result<Reservoir> {
    let n = array.devices.len();
    if coupling.len() != n {
        return Err(Error::DimensionMismatch { what: "coupling size", expected: n, found: coupling.len() });
    }
    let powers = array.devices.iter().map(|d| li_output(&d.params, d.bias_ua)).collect::<Result<Vec<f64>>>()?;
    let top = powers.iter().fold(0.0f64, |m, &p| m.max(p));
    if !(top > 0.0) {
        return Err(Error::ModelRange { what: "strongest node power", value: top });
    }
    let master_pol = array.mean_pol_angle();
    let mut rng = stream(seed, WEIGHT_STREAM);
    let input_weights = array
        .devices
        .iter()
        .map(|d| {
            let eff = injection_efficiency(master_pol, d.params.pol_angle);
            (2.0 * rng.random::<f64>() - 1.0) * config.input_scale * eff
        })
        .collect();
    let bias = (0..n).map(|_| (2.0 * rng.random::<f64>() - 1.0) * config.bias_spread).collect();
    let reservoir = Reservoir {
        coupling: coupling.weights.clone(),
        input_weights,
        bias,
        saturation: powers.iter().map(|p| p / top).collect(),
        leak: config.leak,
        nonlinearity: config.nonlinearity,
    };
    reservoir.validate()?;
    Ok(reservoir)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TaskReport {
    pub task: Task,
    pub seed: u64,
    pub nodes: usize,
    pub nodes_used: usize,
    pub washout: usize,
    pub train: usize,
    pub test: usize,
    pub nmse_train: f64,
    pub nmse_test: f64,
    /// Test NMSE of predicting the training-target mean.
    pub baseline_nmse: f64,
    /// `1 − nmse_test / baseline_nmse`.
    pub improvement: f64,
    pub spectral_radius: f64,
    /// `ρ(W)·max|f'|`; below 1 guarantees fading memory.
    pub echo_state_gain: f64,
    pub rank_deficient: bool,
    pub time_step_ps: f64,
    pub simulated_ns: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskRun {
    pub report: TaskReport,
    pub readout: ReadoutWeights,
    pub node_mask: Vec<bool>,
    pub series: TaskSeries,
    /// Row `t` is the state after input `t`, washout included.
    pub states: Matrix,
    pub predictions: Vec<f64>,
}

fn rows(m: &Matrix, from: usize, to: usize) -> Matrix {
    Matrix { rows: to - from, cols: m.cols, data: m.data[from * m.cols..to * m.cols].to_vec() }
}

/// Generates the task, drives the reservoir from rest, trains on
/// `[washout, washout+train)` and scores on the following `test` samples.
/// Nodes that are not locked (or are masked explicitly) get zero readout
/// weight.
pub fn run_task(array: &ArrayModel, coupling: &CouplingMatrix, config: &ReservoirConfig, seed: u64) -> Result<TaskRun> {
    config.validate()?;
    let n = array.devices.len();
    let node_mask = match &config.node_mask {
        Some(m) if m.len() != n => {
            return Err(Error::DimensionMismatch { what: "node mask", expected: n, found: m.len() })
        }
        Some(m) => m.clone(),
        None => locked_fraction(array, &array.currents(), config.master_power_mw, &config.locking)?.locked,
    };
    let reservoir = build_reservoir(array, coupling, config, seed)?;
    let len = config.total_len();
    let series = match config.task {
        Task::Narma10 => narma10(len, seed)?,
        Task::MackeyGlass => mackey_glass(len, seed, config.horizon)?,
    };
    let states = run_reservoir(&reservoir, &ReservoirState::zeros(n), &series.inputs)?;

    let (w, tr) = (config.washout, config.washout + config.train);
    let train_states = rows(&states, w, tr);
    let test_states = rows(&states, tr, len);
    let train_targets = &series.targets[w..tr];
    let test_targets = &series.targets[tr..len];
    let readout = train_readout_masked(&train_states, train_targets, config.ridge, Some(&node_mask))?;
    let fit = readout.predict(&train_states)?;
    let predictions = readout.predict(&test_states)?;
    let nmse_train = nmse(&fit, train_targets)?;
    let nmse_test = nmse(&predictions, test_targets)?;
    let train_mean = train_targets.iter().sum::<f64>() / train_targets.len() as f64;
    let baseline_nmse = nmse(&vec![train_mean; test_targets.len()], test_targets)?;

    let report = TaskReport {
        task: config.task,
        seed,
        nodes: n,
        nodes_used: node_mask.iter().filter(|&&m| m).count(),
        washout: config.washout,
        train: config.train,
        test: config.test,
        nmse_train,
        nmse_test,
        baseline_nmse,
        improvement: 1.0 - nmse_test / baseline_nmse,
        spectral_radius: coupling.spectral_radius,
        echo_state_gain: coupling.spectral_radius * reservoir.max_gain(),
        rank_deficient: readout.rank_deficient,
        time_step_ps: TIME_STEP_PS,
        simulated_ns: len as f64 * TIME_STEP_PS * 1e-3,
    };
    Ok(TaskRun { report, readout, node_mask, series, states, predictions })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn narma_is_bounded_and_seeded() {
        let a = narma10(5000, 1).unwrap();
        let b = narma10(5000, 1).unwrap();
        assert_eq!(a, b);
        assert!(a.targets.iter().all(|y| (0.0..1.5).contains(y)));
        assert!(a.inputs.iter().all(|u| (0.0..0.5).contains(u)));
        assert_ne!(a, narma10(5000, 2).unwrap());
    }

    #[test]
    fn narma_recurrence_holds() {
        let s = narma10(200, 3).unwrap();
        let (u, y) = (&s.inputs, &s.targets);
        // targets[t] = y(t+1)
        for t in 20..199 {
            let yt = y[t - 1];
            let window: f64 = y[t - 10..t].iter().sum();
            let expect = 0.3 * yt + 0.05 * yt * window + 1.5 * u[t - 9] * u[t] + 0.1;
            assert!((y[t] - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn mackey_glass_stays_on_attractor() {
        let s = mackey_glass(2000, 5, 1).unwrap();
        assert!(s.targets.iter().all(|x| (0.2..1.5).contains(x)));
        // input is the scaled present value of the target series
        for t in 0..1999 {
            assert!((s.inputs[t + 1] * 2.6 - s.targets[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn short_configs_are_rejected() {
        let c = ReservoirConfig { train: 10, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
