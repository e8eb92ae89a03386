//! Run configuration. Every block has complete defaults, so an empty JSON
//! object is a valid config; unknown keys are rejected.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use vcselrc_core::array::{ArraySpec, HeterogeneityStats};
use vcselrc_core::budget::InjectionPlan;
use vcselrc_core::device::{fit_rollover, DeviceParams};
use vcselrc_core::locking::{LockingModel, MapShape};
use vcselrc_core::reservoir::ReservoirConfig;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub array: ArrayConfig,
    pub characterize: CharacterizeConfig,
    pub locking: LockingConfig,
    pub calibrate: CalibrateConfig,
    pub rc: RcConfig,
    pub budget: BudgetConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            array: ArrayConfig::default(),
            characterize: CharacterizeConfig::default(),
            locking: LockingConfig::default(),
            calibrate: CalibrateConfig::default(),
            rc: RcConfig::default(),
            budget: BudgetConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(CliError::validation)
    }

    /// Canonical JSON of the resolved config, the input to the config hash.
    pub fn canonical_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| CliError::Serialize(e.to_string()))
    }

    pub fn sha256(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.canonical_json()?.as_bytes())))
    }
}

fn characterised_stats() -> HeterogeneityStats {
    HeterogeneityStats::characterised(&LockingModel::default()).expect("built-in anchors are consistent")
}

/// Array geometry and fabrication statistics shared by `calibrate` and `rc`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayConfig {
    pub spec: ArraySpec,
    pub stats: HeterogeneityStats,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig { spec: ArraySpec::default(), stats: characterised_stats() }
    }
}

impl ArrayConfig {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate().map_err(CliError::validation)?;
        self.stats.validate().map_err(CliError::validation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CharacterizeConfig {
    pub device: DeviceParams,
    /// Top of the LI sweep, µA.
    pub i_max_ua: f64,
    pub li_points: usize,
    /// Upper end of the near-linear window used to re-extract threshold
    /// and slope, µA.
    pub fit_max_ua: f64,
    /// Pump range of the s-curve, in units of threshold, log spaced.
    pub pump_min: f64,
    pub pump_max: f64,
    pub pump_points: usize,
}

impl Default for CharacterizeConfig {
    fn default() -> Self {
        let mut device = characterised_stats().nominal_device();
        device.i_sat =
            Some(fit_rollover(device.i_th, device.slope_eff, 15_000.0, 2.8).expect("rollover anchor is reachable"));
        CharacterizeConfig {
            device,
            i_max_ua: 15_000.0,
            li_points: 301,
            fit_max_ua: 1000.0,
            pump_min: 1e-2,
            pump_max: 1e2,
            pump_points: 81,
        }
    }
}

impl CharacterizeConfig {
    pub fn validate(&self) -> Result<()> {
        self.device.validate().map_err(CliError::validation)?;
        if !(self.i_max_ua > self.device.i_th) {
            return Err(CliError::Validation(format!(
                "i_max_ua ({}) must exceed the threshold current ({})",
                self.i_max_ua, self.device.i_th
            )));
        }
        if self.li_points < 4 {
            return Err(CliError::validation("li_points must be at least 4"));
        }
        if !(self.pump_min > 0.0 && self.pump_max > self.pump_min) || self.pump_points < 2 {
            return Err(CliError::validation("pump range needs 0 < pump_min < pump_max and at least two points"));
        }
        Ok(())
    }
}

/// Power budget of the single-laser-fed reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RcFeedConfig {
    pub input_power_mw: f64,
    pub lasers: usize,
    pub injection_fraction: f64,
}

impl Default for RcFeedConfig {
    fn default() -> Self {
        RcFeedConfig { input_power_mw: 100.0, lasers: 25, injection_fraction: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LockingConfig {
    pub model: LockingModel,
    /// `(bias µA, locking slope GHz/√r)` anchors of the bias-dependent law.
    pub slope_low: (f64, f64),
    pub slope_high: (f64, f64),
    /// Biases tabulated in the width and slope tables, µA.
    pub biases_ua: Vec<f64>,
    pub operating_bias_ua: f64,
    /// Master/slave power ratio at the operating point.
    pub operating_ratio: f64,
    pub ratio_max: f64,
    pub ratio_points: usize,
    pub feed: RcFeedConfig,
    pub map_detuning_ghz: (f64, f64),
    pub map_detuning_points: usize,
    pub map_frequency_ghz: (f64, f64),
    pub map_frequency_points: usize,
    pub map_shape: MapShape,
}

impl Default for LockingConfig {
    fn default() -> Self {
        LockingConfig {
            model: LockingModel::default(),
            slope_low: (760.0, 5.2),
            slope_high: (2600.0, 16.8),
            biases_ua: vec![760.0, 1200.0, 1700.0, 2600.0],
            operating_bias_ua: 1200.0,
            operating_ratio: 0.87 / 0.288,
            ratio_max: 16.0,
            ratio_points: 33,
            feed: RcFeedConfig::default(),
            map_detuning_ghz: (-40.0, 20.0),
            map_detuning_points: 121,
            map_frequency_ghz: (-50.0, 30.0),
            map_frequency_points: 161,
            map_shape: MapShape::default(),
        }
    }
}

impl LockingConfig {
    pub fn validate(&self, device: &DeviceParams) -> Result<()> {
        if !(self.model.alpha >= 0.0 && self.model.alpha.is_finite()) {
            return Err(CliError::validation("alpha must be finite and nonnegative"));
        }
        if self.biases_ua.is_empty() {
            return Err(CliError::validation("biases_ua must not be empty"));
        }
        for &i in self.biases_ua.iter().chain([&self.operating_bias_ua, &self.slope_low.0, &self.slope_high.0]) {
            if !(i > device.i_th) {
                return Err(CliError::Validation(format!("bias {i} uA is not above threshold ({} uA)", device.i_th)));
            }
        }
        if !(self.operating_ratio >= 0.0) || !(self.ratio_max > 0.0) || self.ratio_points < 2 {
            return Err(CliError::validation(
                "power ratios must be nonnegative with a positive maximum and two or more points",
            ));
        }
        if !(self.feed.input_power_mw >= 0.0)
            || self.feed.lasers == 0
            || !(0.0..=1.0).contains(&self.feed.injection_fraction)
        {
            return Err(CliError::validation(
                "feed needs nonnegative power, at least one laser and a fraction in [0, 1]",
            ));
        }
        let grid_ok = |(lo, hi): (f64, f64), n: usize| lo < hi && n >= 2;
        if !grid_ok(self.map_detuning_ghz, self.map_detuning_points)
            || !grid_ok(self.map_frequency_ghz, self.map_frequency_points)
        {
            return Err(CliError::validation("map grids need low < high and at least two points"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrateConfig {
    /// Uniform bias of the homogeneity report, µA.
    pub homogeneity_bias_ua: f64,
    pub target_nm: f64,
    pub i_max_ua: f64,
    pub sweep_from_nm: f64,
    pub sweep_to_nm: f64,
    pub sweep_steps: usize,
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        CalibrateConfig {
            homogeneity_bias_ua: 700.0,
            target_nm: 978.0,
            i_max_ua: 6000.0,
            sweep_from_nm: 977.8,
            sweep_to_nm: 978.6,
            sweep_steps: 9,
        }
    }
}

impl CalibrateConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.homogeneity_bias_ua > 0.0) || !(self.i_max_ua > 0.0) || !(self.target_nm > 0.0) {
            return Err(CliError::validation("bias, i_max and target must be positive"));
        }
        if !(self.sweep_from_nm < self.sweep_to_nm) || self.sweep_steps < 2 {
            return Err(CliError::validation("sweep needs from < to and at least two steps"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RcConfig {
    /// Common wavelength the array is tuned to before running; `None`
    /// keeps every device at the reference bias.
    pub calibrate_to_nm: Option<f64>,
    pub i_max_ua: f64,
    pub reservoir: ReservoirConfig,
}

impl Default for RcConfig {
    fn default() -> Self {
        RcConfig { calibrate_to_nm: Some(978.0), i_max_ua: 6000.0, reservoir: ReservoirConfig::default() }
    }
}

impl RcConfig {
    pub fn validate(&self, n_nodes: usize) -> Result<()> {
        self.reservoir.validate().map_err(CliError::validation)?;
        if let Some(m) = &self.reservoir.node_mask {
            if m.len() != n_nodes {
                return Err(CliError::Validation(format!("node_mask has {} entries for {n_nodes} nodes", m.len())));
            }
        }
        if !(self.i_max_ua > 0.0) {
            return Err(CliError::validation("i_max_ua must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetConfig {
    /// Per-device bias currents, µA; `None` uses `devices × bias_ua`.
    pub currents_ua: Option<Vec<f64>>,
    pub devices: usize,
    pub bias_ua: f64,
    pub voltage_v: f64,
    pub injection: InjectionPlan,
    pub bandwidth_ghz: f64,
    pub master_overhead_mw: Option<f64>,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig {
            currents_ua: None,
            devices: 25,
            bias_ua: 760.0,
            voltage_v: 2.0,
            injection: InjectionPlan::Uniform(0.609),
            bandwidth_ghz: 20.0,
            master_overhead_mw: None,
        }
    }
}

impl BudgetConfig {
    pub fn currents(&self) -> Vec<f64> {
        self.currents_ua.clone().unwrap_or_else(|| vec![self.bias_ua; self.devices])
    }

    pub fn validate(&self) -> Result<()> {
        let currents = self.currents();
        if currents.iter().any(|i| !(*i >= 0.0 && i.is_finite())) {
            return Err(CliError::validation("bias currents must be finite and nonnegative"));
        }
        if !(self.voltage_v >= 0.0) || !(self.bandwidth_ghz > 0.0) {
            return Err(CliError::validation("voltage must be nonnegative and bandwidth positive"));
        }
        match &self.injection {
            InjectionPlan::PerDevice(p) if p.len() != currents.len() => {
                return Err(CliError::Validation(format!(
                    "injection plan has {} entries for {} devices",
                    p.len(),
                    currents.len()
                )))
            }
            InjectionPlan::PerDevice(p) if p.iter().any(|x| !(*x >= 0.0)) => {
                return Err(CliError::validation("injection powers must be nonnegative"))
            }
            InjectionPlan::Uniform(p) if !(*p >= 0.0) => {
                return Err(CliError::validation("injection power must be nonnegative"))
            }
            _ => {}
        }
        if let Some(m) = self.master_overhead_mw {
            if !(m >= 0.0) {
                return Err(CliError::validation("master overhead must be nonnegative"));
            }
        }
        Ok(())
    }
}
