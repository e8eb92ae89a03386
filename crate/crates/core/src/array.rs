//! Seeded 5×5 arrays, spectral homogeneity and per-device bias calibration.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::device::{
    current_for_wavelength, injection_efficiency, li_output, tune_coeff_from_anchors, wavelength_of_current,
    DeviceParams, QLaw,
};
use crate::locking::{calibrate_q_law, is_locked, locking_bounds, LockingModel, LockingParams};
use crate::numeric::{mean, Summary};
use crate::sampling::{stream, TruncatedNormal};
use crate::units::{frequency_ghz, ghz_per_nm, uev_per_nm};
use crate::{Bound, Error, Result};

/// Geometry of the emitter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct ArraySpec {
    pub rows: usize,
    pub cols: usize,
    /// Emitter pitch, µm.
    pub pitch_um: f64,
    /// Optical field of view of the coupling optics, mm².
    pub field_of_view_mm2: f64,
}

impl Default for ArraySpec {
    fn default() -> Self {
        ArraySpec { rows: 5, cols: 5, pitch_um: 80.0, field_of_view_mm2: 1.0 }
    }
}

impl ArraySpec {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Active area `rows·pitch × cols·pitch`, mm².
    pub fn active_area_mm2(&self) -> f64 {
        (self.rows as f64 * self.pitch_um) * (self.cols as f64 * self.pitch_um) * 1e-6
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidParameter { what: "array spec", reason: "needs at least one row and column" });
        }
        if !(self.pitch_um > 0.0) {
            return Err(Error::InvalidParameter { what: "pitch", reason: "must be positive" });
        }
        if !(self.active_area_mm2() <= self.field_of_view_mm2) {
            return Err(Error::InvalidParameter {
                what: "array spec",
                reason: "active area exceeds the field of view",
            });
        }
        Ok(())
    }

    pub fn position(&self, index: usize) -> (usize, usize) {
        (index / self.cols, index % self.cols)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Spread {
    pub mean: f64,
    pub sd: f64,
}

/// Device parameters shared by every emitter of a sampled array.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SharedDeviceParams {
    pub i_ref: f64,
    pub beta: f64,
    pub i_sat: Option<f64>,
    pub v_bias: f64,
    pub r_series: f64,
    pub tune_coeff: f64,
    pub q_ref: f64,
    pub q_slope: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub q_law: QLaw,
}

/// Statistical description of a fabricated array.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct HeterogeneityStats {
    /// Threshold current, µA.
    pub i_th: Spread,
    /// Slope efficiency, W/A.
    pub slope_eff: Spread,
    /// Wavelength at the reference bias, nm.
    pub lambda_ref: Spread,
    /// Polarization angle, degrees.
    pub pol_angle: Spread,
    /// Relative standard deviation of the thermal tuning coefficient.
    pub tune_coeff_rel_sd: f64,
    /// Largest wavelength difference inside one array, nm.
    pub max_lambda_spread: f64,
    /// Largest polarization difference inside one array, degrees.
    pub max_pol_spread: f64,
    /// Truncation of the unclipped fields, in standard deviations.
    pub clip_sigmas: f64,
    /// Correlation between slope efficiency and wavelength; `None` draws
    /// them independently.
    pub slope_lambda_correlation: Option<f64>,
    pub shared: SharedDeviceParams,
}

/// Operating points used to pin the default thermal and Q laws.
pub mod anchors {
    /// Mean wavelength at the reference bias, (µA, nm).
    pub const REFERENCE: (f64, f64) = (700.0, 977.77);
    /// Mean bias that tunes the array to 978 nm, (µA, nm).
    pub const TUNED: (f64, f64) = (1740.0, 978.00);
    /// Voltage intercept and series resistance of the I–V model (V, kΩ).
    pub const IV_MODEL: (f64, f64) = (1.13, 0.5);
    /// Lowest reference bias and its locking slope, (µA, GHz/√r).
    pub const SLOPE_LOW: (f64, f64) = (760.0, 5.2);
    /// Highest reference bias and its locking slope, (µA, GHz/√r).
    pub const SLOPE_HIGH: (f64, f64) = (2600.0, 16.8);
}

impl HeterogeneityStats {
    /// Array statistics of the characterised 5×5 device, with thermal and Q
    /// laws calibrated on the default anchors under `model`.
    pub fn characterised(model: &LockingModel) -> Result<Self> {
        let (v_bias, r_series) = anchors::IV_MODEL;
        let tune_coeff = tune_coeff_from_anchors(v_bias, r_series, anchors::REFERENCE, anchors::TUNED)?;
        let (q_ref, q_slope) = calibrate_q_law(
            anchors::REFERENCE.1,
            anchors::REFERENCE.0,
            anchors::SLOPE_LOW,
            anchors::SLOPE_HIGH,
            model,
            QLaw::default(),
        )?;
        Ok(HeterogeneityStats {
            i_th: Spread { mean: 368.0, sd: 11.0 },
            slope_eff: Spread { mean: 0.359, sd: 0.045 },
            lambda_ref: Spread { mean: anchors::REFERENCE.1, sd: 0.033 },
            pol_angle: Spread { mean: 0.0, sd: 1.5 },
            tune_coeff_rel_sd: 0.05,
            max_lambda_spread: 0.112,
            max_pol_spread: 2.8,
            clip_sigmas: 3.0,
            slope_lambda_correlation: None,
            shared: SharedDeviceParams {
                i_ref: anchors::REFERENCE.0,
                beta: 0.0032,
                i_sat: None,
                v_bias,
                r_series,
                tune_coeff,
                q_ref,
                q_slope,
                q_law: QLaw::default(),
            },
        })
    }

    /// The device at the centre of every distribution.
    pub fn nominal_device(&self) -> DeviceParams {
        let s = &self.shared;
        DeviceParams {
            i_th: self.i_th.mean,
            slope_eff: self.slope_eff.mean,
            i_sat: s.i_sat,
            beta: s.beta,
            lambda_ref: self.lambda_ref.mean,
            i_ref: s.i_ref,
            tune_coeff: s.tune_coeff,
            v_bias: s.v_bias,
            r_series: s.r_series,
            pol_angle: self.pol_angle.mean,
            q_ref: s.q_ref,
            q_slope: s.q_slope,
            q_law: s.q_law,
        }
    }

    /// Same distributions with every spread set to zero.
    pub fn homogeneous(&self) -> Self {
        let zero = |s: Spread| Spread { mean: s.mean, sd: 0.0 };
        HeterogeneityStats {
            i_th: zero(self.i_th),
            slope_eff: zero(self.slope_eff),
            lambda_ref: zero(self.lambda_ref),
            pol_angle: zero(self.pol_angle),
            tune_coeff_rel_sd: 0.0,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (s, what) in [
            (self.i_th, "i_th spread"),
            (self.slope_eff, "slope_eff spread"),
            (self.lambda_ref, "lambda_ref spread"),
            (self.pol_angle, "pol_angle spread"),
        ] {
            if !(s.sd >= 0.0) || !s.mean.is_finite() {
                return Err(Error::InvalidParameter { what, reason: "needs a finite mean and sd >= 0" });
            }
        }
        if !(self.tune_coeff_rel_sd >= 0.0 && self.tune_coeff_rel_sd < 0.3) {
            return Err(Error::InvalidParameter { what: "tune_coeff_rel_sd", reason: "must lie in [0, 0.3)" });
        }
        if !(self.max_lambda_spread > 0.0) || !(self.max_pol_spread > 0.0) {
            return Err(Error::InvalidParameter { what: "clip limits", reason: "spreads must be positive" });
        }
        if !(self.clip_sigmas > 0.0) {
            return Err(Error::InvalidParameter { what: "clip_sigmas", reason: "must be positive" });
        }
        if let Some(r) = self.slope_lambda_correlation {
            if !(-1.0..=1.0).contains(&r) {
                return Err(Error::InvalidParameter {
                    what: "slope_lambda_correlation",
                    reason: "must lie in [-1, 1]",
                });
            }
        }
        let lowest = self.i_th.mean - self.clip_sigmas * self.i_th.sd;
        let weakest = self.slope_eff.mean - self.clip_sigmas * self.slope_eff.sd;
        if !(lowest > 0.0) || !(weakest > 0.0) {
            return Err(Error::InvalidParameter {
                what: "array stats",
                reason: "clipped draws can reach nonpositive values",
            });
        }
        self.nominal_device().validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct DeviceRecord {
    pub row: usize,
    pub col: usize,
    pub params: DeviceParams,
    /// Present bias current, µA.
    pub bias_ua: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ArrayModel {
    pub spec: ArraySpec,
    pub seed: u64,
    pub devices: Vec<DeviceRecord>,
}

impl ArrayModel {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.devices.len() != self.spec.len() {
            return Err(Error::DimensionMismatch {
                what: "array devices",
                expected: self.spec.len(),
                found: self.devices.len(),
            });
        }
        for d in &self.devices {
            d.params.validate()?;
            if !(d.bias_ua >= 0.0) {
                return Err(Error::Domain { what: "bias current", value: d.bias_ua });
            }
        }
        Ok(())
    }

    pub fn currents(&self) -> Vec<f64> {
        self.devices.iter().map(|d| d.bias_ua).collect()
    }

    pub fn set_uniform_bias(&mut self, bias_ua: f64) {
        for d in &mut self.devices {
            d.bias_ua = bias_ua;
        }
    }

    pub fn set_currents(&mut self, currents: &[f64]) -> Result<()> {
        if currents.len() != self.devices.len() {
            return Err(Error::DimensionMismatch {
                what: "currents",
                expected: self.devices.len(),
                found: currents.len(),
            });
        }
        for (d, &i) in self.devices.iter_mut().zip(currents) {
            d.bias_ua = i;
        }
        Ok(())
    }

    pub fn mean_pol_angle(&self) -> f64 {
        mean(&self.devices.iter().map(|d| d.params.pol_angle).collect::<Vec<_>>())
    }
}

/// Draws one array. Each device consumes its own random stream, so the
/// result is independent of evaluation order.
pub fn sample_array(stats: &HeterogeneityStats, spec: &ArraySpec, seed: u64) -> Result<ArrayModel> {
    spec.validate()?;
    stats.validate()?;
    let k = stats.clip_sigmas;
    let lambda =
        TruncatedNormal::moment_matched(stats.lambda_ref.mean, stats.lambda_ref.sd, 0.5 * stats.max_lambda_spread)?;
    let pol = TruncatedNormal::moment_matched(stats.pol_angle.mean, stats.pol_angle.sd, 0.5 * stats.max_pol_spread)?;
    let i_th = TruncatedNormal::clipped(stats.i_th.mean, stats.i_th.sd, k);
    let slope = TruncatedNormal::clipped(stats.slope_eff.mean, stats.slope_eff.sd, k);
    let tune = TruncatedNormal::clipped(stats.shared.tune_coeff, stats.shared.tune_coeff * stats.tune_coeff_rel_sd, k);
    let base = stats.nominal_device();
    let lambda_sd = lambda.sd();

    let devices = (0..spec.len())
        .map(|index| {
            let mut rng = stream(seed, index as u64);
            let lambda_ref = lambda.sample(&mut rng);
            let i_th = i_th.sample(&mut rng);
            let slope_eff = match stats.slope_lambda_correlation {
                Some(rho) if stats.slope_eff.sd > 0.0 && lambda_sd > 0.0 => {
                    let z_lambda = (lambda_ref - stats.lambda_ref.mean) / lambda_sd;
                    let z = loop {
                        let z: f64 = rng.sample(StandardNormal);
                        if z.abs() <= k {
                            break z;
                        }
                    };
                    let zs = (rho * z_lambda + libm::sqrt(1.0 - rho * rho) * z).clamp(-k, k);
                    stats.slope_eff.mean + stats.slope_eff.sd * zs
                }
                _ => slope.sample(&mut rng),
            };
            let pol_angle = pol.sample(&mut rng);
            let tune_coeff = tune.sample(&mut rng);
            let (row, col) = spec.position(index);
            DeviceRecord {
                row,
                col,
                params: DeviceParams { i_th, slope_eff, lambda_ref, pol_angle, tune_coeff, ..base },
                bias_ua: base.i_ref,
            }
        })
        .collect();
    Ok(ArrayModel { spec: *spec, seed, devices })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HomogeneityReport {
    pub bias_ua: f64,
    pub mean_nm: f64,
    pub std_nm: f64,
    pub min_nm: f64,
    pub max_nm: f64,
    pub span_nm: f64,
    pub span_ghz: f64,
    pub span_uev: f64,
    pub std_ghz: f64,
    pub std_uev: f64,
}

/// Wavelength statistics with every device at the same bias.
pub fn homogeneity_report(array: &ArrayModel, bias_ua: f64) -> Result<HomogeneityReport> {
    let below: Vec<(usize, usize)> =
        array.devices.iter().filter(|d| bias_ua < d.params.i_th).map(|d| (d.row, d.col)).collect();
    if !below.is_empty() {
        return Err(Error::DevicesBelowThreshold(below));
    }
    let lambdas =
        array.devices.iter().map(|d| wavelength_of_current(&d.params, bias_ua)).collect::<Result<Vec<f64>>>()?;
    let s = Summary::of(&lambdas);
    let gpn = ghz_per_nm(s.mean);
    let upn = uev_per_nm(s.mean);
    Ok(HomogeneityReport {
        bias_ua,
        mean_nm: s.mean,
        std_nm: s.std,
        min_nm: s.min,
        max_nm: s.max,
        span_nm: s.span,
        span_ghz: s.span * gpn,
        span_uev: s.span * upn,
        std_ghz: s.std * gpn,
        std_uev: s.std * upn,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibratedDevice {
    pub row: usize,
    pub col: usize,
    pub current_ua: f64,
    pub power_mw: f64,
    pub lambda_nm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationFailure {
    pub row: usize,
    pub col: usize,
    /// Violated side of the device's reachable band, if that was the cause.
    pub bound: Option<Bound>,
    pub reachable_low_nm: f64,
    pub reachable_high_nm: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationResult {
    pub target_nm: f64,
    pub i_max_ua: f64,
    pub devices: Vec<CalibratedDevice>,
    pub failures: Vec<CalibrationFailure>,
    pub current_ua: Summary,
    pub power_mw: Summary,
}

impl CalibrationResult {
    /// Per-device currents in array order; `None` for failed devices.
    pub fn currents(&self, array: &ArrayModel) -> Vec<Option<f64>> {
        array
            .devices
            .iter()
            .map(|d| self.devices.iter().find(|c| c.row == d.row && c.col == d.col).map(|c| c.current_ua))
            .collect()
    }

    /// Writes converged currents into `array`; failed devices keep theirs.
    pub fn apply(&self, array: &mut ArrayModel) {
        for c in &self.devices {
            if let Some(d) = array.devices.iter_mut().find(|d| d.row == c.row && c.col == d.col) {
                d.bias_ua = c.current_ua;
            }
        }
    }
}

/// Bias every device to `target_nm`. Devices that cannot reach it within
/// `[i_th, i_max]` are listed in `failures`; nothing here is fatal.
pub fn calibrate_to_target(array: &ArrayModel, target_nm: f64, i_max_ua: f64) -> Result<CalibrationResult> {
    if !target_nm.is_finite() {
        return Err(Error::Domain { what: "target wavelength", value: target_nm });
    }
    let mut devices = Vec::with_capacity(array.devices.len());
    let mut failures = Vec::new();
    for d in &array.devices {
        match current_for_wavelength(&d.params, target_nm, i_max_ua) {
            Ok(i) => devices.push(CalibratedDevice {
                row: d.row,
                col: d.col,
                current_ua: i,
                power_mw: li_output(&d.params, i)?,
                lambda_nm: wavelength_of_current(&d.params, i)?,
            }),
            Err(Error::OutOfRange { bound, low, high, .. }) => failures.push(CalibrationFailure {
                row: d.row,
                col: d.col,
                bound: Some(bound),
                reachable_low_nm: low,
                reachable_high_nm: high,
            }),
            Err(Error::NoConvergence { .. }) => failures.push(CalibrationFailure {
                row: d.row,
                col: d.col,
                bound: None,
                reachable_low_nm: f64::NAN,
                reachable_high_nm: f64::NAN,
            }),
            Err(e) => return Err(e),
        }
    }
    let currents: Vec<f64> = devices.iter().map(|c| c.current_ua).collect();
    let powers: Vec<f64> = devices.iter().map(|c| c.power_mw).collect();
    Ok(CalibrationResult {
        target_nm,
        i_max_ua,
        current_ua: Summary::of(&currents),
        power_mw: Summary::of(&powers),
        devices,
        failures,
    })
}

/// One row of a target-wavelength sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrendRow {
    pub target_nm: f64,
    pub mean_current_ua: f64,
    pub std_current_ua: f64,
    pub span_current_ua: f64,
    pub mean_power_mw: f64,
    pub std_power_mw: f64,
    pub span_power_mw: f64,
    /// `σ(P) / mean(P)`.
    pub rel_power_std: f64,
    /// `(max(P) − min(P)) / mean(P)`.
    pub rel_power_span: f64,
}

/// Band `[low, high]` (nm) reachable by every device within `[i_th, i_max]`.
pub fn common_reachable_band(array: &ArrayModel, i_max_ua: f64) -> Result<(f64, f64)> {
    let mut low = f64::NEG_INFINITY;
    let mut high = f64::INFINITY;
    for d in &array.devices {
        if i_max_ua < d.params.i_th {
            return Err(Error::Domain { what: "i_max", value: i_max_ua });
        }
        low = low.max(wavelength_of_current(&d.params, d.params.i_th)?);
        high = high.min(wavelength_of_current(&d.params, i_max_ua)?);
    }
    if !(low <= high) {
        return Err(Error::Empty("common reachable band"));
    }
    Ok((low, high))
}

pub fn sweep_targets(
    array: &ArrayModel,
    from_nm: f64,
    to_nm: f64,
    steps: usize,
    i_max_ua: f64,
) -> Result<Vec<TrendRow>> {
    if steps < 2 {
        return Err(Error::InvalidParameter { what: "sweep steps", reason: "need at least two targets" });
    }
    if !(from_nm < to_nm) {
        return Err(Error::InvalidParameter { what: "sweep range", reason: "from must be below to" });
    }
    let (low, high) = common_reachable_band(array, i_max_ua)?;
    if from_nm < low {
        return Err(Error::OutOfRange { bound: Bound::Lower, target: from_nm, low, high });
    }
    if to_nm > high {
        return Err(Error::OutOfRange { bound: Bound::Upper, target: to_nm, low, high });
    }
    (0..steps)
        .map(|k| {
            let target = from_nm + (to_nm - from_nm) * k as f64 / (steps - 1) as f64;
            let cal = calibrate_to_target(array, target, i_max_ua)?;
            if !cal.failures.is_empty() {
                return Err(Error::NoConvergence { what: "sweep calibration", iterations: 0 });
            }
            let (c, p) = (cal.current_ua, cal.power_mw);
            Ok(TrendRow {
                target_nm: target,
                mean_current_ua: c.mean,
                std_current_ua: c.std,
                span_current_ua: c.span,
                mean_power_mw: p.mean,
                std_power_mw: p.std,
                span_power_mw: p.span,
                rel_power_std: p.std / p.mean,
                rel_power_span: p.span / p.mean,
            })
        })
        .collect()
}

/// Per-device outcome of injecting one master into the whole array.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LockingCensus {
    pub fraction: f64,
    pub locked: Vec<bool>,
    /// Master minus device frequency, GHz.
    pub detunings_ghz: Vec<f64>,
    pub power_ratios: Vec<f64>,
}

/// Fraction of devices locked by a master at the array-mean frequency
/// delivering `master_power_mw` to each device. The master polarization is
/// the array-mean angle; each device's ratio is scaled by its polarization
/// projection.
pub fn locked_fraction(
    array: &ArrayModel,
    currents: &[f64],
    master_power_mw: f64,
    model: &LockingModel,
) -> Result<LockingCensus> {
    if currents.len() != array.devices.len() {
        return Err(Error::DimensionMismatch {
            what: "currents",
            expected: array.devices.len(),
            found: currents.len(),
        });
    }
    if !(master_power_mw >= 0.0) {
        return Err(Error::Domain { what: "master power", value: master_power_mw });
    }
    if array.devices.is_empty() {
        return Err(Error::Empty("array"));
    }
    let master_pol = array.mean_pol_angle();
    let freqs = array
        .devices
        .iter()
        .zip(currents)
        .map(|(d, &i)| wavelength_of_current(&d.params, i).map(frequency_ghz))
        .collect::<Result<Vec<f64>>>()?;
    let reference = mean(&freqs);
    let mut locked = Vec::with_capacity(freqs.len());
    let mut detunings = Vec::with_capacity(freqs.len());
    let mut ratios = Vec::with_capacity(freqs.len());
    for ((d, &i), &f) in array.devices.iter().zip(currents).zip(&freqs) {
        let slave = li_output(&d.params, i)?;
        if !(slave > 0.0) {
            return Err(Error::Domain { what: "slave power", value: slave });
        }
        let ratio = master_power_mw * injection_efficiency(master_pol, d.params.pol_angle) / slave;
        let lp = LockingParams::for_device(&d.params, i, model.alpha)?;
        let bounds = locking_bounds(&lp, ratio)?;
        let detuning = reference - f;
        locked.push(ratio > 0.0 && is_locked(detuning, &bounds));
        detunings.push(detuning);
        ratios.push(ratio);
    }
    let fraction = locked.iter().filter(|&&l| l).count() as f64 / locked.len() as f64;
    Ok(LockingCensus { fraction, locked, detunings_ghz: detunings, power_ratios: ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::spearman;

    fn stats() -> HeterogeneityStats {
        HeterogeneityStats::characterised(&LockingModel::default()).unwrap()
    }

    #[test]
    fn default_spec_fits_window() {
        let s = ArraySpec::default();
        s.validate().unwrap();
        assert!((s.active_area_mm2() - 0.16).abs() < 1e-12);
        let big = ArraySpec { pitch_um: 250.0, ..s };
        assert!(big.validate().is_err());
    }

    #[test]
    fn zero_spread_gives_identical_devices() {
        let a = sample_array(&stats().homogeneous(), &ArraySpec::default(), 9).unwrap();
        assert_eq!(a.devices.len(), 25);
        let p0 = a.devices[0].params;
        assert!(a.devices.iter().all(|d| d.params == p0));
        let h = homogeneity_report(&a, 700.0).unwrap();
        assert!(h.std_nm < 1e-9);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_array(&stats(), &ArraySpec::default(), 42).unwrap();
        let b = sample_array(&stats(), &ArraySpec::default(), 42).unwrap();
        assert_eq!(a, b);
        let c = sample_array(&stats(), &ArraySpec::default(), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn span_never_exceeds_clip() {
        for seed in 0..200 {
            let a = sample_array(&stats(), &ArraySpec::default(), seed).unwrap();
            let h = homogeneity_report(&a, 700.0).unwrap();
            assert!(h.span_nm <= 0.112 + 1e-12);
            let pols: Vec<f64> = a.devices.iter().map(|d| d.params.pol_angle).collect();
            assert!(crate::numeric::span(&pols) <= 2.8 + 1e-12);
        }
    }

    #[test]
    fn homogeneity_units_are_consistent() {
        let a = sample_array(&stats(), &ArraySpec::default(), 5).unwrap();
        let h = homogeneity_report(&a, 700.0).unwrap();
        let q = crate::units::SpectralQuantity::difference(h.span_nm, crate::units::SpectralUnit::Nanometer, h.mean_nm);
        let uev = q.convert(crate::units::SpectralUnit::MicroElectronVolt).unwrap().value;
        assert!((uev - h.span_uev).abs() < 0.5);
        assert!(h.span_ghz <= 35.2);
    }

    #[test]
    fn homogeneity_lists_dark_devices() {
        let a = sample_array(&stats(), &ArraySpec::default(), 5).unwrap();
        match homogeneity_report(&a, 300.0) {
            Err(Error::DevicesBelowThreshold(d)) => assert_eq!(d.len(), 25),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn homogeneous_array_calibrates_identically() {
        let a = sample_array(&stats().homogeneous(), &ArraySpec::default(), 1).unwrap();
        let c = calibrate_to_target(&a, 978.0, 6000.0).unwrap();
        assert!(c.failures.is_empty());
        assert_eq!(c.current_ua.std, 0.0);
    }

    #[test]
    fn calibration_hits_target_and_anticorrelates() {
        let s = HeterogeneityStats { tune_coeff_rel_sd: 0.0, ..stats() };
        let a = sample_array(&s, &ArraySpec::default(), 11).unwrap();
        let c = calibrate_to_target(&a, 978.0, 6000.0).unwrap();
        assert!(c.failures.is_empty());
        for d in &c.devices {
            assert!((d.lambda_nm - 978.0).abs() <= 1e-4);
        }
        let lref: Vec<f64> = a.devices.iter().map(|d| d.params.lambda_ref).collect();
        let cur: Vec<f64> = c.devices.iter().map(|d| d.current_ua).collect();
        assert!((spearman(&lref, &cur) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn unreachable_target_is_listed_not_fatal() {
        let a = sample_array(&stats(), &ArraySpec::default(), 2).unwrap();
        let c = calibrate_to_target(&a, 985.0, 6000.0).unwrap();
        assert_eq!(c.failures.len(), 25);
        assert!(c.failures.iter().all(|f| f.bound == Some(Bound::Upper)));
    }

    #[test]
    fn sweep_rejects_out_of_band_range() {
        let a = sample_array(&stats(), &ArraySpec::default(), 2).unwrap();
        assert!(sweep_targets(&a, 977.0, 978.0, 5, 6000.0).is_err());
        assert!(sweep_targets(&a, 977.8, 990.0, 5, 6000.0).is_err());
    }

    #[test]
    fn sweep_trends_follow_tuning_law() {
        let a = sample_array(&stats(), &ArraySpec::default(), 3).unwrap();
        let rows = sweep_targets(&a, 977.8, 978.6, 9, 6000.0).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].mean_power_mw >= w[0].mean_power_mw);
            assert!(w[1].mean_current_ua > w[0].mean_current_ua);
        }
    }

    #[test]
    fn no_master_no_locking() {
        let a = sample_array(&stats(), &ArraySpec::default(), 4).unwrap();
        let census = locked_fraction(&a, &a.currents(), 0.0, &LockingModel::default()).unwrap();
        assert_eq!(census.fraction, 0.0);
    }

    #[test]
    fn calibrated_array_fully_locks() {
        let mut a = sample_array(&stats(), &ArraySpec::default(), 4).unwrap();
        let c = calibrate_to_target(&a, 978.0, 6000.0).unwrap();
        c.apply(&mut a);
        let census = locked_fraction(&a, &a.currents(), 0.5, &LockingModel::default()).unwrap();
        assert_eq!(census.fraction, 1.0);
    }

    #[test]
    fn locked_fraction_grows_with_master_power() {
        let a = sample_array(&stats(), &ArraySpec::default(), 8).unwrap();
        let model = LockingModel::default();
        let mut last = 0.0;
        for k in 0..30 {
            let f = locked_fraction(&a, &a.currents(), 0.05 * k as f64, &model).unwrap().fraction;
            assert!(f >= last);
            last = f;
        }
    }

    #[test]
    fn locked_fraction_checks_lengths() {
        let a = sample_array(&stats(), &ArraySpec::default(), 8).unwrap();
        assert!(matches!(
            locked_fraction(&a, &[700.0; 3], 1.0, &LockingModel::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn correlated_mode_correlates() {
        let s = HeterogeneityStats { slope_lambda_correlation: Some(0.5), ..stats() };
        let mut l = Vec::new();
        let mut e = Vec::new();
        for seed in 0..200 {
            let a = sample_array(&s, &ArraySpec::default(), seed).unwrap();
            l.extend(a.devices.iter().map(|d| d.params.lambda_ref));
            e.extend(a.devices.iter().map(|d| d.params.slope_eff));
        }
        let r = crate::numeric::pearson(&l, &e);
        assert!((r - 0.5).abs() < 0.06, "{r}");
    }
}
