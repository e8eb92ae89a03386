//! Steady-state optical injection locking.
//!
//! A slave laser at frequency `ν` with cavity quality factor `Q` and
//! linewidth-enhancement factor `α`, injected with a master/slave power
//! ratio `r`, locks for detunings `Δ = ν_master − ν_slave` in
//!
//! ```text
//! −(ν/Q)·√r·√(1+α²)  ≤  Δ  ≤  (ν/Q)·√r
//! ```
//!
//! The cone is asymmetric: its red side is longer by `√(1+α²)`.

use alloc::vec::Vec;

use crate::device::{DeviceParams, QLaw};
use crate::numeric::fit_through_origin;
use crate::units::frequency_ghz;
use crate::{Error, Result};

/// Default linewidth-enhancement factor; a typical quantum-well VCSEL value.
pub const DEFAULT_ALPHA: f64 = 3.0;

/// Largest locked-state intensity enhancement relative to the master line.
pub const LOCKED_ENHANCEMENT: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LockingParams {
    /// Slave resonance frequency, THz.
    pub nu_slave: f64,
    /// Effective cavity quality factor.
    pub q_eff: f64,
    /// Linewidth-enhancement factor.
    pub alpha: f64,
}

impl LockingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu_slave > 0.0) {
            return Err(Error::InvalidParameter { what: "nu_slave", reason: "must be positive" });
        }
        if !(self.q_eff > 0.0) {
            return Err(Error::InvalidParameter { what: "q_eff", reason: "must be positive" });
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::InvalidParameter { what: "alpha", reason: "must be nonnegative" });
        }
        Ok(())
    }

    /// `ν/Q` in GHz.
    pub fn nu_over_q(&self) -> f64 {
        self.nu_slave * 1e3 / self.q_eff
    }

    /// Parameters of `device` biased at `i` µA.
    pub fn for_device(device: &DeviceParams, i: f64, alpha: f64) -> Result<Self> {
        Ok(LockingParams { nu_slave: frequency_ghz(device.lambda_ref) * 1e-3, q_eff: device.q_at(i)?, alpha })
    }
}

/// Closed detuning interval `[lower, upper]` in GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LockingBounds {
    pub lower: f64,
    pub upper: f64,
}

impl LockingBounds {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// A locking experiment: power ratio, detuning and the resulting cone.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LockingCondition {
    pub power_ratio: f64,
    pub detuning: f64,
    pub bounds: LockingBounds,
}

impl LockingCondition {
    pub fn new(lp: &LockingParams, power_ratio: f64, detuning: f64) -> Result<Self> {
        Ok(LockingCondition { power_ratio, detuning, bounds: locking_bounds(lp, power_ratio)? })
    }

    pub fn is_locked(&self) -> bool {
        is_locked(self.detuning, &self.bounds)
    }
}

pub fn locking_bounds(lp: &LockingParams, ratio: f64) -> Result<LockingBounds> {
    if !(ratio >= 0.0) || !ratio.is_finite() {
        return Err(Error::Domain { what: "power ratio", value: ratio });
    }
    let upper = lp.nu_over_q() * libm::sqrt(ratio);
    let lower = -upper * libm::sqrt(1.0 + lp.alpha * lp.alpha);
    Ok(LockingBounds { lower, upper })
}

/// Full locking width `(ν/Q)·√r·(1 + √(1+α²))`, GHz.
pub fn locking_width(lp: &LockingParams, ratio: f64) -> Result<f64> {
    locking_bounds(lp, ratio).map(|b| b.width())
}

/// Closed-interval membership; both boundaries count as locked.
pub fn is_locked(detuning: f64, bounds: &LockingBounds) -> bool {
    bounds.lower <= detuning && detuning <= bounds.upper
}

/// How a "locking range per √(power ratio)" figure maps onto `ν/Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SlopeConvention {
    /// The figure is the full width `upper − lower` per √r.
    #[default]
    FullWidth,
    /// The figure is the upper boundary only, i.e. `ν/Q` itself.
    UpperOnly,
}

impl SlopeConvention {
    /// Ratio between the quoted slope and `ν/Q`.
    pub fn factor(self, alpha: f64) -> f64 {
        match self {
            SlopeConvention::FullWidth => 1.0 + libm::sqrt(1.0 + alpha * alpha),
            SlopeConvention::UpperOnly => 1.0,
        }
    }
}

/// Linewidth-enhancement factor and slope convention shared by the
/// bias-dependent locking analyses.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct LockingModel {
    pub alpha: f64,
    pub convention: SlopeConvention,
}

impl Default for LockingModel {
    fn default() -> Self {
        LockingModel { alpha: DEFAULT_ALPHA, convention: SlopeConvention::FullWidth }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundaryPoint {
    pub sqrt_ratio: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundaryFit {
    /// `ν/Q` in GHz, the fitted upper-boundary slope.
    pub nu_over_q: f64,
    pub alpha: f64,
    pub slope_upper: f64,
    pub slope_lower: f64,
    pub slope_upper_stderr: f64,
    pub slope_lower_stderr: f64,
    /// Set when the lower boundary is not measurably steeper than the upper
    /// one; `alpha` is then reported as zero.
    pub degenerate: bool,
}

impl BoundaryFit {
    /// Width slope `(upper − lower)` per √r.
    pub fn width_slope(&self) -> f64 {
        self.slope_upper - self.slope_lower
    }
}

/// Fits `upper = s_up·√r` and `lower = s_low·√r` through the origin and
/// inverts the cone: `ν/Q = s_up`, `α = √((s_low/s_up)² − 1)`.
pub fn fit_locking_boundaries(points: &[BoundaryPoint]) -> Result<BoundaryFit> {
    if points.len() < 2 {
        return Err(Error::NoFit("need at least two boundary points"));
    }
    let first = points[0].sqrt_ratio;
    if points.iter().all(|p| p.sqrt_ratio == first) {
        return Err(Error::NoFit("all sqrt power ratios are equal"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.sqrt_ratio).collect();
    let ups: Vec<f64> = points.iter().map(|p| p.upper).collect();
    let lows: Vec<f64> = points.iter().map(|p| p.lower).collect();
    let (s_up, se_up) = fit_through_origin(&xs, &ups)?;
    let (s_low, se_low) = fit_through_origin(&xs, &lows)?;
    if !(s_up > 0.0) {
        return Err(Error::NoFit("upper boundary does not grow with the power ratio"));
    }
    let excess = -s_low - s_up;
    let noise = 2.0 * libm::sqrt(se_up * se_up + se_low * se_low);
    let degenerate = excess <= noise.max(1e-12 * s_up);
    let alpha = if degenerate {
        0.0
    } else {
        let q = s_low / s_up;
        libm::sqrt(q * q - 1.0)
    };
    Ok(BoundaryFit {
        nu_over_q: s_up,
        alpha,
        slope_upper: s_up,
        slope_lower: s_low,
        slope_upper_stderr: se_up,
        slope_lower_stderr: se_low,
        degenerate,
    })
}

/// `ν/Q(i)` in GHz for `device` biased at `i` µA.
pub fn nu_over_q_at(device: &DeviceParams, i: f64) -> Result<f64> {
    if i < device.i_th {
        return Err(Error::BelowThreshold { current_ua: i, i_th_ua: device.i_th });
    }
    Ok(frequency_ghz(device.lambda_ref) / device.q_at(i)?)
}

/// Locking-range slope (GHz per √r) at bias `i` µA under `model`'s
/// convention.
pub fn bias_dependent_slope(device: &DeviceParams, i: f64, model: &LockingModel) -> Result<f64> {
    Ok(nu_over_q_at(device, i)? * model.convention.factor(model.alpha))
}

/// `(q_ref, q_slope)` of `law` whose slopes hit `slope_lo` at `i_lo` and
/// `slope_hi` at `i_hi` (µA, GHz/√r), referenced to `i_ref` µA.
pub fn calibrate_q_law(
    lambda_ref: f64,
    i_ref: f64,
    (i_lo, slope_lo): (f64, f64),
    (i_hi, slope_hi): (f64, f64),
    model: &LockingModel,
    law: QLaw,
) -> Result<(f64, f64)> {
    if !(slope_lo > 0.0 && slope_hi > 0.0) || i_lo == i_hi {
        return Err(Error::NoFit("Q law needs two distinct biases with positive slopes"));
    }
    let nu = frequency_ghz(lambda_ref);
    let k = model.convention.factor(model.alpha);
    // interpolate whichever of Q or 1/Q the law makes linear
    let (lo, hi) = match law {
        QLaw::LinearLoss => (slope_lo / (nu * k), slope_hi / (nu * k)),
        QLaw::LinearQ => (nu * k / slope_lo, nu * k / slope_hi),
    };
    let per_ua = (hi - lo) / (i_hi - i_lo);
    let at_ref = lo + per_ua * (i_ref - i_lo);
    if !(at_ref > 0.0) {
        return Err(Error::ModelRange { what: "Q at reference bias", value: at_ref });
    }
    Ok(match law {
        QLaw::LinearLoss => (1.0 / at_ref, per_ua * 1e3 / at_ref),
        QLaw::LinearQ => (at_ref, -per_ua * 1e3 / at_ref),
    })
}

/// Power-budget locking estimate for an array fed by one input laser.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RcExtrapolation {
    pub injected_mw: f64,
    pub power_ratio: f64,
    pub range_ghz: f64,
}

pub fn rc_locking_extrapolation(
    input_power_mw: f64,
    n_lasers: usize,
    injection_fraction: f64,
    slave_power_mw: f64,
    slope: f64,
) -> Result<RcExtrapolation> {
    if !(input_power_mw >= 0.0) {
        return Err(Error::Domain { what: "input power", value: input_power_mw });
    }
    if n_lasers == 0 {
        return Err(Error::Domain { what: "laser count", value: 0.0 });
    }
    if !(0.0..=1.0).contains(&injection_fraction) {
        return Err(Error::Domain { what: "injection fraction", value: injection_fraction });
    }
    if !(slave_power_mw > 0.0) {
        return Err(Error::Domain { what: "slave power", value: slave_power_mw });
    }
    if !(slope >= 0.0) {
        return Err(Error::Domain { what: "locking slope", value: slope });
    }
    let injected_mw = input_power_mw / n_lasers as f64 * injection_fraction;
    let power_ratio = injected_mw / slave_power_mw;
    Ok(RcExtrapolation { injected_mw, power_ratio, range_ghz: slope * libm::sqrt(power_ratio) })
}

/// Master/slave power ratio at the slave's facet from powers measured
/// behind a lossy objective: the master passes the objective once on the
/// way in, the slave once on the way out.
pub fn facet_power_ratio(master_measured_mw: f64, slave_measured_mw: f64, objective_loss: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&objective_loss) {
        return Err(Error::Domain { what: "objective loss", value: objective_loss });
    }
    if !(slave_measured_mw > 0.0) {
        return Err(Error::Domain { what: "slave power", value: slave_measured_mw });
    }
    let t = 1.0 - objective_loss;
    Ok(master_measured_mw * t / (slave_measured_mw / t))
}

/// Spectrally resolved emission of a slave under swept-detuning injection.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LockingMap {
    /// Master detuning of each row, GHz.
    pub detunings: Vec<f64>,
    /// Spectral axis relative to the solitary slave line, GHz.
    pub frequencies: Vec<f64>,
    /// `intensity[row][col]`, in units of the solitary slave peak.
    pub intensity: Vec<Vec<f64>>,
    pub bounds: LockingBounds,
}

/// Lorentzian line shape parameters for [`synth_locking_map`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct MapShape {
    /// Half width at half maximum, GHz.
    pub linewidth: f64,
    pub enhancement: f64,
}

impl Default for MapShape {
    fn default() -> Self {
        MapShape { linewidth: 1.0, enhancement: LOCKED_ENHANCEMENT }
    }
}

fn lorentz(f: f64, f0: f64, hwhm: f64) -> f64 {
    let x = (f - f0) / hwhm;
    1.0 / (1.0 + x * x)
}

/// Synthetic spectral map: inside the cone a single line at the master
/// frequency, enhanced up to `shape.enhancement` times the master line at
/// zero detuning and tapering linearly to 1 at the boundaries; outside, the
/// master line (height `ratio`) and the solitary slave line (height 1).
pub fn synth_locking_map(
    lp: &LockingParams,
    ratio: f64,
    detunings: &[f64],
    frequencies: &[f64],
    shape: MapShape,
) -> Result<LockingMap> {
    if detunings.is_empty() {
        return Err(Error::Empty("detuning grid"));
    }
    if frequencies.is_empty() {
        return Err(Error::Empty("frequency axis"));
    }
    if detunings.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter { what: "detuning grid", reason: "must be strictly increasing" });
    }
    if !(shape.linewidth > 0.0) || !(shape.enhancement >= 1.0) {
        return Err(Error::InvalidParameter { what: "map shape", reason: "linewidth > 0 and enhancement >= 1" });
    }
    let bounds = locking_bounds(lp, ratio)?;
    let intensity = detunings
        .iter()
        .map(|&d| {
            let locked = ratio > 0.0 && is_locked(d, &bounds);
            frequencies
                .iter()
                .map(|&f| {
                    if locked {
                        let edge = if d >= 0.0 { bounds.upper } else { -bounds.lower };
                        let taper = if edge > 0.0 { 1.0 - (d.abs() / edge).min(1.0) } else { 1.0 };
                        let gain = 1.0 + (shape.enhancement - 1.0) * taper;
                        gain * ratio * lorentz(f, d, shape.linewidth)
                    } else {
                        ratio * lorentz(f, d, shape.linewidth) + lorentz(f, 0.0, shape.linewidth)
                    }
                })
                .collect()
        })
        .collect();
    Ok(LockingMap { detunings: detunings.to_vec(), frequencies: frequencies.to_vec(), intensity, bounds })
}

/// Local maxima of `row` exceeding `rel_threshold` of the row maximum.
pub fn spectral_peaks(row: &[f64], rel_threshold: f64) -> Vec<usize> {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..row.len())
        .filter(|&k| {
            let left = if k == 0 { f64::NEG_INFINITY } else { row[k - 1] };
            let right = row.get(k + 1).copied().unwrap_or(f64::NEG_INFINITY);
            row[k] > left && row[k] >= right && row[k] >= rel_threshold * max
        })
        .collect()
}
