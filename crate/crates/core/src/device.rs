//! Static single-VCSEL models.
//!
//! Units used throughout: currents in µA, optical power in mW, slope
//! efficiency in W/A (so `W/A · µA = µW`), wavelengths in nm, electrical
//! power in mW, rollover current in mA.

use alloc::vec::Vec;

use crate::numeric::{self, bisect, golden_min};
use crate::{Bound, Error, Result};

/// Wavelength tolerance of the inverse tuning solver, nm (0.1 pm).
pub const WAVELENGTH_TOL_NM: f64 = 1e-4;
/// Iteration cap of the inverse tuning solver.
pub const MAX_BISECTION_ITER: usize = 200;

/// How the effective cavity Q falls with bias.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum QLaw {
    /// Cavity loss rate `1/Q` grows linearly with bias, so the locking
    /// slope `ν/Q` is linear in bias:
    /// `Q(i) = q_ref / (1 + q_slope·(i − i_ref))`.
    #[default]
    LinearLoss,
    /// `Q(i) = q_ref·(1 − q_slope·(i − i_ref))`.
    LinearQ,
}

/// One VCSEL's static model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct DeviceParams {
    /// Threshold current, µA.
    pub i_th: f64,
    /// Slope efficiency above threshold, W/A.
    pub slope_eff: f64,
    /// Rollover current scale, mA. `None` means a purely linear LI curve.
    pub i_sat: Option<f64>,
    /// Spontaneous-emission coupling factor, `0 < beta <= 1`.
    pub beta: f64,
    /// Emission wavelength at `i_ref`, nm.
    pub lambda_ref: f64,
    /// Reference bias for `lambda_ref` and `q_ref`, µA.
    pub i_ref: f64,
    /// Thermal red shift per mW of dissipated electrical power, nm/mW.
    pub tune_coeff: f64,
    /// Voltage intercept of the linear I–V model, V.
    pub v_bias: f64,
    /// Differential series resistance, kΩ (V/mA). Zero gives a constant
    /// operating voltage.
    pub r_series: f64,
    /// Orientation of the dominant linear polarization, degrees.
    pub pol_angle: f64,
    /// Cavity quality factor at `i_ref`.
    pub q_ref: f64,
    /// Fractional change per mA above `i_ref`, of `1/Q` or of `Q`
    /// depending on `q_law`.
    pub q_slope: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub q_law: QLaw,
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let checks: [(bool, &'static str, &'static str); 9] = [
            (self.i_th > 0.0, "i_th", "must be positive"),
            (self.slope_eff > 0.0, "slope_eff", "must be positive"),
            (self.i_sat.is_none_or(|s| s > 0.0), "i_sat", "must be positive"),
            (self.beta > 0.0 && self.beta <= 1.0, "beta", "must lie in (0, 1]"),
            (self.lambda_ref > 0.0, "lambda_ref", "must be positive"),
            (self.q_ref > 0.0, "q_ref", "must be positive"),
            (self.tune_coeff > 0.0, "tune_coeff", "must be positive for a monotone tuning law"),
            (self.v_bias > 0.0 && self.r_series >= 0.0, "I-V model", "needs v_bias > 0 and r_series >= 0"),
            (self.i_ref >= 0.0, "i_ref", "must be nonnegative"),
        ];
        for (ok, what, reason) in checks {
            if !ok {
                return Err(Error::InvalidParameter { what, reason });
            }
        }
        let finite = [
            self.i_th,
            self.slope_eff,
            self.beta,
            self.lambda_ref,
            self.i_ref,
            self.tune_coeff,
            self.v_bias,
            self.r_series,
            self.pol_angle,
            self.q_ref,
            self.q_slope,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter { what: "device", reason: "non-finite field" });
        }
        Ok(())
    }

    /// Operating voltage at bias `i` (µA), V.
    pub fn voltage(&self, i: f64) -> f64 {
        self.v_bias + self.r_series * i * 1e-3
    }

    /// Electrical power dissipated at bias `i` (µA), mW.
    pub fn electrical_power(&self, i: f64) -> f64 {
        i * 1e-3 * self.voltage(i)
    }

    /// Q factor at bias `i` (µA).
    pub fn q_at(&self, i: f64) -> Result<f64> {
        let x = self.q_slope * (i - self.i_ref) * 1e-3;
        let q = match self.q_law {
            QLaw::LinearLoss => self.q_ref / (1.0 + x),
            QLaw::LinearQ => self.q_ref * (1.0 - x),
        };
        if q > 0.0 && q.is_finite() {
            Ok(q)
        } else {
            Err(Error::ModelRange { what: "Q(i)", value: q })
        }
    }
}

/// Optical output power (mW) at bias `i` (µA).
///
/// Zero up to threshold, then `η·(i − i_th) / (1 + (i − i_th)/i_sat)`.
pub fn li_output(p: &DeviceParams, i: f64) -> Result<f64> {
    if !(i >= 0.0) || !i.is_finite() {
        return Err(Error::Domain { what: "current", value: i });
    }
    if i <= p.i_th {
        return Ok(0.0);
    }
    let above = i - p.i_th;
    let linear = p.slope_eff * above * 1e-3;
    Ok(match p.i_sat {
        Some(sat_ma) => linear / (1.0 + above * 1e-3 / sat_ma),
        None => linear,
    })
}

/// Rollover scale (mA) that makes the saturable LI curve pass through
/// `(i_anchor µA, p_anchor mW)`.
pub fn fit_rollover(i_th: f64, slope_eff: f64, i_anchor: f64, p_anchor: f64) -> Result<f64> {
    let above_ma = (i_anchor - i_th) * 1e-3;
    let linear = slope_eff * above_ma;
    if !(above_ma > 0.0) || !(p_anchor > 0.0) || !(p_anchor < linear) {
        return Err(Error::NoFit("anchor must lie above threshold and below the linear LI line"));
    }
    // linear / (1 + a/s) = p  =>  s = a / (linear/p - 1)
    Ok(above_ma / (linear / p_anchor - 1.0))
}

/// Threshold and slope extracted from an LI sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LiFit {
    pub i_th: f64,
    pub slope_eff: f64,
    pub slope_stderr: f64,
    pub i_th_stderr: f64,
    pub points_used: usize,
}

/// Fraction of the peak power below which a sample is treated as part of
/// the sub-threshold region.
const LI_FIT_FLOOR: f64 = 0.05;

/// Threshold and slope efficiency from `(current µA, power mW)` samples.
///
/// A straight line is fitted to the samples above 5% of the peak power;
/// the threshold is its zero crossing.
pub fn fit_li(samples: &[(f64, f64)]) -> Result<LiFit> {
    if samples.len() < 4 {
        return Err(Error::NoFit("need at least four LI samples"));
    }
    let p_max = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    if !(p_max > 0.0) {
        return Err(Error::NoFit("no sample above threshold"));
    }
    let floor = LI_FIT_FLOOR * p_max;
    let (above, below): (Vec<_>, Vec<_>) = samples.iter().copied().partition(|s: &(f64, f64)| s.1 > floor);
    if below.is_empty() {
        return Err(Error::NoFit("samples do not reach below threshold"));
    }
    if above.len() < 2 {
        return Err(Error::NoFit("fewer than two samples on the linear segment"));
    }
    let xs: Vec<f64> = above.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = above.iter().map(|s| s.1).collect();
    let line = numeric::fit_line(&xs, &ys)?;
    if !(line.slope > 0.0) {
        return Err(Error::NoFit("non-increasing LI segment"));
    }
    let i_th = -line.intercept / line.slope;
    // delta-method error of the zero crossing, ignoring the slope/intercept covariance sign
    let a = line.intercept_stderr / line.slope;
    let b = line.intercept * line.slope_stderr / (line.slope * line.slope);
    let i_th_stderr = libm::sqrt(a * a + b * b);
    Ok(LiFit {
        i_th,
        slope_eff: line.slope * 1e3,
        slope_stderr: line.slope_stderr * 1e3,
        i_th_stderr,
        points_used: above.len(),
    })
}

/// Steady-state mean photon number of the lasing mode at normalized pump
/// `pump` (threshold at `pump ≈ 1` for small `beta`).
///
/// Positive root of `n² + n(1 − pump) − beta·pump = 0`, the carrier/photon
/// rate equations with a fraction `beta` of spontaneous emission feeding the
/// mode. `beta = 1` gives `n = pump` exactly; for small `beta` the output
/// jumps by roughly `1/beta` across threshold.
pub fn beta_scurve(beta: f64, pump: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain { what: "beta", value: beta });
    }
    if !(pump >= 0.0) || !pump.is_finite() {
        return Err(Error::Domain { what: "pump", value: pump });
    }
    let b = 1.0 - pump;
    let disc = libm::sqrt(b * b + 4.0 * beta * pump);
    // pick the cancellation-free form of the root on each side of threshold
    Ok(if b > 0.0 { 2.0 * beta * pump / (b + disc) } else { 0.5 * (disc - b) })
}

/// Result of fitting the s-curve to `(pump, photon)` data in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BetaFit {
    pub beta: f64,
    /// Multiplicative scale between model photon number and data units.
    pub scale: f64,
    pub rms_log_residual: f64,
}

/// Fits `beta` (and a free amplitude) by golden-section search over
/// `log10 beta ∈ [-6, 0]`, minimising squared log residuals.
pub fn fit_beta(samples: &[(f64, f64)]) -> Result<BetaFit> {
    let data: Vec<(f64, f64)> =
        samples.iter().copied().filter(|&(p, n)| p > 0.0 && n > 0.0 && p.is_finite() && n.is_finite()).collect();
    if data.len() < 3 {
        return Err(Error::NoFit("need at least three positive s-curve samples"));
    }
    let cost = |log_beta: f64| -> (f64, f64) {
        let beta = libm::pow(10.0, log_beta);
        let mut res: Vec<f64> = Vec::with_capacity(data.len());
        for &(p, n) in &data {
            let m = beta_scurve(beta, p).unwrap_or(f64::NAN);
            res.push(libm::log(n) - libm::log(m));
        }
        let offset = numeric::mean(&res);
        let ss = res.iter().map(|r| (r - offset) * (r - offset)).sum::<f64>();
        (ss, offset)
    };
    let (log_beta, ss) = golden_min(|lb| cost(lb).0, -6.0, 0.0, 1e-10, 400);
    let (_, offset) = cost(log_beta);
    Ok(BetaFit {
        beta: libm::pow(10.0, log_beta),
        scale: libm::exp(offset),
        rms_log_residual: libm::sqrt(ss / data.len() as f64),
    })
}

/// Tuning coefficient (nm/mW) of the thermal law passing through two
/// `(current µA, wavelength nm)` anchors for a given I–V model.
pub fn tune_coeff_from_anchors(v_bias: f64, r_series: f64, (i1, l1): (f64, f64), (i2, l2): (f64, f64)) -> Result<f64> {
    let pel = |i: f64| i * 1e-3 * (v_bias + r_series * i * 1e-3);
    let dp = pel(i2) - pel(i1);
    if dp == 0.0 || !dp.is_finite() {
        return Err(Error::NoFit("anchors have identical dissipated power"));
    }
    let c = (l2 - l1) / dp;
    if !(c > 0.0) {
        return Err(Error::NoFit("anchors do not describe a red shift"));
    }
    Ok(c)
}

/// Lasing wavelength (nm) at bias `i` (µA) above threshold.
///
/// `λ(i) = λ_ref + tune_coeff·(P_el(i) − P_el(i_ref))` with
/// `P_el(i) = i·(v_bias + r_series·i)`.
pub fn wavelength_of_current(p: &DeviceParams, i: f64) -> Result<f64> {
    if !i.is_finite() {
        return Err(Error::Domain { what: "current", value: i });
    }
    if i < p.i_th {
        return Err(Error::BelowThreshold { current_ua: i, i_th_ua: p.i_th });
    }
    Ok(p.lambda_ref + p.tune_coeff * (p.electrical_power(i) - p.electrical_power(p.i_ref)))
}

/// Bias current (µA) that puts the device at `target` nm, by bisection on
/// `[i_th, i_max]`.
pub fn current_for_wavelength(p: &DeviceParams, target: f64, i_max: f64) -> Result<f64> {
    if !(i_max >= p.i_th) {
        return Err(Error::Domain { what: "i_max", value: i_max });
    }
    let low = wavelength_of_current(p, p.i_th)?;
    let high = wavelength_of_current(p, i_max)?;
    if !(target >= low) {
        return Err(Error::OutOfRange { bound: Bound::Lower, target, low, high });
    }
    if !(target <= high) {
        return Err(Error::OutOfRange { bound: Bound::Upper, target, low, high });
    }
    let b = bisect(
        |i| wavelength_of_current(p, i).unwrap_or(f64::NAN) - target,
        p.i_th,
        i_max,
        WAVELENGTH_TOL_NM,
        MAX_BISECTION_ITER,
    )?;
    Ok(b.root)
}

/// Polarization projection `cos²(θ_master − θ_device)`, angles in degrees.
pub fn injection_efficiency(theta_master: f64, theta_device: f64) -> f64 {
    let c = libm::cos((theta_master - theta_device).to_radians());
    c * c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dev() -> DeviceParams {
        DeviceParams {
            i_th: 368.0,
            slope_eff: 0.359,
            i_sat: None,
            beta: 0.0032,
            lambda_ref: 977.77,
            i_ref: 700.0,
            tune_coeff: 0.1106,
            v_bias: 2.0,
            r_series: 0.0,
            pol_angle: 0.0,
            q_ref: 2.4e5,
            q_slope: 0.3,
            q_law: QLaw::LinearQ,
        }
    }

    #[test]
    fn li_is_zero_at_threshold() {
        assert_eq!(li_output(&dev(), 368.0).unwrap(), 0.0);
        assert_eq!(li_output(&dev(), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn li_at_calibration_bias() {
        let p = li_output(&dev(), 1740.0).unwrap();
        assert!((p - 0.4925).abs() < 1e-4);
        assert!((p - 0.501).abs() <= 0.15 * 0.501);
    }

    #[test]
    fn li_rejects_negative_current() {
        assert!(matches!(li_output(&dev(), -1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn rollover_anchor() {
        let s = fit_rollover(352.2, 0.359, 15_000.0, 2.8).unwrap();
        // hand solution: 14.6478 / (0.359*14.6478/2.8 - 1)
        let expect = 14.6478 / (0.359 * 14.6478 / 2.8 - 1.0);
        assert!((s - expect).abs() < 1e-9);
        assert!((s - 16.7).abs() < 0.05);
        let p = DeviceParams { i_th: 352.2, i_sat: Some(s), ..dev() };
        assert!((li_output(&p, 15_000.0).unwrap() - 2.8).abs() < 1e-12);
    }

    #[test]
    fn li_fit_recovers_noiseless_parameters() {
        let p = DeviceParams { i_th: 352.2, ..dev() };
        let samples: Vec<(f64, f64)> =
            (0..=40).map(|k| 50.0 * k as f64).map(|i| (i, li_output(&p, i).unwrap())).collect();
        let f = fit_li(&samples).unwrap();
        assert!((f.i_th - 352.2).abs() <= 352.2e-3);
        assert!((f.slope_eff - 0.359).abs() <= 0.359e-3);
    }

    #[test]
    fn li_fit_rejects_dark_sweep() {
        let samples = [(0.0, 0.0), (100.0, 0.0), (200.0, 0.0), (300.0, 0.0)];
        assert!(matches!(fit_li(&samples), Err(Error::NoFit(_))));
    }

    #[test]
    fn thresholdless_scurve_is_linear() {
        for k in 0..=30 {
            let pump = libm::pow(10.0, -1.5 + 0.1 * k as f64);
            assert!((beta_scurve(1.0, pump).unwrap() - pump).abs() < 1e-12 * pump.max(1.0));
        }
    }

    #[test]
    fn scurve_vanishes_without_pump() {
        let n0 = beta_scurve(0.0032, 0.0).unwrap();
        let asym = beta_scurve(0.0032, 10.0).unwrap();
        assert!(n0 <= 1e-6 * asym);
    }

    #[test]
    fn scurve_jump_scales_as_inverse_beta() {
        // ratio of the far-above to far-below threshold differential slopes
        let beta: f64 = 1e-4;
        let below = (beta_scurve(beta, 2e-3).unwrap() - beta_scurve(beta, 1e-3).unwrap()) / 1e-3;
        let above = beta_scurve(beta, 101.0).unwrap() - beta_scurve(beta, 100.0).unwrap();
        let jump = above / below;
        assert!((jump * beta - 1.0).abs() < 0.1, "{jump}");
    }

    #[test]
    fn scurve_rejects_bad_beta() {
        assert!(beta_scurve(0.0, 1.0).is_err());
        assert!(beta_scurve(1.5, 1.0).is_err());
    }

    #[test]
    fn beta_refit_recovers_value() {
        let samples: Vec<(f64, f64)> = (0..60)
            .map(|k| libm::pow(10.0, -2.0 + 0.05 * k as f64))
            .map(|p| (p, 37.0 * beta_scurve(0.0032, p).unwrap()))
            .collect();
        let f = fit_beta(&samples).unwrap();
        assert!((f.beta / 0.0032 - 1.0).abs() < 0.1, "{}", f.beta);
        assert!((f.scale / 37.0 - 1.0).abs() < 0.1);
    }

    #[test]
    fn reference_bias_gives_reference_wavelength() {
        assert_eq!(wavelength_of_current(&dev(), 700.0).unwrap(), 977.77);
    }

    #[test]
    fn two_point_tuning_calibration() {
        let c = tune_coeff_from_anchors(2.0, 0.0, (700.0, 977.77), (1740.0, 978.00)).unwrap();
        assert!((c - 0.23 / 2.08).abs() < 1e-12);
        assert!((c - 0.1106).abs() < 1e-4);
    }

    #[test]
    fn below_threshold_wavelength_is_undefined() {
        assert!(matches!(wavelength_of_current(&dev(), 100.0), Err(Error::BelowThreshold { .. })));
    }

    #[test]
    fn mean_device_reaches_978_near_1p74_ma() {
        let c = tune_coeff_from_anchors(2.0, 0.0, (700.0, 977.77), (1740.0, 978.00)).unwrap();
        let p = DeviceParams { tune_coeff: c, ..dev() };
        let i = current_for_wavelength(&p, 978.0, 6000.0).unwrap();
        assert!((i - 1740.0).abs() < 1.0);
    }

    #[test]
    fn unreachable_target_reports_bound() {
        let p = dev();
        // choose i_max so that λ(i_max) = 978.6 nm
        let i_max = p.i_ref + (978.6 - p.lambda_ref) / (p.tune_coeff * p.v_bias) * 1e3;
        assert!((wavelength_of_current(&p, i_max).unwrap() - 978.6).abs() < 1e-9);
        match current_for_wavelength(&p, 979.5, i_max) {
            Err(Error::OutOfRange { bound: Bound::Upper, .. }) => {}
            other => panic!("{other:?}"),
        }
        match current_for_wavelength(&p, 977.0, i_max) {
            Err(Error::OutOfRange { bound: Bound::Lower, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn injection_efficiency_reference_angles() {
        assert_eq!(injection_efficiency(0.0, 0.0), 1.0);
        assert!(injection_efficiency(90.0, 0.0) < 1e-30);
        let e = injection_efficiency(2.8, 0.0);
        assert!((e - 0.9976).abs() < 5e-5, "{e}");
    }

    proptest! {
        #[test]
        fn li_is_monotone(a in 0.0f64..20_000.0, b in 0.0f64..20_000.0, sat in proptest::option::of(1.0f64..50.0)) {
            let p = DeviceParams { i_sat: sat, ..dev() };
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(li_output(&p, lo).unwrap() <= li_output(&p, hi).unwrap());
        }

        #[test]
        fn scurve_strictly_increasing(beta in 1e-5f64..1.0, p in 0.0f64..100.0, dp in 1e-3f64..10.0) {
            prop_assert!(beta_scurve(beta, p + dp).unwrap() > beta_scurve(beta, p).unwrap());
        }

        #[test]
        fn thresholdless_loglog_slope(p in -1.5f64..1.5) {
            let h = 1e-4;
            let lo = libm::log(beta_scurve(1.0, libm::pow(10.0, p - h)).unwrap());
            let hi = libm::log(beta_scurve(1.0, libm::pow(10.0, p + h)).unwrap());
            let slope = (hi - lo) / (2.0 * h * core::f64::consts::LN_10);
            prop_assert!((0.99..=1.01).contains(&slope));
        }

        #[test]
        fn tuning_inverse_round_trip(i in 368.0f64..5_000.0, r in 0.0f64..0.8) {
            let p = DeviceParams { r_series: r, ..dev() };
            let l = wavelength_of_current(&p, i).unwrap();
            let back = current_for_wavelength(&p, l, 6_000.0).unwrap();
            prop_assert!((back - i).abs() <= 0.01);
            prop_assert!((wavelength_of_current(&p, back).unwrap() - l).abs() <= WAVELENGTH_TOL_NM);
        }

        #[test]
        fn tuning_is_strictly_increasing(i in 368.0f64..5_000.0, di in 1e-3f64..1000.0, r in 0.0f64..0.8) {
            let p = DeviceParams { r_series: r, ..dev() };
            prop_assert!(wavelength_of_current(&p, i + di).unwrap() > wavelength_of_current(&p, i).unwrap());
        }

        #[test]
        fn injection_efficiency_properties(a in -360.0f64..360.0, b in -360.0f64..360.0) {
            let e = injection_efficiency(a, b);
            prop_assert!((0.0..=1.0).contains(&e));
            prop_assert!((e - injection_efficiency(b, a)).abs() < 1e-15);
            prop_assert!((e - injection_efficiency(a + 180.0, b)).abs() < 1e-12);
        }
    }
}
