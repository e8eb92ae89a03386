//! Electrical plus optical power draw and energy per reservoir transform.
//!
//! The master laser's wall-plug power is not part of the per-device
//! figures; only the optical power it injects is. A fixed master overhead
//! can be added to the array total.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Power drawn by one device, mW: electrical `I·V` plus injected light.
pub fn device_power(bias_ua: f64, voltage_v: f64, injection_mw: f64) -> Result<f64> {
    for (what, v) in [("bias current", bias_ua), ("voltage", voltage_v), ("injection power", injection_mw)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Domain { what, value: v });
        }
    }
    Ok(bias_ua * 1e-3 * voltage_v + injection_mw)
}

/// Energy per transform in fJ for `power_mw` at `bandwidth_ghz`.
pub fn energy_per_transform(power_mw: f64, bandwidth_ghz: f64) -> Result<f64> {
    if !(bandwidth_ghz > 0.0 && bandwidth_ghz.is_finite()) {
        return Err(Error::Domain { what: "bandwidth", value: bandwidth_ghz });
    }
    // 1 mW / 1 GHz = 1 pJ
    Ok(power_mw / bandwidth_ghz * 1e3)
}

/// How much optical power the master delivers to each device.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum InjectionPlan {
    /// No master laser.
    #[default]
    None,
    Uniform(f64),
    PerDevice(Vec<f64>),
}

impl InjectionPlan {
    fn for_device(&self, k: usize) -> f64 {
        match self {
            InjectionPlan::None => 0.0,
            InjectionPlan::Uniform(p) => *p,
            InjectionPlan::PerDevice(p) => p[k],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeviceBudget {
    pub bias_ua: f64,
    pub electrical_mw: f64,
    pub injection_mw: f64,
    pub total_mw: f64,
    pub energy_fj: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BudgetReport {
    pub devices: Vec<DeviceBudget>,
    pub voltage_v: f64,
    pub bandwidth_ghz: f64,
    pub array_electrical_mw: f64,
    pub array_injection_mw: f64,
    pub array_total_mw: f64,
    pub master_overhead_mw: f64,
    pub total_with_master_mw: f64,
    pub mean_device_energy_fj: f64,
    pub array_energy_pj: f64,
    pub total_with_master_energy_pj: f64,
}

/// Budget for devices at `currents_ua` driven at `voltage_v`.
pub fn array_budget(
    currents_ua: &[f64],
    voltage_v: f64,
    injection: &InjectionPlan,
    bandwidth_ghz: f64,
    master_overhead_mw: Option<f64>,
) -> Result<BudgetReport> {
    if let InjectionPlan::PerDevice(p) = injection {
        if p.len() != currents_ua.len() {
            return Err(Error::DimensionMismatch {
                what: "injection plan",
                expected: currents_ua.len(),
                found: p.len(),
            });
        }
    }
    let overhead = master_overhead_mw.unwrap_or(0.0);
    if !(overhead >= 0.0 && overhead.is_finite()) {
        return Err(Error::Domain { what: "master overhead", value: overhead });
    }
    let mut devices = Vec::with_capacity(currents_ua.len());
    for (k, &i) in currents_ua.iter().enumerate() {
        let injection_mw = injection.for_device(k);
        let total_mw = device_power(i, voltage_v, injection_mw)?;
        devices.push(DeviceBudget {
            bias_ua: i,
            electrical_mw: device_power(i, voltage_v, 0.0)?,
            injection_mw,
            total_mw,
            energy_fj: energy_per_transform(total_mw, bandwidth_ghz)?,
        });
    }
    let array_electrical_mw = devices.iter().map(|d| d.electrical_mw).sum::<f64>();
    let array_injection_mw = devices.iter().map(|d| d.injection_mw).sum::<f64>();
    let array_total_mw = devices.iter().map(|d| d.total_mw).sum::<f64>();
    let total_with_master_mw = array_total_mw + overhead;
    let mean_device_energy_fj = if devices.is_empty() {
        0.0
    } else {
        energy_per_transform(array_total_mw / devices.len() as f64, bandwidth_ghz)?
    };
    Ok(BudgetReport {
        voltage_v,
        bandwidth_ghz,
        array_electrical_mw,
        array_injection_mw,
        array_total_mw,
        master_overhead_mw: overhead,
        total_with_master_mw,
        mean_device_energy_fj,
        array_energy_pj: energy_per_transform(array_total_mw, bandwidth_ghz)? * 1e-3,
        total_with_master_energy_pj: energy_per_transform(total_with_master_mw, bandwidth_ghz)? * 1e-3,
        devices,
    })
}
