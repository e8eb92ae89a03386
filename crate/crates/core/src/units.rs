//! Spectral unit conversions between wavelength (nm), frequency (GHz) and
//! photon energy (µeV).
//!
//! Absolute quantities convert through `ν = c/λ` and `E = hc/λ`. Differences
//! (detunings, spreads) are linearised around a reference wavelength:
//! `Δν = c·Δλ/λ_ref²` and `ΔE = hc·Δλ/λ_ref²`.

use crate::{Error, Result, HC_EV_NM, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SpectralUnit {
    Nanometer,
    Gigahertz,
    MicroElectronVolt,
}

/// Whether a value is an absolute position on the spectral axis or a
/// difference between two positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SpectralKind {
    Absolute,
    Difference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralQuantity {
    pub value: f64,
    pub unit: SpectralUnit,
    pub kind: SpectralKind,
    /// Wavelength in nm around which differences are linearised.
    pub reference_wavelength: Option<f64>,
}

impl SpectralQuantity {
    pub fn difference(value: f64, unit: SpectralUnit, reference_nm: f64) -> Self {
        SpectralQuantity { value, unit, kind: SpectralKind::Difference, reference_wavelength: Some(reference_nm) }
    }

    pub fn absolute(value: f64, unit: SpectralUnit) -> Self {
        SpectralQuantity { value, unit, kind: SpectralKind::Absolute, reference_wavelength: None }
    }

    pub fn convert(&self, to: SpectralUnit) -> Result<SpectralQuantity> {
        convert_detuning(self, to)
    }
}

/// GHz per nm of wavelength difference at `lambda_ref` nm.
pub fn ghz_per_nm(lambda_ref: f64) -> f64 {
    // c [m/s] * 1e-9 m/nm / (λ² · 1e-18 m²/nm²) gives Hz/nm * 1e-9 -> GHz/nm
    SPEED_OF_LIGHT / (lambda_ref * lambda_ref)
}

/// µeV per nm of wavelength difference at `lambda_ref` nm.
pub fn uev_per_nm(lambda_ref: f64) -> f64 {
    HC_EV_NM * 1e6 / (lambda_ref * lambda_ref)
}

/// Optical frequency in GHz of light at `lambda_nm`.
pub fn frequency_ghz(lambda_nm: f64) -> f64 {
    SPEED_OF_LIGHT / lambda_nm
}

/// Optical frequency in THz of light at `lambda_nm`.
pub fn frequency_thz(lambda_nm: f64) -> f64 {
    frequency_ghz(lambda_nm) * 1e-3
}

pub fn convert_detuning(q: &SpectralQuantity, to: SpectralUnit) -> Result<SpectralQuantity> {
    use SpectralUnit::*;
    if !q.value.is_finite() {
        return Err(Error::Domain { what: "spectral value", value: q.value });
    }
    let value = match q.kind {
        SpectralKind::Difference => {
            let lref = q.reference_wavelength.ok_or(Error::MissingReference)?;
            if !(lref > 0.0) {
                return Err(Error::Domain { what: "reference wavelength", value: lref });
            }
            let nm = match q.unit {
                Nanometer => q.value,
                Gigahertz => q.value / ghz_per_nm(lref),
                MicroElectronVolt => q.value / uev_per_nm(lref),
            };
            match to {
                Nanometer => nm,
                Gigahertz => nm * ghz_per_nm(lref),
                MicroElectronVolt => nm * uev_per_nm(lref),
            }
        }
        SpectralKind::Absolute => {
            if !(q.value > 0.0) {
                return Err(Error::Domain { what: "absolute spectral value", value: q.value });
            }
            let nm = match q.unit {
                Nanometer => q.value,
                Gigahertz => SPEED_OF_LIGHT / q.value,
                MicroElectronVolt => HC_EV_NM * 1e6 / q.value,
            };
            match to {
                Nanometer => nm,
                Gigahertz => SPEED_OF_LIGHT / nm,
                MicroElectronVolt => HC_EV_NM * 1e6 / nm,
            }
        }
    };
    Ok(SpectralQuantity { value, unit: to, ..*q })
}
