#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Static models and calibration tooling for a 5×5 VCSEL-array photonic
//! reservoir computer.
//!
//! The crate is split along the physical pipeline:
//!
//! - [`device`]: light–current curve, β s-curve, thermal wavelength tuning
//!   and its inverse, polarization projection.
//! - [`units`]: wavelength/frequency/energy conversions.
//! - [`locking`]: steady-state injection-locking cone, boundary fitting,
//!   bias-dependent locking slopes and power-budget extrapolation.
//! - [`array`]: seeded array generation, spectral homogeneity, per-device
//!   bias calibration to a common wavelength, global locking feasibility.
//! - [`reservoir`]: diffractive nearest-neighbour coupling, leaky reservoir
//!   dynamics, ridge readout and benchmark tasks.
//! - [`budget`]: electrical/optical power and energy per transform.
//!
//! Everything is `no_std` with `alloc`; IO lives in the `vcselrc` crate.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod array;
pub mod budget;
pub mod device;
mod error;
pub mod linalg;
pub mod locking;
pub mod numeric;
pub mod reservoir;
pub mod sampling;
pub mod units;

pub use error::{Bound, Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Photon energy–wavelength product h·c in eV·nm.
pub const HC_EV_NM: f64 = 1_239.841_984;
