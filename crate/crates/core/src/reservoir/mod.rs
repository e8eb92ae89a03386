//! Diffractively coupled reservoir over the locked array: coupling kernel,
//! leaky node dynamics, ridge readout and benchmark tasks.
//!
//! One discrete step stands for [`TIME_STEP_PS`] of device time; the
//! mapping is only used when reporting durations.

mod coupling;
mod dynamics;
mod readout;
mod tasks;

pub use coupling::{build_doe_coupling, CouplingMatrix, CouplingSpec};
pub use dynamics::{reservoir_step, run_reservoir, Nonlinearity, Reservoir, ReservoirState};
pub use readout::{evaluate, nmse, train_readout, train_readout_masked, ReadoutWeights, RANK_RCOND};
pub use tasks::{
    build_reservoir, mackey_glass, narma10, run_task, ReservoirConfig, Task, TaskReport, TaskRun, TaskSeries,
};

/// Device time represented by one reservoir update, ps.
pub const TIME_STEP_PS: f64 = 50.0;
