use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::{Error, Result};

/// Node response to its net drive. Both branches are rectified, since
/// node amplitudes are nonnegative, and saturate at 1 with unit slope at
/// the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Nonlinearity {
    /// `z/(1+z)`, the amplitude saturation of an injection-locked laser.
    #[default]
    Saturating,
    Tanh,
}

impl Nonlinearity {
    pub fn apply(self, z: f64) -> f64 {
        let z = z.max(0.0);
        match self {
            Nonlinearity::Saturating => z / (1.0 + z),
            Nonlinearity::Tanh => libm::tanh(z),
        }
    }

    /// Largest slope over the whole real line.
    pub fn max_slope(self) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReservoirState {
    pub nodes: Vec<f64>,
    pub time: u64,
}

impl ReservoirState {
    pub fn zeros(n: usize) -> Self {
        ReservoirState { nodes: vec![0.0; n], time: 0 }
    }
}

/// Everything fixed about the reservoir between runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Reservoir {
    pub coupling: Matrix,
    pub input_weights: Vec<f64>,
    pub bias: Vec<f64>,
    /// Per-node output ceiling, in units of the strongest node.
    pub saturation: Vec<f64>,
    pub leak: f64,
    pub nonlinearity: Nonlinearity,
}

impl Reservoir {
    pub fn len(&self) -> usize {
        self.coupling.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.coupling.rows;
        if self.coupling.cols != n {
            return Err(Error::DimensionMismatch { what: "coupling", expected: n, found: self.coupling.cols });
        }
        for (what, v) in
            [("input weights", &self.input_weights), ("bias", &self.bias), ("saturation", &self.saturation)]
        {
            if v.len() != n {
                return Err(Error::DimensionMismatch { what, expected: n, found: v.len() });
            }
        }
        if !(self.leak > 0.0 && self.leak <= 1.0) {
            return Err(Error::Domain { what: "leak", value: self.leak });
        }
        if self.saturation.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::InvalidParameter { what: "saturation", reason: "must be finite and nonnegative" });
        }
        Ok(())
    }

    /// `max|f'|` over all nodes.
    pub fn max_gain(&self) -> f64 {
        self.saturation.iter().fold(0.0f64, |m, &s| m.max(s)) * self.nonlinearity.max_slope()
    }

    /// Sufficient echo-state condition for a symmetric coupling with
    /// spectral radius `rho`: the update is a contraction when `rho·max|f'| < 1`.
    pub fn contraction_factor(&self, rho: f64) -> f64 {
        1.0 - self.leak + self.leak * rho * self.max_gain()
    }

    fn advance(&self, x: &[f64], u: f64, drive: &mut [f64], out: &mut [f64]) {
        self.coupling.mul_vec_into(x, drive);
        for k in 0..x.len() {
            let z = drive[k] + self.input_weights[k] * u + self.bias[k];
            out[k] = (1.0 - self.leak) * x[k] + self.leak * self.saturation[k] * self.nonlinearity.apply(z);
        }
    }
}

/// One update `x' = (1−leak)·x + leak·sat·f(W·x + w_in·u + b)`.
pub fn reservoir_step(reservoir: &Reservoir, state: &ReservoirState, input: f64) -> Result<ReservoirState> {
    reservoir.validate()?;
    let n = reservoir.len();
    if state.nodes.len() != n {
        return Err(Error::DimensionMismatch { what: "state", expected: n, found: state.nodes.len() });
    }
    if !input.is_finite() {
        return Err(Error::Domain { what: "input sample", value: input });
    }
    let mut drive = vec![0.0; n];
    let mut nodes = vec![0.0; n];
    reservoir.advance(&state.nodes, input, &mut drive, &mut nodes);
    Ok(ReservoirState { nodes, time: state.time + 1 })
}

/// Drives the reservoir from `initial` with `inputs`; row `t` of the result
/// is the state after consuming `inputs[t]`.
pub fn run_reservoir(reservoir: &Reservoir, initial: &ReservoirState, inputs: &[f64]) -> Result<Matrix> {
    reservoir.validate()?;
    let n = reservoir.len();
    if initial.nodes.len() != n {
        return Err(Error::DimensionMismatch { what: "state", expected: n, found: initial.nodes.len() });
    }
    if let Some(&u) = inputs.iter().find(|u| !u.is_finite()) {
        return Err(Error::Domain { what: "input sample", value: u });
    }
    let mut states = Matrix::zeros(inputs.len(), n);
    let mut x = initial.nodes.clone();
    let mut next = vec![0.0; n];
    let mut drive = vec![0.0; n];
    for (t, &u) in inputs.iter().enumerate() {
        reservoir.advance(&x, u, &mut drive, &mut next);
        core::mem::swap(&mut x, &mut next);
        states.data[t * n..(t + 1) * n].copy_from_slice(&x);
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(leak: f64, coupling: f64) -> Reservoir {
        let mut w = Matrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    w[(i, j)] = coupling;
                }
            }
        }
        Reservoir {
            coupling: w,
            input_weights: vec![0.3, -0.2, 0.1],
            bias: vec![0.0; 3],
            saturation: vec![1.0, 0.8, 0.9],
            leak,
            nonlinearity: Nonlinearity::Saturating,
        }
    }

    #[test]
    fn free_decay_is_geometric() {
        let r = tiny(0.25, 0.0);
        let mut s = ReservoirState { nodes: vec![1.0, 2.0, 0.5], time: 0 };
        for t in 1..=20 {
            s = reservoir_step(&r, &s, 0.0).unwrap();
            let f = libm::pow(0.75, t as f64);
            assert!((s.nodes[1] - 2.0 * f).abs() < 1e-15);
        }
        assert_eq!(s.time, 20);
    }

    #[test]
    fn states_stay_under_saturation() {
        let r = tiny(1.0, 0.4);
        let states = run_reservoir(&r, &ReservoirState::zeros(3), &[10.0; 50]).unwrap();
        for t in 0..50 {
            for k in 0..3 {
                let x = states[(t, k)];
                assert!((0.0..=r.saturation[k]).contains(&x));
            }
        }
    }

    #[test]
    fn step_matches_run() {
        let r = tiny(0.5, 0.2);
        let inputs = [0.1, 0.4, -0.3, 0.2];
        let m = run_reservoir(&r, &ReservoirState::zeros(3), &inputs).unwrap();
        let mut s = ReservoirState::zeros(3);
        for (t, &u) in inputs.iter().enumerate() {
            s = reservoir_step(&r, &s, u).unwrap();
            assert_eq!(s.nodes.as_slice(), m.row(t));
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let r = tiny(0.5, 0.2);
        assert!(reservoir_step(&r, &ReservoirState::zeros(4), 0.0).is_err());
        let bad = Reservoir { leak: 0.0, ..r };
        assert!(reservoir_step(&bad, &ReservoirState::zeros(3), 0.0).is_err());
    }

    #[test]
    fn tanh_branch_is_rectified() {
        assert_eq!(Nonlinearity::Tanh.apply(-3.0), 0.0);
        assert!((Nonlinearity::Tanh.apply(0.5) - libm::tanh(0.5)).abs() < 1e-16);
    }
}
