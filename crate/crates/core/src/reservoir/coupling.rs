use alloc::vec;
use alloc::vec::Vec;

use crate::array::ArraySpec;
use crate::linalg::{power_iteration, Matrix};
use crate::{Error, Result};

/// Diffractive kernel description. `strengths[k]` couples nodes at
/// Chebyshev grid distance `k + 1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct CouplingSpec {
    pub radius: usize,
    pub strengths: Vec<f64>,
    pub self_term: f64,
    /// Largest allowed row sum; guards against an over-driven kernel.
    pub max_row_sum: f64,
}

impl Default for CouplingSpec {
    fn default() -> Self {
        CouplingSpec { radius: 1, strengths: vec![0.24], self_term: 0.0, max_row_sum: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CouplingMatrix {
    pub spec: CouplingSpec,
    pub rows: usize,
    pub cols: usize,
    pub weights: Matrix,
    pub spectral_radius: f64,
}

impl CouplingMatrix {
    pub fn len(&self) -> usize {
        self.weights.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_row_sum(&self) -> f64 {
        (0..self.weights.rows).map(|i| self.weights.row(i).iter().sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn neighbours(&self, node: usize) -> usize {
        self.weights.row(node).iter().enumerate().filter(|&(j, &w)| j != node && w != 0.0).count()
    }
}

fn chebyshev(a: (usize, usize), b: (usize, usize)) -> usize {
    a.0.abs_diff(b.0).max(a.1.abs_diff(b.1))
}

/// Translation-invariant kernel on the grid with hard edges.
pub fn build_doe_coupling(array: &ArraySpec, spec: &CouplingSpec) -> Result<CouplingMatrix> {
    array.validate()?;
    let reach = array.rows.max(array.cols) - 1;
    if spec.radius == 0 {
        return Err(Error::InvalidParameter { what: "coupling radius", reason: "must be at least 1" });
    }
    if spec.radius > reach {
        return Err(Error::InvalidParameter { what: "coupling radius", reason: "exceeds the grid" });
    }
    if spec.strengths.len() != spec.radius {
        return Err(Error::DimensionMismatch {
            what: "coupling strengths",
            expected: spec.radius,
            found: spec.strengths.len(),
        });
    }
    if spec.strengths.iter().chain([&spec.self_term]).any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(Error::InvalidParameter { what: "coupling strengths", reason: "must be finite and nonnegative" });
    }
    let n = array.len();
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let d = chebyshev(array.position(i), array.position(j));
            w[(i, j)] = match d {
                0 => spec.self_term,
                d if d <= spec.radius => spec.strengths[d - 1],
                _ => 0.0,
            };
        }
    }
    let mut m =
        CouplingMatrix { spec: spec.clone(), rows: array.rows, cols: array.cols, weights: w, spectral_radius: 0.0 };
    let sum = m.max_row_sum();
    if sum > spec.max_row_sum {
        return Err(Error::ModelRange { what: "coupling row sum", value: sum });
    }
    // nonnegative symmetric kernel: the Perron eigenvalue is the spectral radius
    if m.weights.data.iter().any(|&w| w != 0.0) {
        m.spectral_radius = power_iteration(&m.weights, 1.0, 1e-15, 1_000_000)?;
    }
    Ok(m)
}
