use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{cholesky, cholesky_solve, dot, psd_pinv_solve, Matrix};
use crate::{Error, Result};

/// Relative eigenvalue cutoff for the unregularised pseudo-inverse.
pub const RANK_RCOND: f64 = 1e-12;

/// Linear readout `y = w·x + bias`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReadoutWeights {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub ridge: f64,
    /// Numerical rank of the centred Gram matrix over the active nodes.
    pub rank: usize,
    /// Set when `ridge = 0` and the active states do not span their space.
    pub rank_deficient: bool,
}

impl ReadoutWeights {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    pub fn predict(&self, states: &Matrix) -> Result<Vec<f64>> {
        if states.cols != self.weights.len() {
            return Err(Error::DimensionMismatch {
                what: "state width",
                expected: self.weights.len(),
                found: states.cols,
            });
        }
        Ok((0..states.rows).map(|t| self.predict_row(states.row(t))).collect())
    }
}

/// Ridge regression of `targets` on the rows of `states`, with an
/// unpenalised intercept.
///
/// The intercept is handled by centring, so the penalty only acts on node
/// weights. `ridge > 0` solves the normal equations by Cholesky; `ridge = 0`
/// uses an eigen-decomposition pseudo-inverse with cutoff [`RANK_RCOND`] and
/// flags rank deficiency instead of failing.
pub fn train_readout(states: &Matrix, targets: &[f64], ridge: f64) -> Result<ReadoutWeights> {
    train_readout_masked(states, targets, ridge, None)
}

/// As [`train_readout`], but nodes with `active[k] == false` are left out of
/// the regression and get weight zero.
pub fn train_readout_masked(
    states: &Matrix,
    targets: &[f64],
    ridge: f64,
    active: Option<&[bool]>,
) -> Result<ReadoutWeights> {
    let (t, n) = (states.rows, states.cols);
    if targets.len() != t {
        return Err(Error::DimensionMismatch { what: "targets", expected: t, found: targets.len() });
    }
    if t < 2 {
        return Err(Error::Empty("training samples"));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::Domain { what: "ridge", value: ridge });
    }
    if let Some(a) = active {
        if a.len() != n {
            return Err(Error::DimensionMismatch { what: "node mask", expected: n, found: a.len() });
        }
    }
    if states.data.iter().chain(targets).any(|v| !v.is_finite()) {
        return Err(Error::Domain { what: "training data", value: f64::NAN });
    }
    let cols: Vec<usize> = (0..n).filter(|&k| active.is_none_or(|a| a[k])).collect();
    let m = cols.len();

    let tf = t as f64;
    let y_mean = targets.iter().sum::<f64>() / tf;
    let mut x_mean = vec![0.0; m];
    for r in 0..t {
        let row = states.row(r);
        for (c, &k) in cols.iter().enumerate() {
            x_mean[c] += row[k];
        }
    }
    x_mean.iter_mut().for_each(|v| *v /= tf);

    let mut gram = Matrix::zeros(m, m);
    let mut rhs = vec![0.0; m];
    let mut xc = vec![0.0; m];
    for (r, &y) in targets.iter().enumerate() {
        let row = states.row(r);
        for (c, &k) in cols.iter().enumerate() {
            xc[c] = row[k] - x_mean[c];
        }
        let yc = y - y_mean;
        for i in 0..m {
            rhs[i] += xc[i] * yc;
            for j in 0..=i {
                gram[(i, j)] += xc[i] * xc[j];
            }
        }
    }
    for i in 0..m {
        for j in 0..i {
            gram[(j, i)] = gram[(i, j)];
        }
    }

    let (w_active, rank) = if m == 0 {
        (Vec::new(), 0)
    } else if ridge > 0.0 {
        for i in 0..m {
            gram[(i, i)] += ridge;
        }
        let l = cholesky(&gram)?;
        (cholesky_solve(&l, &rhs), m)
    } else {
        psd_pinv_solve(&gram, &rhs, RANK_RCOND)?
    };

    let mut weights = vec![0.0; n];
    for (c, &k) in cols.iter().enumerate() {
        weights[k] = w_active[c];
    }
    let bias = y_mean - dot(&w_active, &x_mean);
    Ok(ReadoutWeights { weights, bias, ridge, rank, rank_deficient: ridge == 0.0 && rank < m })
}

/// Mean squared error over the population variance of `targets`.
pub fn nmse(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            what: "predictions",
            expected: targets.len(),
            found: predictions.len(),
        });
    }
    if targets.is_empty() {
        return Err(Error::Empty("targets"));
    }
    let n = targets.len() as f64;
    let mean = targets.iter().sum::<f64>() / n;
    let var = targets.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Err(Error::Domain { what: "target variance", value: var });
    }
    let mse = predictions.iter().zip(targets).map(|(p, y)| (p - y) * (p - y)).sum::<f64>() / n;
    Ok(mse / var)
}

pub fn evaluate(weights: &ReadoutWeights, states: &Matrix, targets: &[f64]) -> Result<f64> {
    if states.rows != targets.len() {
        return Err(Error::DimensionMismatch { what: "targets", expected: states.rows, found: targets.len() });
    }
    nmse(&weights.predict(states)?, targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::stream;
    use rand::Rng;

    fn random_states(t: usize, n: usize, seed: u64) -> Matrix {
        let mut rng = stream(seed, 0);
        Matrix::from_rows(t, n, (0..t * n).map(|_| rng.random::<f64>()).collect()).unwrap()
    }

    #[test]
    fn exact_recovery_without_ridge() {
        let x = random_states(200, 6, 3);
        let w_true = [0.5, -1.0, 2.0, 0.0, 0.25, -0.75];
        let y: Vec<f64> = (0..200).map(|t| dot(&w_true, x.row(t)) + 0.3).collect();
        let r = train_readout(&x, &y, 0.0).unwrap();
        assert!(!r.rank_deficient);
        let p = r.predict(&x).unwrap();
        let res = p.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(res < 1e-9, "{res}");
        assert!((r.bias - 0.3).abs() < 1e-9);
    }

    #[test]
    fn huge_ridge_gives_mean_predictor() {
        let x = random_states(100, 5, 4);
        let y: Vec<f64> = (0..100).map(|t| x.row(t)[0] * 3.0 + 1.0).collect();
        let r = train_readout(&x, &y, 1e15).unwrap();
        assert!(r.weights.iter().all(|w| w.abs() < 1e-12));
        let mean = y.iter().sum::<f64>() / 100.0;
        assert!((r.bias - mean).abs() < 1e-9);
    }

    #[test]
    fn duplicate_column_is_flagged() {
        let mut x = random_states(50, 4, 5);
        for t in 0..50 {
            x[(t, 3)] = x[(t, 1)];
        }
        let y: Vec<f64> = (0..50).map(|t| x.row(t)[0]).collect();
        let r = train_readout(&x, &y, 0.0).unwrap();
        assert!(r.rank_deficient);
        assert_eq!(r.rank, 3);
        assert!(r.weights.iter().all(|w| w.is_finite()));
    }

    #[test]
    fn perfect_and_mean_predictions() {
        let y = [1.0, 2.0, 4.0, 3.0];
        assert_eq!(nmse(&y, &y).unwrap(), 0.0);
        assert!((nmse(&[2.5; 4], &y).unwrap() - 1.0).abs() < 1e-15);
        assert!(nmse(&[1.0; 3], &[1.0; 3]).is_err());
    }

    #[test]
    fn masked_columns_get_zero_weight() {
        let x = random_states(80, 5, 6);
        let y: Vec<f64> = (0..80).map(|t| x.row(t)[2] - x.row(t)[4]).collect();
        let mask = [true, false, true, false, true];
        let r = train_readout_masked(&x, &y, 1e-6, Some(&mask)).unwrap();
        assert_eq!(r.weights[1], 0.0);
        assert_eq!(r.weights[3], 0.0);
        let none = [false; 5];
        let r = train_readout_masked(&x, &y, 1e-6, Some(&none)).unwrap();
        assert!((r.bias - y.iter().sum::<f64>() / 80.0).abs() < 1e-15);
    }
}
