//! Cross-checks of the hand-rolled linear algebra against nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use vcselrc_core::array::ArraySpec;
use vcselrc_core::linalg::Matrix;
use vcselrc_core::reservoir::{build_doe_coupling, evaluate, nmse, train_readout, CouplingSpec};
use vcselrc_core::sampling::stream;

fn random_states(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = stream(seed, 0);
    let data = (0..rows * cols).map(|_| rng.random::<f64>()).collect();
    Matrix::from_rows(rows, cols, data).unwrap()
}

/// Solves `[XᵀX + λD] w = Xᵀy` on the design matrix with a ones column,
/// where `D` penalises every weight except the intercept.
fn normal_equation_oracle(states: &Matrix, targets: &[f64], ridge: f64) -> (Vec<f64>, f64) {
    let (t, n) = (states.rows, states.cols);
    let x = DMatrix::from_fn(t, n + 1, |r, c| if c < n { states[(r, c)] } else { 1.0 });
    let y = DVector::from_column_slice(targets);
    let mut gram = x.transpose() * &x;
    for k in 0..n {
        gram[(k, k)] += ridge;
    }
    let rhs = x.transpose() * y;
    let w = gram.lu().solve(&rhs).expect("oracle system is regular");
    (w.as_slice()[..n].to_vec(), w[n])
}

#[test]
fn ridge_readout_matches_normal_equations() {
    for (seed, ridge) in [(1, 1e-6), (2, 1e-4), (3, 1e-9), (4, 1.0)] {
        let states = random_states(100, 25, seed);
        let mut rng = stream(seed, 1);
        let targets: Vec<f64> = (0..100).map(|_| rng.random::<f64>()).collect();
        let fit = train_readout(&states, &targets, ridge).unwrap();
        let (w, b) = normal_equation_oracle(&states, &targets, ridge);
        for (got, want) in fit.weights.iter().zip(&w) {
            assert!((got - want).abs() < 1e-8, "ridge {ridge}: {got} vs {want}");
        }
        assert!((fit.bias - b).abs() < 1e-8);
    }
}

#[test]
fn spectral_radius_matches_dense_eigensolver() {
    let spec = ArraySpec::default();
    for strengths in [vec![0.1], vec![0.14], vec![0.2, 0.05]] {
        let cs = CouplingSpec { radius: strengths.len(), strengths, self_term: 0.0, max_row_sum: 4.0 };
        let c = build_doe_coupling(&spec, &cs).unwrap();
        let n = c.len();
        let dense = DMatrix::from_fn(n, n, |i, j| c.weights[(i, j)]);
        let eig = SymmetricEigen::new(dense);
        let rho = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((c.spectral_radius - rho).abs() < 1e-9, "{} vs {rho}", c.spectral_radius);
    }
}

#[test]
fn nmse_matches_direct_formula() {
    let states = random_states(60, 5, 9);
    let mut rng = stream(9, 1);
    let targets: Vec<f64> = (0..60).map(|_| rng.random::<f64>() * 3.0 - 1.0).collect();
    let fit = train_readout(&states, &targets, 1e-3).unwrap();
    let x = DMatrix::from_fn(60, 5, |r, c| states[(r, c)]);
    let pred = x * DVector::from_column_slice(&fit.weights) + DVector::from_element(60, fit.bias);
    let y = DVector::from_column_slice(&targets);
    let mse = (&pred - &y).norm_squared() / 60.0;
    let var = y.variance();
    let oracle = mse / var;
    assert!((evaluate(&fit, &states, &targets).unwrap() - oracle).abs() < 1e-12);
    assert!((nmse(pred.as_slice(), &targets).unwrap() - oracle).abs() < 1e-12);
}
