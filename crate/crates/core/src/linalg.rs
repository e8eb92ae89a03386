//! Small dense linear algebra: row-major matrices, Cholesky, symmetric
//! eigen-decomposition and power iteration. Sizes here are tens of nodes, so
//! straightforward O(n³) routines are plenty.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { what: "matrix data", expected: rows * cols, found: data.len() });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `y ← A·x` without allocating.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    let n = a.rows;
    if a.cols != n {
        return Err(Error::DimensionMismatch { what: "cholesky input", expected: n, found: a.cols });
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return Err(Error::NoFit("matrix is not positive definite"));
        }
        let d = libm::sqrt(d);
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `L·Lᵀ·x = b` given the lower factor `L`.
pub fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[(i, k)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[(k, i)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    y
}

/// Eigenvalues (ascending) and column eigenvectors of a symmetric matrix,
/// by cyclic Jacobi rotations.
pub fn symmetric_eigen(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = a.rows;
    if a.cols != n {
        return Err(Error::DimensionMismatch { what: "eigen input", expected: n, found: a.cols });
    }
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let scale = m.data.iter().map(|x| x * x).sum::<f64>();
    const SWEEPS: usize = 100;
    let mut converged = n < 2;
    for _ in 0..SWEEPS {
        let off: f64 = (0..n).map(|i| (0..n).filter(|&j| j != i).map(|j| m[(i, j)] * m[(i, j)]).sum::<f64>()).sum();
        if off <= 1e-30 * scale || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { what: "jacobi eigen", iterations: SWEEPS });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vecs = Matrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vecs[(k, new)] = v[(k, old)];
        }
    }
    Ok((values, vecs))
}

/// Moore–Penrose solve of a symmetric positive-semidefinite system
/// `A·x = b`. Eigenvalues below `rcond·λ_max` are treated as zero.
/// Returns the solution and the numerical rank.
pub fn psd_pinv_solve(a: &Matrix, b: &[f64], rcond: f64) -> Result<(Vec<f64>, usize)> {
    let (vals, vecs) = symmetric_eigen(a)?;
    let n = a.rows;
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = rcond * top;
    let mut x = vec![0.0; n];
    let mut rank = 0;
    for (k, &lam) in vals.iter().enumerate() {
        if lam.abs() <= cut || lam == 0.0 {
            continue;
        }
        rank += 1;
        let proj: f64 = (0..n).map(|i| vecs[(i, k)] * b[i]).sum::<f64>() / lam;
        for i in 0..n {
            x[i] += proj * vecs[(i, k)];
        }
    }
    Ok((x, rank))
}

/// Largest eigenvalue modulus of a square matrix with a nonnegative
/// spectrum shifted by `shift`, by power iteration on `A + shift·I`.
///
/// For symmetric matrices whose most negative eigenvalue does not exceed
/// the largest in modulus, `shift = 1` avoids the sign-flip stall of plain
/// power iteration on ±ρ pairs.
pub fn power_iteration(a: &Matrix, shift: f64, tol: f64, max_iter: usize) -> Result<f64> {
    let n = a.rows;
    if n == 0 {
        return Ok(0.0);
    }
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 1e-3 * i as f64).collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut y = vec![0.0; n];
    let mut lambda = 0.0;
    for it in 0..max_iter {
        a.mul_vec_into(&x, &mut y);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += shift * xi;
        }
        let ny = norm(&y);
        if ny == 0.0 {
            return Ok(0.0);
        }
        let next = dot(&x, &y);
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
        if it > 0 && (next - lambda).abs() <= tol * next.abs().max(1.0) {
            return Ok(next - shift);
        }
        lambda = next;
    }
    Err(Error::NoConvergence { what: "power iteration", iterations: max_iter })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd() -> Matrix {
        Matrix::from_rows(3, 3, vec![4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]).unwrap()
    }

    #[test]
    fn cholesky_round_trip() {
        let a = spd();
        let l = cholesky(&a).unwrap();
        let b = [1.0, -2.0, 0.5];
        let x = cholesky_solve(&l, &b);
        let ax = a.mul_vec(&x);
        for (u, v) in ax.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Matrix::from_rows(2, 2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(cholesky(&a).is_err());
    }

    #[test]
    fn eigen_reconstructs() {
        let a = spd();
        let (vals, v) = symmetric_eigen(&a).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| v[(i, k)] * vals[k] * v[(j, k)]).sum();
                assert!((r - a[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pinv_on_singular_system() {
        // rank one: [1 1; 1 1]; min-norm solution of x+y = 2 is (1, 1)
        let a = Matrix::from_rows(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let (x, rank) = psd_pinv_solve(&a, &[2.0, 2.0], 1e-12).unwrap();
        assert_eq!(rank, 1);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_matches_eigen() {
        let a = spd();
        let (vals, _) = symmetric_eigen(&a).unwrap();
        let rho = power_iteration(&a, 1.0, 1e-14, 10_000).unwrap();
        assert!((rho - vals[2]).abs() < 1e-9);
    }
}
