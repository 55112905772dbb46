//! Dense eigensolves and least squares, backed by `faer`.

use std::sync::Once;

use faer::{Mat, Par, Side};
use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

type C64 = Complex64;

/// Results must not depend on the thread count, so faer runs sequentially.
fn sequential() {
    static INIT: Once = Once::new();
    INIT.call_once(|| faer::set_global_parallelism(Par::Seq));
}

fn linalg_error(what: &str, err: impl std::fmt::Debug) -> Error {
    Error::Linalg(format!("{what}: {err:?}"))
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a real
/// symmetric matrix. Only the lower triangle is read.
pub fn symmetric_eigen(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    sequential();
    let n = a.nrows();
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[[i, j]]);
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(|e| linalg_error("symmetric eigensolve", e))?;
    let (u, s) = (evd.U(), evd.S());
    let values = Array1::from_shape_fn(n, |k| s[k]);
    let vectors = Array2::from_shape_fn((n, n), |(i, k)| u[(i, k)]);
    Ok((values, vectors))
}

/// Hermitian counterpart of [`symmetric_eigen`].
pub fn hermitian_eigen(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    sequential();
    let n = a.nrows();
    let m = Mat::<C64>::from_fn(n, n, |i, j| a[[i, j]]);
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(|e| linalg_error("hermitian eigensolve", e))?;
    let (u, s) = (evd.U(), evd.S());
    let values = Array1::from_shape_fn(n, |k| s[k].re);
    let vectors = Array2::from_shape_fn((n, n), |(i, k)| u[(i, k)]);
    Ok((values, vectors))
}

pub fn hermitian_eigenvalues(a: &Array2<C64>) -> Result<Vec<f64>> {
    sequential();
    let n = a.nrows();
    let m = Mat::<C64>::from_fn(n, n, |i, j| a[[i, j]]);
    let mut values: Vec<f64> = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| linalg_error("hermitian eigenvalues", e))?
        .into_iter()
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Minimum-norm least-squares solution of `A x ≈ b` by SVD.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub solution: Vec<f64>,
    /// `σ_max / σ_min` of `A`; infinite when rank deficient.
    pub condition: f64,
    /// Diagonal of `(AᵀA)⁻¹`, for standard errors.
    pub inverse_gram_diagonal: Vec<f64>,
}

pub fn least_squares(a: &Array2<f64>, b: &[f64]) -> Result<LeastSquares> {
    sequential();
    let (rows, cols) = a.dim();
    if rows != b.len() {
        return Err(Error::DimensionMismatch { expected: rows, found: b.len() });
    }
    if rows < cols || cols == 0 {
        return Err(Error::BadData(format!("least squares needs rows ≥ columns ≥ 1, got {rows}×{cols}")));
    }
    let m = Mat::<f64>::from_fn(rows, cols, |i, j| a[[i, j]]);
    let svd = m.thin_svd().map_err(|e| linalg_error("singular value decomposition", e))?;
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let sigma: Vec<f64> = (0..cols).map(|k| s[k]).collect();
    let largest = sigma.iter().cloned().fold(0.0, f64::max);
    let smallest = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smallest > 0.0 { largest / smallest } else { f64::INFINITY };
    let cutoff = largest * f64::EPSILON * rows.max(cols) as f64;

    let mut solution = vec![0.0; cols];
    let mut inverse_gram_diagonal = vec![0.0; cols];
    for k in 0..cols {
        if sigma[k] <= cutoff {
            continue;
        }
        let ub: f64 = (0..rows).map(|i| u[(i, k)] * b[i]).sum();
        for j in 0..cols {
            solution[j] += v[(j, k)] * ub / sigma[k];
            inverse_gram_diagonal[j] += (v[(j, k)] / sigma[k]).powi(2);
        }
    }
    Ok(LeastSquares { solution, condition, inverse_gram_diagonal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hermitian_pairs_satisfy_the_eigen_equation() {
        // Large enough to exercise blocked reductions.
        let n = 300;
        let a = Array2::from_shape_fn((n, n), |(i, j)| {
            let re = (((i * 7 + j * 7 + i * j) % 11) as f64).sin();
            let im = if i < j { 0.3 } else if i > j { -0.3 } else { 0.0 };
            C64::new(re, im)
        });
        let (e, v) = hermitian_eigen(&a).unwrap();
        assert!(e.windows(2).into_iter().all(|w| w[0] <= w[1]));
        for k in [0, 1, n / 2, n - 1] {
            let col = v.column(k);
            let r = a.dot(&col) - col.mapv(|x| x * e[k]);
            assert!(r.iter().map(|z| z.norm()).sum::<f64>() < 1e-9);
        }
        let values = hermitian_eigenvalues(&a).unwrap();
        assert_abs_diff_eq!(values[0], e[0], epsilon = 1e-10);
    }

    #[test]
    fn symmetric_two_by_two() {
        let a = ndarray::array![[2.0, 1.0], [1.0, 2.0]];
        let (e, v) = symmetric_eigen(&a).unwrap();
        assert_abs_diff_eq!(e[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[1], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v[[0, 0]].abs(), 0.5f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn least_squares_line() {
        let a = ndarray::array![[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]];
        let r = least_squares(&a, &[1.0, 3.0, 5.0]).unwrap();
        assert_abs_diff_eq!(r.solution[0], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r.solution[1], 2.0, epsilon = 1e-13);
        // (AᵀA)⁻¹ = [[5, -3], [-3, 3]] / 6
        assert_abs_diff_eq!(r.inverse_gram_diagonal[0], 5.0 / 6.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r.inverse_gram_diagonal[1], 0.5, epsilon = 1e-13);
    }

    #[test]
    fn rank_deficient_has_infinite_condition() {
        let a = ndarray::array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        let r = least_squares(&a, &[1.0, 2.0, 3.0]).unwrap();
        assert!(r.condition > 1e15);
    }
}
