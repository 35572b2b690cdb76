//! Loewner (positive semidefinite) order between self-adjoint operators on a
//! weighted inner-product space, and its reversal under inversion.

use nalgebra::DMatrix;

use crate::error::{ChainError, Result};
use crate::spectral::weighted_eigen;

/// `<f, A f>_w = sum_x w(x) f(x) (A f)(x)`.
pub fn quadratic_form(a: &DMatrix<f64>, f: &[f64], weights: &[f64]) -> Result<f64> {
    let n = a.nrows();
    if f.len() != n || weights.len() != n || a.ncols() != n {
        return Err(ChainError::DimensionMismatch {
            expected: n,
            found: f.len(),
        });
    }
    Ok((0..n)
        .map(|x| {
            let af: f64 = (0..n).map(|y| a[(x, y)] * f[y]).sum();
            weights[x] * f[x] * af
        })
        .sum())
}

/// Smallest eigenvalue of a weighted self-adjoint operator.
pub fn min_eigenvalue(a: &DMatrix<f64>, weights: &[f64], tol: f64) -> Result<f64> {
    let eig = weighted_eigen(a, weights, tol)?;
    Ok(*eig.eigenvalues.last().unwrap_or(&0.0))
}

fn self_adjoint_tol(a: &DMatrix<f64>, tol: f64) -> f64 {
    tol * (1.0 + a.amax())
}

/// `A^{-1} = sum_i lambda_i^{-1} v_i v_i^T W` for strictly positive `A`.
fn positive_inverse(a: &DMatrix<f64>, weights: &[f64], tol: f64) -> Result<DMatrix<f64>> {
    let eig = weighted_eigen(a, weights, self_adjoint_tol(a, tol))?;
    let min = *eig.eigenvalues.last().unwrap();
    if !(min > tol) {
        return Err(ChainError::NotStrictlyPositive { min_eigenvalue: min });
    }
    let n = a.nrows();
    let mut inv = DMatrix::zeros(n, n);
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        for x in 0..n {
            for y in 0..n {
                inv[(x, y)] += v[x] * v[y] * weights[y] / lambda;
            }
        }
    }
    Ok(inv)
}

fn is_psd(a: &DMatrix<f64>, weights: &[f64], tol: f64) -> Result<bool> {
    let eig = weighted_eigen(a, weights, f64::INFINITY)?;
    let scale = 1.0 + eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    Ok(*eig.eigenvalues.last().unwrap() >= -tol * scale)
}

/// For strictly positive self-adjoint `J` and `K`, returns
/// `(K - J is PSD, J^{-1} - K^{-1} is PSD)`. The two always agree.
pub fn psd_order_inverse_flip(
    j: &DMatrix<f64>,
    k: &DMatrix<f64>,
    weights: &[f64],
    tol: f64,
) -> Result<(bool, bool)> {
    if j.shape() != k.shape() {
        return Err(ChainError::DimensionMismatch {
            expected: j.nrows(),
            found: k.nrows(),
        });
    }
    if let Some(i) = weights.iter().position(|w| !(*w > 0.0)) {
        return Err(ChainError::NonPositiveWeight {
            index: i,
            value: weights[i],
        });
    }
    let j_inv = positive_inverse(j, weights, tol)?;
    let k_inv = positive_inverse(k, weights, tol)?;
    Ok((
        is_psd(&(k - j), weights, tol)?,
        is_psd(&(j_inv - k_inv), weights, tol)?,
    ))
}
