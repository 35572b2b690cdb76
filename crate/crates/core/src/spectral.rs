//! Spectral decomposition of operators that are self-adjoint in a weighted
//! inner product.
//!
//! An operator `A` is self-adjoint for `<f, g> = sum_x f(x) g(x) w(x)` exactly
//! when `W A` is symmetric (`W = diag(w)`). Such operators are diagonalized by
//! symmetrizing, `S = W^{1/2} A W^{-1/2}`, running a symmetric eigensolver on
//! `S`, and mapping the orthonormal eigenvectors `u` back as `v = W^{-1/2} u`.
//! The resulting `v` are orthonormal in the weighted inner product and
//! `A = sum_i lambda_i v_i v_i^T W`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::distribution::TargetDistribution;
use crate::error::{ChainError, Result};
use crate::matrix::{default_structure_tol, TransitionMatrix};

/// Eigenvalues within this distance of 1 are treated as one eigenspace when
/// the constant eigenvector is rotated to the front.
const UNIT_CLUSTER_TOL: f64 = 1e-11;

/// Eigenvalues (descending) and weighted-orthonormal eigenvectors (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

/// `W^{1/2} A W^{-1/2}`, symmetrized; errors if `W A` is not symmetric within `tol`.
pub fn symmetrize(a: &DMatrix<f64>, weights: &[f64], tol: f64) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(ChainError::NotSquare {
            rows: n,
            cols: a.ncols(),
        });
    }
    if weights.len() != n {
        return Err(ChainError::DimensionMismatch {
            expected: n,
            found: weights.len(),
        });
    }
    let mut worst = (0.0, 0, 0);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (weights[i] * a[(i, j)] - weights[j] * a[(j, i)]).abs();
            if v > worst.0 {
                worst = (v, i, j);
            }
        }
    }
    if worst.0 > tol {
        return Err(ChainError::NotSelfAdjoint {
            row: worst.1,
            col: worst.2,
            violation: worst.0,
        });
    }
    let root: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let s = DMatrix::from_fn(n, n, |i, j| root[i] * a[(i, j)] / root[j]);
    Ok((&s + s.transpose()) * 0.5)
}

/// Full weighted eigendecomposition of a self-adjoint operator.
pub fn weighted_eigen(a: &DMatrix<f64>, weights: &[f64], tol: f64) -> Result<WeightedEigen> {
    let s = symmetrize(a, weights, tol)?;
    let (values, u) = sorted_symmetric_eigen(s);
    Ok(WeightedEigen {
        eigenvalues: values,
        eigenvectors: unweight(&u, weights),
    })
}

/// Eigendecomposition of a self-adjoint operator restricted to the functions
/// with zero weighted mean. The operator must map constants to zero or to
/// constants; only its action on the complement is reported (`n - 1` values).
pub fn weighted_eigen_mean_zero(
    a: &DMatrix<f64>,
    weights: &[f64],
    tol: f64,
) -> Result<WeightedEigen> {
    let s = symmetrize(a, weights, tol)?;
    let basis = mean_zero_basis(weights);
    let compressed = basis.transpose() * &s * &basis;
    let compressed = (&compressed + compressed.transpose()) * 0.5;
    let (values, y) = sorted_symmetric_eigen(compressed);
    let u = &basis * y;
    Ok(WeightedEigen {
        eigenvalues: values,
        eigenvectors: unweight(&u, weights),
    })
}

/// Orthonormal (Euclidean) basis of the complement of `sqrt(w)`, as columns
/// of a Householder reflector.
fn mean_zero_basis(weights: &[f64]) -> DMatrix<f64> {
    let n = weights.len();
    let norm = weights.iter().sum::<f64>().sqrt();
    let u = DVector::from_iterator(n, weights.iter().map(|w| w.sqrt() / norm));
    let mut h = u.clone();
    h[0] += if u[0] >= 0.0 { 1.0 } else { -1.0 };
    let hh = h.dot(&h);
    let reflector = DMatrix::<f64>::identity(n, n) - (&h * h.transpose()) * (2.0 / hh);
    reflector.columns(1, n - 1).into_owned()
}

fn sorted_symmetric_eigen(s: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = s.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

fn unweight(u: &DMatrix<f64>, weights: &[f64]) -> DMatrix<f64> {
    let mut v = u.clone();
    for (i, w) in weights.iter().enumerate() {
        let r = w.sqrt();
        v.row_mut(i).iter_mut().for_each(|x| *x /= r);
    }
    for mut col in v.column_iter_mut() {
        normalize_sign(col.as_mut_slice());
    }
    v
}

/// Makes the first non-negligible coordinate positive.
fn normalize_sign(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * scale) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Spectral decomposition of a reversible transition matrix.
///
/// Eigenvalues are sorted `1 = lambda_1 >= lambda_2 >= ... >= lambda_n`, the
/// eigenvectors are pi-orthonormal and `v_1` is the constant function `1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    pi: TargetDistribution,
    irreducible: bool,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvectors as columns.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i).iter().copied().collect()
    }

    pub fn pi(&self) -> &TargetDistribution {
        &self.pi
    }

    /// Whether the source chain was irreducible (from its transition graph).
    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    pub fn lambda2(&self) -> f64 {
        self.eigenvalues[1]
    }

    pub fn lambda_min(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// `max_{i >= 2} |lambda_i|`.
    pub fn nontrivial_radius(&self) -> f64 {
        self.eigenvalues[1..]
            .iter()
            .fold(0.0f64, |m, l| m.max(l.abs()))
    }

    /// Coefficients `a_i = <f, v_i>_pi`.
    pub fn coefficients(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.pi.check_len(f.len())?;
        Ok((0..self.n())
            .map(|i| {
                let col = self.eigenvectors.column(i);
                self.pi.dot(f, col.as_slice())
            })
            .collect())
    }

    /// `sum_i h(lambda_i) v_i v_i^T D`.
    pub fn apply_function(&self, h: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.n();
        let p = self.pi.probs();
        let mut out = DMatrix::zeros(n, n);
        for (i, &lambda) in self.eigenvalues.iter().enumerate() {
            let c = h(lambda);
            if c == 0.0 {
                continue;
            }
            let v = self.eigenvectors.column(i);
            for x in 0..n {
                for y in 0..n {
                    out[(x, y)] += c * v[x] * v[y] * p[y];
                }
            }
        }
        out
    }

    /// `sum_i lambda_i v_i v_i^T D`, which reproduces the source matrix.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.apply_function(|l| l)
    }

    pub(crate) fn ensure_irreducible(&self) -> Result<()> {
        if self.irreducible {
            Ok(())
        } else {
            Err(ChainError::NotIrreducible)
        }
    }
}

pub fn spectral_decompose(
    p: &TransitionMatrix,
    pi: &TargetDistribution,
) -> Result<SpectralDecomposition> {
    spectral_decompose_with_tol(p, pi, default_structure_tol(p.n()))
}

/// As [`spectral_decompose`] with an explicit detailed-balance tolerance.
pub fn spectral_decompose_with_tol(
    p: &TransitionMatrix,
    pi: &TargetDistribution,
    tol: f64,
) -> Result<SpectralDecomposition> {
    pi.check_len(p.n())?;
    p.ensure_reversible(pi, tol)?;
    let weights = pi.probs();
    let s = symmetrize(p.entries(), weights, f64::INFINITY)?;
    let (mut values, mut u) = sorted_symmetric_eigen(s);
    for v in values.iter_mut() {
        *v = v.clamp(-1.0, 1.0);
    }
    rotate_unit_eigenspace(&values, &mut u, weights);
    Ok(SpectralDecomposition {
        eigenvalues: values,
        eigenvectors: unweight(&u, weights),
        pi: pi.clone(),
        irreducible: p.is_irreducible(),
    })
}

/// Replaces the basis of the eigenvalue-1 eigenspace (columns at the front)
/// by one whose first vector is `sqrt(pi)`, i.e. `v_1 = 1` after unweighting.
fn rotate_unit_eigenspace(values: &[f64], u: &mut DMatrix<f64>, weights: &[f64]) {
    let n = values.len();
    let m = values
        .iter()
        .take_while(|&&l| l >= 1.0 - UNIT_CLUSTER_TOL)
        .count()
        .max(1);
    let root = DVector::from_iterator(n, weights.iter().map(|w| w.sqrt()));
    let mut basis: Vec<DVector<f64>> = vec![root];
    let mut candidates: Vec<DVector<f64>> = (0..m).map(|k| u.column(k).into_owned()).collect();
    while basis.len() < m {
        let residuals: Vec<DVector<f64>> = candidates
            .iter()
            .map(|c| {
                let mut r = c.clone();
                for b in &basis {
                    r -= b * b.dot(&r);
                }
                r
            })
            .collect();
        let (best, _) = residuals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        let r = residuals[best].clone();
        let norm = r.norm();
        basis.push(r / norm);
        candidates.remove(best);
    }
    for (k, b) in basis.into_iter().enumerate() {
        u.set_column(k, &b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::iid_operator;
    use approx::assert_abs_diff_eq;

    fn six_p(e: f64) -> TransitionMatrix {
        TransitionMatrix::from_rows(&[
            vec![0.5, 0.5, 0.0],
            vec![0.5, 0.5 - e, e],
            vec![0.0, e, 1.0 - e],
        ])
        .unwrap()
    }

    fn check_invariants(p: &TransitionMatrix, pi: &TargetDistribution) {
        let spec = spectral_decompose(p, pi).unwrap();
        let n = p.n();
        let gram = spec.eigenvectors().transpose()
            * DMatrix::from_diagonal(&DVector::from_column_slice(pi.probs()))
            * spec.eigenvectors();
        assert!((gram - DMatrix::<f64>::identity(n, n)).amax() < 1e-10);
        assert!((spec.reconstruct() - p.entries()).amax() < 1e-10);
        assert!((spec.eigenvalues()[0] - 1.0).abs() < 1e-12);
        for x in spec.eigenvector(0) {
            assert_abs_diff_eq!(x, 1.0, epsilon = 1e-10);
        }
        assert!(spec.eigenvalues().iter().all(|l| (-1.0..=1.0).contains(l)));
        assert!(spec.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn counterexample_chain_spectrum() {
        let pi = TargetDistribution::uniform(3).unwrap();
        let spec = spectral_decompose(&six_p(0.05), &pi).unwrap();
        let expected = [1.0, 0.9270, -0.0270];
        for (l, e) in spec.eigenvalues().iter().zip(expected) {
            assert!((l - e).abs() < 5e-5, "{l} vs {e}");
        }
        check_invariants(&six_p(0.05), &pi);
    }

    #[test]
    fn iid_spectrum_is_one_then_zeros() {
        let pi = TargetDistribution::from_weights(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let spec = spectral_decompose(&iid_operator(&pi), &pi).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues()[0], 1.0, epsilon = 1e-12);
        for l in &spec.eigenvalues()[1..] {
            assert_abs_diff_eq!(*l, 0.0, epsilon = 1e-12);
        }
        check_invariants(&iid_operator(&pi), &pi);
    }

    #[test]
    fn reducible_identity_still_has_constant_first_vector() {
        let pi = TargetDistribution::from_weights(&[1.0, 2.0, 3.0]).unwrap();
        let id = TransitionMatrix::identity(3).unwrap();
        check_invariants(&id, &pi);
        assert!(!spectral_decompose(&id, &pi).unwrap().is_irreducible());
    }

    #[test]
    fn flip_chain_has_minus_one() {
        let pi = TargetDistribution::uniform(2).unwrap();
        let p = TransitionMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let spec = spectral_decompose(&p, &pi).unwrap();
        assert_abs_diff_eq!(spec.lambda_min(), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(spec.nontrivial_radius(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_non_reversible() {
        let p = TransitionMatrix::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        let pi = TargetDistribution::uniform(3).unwrap();
        assert!(matches!(
            spectral_decompose(&p, &pi),
            Err(ChainError::NotReversible { .. })
        ));
    }

    #[test]
    fn decomposition_is_deterministic() {
        let pi = TargetDistribution::uniform(3).unwrap();
        let a = spectral_decompose(&six_p(0.05), &pi).unwrap();
        let b = spectral_decompose(&six_p(0.05), &pi).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mean_zero_restriction_drops_constant_direction() {
        let pi = TargetDistribution::uniform(3).unwrap();
        let p = six_p(0.05);
        let full = weighted_eigen(p.entries(), pi.probs(), 1e-12).unwrap();
        let restricted = weighted_eigen_mean_zero(p.entries(), pi.probs(), 1e-12).unwrap();
        assert_eq!(restricted.eigenvalues.len(), 2);
        assert_abs_diff_eq!(restricted.eigenvalues[0], full.eigenvalues[1], epsilon = 1e-12);
        assert_abs_diff_eq!(restricted.eigenvalues[1], full.eigenvalues[2], epsilon = 1e-12);
        for k in 0..2 {
            let v: Vec<f64> = restricted.eigenvectors.column(k).iter().copied().collect();
            assert!(pi.mean(&v).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetrize_rejects_non_self_adjoint() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            symmetrize(&a, &[0.5, 0.5], 1e-12),
            Err(ChainError::NotSelfAdjoint { .. })
        ));
    }
}
