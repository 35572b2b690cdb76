//! Trace-based facts: the minimal trace any pi-stationary chain can have,
//! certificates of non-domination for chains attaining it, and the strict
//! trace decrease that any genuine improvement must show.

use crate::distribution::TargetDistribution;
use crate::error::{ChainError, Result};
use crate::matrix::{default_structure_tol, validate_structure, TransitionMatrix};
use crate::spectral::SpectralDecomposition;

/// `max(0, (2 pi_max - 1) / pi_max)`, the least trace of any chain with
/// stationary distribution `pi`.
pub fn trace_lower_bound(pi: &TargetDistribution) -> f64 {
    let m = pi.max();
    ((2.0 * m - 1.0) / m).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceCertificate {
    pub trace: f64,
    pub lower_bound: f64,
    pub pi_max: f64,
    /// The trace attains the lower bound within tolerance.
    pub minimal: bool,
    /// Minimal, reversible and irreducible: no other reversible chain can
    /// efficiency-dominate this one.
    pub non_dominated: bool,
}

pub fn trace_certificate(
    p: &TransitionMatrix,
    pi: &TargetDistribution,
    tol: f64,
) -> Result<TraceCertificate> {
    let structure = validate_structure(p, pi, default_structure_tol(p.n()))?;
    if !structure.stationary_ok {
        let (violation, state) = p.max_stationarity_violation(pi)?;
        return Err(ChainError::NotStationary { state, violation });
    }
    let trace = p.trace();
    let lower_bound = trace_lower_bound(pi);
    let minimal = (trace - lower_bound).abs() <= tol;
    Ok(TraceCertificate {
        trace,
        lower_bound,
        pi_max: pi.max(),
        minimal,
        non_dominated: minimal && structure.reversible && structure.irreducible,
    })
}

fn check_reversible_irreducible(
    p: &TransitionMatrix,
    q: &TransitionMatrix,
    pi: &TargetDistribution,
) -> Result<()> {
    if p.n() != q.n() {
        return Err(ChainError::DimensionMismatch {
            expected: p.n(),
            found: q.n(),
        });
    }
    let tol = default_structure_tol(p.n());
    p.ensure_reversible(pi, tol)?;
    q.ensure_reversible(pi, tol)?;
    if !(p.is_irreducible() && q.is_irreducible()) {
        return Err(ChainError::NotIrreducible);
    }
    Ok(())
}

/// `trace(P) < trace(Q)`; necessary for `P != Q` to dominate `Q`.
pub fn strict_trace_check(
    p: &TransitionMatrix,
    q: &TransitionMatrix,
    pi: &TargetDistribution,
) -> Result<bool> {
    check_reversible_irreducible(p, q, pi)?;
    Ok(p.trace() < q.trace())
}

/// Same sorted spectrum within `tol` but different matrices: then neither
/// chain dominates the other.
pub fn identical_spectrum_incomparable(
    sp: &SpectralDecomposition,
    sq: &SpectralDecomposition,
    p: &TransitionMatrix,
    q: &TransitionMatrix,
    tol: f64,
) -> Result<bool> {
    check_reversible_irreducible(p, q, sp.pi())?;
    if sp.n() != sq.n() || sp.n() != p.n() {
        return Err(ChainError::DimensionMismatch {
            expected: p.n(),
            found: sq.n(),
        });
    }
    let same_spectrum = sp
        .eigenvalues()
        .iter()
        .zip(sq.eigenvalues())
        .all(|(a, b)| (a - b).abs() <= tol);
    Ok(same_spectrum && p.max_abs_diff(q) > tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pi_135() -> TargetDistribution {
        TargetDistribution::from_weights(&[1.0, 1.0, 3.0]).unwrap()
    }

    #[test]
    fn bound_values() {
        assert_abs_diff_eq!(trace_lower_bound(&pi_135()), 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(trace_lower_bound(&TargetDistribution::uniform(4).unwrap()), 0.0);
        let half = TargetDistribution::from_weights(&[1.0, 1.0]).unwrap();
        assert_eq!(trace_lower_bound(&half), 0.0);
    }

    #[test]
    fn zero_diagonal_chain_is_minimal_when_bound_is_zero() {
        let pi = TargetDistribution::uniform(2).unwrap();
        let flip = TransitionMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let cert = trace_certificate(&flip, &pi, 1e-12).unwrap();
        assert_eq!(cert.trace, 0.0);
        assert!(cert.minimal && cert.non_dominated);
    }

    #[test]
    fn non_stationary_pi_is_rejected() {
        let pi = TargetDistribution::from_weights(&[1.0, 3.0]).unwrap();
        let flip = TransitionMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            trace_certificate(&flip, &pi, 1e-12),
            Err(ChainError::NotStationary { .. })
        ));
    }

    #[test]
    fn strict_trace_needs_reversible_pair() {
        let pi = pi_135();
        let p1 = TransitionMatrix::from_rows(&[
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        ])
        .unwrap();
        assert!(!strict_trace_check(&p1, &p1, &pi).unwrap());
        let uniform = TargetDistribution::uniform(3).unwrap();
        assert!(matches!(
            strict_trace_check(&p1, &p1, &uniform),
            Err(ChainError::NotReversible { .. })
        ));
    }
}
