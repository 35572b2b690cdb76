//! Orderings between reversible chains sharing a target distribution.
//!
//! `P` efficiency-dominates `Q` when `v(f, P) <= v(f, Q)` for every `f`. For
//! reversible irreducible chains this is equivalent to the operator `Q - P`
//! having no negative eigenvalue on mean-zero functions, which is what
//! [`efficiency_dominates`] decides. The remaining checks here are the
//! cheaper sufficient or necessary conditions that surround it.

use nalgebra::DMatrix;

use crate::distribution::{center, Functional, TargetDistribution};
use crate::error::{ChainError, Result};
use crate::matrix::{default_structure_tol, TransitionMatrix};
use crate::spectral::{weighted_eigen_mean_zero, SpectralDecomposition, WeightedEigen};
use crate::variance::resolvent_form;
use crate::witness::{find_witness, Witness};

pub const DEFAULT_WITNESS_BUDGET: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    FirstDominates,
    SecondDominates,
    Equal,
    Incomparable,
    /// Some gap eigenvalue sits inside the tolerance band but above the
    /// numerical noise floor, so its sign cannot be trusted.
    Indeterminate,
}

impl Relation {
    pub fn name(self) -> &'static str {
        match self {
            Relation::FirstDominates => "first_dominates",
            Relation::SecondDominates => "second_dominates",
            Relation::Equal => "equal",
            Relation::Incomparable => "incomparable",
            Relation::Indeterminate => "indeterminate",
        }
    }

    /// First argument weakly dominates the second.
    pub fn first_weakly_dominates(self) -> bool {
        matches!(self, Relation::FirstDominates | Relation::Equal)
    }

    pub fn swapped(self) -> Relation {
        match self {
            Relation::FirstDominates => Relation::SecondDominates,
            Relation::SecondDominates => Relation::FirstDominates,
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceVerdict {
    pub relation: Relation,
    /// Eigenvalues of `Q - P` as a pi-self-adjoint operator, descending.
    pub gap_eigenvalues: Vec<f64>,
    /// A function with `v(f, Q) < v(f, P)`, when one was found.
    pub witness: Option<Witness>,
    pub tolerance_used: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceOptions {
    /// Band around zero for gap eigenvalues; `None` uses [`default_gap_tol`].
    pub tol: Option<f64>,
    pub witness_budget: usize,
    pub seed: u64,
}

impl Default for DominanceOptions {
    fn default() -> Self {
        Self {
            tol: None,
            witness_budget: DEFAULT_WITNESS_BUDGET,
            seed: 0,
        }
    }
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `1e-9 (1 + max |gap eigenvalue|)`.
pub fn default_gap_tol(gap: &[f64]) -> f64 {
    1e-9 * (1.0 + max_abs(gap))
}

/// Size of eigenvalue errors attributable to floating point alone.
pub fn noise_floor(n: usize, gap: &[f64]) -> f64 {
    16.0 * n as f64 * f64::EPSILON * (1.0 + max_abs(gap))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Holds,
    Ambiguous,
    Fails,
}

fn side(excess: f64, tol: f64, noise: f64) -> Side {
    if excess <= noise {
        Side::Holds
    } else if excess <= tol {
        Side::Ambiguous
    } else {
        Side::Fails
    }
}

/// Classifies the mean-zero spectrum of `Q - P` (or any difference operator
/// with the same sign convention) into a relation between `P` and `Q`.
pub fn classify(values: &[f64], tol: f64, noise: f64) -> Relation {
    let noise = noise.min(tol);
    let lo = values.iter().copied().fold(0.0f64, f64::min);
    let hi = values.iter().copied().fold(0.0f64, f64::max);
    match (side(-lo, tol, noise), side(hi, tol, noise)) {
        (Side::Holds, Side::Holds) => Relation::Equal,
        (Side::Holds, _) => Relation::FirstDominates,
        (_, Side::Holds) => Relation::SecondDominates,
        (Side::Fails, Side::Fails) => Relation::Incomparable,
        _ => Relation::Indeterminate,
    }
}

fn check_pair(p: &TransitionMatrix, q: &TransitionMatrix, pi: &TargetDistribution) -> Result<()> {
    if p.n() != q.n() {
        return Err(ChainError::DimensionMismatch {
            expected: p.n(),
            found: q.n(),
        });
    }
    pi.check_len(p.n())?;
    let tol = default_structure_tol(p.n());
    p.ensure_reversible(pi, tol)?;
    q.ensure_reversible(pi, tol)
}

fn check_irreducible(p: &TransitionMatrix, q: &TransitionMatrix) -> Result<()> {
    if p.is_irreducible() && q.is_irreducible() {
        Ok(())
    } else {
        Err(ChainError::NotIrreducible)
    }
}

/// Eigen-decomposition of `Q - P` restricted to mean-zero functions.
pub fn gap_decomposition(
    p: &TransitionMatrix,
    q: &TransitionMatrix,
    pi: &TargetDistribution,
) -> Result<WeightedEigen> {
    check_pair(p, q, pi)?;
    let diff = q.entries() - p.entries();
    weighted_eigen_mean_zero(&diff, pi.probs(), f64::INFINITY)
}

fn with_constant_zero(mut values: Vec<f64>) -> Vec<f64> {
    // (Q - P) 1 = 0, so the full spectrum is the mean-zero one plus an exact 0.
    values.push(0.0);
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Eigenvalues of `Q - P` as a pi-self-adjoint operator, descending.
pub fn gap_spectrum(
    p: &TransitionMatrix,
    q: &TransitionMatrix,
    pi: &TargetDistribution,
) -> Result<Vec<f64>> {
    Ok(with_constant_zero(gap_decomposition(p, q, pi)?.eigenvalues))
}

/// Decides efficiency dominance between `P` (first) and `Q` (second).
pub fn efficiency_dominates(
    p: &TransitionMatrix,
    q: &TransitionMatrix,
    pi: &TargetDistribution,
    opts: &DominanceOptions,
) -> Result<DominanceVerdict> {
    check_pair(p, q, pi)?;
    check_irreducible(p, q)?;
    let gap = gap_decomposition(p, q, pi)?.eigenvalues;
    let tol = opts.tol.unwrap_or_else(|| default_gap_tol(&gap));
    let mut relation = classify(&gap, tol, noise_floor(p.n(), &gap));
    if relation == Relation::Equal && p.max_abs_diff(q) > tol {
        relation = Relation::Indeterminate;
    }
    let witness = if gap.iter().any(|&g| g < -tol) {
        find_witness(p, q, pi, opts.witness_budget, opts.seed, tol)?
    } else {
        None
    };
    Ok(DominanceVerdict {
        relation,
        gap_eigenvalues: with_constant_zero(gap),
        witness,
        tolerance_used: tol,
    })
}

/// `P(x, y) >= Q(x, y) - tol` for every `x != y`.
pub fn peskun_dominates(p: &TransitionMatrix, q: &TransitionMatrix, tol: f64) -> Result<bool> {
    if p.n() != q.n() {
        return Err(ChainError::DimensionMismatch {
            expected: p.n(),
            found: q.n(),
        });
    }
    let n = p.n();
    Ok((0..n).all(|x| (0..n).all(|y| x == y || p.get(x, y) >= q.get(x, y) - tol)))
}

fn check_spectra(sp: &SpectralDecomposition, sq: &SpectralDecomposition) -> Result<()> {
    if sp.n() != sq.n() {
        return Err(ChainError::DimensionMismatch {
            expected: sp.n(),
            found: sq.n(),
        });
    }
    if !sp.pi().same_as(sq.pi(), default_structure_tol(sp.n())) {
        return Err(ChainError::InvalidArgument(
            "spectra were computed against different target distributions".into(),
        ));
    }
    Ok(())
}

/// Positional comparison of sorted spectra: `lambda_i <= beta_i + tol` for all `i`.
pub fn eigen_dominates(
    sp: &SpectralDecomposition,
    sq: &SpectralDecomposition,
    tol: f64,
) -> Result<bool> {
    check_spectra(sp, sq)?;
    Ok(sp
        .eigenvalues()
        .iter()
        .zip(sq.eigenvalues())
        .all(|(l, b)| *l <= b + tol))
}

/// Single-function evidence: `<f0, (Q - P) f0> >= -tol`.
pub fn covariance_order_holds(
    p: &TransitionMatrix,
    q: &TransitionMatrix,
    pi: &TargetDistribution,
    f: &Functional,
    tol: f64,
) -> Result<bool> {
    check_pair(p, q, pi)?;
    pi.check_len(f.len())?;
    let f0 = center(f.values(), pi);
    let qf = q.apply(&f0);
    let pf = p.apply(&f0);
    let diff: Vec<f64> = qf.iter().zip(&pf).map(|(a, b)| a - b).collect();
    Ok(pi.dot(&f0, &diff) >= -tol)
}

/// `lambda_2(P) <= beta_n(Q) + tol`, sufficient for `P` to dominate `Q`.
pub fn spectral_interval_dominates(
    sp: &SpectralDecomposition,
    sq: &SpectralDecomposition,
    tol: f64,
) -> Result<bool> {
    check_spectra(sp, sq)?;
    sp.ensure_irreducible()?;
    sq.ensure_irreducible()?;
    Ok(sp.lambda2() <= sq.lambda_min() + tol)
}

/// All non-trivial eigenvalues `<= tol` and at least one `< -tol`.
pub fn is_antithetic(spec: &SpectralDecomposition, tol: f64) -> Result<bool> {
    spec.ensure_irreducible()?;
    Ok(spec.lambda2() <= tol && spec.lambda_min() < -tol)
}

/// Mean-zero spectrum of `Q (I - Q)^{-1} - P (I - P)^{-1}`, descending.
/// Non-negative exactly when `P` dominates `Q`; computed from linear solves,
/// independently of [`gap_spectrum`].
pub fn resolvent_gap_spectrum(
    p: &TransitionMatrix,
    q: &TransitionMatrix,
    pi: &TargetDistribution,
) -> Result<Vec<f64>> {
    check_pair(p, q, pi)?;
    check_irreducible(p, q)?;
    let diff = resolvent_form(q, pi)? - resolvent_form(p, pi)?;
    Ok(weighted_eigen_mean_zero(&diff, pi.probs(), f64::INFINITY)?.eigenvalues)
}

/// Smallest real part among the (possibly complex) eigenvalues of a square
/// matrix. Used to check that differences `Q - P` of Peskun-ordered chains
/// have a non-negative spectrum.
pub fn min_real_eigenvalue(z: &DMatrix<f64>) -> Result<f64> {
    if !z.is_square() {
        return Err(ChainError::NotSquare {
            rows: z.nrows(),
            cols: z.ncols(),
        });
    }
    Ok(z.complex_eigenvalues()
        .iter()
        .map(|c| c.re)
        .fold(f64::INFINITY, f64::min))
}
