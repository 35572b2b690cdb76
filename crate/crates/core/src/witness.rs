//! Numerical search for a function that shows `P` does not dominate `Q`.
//!
//! No closed-form witness is known. The search tries the eigenvectors of the
//! negative mean-zero gap eigenvalues of `Q - P` first (most negative first),
//! then random perturbations of them whose scale halves after each failure.
//! Every returned witness has been checked with the spectral variance formula.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::distribution::{center, Functional, TargetDistribution};
use crate::dominance::gap_decomposition;
use crate::error::{ChainError, Result};
use crate::matrix::TransitionMatrix;
use crate::spectral::{spectral_decompose, SpectralDecomposition};
use crate::variance::asym_var_spectral;

/// Relative margin a witness must clear: `v(f,P) - v(f,Q) > margin (1 + v(f,P))`.
const STRICT_MARGIN: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub f: Functional,
    /// `v(f, P)` for the first chain.
    pub var_first: f64,
    /// `v(f, Q)` for the second chain; strictly smaller than `var_first`.
    pub var_second: f64,
}

struct Checker {
    sp: SpectralDecomposition,
    sq: SpectralDecomposition,
}

impl Checker {
    fn check(&self, f: Vec<f64>) -> Result<Option<Witness>> {
        let f = Functional::new(f);
        let var_first = asym_var_spectral(&self.sp, &f)?.value;
        let var_second = asym_var_spectral(&self.sq, &f)?.value;
        if var_first - var_second > STRICT_MARGIN * (1.0 + var_first) {
            Ok(Some(Witness {
                f,
                var_first,
                var_second,
            }))
        } else {
            Ok(None)
        }
    }
}

pub fn find_witness(
    p: &TransitionMatrix,
    q: &TransitionMatrix,
    pi: &TargetDistribution,
    budget: usize,
    seed: u64,
    tol: f64,
) -> Result<Option<Witness>> {
    let gap = gap_decomposition(p, q, pi)?;
    let negative: Vec<usize> = (0..gap.eigenvalues.len())
        .rev()
        .filter(|&k| gap.eigenvalues[k] < -tol)
        .collect();
    if negative.is_empty() {
        return Err(ChainError::NoNegativeEigenvalue { tol });
    }
    let checker = Checker {
        sp: spectral_decompose(p, pi)?,
        sq: spectral_decompose(q, pi)?,
    };
    let bases: Vec<Vec<f64>> = negative
        .iter()
        .map(|&k| gap.eigenvectors.column(k).iter().copied().collect())
        .collect();
    for z in &bases {
        if let Some(w) = checker.check(z.clone())? {
            return Ok(Some(w));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.n();
    let mut scale = 1.0;
    let mut base = 0;
    for _ in 0..budget {
        let noise: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let noise = center(&noise, pi);
        let norm = pi.dot(&noise, &noise).sqrt();
        if norm == 0.0 {
            continue;
        }
        let candidate: Vec<f64> = bases[base]
            .iter()
            .zip(&noise)
            .map(|(z, e)| z + scale * e / norm)
            .collect();
        if let Some(w) = checker.check(candidate)? {
            return Ok(Some(w));
        }
        scale *= 0.5;
        if scale < 1e-6 {
            scale = 1.0;
            base = (base + 1) % bases.len();
        }
    }
    Ok(None)
}
