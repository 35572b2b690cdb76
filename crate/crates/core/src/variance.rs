//! Asymptotic variance `v(f, P) = lim N Var((1/N) sum f(X_i))` by three
//! independent routes:
//!
//! * spectral: `sum_{i>=2} a_i^2 (1 + lambda_i) / (1 - lambda_i)`, valid for
//!   periodic chains too (a `lambda = -1` term contributes zero);
//! * resolvent: `<f, f> + 2 <f, P (I - P)^{-1} f>` on mean-zero `f`, from one
//!   dense solve against the deflated operator `I - P + Pi`;
//! * autocovariance: `gamma_0 + 2 sum_k gamma_k`, truncated where the
//!   geometric tail bound falls below the requested tolerance. Aperiodic only.

use nalgebra::{DMatrix, DVector};

use crate::distribution::{center, Functional, TargetDistribution};
use crate::error::{ChainError, Result};
use crate::matrix::{default_structure_tol, iid_operator, TransitionMatrix};
use crate::spectral::SpectralDecomposition;

/// Non-trivial eigenvalues this close to -1 make the chain periodic for the
/// purposes of the autocovariance route.
const PERIODIC_TOL: f64 = 1e-10;

/// Upper limit on the number of autocovariance terms summed.
pub const MAX_AUTOCOV_TERMS: u64 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    Spectral,
    Resolvent,
    Autocov,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Spectral => "spectral",
            Route::Resolvent => "resolvent",
            Route::Autocov => "autocov",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceResult {
    pub value: f64,
    pub route: Route,
    /// Spectral route only: `a_i^2 (1 + lambda_i) / (1 - lambda_i)` for `i = 2..n`.
    pub terms: Option<Vec<f64>>,
}

pub fn asym_var_spectral(spec: &SpectralDecomposition, f: &Functional) -> Result<VarianceResult> {
    spec.ensure_irreducible()?;
    let f0 = center(f.values(), spec.pi());
    let a = spec.coefficients(&f0)?;
    let terms: Vec<f64> = spec.eigenvalues()[1..]
        .iter()
        .zip(&a[1..])
        .map(|(&lambda, &ai)| {
            if lambda <= -1.0 {
                0.0
            } else {
                ai * ai * (1.0 + lambda) / (1.0 - lambda)
            }
        })
        .collect();
    Ok(VarianceResult {
        value: terms.iter().sum(),
        route: Route::Spectral,
        terms: Some(terms),
    })
}

/// `(I - P + Pi)^{-1}`. Agrees with `(I - P)^{-1}` on mean-zero functions and
/// fixes constants.
fn deflated_inverse(p: &TransitionMatrix, pi: &TargetDistribution) -> Result<DMatrix<f64>> {
    let n = p.n();
    let a = DMatrix::<f64>::identity(n, n) - p.entries() + iid_operator(pi).entries();
    a.lu().try_inverse().ok_or(ChainError::SingularSystem)
}

fn check_resolvent_inputs(p: &TransitionMatrix, pi: &TargetDistribution) -> Result<()> {
    pi.check_len(p.n())?;
    p.ensure_reversible(pi, default_structure_tol(p.n()))?;
    p.ensure_irreducible()
}

pub fn asym_var_resolvent(
    p: &TransitionMatrix,
    pi: &TargetDistribution,
    f: &Functional,
) -> Result<VarianceResult> {
    check_resolvent_inputs(p, pi)?;
    pi.check_len(f.len())?;
    let n = p.n();
    let f0 = center(f.values(), pi);
    let a = DMatrix::<f64>::identity(n, n) - p.entries() + iid_operator(pi).entries();
    let x = a
        .lu()
        .solve(&DVector::from_column_slice(&f0))
        .ok_or(ChainError::SingularSystem)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ChainError::SingularSystem);
    }
    // <f0, (I + P)(I - P)^{-1} f0> = 2 <f0, x> - <f0, f0>
    let value = 2.0 * pi.dot(&f0, x.as_slice()) - pi.dot(&f0, &f0);
    Ok(VarianceResult {
        value: value.max(0.0),
        route: Route::Resolvent,
        terms: None,
    })
}

/// The operator `P (I - P)^{-1}` on mean-zero functions, extended by zero on
/// constants. Self-adjoint in the pi inner product.
pub fn resolvent_form(p: &TransitionMatrix, pi: &TargetDistribution) -> Result<DMatrix<f64>> {
    check_resolvent_inputs(p, pi)?;
    let n = p.n();
    let x = deflated_inverse(p, pi)?;
    let projector = DMatrix::<f64>::identity(n, n) - iid_operator(pi).entries();
    Ok(p.entries() * x * projector)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutocovSequence {
    /// `gamma_0 ..= gamma_K`.
    pub gammas: Vec<f64>,
    pub truncation_k: usize,
    /// Bound on `sum_{k > K} |gamma_k|`; infinite when the chain is periodic
    /// or reducible.
    pub tail_bound: f64,
}

/// `gamma_k = <f0, P^k f0> = sum_{i>=2} a_i^2 lambda_i^k` for `k = 0..=k_max`.
pub fn autocovariances(
    spec: &SpectralDecomposition,
    f: &Functional,
    k_max: usize,
) -> Result<AutocovSequence> {
    let f0 = center(f.values(), spec.pi());
    let a = spec.coefficients(&f0)?;
    let lambdas = &spec.eigenvalues()[1..];
    let weights: Vec<f64> = a[1..].iter().map(|x| x * x).collect();
    let mut powers = vec![1.0; lambdas.len()];
    let mut gammas = Vec::with_capacity(k_max + 1);
    for _ in 0..=k_max {
        gammas.push(weights.iter().zip(&powers).map(|(w, p)| w * p).sum());
        for (p, l) in powers.iter_mut().zip(lambdas) {
            *p *= l;
        }
    }
    let radius = spec.nontrivial_radius();
    let tail_bound = if radius < 1.0 {
        gammas[0] * radius.powi(k_max as i32 + 1) / (1.0 - radius)
    } else {
        f64::INFINITY
    };
    Ok(AutocovSequence {
        gammas,
        truncation_k: k_max,
        tail_bound,
    })
}

/// Smallest `K` with `2 gamma_0 radius^{K+1} / (1 - radius) <= tail_tol`.
fn truncation_for(gamma0: f64, radius: f64, tail_tol: f64) -> u64 {
    if gamma0 <= 0.0 || radius <= 0.0 {
        return 0;
    }
    let bound_at = |k: f64| 2.0 * gamma0 * radius.powf(k + 1.0) / (1.0 - radius);
    if bound_at(0.0) <= tail_tol {
        return 0;
    }
    let estimate = ((tail_tol * (1.0 - radius) / (2.0 * gamma0)).ln() / radius.ln() - 1.0).ceil();
    let mut k = estimate.max(0.0);
    while bound_at(k) > tail_tol {
        k += 1.0;
    }
    k as u64
}

pub fn asym_var_autocov(
    spec: &SpectralDecomposition,
    f: &Functional,
    tail_tol: f64,
) -> Result<VarianceResult> {
    spec.ensure_irreducible()?;
    let radius = spec.nontrivial_radius();
    if radius >= 1.0 - PERIODIC_TOL {
        return Err(ChainError::PeriodicChain { lambda: radius });
    }
    if !(tail_tol > 0.0) {
        return Err(ChainError::InvalidArgument(format!(
            "tail tolerance must be positive, got {tail_tol}"
        )));
    }
    let f0 = center(f.values(), spec.pi());
    let a = spec.coefficients(&f0)?;
    let gamma0: f64 = a[1..].iter().map(|x| x * x).sum();
    let k = truncation_for(gamma0, radius, tail_tol);
    if k > MAX_AUTOCOV_TERMS {
        return Err(ChainError::TruncationLimit {
            needed: k,
            limit: MAX_AUTOCOV_TERMS,
        });
    }
    // Sum each eigen-direction's series separately to keep cancellation local.
    let mut tail_sum = 0.0;
    for (&lambda, &ai) in spec.eigenvalues()[1..].iter().zip(&a[1..]) {
        let w = ai * ai;
        if w == 0.0 {
            continue;
        }
        let mut power = 1.0;
        let mut s = 0.0;
        for _ in 0..k {
            power *= lambda;
            s += power;
        }
        tail_sum += w * s;
    }
    Ok(VarianceResult {
        value: (gamma0 + 2.0 * tail_sum).max(0.0),
        route: Route::Autocov,
        terms: None,
    })
}
