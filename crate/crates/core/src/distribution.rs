//! Target distributions and functions of state, with the pi-weighted inner
//! product `<f, g> = sum_x f(x) g(x) pi(x)` that all spectral statements use.

use crate::error::{ChainError, Result};

/// Absolute normalization tolerance per state.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A strictly positive probability vector over states `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetDistribution {
    probs: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl TargetDistribution {
    /// Accepts an already-normalized probability vector.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_weights(&probs)?;
        let n = probs.len();
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL * n as f64 {
            return Err(ChainError::NotNormalized { sum });
        }
        Ok(Self {
            probs,
            labels: None,
        })
    }

    /// Normalizes positive weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        check_weights(weights)?;
        let total: f64 = weights.iter().sum();
        Ok(Self {
            probs: weights.iter().map(|w| w / total).collect(),
            labels: None,
        })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_weights(&vec![1.0; n])
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.probs.len() {
            return Err(ChainError::DimensionMismatch {
                expected: self.probs.len(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn max(&self) -> f64 {
        self.probs.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.probs.iter().copied().fold(f64::MAX, f64::min)
    }

    /// `pi(f) = <f, 1>`.
    pub fn mean(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.probs).map(|(v, p)| v * p).sum()
    }

    /// Unchecked inner product on raw slices of length `n`.
    pub(crate) fn dot(&self, f: &[f64], g: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        debug_assert_eq!(g.len(), self.len());
        f.iter()
            .zip(g)
            .zip(&self.probs)
            .map(|((a, b), p)| a * b * p)
            .sum()
    }

    pub(crate) fn check_len(&self, found: usize) -> Result<()> {
        if found != self.len() {
            return Err(ChainError::DimensionMismatch {
                expected: self.len(),
                found,
            });
        }
        Ok(())
    }

    pub(crate) fn same_as(&self, other: &TargetDistribution, tol: f64) -> bool {
        self.len() == other.len()
            && self
                .probs
                .iter()
                .zip(&other.probs)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.len() < 2 {
        return Err(ChainError::TooFewStates(weights.len()));
    }
    for (index, &value) in weights.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(ChainError::NonPositiveWeight { index, value });
        }
    }
    Ok(())
}

/// A real function on the state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    values: Vec<f64>,
    mean_removed: bool,
}

impl Functional {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            mean_removed: false,
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::new(vec![c; n])
    }

    pub fn indicator(n: usize, state: usize) -> Self {
        let mut values = vec![0.0; n];
        values[state] = 1.0;
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_mean_removed(&self) -> bool {
        self.mean_removed
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            mean_removed: self.mean_removed,
        }
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self::new(self.values.iter().map(|v| v + c).collect())
    }
}

impl From<Vec<f64>> for Functional {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values)
    }
}

pub fn weighted_inner(f: &Functional, g: &Functional, pi: &TargetDistribution) -> Result<f64> {
    pi.check_len(f.len())?;
    pi.check_len(g.len())?;
    Ok(pi.dot(&f.values, &g.values))
}

/// `f - pi(f) 1`. Idempotent.
pub fn project_zero_mean(f: &Functional, pi: &TargetDistribution) -> Result<Functional> {
    pi.check_len(f.len())?;
    Ok(Functional {
        values: center(&f.values, pi),
        mean_removed: true,
    })
}

pub(crate) fn center(f: &[f64], pi: &TargetDistribution) -> Vec<f64> {
    let m = pi.mean(f);
    f.iter().map(|v| v - m).collect()
}
