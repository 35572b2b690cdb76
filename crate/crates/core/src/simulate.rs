//! Chain simulation and a replication-based Monte Carlo estimate of the
//! asymptotic variance, used as a statistical cross-check of the exact routes.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64`. Replication `r` of a run
//! seeded with `seed` uses the stream `seed ^ r`, so results do not depend on
//! how replications are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distribution::{Functional, TargetDistribution};
use crate::error::{ChainError, Result};
use crate::matrix::TransitionMatrix;

pub const MIN_MC_STEPS: usize = 10_000;
pub const MIN_MC_REPS: usize = 8;

#[derive(Debug, Clone, Copy)]
pub enum Start<'a> {
    State(usize),
    /// Exact draw from the given distribution.
    Draw(&'a TargetDistribution),
}

/// Inverse-CDF sampler over the rows of a transition matrix.
#[derive(Debug, Clone)]
pub struct RowSampler {
    cumulative: Vec<Vec<f64>>,
    last_positive: Vec<usize>,
}

impl RowSampler {
    pub fn new(p: &TransitionMatrix) -> Self {
        let rows = p.rows();
        Self {
            cumulative: rows.iter().map(|r| cumulative(r)).collect(),
            last_positive: rows.iter().map(|r| last_positive(r)).collect(),
        }
    }

    pub fn step<R: Rng + ?Sized>(&self, state: usize, rng: &mut R) -> usize {
        pick(
            &self.cumulative[state],
            self.last_positive[state],
            rng.random::<f64>(),
        )
    }
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect()
}

fn last_positive(weights: &[f64]) -> usize {
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn pick(cum: &[f64], fallback: usize, u: f64) -> usize {
    cum.iter().position(|&c| c > u).unwrap_or(fallback)
}

fn draw_start<R: Rng + ?Sized>(start: Start<'_>, n: usize, rng: &mut R) -> Result<usize> {
    match start {
        Start::State(s) if s < n => Ok(s),
        Start::State(state) => Err(ChainError::BadStartState { state, n }),
        Start::Draw(pi) => {
            pi.check_len(n)?;
            let cum = cumulative(pi.probs());
            Ok(pick(&cum, n - 1, rng.random::<f64>()))
        }
    }
}

/// Trajectory `X_1, ..., X_steps` with `X_1` the start state.
pub fn simulate(
    p: &TransitionMatrix,
    start: Start<'_>,
    steps: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if steps == 0 {
        return Err(ChainError::InvalidArgument("steps must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = RowSampler::new(p);
    let mut state = draw_start(start, p.n(), &mut rng)?;
    let mut path = Vec::with_capacity(steps);
    path.push(state);
    for _ in 1..steps {
        state = sampler.step(state, &mut rng);
        path.push(state);
    }
    Ok(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    /// Grand mean of the replication path averages.
    pub mean_estimate: f64,
    pub asym_var_estimate: f64,
    /// Standard error of `asym_var_estimate` from the spread across replications.
    pub std_error: f64,
    pub steps: usize,
    pub replications: usize,
    pub seed: u64,
}

/// Monte Carlo estimate of `v(f, P)`.
///
/// Each replication starts from an exact draw from `pi`, discards the first
/// 10% of `steps` as burn-in, and contributes `N (mean_r - pi(f))^2` where `N`
/// is the number of retained steps. The estimate is the average of these
/// contributions and the standard error is their sample standard deviation
/// over `sqrt(reps)`. The standard error is zero when every replication
/// returns exactly the same path average.
pub fn mc_asym_var(
    p: &TransitionMatrix,
    pi: &TargetDistribution,
    f: &Functional,
    steps: usize,
    reps: usize,
    seed: u64,
) -> Result<McEstimate> {
    pi.check_len(p.n())?;
    pi.check_len(f.len())?;
    p.ensure_irreducible()?;
    if steps < MIN_MC_STEPS {
        return Err(ChainError::InvalidArgument(format!(
            "steps must be at least {MIN_MC_STEPS}, got {steps}"
        )));
    }
    if reps < MIN_MC_REPS {
        return Err(ChainError::InvalidArgument(format!(
            "replications must be at least {MIN_MC_REPS}, got {reps}"
        )));
    }
    let sampler = RowSampler::new(p);
    let burn_in = steps / 10;
    let kept = steps - burn_in;
    let values = f.values();

    let means: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ r as u64);
            let mut state = draw_start(Start::Draw(pi), p.n(), &mut rng)
                .expect("dimensions checked above");
            let mut total = 0.0;
            for t in 0..steps {
                if t > 0 {
                    state = sampler.step(state, &mut rng);
                }
                if t >= burn_in {
                    total += values[state];
                }
            }
            total / kept as f64
        })
        .collect();

    let target_mean = pi.mean(values);
    let contributions: Vec<f64> = means
        .iter()
        .map(|m| kept as f64 * (m - target_mean).powi(2))
        .collect();
    let r = reps as f64;
    let estimate = contributions.iter().sum::<f64>() / r;
    let spread = contributions
        .iter()
        .map(|c| (c - estimate).powi(2))
        .sum::<f64>()
        / (r - 1.0);
    Ok(McEstimate {
        mean_estimate: means.iter().sum::<f64>() / r,
        asym_var_estimate: estimate,
        std_error: (spread / r).sqrt(),
        steps,
        replications: reps,
        seed,
    })
}
