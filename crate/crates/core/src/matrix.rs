//! Row-stochastic transition matrices and their structural checks.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::distribution::{TargetDistribution, NORMALIZATION_TOL};
use crate::error::{ChainError, Result};

/// Default absolute tolerance (per state) for detailed balance and row sums.
pub fn default_structure_tol(n: usize) -> f64 {
    NORMALIZATION_TOL * n as f64
}

/// A validated row-stochastic matrix. Graph properties (irreducibility and
/// the period of state 0) are computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    entries: DMatrix<f64>,
    irreducible: bool,
    period: usize,
}

impl TransitionMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(ChainError::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(ChainError::TooFewStates(0));
        }
        let tol = default_structure_tol(rows);
        for i in 0..rows {
            let mut sum = 0.0;
            for j in 0..cols {
                let value = entries[(i, j)];
                if !(value >= 0.0) || !value.is_finite() {
                    return Err(ChainError::BadEntry {
                        row: i,
                        col: j,
                        value,
                    });
                }
                sum += value;
            }
            if (sum - 1.0).abs() > tol {
                return Err(ChainError::RowSum { row: i, sum });
            }
        }
        let (irreducible, period) = graph_structure(&entries);
        Ok(Self {
            entries,
            irreducible,
            period,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(ChainError::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| self.entries.row(i).iter().copied().collect())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// Every state reaches every other along positive entries.
    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    /// Period of state 0 within its communicating class (1 = aperiodic).
    pub fn period(&self) -> usize {
        self.period
    }

    /// `(Pf)(x) = sum_y P(x,y) f(y)`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let v = &self.entries * DVector::from_column_slice(f);
        v.iter().copied().collect()
    }

    /// Largest `|pi(x)P(x,y) - pi(y)P(y,x)|` and where it occurs.
    pub fn max_balance_violation(&self, pi: &TargetDistribution) -> Result<(f64, usize, usize)> {
        pi.check_len(self.n())?;
        let p = pi.probs();
        let mut worst = (0.0, 0, 0);
        for i in 0..self.n() {
            for j in (i + 1)..self.n() {
                let v = (p[i] * self.entries[(i, j)] - p[j] * self.entries[(j, i)]).abs();
                if v > worst.0 {
                    worst = (v, i, j);
                }
            }
        }
        Ok(worst)
    }

    /// Largest `|sum_x pi(x)P(x,y) - pi(y)|` and the state `y`.
    pub fn max_stationarity_violation(&self, pi: &TargetDistribution) -> Result<(f64, usize)> {
        pi.check_len(self.n())?;
        let p = pi.probs();
        let mut worst = (0.0, 0);
        for y in 0..self.n() {
            let flow: f64 = (0..self.n()).map(|x| p[x] * self.entries[(x, y)]).sum();
            let v = (flow - p[y]).abs();
            if v > worst.0 {
                worst = (v, y);
            }
        }
        Ok(worst)
    }

    /// Errors with [`ChainError::NotReversible`] unless detailed balance holds within `tol`.
    pub fn ensure_reversible(&self, pi: &TargetDistribution, tol: f64) -> Result<()> {
        let (violation, row, col) = self.max_balance_violation(pi)?;
        if violation > tol {
            return Err(ChainError::NotReversible {
                row,
                col,
                violation,
            });
        }
        Ok(())
    }

    pub(crate) fn ensure_irreducible(&self) -> Result<()> {
        if self.irreducible {
            Ok(())
        } else {
            Err(ChainError::NotIrreducible)
        }
    }

    pub fn max_abs_diff(&self, other: &TransitionMatrix) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Structural facts about a chain relative to a target distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub reversible: bool,
    pub max_balance_violation: f64,
    pub irreducible: bool,
    pub period: usize,
    pub stationary_ok: bool,
    pub max_stationarity_violation: f64,
}

pub fn validate_structure(
    p: &TransitionMatrix,
    pi: &TargetDistribution,
    tol: f64,
) -> Result<StructureReport> {
    let (balance, _, _) = p.max_balance_violation(pi)?;
    let (stationarity, _) = p.max_stationarity_violation(pi)?;
    let n = p.n() as f64;
    // Each column flow error is a sum of n balance errors plus row-sum slack.
    let stationary_tol = tol * (n + 1.0) + default_structure_tol(p.n());
    Ok(StructureReport {
        reversible: balance <= tol,
        max_balance_violation: balance,
        irreducible: p.is_irreducible(),
        period: p.period(),
        stationary_ok: stationarity <= stationary_tol,
        max_stationarity_violation: stationarity,
    })
}

/// The i.i.d. sampler `Pi(x, y) = pi(y)`.
pub fn iid_operator(pi: &TargetDistribution) -> TransitionMatrix {
    let n = pi.len();
    let p = pi.probs();
    TransitionMatrix::new(DMatrix::from_fn(n, n, |_, j| p[j]))
        .expect("rows of a normalized distribution are stochastic")
}

/// Solves `pi P = pi`, `sum pi = 1` for an irreducible chain.
pub fn stationary_distribution(p: &TransitionMatrix) -> Result<TargetDistribution> {
    p.ensure_irreducible()?;
    let n = p.n();
    if n < 2 {
        return Err(ChainError::TooFewStates(n));
    }
    // (P^T - I) pi = 0 with the last equation replaced by normalization.
    let mut a = p.entries().transpose() - DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let sol = a.lu().solve(&b).ok_or(ChainError::SingularSystem)?;
    let probs: Vec<f64> = sol.iter().map(|v| v.max(f64::MIN_POSITIVE)).collect();
    let total: f64 = probs.iter().sum();
    let pi = TargetDistribution::new(probs.into_iter().map(|v| v / total).collect())?;
    let (violation, state) = p.max_stationarity_violation(&pi)?;
    if violation > 1e-10 {
        return Err(ChainError::NotStationary { state, violation });
    }
    Ok(pi)
}

fn graph_structure(entries: &DMatrix<f64>) -> (bool, usize) {
    let n = entries.nrows();
    let forward = bfs_levels(n, |u, v| entries[(u, v)] > 0.0);
    let backward = bfs_levels(n, |u, v| entries[(v, u)] > 0.0);
    let irreducible = forward.iter().all(Option::is_some) && backward.iter().all(Option::is_some);

    // gcd of level(u) + 1 - level(v) over edges inside the class of state 0
    // equals the gcd of cycle lengths through state 0.
    let mut g = 0usize;
    for u in 0..n {
        let (Some(lu), Some(_)) = (forward[u], backward[u]) else {
            continue;
        };
        for v in 0..n {
            if entries[(u, v)] <= 0.0 {
                continue;
            }
            let (Some(lv), Some(_)) = (forward[v], backward[v]) else {
                continue;
            };
            let d = (lu as i64 + 1 - lv as i64).unsigned_abs() as usize;
            g = gcd(g, d);
        }
    }
    // A class with no cycle through state 0 is reported as aperiodic.
    (irreducible, g.max(1))
}

fn bfs_levels(n: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<Option<usize>> {
    let mut level = vec![None; n];
    level[0] = Some(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        let lu = level[u].unwrap();
        for v in 0..n {
            if level[v].is_none() && edge(u, v) {
                level[v] = Some(lu + 1);
                queue.push_back(v);
            }
        }
    }
    level
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
