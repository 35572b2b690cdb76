//! Random constructors for test suites and exploratory searches.
//!
//! Every generator takes an explicit RNG so callers control reproducibility.
//! The returned chains are validated `TransitionMatrix` values.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::distribution::{center, TargetDistribution};
use crate::error::{ChainError, Result};
use crate::matrix::TransitionMatrix;

fn need_states(n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(ChainError::TooFewStates(n))
    } else {
        Ok(())
    }
}

/// Distribution with weights drawn uniformly from `[0.2, 1.2)`.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<TargetDistribution> {
    need_states(n, 1)?;
    let weights: Vec<f64> = (0..n).map(|_| 0.2 + rng.random::<f64>()).collect();
    TargetDistribution::from_weights(&weights)
}

/// Builds `P(x, y) = F(x, y) / pi(x)` off the diagonal from a symmetric flow
/// `F`, scaled so the busiest row moves with probability `move_prob`.
fn from_flow(flow: &DMatrix<f64>, pi: &TargetDistribution, move_prob: f64) -> Result<TransitionMatrix> {
    let n = pi.len();
    let probs = pi.probs();
    let busiest = (0..n)
        .map(|x| (0..n).filter(|&y| y != x).map(|y| flow[(x, y)]).sum::<f64>() / probs[x])
        .fold(0.0f64, f64::max);
    let scale = if busiest > 0.0 { move_prob / busiest } else { 0.0 };
    let mut p = DMatrix::zeros(n, n);
    for x in 0..n {
        let mut off = 0.0;
        for y in 0..n {
            if y != x {
                p[(x, y)] = scale * flow[(x, y)] / probs[x];
                off += p[(x, y)];
            }
        }
        p[(x, x)] = (1.0 - off).max(0.0);
    }
    TransitionMatrix::new(p)
}

/// Random reversible, irreducible and aperiodic chain for `pi`.
///
/// A random path through all states guarantees irreducibility; other edges
/// are present with probability 0.6. Every diagonal entry is at least 0.02.
pub fn random_reversible<R: Rng + ?Sized>(pi: &TargetDistribution, rng: &mut R) -> Result<TransitionMatrix> {
    let n = pi.len();
    if n == 1 {
        return TransitionMatrix::identity(1);
    }
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut flow = DMatrix::zeros(n, n);
    for w in order.windows(2) {
        let v = 0.1 + rng.random::<f64>();
        flow[(w[0], w[1])] = v;
        flow[(w[1], w[0])] = v;
    }
    for x in 0..n {
        for y in (x + 1)..n {
            if flow[(x, y)] == 0.0 && rng.random::<f64>() < 0.6 {
                let v = rng.random::<f64>();
                flow[(x, y)] = v;
                flow[(y, x)] = v;
            }
        }
    }
    from_flow(&flow, pi, rng.random_range(0.5..0.98))
}

/// Random reversible chain of period 2 together with its stationary law.
///
/// States split into two non-empty halves and all moves cross between them.
pub fn random_bipartite<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(TargetDistribution, TransitionMatrix)> {
    need_states(n, 2)?;
    let left = rng.random_range(1..n);
    let mut flow = DMatrix::zeros(n, n);
    for x in 0..left {
        for y in left..n {
            let v = 0.1 + rng.random::<f64>();
            flow[(x, y)] = v;
            flow[(y, x)] = v;
        }
    }
    let mass: Vec<f64> = (0..n).map(|x| flow.row(x).sum()).collect();
    let pi = TargetDistribution::from_weights(&mass)?;
    let p = DMatrix::from_fn(n, n, |x, y| flow[(x, y)] / mass[x]);
    Ok((pi, TransitionMatrix::new(p)?))
}

/// Lowers every off-diagonal move of `p` by a symmetric factor in `[0.1, 1)`
/// and puts the removed mass on the diagonal. `p` Peskun-dominates the result,
/// which stays reversible and keeps the same support.
pub fn peskun_degrade<R: Rng + ?Sized>(
    p: &TransitionMatrix,
    pi: &TargetDistribution,
    rng: &mut R,
) -> Result<TransitionMatrix> {
    pi.check_len(p.n())?;
    let n = p.n();
    let mut q = p.entries().clone();
    for x in 0..n {
        for y in (x + 1)..n {
            let s = rng.random_range(0.1..1.0);
            q[(x, y)] *= s;
            q[(y, x)] *= s;
        }
    }
    for x in 0..n {
        let off: f64 = (0..n).filter(|&y| y != x).map(|y| q[(x, y)]).sum();
        q[(x, x)] = (1.0 - off).max(0.0);
    }
    TransitionMatrix::new(q)
}

/// Random pi-orthonormal basis of the mean-zero functions, as columns.
fn random_mean_zero_basis<R: Rng + ?Sized>(pi: &TargetDistribution, rng: &mut R) -> DMatrix<f64> {
    let n = pi.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    while basis.len() < n - 1 {
        let raw: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let mut v = center(&raw, pi);
        for b in &basis {
            let c = pi.dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let norm = pi.dot(&v, &v).sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    DMatrix::from_fn(n, n - 1, |i, j| basis[j][i])
}

/// Reversible chain `Pi + sum_i mu_i v_i v_i^T D` with every non-trivial
/// eigenvalue `mu_i` strictly negative, so the chain is antithetic.
/// Eigenvalues are shrunk towards zero until all entries are non-negative.
pub fn antithetic_chain<R: Rng + ?Sized>(pi: &TargetDistribution, rng: &mut R) -> Result<TransitionMatrix> {
    let n = pi.len();
    need_states(n, 2)?;
    let basis = random_mean_zero_basis(pi, rng);
    let shape: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.1..1.0)).collect();
    let probs = pi.probs();
    let mut s = 1.0;
    loop {
        let p = DMatrix::from_fn(n, n, |x, y| {
            let mut corr = 1.0;
            for (i, u) in shape.iter().enumerate() {
                corr -= s * u * basis[(x, i)] * basis[(y, i)];
            }
            probs[y] * corr
        });
        if p.iter().all(|&v| v >= 0.0) {
            let mut p = p;
            for x in 0..n {
                let off: f64 = (0..n).filter(|&y| y != x).map(|y| p[(x, y)]).sum();
                p[(x, x)] = 1.0 - off;
            }
            return TransitionMatrix::new(p);
        }
        s *= 0.5;
    }
}

/// `P1 P2` for two random reversible chains: pi-stationary, generally not reversible.
pub fn random_stationary<R: Rng + ?Sized>(pi: &TargetDistribution, rng: &mut R) -> Result<TransitionMatrix> {
    let a = random_reversible(pi, rng)?;
    let b = random_reversible(pi, rng)?;
    let mut prod = a.entries() * b.entries();
    for mut row in prod.row_iter_mut() {
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= sum);
    }
    TransitionMatrix::new(prod)
}

/// Reversible chain whose trace equals `max(0, (2 pi_max - 1) / pi_max)`.
///
/// When `pi_max >= 1/2` every other state moves to the heaviest state, which
/// spreads its outgoing mass in proportion to `pi`. Otherwise a zero-diagonal
/// symmetric flow with margins `pi` is found by symmetric matrix scaling.
pub fn trace_minimal_chain(pi: &TargetDistribution) -> Result<TransitionMatrix> {
    let n = pi.len();
    need_states(n, 2)?;
    let probs = pi.probs();
    let (heavy, &pm) = probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let mut p = DMatrix::zeros(n, n);
    if pm >= 0.5 {
        for x in 0..n {
            if x != heavy {
                p[(x, heavy)] = 1.0;
                p[(heavy, x)] = probs[x] / pm;
            }
        }
        p[(heavy, heavy)] = ((2.0 * pm - 1.0) / pm).max(0.0);
        let off: f64 = (0..n).filter(|&y| y != heavy).map(|y| p[(heavy, y)]).sum();
        p[(heavy, heavy)] = (1.0 - off).max(0.0);
        return TransitionMatrix::new(p);
    }
    // Symmetric scaling: find d with d_x sum_{y != x} d_y = pi_x.
    let mut d: Vec<f64> = probs.iter().map(|v| v.sqrt()).collect();
    for _ in 0..100_000 {
        let total: f64 = d.iter().sum();
        let mut worst = 0.0f64;
        let next: Vec<f64> = (0..n)
            .map(|x| {
                let margin = d[x] * (total - d[x]);
                worst = worst.max((margin - probs[x]).abs());
                (d[x] * probs[x] / (total - d[x])).sqrt()
            })
            .collect();
        d = next;
        if worst < 1e-15 {
            break;
        }
    }
    for x in 0..n {
        for y in 0..n {
            if x != y {
                p[(x, y)] = d[x] * d[y] / probs[x];
            }
        }
        let sum: f64 = p.row(x).sum();
        p.row_mut(x).iter_mut().for_each(|v| *v /= sum);
    }
    TransitionMatrix::new(p)
}

/// Random matrix with non-negative diagonal, non-positive off-diagonal
/// entries and zero row sums; about a third of the off-diagonal entries are 0.
pub fn random_row_sum_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    need_states(n, 1)?;
    let mut z = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            if x != y && rng.random::<f64>() < 0.67 {
                z[(x, y)] = -rng.random::<f64>();
            }
        }
        let off: f64 = (0..n).filter(|&y| y != x).map(|y| z[(x, y)]).sum();
        z[(x, x)] = -off;
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::validate_structure;
    use crate::spectral::spectral_decompose;
    use crate::trace::trace_lower_bound;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reversible_generator_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..12 {
            let pi = random_distribution(n, &mut rng).unwrap();
            let p = random_reversible(&pi, &mut rng).unwrap();
            let s = validate_structure(&p, &pi, 1e-12 * n as f64).unwrap();
            assert!(s.reversible && s.irreducible && s.stationary_ok);
            assert_eq!(s.period, 1);
        }
    }

    #[test]
    fn bipartite_has_period_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 2..9 {
            let (pi, p) = random_bipartite(n, &mut rng).unwrap();
            let s = validate_structure(&p, &pi, 1e-12 * n as f64).unwrap();
            assert!(s.reversible && s.irreducible);
            assert_eq!(s.period, 2);
        }
    }

    #[test]
    fn antithetic_spectrum_is_non_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..8 {
            let pi = random_distribution(n, &mut rng).unwrap();
            let p = antithetic_chain(&pi, &mut rng).unwrap();
            let spec = spectral_decompose(&p, &pi).unwrap();
            assert!(spec.lambda2() < 0.0);
        }
    }

    #[test]
    fn trace_minimal_chains_attain_the_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..8 {
            let pi = random_distribution(n, &mut rng).unwrap();
            let p = trace_minimal_chain(&pi).unwrap();
            p.ensure_reversible(&pi, 1e-12 * n as f64).unwrap();
            assert!((p.trace() - trace_lower_bound(&pi)).abs() < 1e-12);
        }
        let heavy = TargetDistribution::from_weights(&[1.0, 1.0, 3.0]).unwrap();
        let p = trace_minimal_chain(&heavy).unwrap();
        assert!((p.get(2, 2) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn row_sum_matrices_have_zero_row_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = random_row_sum_matrix(6, &mut rng).unwrap();
        for row in z.row_iter() {
            assert!(row.sum().abs() < 1e-14);
        }
    }
}
