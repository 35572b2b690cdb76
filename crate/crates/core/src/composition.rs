//! Composite samplers: convex mixtures of kernels and random-scan Gibbs
//! samplers on product spaces, plus the check that improving components
//! improves the whole sampler.
//!
//! Component and block indices are 0-based. Flat states follow the
//! lexicographic order of their coordinate tuples, last coordinate fastest.

use nalgebra::DMatrix;

use crate::distribution::{TargetDistribution, NORMALIZATION_TOL};
use crate::dominance::{
    default_gap_tol, efficiency_dominates, DominanceOptions, DominanceVerdict, Relation,
};
use crate::error::{ChainError, Result};
use crate::matrix::{default_structure_tol, TransitionMatrix};
use crate::spectral::weighted_eigen;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSpec {
    sizes: Vec<usize>,
}

impl ProductSpec {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(ChainError::InvalidArgument(format!(
                "component sizes must be non-empty and positive, got {sizes:?}"
            )));
        }
        Ok(Self { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of components.
    pub fn components(&self) -> usize {
        self.sizes.len()
    }

    /// Number of flat states.
    pub fn n(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn to_flat(&self, tuple: &[usize]) -> Result<usize> {
        if tuple.len() != self.sizes.len() {
            return Err(ChainError::DimensionMismatch {
                expected: self.sizes.len(),
                found: tuple.len(),
            });
        }
        let mut flat = 0;
        for (k, (&x, &size)) in tuple.iter().zip(&self.sizes).enumerate() {
            if x >= size {
                return Err(ChainError::InvalidArgument(format!(
                    "coordinate {k} is {x}, outside 0..{size}"
                )));
            }
            flat = flat * size + x;
        }
        Ok(flat)
    }

    pub fn to_tuple(&self, flat: usize) -> Result<Vec<usize>> {
        if flat >= self.n() {
            return Err(ChainError::BadStartState {
                state: flat,
                n: self.n(),
            });
        }
        let mut rest = flat;
        let mut tuple = vec![0; self.sizes.len()];
        for k in (0..self.sizes.len()).rev() {
            tuple[k] = rest % self.sizes[k];
            rest /= self.sizes[k];
        }
        Ok(tuple)
    }
}

/// One diagonal block of a component kernel: the states sharing all
/// coordinates except `k`, the kernel acting on them, and `pi` conditioned
/// on the block.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsBlock {
    pub states: Vec<usize>,
    pub kernel: DMatrix<f64>,
    pub conditional: Vec<f64>,
}

/// A kernel that only changes coordinate `k`, stored both block by block and
/// materialized on the flat space.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsComponent {
    k: usize,
    kernel: TransitionMatrix,
    blocks: Vec<GibbsBlock>,
}

impl GibbsComponent {
    pub fn component(&self) -> usize {
        self.k
    }

    pub fn kernel(&self) -> &TransitionMatrix {
        &self.kernel
    }

    pub fn blocks(&self) -> &[GibbsBlock] {
        &self.blocks
    }

    pub fn block(&self, id: usize) -> Result<&GibbsBlock> {
        self.blocks.get(id).ok_or(ChainError::BadBlockIndex {
            index: id,
            count: self.blocks.len(),
        })
    }
}

fn materialize(n: usize, blocks: &[GibbsBlock]) -> Result<TransitionMatrix> {
    let mut m = DMatrix::zeros(n, n);
    for b in blocks {
        for (i, &x) in b.states.iter().enumerate() {
            for (j, &y) in b.states.iter().enumerate() {
                m[(x, y)] = b.kernel[(i, j)];
            }
        }
    }
    TransitionMatrix::new(m)
}

/// Gibbs kernel for component `k`: resample coordinate `k` from its
/// conditional distribution given the others.
pub fn gibbs_component(
    pi: &TargetDistribution,
    prod: &ProductSpec,
    k: usize,
) -> Result<GibbsComponent> {
    pi.check_len(prod.n())?;
    if k >= prod.components() {
        return Err(ChainError::BadComponentIndex {
            index: k,
            count: prod.components(),
        });
    }
    let size = prod.sizes[k];
    let others: Vec<usize> = (0..prod.components()).filter(|&j| j != k).collect();
    let block_count = prod.n() / size;
    let mut states = vec![Vec::with_capacity(size); block_count];
    for flat in 0..prod.n() {
        let t = prod.to_tuple(flat)?;
        let id = others.iter().fold(0, |acc, &j| acc * prod.sizes[j] + t[j]);
        states[id].push(flat);
    }
    let probs = pi.probs();
    let blocks: Vec<GibbsBlock> = states
        .into_iter()
        .map(|states| {
            // Normalizing ratios to the heaviest state first keeps simple
            // rational conditionals (such as 1/6, 4/6, 1/6) exact.
            let top = states.iter().map(|&x| probs[x]).fold(0.0f64, f64::max);
            let ratios: Vec<f64> = states.iter().map(|&x| probs[x] / top).collect();
            let mass: f64 = ratios.iter().sum();
            let conditional: Vec<f64> = ratios.iter().map(|r| r / mass).collect();
            let kernel = DMatrix::from_fn(size, size, |_, j| conditional[j]);
            GibbsBlock {
                states,
                kernel,
                conditional,
            }
        })
        .collect();
    Ok(GibbsComponent {
        k,
        kernel: materialize(prod.n(), &blocks)?,
        blocks,
    })
}

/// Random-scan Gibbs sampler: the uniform mixture of all component kernels.
pub fn random_scan_gibbs(
    pi: &TargetDistribution,
    prod: &ProductSpec,
) -> Result<(TransitionMatrix, Vec<GibbsComponent>)> {
    let comps = (0..prod.components())
        .map(|k| gibbs_component(pi, prod, k))
        .collect::<Result<Vec<_>>>()?;
    let l = comps.len();
    let spec = MixtureSpec::new(
        comps.iter().map(|c| c.kernel.clone()).collect(),
        vec![1.0 / l as f64; l],
    )?;
    Ok((mix(&spec)?, comps))
}

fn check_block_kernel(block: &DMatrix<f64>, id: usize, conditional: &[f64], tol: f64) -> Result<()> {
    let size = conditional.len();
    if block.shape() != (size, size) {
        return Err(ChainError::DimensionMismatch {
            expected: size,
            found: if block.nrows() != size { block.nrows() } else { block.ncols() },
        });
    }
    for (row, r) in block.row_iter().enumerate() {
        let sum: f64 = r.iter().sum();
        if r.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) || (sum - 1.0).abs() > tol {
            return Err(ChainError::NotRowStochastic { row, sum });
        }
    }
    for i in 0..size {
        for j in (i + 1)..size {
            let violation = (conditional[i] * block[(i, j)] - conditional[j] * block[(j, i)]).abs();
            if violation > tol {
                return Err(ChainError::NotReversibleForConditional {
                    block: id,
                    row: i,
                    col: j,
                    violation,
                });
            }
        }
    }
    Ok(())
}

/// Substitutes block `block_id` of `comp` with `new_block`, which must be
/// row-stochastic and reversible for the block's conditional distribution.
pub fn replace_block(
    comp: &GibbsComponent,
    block_id: usize,
    new_block: &DMatrix<f64>,
    tol: f64,
) -> Result<GibbsComponent> {
    let old = comp.block(block_id)?;
    check_block_kernel(new_block, block_id, &old.conditional, tol)?;
    let mut blocks = comp.blocks.clone();
    blocks[block_id].kernel = new_block.clone();
    Ok(GibbsComponent {
        k: comp.k,
        kernel: materialize(comp.kernel.n(), &blocks)?,
        blocks,
    })
}

/// For each block, the eigenvalues (descending) of `old - new` as an operator
/// that is self-adjoint for the block's conditional distribution.
pub fn block_gap_eigs(old: &GibbsComponent, new: &GibbsComponent) -> Result<Vec<Vec<f64>>> {
    if old.k != new.k {
        return Err(ChainError::StructureMismatch(format!(
            "components {} and {} differ",
            old.k, new.k
        )));
    }
    if old.blocks.len() != new.blocks.len() {
        return Err(ChainError::StructureMismatch(format!(
            "{} blocks versus {}",
            old.blocks.len(),
            new.blocks.len()
        )));
    }
    old.blocks
        .iter()
        .zip(&new.blocks)
        .enumerate()
        .map(|(id, (a, b))| {
            let same_cond = a
                .conditional
                .iter()
                .zip(&b.conditional)
                .all(|(x, y)| (x - y).abs() <= NORMALIZATION_TOL);
            if a.states != b.states || !same_cond {
                return Err(ChainError::StructureMismatch(format!(
                    "block {id} covers different states or conditionals"
                )));
            }
            let diff = &a.kernel - &b.kernel;
            let tol = default_structure_tol(a.states.len()) * 2.0;
            Ok(weighted_eigen(&diff, &a.conditional, tol)?.eigenvalues)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    kernels: Vec<TransitionMatrix>,
    weights: Vec<f64>,
}

impl MixtureSpec {
    pub fn new(kernels: Vec<TransitionMatrix>, weights: Vec<f64>) -> Result<Self> {
        if kernels.is_empty() {
            return Err(ChainError::BadWeights("no kernels given".into()));
        }
        if kernels.len() != weights.len() {
            return Err(ChainError::BadWeights(format!(
                "{} kernels but {} weights",
                kernels.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(ChainError::BadWeights(format!("weight {w} is not positive")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ChainError::BadWeights(format!("weights sum to {sum}")));
        }
        let n = kernels[0].n();
        if let Some(k) = kernels.iter().find(|k| k.n() != n) {
            return Err(ChainError::DimensionMismatch {
                expected: n,
                found: k.n(),
            });
        }
        Ok(Self { kernels, weights })
    }

    pub fn kernels(&self) -> &[TransitionMatrix] {
        &self.kernels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `sum_k a_k P_k`.
pub fn mix(spec: &MixtureSpec) -> Result<TransitionMatrix> {
    let n = spec.kernels[0].n();
    let mut m = DMatrix::zeros(n, n);
    for (k, a) in spec.kernels.iter().zip(&spec.weights) {
        m += k.entries() * *a;
    }
    TransitionMatrix::new(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImprovementReport {
    /// Relation of the new mixture (first) to the old one (second).
    pub verdict: DominanceVerdict,
    /// Eigenvalues of `P_k - P'_k` (old minus new), descending, per component.
    pub component_gaps: Vec<Vec<f64>>,
    /// Every component gap is non-negative within tolerance, so the
    /// composition theorem already guarantees the improvement.
    pub components_certify: bool,
    /// Relation found directly from the gap spectrum of the two mixtures.
    pub direct_relation: Relation,
    /// The component-level and direct answers agree.
    pub consistent: bool,
}

/// Decides whether replacing each `old[k]` by `new[k]` in the mixture with
/// the given weights yields an efficiency improvement.
pub fn component_improvement_verdict(
    old: &[TransitionMatrix],
    new: &[TransitionMatrix],
    weights: &[f64],
    pi: &TargetDistribution,
    tol: Option<f64>,
) -> Result<ImprovementReport> {
    if old.len() != new.len() {
        return Err(ChainError::DimensionMismatch {
            expected: old.len(),
            found: new.len(),
        });
    }
    let old_spec = MixtureSpec::new(old.to_vec(), weights.to_vec())?;
    let new_spec = MixtureSpec::new(new.to_vec(), weights.to_vec())?;
    let n = old[0].n();
    pi.check_len(n)?;
    let structure_tol = default_structure_tol(n);
    let mut component_gaps = Vec::with_capacity(old.len());
    let mut components_certify = true;
    let mut components_equal = true;
    for (a, b) in old.iter().zip(new) {
        if b.n() != n {
            return Err(ChainError::DimensionMismatch {
                expected: n,
                found: b.n(),
            });
        }
        a.ensure_reversible(pi, structure_tol)?;
        b.ensure_reversible(pi, structure_tol)?;
        let diff = a.entries() - b.entries();
        let gaps = weighted_eigen(&diff, pi.probs(), f64::INFINITY)?.eigenvalues;
        let t = tol.unwrap_or_else(|| default_gap_tol(&gaps));
        components_certify &= gaps.iter().all(|&g| g >= -t);
        components_equal &= gaps.iter().all(|&g| g.abs() <= t) && a.max_abs_diff(b) <= t;
        component_gaps.push(gaps);
    }
    let old_mix = mix(&old_spec)?;
    let new_mix = mix(&new_spec)?;
    if !old_mix.is_irreducible() {
        return Err(ChainError::NotIrreducibleMixture { which: "old" });
    }
    if !new_mix.is_irreducible() {
        return Err(ChainError::NotIrreducibleMixture { which: "new" });
    }
    let opts = DominanceOptions {
        tol,
        ..DominanceOptions::default()
    };
    let mut verdict = efficiency_dominates(&new_mix, &old_mix, pi, &opts)?;
    let direct_relation = verdict.relation;
    let consistent = if components_certify {
        direct_relation.first_weakly_dominates()
    } else {
        true
    };
    if components_certify {
        verdict.relation = if components_equal {
            Relation::Equal
        } else {
            Relation::FirstDominates
        };
    }
    Ok(ImprovementReport {
        verdict,
        component_gaps,
        components_certify,
        direct_relation,
        consistent,
    })
}

/// Returns `(P' dominates P, a P' + (1-a) Q dominates a P + (1-a) Q)`, both
/// weakly. The composition theorem says the two always agree.
pub fn mixture_improvement_equivalence(
    p: &TransitionMatrix,
    p_prime: &TransitionMatrix,
    q: &TransitionMatrix,
    a: f64,
    pi: &TargetDistribution,
    tol: Option<f64>,
) -> Result<(bool, bool)> {
    if !(a > 0.0 && a < 1.0) {
        return Err(ChainError::BadMixingProbability(a));
    }
    q.ensure_reversible(pi, default_structure_tol(q.n()))?;
    let opts = DominanceOptions {
        tol,
        witness_budget: 0,
        ..DominanceOptions::default()
    };
    let direct = efficiency_dominates(p_prime, p, pi, &opts)?;
    let weights = vec![a, 1.0 - a];
    let mixed = mix(&MixtureSpec::new(vec![p.clone(), q.clone()], weights.clone())?)?;
    let mixed_prime = mix(&MixtureSpec::new(vec![p_prime.clone(), q.clone()], weights)?)?;
    let lifted = efficiency_dominates(&mixed_prime, &mixed, pi, &opts)?;
    Ok((
        direct.relation.first_weakly_dominates(),
        lifted.relation.first_weakly_dominates(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> (TargetDistribution, ProductSpec) {
        let pi = TargetDistribution::from_weights(&[1.0, 4.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        (pi, ProductSpec::new(vec![2, 3]).unwrap())
    }

    #[test]
    fn bijection_round_trips() {
        let prod = ProductSpec::new(vec![2, 3, 4]).unwrap();
        for flat in 0..prod.n() {
            assert_eq!(prod.to_flat(&prod.to_tuple(flat).unwrap()).unwrap(), flat);
        }
        assert_eq!(prod.to_tuple(1).unwrap(), vec![0, 0, 1]);
        assert!(prod.to_flat(&[2, 0, 0]).is_err());
    }

    #[test]
    fn second_component_blocks() {
        let (pi, prod) = example();
        let c = gibbs_component(&pi, &prod, 1).unwrap();
        assert_eq!(c.blocks().len(), 2);
        assert_eq!(c.blocks()[0].states, vec![0, 1, 2]);
        assert_eq!(c.blocks()[1].states, vec![3, 4, 5]);
        let first = &c.blocks()[0].conditional;
        assert!((first[1] - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(c.kernel().get(0, 3), 0.0);
    }

    #[test]
    fn first_component_blocks_pair_states() {
        let (pi, prod) = example();
        let c = gibbs_component(&pi, &prod, 0).unwrap();
        assert_eq!(c.blocks().len(), 3);
        assert_eq!(c.blocks()[1].states, vec![1, 4]);
        assert!((c.blocks()[1].conditional[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn bad_component_index() {
        let (pi, prod) = example();
        assert_eq!(
            gibbs_component(&pi, &prod, 2),
            Err(ChainError::BadComponentIndex { index: 2, count: 2 })
        );
    }

    #[test]
    fn replacement_validation() {
        let (pi, prod) = example();
        let c = gibbs_component(&pi, &prod, 1).unwrap();
        let same = replace_block(&c, 0, &c.blocks()[0].kernel, 1e-12).unwrap();
        assert_eq!(same, c);
        let not_rev = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            replace_block(&c, 0, &not_rev, 1e-12),
            Err(ChainError::NotReversibleForConditional { block: 0, .. })
        ));
        let not_stoch = DMatrix::from_row_slice(3, 3, &[0.5, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            replace_block(&c, 1, &not_stoch, 1e-12),
            Err(ChainError::NotRowStochastic { row: 0, .. })
        ));
        assert!(matches!(
            replace_block(&c, 2, &not_stoch, 1e-12),
            Err(ChainError::BadBlockIndex { index: 2, count: 2 })
        ));
    }

    #[test]
    fn mixture_weights_are_validated() {
        let p = TransitionMatrix::identity(2).unwrap();
        assert!(matches!(
            MixtureSpec::new(vec![p.clone(), p.clone()], vec![0.5, 0.6]),
            Err(ChainError::BadWeights(_))
        ));
        assert!(matches!(
            MixtureSpec::new(vec![p.clone(), p.clone()], vec![1.0, 0.0]),
            Err(ChainError::BadWeights(_))
        ));
        let three = TransitionMatrix::identity(3).unwrap();
        assert!(matches!(
            MixtureSpec::new(vec![p.clone(), three], vec![0.5, 0.5]),
            Err(ChainError::DimensionMismatch { .. })
        ));
        assert_eq!(mix(&MixtureSpec::new(vec![p.clone()], vec![1.0]).unwrap()).unwrap(), p);
    }

    #[test]
    fn bad_mixing_probability() {
        let pi = TargetDistribution::uniform(2).unwrap();
        let p = crate::matrix::iid_operator(&pi);
        assert_eq!(
            mixture_improvement_equivalence(&p, &p, &p, 1.0, &pi, None),
            Err(ChainError::BadMixingProbability(1.0))
        );
    }
}
