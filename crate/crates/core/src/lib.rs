//! Exact efficiency analysis of reversible Markov chains on finite state spaces.
//!
//! The crate computes asymptotic variances of ergodic averages by three
//! independent routes, decides efficiency, Peskun and eigenvalue dominance
//! between chains sharing a stationary distribution, certifies chains as
//! non-dominated through their trace, and checks that improving the
//! components of a mixture or random-scan Gibbs sampler improves the whole.
//!
//! ```
//! use revchain::{asym_var_spectral, spectral_decompose, Functional, TargetDistribution, TransitionMatrix};
//!
//! let pi = TargetDistribution::from_weights(&[2.0, 1.0, 1.0]).unwrap();
//! let p = TransitionMatrix::from_rows(&[
//!     vec![0.0, 0.5, 0.5],
//!     vec![1.0, 0.0, 0.0],
//!     vec![1.0, 0.0, 0.0],
//! ])
//! .unwrap();
//! let spec = spectral_decompose(&p, &pi).unwrap();
//! let v = asym_var_spectral(&spec, &Functional::indicator(3, 0)).unwrap();
//! assert!(v.value.abs() < 1e-12);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod composition;
pub mod distribution;
pub mod dominance;
pub mod error;
pub mod generate;
pub mod loewner;
pub mod matrix;
pub mod simulate;
pub mod spectral;
pub mod trace;
pub mod variance;
pub mod witness;

pub use composition::{
    block_gap_eigs, component_improvement_verdict, gibbs_component, mix,
    mixture_improvement_equivalence, random_scan_gibbs, replace_block, GibbsBlock,
    GibbsComponent, ImprovementReport, MixtureSpec, ProductSpec,
};
pub use distribution::{project_zero_mean, weighted_inner, Functional, TargetDistribution};
pub use dominance::{
    covariance_order_holds, efficiency_dominates, eigen_dominates, gap_spectrum, is_antithetic,
    peskun_dominates, resolvent_gap_spectrum, spectral_interval_dominates, DominanceOptions,
    DominanceVerdict, Relation,
};
pub use error::{ChainError, Result};
pub use loewner::{psd_order_inverse_flip, quadratic_form};
pub use matrix::{
    iid_operator, stationary_distribution, validate_structure, StructureReport, TransitionMatrix,
};
pub use simulate::{mc_asym_var, simulate, McEstimate, Start};
pub use spectral::{spectral_decompose, SpectralDecomposition};
pub use trace::{
    identical_spectrum_incomparable, strict_trace_check, trace_certificate, trace_lower_bound,
    TraceCertificate,
};
pub use variance::{
    asym_var_autocov, asym_var_resolvent, asym_var_spectral, autocovariances, AutocovSequence,
    Route, VarianceResult,
};
pub use witness::{find_witness, Witness};
