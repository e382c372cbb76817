//! Mean-type mappings and their invariant means.
//!
//! A mean-type mapping `M = (M_1, ..., M_p)` applies `p` means to a vector
//! `v` in `I^p`. The crate evaluates such mappings, measures how fast they
//! shrink the diameter `max(v) - min(v)` (contractivity, weak contractivity
//! and the index `n0(v)`), computes the invariant mean `K` with `K ∘ M = K`
//! by Gauss iteration, and checks the factorisation `F = φ ∘ K` of
//! `M`-invariant functions.
//!
//! ```
//! use invariant_means::{gauss_iterate, GaussOptions, MeanTypeMapping};
//!
//! let agm = MeanTypeMapping::agm();
//! let k = gauss_iterate(&agm, &[1.0, 2.0], &GaussOptions::default()).unwrap();
//! assert!((k.value - 1.456_791_031_046_906_9).abs() < 1e-12);
//! ```

pub mod cli;
pub mod config;
pub mod decompose;
mod error;
pub mod interval;
pub mod invariant;
pub mod mapping;
pub mod mean;
pub mod probe;
pub mod sampling;

pub use config::{load_mapping, parse_mapping, DecompositionFixture, MappingConfig};
pub use decompose::{
    check_invariance, diagonal_restriction, verify_decomposition, DecompositionReport, FunctionExpr,
    InvariantFunction, Unary,
};
pub use error::{Error, Result};
pub use interval::Interval;
pub use invariant::{
    gauss_iterate, invariance_residual, invariant_mean, uniqueness_probe, GaussOptions, InvariantEstimate,
    InvariantMean, Readout, Status, StoppingRule,
};
pub use mapping::{diameter, ContractivityReport, ContractivityVerdict, IterationTrace, MeanTypeMapping, TraceStep};
pub use mean::{eval_mean, internality_probe, CatalogMean, Generator, InternalityReport, Mean, MeanKind, MeanSpec};
pub use probe::MaxReport;
pub use sampling::{SampleBox, Sampler};
