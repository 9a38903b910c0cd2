//! Structural copula competing-risks models.
//!
//! Two latent durations `T₁, T₂` with proportional-hazards marginals are
//! joined by a Gumbel copula; only `T = min(T₁, T₂)`, the failing risk `δ`
//! and covariates `z` are observed. The crate provides the model's closed
//! forms ([`structural`]), a simulator ([`sampler`]) and estimators
//! ([`estimation`]): a partial likelihood on the duplicated single-risk data
//! layout, cause-specific Cox fits, and a full parametric MLE.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;

pub mod copula;
pub mod data;
pub mod error;
pub mod estimation;
pub mod hazard;
pub mod num;
pub mod optim;
pub mod quadrature;
pub mod sampler;
pub mod stats;
pub mod structural;

pub use copula::{Copula, Family};
pub use data::{Dataset, Observation, Risk};
pub use error::{Error, Result};
pub use hazard::{Baseline, MarginalHazard};
pub use structural::{BaselineShape, CopulaModel, ReducedFormParams, StructuralParams};
