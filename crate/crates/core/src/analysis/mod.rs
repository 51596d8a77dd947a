//! Per-frequency learning rates, seed ensembles and NN-vs-model comparison.
//!
//! The learning rate at `ξ` is the early-time decay slope of the residual
//! spectrum, `log|û(ξ, t)| ≈ log|û₀(ξ)| − κ(ξ) t` (natural log). For frozen
//! frequencies `κ = ρ_w`.

mod compare;
mod ensemble;
mod kappa;
pub mod stats;

pub use compare::{compare, ComparisonReport};
pub use ensemble::{ensemble_aggregate, EnsembleMode, EnsembleResult};
pub use kappa::{
    default_window, estimate_kappa, KappaFit, KappaProfile, DEFAULT_AMPLITUDE_FLOOR,
    DEFAULT_WINDOW_FRACTION,
};
pub use stats::spearman;
