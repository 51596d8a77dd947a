//! # freqbias-core
//!
//! Frequency-domain learning dynamics of Fourier-features (FF) networks.
//!
//! A two-layer FF network
//!
//! ```text
//! f(x) = 1/sqrt(2m) * sum_k [ a_k cos(2π w_k x) + b_k sin(2π w_k x) ]
//! ```
//!
//! trained by full-batch gradient descent has a residual spectrum `û(ξ, t)`
//! that, in the infinite-width limit, follows a damped heat equation
//!
//! ```text
//! ∂û/∂t = σ_a² ∂ξ( ρ_w(ξ) ∂ξ û ) − ρ_w(ξ) û
//! ```
//!
//! where `ρ_w` is the density the frequencies `w_k` were drawn from. This crate
//! provides the pieces needed to check that statement numerically:
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`spectral`] | densities, seeded sampling, target functions, grids, scaled DFT |
//! | [`net`] | FF network (and a ReLU multilayer variant), gradients, GD training |
//! | [`pde`] | coefficient fields of the damped heat equation, closed-form frozen solution |
//! | [`fem`] | P1 finite elements + backward Euler for the damped heat equation |
//! | [`analysis`] | per-frequency learning rates κ(ξ), ensembles, NN-vs-model comparison |
//!
//! Frequencies are measured in cycles per unit length throughout, so that
//! activations are `cos(2π w x)` and the frozen-weight learning rate is
//! `κ(ξ) = ρ_w(ξ)` with no hidden `2π` factors.

// Range checks are written `!(x > 0.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod fem;
pub mod net;
pub mod pde;
pub mod spectral;

pub use analysis::{
    compare, ensemble_aggregate, estimate_kappa, ComparisonReport, EnsembleMode, EnsembleResult,
    KappaFit, KappaProfile,
};
pub use error::{Error, Result};
pub use fem::{build_mesh, FemMesh, FemState, FemSystem};
pub use net::{
    init_network, train, MultilayerParams, Network, NetworkParams, ResidualTrace, TrainConfig,
};
pub use pde::{build_coefficients, frozen_solution, symmetrize_density, CoefficientField};
pub use spectral::{
    dft_forward, dft_inverse, sample_weights, ConstantDensity, Density, DistributionSpec,
    FrequencyGrid, SampleGrid, SpectralSnapshot, SpectralTrace, TargetSpec,
};

pub use num_complex::Complex64;
