//! Densities, seeded sampling, target functions, grids and the scaled DFT
//! shared by every other module.

mod dft;
mod distribution;
mod grid;
pub mod rng;
mod target;

pub use dft::{dft_forward, dft_inverse, SpectralSnapshot, SpectralTrace};
pub use distribution::{
    pdf_eval, sample_weights, ConstantDensity, Density, DistributionSpec, TABULATED_NORM_TOL,
};
pub(crate) use distribution::sample_from;
pub use grid::{FrequencyGrid, SampleGrid};
pub use target::{target_eval, TargetSpec, CUSTOM_TARGETS};
