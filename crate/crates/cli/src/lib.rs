//! # freqbias-cli
//!
//! Experiment harness for `freqbias-core`: TOML configs with named presets,
//! seed ensembles run in parallel with a seed-ordered merge, bit-stable CSV
//! artifacts, standalone SVG figures and a checksummed manifest.

// Range checks are written `!(x > 0.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod config;
pub mod manifest;
pub mod plots;
pub mod runner;
pub mod svg;

pub use config::{ConfigError, DistConfig, ExperimentConfig, Preset, Seeds, Variant};
pub use manifest::RunManifest;
pub use runner::{run_experiment, run_fem_only, threads_from_env, THREADS_ENV};
