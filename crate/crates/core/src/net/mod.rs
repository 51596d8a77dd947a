//! Fourier-features networks and full-batch gradient-descent training.

mod ff;
mod multilayer;
mod train;

pub use ff::NetworkParams;
pub use multilayer::MultilayerParams;
pub use train::{init_network, train, Network, ResidualTrace, TrainConfig};
