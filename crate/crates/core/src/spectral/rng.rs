//! Seeded random streams.
//!
//! Every random quantity is drawn from a ChaCha8 generator keyed by a `u64`
//! seed and a stream id. ChaCha is counter based, so two streams with the same
//! seed never overlap and a given `(seed, stream)` pair produces the same
//! sequence on every platform and thread layout.
//!
//! Uniforms take the top 53 bits of a `u64` draw. Normals use the Box–Muller
//! transform on consecutive uniform pairs, emitting the cosine branch first and
//! caching the sine branch for the next call.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Stream ids. Keep these stable: changing one changes every seeded result.
pub mod streams {
    pub const FREQUENCIES: u64 = 0;
    pub const OUTPUT_WEIGHTS: u64 = 1;
    pub const HIDDEN_WEIGHTS: u64 = 2;
    pub const SAMPLING: u64 = 3;
}

#[derive(Clone, Debug)]
pub struct SeededStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl SeededStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box–Muller.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - U lies in (0, 1], so the log is finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    pub fn normal(&mut self, mean: f64, std: f64) -> f64 {
        mean + std * self.standard_normal()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = {
            let mut s = SeededStream::new(3, 0);
            (0..8).map(|_| s.rng.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut s = SeededStream::new(3, 0);
            (0..8).map(|_| s.rng.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut s = SeededStream::new(3, 1);
            (0..8).map(|_| s.rng.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut s = SeededStream::new(11, 0);
        for _ in 0..10_000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn normal_moments() {
        let mut s = SeededStream::new(5, 2);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| s.standard_normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }
}
