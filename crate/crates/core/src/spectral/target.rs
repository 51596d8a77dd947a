use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Built-in custom targets, addressable by id from configuration files.
pub const CUSTOM_TARGETS: &[&str] = &["zero", "sine", "cosine"];

/// The function the network is trained to fit.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetSpec {
    /// `round(sin(freq_factor · π · x))`, rounding half away from zero.
    RoundedSine { freq_factor: f64 },
    /// One of [`CUSTOM_TARGETS`].
    Custom { id: String },
}

impl Default for TargetSpec {
    fn default() -> Self {
        Self::RoundedSine { freq_factor: 4.2 }
    }
}

impl TargetSpec {
    pub fn custom(id: &str) -> Result<Self> {
        if CUSTOM_TARGETS.contains(&id) {
            Ok(Self::Custom { id: id.to_owned() })
        } else {
            Err(Error::InvalidConfig(format!(
                "unknown target id {id:?}; known: {CUSTOM_TARGETS:?}"
            )))
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            // f64::round breaks ties away from zero.
            Self::RoundedSine { freq_factor } => (freq_factor * PI * x).sin().round(),
            Self::Custom { id } => match id.as_str() {
                "sine" => (2.0 * PI * x).sin(),
                "cosine" => (2.0 * PI * x).cos(),
                _ => 0.0,
            },
        }
    }
}

pub fn target_eval(target: &TargetSpec, x: f64) -> f64 {
    target.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounded_sine_values() {
        let t = TargetSpec::default();
        assert_eq!(t.eval(0.0), 0.0);
        assert_eq!(t.eval(1.0 / 8.4), 1.0);
        // sin(0.21π) ≈ 0.6131
        assert_eq!(t.eval(0.05), 1.0);
        assert_eq!(t.eval(-0.05), -1.0);
        // sin(0.042π) ≈ 0.131 rounds to 0
        assert_eq!(t.eval(0.01), 0.0);
    }

    #[test]
    fn ties_round_away_from_zero() {
        assert_eq!(0.5f64.round(), 1.0);
        assert_eq!((-0.5f64).round(), -1.0);
    }

    #[test]
    fn unknown_custom_rejected() {
        assert!(TargetSpec::custom("nope").is_err());
        assert_eq!(TargetSpec::custom("zero").unwrap().eval(0.3), 0.0);
    }
}
