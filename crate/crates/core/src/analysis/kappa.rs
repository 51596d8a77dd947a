use crate::error::{Error, Result};
use crate::spectral::{FrequencyGrid, SpectralTrace};

use super::stats::linear_fit;

/// Fraction of the trace's time span used by the default fit window.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.1;
pub const DEFAULT_AMPLITUDE_FLOOR: f64 = 1e-8;

/// Settings for [`estimate_kappa`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaFit {
    /// Number of leading snapshots to fit. `None` selects the snapshots in
    /// the first 10% of the time span (at least two).
    pub window: Option<usize>,
    /// Frequencies with `|û₀| < floor` are marked invalid.
    pub floor: f64,
}

impl Default for KappaFit {
    fn default() -> Self {
        Self {
            window: None,
            floor: DEFAULT_AMPLITUDE_FLOOR,
        }
    }
}

impl KappaFit {
    pub fn with_window(window: usize) -> Self {
        Self {
            window: Some(window),
            ..Self::default()
        }
    }

    /// Number of snapshots this fit uses on `times`.
    pub fn window_len(&self, times: &[f64]) -> Result<usize> {
        let n = match self.window {
            Some(w) => w,
            None => default_window(times),
        };
        if n < 2 {
            return Err(Error::InvalidConfig(format!("fit window needs >= 2 snapshots, got {n}")));
        }
        if n > times.len() {
            return Err(Error::InvalidConfig(format!(
                "fit window {n} exceeds the {} snapshots available",
                times.len()
            )));
        }
        Ok(n)
    }
}

/// Snapshots with `t - t₀ ≤ 10%` of the span, but never fewer than two.
pub fn default_window(times: &[f64]) -> usize {
    let Some((&t0, &t1)) = times.first().zip(times.last()) else {
        return 0;
    };
    let cut = t0 + DEFAULT_WINDOW_FRACTION * (t1 - t0);
    let k = times.iter().take_while(|&&t| t <= cut * (1.0 + 1e-12)).count();
    k.max(2).min(times.len())
}

/// Per-frequency learning rate `κ(ξ)` and fit quality.
///
/// `κ` is in inverse trace-time units. Invalid entries hold `NaN` for `κ` and
/// `0` for `R²`.
#[derive(Clone, Debug, PartialEq)]
pub struct KappaProfile {
    pub grid: FrequencyGrid,
    pub kappa: Vec<f64>,
    pub fit_r2: Vec<f64>,
    pub valid: Vec<bool>,
}

impl KappaProfile {
    pub fn n_valid(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// `(ξ, κ)` over valid frequencies with `lo ≤ |ξ| ≤ hi`.
    pub fn band(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        (0..self.kappa.len())
            .filter(|&i| self.valid[i])
            .map(|i| (self.grid.freq(i), self.kappa[i]))
            .filter(|(xi, _)| xi.abs() >= lo && xi.abs() <= hi)
            .collect()
    }
}

/// Fit `log|û(ξ, t)| ≈ log|û₀(ξ)| − κ(ξ) t` over the leading snapshots.
pub fn estimate_kappa(trace: &SpectralTrace, fit: &KappaFit) -> Result<KappaProfile> {
    if !(fit.floor > 0.0) {
        return Err(Error::InvalidConfig(format!("amplitude floor must be > 0, got {}", fit.floor)));
    }
    let times = trace.times();
    let w = fit.window_len(&times)?;
    let t = &times[..w];
    let snaps = &trace.snapshots()[..w];
    let grid = *trace.grid();

    let mut kappa = vec![f64::NAN; grid.len];
    let mut fit_r2 = vec![0.0; grid.len];
    let mut valid = vec![false; grid.len];
    let mut logs = vec![0.0; w];
    for i in 0..grid.len {
        if snaps[0].values[i].norm() < fit.floor {
            continue;
        }
        let mut ok = true;
        for (k, s) in snaps.iter().enumerate() {
            let a = s.values[i].norm();
            if !(a > 0.0 && a.is_finite()) {
                ok = false;
                break;
            }
            logs[k] = a.ln();
        }
        if !ok {
            continue;
        }
        let (slope, _, r2) = linear_fit(t, &logs);
        kappa[i] = -slope;
        fit_r2[i] = r2;
        valid[i] = true;
    }
    if !valid.iter().any(|&v| v) {
        return Err(Error::EmptyProfile { floor: fit.floor });
    }
    Ok(KappaProfile {
        grid,
        kappa,
        fit_r2,
        valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::frozen_solution;
    use crate::spectral::{DistributionSpec, SpectralSnapshot};
    use num_complex::Complex64;

    fn trace_from(f: impl Fn(f64, f64) -> Complex64, times: &[f64]) -> SpectralTrace {
        let grid = FrequencyGrid::new(-2.0, 0.5, 9).unwrap();
        SpectralTrace::new(
            times
                .iter()
                .map(|&t| {
                    let v = grid.freqs().iter().map(|&xi| f(xi, t)).collect();
                    SpectralSnapshot::new(grid, v, t).unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn exponential_decay() {
        let tr = trace_from(|_, t| Complex64::new((-0.3 * t).exp(), 0.0), &[0.0, 1.0, 2.0, 5.0]);
        let p = estimate_kappa(&tr, &KappaFit::with_window(4)).unwrap();
        for k in &p.kappa {
            assert!((k - 0.3).abs() < 1e-10);
        }
        assert!(p.fit_r2.iter().all(|&r| r == 1.0));
    }

    #[test]
    fn constant_trace_has_zero_rate() {
        let tr = trace_from(|xi, _| Complex64::new(1.0 + xi.abs(), -2.0), &[0.0, 1.0, 2.0]);
        let p = estimate_kappa(&tr, &KappaFit::with_window(3)).unwrap();
        assert!(p.kappa.iter().all(|&k| k == 0.0));
    }

    #[test]
    fn floor_masks_and_empty_is_error() {
        let tr = trace_from(
            |xi, t| Complex64::new(if xi > 0.0 { 1.0 } else { 1e-12 } * (-t).exp(), 0.0),
            &[0.0, 1.0],
        );
        let p = estimate_kappa(&tr, &KappaFit::with_window(2)).unwrap();
        assert_eq!(p.n_valid(), 4);
        assert!(p.kappa[0].is_nan());
        let zero = trace_from(|_, _| Complex64::new(0.0, 0.0), &[0.0, 1.0]);
        assert!(matches!(
            estimate_kappa(&zero, &KappaFit::with_window(2)),
            Err(Error::EmptyProfile { .. })
        ));
    }

    #[test]
    fn window_validation() {
        let tr = trace_from(|_, _| Complex64::new(1.0, 0.0), &[0.0, 1.0, 2.0]);
        assert!(estimate_kappa(&tr, &KappaFit::with_window(1)).is_err());
        assert!(estimate_kappa(&tr, &KappaFit::with_window(4)).is_err());
        let bad = KappaFit { window: Some(2), floor: 0.0 };
        assert!(estimate_kappa(&tr, &bad).is_err());
    }

    #[test]
    fn default_window_is_first_tenth() {
        let t: Vec<f64> = (0..=100).map(|k| k as f64).collect();
        assert_eq!(default_window(&t), 11);
        assert_eq!(default_window(&[0.0, 4000.0, 8000.0, 10000.0]), 2);
    }

    #[test]
    fn recovers_uniform_density() {
        let grid = FrequencyGrid::new(-60.0, 0.5, 240).unwrap();
        let u0 = SpectralSnapshot::new(grid, vec![Complex64::new(0.7, 0.2); 240], 0.0).unwrap();
        let d = DistributionSpec::uniform(10.0).unwrap();
        let snaps = (0..=10)
            .map(|k| frozen_solution(&u0, &d, k as f64).unwrap())
            .collect();
        let tr = SpectralTrace::new(snaps).unwrap();
        let p = estimate_kappa(&tr, &KappaFit::with_window(11)).unwrap();
        for (i, k) in p.kappa.iter().enumerate() {
            let xi = grid.freq(i);
            let expect = if xi.abs() <= 10.0 { 0.05 } else { 0.0 };
            assert!((k - expect).abs() < 1e-10, "ξ={xi}: {k}");
        }
    }
}
