use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{SpectralSnapshot, SpectralTrace};

use super::kappa::{estimate_kappa, KappaFit, KappaProfile};

/// How the ensemble-level `κ` is formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EnsembleMode {
    /// Fit `κ` on each seed, then average over the seeds valid at each `ξ`.
    #[default]
    PerSeedThenAverage,
    /// Fit `κ` once on the complex-mean trace.
    AverageThenFit,
}

impl EnsembleMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::PerSeedThenAverage => "per-seed-then-average",
            Self::AverageThenFit => "average-then-fit",
        }
    }
}

impl std::str::FromStr for EnsembleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-seed-then-average" => Ok(Self::PerSeedThenAverage),
            "average-then-fit" => Ok(Self::AverageThenFit),
            other => Err(Error::InvalidConfig(format!("unknown ensemble mode '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EnsembleResult {
    /// Complex mean of `û` across seeds at every snapshot.
    pub mean_trace: SpectralTrace,
    pub per_seed_kappa: Vec<KappaProfile>,
    pub mean_kappa: KappaProfile,
    pub seeds: Vec<u64>,
    pub mode: EnsembleMode,
}

/// Aggregate per-seed traces sharing one grid and snapshot schedule.
///
/// Sums run in input order, so results are bitwise reproducible for a fixed
/// seed order.
pub fn ensemble_aggregate(
    traces: &[SpectralTrace],
    seeds: &[u64],
    mode: EnsembleMode,
    fit: &KappaFit,
) -> Result<EnsembleResult> {
    let first = traces
        .first()
        .ok_or_else(|| Error::InconsistentTraces("no traces given".into()))?;
    if seeds.len() != traces.len() {
        return Err(Error::LengthMismatch {
            expected: traces.len(),
            got: seeds.len(),
        });
    }
    let times = first.times();
    for (k, tr) in traces.iter().enumerate().skip(1) {
        if !tr.grid().matches(first.grid()) {
            return Err(Error::InconsistentTraces(format!("trace {k} uses a different frequency grid")));
        }
        if tr.times() != times {
            return Err(Error::InconsistentTraces(format!("trace {k} has a different snapshot schedule")));
        }
    }

    let grid = *first.grid();
    let inv = 1.0 / traces.len() as f64;
    let mut means = Vec::with_capacity(times.len());
    for (s, &t) in times.iter().enumerate() {
        let mut acc = vec![Complex64::new(0.0, 0.0); grid.len];
        for tr in traces {
            for (a, v) in acc.iter_mut().zip(&tr.snapshots()[s].values) {
                *a += v;
            }
        }
        acc.iter_mut().for_each(|a| *a *= inv);
        means.push(SpectralSnapshot::new(grid, acc, t)?);
    }
    let mean_trace = SpectralTrace::new(means)?;

    let per_seed_kappa = traces
        .iter()
        .map(|tr| estimate_kappa(tr, fit))
        .collect::<Result<Vec<_>>>()?;

    let mean_kappa = match mode {
        EnsembleMode::PerSeedThenAverage => average_profiles(&per_seed_kappa),
        EnsembleMode::AverageThenFit => estimate_kappa(&mean_trace, fit)?,
    };

    Ok(EnsembleResult {
        mean_trace,
        per_seed_kappa,
        mean_kappa,
        seeds: seeds.to_vec(),
        mode,
    })
}

/// Mean over the profiles valid at each frequency; valid if any is.
fn average_profiles(profiles: &[KappaProfile]) -> KappaProfile {
    let grid = profiles[0].grid;
    let mut kappa = vec![f64::NAN; grid.len];
    let mut fit_r2 = vec![0.0; grid.len];
    let mut valid = vec![false; grid.len];
    for i in 0..grid.len {
        let (mut k, mut r, mut n) = (0.0, 0.0, 0usize);
        for p in profiles.iter().filter(|p| p.valid[i]) {
            k += p.kappa[i];
            r += p.fit_r2[i];
            n += 1;
        }
        if n > 0 {
            kappa[i] = k / n as f64;
            fit_r2[i] = r / n as f64;
            valid[i] = true;
        }
    }
    KappaProfile {
        grid,
        kappa,
        fit_r2,
        valid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::FrequencyGrid;

    fn trace(sign: f64, rate: f64) -> SpectralTrace {
        let grid = FrequencyGrid::new(-1.0, 0.5, 5).unwrap();
        SpectralTrace::new(
            (0..3)
                .map(|k| {
                    let t = k as f64;
                    let v = grid
                        .freqs()
                        .iter()
                        .map(|xi| Complex64::new(sign * (1.0 + xi * xi), sign * xi) * (-rate * t).exp())
                        .collect();
                    SpectralSnapshot::new(grid, v, t).unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_trace_mean_is_itself() {
        let tr = trace(1.0, 0.2);
        let e = ensemble_aggregate(std::slice::from_ref(&tr), &[7], EnsembleMode::default(), &KappaFit::with_window(3)).unwrap();
        for (a, b) in e.mean_trace.snapshots().iter().zip(tr.snapshots()) {
            assert_eq!(a.values, b.values);
        }
        assert_eq!(e.seeds, vec![7]);
    }

    #[test]
    fn opposite_traces_cancel() {
        let e = ensemble_aggregate(
            &[trace(1.0, 0.2), trace(-1.0, 0.2)],
            &[0, 1],
            EnsembleMode::PerSeedThenAverage,
            &KappaFit::with_window(3),
        )
        .unwrap();
        for s in e.mean_trace.snapshots() {
            assert!(s.values.iter().all(|v| v.norm() == 0.0));
        }
        for k in &e.mean_kappa.kappa {
            assert!((k - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn per_seed_average_of_rates() {
        let e = ensemble_aggregate(
            &[trace(1.0, 0.1), trace(1.0, 0.3)],
            &[0, 1],
            EnsembleMode::PerSeedThenAverage,
            &KappaFit::with_window(3),
        )
        .unwrap();
        assert!(e.mean_kappa.kappa.iter().all(|k| (k - 0.2).abs() < 1e-12));
    }

    #[test]
    fn grid_mismatch_rejected() {
        let a = trace(1.0, 0.1);
        let g = FrequencyGrid::new(-1.0, 0.25, 5).unwrap();
        let b = SpectralTrace::new(
            (0..3)
                .map(|k| SpectralSnapshot::new(g, vec![Complex64::new(1.0, 0.0); 5], k as f64).unwrap())
                .collect(),
        )
        .unwrap();
        assert!(ensemble_aggregate(&[a, b], &[0, 1], EnsembleMode::default(), &KappaFit::with_window(2)).is_err());
        assert!(ensemble_aggregate(&[], &[], EnsembleMode::default(), &KappaFit::default()).is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for m in [EnsembleMode::PerSeedThenAverage, EnsembleMode::AverageThenFit] {
            assert_eq!(m.name().parse::<EnsembleMode>().unwrap(), m);
        }
    }
}
