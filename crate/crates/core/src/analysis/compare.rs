use crate::error::{Error, Result};
use crate::spectral::{Density, SpectralTrace};

use super::ensemble::EnsembleResult;
use super::stats::spearman;

/// Magnitudes below this are treated as this value inside logarithms.
const LOG_FLOOR: f64 = 1e-300;
const SCAN_POINTS: usize = 241;
const SCAN_DECADES: f64 = 12.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    /// Model time = `time_scale` × NN time.
    pub time_scale: f64,
    /// NN snapshot times.
    pub times: Vec<f64>,
    /// `‖ |û_model| − |û_NN| ‖₂ / ‖ |û_NN| ‖₂` per NN snapshot over the band.
    pub distances: Vec<f64>,
    /// Spearman correlation of mean `κ_NN` with `ρ_w` over the band; `None`
    /// when either side is constant there.
    pub correlation: Option<f64>,
    /// `|ξ|` range used.
    pub band: (f64, f64),
    pub n_frequencies: usize,
}

/// Compare an NN ensemble against a model trace (FEM or closed form).
///
/// The model is resampled onto the NN grid. One scalar `s` aligns the clocks:
/// the model at time `s·t` is compared with the NN at time `t`, `s` chosen to
/// minimise the summed squared log-magnitude mismatch (model magnitudes
/// interpolated log-linearly in time). `band = None` uses every valid
/// frequency of the mean `κ`.
pub fn compare(
    nn: &EnsembleResult,
    model: &SpectralTrace,
    dist: &dyn Density,
    band: Option<(f64, f64)>,
) -> Result<ComparisonReport> {
    let grid = *nn.mean_trace.grid();
    let (lo, hi) = band.unwrap_or((0.0, f64::INFINITY));
    if !(lo >= 0.0 && hi >= lo) {
        return Err(Error::EmptyBand(format!("invalid band [{lo}, {hi}]")));
    }
    let idx: Vec<usize> = (0..grid.len)
        .filter(|&i| nn.mean_kappa.valid[i])
        .filter(|&i| {
            let a = grid.freq(i).abs();
            a >= lo && a <= hi
        })
        .collect();
    if idx.is_empty() {
        return Err(Error::EmptyBand(format!("no valid frequency with {lo} <= |ξ| <= {hi}")));
    }

    let nn_times = nn.mean_trace.times();
    let nn_mag: Vec<Vec<f64>> = nn
        .mean_trace
        .snapshots()
        .iter()
        .map(|s| idx.iter().map(|&i| s.values[i].norm()).collect())
        .collect();

    let model_times = model.times();
    let xis: Vec<f64> = idx.iter().map(|&i| grid.freq(i)).collect();
    let mut model_mag: Vec<Vec<f64>> = Vec::with_capacity(model.len());
    for s in model.snapshots() {
        let row = xis
            .iter()
            .map(|&xi| s.value_at(xi).map(|v| v.norm()))
            .collect::<Result<Vec<_>>>()?;
        model_mag.push(row);
    }
    let model_log: Vec<Vec<f64>> = model_mag
        .iter()
        .map(|r| r.iter().map(|a| a.max(LOG_FLOOR).ln()).collect())
        .collect();

    let model_at = |tau: f64| -> Vec<f64> { interp_rows(&model_times, &model_log, tau) };
    let objective = |s: f64| -> f64 {
        let mut acc = 0.0;
        for (k, &t) in nn_times.iter().enumerate() {
            let m = model_at(s * t);
            for (j, &a) in nn_mag[k].iter().enumerate() {
                let d = m[j] - a.max(LOG_FLOOR).ln();
                acc += d * d;
            }
        }
        acc
    };

    let time_scale = fit_scale(&nn_times, &model_times, objective);

    let distances = nn_times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let tau = time_scale * t;
            let m = match model_times.iter().position(|&mt| mt == tau) {
                Some(exact) => model_mag[exact].clone(),
                None => model_at(tau).into_iter().map(f64::exp).collect(),
            };
            let (mut num, mut den) = (0.0, 0.0);
            for (j, &a) in nn_mag[k].iter().enumerate() {
                let d = m[j] - a;
                num += d * d;
                den += a * a;
            }
            if den > 0.0 {
                (num / den).sqrt()
            } else {
                num.sqrt()
            }
        })
        .collect();

    let kappa: Vec<f64> = idx.iter().map(|&i| nn.mean_kappa.kappa[i]).collect();
    let rho: Vec<f64> = xis.iter().map(|&xi| dist.pdf(xi)).collect();

    Ok(ComparisonReport {
        time_scale,
        times: nn_times,
        distances,
        correlation: spearman(&kappa, &rho),
        band: (lo, hi),
        n_frequencies: idx.len(),
    })
}

/// Row-wise linear interpolation in time, clamped at the ends.
fn interp_rows(times: &[f64], rows: &[Vec<f64>], tau: f64) -> Vec<f64> {
    let n = times.len();
    if tau <= times[0] || n == 1 {
        return rows[0].clone();
    }
    if tau >= times[n - 1] {
        return rows[n - 1].clone();
    }
    let k = times.partition_point(|&t| t <= tau) - 1;
    let w = (tau - times[k]) / (times[k + 1] - times[k]);
    rows[k]
        .iter()
        .zip(&rows[k + 1])
        .map(|(a, b)| a + w * (b - a))
        .collect()
}

/// Log-spaced scan over `[s_max·10⁻¹², s_max]` plus `s = 1`, then
/// golden-section refinement around the best scan point. `s_max` keeps the
/// scaled NN times inside the model's time range.
fn fit_scale(nn_times: &[f64], model_times: &[f64], objective: impl Fn(f64) -> f64) -> f64 {
    let nn_span = nn_times.last().copied().unwrap_or(0.0);
    let model_span = model_times.last().copied().unwrap_or(0.0);
    if !(nn_span > 0.0 && model_span > 0.0) {
        return 1.0;
    }
    let s_max = model_span / nn_span;
    let log_max = s_max.log10();
    let mut cands: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| 10f64.powf(log_max - SCAN_DECADES * (1.0 - i as f64 / (SCAN_POINTS - 1) as f64)))
        .collect();
    if 1.0 <= s_max {
        cands.push(1.0);
    }
    cands.sort_by(f64::total_cmp);

    let vals: Vec<f64> = cands.iter().map(|&s| objective(s)).collect();
    let best = (0..cands.len())
        .min_by(|&i, &j| vals[i].total_cmp(&vals[j]))
        .unwrap_or(0);
    let (mut s_best, mut f_best) = (cands[best], vals[best]);

    let mut a = cands[best.saturating_sub(1)].ln();
    let mut b = cands[(best + 1).min(cands.len() - 1)].ln();
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = objective(x1.exp());
    let mut f2 = objective(x2.exp());
    for _ in 0..60 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = objective(x1.exp());
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = objective(x2.exp());
        }
    }
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f < f_best {
            s_best = x.exp();
            f_best = f;
        }
    }
    s_best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{ensemble_aggregate, EnsembleMode, KappaFit};
    use crate::pde::frozen_solution;
    use crate::spectral::{DistributionSpec, FrequencyGrid, SpectralSnapshot};
    use num_complex::Complex64;

    fn frozen_trace(dist: &DistributionSpec, times: &[f64]) -> SpectralTrace {
        let grid = FrequencyGrid::new(-60.0, 0.5, 240).unwrap();
        let u0 = SpectralSnapshot::new(
            grid,
            grid.freqs().iter().map(|x| Complex64::new(1.0 + 0.01 * x, 0.5)).collect(),
            0.0,
        )
        .unwrap();
        SpectralTrace::new(times.iter().map(|&t| frozen_solution(&u0, dist, t).unwrap()).collect()).unwrap()
    }

    #[test]
    fn self_comparison() {
        let d = DistributionSpec::normal(300.0 / (2.0 * std::f64::consts::PI)).unwrap();
        let tr = frozen_trace(&d, &[0.0, 100.0, 200.0, 400.0, 1000.0]);
        let e = ensemble_aggregate(std::slice::from_ref(&tr), &[0], EnsembleMode::default(), &KappaFit::with_window(5)).unwrap();
        let r = compare(&e, &tr, &d, None).unwrap();
        assert_eq!(r.time_scale, 1.0);
        assert!(r.distances.iter().all(|&x| x == 0.0));
        assert!((r.correlation.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn recovers_clock_factor() {
        let d = DistributionSpec::normal(10.0).unwrap();
        let nn_t = [0.0, 50.0, 100.0, 200.0];
        let model_t: Vec<f64> = (0..=80).map(|k| k as f64 * 10.0).collect();
        let nn = frozen_trace(&d, &nn_t.map(|t| 3.0 * t));
        // Relabel the NN clock so that model time = 3·NN time.
        let relabeled = SpectralTrace::new(
            nn.snapshots()
                .iter()
                .zip(nn_t)
                .map(|(s, t)| SpectralSnapshot::new(s.grid, s.values.clone(), t).unwrap())
                .collect(),
        )
        .unwrap();
        let e = ensemble_aggregate(&[relabeled], &[0], EnsembleMode::default(), &KappaFit::with_window(4)).unwrap();
        let model = frozen_trace(&d, &model_t);
        let r = compare(&e, &model, &d, Some((0.0, 20.0))).unwrap();
        assert!((r.time_scale - 3.0).abs() < 1e-3, "{}", r.time_scale);
        assert!(r.distances.iter().all(|&x| x < 1e-3));
    }

    #[test]
    fn constant_density_has_no_correlation() {
        let d = DistributionSpec::uniform(10.0).unwrap();
        let tr = frozen_trace(&d, &[0.0, 10.0, 20.0]);
        let e = ensemble_aggregate(std::slice::from_ref(&tr), &[0], EnsembleMode::default(), &KappaFit::with_window(3)).unwrap();
        let r = compare(&e, &tr, &d, Some((0.0, 8.0))).unwrap();
        assert_eq!(r.correlation, None);
        assert!(compare(&e, &tr, &d, Some((70.0, 80.0))).is_err());
    }

    #[test]
    fn interpolation_clamps() {
        let rows = vec![vec![0.0], vec![2.0]];
        assert_eq!(interp_rows(&[0.0, 1.0], &rows, -1.0), vec![0.0]);
        assert_eq!(interp_rows(&[0.0, 1.0], &rows, 0.25), vec![0.5]);
        assert_eq!(interp_rows(&[0.0, 1.0], &rows, 5.0), vec![2.0]);
    }
}
