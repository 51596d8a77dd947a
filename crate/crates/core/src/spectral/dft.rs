//! Quadrature-scaled discrete Fourier transform.
//!
//! For samples `h_j = h(x_j)` on a [`SampleGrid`] the forward transform is
//!
//! ```text
//! H(ξ_l) = Δx · Σ_j h_j · exp(-2πi x_j ξ_l)
//! ```
//!
//! which approximates `∫ h(x) e^{-2πi x ξ} dx` over `[a, b)`. The inverse uses
//! `Δξ = 1/L`, and `Δx · Δξ = 1/n` makes the pair exact and Parseval hold in
//! the form `Σ|h|²Δx = Σ|H|²Δξ`.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::{FrequencyGrid, SampleGrid};
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Complex spectrum on a frequency grid at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSnapshot {
    pub grid: FrequencyGrid,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl SpectralSnapshot {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.len {
            return Err(Error::LengthMismatch {
                expected: grid.len,
                got: values.len(),
            });
        }
        Ok(Self { grid, values, time })
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Linear interpolation of the complex value at `xi`. Periodic grids wrap;
    /// other grids reject points outside their range.
    pub fn value_at(&self, xi: f64) -> Result<Complex64> {
        let g = &self.grid;
        let mut p = (xi - g.start) / g.step;
        let n = g.len;
        if let Some(period) = g.period {
            let cells = period / g.step;
            p = p.rem_euclid(cells);
            // A point may fall in the gap between the last sample and the
            // wrapped first one.
            let i0 = p.floor() as usize;
            let t = p - p.floor();
            let v0 = self.values[i0 % n];
            let v1 = self.values[(i0 + 1) % n];
            return Ok(v0 * (1.0 - t) + v1 * t);
        }
        let tol = 1e-9;
        if p < -tol || p > (n - 1) as f64 + tol {
            return Err(Error::OutOfRange {
                xi,
                lo: g.start,
                hi: g.last(),
            });
        }
        let p = p.clamp(0.0, (n - 1) as f64);
        let i0 = (p.floor() as usize).min(n.saturating_sub(2));
        if n == 1 {
            return Ok(self.values[0]);
        }
        let t = p - i0 as f64;
        Ok(self.values[i0] * (1.0 - t) + self.values[i0 + 1] * t)
    }

    /// Resample onto `grid` by linear interpolation.
    pub fn resample(&self, grid: &FrequencyGrid) -> Result<SpectralSnapshot> {
        if self.grid.matches(grid) {
            return Ok(SpectralSnapshot {
                grid: *grid,
                ..self.clone()
            });
        }
        let values = (0..grid.len)
            .map(|i| self.value_at(grid.freq(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralSnapshot {
            grid: *grid,
            values,
            time: self.time,
        })
    }

    /// Largest `|v(-ξ) - conj(v(ξ))|` over mirrored grid pairs, relative to
    /// the largest magnitude.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.grid.len {
            if let Some(j) = self.grid.index_of(-self.grid.freq(i)) {
                worst = worst.max((self.values[j] - self.values[i].conj()).norm());
            }
        }
        worst / scale
    }

    /// `Σ |v|² Δξ`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.step
    }
}

/// Time-ordered snapshots sharing one frequency grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralTrace {
    snapshots: Vec<SpectralSnapshot>,
}

impl SpectralTrace {
    pub fn new(snapshots: Vec<SpectralSnapshot>) -> Result<Self> {
        let first = snapshots
            .first()
            .ok_or_else(|| Error::InconsistentTraces("trace has no snapshots".into()))?;
        for s in &snapshots[1..] {
            if !s.grid.matches(&first.grid) {
                return Err(Error::InconsistentTraces(
                    "snapshots use different frequency grids".into(),
                ));
            }
        }
        if snapshots.windows(2).any(|w| !(w[1].time > w[0].time)) {
            return Err(Error::InconsistentTraces(
                "snapshot times must be strictly increasing".into(),
            ));
        }
        Ok(Self { snapshots })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.snapshots[0].grid
    }

    pub fn snapshots(&self) -> &[SpectralSnapshot] {
        &self.snapshots
    }

    pub fn into_snapshots(self) -> Vec<SpectralSnapshot> {
        self.snapshots
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn initial(&self) -> &SpectralSnapshot {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &SpectralSnapshot {
        self.snapshots.last().expect("non-empty trace")
    }
}

/// Scaled DFT of samples taken on `grid`.
pub fn dft_forward(signal: &[f64], grid: &SampleGrid, time: f64) -> Result<SpectralSnapshot> {
    let n = grid.n();
    if signal.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: signal.len(),
        });
    }
    let mut buf: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n).process(&mut buf));
    let fgrid = grid.frequency_grid();
    let dx = grid.spacing();
    let half = n / 2;
    let values = (0..n)
        .map(|l| {
            // Signed index k = l - ⌊n/2⌋ maps to FFT bin k mod n.
            let bin = (l + n - half) % n;
            let xi = fgrid.freq(l);
            let (s, c) = (-2.0 * PI * grid.a() * xi).sin_cos();
            buf[bin] * Complex64::new(c, s) * dx
        })
        .collect();
    SpectralSnapshot::new(fgrid, values, time)
}

/// Inverse of [`dft_forward`]; returns complex samples on `grid`.
pub fn dft_inverse(snapshot: &SpectralSnapshot, grid: &SampleGrid) -> Result<Vec<Complex64>> {
    let n = grid.n();
    if !snapshot.grid.matches(&grid.frequency_grid()) {
        return Err(Error::InvalidGrid(
            "snapshot grid is not the DFT grid of this sample grid".into(),
        ));
    }
    let half = n / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (l, v) in snapshot.values.iter().enumerate() {
        let bin = (l + n - half) % n;
        let xi = snapshot.grid.freq(l);
        let (s, c) = (2.0 * PI * grid.a() * xi).sin_cos();
        buf[bin] = v * Complex64::new(c, s);
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(&mut buf));
    let dxi = snapshot.grid.step;
    Ok(buf.into_iter().map(|v| v * dxi).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference() -> SampleGrid {
        SampleGrid::reference()
    }

    #[test]
    fn constant_signal() {
        let g = reference();
        let s = dft_forward(&vec![1.0; 240], &g, 0.0).unwrap();
        let i0 = s.grid.index_of(0.0).unwrap();
        assert!((s.values[i0] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        for xi in [0.5, 1.0, 3.5, -7.0, 59.5] {
            let i = s.grid.index_of(xi).unwrap();
            assert!(s.values[i].norm() < 1e-12, "xi={xi}: {}", s.values[i]);
        }
    }

    #[test]
    fn cosine_peaks() {
        // ∫_{-1}^{1} cos(6πx) e^{-2πi·3x} dx = 1.
        let g = reference();
        let sig: Vec<f64> = g
            .points()
            .iter()
            .map(|x| (2.0 * PI * 3.0 * x).cos())
            .collect();
        let s = dft_forward(&sig, &g, 0.0).unwrap();
        for xi in [3.0, -3.0] {
            let v = s.values[s.grid.index_of(xi).unwrap()];
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12, "{v}");
        }
        let v = s.values[s.grid.index_of(2.0).unwrap()];
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn value_at_wraps_periodic_grid() {
        let g = reference();
        let sig: Vec<f64> = g.points().iter().map(|x| (x * 7.3).sin() + x).collect();
        let s = dft_forward(&sig, &g, 0.0).unwrap();
        let at_60 = s.value_at(60.0).unwrap();
        assert_eq!(at_60, s.values[0]);
        let mid = s.value_at(0.25).unwrap();
        let i = s.grid.index_of(0.0).unwrap();
        assert!((mid - (s.values[i] + s.values[i + 1]) * 0.5).norm() < 1e-14);
    }

    #[test]
    fn value_at_rejects_out_of_range() {
        let grid = FrequencyGrid::new(0.0, 1.0, 3).unwrap();
        let s = SpectralSnapshot::new(grid, vec![Complex64::new(1.0, 0.0); 3], 0.0).unwrap();
        assert!(s.value_at(2.5).is_err());
        assert!(s.value_at(2.0).is_ok());
    }

    #[test]
    fn trace_rejects_non_increasing_times() {
        let grid = FrequencyGrid::new(0.0, 1.0, 2).unwrap();
        let s0 = SpectralSnapshot::new(grid, vec![Complex64::new(1.0, 0.0); 2], 1.0).unwrap();
        let s1 = SpectralSnapshot { time: 1.0, ..s0.clone() };
        assert!(SpectralTrace::new(vec![s0, s1]).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_parseval_hermitian(
            sig in proptest::collection::vec(-5.0f64..5.0, 64),
            a in -3.0f64..3.0,
            len in 0.5f64..4.0,
        ) {
            let g = SampleGrid::new(64, a, a + len).unwrap();
            let s = dft_forward(&sig, &g, 0.0).unwrap();
            let back = dft_inverse(&s, &g).unwrap();
            let scale = sig.iter().map(|v| v.abs()).fold(1e-300, f64::max);
            for (b, v) in back.iter().zip(&sig) {
                prop_assert!((b.re - v).abs() <= 1e-10 * scale);
                prop_assert!(b.im.abs() <= 1e-10 * scale);
            }
            let lhs: f64 = sig.iter().map(|v| v * v).sum::<f64>() * g.spacing();
            let rhs = s.energy();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(1e-300));
            prop_assert!(s.hermitian_defect() <= 1e-10);
        }
    }
}
