use crate::error::{Error, Result};

/// `n` equispaced points on `[a, b)`; `b` itself is excluded so the implicit
/// periodisation of the DFT has no duplicated sample.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    n: usize,
    a: f64,
    b: f64,
    points: Vec<f64>,
}

impl SampleGrid {
    pub fn new(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("sample grid needs at least one point".into()));
        }
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidGrid(format!("need a < b, got [{a}, {b})")));
        }
        let dx = (b - a) / n as f64;
        let points = (0..n).map(|i| a + i as f64 * dx).collect();
        Ok(Self { n, a, b, points })
    }

    /// 240 points on `[-1, 1)`.
    pub fn reference() -> Self {
        Self::new(240, -1.0, 1.0).expect("valid reference grid")
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn length(&self) -> f64 {
        self.b - self.a
    }
    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Frequencies resolved by a DFT on this grid: `Δξ = 1/L`, indices
    /// `-⌊n/2⌋ ..= ⌈n/2⌉ - 1`, periodic with period `n/L`.
    pub fn frequency_grid(&self) -> FrequencyGrid {
        let step = 1.0 / self.length();
        let half = (self.n / 2) as f64;
        FrequencyGrid {
            start: -half * step,
            step,
            len: self.n,
            period: Some(self.n as f64 * step),
        }
    }
}

/// Uniform grid of frequencies `start + i·step`, `i < len`.
///
/// A DFT spectrum is periodic in `ξ`; such grids carry `period` so that values
/// just past the last frequency can be recovered by wrapping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
    pub period: Option<f64>,
}

impl FrequencyGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if len == 0 || !(step.is_finite() && step > 0.0) || !start.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "frequency grid needs len > 0 and step > 0 (start {start}, step {step}, len {len})"
            )));
        }
        Ok(Self {
            start,
            step,
            len,
            period: None,
        })
    }

    pub fn with_period(mut self, period: Option<f64>) -> Self {
        self.period = period;
        self
    }

    pub fn resolution(&self) -> f64 {
        self.step
    }

    pub fn freq(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.freq(i)).collect()
    }

    pub fn last(&self) -> f64 {
        self.freq(self.len - 1)
    }

    /// Index of `xi` if it lies on the grid (to `1e-9` of a step).
    pub fn index_of(&self, xi: f64) -> Option<usize> {
        let p = (xi - self.start) / self.step;
        let r = p.round();
        if (p - r).abs() <= 1e-9 && r >= 0.0 && (r as usize) < self.len {
            Some(r as usize)
        } else {
            None
        }
    }

    /// Highest representable frequency magnitude: `period / 2` for DFT grids.
    pub fn nyquist(&self) -> f64 {
        self.period
            .map(|p| p / 2.0)
            .unwrap_or_else(|| self.start.abs().max(self.last().abs()))
    }

    /// Same spacing and extent, ignoring periodicity.
    pub fn matches(&self, other: &FrequencyGrid) -> bool {
        self.len == other.len
            && (self.start - other.start).abs() <= 1e-9 * self.step
            && (self.step - other.step).abs() <= 1e-12 * self.step
    }
}
