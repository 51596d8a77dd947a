use std::f64::consts::PI;

use super::rng::{streams, SeededStream};
use crate::error::{Error, Result};

/// Tolerance on the trapezoid integral of a tabulated density.
pub const TABULATED_NORM_TOL: f64 = 1e-6;

/// A pointwise nonnegative weight on the frequency axis.
///
/// Probability densities implement it, but so do the unnormalised weights
/// used to drive the finite-element solver (see [`ConstantDensity`]).
pub trait Density: Send + Sync {
    fn pdf(&self, xi: f64) -> f64;

    /// Points where the weight jumps or has a kink. Quadrature splits
    /// elements there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Distribution of the first-layer frequencies `w_k`, in cycles per unit.
#[derive(Clone, Debug, PartialEq)]
pub enum DistributionSpec {
    Normal { sigma: f64 },
    Uniform { half_width: f64 },
    /// Piecewise-linear density through `(nodes[i], densities[i])`, zero
    /// outside `[nodes[0], nodes[last]]`.
    Tabulated { nodes: Vec<f64>, densities: Vec<f64> },
}

impl DistributionSpec {
    pub fn normal(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "normal sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(Self::Normal { sigma })
    }

    pub fn uniform(half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "uniform half-width must be positive and finite, got {half_width}"
            )));
        }
        Ok(Self::Uniform { half_width })
    }

    pub fn tabulated(nodes: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        if nodes.len() != densities.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} nodes but {} densities",
                nodes.len(),
                densities.len()
            )));
        }
        if nodes.len() < 2 {
            return Err(Error::InvalidDistribution(
                "tabulated density needs at least two nodes".into(),
            ));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidDistribution(
                "tabulated nodes must be finite and strictly increasing".into(),
            ));
        }
        if densities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidDistribution(
                "tabulated densities must be finite and nonnegative".into(),
            ));
        }
        let mass = trapezoid(&nodes, &densities);
        if (mass - 1.0).abs() > TABULATED_NORM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "tabulated density integrates to {mass}, not 1"
            )));
        }
        Ok(Self::Tabulated { nodes, densities })
    }

    /// Variance of the distribution (second moment about zero is not assumed).
    pub fn variance(&self) -> f64 {
        match self {
            Self::Normal { sigma } => sigma * sigma,
            Self::Uniform { half_width } => half_width * half_width / 3.0,
            Self::Tabulated { nodes, densities } => {
                // Exact moments of the piecewise-linear density.
                let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
                for i in 0..nodes.len() - 1 {
                    let (x0, x1) = (nodes[i], nodes[i + 1]);
                    let (p0, p1) = (densities[i], densities[i + 1]);
                    let h = x1 - x0;
                    m0 += h * (p0 + p1) / 2.0;
                    m1 += h * (p0 * (2.0 * x0 + x1) + p1 * (x0 + 2.0 * x1)) / 6.0;
                    m2 += h
                        * (p0 * (3.0 * x0 * x0 + 2.0 * x0 * x1 + x1 * x1)
                            + p1 * (x0 * x0 + 2.0 * x0 * x1 + 3.0 * x1 * x1))
                        / 12.0;
                }
                let mean = m1 / m0;
                m2 / m0 - mean * mean
            }
        }
    }

    /// Short identifier usable in file names.
    pub fn label(&self) -> String {
        match self {
            Self::Normal { sigma } => format!("normal_sigma_{}", compact(*sigma)),
            Self::Uniform { half_width } => format!("uniform_r_{}", compact(*half_width)),
            Self::Tabulated { nodes, .. } => format!("tabulated_{}", nodes.len()),
        }
    }

    pub fn is_even(&self) -> bool {
        match self {
            Self::Normal { .. } | Self::Uniform { .. } => true,
            Self::Tabulated { nodes, .. } => {
                let n = nodes.len();
                (0..n).all(|i| (self.pdf(nodes[i]) - self.pdf(-nodes[i])).abs() == 0.0)
                    && (0..n).all(|i| (nodes[i] + nodes[n - 1 - i]).abs() <= 1e-12)
            }
        }
    }
}

fn compact(v: f64) -> String {
    format!("{v:.4}").trim_end_matches('0').trim_end_matches('.').replace('.', "p")
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) / 2.0)
        .sum()
}

impl Density for DistributionSpec {
    fn pdf(&self, xi: f64) -> f64 {
        match self {
            Self::Normal { sigma } => {
                let z = xi / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
            }
            Self::Uniform { half_width } => {
                if xi.abs() <= *half_width {
                    0.5 / half_width
                } else {
                    0.0
                }
            }
            Self::Tabulated { nodes, densities } => {
                let n = nodes.len();
                if !(xi >= nodes[0] && xi <= nodes[n - 1]) {
                    return 0.0;
                }
                let j = nodes.partition_point(|&x| x <= xi).clamp(1, n - 1);
                let (x0, x1) = (nodes[j - 1], nodes[j]);
                let t = (xi - x0) / (x1 - x0);
                densities[j - 1] * (1.0 - t) + densities[j] * t
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Normal { .. } => Vec::new(),
            Self::Uniform { half_width } => vec![-half_width, *half_width],
            Self::Tabulated { nodes, .. } => nodes.clone(),
        }
    }
}

/// Constant weight `level` on the whole line. Not a probability density; used
/// as a finite-element coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantDensity(pub f64);

impl Density for ConstantDensity {
    fn pdf(&self, _xi: f64) -> f64 {
        self.0
    }
}

impl<D: Density + ?Sized> Density for std::sync::Arc<D> {
    fn pdf(&self, xi: f64) -> f64 {
        (**self).pdf(xi)
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
}

/// Evaluate `ρ_w(ξ)`.
pub fn pdf_eval(dist: &DistributionSpec, xi: f64) -> f64 {
    dist.pdf(xi)
}

/// Draw `m` i.i.d. frequencies from `dist` on the [`streams::FREQUENCIES`]
/// stream of `seed`.
pub fn sample_weights(dist: &DistributionSpec, m: usize, seed: u64) -> Vec<f64> {
    let mut rng = SeededStream::new(seed, streams::FREQUENCIES);
    sample_from(dist, m, &mut rng)
}

pub(crate) fn sample_from(dist: &DistributionSpec, m: usize, rng: &mut SeededStream) -> Vec<f64> {
    match dist {
        DistributionSpec::Normal { sigma } => (0..m).map(|_| rng.normal(0.0, *sigma)).collect(),
        DistributionSpec::Uniform { half_width } => (0..m)
            .map(|_| half_width * (2.0 * rng.uniform() - 1.0))
            .collect(),
        DistributionSpec::Tabulated { nodes, densities } => {
            let sampler = InverseCdf::new(nodes, densities);
            (0..m).map(|_| sampler.sample(rng.uniform())).collect()
        }
    }
}

/// Inverse CDF of a piecewise-linear density.
struct InverseCdf<'a> {
    nodes: &'a [f64],
    densities: &'a [f64],
    cumulative: Vec<f64>,
}

impl<'a> InverseCdf<'a> {
    fn new(nodes: &'a [f64], densities: &'a [f64]) -> Self {
        let mut cumulative = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 0..nodes.len() - 1 {
            acc += (nodes[i + 1] - nodes[i]) * (densities[i] + densities[i + 1]) / 2.0;
            cumulative.push(acc);
        }
        Self {
            nodes,
            densities,
            cumulative,
        }
    }

    fn sample(&self, u: f64) -> f64 {
        let total = *self.cumulative.last().unwrap();
        let target = u * total;
        let n = self.nodes.len();
        let j = self
            .cumulative
            .partition_point(|&c| c <= target)
            .clamp(1, n - 1);
        let (x0, x1) = (self.nodes[j - 1], self.nodes[j]);
        let (p0, p1) = (self.densities[j - 1], self.densities[j]);
        let rem = target - self.cumulative[j - 1];
        let slope = (p1 - p0) / (x1 - x0);
        // Solve p0 t + slope t²/2 = rem in the cancellation-free form.
        let disc = (p0 * p0 + 2.0 * slope * rem).max(0.0);
        let denom = p0 + disc.sqrt();
        let t = if denom > 0.0 { 2.0 * rem / denom } else { 0.0 };
        (x0 + t).min(x1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_pdf_values() {
        let d = DistributionSpec::uniform(10.0).unwrap();
        assert_eq!(d.pdf(0.0), 0.05);
        assert_eq!(d.pdf(10.0), 0.05);
        assert_eq!(d.pdf(11.0), 0.0);
        assert_eq!(d.pdf(-11.0), 0.0);
    }

    #[test]
    fn normal_pdf_at_zero() {
        // 1/(σ√(2π)) with σ = 300/(2π) is 2π/(300√(2π)) = √(2π)/300.
        let sigma = 300.0 / (2.0 * PI);
        let d = DistributionSpec::normal(sigma).unwrap();
        let expected = (2.0 * PI).sqrt() / 300.0;
        assert_relative_eq!(d.pdf(0.0), expected, max_relative = 1e-15);
        assert_relative_eq!(d.pdf(0.0), 8.355_427_582_103_336e-3, max_relative = 1e-14);
    }

    #[test]
    fn normal_and_uniform_are_even() {
        let ds = [
            DistributionSpec::normal(3.3).unwrap(),
            DistributionSpec::uniform(2.5).unwrap(),
        ];
        for d in &ds {
            for i in 0..200 {
                let xi = -7.0 + 0.0731 * i as f64;
                assert_eq!(d.pdf(xi), d.pdf(-xi));
            }
        }
    }

    #[test]
    fn tabulated_validation() {
        assert!(DistributionSpec::tabulated(vec![0.0, 1.0], vec![1.0, 1.0]).is_ok());
        assert!(DistributionSpec::tabulated(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(DistributionSpec::tabulated(vec![1.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(DistributionSpec::tabulated(vec![0.0, 1.0], vec![-1.0, 3.0]).is_err());
        assert!(DistributionSpec::tabulated(vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn tabulated_outside_range_is_zero() {
        let d = DistributionSpec::tabulated(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(d.pdf(-0.1), 0.0);
        assert_eq!(d.pdf(2.1), 0.0);
        assert_eq!(d.pdf(1.0), 0.5);
    }

    #[test]
    fn tabulated_interpolates_linearly() {
        let d = DistributionSpec::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(d.pdf(0.25), 0.25);
        assert_relative_eq!(d.pdf(1.5), 0.5);
        assert_relative_eq!(d.variance(), 1.0 / 6.0, epsilon = 1e-14);
    }

    #[test]
    fn uniform_samples_in_support() {
        let d = DistributionSpec::uniform(1.0).unwrap();
        let xs = sample_weights(&d, 100_000, 9);
        assert!(xs.iter().all(|x| (-1.0..=1.0).contains(x)));
    }

    #[test]
    fn normal_sample_variance() {
        let d = DistributionSpec::normal(1.0).unwrap();
        let xs = sample_weights(&d, 100_000, 7);
        // Independent two-pass statistics.
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        assert!((var - 1.0).abs() < 0.02, "variance {var}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = DistributionSpec::normal(2.0).unwrap();
        assert_eq!(sample_weights(&d, 1000, 42), sample_weights(&d, 1000, 42));
        assert_ne!(sample_weights(&d, 1000, 42), sample_weights(&d, 1000, 43));
    }

    #[test]
    fn tabulated_sampling_matches_density() {
        // Triangle on [0, 2]: mean 1, variance 1/6.
        let d = DistributionSpec::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        let xs = sample_weights(&d, 200_000, 1);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        assert!((mean - 1.0).abs() < 5e-3);
        assert!((var - 1.0 / 6.0).abs() < 5e-3);
        assert!(xs.iter().all(|x| (0.0..=2.0).contains(x)));
    }
}
