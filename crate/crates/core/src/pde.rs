//! Coefficients of the damped heat equation for the residual spectrum
//!
//! ```text
//! ∂û/∂t = div( D(ξ) ∇û ) − Λ(ξ) û
//! ```
//!
//! For activations `cos(c x)`, `sin(c x)` in input dimension `d`:
//!
//! ```text
//! Λ(ξ) = (2π/c)^d · ρ_sym(2πξ/c)
//! D(ξ) = σ_a² · c²/(4π²) · Λ(ξ)
//! ```
//!
//! with `ρ_sym(ξ) = (ρ_w(ξ) + ρ_w(−ξ))/2`. At `c = 2π` this is
//! `D = σ_a² ρ_w`, `Λ = ρ_w`. The residual is taken as `û` itself, i.e. data
//! are assumed to sample the input interval densely and uniformly.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{Density, SpectralSnapshot};

/// `(ρ(ξ) + ρ(−ξ))/2`.
#[derive(Clone)]
pub struct Symmetrized<D>(pub D);

impl<D: Density> Density for Symmetrized<D> {
    fn pdf(&self, xi: f64) -> f64 {
        0.5 * (self.0.pdf(xi) + self.0.pdf(-xi))
    }

    fn breakpoints(&self) -> Vec<f64> {
        mirrored(self.0.breakpoints())
    }
}

fn mirrored(mut pts: Vec<f64>) -> Vec<f64> {
    let neg: Vec<f64> = pts.iter().map(|p| -p).collect();
    pts.extend(neg);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

pub fn symmetrize_density<D: Density>(dist: D) -> Symmetrized<D> {
    Symmetrized(dist)
}

#[derive(Clone)]
pub struct CoefficientField {
    density: Arc<dyn Density>,
    sigma_a: f64,
    c: f64,
    d: u32,
}

impl std::fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoefficientField")
            .field("sigma_a", &self.sigma_a)
            .field("c", &self.c)
            .field("d", &self.d)
            .finish_non_exhaustive()
    }
}

impl CoefficientField {
    pub fn sigma_a(&self) -> f64 {
        self.sigma_a
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> u32 {
        self.d
    }

    /// `ρ_sym(ξ)` before frequency rescaling.
    pub fn rho_sym(&self, xi: f64) -> f64 {
        0.5 * (self.density.pdf(xi) + self.density.pdf(-xi))
    }

    /// Damping coefficient `Λ(ξ)`.
    pub fn damping(&self, xi: f64) -> f64 {
        let r = 2.0 * PI / self.c;
        r.powi(self.d as i32) * self.rho_sym(r * xi)
    }

    /// `D(ξ) / σ_a²`; the weight of the stiffness matrix.
    pub fn stiffness_weight(&self, xi: f64) -> f64 {
        self.c * self.c / (4.0 * PI * PI) * self.damping(xi)
    }

    /// Diffusion coefficient `D(ξ)`.
    pub fn diffusion(&self, xi: f64) -> f64 {
        self.sigma_a * self.sigma_a * self.stiffness_weight(xi)
    }

    /// Points in `ξ` where the coefficients jump or kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        let back = self.c / (2.0 * PI);
        mirrored(self.density.breakpoints().into_iter().map(|b| b * back).collect())
    }
}

/// Build `D` and `Λ` from `ρ_w`, `σ_a`, the activation frequency scale `c`
/// and input dimension `d`. `σ_a = 0` gives the frozen-weight equation.
pub fn build_coefficients<D: Density + 'static>(
    dist: D,
    sigma_a: f64,
    c: f64,
    d: u32,
) -> Result<CoefficientField> {
    if !(sigma_a.is_finite() && sigma_a >= 0.0) {
        return Err(Error::InvalidConfig(format!("sigma_a must be >= 0, got {sigma_a}")));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidConfig(format!("c must be > 0, got {c}")));
    }
    if d == 0 {
        return Err(Error::InvalidConfig("d must be >= 1".into()));
    }
    Ok(CoefficientField {
        density: Arc::new(dist),
        sigma_a,
        c,
        d,
    })
}

/// `û(ξ, t) = û₀(ξ) e^{−ρ_w(ξ) t}`.
pub fn frozen_solution(u0: &SpectralSnapshot, dist: &dyn Density, t: f64) -> Result<SpectralSnapshot> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidConfig(format!("time must be >= 0, got {t}")));
    }
    let values = u0
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v * (-dist.pdf(u0.grid.freq(i)) * t).exp())
        .collect();
    SpectralSnapshot::new(u0.grid, values, u0.time + t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{DistributionSpec, FrequencyGrid};
    use num_complex::Complex64;

    const TWO_PI: f64 = 2.0 * PI;

    #[test]
    fn symmetrize_even_is_identity() {
        let d = DistributionSpec::normal(3.0).unwrap();
        let s = symmetrize_density(d.clone());
        for i in 0..50 {
            let xi = -6.0 + 0.25 * i as f64;
            assert_eq!(s.pdf(xi), d.pdf(xi));
        }
    }

    #[test]
    fn symmetrize_one_sided() {
        let r = 4.0;
        let d = DistributionSpec::tabulated(vec![0.0, r], vec![1.0 / r, 1.0 / r]).unwrap();
        let s = symmetrize_density(d);
        for xi in [-3.9, -1.0, 0.5, 3.9] {
            assert!((s.pdf(xi) - 0.5 / r).abs() < 1e-15);
        }
        assert_eq!(s.pdf(4.1), 0.0);
    }

    #[test]
    fn symmetrized_is_even() {
        let d = DistributionSpec::tabulated(vec![-1.0, 0.5, 2.0], vec![0.2 / 1.5, 0.6, 0.0]).unwrap();
        let s = symmetrize_density(d);
        for i in 0..80 {
            let xi = -3.0 + 0.075 * i as f64;
            assert_eq!(s.pdf(xi) - s.pdf(-xi), 0.0);
        }
    }

    #[test]
    fn reference_scale_reproduces_equation() {
        let d = DistributionSpec::normal(5.0).unwrap();
        let f = build_coefficients(d.clone(), 0.1, TWO_PI, 1).unwrap();
        for xi in [0.0, 1.0, -7.5] {
            assert!((f.diffusion(xi) - 0.01 * d.pdf(xi)).abs() < 1e-18);
            assert!((f.damping(xi) - d.pdf(xi)).abs() < 1e-18);
        }
        // Dimension drops out at c = 2π.
        let f3 = build_coefficients(d.clone(), 0.1, TWO_PI, 3).unwrap();
        assert!((f3.damping(2.0) - d.pdf(2.0)).abs() < 1e-18);
    }

    #[test]
    fn zero_sigma_is_frozen_regime() {
        let d = DistributionSpec::uniform(2.0).unwrap();
        let f = build_coefficients(d.clone(), 0.0, TWO_PI, 1).unwrap();
        assert_eq!(f.diffusion(0.3), 0.0);
        assert_eq!(f.damping(0.3), d.pdf(0.3));
    }

    #[test]
    fn half_frequency_scale_doubles_damping() {
        // Λ(0) = (2π/π)·ρ(0) = 2/√(2π) ≈ 0.7979
        let f = build_coefficients(DistributionSpec::normal(1.0).unwrap(), 1.0, PI, 1).unwrap();
        let expected = 2.0 / TWO_PI.sqrt();
        assert!((f.damping(0.0) - expected).abs() < 1e-15);
        assert!((f.damping(0.0) - 0.7979).abs() < 1e-4);
    }

    #[test]
    fn diffusion_damping_identity_and_evenness() {
        let d = DistributionSpec::tabulated(vec![-1.0, 0.0, 3.0], vec![0.8, 0.3, 0.0]).unwrap();
        for c in [1.0, PI, TWO_PI, 9.0] {
            let f = build_coefficients(d.clone(), 0.7, c, 2).unwrap();
            for i in 0..60 {
                let xi = -5.0 + 0.17 * i as f64;
                let lhs = f.diffusion(xi);
                let rhs = 0.49 * f.damping(xi) * c * c / (4.0 * PI * PI);
                assert!((lhs - rhs).abs() <= 1e-14 * rhs.abs().max(1e-300));
                assert_eq!(f.damping(xi), f.damping(-xi));
                assert!(f.damping(xi) >= 0.0);
            }
        }
    }

    #[test]
    fn breakpoints_rescale_with_c() {
        let d = DistributionSpec::uniform(10.0).unwrap();
        let f = build_coefficients(d, 1.0, PI, 1).unwrap();
        assert_eq!(f.breakpoints(), vec![-5.0, 5.0]);
    }

    fn snapshot(values: Vec<Complex64>) -> SpectralSnapshot {
        let n = values.len();
        let grid = FrequencyGrid::new(-(n as f64 / 2.0), 1.0, n).unwrap();
        SpectralSnapshot::new(grid, values, 0.0).unwrap()
    }

    #[test]
    fn frozen_solution_examples() {
        let d = DistributionSpec::uniform(10.0).unwrap();
        let u0 = snapshot(vec![Complex64::new(1.0, 0.0); 30]);
        let same = frozen_solution(&u0, &d, 0.0).unwrap();
        assert_eq!(same.values, u0.values);

        let later = frozen_solution(&u0, &d, 20.0).unwrap();
        let i0 = later.grid.index_of(0.0).unwrap();
        assert!((later.values[i0].re - (-1f64).exp()).abs() < 1e-15);
        let i11 = later.grid.index_of(11.0).unwrap();
        assert_eq!(later.values[i11], u0.values[i11]);
        assert!(frozen_solution(&u0, &d, -1.0).is_err());
    }

    #[test]
    fn frozen_solution_semigroup() {
        let d = DistributionSpec::normal(4.0).unwrap();
        let u0 = snapshot((0..40).map(|i| Complex64::new(i as f64 * 0.1 - 2.0, 0.3)).collect());
        let two = frozen_solution(&frozen_solution(&u0, &d, 1.7).unwrap(), &d, 2.9).unwrap();
        let one = frozen_solution(&u0, &d, 4.6).unwrap();
        for (a, b) in two.values.iter().zip(&one.values) {
            assert!((a - b).norm() <= 1e-12 * b.norm());
        }
    }
}
