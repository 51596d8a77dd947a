//! Piecewise-linear finite elements for the damped heat equation on an
//! interval, homogeneous Neumann boundary, backward-Euler time stepping:
//!
//! ```text
//! (L + dt σ_a² M + dt N) c_{k+1} = L c_k
//! L_ij = ∫ φ_i φ_j,   M_ij = ∫ s(ξ) φ_i' φ_j',   N_ij = ∫ Λ(ξ) φ_i φ_j
//! ```
//!
//! `s = D/σ_a²` and `Λ` come from a [`CoefficientField`]. The Neumann
//! condition is natural: no boundary terms are assembled. Real and imaginary
//! parts of the spectrum are advanced independently with one factorisation.

mod quadrature;
mod tridiag;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pde::CoefficientField;
use crate::spectral::{FrequencyGrid, SpectralSnapshot, SpectralTrace};
pub use quadrature::GAUSS_LEGENDRE_4;
pub use tridiag::{SymTridiag, TridiagFactor};

/// Uniform mesh `a = ξ_0 < ξ_1 < … < ξ_n = b`.
#[derive(Clone, Debug, PartialEq)]
pub struct FemMesh {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub nodes: Vec<f64>,
}

impl FemMesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn frequency_grid(&self) -> FrequencyGrid {
        FrequencyGrid {
            start: self.a,
            step: self.h,
            len: self.nodes.len(),
            period: None,
        }
    }
}

/// Uniform mesh on `[a, b]` with element size `h`; `(b - a)/h` must be an
/// integer.
pub fn build_mesh(a: f64, b: f64, h: f64) -> Result<FemMesh> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidMesh(format!("need a < b, got ({a}, {b})")));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidMesh(format!("element size must be positive, got {h}")));
    }
    let ratio = (b - a) / h;
    let elements = ratio.round();
    if (ratio - elements).abs() > 1e-9 * ratio.max(1.0) || elements < 1.0 {
        return Err(Error::InvalidMesh(format!(
            "(b - a)/h = {ratio} is not a positive integer"
        )));
    }
    let elements = elements as usize;
    let mut nodes: Vec<f64> = (0..=elements).map(|i| a + i as f64 * h).collect();
    nodes[elements] = b;
    Ok(FemMesh { a, b, h, nodes })
}

/// Nodal coefficients of `û ≈ Σ c_j φ_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct FemState {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub time: f64,
}

impl FemState {
    pub fn zeros(n: usize) -> Self {
        Self {
            re: vec![0.0; n],
            im: vec![0.0; n],
            time: 0.0,
        }
    }

    pub fn to_snapshot(&self, mesh: &FemMesh) -> SpectralSnapshot {
        SpectralSnapshot {
            grid: mesh.frequency_grid(),
            values: self
                .re
                .iter()
                .zip(&self.im)
                .map(|(&r, &i)| Complex64::new(r, i))
                .collect(),
            time: self.time,
        }
    }
}

/// Nodal interpolation of `u0` onto `mesh`.
pub fn project_initial(u0: &SpectralSnapshot, mesh: &FemMesh) -> Result<FemState> {
    let mut state = FemState::zeros(mesh.len());
    for (j, &xi) in mesh.nodes.iter().enumerate() {
        let v = u0.value_at(xi)?;
        state.re[j] = v.re;
        state.im[j] = v.im;
    }
    state.time = u0.time;
    Ok(state)
}

/// Assembled matrices and the factored implicit operator for one `dt`.
#[derive(Clone, Debug)]
pub struct FemSystem {
    pub mesh: FemMesh,
    pub coefficients: CoefficientField,
    /// Mass matrix.
    pub l: SymTridiag,
    /// Weighted stiffness matrix (without `σ_a²`).
    pub m: SymTridiag,
    /// Weighted mass matrix.
    pub n: SymTridiag,
    pub dt: f64,
    factor: TridiagFactor,
}

/// Assemble `L`, `M`, `N` on `mesh` and factor `L + dt σ_a² M + dt N`.
///
/// `L` uses the exact P1 element matrix. `M` and `N` use 4-point
/// Gauss–Legendre on each element, split at the coefficient breakpoints so a
/// jump in `ρ_w` is integrated exactly.
pub fn assemble(mesh: &FemMesh, coeffs: &CoefficientField, dt: f64) -> Result<FemSystem> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    let n_nodes = mesh.len();
    let mut l = SymTridiag::zeros(n_nodes);
    let mut m = SymTridiag::zeros(n_nodes);
    let mut n = SymTridiag::zeros(n_nodes);
    let breaks = coeffs.breakpoints();

    for e in 0..n_nodes - 1 {
        let (x0, x1) = (mesh.nodes[e], mesh.nodes[e + 1]);
        let h = x1 - x0;

        l.diag[e] += h / 3.0;
        l.diag[e + 1] += h / 3.0;
        l.off[e] += h / 6.0;

        let mut cuts = vec![x0];
        cuts.extend(breaks.iter().copied().filter(|&p| p > x0 && p < x1));
        cuts.push(x1);

        let (mut stiff, mut n00, mut n01, mut n11) = (0.0, 0.0, 0.0, 0.0);
        for w in cuts.windows(2) {
            let (p, q) = (w[0], w[1]);
            let mid = 0.5 * (p + q);
            let half = 0.5 * (q - p);
            for &(t, wt) in GAUSS_LEGENDRE_4.iter() {
                let xi = mid + half * t;
                let wq = wt * half;
                let phi0 = (x1 - xi) / h;
                let phi1 = (xi - x0) / h;
                let lam = coeffs.damping(xi);
                stiff += wq * coeffs.stiffness_weight(xi);
                n00 += wq * lam * phi0 * phi0;
                n01 += wq * lam * phi0 * phi1;
                n11 += wq * lam * phi1 * phi1;
            }
        }
        let k = stiff / (h * h);
        m.diag[e] += k;
        m.diag[e + 1] += k;
        m.off[e] -= k;
        n.diag[e] += n00;
        n.diag[e + 1] += n11;
        n.off[e] += n01;
    }

    let s2 = coeffs.sigma_a() * coeffs.sigma_a();
    let a = l.add_scaled(dt * s2, &m).add_scaled(dt, &n);
    let factor = TridiagFactor::new(&a)?;
    Ok(FemSystem {
        mesh: mesh.clone(),
        coefficients: coeffs.clone(),
        l,
        m,
        n,
        dt,
        factor,
    })
}

impl FemSystem {
    /// `cᵀ L c` summed over real and imaginary parts.
    pub fn energy(&self, state: &FemState) -> f64 {
        self.l.quadratic_form(&state.re) + self.l.quadratic_form(&state.im)
    }

    /// One backward-Euler step.
    pub fn step(&self, state: &FemState, dt: f64) -> Result<FemState> {
        if (dt - self.dt).abs() > 1e-12 * self.dt {
            return Err(Error::StepMismatch {
                expected: self.dt,
                got: dt,
            });
        }
        let n = self.mesh.len();
        if state.re.len() != n || state.im.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: state.re.len(),
            });
        }
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        self.l.matvec(&state.re, &mut re);
        self.l.matvec(&state.im, &mut im);
        self.factor.solve_in_place(&mut re);
        self.factor.solve_in_place(&mut im);
        Ok(FemState {
            re,
            im,
            time: state.time + self.dt,
        })
    }

    /// Advance `n_steps`, recording the initial state, every
    /// `snapshot_every`-th step and the final step.
    pub fn evolve(&self, state0: &FemState, n_steps: usize, snapshot_every: usize) -> Result<SpectralTrace> {
        if n_steps == 0 {
            return Err(Error::InvalidConfig("n_steps must be at least 1".into()));
        }
        if snapshot_every == 0 {
            return Err(Error::InvalidConfig("snapshot_every must be at least 1".into()));
        }
        let mut snapshots = vec![state0.to_snapshot(&self.mesh)];
        let mut state = state0.clone();
        for k in 1..=n_steps {
            state = self.step(&state, self.dt)?;
            if k % snapshot_every == 0 || k == n_steps {
                snapshots.push(state.to_snapshot(&self.mesh));
            }
        }
        SpectralTrace::new(snapshots)
    }
}

pub fn step(system: &FemSystem, state: &FemState, dt: f64) -> Result<FemState> {
    system.step(state, dt)
}

pub fn evolve(system: &FemSystem, state0: &FemState, n_steps: usize, snapshot_every: usize) -> Result<SpectralTrace> {
    system.evolve(state0, n_steps, snapshot_every)
}
