use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix: `diag[i]` and `off[i] = A[i][i+1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i as isize - j as isize).abs() {
            0 => self.diag[i],
            1 => self.off[i.min(j)],
            _ => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            y[i] = v;
        }
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.len()];
        self.matvec(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    /// `self + alpha · other`.
    pub fn add_scaled(&self, alpha: f64, other: &Self) -> Self {
        Self {
            diag: self.diag.iter().zip(&other.diag).map(|(a, b)| a + alpha * b).collect(),
            off: self.off.iter().zip(&other.off).map(|(a, b)| a + alpha * b).collect(),
        }
    }
}

/// `LDLᵀ` factorisation of a symmetric positive definite tridiagonal matrix
/// (Thomas algorithm, no pivoting).
#[derive(Clone, Debug)]
pub struct TridiagFactor {
    pivots: Vec<f64>,
    lower: Vec<f64>,
    off: Vec<f64>,
}

impl TridiagFactor {
    pub fn new(a: &SymTridiag) -> Result<Self> {
        let n = a.len();
        let scale = a.diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
        let mut pivots = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let d = if i == 0 {
                a.diag[0]
            } else {
                let l = a.off[i - 1] / pivots[i - 1];
                lower.push(l);
                a.diag[i] - l * a.off[i - 1]
            };
            if !(d > tiny) {
                return Err(Error::SingularPivot { row: i, pivot: d });
            }
            pivots.push(d);
        }
        Ok(Self {
            pivots,
            lower,
            off: a.off.clone(),
        })
    }

    /// Overwrite `rhs` with the solution of `A x = rhs`.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.pivots.len();
        for i in 1..n {
            rhs[i] -= self.lower[i - 1] * rhs[i - 1];
        }
        rhs[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            rhs[i] = (rhs[i] - self.off[i] * rhs[i + 1]) / self.pivots[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_against_dense_product() {
        let a = SymTridiag {
            diag: vec![4.0, 5.0, 6.0, 3.0, 7.0],
            off: vec![1.0, -2.0, 0.5, 1.5],
        };
        let x = vec![1.0, -2.0, 3.0, 0.25, -1.0];
        let mut b = vec![0.0; 5];
        a.matvec(&x, &mut b);
        let f = TridiagFactor::new(&a).unwrap();
        f.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = SymTridiag {
            diag: vec![1.0, 1.0],
            off: vec![1.0],
        };
        assert!(matches!(
            TridiagFactor::new(&a),
            Err(Error::SingularPivot { row: 1, .. })
        ));
    }
}
