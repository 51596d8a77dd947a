use std::f64::consts::PI;

use crate::spectral::SampleGrid;

/// Rows between exact `sin_cos` re-anchors of the feature recurrence.
const ANCHOR_EVERY: usize = 48;

/// Parameters of the two-layer Fourier-features network
/// `f(x) = 1/√(2m) Σ_k [a_k cos(2π w_k x) + b_k sin(2π w_k x)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub w: Vec<f64>,
    /// When set, `w` is not trained and its gradient is reported as zero.
    pub frozen_w: bool,
}

impl NetworkParams {
    pub fn new(a: Vec<f64>, b: Vec<f64>, w: Vec<f64>, frozen_w: bool) -> Self {
        assert!(
            a.len() == b.len() && b.len() == w.len(),
            "a, b, w must have equal length"
        );
        Self { a, b, w, frozen_w }
    }

    pub fn zeros_like(&self) -> Self {
        let m = self.m();
        Self::new(vec![0.0; m], vec![0.0; m], vec![0.0; m], self.frozen_w)
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    fn scale(&self) -> f64 {
        1.0 / (2.0 * self.m() as f64).sqrt()
    }

    pub fn forward(&self, x: f64) -> f64 {
        let s: f64 = self
            .a
            .iter()
            .zip(&self.b)
            .zip(&self.w)
            .map(|((a, b), w)| {
                let (sn, cs) = (2.0 * PI * w * x).sin_cos();
                a * cs + b * sn
            })
            .sum();
        s * self.scale()
    }

    /// Outputs on every grid point, via the same feature sweep used in training.
    pub fn forward_grid(&self, grid: &SampleGrid) -> Vec<f64> {
        let mut out = Vec::with_capacity(grid.n());
        let scale = self.scale();
        FeatureSweep::new(&self.w, grid).run(|_, c, s| {
            let f = scale * dot2(&self.a, c, &self.b, s);
            out.push(f);
        });
        out
    }

    /// Risk `1/(2N) Σ (f(x_i) - y_i)²`, its gradient, and the residuals
    /// `f(x_i) - y_i`.
    pub fn loss_grad_residual(&self, grid: &SampleGrid, targets: &[f64]) -> (f64, Self, Vec<f64>) {
        assert_eq!(targets.len(), grid.n(), "one target per grid point");
        let m = self.m();
        let n = grid.n();
        let scale = self.scale();
        let train_w = !self.frozen_w;

        let mut ga = vec![0.0; m];
        let mut gb = vec![0.0; m];
        let (mut gwc, mut gws) = if train_w {
            (vec![0.0; m], vec![0.0; m])
        } else {
            (Vec::new(), Vec::new())
        };
        let mut residuals = Vec::with_capacity(n);
        let mut sq = 0.0;
        let points = grid.points();

        FeatureSweep::new(&self.w, grid).run(|i, c, s| {
            let f = scale * dot2(&self.a, c, &self.b, s);
            let r = f - targets[i];
            residuals.push(r);
            sq += r * r;
            axpy2(r, c, &mut ga, s, &mut gb);
            if train_w {
                axpy2(r * points[i], c, &mut gwc, s, &mut gws);
            }
        });

        let g = scale / n as f64;
        ga.iter_mut().for_each(|v| *v *= g);
        gb.iter_mut().for_each(|v| *v *= g);
        let gw = if train_w {
            (0..m)
                .map(|k| 2.0 * PI * g * (self.b[k] * gwc[k] - self.a[k] * gws[k]))
                .collect()
        } else {
            vec![0.0; m]
        };
        let grad = Self::new(ga, gb, gw, self.frozen_w);
        (sq / (2.0 * n as f64), grad, residuals)
    }

    /// `self += alpha · other`, skipping `w` when frozen.
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        for (p, g) in self.a.iter_mut().zip(&other.a) {
            *p += alpha * g;
        }
        for (p, g) in self.b.iter_mut().zip(&other.b) {
            *p += alpha * g;
        }
        if !self.frozen_w {
            for (p, g) in self.w.iter_mut().zip(&other.w) {
                *p += alpha * g;
            }
        }
    }

    /// Parameters flattened as `[a, b, w]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(3 * self.m());
        v.extend_from_slice(&self.a);
        v.extend_from_slice(&self.b);
        v.extend_from_slice(&self.w);
        v
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        let m = self.m();
        assert_eq!(flat.len(), 3 * m);
        self.a.copy_from_slice(&flat[..m]);
        self.b.copy_from_slice(&flat[m..2 * m]);
        self.w.copy_from_slice(&flat[2 * m..]);
    }
}

/// Walks a uniform grid and yields, for each point `x_i`, the rows
/// `cos(2π w_k x_i)` and `sin(2π w_k x_i)` over `k`.
///
/// Consecutive rows differ by a fixed rotation per `k`, so most rows are one
/// complex multiply away from the previous one; every [`ANCHOR_EVERY`] rows
/// are recomputed exactly to bound drift.
pub(crate) struct FeatureSweep<'a> {
    w: &'a [f64],
    points: &'a [f64],
    rot_c: Vec<f64>,
    rot_s: Vec<f64>,
}

impl<'a> FeatureSweep<'a> {
    pub(crate) fn new(w: &'a [f64], grid: &'a SampleGrid) -> Self {
        let dx = grid.spacing();
        let (rot_s, rot_c) = w.iter().map(|wk| (2.0 * PI * wk * dx).sin_cos()).unzip();
        Self {
            w,
            points: grid.points(),
            rot_c,
            rot_s,
        }
    }

    pub(crate) fn run(&self, mut visit: impl FnMut(usize, &[f64], &[f64])) {
        let m = self.w.len();
        let mut c = vec![0.0; m];
        let mut s = vec![0.0; m];
        for (i, &x) in self.points.iter().enumerate() {
            if i % ANCHOR_EVERY == 0 {
                for k in 0..m {
                    let (sn, cs) = (2.0 * PI * self.w[k] * x).sin_cos();
                    c[k] = cs;
                    s[k] = sn;
                }
            } else {
                for (((ck, sk), rc), rs) in c.iter_mut().zip(s.iter_mut()).zip(&self.rot_c).zip(&self.rot_s) {
                    let (c0, s0) = (*ck, *sk);
                    *ck = c0 * rc - s0 * rs;
                    *sk = s0 * rc + c0 * rs;
                }
            }
            visit(i, &c, &s);
        }
    }
}

/// `Σ a_k c_k + b_k s_k` with independent partial sums so the loop vectorises.
pub(crate) fn dot2(a: &[f64], c: &[f64], b: &[f64], s: &[f64]) -> f64 {
    const LANES: usize = 8;
    let n = a.len();
    let split = n - n % LANES;
    let mut acc = [0.0f64; LANES];
    for (((ac, cc), bc), sc) in a[..split]
        .chunks_exact(LANES)
        .zip(c[..split].chunks_exact(LANES))
        .zip(b[..split].chunks_exact(LANES))
        .zip(s[..split].chunks_exact(LANES))
    {
        for l in 0..LANES {
            acc[l] += ac[l] * cc[l] + bc[l] * sc[l];
        }
    }
    let mut tail = 0.0;
    for k in split..n {
        tail += a[k] * c[k] + b[k] * s[k];
    }
    acc.iter().sum::<f64>() + tail
}

/// `y1 += alpha·x1; y2 += alpha·x2`.
fn axpy2(alpha: f64, x1: &[f64], y1: &mut [f64], x2: &[f64], y2: &mut [f64]) {
    for (y, x) in y1.iter_mut().zip(x1) {
        *y += alpha * x;
    }
    for (y, x) in y2.iter_mut().zip(x2) {
        *y += alpha * x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_dc_feature_is_one() {
        let p = NetworkParams::new(vec![2f64.sqrt()], vec![0.0], vec![0.0], false);
        for x in [-1.0, 0.0, 0.37, 5.0] {
            assert!((p.forward(x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_feature_example() {
        let p = NetworkParams::new(vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 2.0], false);
        // (1/2)[cos(π/2) + sin(π)] = 0
        assert!(p.forward(0.25).abs() < 1e-15);
    }

    #[test]
    fn output_is_linear_in_ab() {
        let p = NetworkParams::new(vec![0.3, -1.2, 0.7], vec![0.5, 0.1, -0.4], vec![0.2, 3.1, -7.0], false);
        let mut q = p.clone();
        q.a.iter_mut().for_each(|v| *v *= 2.0);
        q.b.iter_mut().for_each(|v| *v *= 2.0);
        for x in [-0.9, 0.1, 0.55] {
            assert!((q.forward(x) - 2.0 * p.forward(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn sweep_matches_direct_evaluation() {
        let grid = SampleGrid::reference();
        let m = 37;
        let w: Vec<f64> = (0..m).map(|k| (k as f64 * 1.37 - 20.0) * 2.3).collect();
        let a: Vec<f64> = (0..m).map(|k| ((k * 7 % 11) as f64 - 5.0) / 5.0).collect();
        let b: Vec<f64> = (0..m).map(|k| ((k * 3 % 13) as f64 - 6.0) / 6.0).collect();
        let p = NetworkParams::new(a, b, w, false);
        let fast = p.forward_grid(&grid);
        for (x, f) in grid.points().iter().zip(&fast) {
            assert!((p.forward(*x) - f).abs() < 1e-12);
        }
    }

    #[test]
    fn dot2_handles_tails() {
        let a: Vec<f64> = (0..13).map(|v| v as f64).collect();
        let ones = vec![1.0; 13];
        let zeros = vec![0.0; 13];
        assert_eq!(dot2(&a, &ones, &zeros, &zeros), 78.0);
    }
}
