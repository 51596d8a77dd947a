use std::f64::consts::PI;

use ndarray::{Array1, Array2, Axis, Zip};

use crate::spectral::SampleGrid;

/// FF network with ReLU hidden layers on top of the Fourier features:
///
/// ```text
/// φ(x)  = [cos(2π w x), sin(2π w x)]                 (2m)
/// z_1   = W_1 φ / √(2m),   h_l = relu(z_l)
/// z_l   = W_l h_{l-1} / √H
/// f(x)  = v · h_L / √H
/// ```
///
/// All matrices are stored unscaled (standard-normal at init); the `1/√fan_in`
/// factors live in the forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct MultilayerParams {
    pub w: Vec<f64>,
    /// `hidden[0]` is `H × 2m`, the rest `H × H`.
    pub hidden: Vec<Array2<f64>>,
    pub head: Array1<f64>,
    pub frozen_w: bool,
}

struct Activations {
    features: Array2<f64>,
    pre: Vec<Array2<f64>>,
    post: Vec<Array2<f64>>,
    out: Array1<f64>,
}

impl MultilayerParams {
    pub fn m(&self) -> usize {
        self.w.len()
    }

    pub fn width(&self) -> usize {
        self.head.len()
    }

    /// Number of weight layers including the Fourier layer and the head.
    pub fn depth(&self) -> usize {
        self.hidden.len() + 2
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            w: vec![0.0; self.m()],
            hidden: self.hidden.iter().map(|h| Array2::zeros(h.raw_dim())).collect(),
            head: Array1::zeros(self.width()),
            frozen_w: self.frozen_w,
        }
    }

    fn features(&self, points: &[f64]) -> Array2<f64> {
        let m = self.m();
        let mut phi = Array2::zeros((points.len(), 2 * m));
        for (i, &x) in points.iter().enumerate() {
            for k in 0..m {
                let (s, c) = (2.0 * PI * self.w[k] * x).sin_cos();
                phi[[i, k]] = c;
                phi[[i, m + k]] = s;
            }
        }
        phi
    }

    fn activations(&self, points: &[f64]) -> Activations {
        let features = self.features(points);
        let mut pre = Vec::with_capacity(self.hidden.len());
        let mut post: Vec<Array2<f64>> = Vec::with_capacity(self.hidden.len());
        for (l, weights) in self.hidden.iter().enumerate() {
            let input = if l == 0 { &features } else { &post[l - 1] };
            let fan_in = weights.ncols() as f64;
            let z = input.dot(&weights.t()) / fan_in.sqrt();
            let h = z.mapv(|v| v.max(0.0));
            pre.push(z);
            post.push(h);
        }
        let out = post.last().expect("at least one hidden layer").dot(&self.head)
            / (self.width() as f64).sqrt();
        Activations {
            features,
            pre,
            post,
            out,
        }
    }

    pub fn forward(&self, x: f64) -> f64 {
        self.activations(&[x]).out[0]
    }

    pub fn forward_grid(&self, grid: &SampleGrid) -> Vec<f64> {
        self.activations(grid.points()).out.to_vec()
    }

    pub fn loss_grad_residual(&self, grid: &SampleGrid, targets: &[f64]) -> (f64, Self, Vec<f64>) {
        let points = grid.points();
        let n = points.len();
        assert_eq!(targets.len(), n, "one target per grid point");
        let act = self.activations(points);
        let residual: Array1<f64> = &act.out - &Array1::from(targets.to_vec());
        let risk = residual.dot(&residual) / (2.0 * n as f64);

        let width = self.width() as f64;
        // dR/df_i = r_i / N
        let d_out = &residual / n as f64;
        let last = act.post.last().unwrap();
        let head = last.t().dot(&d_out) / width.sqrt();

        // Gradient w.r.t. the last post-activation: outer(d_out, v) / √H.
        let mut d_post = d_out
            .view()
            .insert_axis(Axis(1))
            .dot(&self.head.view().insert_axis(Axis(0)))
            / width.sqrt();
        let mut hidden = vec![Array2::zeros((0, 0)); self.hidden.len()];
        let mut d_features = None;
        for l in (0..self.hidden.len()).rev() {
            let mut d_pre = d_post;
            Zip::from(&mut d_pre)
                .and(&act.pre[l])
                .for_each(|d, &z| {
                    if z <= 0.0 {
                        *d = 0.0
                    }
                });
            let weights = &self.hidden[l];
            let scale = 1.0 / (weights.ncols() as f64).sqrt();
            let input = if l == 0 { &act.features } else { &act.post[l - 1] };
            hidden[l] = d_pre.t().dot(input) * scale;
            let d_input = d_pre.dot(weights) * scale;
            if l == 0 {
                d_features = Some(d_input);
                d_post = Array2::zeros((0, 0));
            } else {
                d_post = d_input;
            }
        }

        let m = self.m();
        let mut w = vec![0.0; m];
        if !self.frozen_w {
            let d_phi = d_features.expect("first layer visited");
            for k in 0..m {
                let mut acc = 0.0;
                for (i, &x) in points.iter().enumerate() {
                    let c = act.features[[i, k]];
                    let s = act.features[[i, m + k]];
                    // d cos = -sin·2πx, d sin = cos·2πx
                    acc += 2.0 * PI * x * (c * d_phi[[i, m + k]] - s * d_phi[[i, k]]);
                }
                w[k] = acc;
            }
        }

        let grad = Self {
            w,
            hidden,
            head,
            frozen_w: self.frozen_w,
        };
        (risk, grad, residual.to_vec())
    }

    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        if !self.frozen_w {
            for (p, g) in self.w.iter_mut().zip(&other.w) {
                *p += alpha * g;
            }
        }
        for (h, g) in self.hidden.iter_mut().zip(&other.hidden) {
            h.scaled_add(alpha, g);
        }
        self.head.scaled_add(alpha, &other.head);
    }

    /// Flattened as `[w, hidden[0] (row-major), hidden[1], ..., head]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.w.clone();
        for h in &self.hidden {
            v.extend(h.iter().copied());
        }
        v.extend(self.head.iter().copied());
        v
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        let mut off = 0;
        let m = self.m();
        self.w.copy_from_slice(&flat[..m]);
        off += m;
        for h in &mut self.hidden {
            for v in h.iter_mut() {
                *v = flat[off];
                off += 1;
            }
        }
        for v in self.head.iter_mut() {
            *v = flat[off];
            off += 1;
        }
        assert_eq!(off, flat.len());
    }
}
