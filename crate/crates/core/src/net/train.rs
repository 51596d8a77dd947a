use ndarray::{Array1, Array2, ArrayView1};

use super::ff::{FeatureSweep, NetworkParams};
use super::multilayer::MultilayerParams;
use crate::error::{Error, Result};
use crate::spectral::rng::{streams, SeededStream};
use crate::spectral::{
    dft_forward, sample_from, DistributionSpec, SampleGrid, SpectralSnapshot, SpectralTrace,
    TargetSpec,
};

/// Full-batch gradient-descent run description.
///
/// `Default` is the reference protocol: m = 2000, 240 points on `[-1, 1)`,
/// `σ_a = 2/√4000`, `η = 1e-5/240`, 10⁴ iterations, snapshots every 4000.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub m: usize,
    pub dist_w: DistributionSpec,
    pub sigma_a: f64,
    pub step_size: f64,
    pub iterations: usize,
    pub snapshot_every: usize,
    pub seed: u64,
    /// Seed for the frequency draw; `None` uses `seed`. Sharing it across runs
    /// keeps `W` fixed while `(a, b)` vary.
    pub weight_seed: Option<u64>,
    pub grid: SampleGrid,
    pub target: TargetSpec,
    pub frozen_w: bool,
    /// Weight layers including the Fourier layer and the output; 2 is the
    /// plain FF network.
    pub depth: usize,
    pub hidden_width: usize,
    /// Gradient-flow time per unit of `iteration · η`.
    pub time_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            m: 2000,
            dist_w: DistributionSpec::Normal {
                sigma: 300.0 / (2.0 * std::f64::consts::PI),
            },
            sigma_a: 2.0 / 4000f64.sqrt(),
            step_size: 1e-5 / 240.0,
            iterations: 10_000,
            snapshot_every: 4000,
            seed: 0,
            weight_seed: None,
            grid: SampleGrid::reference(),
            target: TargetSpec::default(),
            frozen_w: false,
            depth: 2,
            hidden_width: 4000,
            time_scale: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        if self.snapshot_every == 0 {
            return bad("snapshot_every must be at least 1".into());
        }
        if !(self.sigma_a.is_finite() && self.sigma_a > 0.0) {
            return bad(format!("sigma_a must be positive, got {}", self.sigma_a));
        }
        if !(self.step_size.is_finite() && self.step_size >= 0.0) {
            return bad(format!("step_size must be nonnegative, got {}", self.step_size));
        }
        if !(self.time_scale.is_finite() && self.time_scale > 0.0) {
            return bad(format!("time_scale must be positive, got {}", self.time_scale));
        }
        if self.depth < 2 {
            return bad(format!("depth must be at least 2, got {}", self.depth));
        }
        if self.depth > 2 && self.hidden_width == 0 {
            return bad("hidden_width must be at least 1 for depth > 2".into());
        }
        Ok(())
    }

    /// Iterations at which the residual spectrum is recorded: multiples of
    /// `snapshot_every` plus the final iteration.
    pub fn snapshot_iterations(&self) -> Vec<usize> {
        let mut its: Vec<usize> = (0..=self.iterations).step_by(self.snapshot_every).collect();
        if *its.last().unwrap() != self.iterations {
            its.push(self.iterations);
        }
        its
    }

    /// Gradient-flow time of an iteration. With a zero step size time does not
    /// advance, so stamps fall back to `iteration · time_scale` to stay
    /// strictly increasing.
    pub fn time_of(&self, iteration: usize) -> f64 {
        let per_iteration = if self.step_size > 0.0 {
            self.step_size
        } else {
            1.0
        };
        iteration as f64 * per_iteration * self.time_scale
    }
}

/// Either network architecture.
#[derive(Clone, Debug, PartialEq)]
pub enum Network {
    FourierFeatures(NetworkParams),
    Multilayer(MultilayerParams),
}

impl Network {
    pub fn forward(&self, x: f64) -> f64 {
        match self {
            Self::FourierFeatures(p) => p.forward(x),
            Self::Multilayer(p) => p.forward(x),
        }
    }

    pub fn forward_grid(&self, grid: &SampleGrid) -> Vec<f64> {
        match self {
            Self::FourierFeatures(p) => p.forward_grid(grid),
            Self::Multilayer(p) => p.forward_grid(grid),
        }
    }

    /// Empirical risk and its gradient (same shape as `self`).
    pub fn loss_and_grad(&self, grid: &SampleGrid, target: &TargetSpec) -> (f64, Network) {
        let targets: Vec<f64> = grid.points().iter().map(|&x| target.eval(x)).collect();
        let (risk, grad, _) = self.loss_grad_residual(grid, &targets);
        (risk, grad)
    }

    pub fn loss_grad_residual(&self, grid: &SampleGrid, targets: &[f64]) -> (f64, Network, Vec<f64>) {
        match self {
            Self::FourierFeatures(p) => {
                let (r, g, u) = p.loss_grad_residual(grid, targets);
                (r, Self::FourierFeatures(g), u)
            }
            Self::Multilayer(p) => {
                let (r, g, u) = p.loss_grad_residual(grid, targets);
                (r, Self::Multilayer(g), u)
            }
        }
    }

    pub fn axpy(&mut self, alpha: f64, grad: &Network) {
        match (self, grad) {
            (Self::FourierFeatures(p), Self::FourierFeatures(g)) => p.axpy(alpha, g),
            (Self::Multilayer(p), Self::Multilayer(g)) => p.axpy(alpha, g),
            _ => panic!("gradient architecture does not match parameters"),
        }
    }

    /// Risk `1/(2N) Σ (f(x_i) - y_i)²`.
    pub fn risk(&self, grid: &SampleGrid, targets: &[f64]) -> f64 {
        let f = self.forward_grid(grid);
        let sq: f64 = f.iter().zip(targets).map(|(a, b)| (a - b) * (a - b)).sum();
        sq / (2.0 * targets.len() as f64)
    }

    /// Central finite-difference gradient of the risk over every entry of
    /// [`Network::to_flat`], frozen or not.
    ///
    /// `R⁺ − R⁻` is evaluated as `1/(2N) Σ (f⁺ − f⁻)(f⁺ + f⁻ − 2y)` so the
    /// difference of two nearly equal risks is never formed.
    pub fn finite_difference_grad(&self, grid: &SampleGrid, targets: &[f64], step: f64) -> Vec<f64> {
        let base = self.to_flat();
        let mut probe = self.clone();
        let mut flat = base.clone();
        let n = targets.len() as f64;
        (0..base.len())
            .map(|i| {
                flat[i] = base[i] + step;
                probe.set_flat(&flat);
                let up = probe.forward_grid(grid);
                flat[i] = base[i] - step;
                probe.set_flat(&flat);
                let down = probe.forward_grid(grid);
                flat[i] = base[i];
                let diff: f64 = up
                    .iter()
                    .zip(&down)
                    .zip(targets)
                    .map(|((p, q), y)| (p - q) * (p + q - 2.0 * y))
                    .sum();
                diff / (2.0 * n) / (2.0 * step)
            })
            .collect()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        match self {
            Self::FourierFeatures(p) => p.to_flat(),
            Self::Multilayer(p) => p.to_flat(),
        }
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        match self {
            Self::FourierFeatures(p) => p.set_flat(flat),
            Self::Multilayer(p) => p.set_flat(flat),
        }
    }
}

/// Draw initial parameters: `a, b ~ N(0, σ_a)`, `w ~ ρ_w`; multilayer hidden
/// weights standard normal and head weights `N(0, σ_a)`.
pub fn init_network(cfg: &TrainConfig) -> Result<Network> {
    cfg.validate()?;
    let mut freq_rng = SeededStream::new(cfg.weight_seed.unwrap_or(cfg.seed), streams::FREQUENCIES);
    let w = sample_from(&cfg.dist_w, cfg.m, &mut freq_rng);
    let mut out_rng = SeededStream::new(cfg.seed, streams::OUTPUT_WEIGHTS);

    if cfg.depth == 2 {
        let a = (0..cfg.m).map(|_| out_rng.normal(0.0, cfg.sigma_a)).collect();
        let b = (0..cfg.m).map(|_| out_rng.normal(0.0, cfg.sigma_a)).collect();
        return Ok(Network::FourierFeatures(NetworkParams::new(
            a,
            b,
            w,
            cfg.frozen_w,
        )));
    }

    let mut hid_rng = SeededStream::new(cfg.seed, streams::HIDDEN_WEIGHTS);
    let h = cfg.hidden_width;
    let mut hidden = Vec::with_capacity(cfg.depth - 2);
    for l in 0..cfg.depth - 2 {
        let fan_in = if l == 0 { 2 * cfg.m } else { h };
        hidden.push(Array2::from_shape_simple_fn((h, fan_in), || {
            hid_rng.standard_normal()
        }));
    }
    let head = Array1::from_shape_simple_fn(h, || out_rng.normal(0.0, cfg.sigma_a));
    Ok(Network::Multilayer(MultilayerParams {
        w,
        hidden,
        head,
        frozen_w: cfg.frozen_w,
    }))
}

/// Output of [`train`]: residual spectra `û(ξ, t)` of `u = f(·, Θ(t)) - f̃`.
#[derive(Clone, Debug)]
pub struct ResidualTrace {
    pub trace: SpectralTrace,
    /// Iteration of each snapshot.
    pub iterations: Vec<usize>,
    /// Risk before every update, plus the risk after the last one.
    pub risk_history: Vec<f64>,
    pub final_params: Network,
}

impl ResidualTrace {
    pub fn initial_risk(&self) -> f64 {
        self.risk_history[0]
    }
    pub fn final_risk(&self) -> f64 {
        *self.risk_history.last().unwrap()
    }
}

/// Full-batch gradient descent `Θ ← Θ - η ∇R_S(Θ)`, recording the residual
/// spectrum at the configured snapshot iterations.
///
/// A plain FF network with frozen `w` is linear in `(a, b)`, so its residual
/// obeys `u ← u - (η/N) K u` with the fixed Gram matrix
/// `K = Φ Φᵀ/(2m)`. That iteration is run directly in the `N`-dimensional
/// residual space; the final parameters are recovered from the summed
/// residuals. Every other configuration updates the parameters.
pub fn train(cfg: &TrainConfig) -> Result<ResidualTrace> {
    let net = init_network(cfg)?;
    match net {
        Network::FourierFeatures(p) if p.frozen_w => train_frozen_kernel(cfg, p),
        net => train_parameter_space(cfg, net),
    }
}

fn snapshot_targets(cfg: &TrainConfig) -> Vec<f64> {
    cfg.grid.points().iter().map(|&x| cfg.target.eval(x)).collect()
}

pub(crate) fn train_parameter_space(cfg: &TrainConfig, mut net: Network) -> Result<ResidualTrace> {
    let targets = snapshot_targets(cfg);
    let schedule = cfg.snapshot_iterations();
    let mut next_snapshot = 0;
    let mut snapshots: Vec<SpectralSnapshot> = Vec::with_capacity(schedule.len());
    let mut risk_history = Vec::with_capacity(cfg.iterations + 1);

    for it in 0..=cfg.iterations {
        let (risk, grad, residual) = net.loss_grad_residual(&cfg.grid, &targets);
        if !risk.is_finite() {
            return Err(Error::NonFiniteLoss {
                iteration: it,
                risk,
            });
        }
        risk_history.push(risk);
        if next_snapshot < schedule.len() && schedule[next_snapshot] == it {
            snapshots.push(dft_forward(&residual, &cfg.grid, cfg.time_of(it))?);
            next_snapshot += 1;
        }
        if it < cfg.iterations && cfg.step_size != 0.0 {
            net.axpy(-cfg.step_size, &grad);
        }
    }

    Ok(ResidualTrace {
        trace: SpectralTrace::new(snapshots)?,
        iterations: schedule,
        risk_history,
        final_params: net,
    })
}

fn train_frozen_kernel(cfg: &TrainConfig, mut p: NetworkParams) -> Result<ResidualTrace> {
    let targets = snapshot_targets(cfg);
    let n = cfg.grid.n();
    let m = p.m();
    let scale = 1.0 / (2.0 * m as f64).sqrt();

    let mut c = Array2::<f64>::zeros((n, m));
    let mut s = Array2::<f64>::zeros((n, m));
    FeatureSweep::new(&p.w, &cfg.grid).run(|i, ci, si| {
        c.row_mut(i).assign(&ArrayView1::from(ci));
        s.row_mut(i).assign(&ArrayView1::from(si));
    });
    let gram = (c.dot(&c.t()) + s.dot(&s.t())) * (scale * scale);

    let a0 = ArrayView1::from(&p.a[..]);
    let b0 = ArrayView1::from(&p.b[..]);
    let mut u: Array1<f64> = (c.dot(&a0) + s.dot(&b0)) * scale - ArrayView1::from(&targets[..]);
    let mut u_sum = Array1::<f64>::zeros(n);

    let schedule = cfg.snapshot_iterations();
    let mut next_snapshot = 0;
    let mut snapshots: Vec<SpectralSnapshot> = Vec::with_capacity(schedule.len());
    let mut risk_history = Vec::with_capacity(cfg.iterations + 1);
    let rate = cfg.step_size / n as f64;

    for it in 0..=cfg.iterations {
        let risk = u.dot(&u) / (2.0 * n as f64);
        if !risk.is_finite() {
            return Err(Error::NonFiniteLoss {
                iteration: it,
                risk,
            });
        }
        risk_history.push(risk);
        if next_snapshot < schedule.len() && schedule[next_snapshot] == it {
            let residual = u.to_vec();
            snapshots.push(dft_forward(&residual, &cfg.grid, cfg.time_of(it))?);
            next_snapshot += 1;
        }
        if it < cfg.iterations && cfg.step_size != 0.0 {
            u_sum += &u;
            let ku = gram.dot(&u);
            u.scaled_add(-rate, &ku);
        }
    }

    // a_T = a_0 - η (scale/N) Cᵀ Σ u_k, likewise for b.
    let shift = cfg.step_size * scale / n as f64;
    let da = c.t().dot(&u_sum);
    let db = s.t().dot(&u_sum);
    for k in 0..m {
        p.a[k] -= shift * da[k];
        p.b[k] -= shift * db[k];
    }

    Ok(ResidualTrace {
        trace: SpectralTrace::new(snapshots)?,
        iterations: schedule,
        risk_history,
        final_params: Network::FourierFeatures(p),
    })
}
