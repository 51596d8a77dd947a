//! Declarative experiment configuration.
//!
//! A config file names a preset and overrides any subset of its fields. The
//! preset's defaults are serialised to TOML, the file is merged over them
//! table by table, and the merged document is deserialised strictly, so an
//! unknown or mistyped key is reported with its full path.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use freqbias_core::{DistributionSpec, EnsembleMode, KappaFit, SampleGrid, TargetSpec, TrainConfig};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// κ(ξ) for several Gaussian frequency densities, trainable W.
    KappaSweep,
    /// NN mean spectrum against the FEM solution of the damped heat equation.
    FemVsNn,
    /// Frozen W, where κ should follow ρ_w.
    FrozenCheck,
    /// Deeper networks with ReLU hidden layers.
    Multilayer,
    /// Small widths m and several depths.
    RobustnessM,
    /// Reference protocol with nothing switched on; edit freely.
    Custom,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Self::KappaSweep => "kappa-sweep",
            Self::FemVsNn => "fem-vs-nn",
            Self::FrozenCheck => "frozen-check",
            Self::Multilayer => "multilayer",
            Self::RobustnessM => "robustness-m",
            Self::Custom => "custom",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Frequency density. All frequencies are in cycles per unit length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistConfig {
    Normal { sigma: f64 },
    Uniform { half_width: f64 },
    Tabulated { nodes: Vec<f64>, densities: Vec<f64> },
}

impl DistConfig {
    pub fn to_spec(&self) -> freqbias_core::Result<DistributionSpec> {
        match self {
            Self::Normal { sigma } => DistributionSpec::normal(*sigma),
            Self::Uniform { half_width } => DistributionSpec::uniform(*half_width),
            Self::Tabulated { nodes, densities } => DistributionSpec::tabulated(nodes.clone(), densities.clone()),
        }
    }
}

/// Explicit seed list, or `count` consecutive seeds from `base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    List(Vec<u64>),
    Range { count: usize, base: u64 },
}

impl Seeds {
    pub fn resolve(&self) -> Vec<u64> {
        match self {
            Self::List(v) => v.clone(),
            Self::Range { count, base } => (0..*count as u64).map(|i| base + i).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    /// Number of Fourier frequencies.
    pub m: usize,
    pub sigma_a: f64,
    /// Gradient-descent step η.
    pub step_size: f64,
    pub iterations: usize,
    pub snapshot_every: usize,
    pub frozen_w: bool,
    /// Weight layers including the Fourier layer and the output layer.
    pub depth: usize,
    pub hidden_width: usize,
    /// Time per unit of iteration·η.
    pub time_scale: f64,
    /// Shared frequency-draw seed; absent means each run uses its own seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_seed: Option<u64>,
    /// Sample points on `[grid_a, grid_b)`.
    pub grid_n: usize,
    pub grid_a: f64,
    pub grid_b: f64,
    /// `rounded-sine` or a built-in custom id.
    pub target: String,
    /// `round(sin(target_factor·π·x))` for the rounded sine.
    pub target_factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Widths to run; empty means `train.m` only.
    pub m: Vec<usize>,
    /// Depths to run; empty means `train.depth` only.
    pub depth: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Leading snapshots in the κ fit; absent means the first 10% of the span.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    pub floor: f64,
    /// `per-seed-then-average` or `average-then-fit`.
    pub mode: String,
    /// `|ξ|` range (cycles/unit) for summary statistics and comparisons.
    pub band: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FemSection {
    pub enabled: bool,
    /// Domain `(xi_min, xi_max)` and node spacing `h`, cycles/unit.
    pub xi_min: f64,
    pub xi_max: f64,
    pub h: f64,
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_every: usize,
    /// Absent means `train.sigma_a`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_a: Option<f64>,
    /// `nn-mean` (mean initial NN residual) or `target` (transform of −target).
    pub initial: String,
}

impl FemSection {
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub output_dir: PathBuf,
    pub seeds: Seeds,
    pub dists: Vec<DistConfig>,
    pub train: TrainSection,
    pub sweep: SweepSection,
    pub analysis: AnalysisSection,
    pub fem: FemSection,
}

/// One network family of an experiment: a density, width and depth.
#[derive(Clone, Debug, PartialEq)]
pub struct Variant {
    pub label: String,
    pub dist: DistributionSpec,
    pub m: usize,
    pub depth: usize,
}

fn normal(sigma_times_2pi: f64) -> DistConfig {
    DistConfig::Normal {
        sigma: sigma_times_2pi / (2.0 * PI),
    }
}

impl ExperimentConfig {
    /// Fully populated defaults of a preset.
    pub fn preset(preset: Preset) -> Self {
        let mut cfg = Self {
            preset,
            output_dir: PathBuf::from(format!("out/{preset}")),
            seeds: Seeds::Range { count: 100, base: 0 },
            dists: vec![normal(300.0)],
            train: TrainSection {
                m: 2000,
                sigma_a: 2.0 / 4000f64.sqrt(),
                step_size: 1e-5 / 240.0,
                iterations: 10_000,
                snapshot_every: 100,
                frozen_w: false,
                depth: 2,
                hidden_width: 4000,
                time_scale: 1.0,
                weight_seed: None,
                grid_n: 240,
                grid_a: -1.0,
                grid_b: 1.0,
                target: "rounded-sine".into(),
                target_factor: 4.2,
            },
            sweep: SweepSection { m: vec![], depth: vec![] },
            analysis: AnalysisSection {
                window: None,
                floor: freqbias_core::analysis::DEFAULT_AMPLITUDE_FLOOR,
                mode: EnsembleMode::default().name().into(),
                band: [0.5, 20.0],
            },
            fem: FemSection {
                enabled: false,
                xi_min: -60.0,
                xi_max: 60.0,
                h: 0.5,
                dt: 0.1,
                t_final: 500.0,
                snapshot_every: 500,
                sigma_a: None,
                initial: "nn-mean".into(),
            },
        };
        match preset {
            Preset::KappaSweep => {
                cfg.dists = [30.0, 90.0, 300.0, 600.0].into_iter().map(normal).collect();
            }
            Preset::FemVsNn => {
                cfg.train.snapshot_every = 4000;
                cfg.fem.enabled = true;
            }
            Preset::FrozenCheck => {
                cfg.train.frozen_w = true;
                cfg.dists = vec![normal(300.0), DistConfig::Uniform { half_width: 10.0 }];
            }
            Preset::Multilayer => cfg.sweep.depth = vec![3, 4],
            Preset::RobustnessM => {
                cfg.sweep.m = vec![10, 100, 500];
                cfg.sweep.depth = vec![2, 4];
            }
            Preset::Custom => {}
        }
        cfg
    }

    /// Parse a config file: preset defaults overlaid by the file's keys.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let user: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::parse(e))?;
        let preset = match user.get("preset") {
            None => return Err(ConfigError::field("preset", "missing; one of kappa-sweep, fem-vs-nn, frozen-check, multilayer, robustness-m, custom")),
            Some(v) => Preset::deserialize(v.clone()).map_err(|e| ConfigError::field("preset", e.to_string()))?,
        };
        let mut merged = toml::Table::try_from(Self::preset(preset)).expect("defaults serialise");
        merge(&mut merged, user);
        let cfg: Self = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::parse(e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        let body = toml::to_string_pretty(self).expect("config serialises");
        format!("# Frequencies (sigma, half_width, nodes, xi_*, h, band) are in cycles per unit length.\n{body}")
    }

    /// Field-level checks beyond what parsing guarantees.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.seeds.resolve().is_empty() {
            return Err(ConfigError::field("seeds", "no seeds selected"));
        }
        if self.dists.is_empty() {
            return Err(ConfigError::field("dists", "at least one distribution is required"));
        }
        for (i, d) in self.dists.iter().enumerate() {
            d.to_spec().map_err(|e| ConfigError::field(&format!("dists[{i}]"), e.to_string()))?;
        }
        for v in self.variants_unchecked() {
            v.train_config(self, 0).validate().map_err(|e| ConfigError::field(&format!("train ({})", v.label), e.to_string()))?;
        }
        SampleGrid::new(self.train.grid_n, self.train.grid_a, self.train.grid_b)
            .map_err(|e| ConfigError::field("train.grid_n/grid_a/grid_b", e.to_string()))?;
        self.target().map_err(|e| ConfigError::field("train.target", e.to_string()))?;
        self.kappa_fit_mode().map_err(|e| ConfigError::field("analysis.mode", e.to_string()))?;
        if self.sweep.m.contains(&0) {
            return Err(ConfigError::field("sweep.m", "widths must be at least 1"));
        }
        if !(self.analysis.floor > 0.0) {
            return Err(ConfigError::field("analysis.floor", "must be positive"));
        }
        if self.analysis.window.is_some_and(|w| w < 2) {
            return Err(ConfigError::field("analysis.window", "needs at least 2 snapshots"));
        }
        let [lo, hi] = self.analysis.band;
        if !(lo >= 0.0 && hi > lo) {
            return Err(ConfigError::field("analysis.band", "need 0 <= lo < hi"));
        }
        if self.fem.enabled {
            let f = &self.fem;
            if !(f.h > 0.0 && f.xi_max > f.xi_min) {
                return Err(ConfigError::field("fem.xi_min/xi_max/h", "need xi_min < xi_max and h > 0"));
            }
            if !(f.dt > 0.0 && f.t_final > 0.0 && f.steps() >= 1) {
                return Err(ConfigError::field("fem.dt/t_final", "need dt > 0 and t_final >= dt"));
            }
            if f.snapshot_every == 0 {
                return Err(ConfigError::field("fem.snapshot_every", "must be at least 1"));
            }
            if f.sigma_a.is_some_and(|s| !(s >= 0.0)) {
                return Err(ConfigError::field("fem.sigma_a", "must be nonnegative"));
            }
            if !matches!(f.initial.as_str(), "nn-mean" | "target") {
                return Err(ConfigError::field("fem.initial", format!("unknown initial condition '{}'; use nn-mean or target", f.initial)));
            }
        }
        Ok(())
    }

    pub fn target(&self) -> freqbias_core::Result<TargetSpec> {
        match self.train.target.as_str() {
            "rounded-sine" => Ok(TargetSpec::RoundedSine {
                freq_factor: self.train.target_factor,
            }),
            id => TargetSpec::custom(id),
        }
    }

    pub fn kappa_fit(&self) -> KappaFit {
        KappaFit {
            window: self.analysis.window,
            floor: self.analysis.floor,
        }
    }

    pub fn kappa_fit_mode(&self) -> freqbias_core::Result<EnsembleMode> {
        self.analysis.mode.parse()
    }

    pub fn fem_sigma_a(&self) -> f64 {
        self.fem.sigma_a.unwrap_or(self.train.sigma_a)
    }

    /// Every (density, width, depth) combination, densities outermost.
    pub fn variants(&self) -> freqbias_core::Result<Vec<Variant>> {
        self.validate().map_err(|e| freqbias_core::Error::InvalidConfig(e.to_string()))?;
        Ok(self.variants_unchecked())
    }

    fn variants_unchecked(&self) -> Vec<Variant> {
        let ms = if self.sweep.m.is_empty() { vec![self.train.m] } else { self.sweep.m.clone() };
        let depths = if self.sweep.depth.is_empty() { vec![self.train.depth] } else { self.sweep.depth.clone() };
        let mut out = Vec::new();
        for d in &self.dists {
            let Ok(dist) = d.to_spec() else { continue };
            for &m in &ms {
                for &depth in &depths {
                    out.push(Variant {
                        label: format!("{}_m{m}_d{depth}", dist.label()),
                        dist: dist.clone(),
                        m,
                        depth,
                    });
                }
            }
        }
        out
    }
}

impl Variant {
    pub fn train_config(&self, cfg: &ExperimentConfig, seed: u64) -> TrainConfig {
        let t = &cfg.train;
        TrainConfig {
            m: self.m,
            dist_w: self.dist.clone(),
            sigma_a: t.sigma_a,
            step_size: t.step_size,
            iterations: t.iterations,
            snapshot_every: t.snapshot_every,
            seed,
            weight_seed: t.weight_seed,
            grid: SampleGrid::new(t.grid_n, t.grid_a, t.grid_b).unwrap_or_else(|_| SampleGrid::reference()),
            target: cfg.target().unwrap_or_default(),
            frozen_w: t.frozen_w,
            depth: self.depth,
            hidden_width: t.hidden_width,
            time_scale: t.time_scale,
        }
    }
}

/// Recursively overlay `user` on `base`; tables merge, everything else replaces.
fn merge(base: &mut toml::Table, user: toml::Table) {
    for (k, v) in user {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) => merge(b, u),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// A configuration problem, naming the offending field where possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn field(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: Some(field.to_owned()),
            message: message.into(),
        }
    }

    fn parse(e: toml::de::Error) -> Self {
        Self {
            field: None,
            message: e.message().trim().to_owned(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(field) => write!(f, "{field}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [Preset; 6] = [
        Preset::KappaSweep,
        Preset::FemVsNn,
        Preset::FrozenCheck,
        Preset::Multilayer,
        Preset::RobustnessM,
        Preset::Custom,
    ];

    #[test]
    fn presets_round_trip_through_toml() {
        for p in ALL {
            let cfg = ExperimentConfig::preset(p);
            cfg.validate().unwrap();
            assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg, "{p}");
        }
    }

    #[test]
    fn overrides_merge_into_preset() {
        let cfg = ExperimentConfig::from_toml(
            "preset = \"frozen-check\"\nseeds = { count = 20, base = 1 }\n[train]\nm = 64\n",
        )
        .unwrap();
        assert_eq!(cfg.train.m, 64);
        assert!(cfg.train.frozen_w);
        assert_eq!(cfg.seeds.resolve(), (1..=20).collect::<Vec<u64>>());
        assert_eq!(cfg.train.iterations, 10_000);
    }

    #[test]
    fn sweep_labels() {
        let cfg = ExperimentConfig::preset(Preset::RobustnessM);
        let v = cfg.variants().unwrap();
        assert_eq!(v.len(), 6);
        assert!(v[0].label.ends_with("_m10_d2"));
        assert!(v[5].label.ends_with("_m500_d4"));
    }

    #[test]
    fn field_diagnostics() {
        let e = ExperimentConfig::from_toml("preset = \"custom\"\n[train]\nm = 0\n").unwrap_err();
        assert!(e.to_string().contains("train"), "{e}");
        let e = ExperimentConfig::from_toml("preset = \"custom\"\n[train]\nmm = 3\n").unwrap_err();
        assert!(e.to_string().contains("mm"), "{e}");
        let e = ExperimentConfig::from_toml("[train]\nm = 3\n").unwrap_err();
        assert_eq!(e.field.as_deref(), Some("preset"));
        let e = ExperimentConfig::from_toml("preset = \"custom\"\ndists = [{ kind = \"uniform\", half_width = -1.0 }]\n").unwrap_err();
        assert_eq!(e.field.as_deref(), Some("dists[0]"));
        let e = ExperimentConfig::from_toml("preset = \"custom\"\n[analysis]\nmode = \"median\"\n").unwrap_err();
        assert_eq!(e.field.as_deref(), Some("analysis.mode"));
    }

    #[test]
    fn explicit_seed_list() {
        let cfg = ExperimentConfig::from_toml("preset = \"custom\"\nseeds = [5, 3]\n").unwrap();
        assert_eq!(cfg.seeds.resolve(), vec![5, 3]);
    }
}
