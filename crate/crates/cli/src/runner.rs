//! Experiment orchestration: seed ensembles, FEM runs, comparisons and the
//! artifacts they leave behind.

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use freqbias_core::fem::{assemble, project_initial};
use freqbias_core::{
    build_coefficients, build_mesh, compare, dft_forward, ensemble_aggregate, init_network, train,
    ComparisonReport, Density, DistributionSpec, EnsembleResult, SpectralSnapshot, SpectralTrace,
};
use rayon::prelude::*;

use crate::artifacts::{self, num};
use crate::config::{ExperimentConfig, Variant};
use crate::manifest::{self, RunManifest};
use crate::plots;

/// Worker-thread count; unset or invalid means all available cores.
pub const THREADS_ENV: &str = "FREQBIAS_THREADS";

pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub const CONFIG_FILE: &str = "config.toml";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const COMPARISON_FILE: &str = "comparison.csv";
pub const TARGET_FILE: &str = "target.csv";
pub const SUMMARY_HEADER: [&str; 8] = ["label", "m", "depth", "seeds", "n_valid", "spearman_kappa_rho", "kappa_mean", "kappa_cv"];
pub const COMPARISON_HEADER: [&str; 5] = ["label", "time_scale", "nn_time", "model_time", "distance"];

pub fn trace_file(label: &str) -> String {
    format!("trace_{label}.csv")
}
pub fn kappa_file(label: &str) -> String {
    format!("kappa_{label}.csv")
}
pub fn fem_file(label: &str) -> String {
    format!("fem_{label}.csv")
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| anyhow!("thread pool: {e}"))
}

/// Train every seed of a variant and aggregate. Seeds run concurrently; the
/// merge follows seed order, so the result does not depend on scheduling.
pub fn run_ensemble(cfg: &ExperimentConfig, v: &Variant, threads: usize) -> Result<EnsembleResult> {
    let seeds = cfg.seeds.resolve();
    let traces = pool(threads)?.install(|| {
        seeds
            .par_iter()
            .map(|&s| train(&v.train_config(cfg, s)).map(|r| r.trace))
            .collect::<freqbias_core::Result<Vec<SpectralTrace>>>()
    })?;
    Ok(ensemble_aggregate(&traces, &seeds, cfg.kappa_fit_mode()?, &cfg.kappa_fit())?)
}

/// Spectrum of `-target`: the seed-averaged initial residual in expectation.
pub fn target_spectrum(cfg: &ExperimentConfig) -> Result<SpectralSnapshot> {
    let tc = cfg.variants()?[0].train_config(cfg, 0);
    let y: Vec<f64> = tc.grid.points().iter().map(|&x| -tc.target.eval(x)).collect();
    Ok(dft_forward(&y, &tc.grid, 0.0)?)
}

/// Spectrum of the initial residual averaged over seeds, without training.
pub fn mean_initial_spectrum(cfg: &ExperimentConfig, v: &Variant, threads: usize) -> Result<SpectralSnapshot> {
    let seeds = cfg.seeds.resolve();
    let tc = v.train_config(cfg, 0);
    let outputs = pool(threads)?.install(|| {
        seeds
            .par_iter()
            .map(|&s| init_network(&v.train_config(cfg, s)).map(|n| n.forward_grid(&tc.grid)))
            .collect::<freqbias_core::Result<Vec<Vec<f64>>>>()
    })?;
    let inv = 1.0 / seeds.len() as f64;
    let mean: Vec<f64> = tc
        .grid
        .points()
        .iter()
        .enumerate()
        .map(|(i, &x)| outputs.iter().map(|f| f[i] - tc.target.eval(x)).sum::<f64>() * inv)
        .collect();
    Ok(dft_forward(&mean, &tc.grid, 0.0)?)
}

/// Backward-Euler FEM evolution of `u0` under the variant's density.
pub fn run_fem(cfg: &ExperimentConfig, dist: &DistributionSpec, u0: &SpectralSnapshot) -> Result<SpectralTrace> {
    let f = &cfg.fem;
    let mesh = build_mesh(f.xi_min, f.xi_max, f.h)?;
    let coeffs = build_coefficients(dist.clone(), cfg.fem_sigma_a(), 2.0 * std::f64::consts::PI, 1)?;
    let system = assemble(&mesh, &coeffs, f.dt)?;
    let state = project_initial(u0, &mesh)?;
    Ok(system.evolve(&state, f.steps(), f.snapshot_every)?)
}

/// Spearman of κ with ρ, mean and coefficient of variation of κ over the band.
pub fn summary_row(cfg: &ExperimentConfig, v: &Variant, e: &EnsembleResult) -> Vec<String> {
    let [lo, hi] = cfg.analysis.band;
    let band = e.mean_kappa.band(lo, hi);
    let k: Vec<f64> = band.iter().map(|b| b.1).collect();
    let rho: Vec<f64> = band.iter().map(|b| v.dist.pdf(b.0)).collect();
    let (mean, cv) = mean_cv(&k);
    let corr = freqbias_core::analysis::spearman(&k, &rho).map_or("nan".into(), num);
    vec![
        v.label.clone(),
        v.m.to_string(),
        v.depth.to_string(),
        e.seeds.len().to_string(),
        e.mean_kappa.n_valid().to_string(),
        corr,
        num(mean),
        num(cv),
    ]
}

/// Mean and population coefficient of variation; `NaN` for empty input.
pub fn mean_cv(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt() / mean.abs())
}

pub fn comparison_rows(label: &str, r: &ComparisonReport) -> Vec<Vec<String>> {
    r.times
        .iter()
        .zip(&r.distances)
        .map(|(&t, &d)| vec![label.to_owned(), num(r.time_scale), num(t), num(r.time_scale * t), num(d)])
        .collect()
}

fn write_echo(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let _ = fs::remove_file(out.join(manifest::MANIFEST));
    let _ = fs::remove_file(out.join(manifest::FAILURE));
    fs::write(out.join(CONFIG_FILE), cfg.to_toml()).context("writing config echo")?;
    let tc = cfg.variants()?[0].train_config(cfg, 0);
    let rows: Vec<Vec<String>> = tc.grid.points().iter().map(|&x| vec![num(x), num(tc.target.eval(x))]).collect();
    artifacts::write_table(&out.join(TARGET_FILE), &["x", "target"], &rows)
}

/// Run a full experiment into `cfg.output_dir`. On failure the artifacts
/// written so far stay, `failure.txt` records the error and no manifest is
/// written.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<RunManifest> {
    with_failure_record(cfg, |m| run_inner(cfg, threads, m), threads)
}

/// FEM evolutions only, one per variant, from `fem.initial`.
pub fn run_fem_only(cfg: &ExperimentConfig, threads: usize) -> Result<RunManifest> {
    with_failure_record(cfg, |_| fem_inner(cfg, threads), threads)
}

fn with_failure_record(
    cfg: &ExperimentConfig,
    body: impl FnOnce(&mut RunManifest) -> Result<()>,
    threads: usize,
) -> Result<RunManifest> {
    let start = Instant::now();
    let out = &cfg.output_dir;
    let mut m = RunManifest {
        preset: cfg.preset.to_string(),
        config_file: CONFIG_FILE.into(),
        threads,
        ..RunManifest::default()
    };
    let res = write_echo(cfg, out).and_then(|_| body(&mut m)).and_then(|_| {
        plots::plot_dir(out)?;
        m.collect_checksums(out)?;
        m.wall_clock_seconds = start.elapsed().as_secs_f64();
        m.write(out)
    });
    if let Err(e) = &res {
        let _ = fs::create_dir_all(out);
        let _ = fs::write(out.join(manifest::FAILURE), format!("error = {e:#}\n"));
    }
    res.map(|_| m)
}

fn run_inner(cfg: &ExperimentConfig, threads: usize, m: &mut RunManifest) -> Result<()> {
    let out = &cfg.output_dir;
    let mut summary = Vec::new();
    let mut comparisons = Vec::new();
    for v in cfg.variants()? {
        let e = run_ensemble(cfg, &v, threads).with_context(|| format!("training {}", v.label))?;
        artifacts::write_trace(&out.join(trace_file(&v.label)), &e.mean_trace)?;
        artifacts::write_kappa(&out.join(kappa_file(&v.label)), &e.mean_kappa)?;
        for (seed, p) in e.seeds.iter().zip(&e.per_seed_kappa) {
            let rel = format!("seeds/{}/kappa_seed_{seed}.csv", v.label);
            artifacts::write_kappa(&out.join(&rel), p)?;
            m.seed_artifacts.push((v.label.clone(), *seed, rel));
        }
        summary.push(summary_row(cfg, &v, &e));
        if cfg.fem.enabled {
            let u0 = match cfg.fem.initial.as_str() {
                "target" => target_spectrum(cfg)?,
                _ => e.mean_trace.initial().clone(),
            };
            let fem = run_fem(cfg, &v.dist, &u0).with_context(|| format!("FEM for {}", v.label))?;
            artifacts::write_trace(&out.join(fem_file(&v.label)), &fem)?;
            let [lo, hi] = cfg.analysis.band;
            let report = compare(&e, &fem, &v.dist, Some((lo, hi)))?;
            comparisons.extend(comparison_rows(&v.label, &report));
        }
    }
    artifacts::write_table(&out.join(SUMMARY_FILE), &SUMMARY_HEADER, &summary)?;
    if cfg.fem.enabled {
        artifacts::write_table(&out.join(COMPARISON_FILE), &COMPARISON_HEADER, &comparisons)?;
    }
    Ok(())
}

fn fem_inner(cfg: &ExperimentConfig, threads: usize) -> Result<()> {
    for v in cfg.variants()? {
        let u0 = match cfg.fem.initial.as_str() {
            "target" => target_spectrum(cfg)?,
            _ => mean_initial_spectrum(cfg, &v, threads)?,
        };
        let fem = run_fem(cfg, &v.dist, &u0).with_context(|| format!("FEM for {}", v.label))?;
        artifacts::write_trace(&cfg.output_dir.join(fem_file(&v.label)), &fem)?;
    }
    Ok(())
}

/// Compare every variant found in both directories: NN mean trace and mean
/// κ from `nn_dir`, FEM trace from `fem_dir`, densities from the NN config.
pub fn compare_dirs(nn_dir: &Path, fem_dir: &Path) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(nn_dir.join(CONFIG_FILE))
        .with_context(|| format!("reading {}", nn_dir.join(CONFIG_FILE).display()))?;
    let cfg = ExperimentConfig::from_toml(&text)?;
    let [lo, hi] = cfg.analysis.band;
    let mut rows = Vec::new();
    for v in cfg.variants()? {
        let (tp, kp, fp) = (
            nn_dir.join(trace_file(&v.label)),
            nn_dir.join(kappa_file(&v.label)),
            fem_dir.join(fem_file(&v.label)),
        );
        if !(tp.exists() && kp.exists() && fp.exists()) {
            continue;
        }
        let e = EnsembleResult {
            mean_trace: artifacts::read_trace(&tp)?,
            per_seed_kappa: Vec::new(),
            mean_kappa: artifacts::read_kappa(&kp)?,
            seeds: cfg.seeds.resolve(),
            mode: cfg.kappa_fit_mode()?,
        };
        let report = compare(&e, &artifacts::read_trace(&fp)?, &v.dist, Some((lo, hi)))?;
        rows.extend(comparison_rows(&v.label, &report));
    }
    if rows.is_empty() {
        return Err(anyhow!(
            "no variant has trace_*.csv and kappa_*.csv in {} and fem_*.csv in {}",
            nn_dir.display(),
            fem_dir.display()
        ));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cv_of_constant_is_zero() {
        assert_eq!(mean_cv(&[2.0, 2.0, 2.0]), (2.0, 0.0));
        let (m, cv) = mean_cv(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((cv - 0.5).abs() < 1e-15);
        assert!(mean_cv(&[]).0.is_nan());
    }
}
