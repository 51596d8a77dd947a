use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use freqbias_cli::artifacts;
use freqbias_cli::config::ExperimentConfig;
use freqbias_cli::runner::{self, COMPARISON_HEADER};
use freqbias_cli::{plots, run_experiment, run_fem_only, threads_from_env, Preset};
use freqbias_core::{ensemble_aggregate, EnsembleMode, KappaFit};

/// Frequency-bias experiments for Fourier-features networks.
///
/// Worker threads: FREQBIAS_THREADS (default: all cores). Outputs do not
/// depend on the thread count.
#[derive(Parser)]
#[command(name = "freqbias", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config; artifacts and manifest go to its output_dir.
    Run {
        config: PathBuf,
        /// Override output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate κ from trace CSVs; several traces are aggregated as seeds.
    Kappa {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(long, default_value = "kappa.csv")]
        out: PathBuf,
        /// Leading snapshots to fit; default is the first 10% of the span.
        #[arg(long)]
        window: Option<usize>,
        #[arg(long, default_value_t = freqbias_core::analysis::DEFAULT_AMPLITUDE_FLOOR)]
        floor: f64,
        #[arg(long, default_value = "per-seed-then-average")]
        mode: String,
    },
    /// Run only the FEM part of a config.
    Fem {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare NN results in one run directory with FEM traces in another.
    Compare { nn_dir: PathBuf, fem_dir: PathBuf },
    /// Redraw the figures of a run directory from its CSVs.
    Plot { result_dir: PathBuf },
    /// Print a preset's full default config.
    Preset { preset: Preset },
}

fn load(path: &Path, out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = ExperimentConfig::from_toml(&text).with_context(|| format!("invalid config {}", path.display()))?;
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load(&config, out)?;
            let m = run_experiment(&cfg, threads_from_env())?;
            println!("{} artifacts in {} ({:.1} s)", m.checksums.len(), cfg.output_dir.display(), m.wall_clock_seconds);
        }
        Command::Fem { config, out } => {
            let mut cfg = load(&config, out)?;
            cfg.fem.enabled = true;
            cfg.validate()?;
            let m = run_fem_only(&cfg, threads_from_env())?;
            println!("{} artifacts in {}", m.checksums.len(), cfg.output_dir.display());
        }
        Command::Kappa { traces, out, window, floor, mode } => {
            let mode: EnsembleMode = mode.parse()?;
            let tr = traces
                .iter()
                .map(|p| artifacts::read_trace(p))
                .collect::<Result<Vec<_>>>()?;
            let seeds: Vec<u64> = (0..tr.len() as u64).collect();
            let e = ensemble_aggregate(&tr, &seeds, mode, &KappaFit { window, floor })?;
            artifacts::write_kappa(&out, &e.mean_kappa)?;
            println!("{} valid frequencies written to {}", e.mean_kappa.n_valid(), out.display());
        }
        Command::Compare { nn_dir, fem_dir } => {
            let rows = runner::compare_dirs(&nn_dir, &fem_dir)?;
            let mut out = std::io::stdout().lock();
            let lines = std::iter::once(COMPARISON_HEADER.join(",")).chain(rows.iter().map(|r| r.join(",")));
            for l in lines {
                // A closed pipe (e.g. `| head`) is not an error worth reporting.
                if writeln!(out, "{l}").is_err() {
                    break;
                }
            }
        }
        Command::Plot { result_dir } => {
            for p in plots::plot_dir(&result_dir)? {
                println!("{}", p.display());
            }
        }
        Command::Preset { preset } => print!("{}", ExperimentConfig::preset(preset).to_toml()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<freqbias_cli::ConfigError>()) {
                return ExitCode::from(2);
            }
            if let Some(io) = e.downcast_ref::<std::io::Error>() {
                eprintln!("({io})");
            }
            ExitCode::FAILURE
        }
    }
}
