//! Figures rebuilt from a run directory's CSVs, so `plot` can redraw any
//! finished run without re-running it.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use freqbias_core::SpectralTrace;

use crate::artifacts;
use crate::runner::{COMPARISON_FILE, TARGET_FILE};
use crate::svg::{render, Panel};

fn files_with(dir: &Path, prefix: &str) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let p = entry?.path();
        let Some(name) = p.file_name().and_then(|n| n.to_str()) else { continue };
        if let Some(label) = name.strip_prefix(prefix).and_then(|n| n.strip_suffix(".csv")) {
            out.push((label.to_owned(), p.clone()));
        }
    }
    out.sort();
    Ok(out)
}

fn magnitudes(s: &freqbias_core::SpectralSnapshot) -> Vec<(f64, f64)> {
    s.values
        .iter()
        .enumerate()
        .map(|(i, v)| (s.grid.freq(i), v.norm()))
        .filter(|p| p.0 >= 0.0)
        .collect()
}

fn write_svg(path: &Path, panels: &[Panel], cols: usize, written: &mut Vec<PathBuf>) -> Result<()> {
    if let Some(svg) = render(panels, cols) {
        fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
        written.push(path.to_path_buf());
    }
    Ok(())
}

/// Time scale per label from `comparison.csv`, if present.
fn time_scale(dir: &Path, label: &str) -> Result<f64> {
    let p = dir.join(COMPARISON_FILE);
    if !p.exists() {
        return Ok(1.0);
    }
    let (_, rows) = artifacts::read_table(&p)?;
    Ok(rows
        .iter()
        .find(|r| r[0] == label)
        .and_then(|r| r[1].parse().ok())
        .unwrap_or(1.0))
}

fn nearest(tr: &SpectralTrace, t: f64) -> &freqbias_core::SpectralSnapshot {
    tr.snapshots()
        .iter()
        .min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs()))
        .expect("trace is nonempty")
}

/// Draw every figure the directory's CSVs support; error if there are none.
///
/// * `target.svg`: the target and the magnitude of the initial residual spectrum.
/// * `kappa.svg`: κ(ξ) of every variant on a log axis; `kappa_panels.svg`
///   gives each variant its own panel.
/// * `snapshots_<label>.svg`: NN mean |û| against FEM |û| at matched times.
/// * `fem_<label>.svg`: FEM snapshots, for FEM-only runs.
pub fn plot_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let traces = files_with(dir, "trace_")?;
    let kappas = files_with(dir, "kappa_")?;
    let fems = files_with(dir, "fem_")?;

    let target = dir.join(TARGET_FILE);
    if target.exists() {
        let (_, rows) = artifacts::read_table(&target)?;
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| Some((r.first()?.parse().ok()?, r.get(1)?.parse().ok()?)))
            .collect();
        let mut panels = vec![Panel::new("target", "x", "f(x)", false).with("target", pts)];
        if let Some((label, p)) = traces.first().or(fems.first()) {
            let tr = artifacts::read_trace(p)?;
            panels.push(Panel::new(format!("initial residual spectrum, {label}"), "ξ (cycles/unit)", "|û₀|", true).with("|û₀|", magnitudes(tr.initial())));
        }
        write_svg(&dir.join("target.svg"), &panels, 2, &mut written)?;
    }

    if !kappas.is_empty() {
        let mut overlay = Panel::new("frequency learning rate", "ξ (cycles/unit)", "κ", true);
        let mut panels = Vec::new();
        for (label, p) in &kappas {
            let k = artifacts::read_kappa(p)?;
            let pts: Vec<(f64, f64)> = k.band(0.0, f64::INFINITY).into_iter().filter(|b| b.0 >= 0.0).collect();
            overlay = overlay.with(label.clone(), pts.clone());
            panels.push(Panel::new(label.clone(), "ξ (cycles/unit)", "κ", true).with("κ", pts));
        }
        write_svg(&dir.join("kappa.svg"), &[overlay], 1, &mut written)?;
        if panels.len() > 1 {
            write_svg(&dir.join("kappa_panels.svg"), &panels, 2, &mut written)?;
        }
    }

    for (label, fp) in &fems {
        let fem = artifacts::read_trace(fp)?;
        let nn_path = dir.join(format!("trace_{label}.csv"));
        if nn_path.exists() {
            let nn = artifacts::read_trace(&nn_path)?;
            let s = time_scale(dir, label)?;
            let panels: Vec<Panel> = nn
                .snapshots()
                .iter()
                .map(|snap| {
                    let f = nearest(&fem, s * snap.time);
                    Panel::new(format!("NN t = {:.3e}, FEM t = {:.3e}", snap.time, f.time), "ξ (cycles/unit)", "|û|", true)
                        .with("NN mean", magnitudes(snap))
                        .with("FEM", magnitudes(f))
                })
                .collect();
            write_svg(&dir.join(format!("snapshots_{label}.svg")), &panels, 2, &mut written)?;
        } else {
            let mut panel = Panel::new(format!("FEM, {label}"), "ξ (cycles/unit)", "|û|", true);
            for snap in fem.snapshots() {
                panel = panel.with(format!("t = {:.4}", snap.time), magnitudes(snap));
            }
            write_svg(&dir.join(format!("fem_{label}.svg")), &[panel], 1, &mut written)?;
        }
    }

    if written.is_empty() {
        bail!("nothing to plot in {}", dir.display());
    }
    Ok(written)
}
