//! CSV artifacts. Floats use `{:.16e}` (17 significant digits), so files are
//! bit-stable and parse back to the exact values written.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use freqbias_core::{Complex64, FrequencyGrid, KappaProfile, SpectralSnapshot, SpectralTrace};

pub const KAPPA_HEADER: [&str; 4] = ["xi", "kappa", "r2", "valid"];
pub const TRACE_HEADER: [&str; 5] = ["time", "xi", "re", "im", "abs"];

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let got: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if got != header {
        bail!("{}: expected columns {:?}, found {:?}", path.display(), header, got);
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| match f {
                "true" => Ok(1.0),
                "false" => Ok(0.0),
                f => f.parse::<f64>(),
            })
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| anyhow!("{} row {}: {e}", path.display(), line + 2))?;
        rows.push(row);
    }
    Ok(rows)
}

/// Columns `(xi, kappa, r2, valid)`; invalid rows carry `NaN` and `0`.
pub fn write_kappa(path: &Path, p: &KappaProfile) -> Result<()> {
    write_rows(
        path,
        &KAPPA_HEADER,
        (0..p.kappa.len()).map(|i| {
            vec![
                num(p.grid.freq(i)),
                num(p.kappa[i]),
                num(p.fit_r2[i]),
                p.valid[i].to_string(),
            ]
        }),
    )
}

pub fn read_kappa(path: &Path) -> Result<KappaProfile> {
    let rows = read_rows(path, &KAPPA_HEADER)?;
    let xi: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    Ok(KappaProfile {
        grid: infer_grid(&xi).with_context(|| path.display().to_string())?,
        kappa: rows.iter().map(|r| r[1]).collect(),
        fit_r2: rows.iter().map(|r| r[2]).collect(),
        valid: rows.iter().map(|r| r[3] != 0.0).collect(),
    })
}

/// Long format `(time, xi, re, im, abs)`, snapshots in time order.
pub fn write_trace(path: &Path, tr: &SpectralTrace) -> Result<()> {
    write_rows(
        path,
        &TRACE_HEADER,
        tr.snapshots().iter().flat_map(|s| {
            s.values.iter().enumerate().map(move |(i, v)| {
                vec![num(s.time), num(s.grid.freq(i)), num(v.re), num(v.im), num(v.norm())]
            })
        }),
    )
}

pub fn read_trace(path: &Path) -> Result<SpectralTrace> {
    let rows = read_rows(path, &TRACE_HEADER)?;
    if rows.is_empty() {
        bail!("{}: no rows", path.display());
    }
    let mut blocks: Vec<(f64, Vec<&Vec<f64>>)> = Vec::new();
    for r in &rows {
        match blocks.last_mut() {
            Some((t, b)) if *t == r[0] => b.push(r),
            _ => blocks.push((r[0], vec![r])),
        }
    }
    let xi: Vec<f64> = blocks[0].1.iter().map(|r| r[1]).collect();
    let grid = infer_grid(&xi).with_context(|| path.display().to_string())?;
    let mut snaps = Vec::with_capacity(blocks.len());
    for (t, b) in blocks {
        if b.iter().map(|r| r[1]).ne(xi.iter().copied()) {
            bail!("{}: snapshot at t = {t} uses a different frequency grid", path.display());
        }
        let values = b.iter().map(|r| Complex64::new(r[2], r[3])).collect();
        snaps.push(SpectralSnapshot::new(grid, values, t)?);
    }
    Ok(SpectralTrace::new(snaps)?)
}

/// Rebuild a uniform grid from its listed frequencies. A grid laid out like a
/// DFT (even length, starting at `-len/2·step`) is periodic; any other grid
/// is a plain interval.
pub fn infer_grid(xi: &[f64]) -> Result<FrequencyGrid> {
    if xi.len() < 2 {
        bail!("need at least two frequencies");
    }
    let step = (xi[xi.len() - 1] - xi[0]) / (xi.len() - 1) as f64;
    let grid = FrequencyGrid::new(xi[0], step, xi.len())?;
    for (i, &x) in xi.iter().enumerate() {
        if (grid.freq(i) - x).abs() > 1e-9 * step {
            bail!("frequencies are not equispaced near xi = {x}");
        }
    }
    let n = xi.len();
    let dft_layout = n.is_multiple_of(2) && (xi[0] + (n / 2) as f64 * step).abs() <= 1e-9 * step;
    Ok(if dft_layout {
        grid.with_period(Some(n as f64 * step))
    } else {
        grid
    })
}

/// Plain two-column or wider table with a header, for summaries and targets.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_rows(path, header, rows.iter().cloned())
}

pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header = r.headers()?.iter().map(str::to_owned).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_owned).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok((header, rows))
}
