use std::fs;
use std::path::Path;
use std::process::Command;

use freqbias_cli::manifest::{self, artifact_files, sha256_hex};

fn freqbias() -> Command {
    Command::new(env!("CARGO_BIN_EXE_freqbias"))
}

fn write_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let p = dir.join("exp.toml");
    let body = format!(
        "preset = \"frozen-check\"\noutput_dir = \"{}\"\nseeds = {{ count = 2, base = 1 }}\n{extra}\n[train]\nm = 32\niterations = 40\nsnapshot_every = 10\n",
        dir.join("out").display()
    );
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn run_writes_checksummed_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let st = freqbias().arg("run").arg(&cfg).env("FREQBIAS_THREADS", "2").status().unwrap();
    assert!(st.success());
    let out = dir.path().join("out");
    let kv = manifest::parse(&fs::read_to_string(out.join(manifest::MANIFEST)).unwrap());
    let sums: Vec<_> = kv.iter().filter(|(k, _)| k.starts_with("sha256.")).collect();
    assert_eq!(sums.len(), artifact_files(&out).unwrap().len());
    for (k, v) in sums {
        let rel = k.trim_start_matches("sha256.");
        assert_eq!(&sha256_hex(&fs::read(out.join(rel)).unwrap()), v, "{rel}");
    }
    assert_eq!(kv.iter().filter(|(k, _)| k.starts_with("seed.")).count(), 4);
    assert!(out.join("kappa.svg").exists() && out.join("summary.csv").exists());
}

#[test]
fn echoed_config_reproduces_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    assert!(freqbias().arg("run").arg(&cfg).status().unwrap().success());
    let out = dir.path().join("out");
    let again = dir.path().join("again");
    let st = freqbias()
        .arg("run")
        .arg(out.join("config.toml"))
        .arg("--out")
        .arg(&again)
        .env("FREQBIAS_THREADS", "1")
        .status()
        .unwrap();
    assert!(st.success());
    for f in artifact_files(&out).unwrap() {
        assert_eq!(fs::read(out.join(&f)).unwrap(), fs::read(again.join(&f)).unwrap(), "{}", f.display());
    }
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    fs::write(&p, "preset = \"custom\"\n[fem]\nenabled = true\ndt = -1.0\n").unwrap();
    let o = freqbias().arg("run").arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fem.dt"));
}

#[test]
fn mid_run_failure_leaves_record_and_no_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("out");
    fs::create_dir_all(&out).unwrap();
    // A file where the per-seed directory should go makes the run fail part way.
    fs::write(out.join("seeds"), "").unwrap();
    let o = freqbias().arg("run").arg(&cfg).output().unwrap();
    assert!(!o.status.success());
    assert!(out.join(manifest::FAILURE).exists());
    assert!(!out.join(manifest::MANIFEST).exists());
    assert!(out.join("config.toml").exists());
}

#[test]
fn fem_kappa_compare_and_plot_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[fem]\nt_final = 10.0\nsnapshot_every = 20\n");
    assert!(freqbias().arg("run").arg(&cfg).status().unwrap().success());
    let fem_dir = dir.path().join("fem");
    assert!(freqbias().arg("fem").arg(&cfg).arg("--out").arg(&fem_dir).status().unwrap().success());
    let out = dir.path().join("out");

    let o = freqbias().arg("compare").arg(&out).arg(&fem_dir).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("label,time_scale,nn_time,model_time,distance\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 5);

    let trace = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap().to_str().unwrap().starts_with("trace_"))
        .unwrap();
    let k = dir.path().join("k.csv");
    assert!(freqbias().arg("kappa").arg(&trace).arg("--out").arg(&k).status().unwrap().success());
    assert!(fs::read_to_string(&k).unwrap().starts_with("xi,kappa,r2,valid\n"));

    fs::remove_file(out.join("kappa.svg")).unwrap();
    assert!(freqbias().arg("plot").arg(&out).status().unwrap().success());
    assert!(out.join("kappa.svg").exists());

    let empty = dir.path().join("empty");
    fs::create_dir_all(&empty).unwrap();
    assert!(!freqbias().arg("plot").arg(&empty).status().unwrap().success());
    assert_eq!(fs::read_dir(&empty).unwrap().count(), 0);
}

#[test]
fn preset_subcommand_prints_a_loadable_config() {
    let o = freqbias().args(["preset", "kappa-sweep"]).output().unwrap();
    let text = String::from_utf8(o.stdout).unwrap();
    let cfg = freqbias_cli::ExperimentConfig::from_toml(&text).unwrap();
    assert_eq!(cfg, freqbias_cli::ExperimentConfig::preset(freqbias_cli::Preset::KappaSweep));
}
