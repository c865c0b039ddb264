//! End-to-end runs of the `vaeattack` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_vaeattack");

fn vaeattack(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("VAEATTACK_OUT").env("RUST_LOG", "warn");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn synth(dir: &Path, name: &str, kind: &str, n: usize, seed: u64) -> std::path::PathBuf {
    let path = dir.join(name);
    let out = vaeattack(
        &["synth", "--kind", kind, "--n", &n.to_string(), "--f", "3", "--seed", &seed.to_string(), "--out", path.to_str().unwrap()],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn summary_rows(dir: &Path) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_path(dir.join("summary.csv")).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header[0], "dataset");
    assert_eq!(header[20], "wall_time_ms");
    reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect()
}

const SMALL: &str = "epochs = 4\nhidden_layers = [4]\nbatch_size = 32\n";

#[test]
fn synth_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = fs::read(synth(dir.path(), "a.csv", "separable_gaussians", 120, 5)).unwrap();
    let b = fs::read(synth(dir.path(), "b.csv", "separable_gaussians", 120, 5)).unwrap();
    let c = fs::read(synth(dir.path(), "c.csv", "separable_gaussians", 120, 6)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn imbalanced_synth_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let path = synth(dir.path(), "imb.csv", "imbalanced_gaussians", 1000, 1);
    let ds = vaeattack::dataprep::load_csv(&path, Some("label")).unwrap();
    assert_eq!(ds.class_counts(), (900, 100));
}

#[test]
fn synth_rejects_bad_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let small = vaeattack(&["synth", "--kind", "separable_gaussians", "--n", "10", "--f", "2", "--out", out.to_str().unwrap()], &[]);
    assert!(!small.status.success());
    let kind = vaeattack(&["synth", "--kind", "spirals", "--n", "100", "--f", "2", "--out", out.to_str().unwrap()], &[]);
    assert!(!kind.status.success());
}

#[test]
fn failing_experiment_is_isolated() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "good.csv", "separable_gaussians", 160, 1);
    let config = dir.path().join("c.toml");
    fs::write(
        &config,
        format!(
            "attack = \"evasion\"\nvictim = \"lr\"\ngenerator = \"vae_mlp\"\n{SMALL}\n[grid]\ndataset_path = [\"good.csv\", \"missing.csv\", \"good.csv\"]\n"
        ),
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = vaeattack(&["run", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--workers", "2"], &[]);
    assert_eq!(out.status.code(), Some(1));
    let rows = summary_rows(&out_dir);
    let status: Vec<&str> = rows.iter().map(|r| r[19].as_str()).collect();
    assert_eq!(status, ["ok", "error", "ok"]);
    assert_eq!(rows[1][0], "missing");
    assert!(rows[1][14].is_empty());
    for i in 0..3 {
        assert!(out_dir.join(format!("run_{i}.json")).exists());
    }
    let failed: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("run_1.json")).unwrap()).unwrap();
    assert!(failed["error"].as_str().unwrap().starts_with("load:"));
}

#[test]
fn grid_rerun_is_identical_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "fixture.csv", "imbalanced_gaussians", 200, 3);
    let config = dir.path().join("grid.toml");
    fs::write(
        &config,
        format!(
            "dataset_path = \"fixture.csv\"\nvictim = \"dt\"\ngenerator = \"cvae_wnn\"\n{SMALL}\n[grid]\nattack = [\"evasion\", \"poison\"]\nwavelet = [\"morlet\", \"shannon\"]\n"
        ),
    )
    .unwrap();
    let run = |name: &str, workers: &str| {
        let out_dir = dir.path().join(name);
        let out = vaeattack(&["run", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--workers", workers], &[]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        summary_rows(&out_dir)
    };
    let mut first = run("one", "1");
    let mut second = run("two", "3");
    assert_eq!(first.len(), 4);
    for row in first.iter_mut().chain(second.iter_mut()) {
        row.pop();
    }
    assert_eq!(first, second);
    assert_eq!(first[1][1], "evasion");
    assert_eq!(first[1][4], "shannon");
}

#[test]
fn output_directory_precedence() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "d.csv", "separable_gaussians", 100, 2);
    let config = dir.path().join("c.toml");
    fs::write(
        &config,
        format!("dataset_path = \"d.csv\"\nattack = \"poison\"\nvictim = \"lr\"\ngenerator = \"vae_wnn\"\noutput = \"from_config\"\n{SMALL}"),
    )
    .unwrap();
    let env_dir = dir.path().join("from_env");
    let cli_dir = dir.path().join("from_cli");

    let out = vaeattack(&["run", "--config", config.to_str().unwrap()], &[]);
    assert!(out.status.success());
    assert!(dir.path().join("from_config/summary.csv").exists());

    let out = vaeattack(&["run", "--config", config.to_str().unwrap()], &[("VAEATTACK_OUT", &env_dir)]);
    assert!(out.status.success());
    assert!(env_dir.join("summary.csv").exists());

    let out = vaeattack(
        &["run", "--config", config.to_str().unwrap(), "--out", cli_dir.to_str().unwrap(), "--seed", "77"],
        &[("VAEATTACK_OUT", &env_dir)],
    );
    assert!(out.status.success());
    assert_eq!(summary_rows(&cli_dir)[0][12], "77");
}

#[test]
fn bad_config_exits_with_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.toml");
    fs::write(&config, "dataset_path = \"d.csv\"\nattack = \"evasion\"\nvictim = \"lr\"\ngenerator = \"vae_mlp\"\nwavelet = \"morlet\"\n").unwrap();
    let out = vaeattack(&["run", "--config", config.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wavelet"));
}
