//! CLI contract tests: exit codes, listings, artifact shapes, determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mvfactor"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mvfactor_cli_{}_{tag}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_gen_config(path: &Path, seed: u64) {
    fs::write(
        path,
        format!(
            r#"{{
  "n": 64,
  "seed": {seed},
  "modality_dims": [6, 6, 6],
  "shared_dim": 2,
  "unique_dims": [2, 2, 2],
  "sigma_obs": 0.1,
  "sigma_label": 0.1,
  "label_shared_weight": 1.0,
  "label_unique_weights": [0.5, 0.5, 0.5],
  "count_modality": 0,
  "loading_seed": 3
}}"#
        ),
    )
    .unwrap();
}

fn write_train_config(path: &Path, scheme: &str) {
    fs::write(
        path,
        format!(
            r#"{{
  "scheme": "{scheme}",
  "embed_dim": 8,
  "encoder_hidden": [12],
  "lr": 0.001,
  "batch_size": 16,
  "pretrain_epochs": 2,
  "joint_epochs": 2,
  "seed": 11,
  "critic_hidden": 8
}}"#
        ),
    )
    .unwrap();
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn objective_lines(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| l.starts_with("U(") || l.starts_with("S(") || l.starts_with("H("))
        .collect()
}

#[test]
fn enumerate_headline_counts() {
    let out = bin()
        .args(["enumerate", "--m", "4", "--scheme", "pairwise"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(objective_lines(&stdout_of(&out)).len(), 10);

    let out = bin()
        .args(["enumerate", "--m", "4", "--scheme", "factorized"])
        .output()
        .unwrap();
    assert_eq!(objective_lines(&stdout_of(&out)).len(), 15);

    let out = bin()
        .args(["enumerate", "--m", "2", "--scheme", "factorized"])
        .output()
        .unwrap();
    let text = stdout_of(&out);
    assert_eq!(objective_lines(&text), ["U(1)", "U(2)", "S(1,2)"]);

    // JSON format carries the same listing.
    let out = bin()
        .args([
            "enumerate",
            "--m",
            "3",
            "--scheme",
            "factorized",
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    let json: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(json["count"], 7);
    assert_eq!(json["objectives"][6], "H(1,2,3)");
}

#[test]
fn enumerate_rejects_out_of_range_m() {
    let out = bin()
        .args(["enumerate", "--m", "7", "--scheme", "pairwise"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["enumerate", "--m", "1", "--scheme", "pairwise"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_scheme_and_bad_suite_exit_2() {
    let out = bin()
        .args(["enumerate", "--m", "3", "--scheme", "sideways"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["verify", "--suite", "nonsense"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_is_byte_deterministic_and_validates_config() {
    let dir = tmp_dir("gen");
    let config = dir.join("gen.json");
    write_gen_config(&config, 9);
    for name in ["a", "b"] {
        let out = bin()
            .args(["gen", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(dir.join(name))
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for file in [
        "modality_0.csv",
        "modality_1.csv",
        "modality_2.csv",
        "labels.csv",
        "dataset.json",
    ] {
        let a = fs::read(dir.join("a").join(file)).unwrap();
        let b = fs::read(dir.join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }

    // Config missing the seed names the field and exits 2.
    let bad = dir.join("bad.json");
    fs::write(&bad, r#"{"n": 8, "modality_dims": [4], "shared_dim": 1, "unique_dims": [1], "label_unique_weights": [0.0]}"#).unwrap();
    let out = bin()
        .args(["gen", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.join("c"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("seed"),
        "stderr should name the missing field"
    );
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn train_traces_match_scheme_and_ablation() {
    let dir = tmp_dir("train");
    let gen_config = dir.join("gen.json");
    let train_config = dir.join("train.json");
    write_gen_config(&gen_config, 4);
    write_train_config(&train_config, "pairwise");
    let data = dir.join("data");
    assert!(bin()
        .args(["gen", "--config"])
        .arg(&gen_config)
        .arg("--out")
        .arg(&data)
        .status()
        .unwrap()
        .success());

    let distinct_objectives = |model_dir: &Path| -> usize {
        let text = fs::read_to_string(model_dir.join("traces.csv")).unwrap();
        let mut names: Vec<String> = text
            .lines()
            .skip(1)
            .map(|l| l.split('"').nth(1).unwrap().to_string())
            .collect();
        names.sort();
        names.dedup();
        names.len()
    };

    let pairwise = dir.join("pairwise");
    assert!(bin()
        .args(["train", "--data"])
        .arg(&data)
        .arg("--config")
        .arg(&train_config)
        .arg("--out")
        .arg(&pairwise)
        .status()
        .unwrap()
        .success());
    assert_eq!(distinct_objectives(&pairwise), 6);

    let factorized = dir.join("factorized");
    assert!(bin()
        .args(["train", "--data"])
        .arg(&data)
        .arg("--config")
        .arg(&train_config)
        .args(["--scheme", "factorized", "--out"])
        .arg(&factorized)
        .status()
        .unwrap()
        .success());
    assert_eq!(distinct_objectives(&factorized), 7);

    let ur = dir.join("ur");
    assert!(bin()
        .args(["train", "--data"])
        .arg(&data)
        .arg("--config")
        .arg(&train_config)
        .args(["--ablation", "ur", "--out"])
        .arg(&ur)
        .status()
        .unwrap()
        .success());
    assert_eq!(distinct_objectives(&ur), 3);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn eval_reports_have_expected_shapes() {
    let dir = tmp_dir("eval");
    let gen_config = dir.join("gen.json");
    let train_config = dir.join("train.json");
    write_gen_config(&gen_config, 6);
    write_train_config(&train_config, "pairwise");
    let data = dir.join("data");
    let model = dir.join("model");
    assert!(bin()
        .args(["gen", "--config"])
        .arg(&gen_config)
        .arg("--out")
        .arg(&data)
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .args(["train", "--data"])
        .arg(&data)
        .arg("--config")
        .arg(&train_config)
        .arg("--out")
        .arg(&model)
        .status()
        .unwrap()
        .success());

    // Regression: 5 folds + mean + std rows.
    let out_dir = dir.join("reg");
    assert!(bin()
        .args(["eval", "--task", "regression", "--data"])
        .arg(&data)
        .arg("--model")
        .arg(&model)
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap()
        .success());
    let csv = fs::read_to_string(out_dir.join("regression.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5 + 2);
    assert!(csv.starts_with("fold,mae,rmse,r2"));

    // Complexity: pairwise + factorized rows and the percent-increase row.
    let out_dir = dir.join("cx");
    assert!(bin()
        .args(["eval", "--task", "complexity", "--data"])
        .arg(&data)
        .arg("--config")
        .arg(&train_config)
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap()
        .success());
    let csv = fs::read_to_string(out_dir.join("complexity.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("pairwise,3,6,24"));
    assert!(lines[2].starts_with("factorized,3,7,28"));
    assert!(lines[3].starts_with("percent_increase"));

    // Ablation: base/ir/ur rows.
    let out_dir = dir.join("abl");
    assert!(bin()
        .args(["eval", "--task", "ablation", "--data"])
        .arg(&data)
        .arg("--config")
        .arg(&train_config)
        .args(["--seeds", "3", "--out"])
        .arg(&out_dir)
        .status()
        .unwrap()
        .success());
    let csv = fs::read_to_string(out_dir.join("ablation.csv")).unwrap();
    let variants: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(variants, ["base", "ir", "ur"]);

    // Sweep with a duplicate subset warns and dedups.
    let out_dir = dir.join("sweep");
    let out = bin()
        .args(["eval", "--task", "sweep", "--data"])
        .arg(&data)
        .arg("--config")
        .arg(&train_config)
        .args(["--seeds", "3", "--subsets", "1,2,3;1,2;2,1", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicate"));
    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "{csv}");
    assert!(csv.contains("1+2+3"));

    // Run manifests accompany every artifact directory.
    for d in ["reg", "cx", "abl", "sweep"] {
        assert!(dir.join(d).join("run_manifest.json").exists());
    }
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn missing_data_directory_exits_3() {
    let dir = tmp_dir("io");
    let train_config = dir.join("train.json");
    write_train_config(&train_config, "pairwise");
    let out = bin()
        .args(["train", "--data"])
        .arg(dir.join("no_such_dataset"))
        .arg("--config")
        .arg(&train_config)
        .arg("--out")
        .arg(dir.join("model"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_oracle_suite_passes_and_writes_checks() {
    let dir = tmp_dir("verify");
    let out = bin()
        .args(["verify", "--suite", "oracle", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("[PASS] oracle/inclusion_identity_residual"));
    let csv = fs::read_to_string(dir.join("checks.csv")).unwrap();
    assert!(csv.lines().count() >= 4);
    fs::remove_dir_all(&dir).unwrap();
}
