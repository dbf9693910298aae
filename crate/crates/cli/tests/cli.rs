use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BASE: &str = r#"
[data.synthetic]
rows = 400
num_variables = 4
regime_length = 24
seed = 3

[model]
lookback = 24
horizon = 8
token_dim = 8
hidden_dim = 16
ffn_blocks = 1

[train]
max_epochs = 2
batch_size = 16
"#;

struct Fixture {
    dir: TempDir,
    config: PathBuf,
}

impl Fixture {
    fn new(extra: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let config = dir.path().join("run.toml");
        fs::write(&config, format!("{BASE}\n{extra}")).unwrap();
        Self { dir, config }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, command: &str, out: &str, extra: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_timecnn"))
            .arg(command)
            .arg("--config")
            .arg(&self.config)
            .arg("--out")
            .arg(self.out(out))
            .args(extra)
            .output()
            .unwrap()
    }

    fn ok(&self, command: &str, out: &str, extra: &[&str]) -> PathBuf {
        let o = self.run(command, out, extra);
        assert!(o.status.success(), "{command}: {}", String::from_utf8_lossy(&o.stderr));
        self.out(out)
    }
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

#[test]
fn exit_codes() {
    let f = Fixture::new("");
    assert_eq!(f.run("train", "a", &["--set", "model.bogus=1"]).status.code(), Some(1));
    assert_eq!(f.run("nonsense", "a", &[]).status.code(), Some(1));

    let missing = Fixture::new("");
    fs::write(&missing.config, "[data]\npath = \"nowhere/ETTh1.csv\"\npreset = \"ETTh1\"\n").unwrap();
    let o = missing.run("train", "b", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nowhere/ETTh1.csv"));

    let o = f.run("train", "c", &["--set", "train.lr=1e200"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn train_artifacts_and_repeatability() {
    let f = Fixture::new("");
    let a = f.ok("train", "a", &["--seed", "4"]);
    let b = f.ok("train", "b", &["--seed", "4"]);
    for name in ["checkpoint.bin", "history.jsonl", "metrics.json", "config.toml"] {
        assert!(a.join(name).is_file(), "{name}");
    }
    assert_eq!(fs::read(a.join("metrics.json")).unwrap(), fs::read(b.join("metrics.json")).unwrap());
    assert_eq!(fs::read(a.join("checkpoint.bin")).unwrap(), fs::read(b.join("checkpoint.bin")).unwrap());
    let history = fs::read_to_string(a.join("history.jsonl")).unwrap();
    assert!(!history.trim().is_empty());

    let ckpt = a.join("checkpoint.bin").display().to_string();
    let e = f.ok("eval", "e", &["--set", &format!("eval.checkpoint={ckpt:?}"), "--seed", "4"]);
    let train_mse = json(&a.join("metrics.json"))["runs"][0]["test"]["mse"].as_f64().unwrap();
    assert_eq!(json(&e.join("metrics.json"))["test"]["mse"].as_f64().unwrap(), train_mse);
}

#[test]
fn multi_seed_layout() {
    let f = Fixture::new("[run]\nseeds = [1, 2]\n");
    let out = f.ok("train", "m", &[]);
    assert!(out.join("seed-1/checkpoint.bin").is_file());
    assert!(out.join("seed-2/history.jsonl").is_file());
    let m = json(&out.join("metrics.json"));
    assert_eq!(m["runs"].as_array().unwrap().len(), 2);
    assert!(m["mse"].as_str().unwrap().contains('±'));
}

#[test]
fn ablation_parameter_gap() {
    let f = Fixture::new("[ablate]\nvariants = [\"crosscnn\", \"none\"]\n");
    let out = f.ok("ablate", "a", &[]);
    let rows = csv_rows(&out.join("ablation.csv"));
    assert_eq!(rows.len(), 2);
    let params = |name: &str| -> usize {
        rows.iter().find(|r| &r[0] == name).unwrap()[3].parse().unwrap()
    };
    assert_eq!(params("crosscnn") - params("none"), 24 * 4);
}

#[test]
fn correlate_segments_and_rolling() {
    let f = Fixture::new("[correlate]\nmode = \"segments\"\nlength = 96\nsegments = 4\n");
    let out = f.ok("correlate", "s", &[]);
    let rows = csv_rows(&out.join("correlation_segments.csv"));
    assert_eq!(rows.len(), 4 * 4 * 4);
    let indices: std::collections::BTreeSet<String> = rows.iter().map(|r| r[0].to_string()).collect();
    assert_eq!(indices.len(), 4);
    for r in rows.iter().filter(|r| r[1] == r[2]) {
        assert_eq!(r[3].parse::<f64>().unwrap(), 1.0);
    }

    let f = Fixture::new("[correlate]\nmode = \"rolling\"\nstart = 48\nlength = 48\nwindow = 4\npairs = [[0, 1]]\n");
    let out = f.ok("correlate", "r", &[]);
    assert_eq!(csv_rows(&out.join("correlation_rolling.csv")).len(), 45);

    let f = Fixture::new("[correlate]\nmode = \"rolling\"\npairs = [[0, 9]]\n");
    assert_eq!(f.run("correlate", "bad", &[]).status.code(), Some(1));
}

#[test]
fn identical_columns_correlate_perfectly() {
    let f = Fixture::new("");
    let data = f.out("twins.csv");
    let mut text = String::from("a,b\n");
    for t in 0..60 {
        let v = (t as f64 * 0.37).sin() + 0.01 * t as f64;
        text.push_str(&format!("{v},{v}\n"));
    }
    fs::write(&data, text).unwrap();
    fs::write(
        &f.config,
        "[data]\npath = \"twins.csv\"\nhas_date_column = false\n[correlate]\nmode = \"rolling\"\nlength = 60\nwindow = 5\n",
    )
    .unwrap();
    let out = f.ok("correlate", "t", &[]);
    let rows = csv_rows(&out.join("correlation_rolling.csv"));
    assert!(!rows.is_empty());
    for r in rows {
        assert!((r[3].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn profile_schema() {
    let f = Fixture::new("[profile]\nwarmup = 3\ntrials = 7\n");
    let out = f.ok("profile", "p", &[]);
    let p = json(&out.join("profile.json"));
    for key in ["param_count", "mac_count", "mean_ms", "std_ms", "p50_ms", "p99_ms"] {
        assert!(p[key].is_number(), "{key}");
    }
    assert_eq!(p["warmup_iters"], 3);
    assert_eq!(p["timed_iters"], 7);
}

#[test]
fn noise_rows_and_clean_baseline() {
    let f = Fixture::new("[noise]\nvariable = 1\nsigmas = [0.0, 1.0, 3.0]\n");
    let out = f.ok("noise", "n", &["--seed", "2"]);
    let rows = csv_rows(&out.join("noise.csv"));
    assert_eq!(rows.len(), 3);
    let noise_clean: f64 = rows[0][1].parse().unwrap();

    let t = f.ok("train", "t", &["--seed", "2"]);
    let clean = json(&t.join("metrics.json"))["runs"][0]["test"]["per_variable_mse"][1].as_f64().unwrap();
    assert_eq!(noise_clean, clean);
}

#[test]
fn synth_writes_series_and_regimes() {
    let f = Fixture::new("");
    let out = f.ok("synth", "s", &[]);
    assert_eq!(csv_rows(&out.join("synthetic.csv")).len(), 400);
    assert_eq!(csv_rows(&out.join("regimes.csv")).len(), 400);
}

#[test]
fn sweep_rows_and_mean() {
    let f = Fixture::new("[sweep]\nlookbacks = [12, 24]\n");
    let out = f.ok("sweep", "w", &[]);
    let rows = csv_rows(&out.join("sweep.csv"));
    assert_eq!(rows.len(), 2);
    let m = json(&out.join("metrics.json"));
    let mse: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    let mean = m["mean"]["mse"].as_f64().unwrap();
    assert!((mean - (mse[0] + mse[1]) / 2.0).abs() < 1e-12);
    let params: Vec<usize> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert_eq!(params[1] - params[0], 12 * 4 + 12 * 8);
}
