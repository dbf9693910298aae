//! One function per subcommand. Each reads the validated config, does its
//! work and writes its artifacts into the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use timecnn_core::data::{inject_noise, load_csv, preset, split_scaled, SeriesDataset, Splits};
use timecnn_core::eval::{
    count_macs, count_params, evaluate, evaluate_inputs, lookback_sweep, rolling_correlation, rolling_records, SweepRow,
    segment_correlation, segment_records, time_inference, write_correlation_csv, MetricReport,
};
use timecnn_core::model::{load_checkpoint, save_checkpoint, ModelConfig, TimeCnnParams};
use timecnn_core::train::{format_mean_std, mean_std, train, write_history_jsonl};
use timecnn_core::{Error as CoreError, RngState};

use crate::config::{LoadedConfig, RunConfig};
use crate::error::{CliError, CliResult};

pub struct Context {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub out_dir: PathBuf,
}

impl Context {
    pub fn new(loaded: LoadedConfig, out_dir: PathBuf) -> Self {
        Self {
            config: loaded.config,
            base_dir: loaded.base_dir,
            out_dir,
        }
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    pub fn load_dataset(&self) -> CliResult<SeriesDataset> {
        let data = &self.config.data;
        let ds = if let Some(s) = &data.synthetic {
            s.to_config().generate()?
        } else {
            let path = self.resolve(data.path.as_ref().expect("validated"));
            if !path.is_file() {
                return Err(CoreError::Data(format!("dataset file not found: {}", path.display())).into());
            }
            load_csv(&path, self.config.has_date_column())?
        };
        if let Some(p) = data.preset.as_deref().and_then(preset) {
            if p.num_variables != ds.num_variables() {
                return Err(CoreError::Data(format!(
                    "preset {} expects {} variables, file has {}",
                    p.name,
                    p.num_variables,
                    ds.num_variables()
                ))
                .into());
            }
        }
        Ok(ds)
    }

    fn model_config(&self, ds: &SeriesDataset) -> CliResult<ModelConfig> {
        self.config.model.to_model_config(ds.num_variables())
    }

    fn splits(&self, ds: &SeriesDataset, cfg: &ModelConfig) -> CliResult<Splits> {
        Ok(split_scaled(ds, &self.config.split_spec()?, cfg.lookback, cfg.horizon)?.0)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::output(path, e))
}

fn write_table<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::output(path, std::io::Error::other(e.to_string())))?;
    for r in rows {
        w.serialize(r)
            .map_err(|e| CliError::output(path, std::io::Error::other(e.to_string())))?;
    }
    w.flush().map_err(|e| CliError::output(path, e))
}

#[derive(Serialize)]
struct SeedResult {
    seed: u64,
    best_epoch: usize,
    best_val_mse: f64,
    epochs_run: usize,
    test: MetricReport,
}

#[derive(Serialize)]
struct TrainMetrics<'a> {
    command: &'static str,
    dataset: &'a str,
    model: &'a ModelConfig,
    param_count: usize,
    mac_count: u64,
    runs: Vec<SeedResult>,
    mse_mean: f64,
    mse_std: f64,
    mae_mean: f64,
    mae_std: f64,
    mse: String,
    mae: String,
}

pub fn cmd_train(ctx: &Context) -> CliResult<()> {
    let ds = ctx.load_dataset()?;
    let cfg = ctx.model_config(&ds)?;
    let splits = ctx.splits(&ds, &cfg)?;
    let seeds = ctx.config.seeds();
    let mut runs = Vec::new();
    for &seed in &seeds {
        let dir = if seeds.len() == 1 {
            ctx.out_dir.clone()
        } else {
            ctx.out(&format!("seed-{seed}"))
        };
        fs::create_dir_all(&dir).map_err(|e| CliError::output(&dir, e))?;
        let tc = timecnn_core::train::TrainConfig {
            seed,
            ..ctx.config.train.clone()
        };
        eprintln!("training seed {seed} on {} ({} rows)", ds.name, ds.rows());
        let out = train(&cfg, &splits.train, &splits.val, &tc)?;
        let test = evaluate(&out.params, &cfg, &splits.test)?;
        eprintln!(
            "seed {seed}: best epoch {} of {}, test mse {:.4} mae {:.4}",
            out.best_epoch,
            out.history.len(),
            test.mse,
            test.mae
        );
        save_checkpoint(&out.params, &cfg, &dir.join("checkpoint.bin"))?;
        write_history_jsonl(&out.history, &dir.join("history.jsonl"))?;
        runs.push(SeedResult {
            seed,
            best_epoch: out.best_epoch,
            best_val_mse: out.best_val_mse,
            epochs_run: out.history.len(),
            test,
        });
    }
    let (mse_mean, mse_std) = mean_std(&runs.iter().map(|r| r.test.mse).collect::<Vec<_>>());
    let (mae_mean, mae_std) = mean_std(&runs.iter().map(|r| r.test.mae).collect::<Vec<_>>());
    write_json(
        &ctx.out("metrics.json"),
        &TrainMetrics {
            command: "train",
            dataset: &ds.name,
            model: &cfg,
            param_count: count_params(&cfg),
            mac_count: count_macs(&cfg),
            runs,
            mse_mean,
            mse_std,
            mae_mean,
            mae_std,
            mse: format_mean_std(mse_mean, mse_std, 3),
            mae: format_mean_std(mae_mean, mae_std, 3),
        },
    )
}

#[derive(Serialize)]
struct EvalMetrics<'a> {
    command: &'static str,
    dataset: &'a str,
    model: &'a ModelConfig,
    test: MetricReport,
}

pub fn cmd_eval(ctx: &Context) -> CliResult<()> {
    let path = match &ctx.config.eval.checkpoint {
        Some(p) => ctx.resolve(p),
        None => ctx.out("checkpoint.bin"),
    };
    let (params, cfg) = load_checkpoint(&path)?;
    let ds = ctx.load_dataset()?;
    if ds.num_variables() != cfg.num_variables {
        return Err(CoreError::Data(format!(
            "checkpoint expects {} variables, dataset has {}",
            cfg.num_variables,
            ds.num_variables()
        ))
        .into());
    }
    let splits = ctx.splits(&ds, &cfg)?;
    let test = evaluate(&params, &cfg, &splits.test)?;
    eprintln!("test mse {:.4} mae {:.4} over {} windows", test.mse, test.mae, test.n_windows);
    write_json(
        &ctx.out("metrics.json"),
        &EvalMetrics {
            command: "eval",
            dataset: &ds.name,
            model: &cfg,
            test,
        },
    )
}

#[derive(Debug, Serialize)]
struct AblationRow {
    variant: String,
    mse: f64,
    mae: f64,
    params: usize,
    macs: u64,
}

pub fn cmd_ablate(ctx: &Context) -> CliResult<()> {
    let ds = ctx.load_dataset()?;
    let base = ctx.model_config(&ds)?;
    let splits = ctx.splits(&ds, &base)?;
    let mut rows = Vec::new();
    for name in &ctx.config.ablate.variants {
        let cfg = ModelConfig {
            mixer: name.parse()?,
            ..base.clone()
        };
        let out = train(&cfg, &splits.train, &splits.val, &ctx.config.train)?;
        let test = evaluate(&out.params, &cfg, &splits.test)?;
        eprintln!("{name}: test mse {:.4} mae {:.4}", test.mse, test.mae);
        rows.push(AblationRow {
            variant: cfg.mixer.to_string(),
            mse: test.mse,
            mae: test.mae,
            params: count_params(&cfg),
            macs: count_macs(&cfg),
        });
    }
    write_table(&ctx.out("ablation.csv"), &rows)?;
    write_json(
        &ctx.out("metrics.json"),
        &serde_json::json!({ "command": "ablate", "dataset": ds.name, "seed": ctx.config.train.seed, "rows": rows }),
    )
}

pub fn cmd_profile(ctx: &Context) -> CliResult<()> {
    let p = &ctx.config.profile;
    let (params, cfg) = match &p.checkpoint {
        Some(path) => load_checkpoint(&ctx.resolve(path))?,
        None => {
            let ds = ctx.load_dataset()?;
            let cfg = ctx.model_config(&ds)?;
            let params = TimeCnnParams::init(&cfg, &mut RngState::new(ctx.config.train.seed))?;
            (params, cfg)
        }
    };
    let (report, _) = time_inference(&params, &cfg, p.warmup, p.trials, p.input_seed)?;
    eprintln!(
        "{} params, {} MACs, mean {:.4} ms, p50 {:.4} ms",
        report.param_count, report.mac_count, report.mean_ms, report.p50_ms
    );
    write_json(&ctx.out("profile.json"), &report)
}

pub fn cmd_correlate(ctx: &Context) -> CliResult<()> {
    let c = &ctx.config.correlate;
    let ds = ctx.load_dataset()?;
    let length = c.length.unwrap_or(ctx.config.model.lookback);
    if length == 0 || c.start + length > ds.rows() {
        return Err(CliError::Config(format!(
            "correlate slice [{}, {}) does not fit {} rows",
            c.start,
            c.start + length,
            ds.rows()
        )));
    }
    let x = ds.values.slice_rows(c.start, c.start + length);
    let n = ds.num_variables();
    let (records, file) = if c.mode == "segments" {
        let mats = segment_correlation(&x, c.segments)?;
        (segment_records(&mats), "correlation_segments.csv")
    } else {
        let pairs: Vec<[usize; 2]> = if c.pairs.is_empty() {
            (0..n).flat_map(|i| (i + 1..n).map(move |j| [i, j])).collect()
        } else {
            c.pairs.clone()
        };
        let mut records = Vec::new();
        for [i, j] in pairs {
            if i >= n || j >= n {
                return Err(CliError::Config(format!(
                    "correlate pair ({i}, {j}) out of range for {n} variables"
                )));
            }
            let r = rolling_correlation(&x.column(i), &x.column(j), c.window)?;
            records.extend(rolling_records(i, j, &r));
        }
        (records, "correlation_rolling.csv")
    };
    write_correlation_csv(&records, &ctx.out(file))?;
    let degenerate = records.iter().filter(|r| r.degenerate).count();
    write_json(
        &ctx.out("metrics.json"),
        &serde_json::json!({
            "command": "correlate",
            "mode": c.mode,
            "start": c.start,
            "length": length,
            "records": records.len(),
            "degenerate": degenerate,
            "file": file,
        }),
    )
}

#[derive(Debug, Serialize)]
struct NoiseRow {
    sigma: f64,
    mse: f64,
    mae: f64,
}

pub fn cmd_noise(ctx: &Context) -> CliResult<()> {
    let nz = &ctx.config.noise;
    let ds = ctx.load_dataset()?;
    if nz.variable >= ds.num_variables() {
        return Err(CliError::Config(format!(
            "noise.variable {} out of range for {} variables",
            nz.variable,
            ds.num_variables()
        )));
    }
    let cfg = ctx.model_config(&ds)?;
    let splits = ctx.splits(&ds, &cfg)?;
    let out = train(&cfg, &splits.train, &splits.val, &ctx.config.train)?;
    let root = RngState::new(nz.seed);
    let mut rows = Vec::new();
    for (k, &sigma) in nz.sigmas.iter().enumerate() {
        let noisy = inject_noise(&splits.test, nz.variable, sigma, &mut root.derive(k as u64))?;
        let rep = evaluate_inputs(&out.params, &cfg, &noisy, &splits.test)?;
        eprintln!("sigma {sigma}: mse {:.4}", rep.per_variable_mse[nz.variable]);
        rows.push(NoiseRow {
            sigma,
            mse: rep.per_variable_mse[nz.variable],
            mae: rep.per_variable_mae[nz.variable],
        });
    }
    write_table(&ctx.out("noise.csv"), &rows)?;
    write_json(
        &ctx.out("metrics.json"),
        &serde_json::json!({ "command": "noise", "variable": nz.variable, "rows": rows }),
    )
}

pub fn cmd_synth(ctx: &Context) -> CliResult<()> {
    let s = ctx
        .config
        .data
        .synthetic
        .as_ref()
        .ok_or_else(|| CliError::Config("synth needs a [data.synthetic] section".into()))?;
    let ds = s.to_config().generate()?;
    timecnn_core::data::write_csv(&ds, &ctx.out("synthetic.csv"))?;
    // Correlation sign of every variable with the driver, row by row.
    let signs = s.to_config().signs()?;
    let path = ctx.out("regimes.csv");
    let io = |e: csv::Error| CliError::output(&path, std::io::Error::other(e.to_string()));
    let mut w = csv::Writer::from_path(&path).map_err(io)?;
    w.write_record(&ds.column_names).map_err(io)?;
    for i in 0..signs.rows() {
        w.write_record(signs.row(i).iter().map(|v| format!("{v}"))).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::output(&path, e))?;
    write_json(
        &ctx.out("metrics.json"),
        &serde_json::json!({ "command": "synth", "rows": ds.rows(), "num_variables": ds.num_variables(), "columns": ds.column_names }),
    )
}

pub fn cmd_sweep(ctx: &Context) -> CliResult<()> {
    let ds = ctx.load_dataset()?;
    let base = ctx.model_config(&ds)?;
    let rows = lookback_sweep(
        &ds,
        &ctx.config.split_spec()?,
        &base,
        &ctx.config.sweep.lookbacks,
        &ctx.config.train,
    )?;
    for r in &rows {
        eprintln!("L={}: mse {:.4} mae {:.4}", r.lookback, r.mse, r.mae);
    }
    write_table(&ctx.out("sweep.csv"), &rows)?;
    let k = rows.len() as f64;
    let mean = |f: fn(&SweepRow) -> f64| rows.iter().map(f).sum::<f64>() / k;
    write_json(
        &ctx.out("metrics.json"),
        &serde_json::json!({
            "command": "sweep",
            "dataset": ds.name,
            "rows": rows,
            "mean": {
                "mse": mean(|r| r.mse),
                "mae": mean(|r| r.mae),
                "param_count": mean(|r| r.param_count as f64),
                "mac_count": mean(|r| r.mac_count as f64),
            },
        }),
    )
}
