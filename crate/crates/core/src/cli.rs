//! The `emg` command-line surface.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{RunConfig, FLAG_LINE, KEYS};
use crate::dataset::{load_dataset, synth_generate, write_dataset};
use crate::dimred::explained_variance_csv;
use crate::error::{EmgError, Result};
use crate::evaluation::{
    ascii_heatmap, confusion_csv_normalized, confusion_csv_raw, run_grid, run_pipeline, sweep_components,
    sweep_split, Reducer,
};
use crate::features::{extract_dataset, features_to_csv};
use crate::classifiers::mlp::loss_history_csv;

const PRECEDENCE: &str = "\
Settings are resolved in three layers: built-in defaults, then the --config \
file (flat `key = value` lines, `#` starts a comment), then command-line flags. \
Flags always win. `--set key=value` reaches any config key.

Exit codes: 0 success, 1 usage or config error, 2 data or IO error, \
3 numerical failure.";

#[derive(Debug, Parser)]
#[command(name = "emg", version, about = "EMG finger-movement classification pipeline", after_help = PRECEDENCE)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Dataset root (s<subject>/c<class>/t<trial>.csv).
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Global seed; split, init, smo and synth seeds derive from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Flat key = value config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Any config key, e.g. `--set mlp.epochs=300`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Channel selection: A, B or AB.
    #[arg(long, global = true)]
    pub channels: Option<String>,
    /// Reducer: pca, lda or none.
    #[arg(long, global = true)]
    pub reducer: Option<String>,
    /// Reducer output dimension.
    #[arg(long, global = true)]
    pub k: Option<String>,
    /// Classifier: svm or ann.
    #[arg(long, global = true)]
    pub classifier: Option<String>,
    /// Feed decimated raw samples instead of features.
    #[arg(long, global = true)]
    pub raw: bool,
    /// Training-set size.
    #[arg(long, global = true)]
    pub train: Option<String>,
    /// Test-set size.
    #[arg(long, global = true)]
    pub test: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset tree to --out.
    Synth(Common),
    /// Extract the feature table of --data into --out/features.csv.
    Extract(Common),
    /// One pipeline run with the full report set.
    Eval(Common),
    /// Accuracy versus component count or training-set size.
    Sweep {
        /// `components` or `split`.
        #[arg(long)]
        axis: String,
        #[command(flatten)]
        common: Common,
    },
    /// The channel × reducer × classifier × features grid (24 runs).
    Grid(Common),
}

impl Common {
    /// Defaults, then config file, then flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(p) = &self.data {
            cfg.data = p.clone();
        }
        if let Some(p) = &self.out {
            cfg.out = p.clone();
        }
        let flags = [
            ("channels", &self.channels),
            ("reducer", &self.reducer),
            ("k", &self.k),
            ("classifier", &self.classifier),
            ("split.train", &self.train),
            ("split.test", &self.test),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v, FLAG_LINE)?;
            }
        }
        if self.raw {
            cfg.use_features = false;
        }
        for kv in &self.set {
            let (key, value) = kv.split_once('=').ok_or_else(|| EmgError::Config {
                line: FLAG_LINE,
                field: kv.clone(),
                message: format!("expected KEY=VALUE; known keys: {}", KEYS.join(", ")),
            })?;
            cfg.set(key.trim(), value, FLAG_LINE)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| EmgError::io(path, e))
}

fn prepare_out(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| EmgError::io(&cfg.out, e))?;
    write(&cfg.out, "config_echo.json", &cfg.echo_json())
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("value serializes")
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<()> {
    let synth = cfg.synth_config();
    let ds = synth_generate(&synth)?;
    prepare_out(cfg)?;
    write_dataset(&ds, &cfg.out)?;
    let manifest = serde_json::json!({
        "global_seed": cfg.seed,
        "synth": synth,
        "n_recordings": ds.len(),
        "class_names": ds.class_names(),
        "layout": "s<subject>/c<class>/t<trial>.csv, one `a,b` sample pair per line",
    });
    write(&cfg.out, "manifest.json", &to_json(&manifest))?;
    log::info!("wrote {} recordings to {}", ds.len(), cfg.out.display());
    Ok(())
}

pub fn cmd_extract(cfg: &RunConfig) -> Result<()> {
    let ds = load_dataset(&cfg.data)?;
    let fm = extract_dataset(&ds, &cfg.features)?;
    prepare_out(cfg)?;
    write(&cfg.out, "features.csv", &features_to_csv(&fm))?;
    if fm.warning_count > 0 {
        log::warn!("{} degenerate-feature warnings", fm.warning_count);
    }
    Ok(())
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<()> {
    let ds = load_dataset(&cfg.data)?;
    let out = run_pipeline(&ds, &cfg.pipeline())?;
    prepare_out(cfg)?;
    let r = &out.report;
    write(&cfg.out, "report.json", &r.to_json())?;
    let conf = r.confusion();
    write(&cfg.out, "confusion_raw.csv", &confusion_csv_raw(&conf, &r.class_names))?;
    write(&cfg.out, "confusion_normalized.csv", &confusion_csv_normalized(&conf, &r.class_names))?;
    let raw_f: Vec<Vec<f64>> = conf.raw.iter().map(|row| row.iter().map(|&c| c as f64).collect()).collect();
    let heat = format!(
        "{}\n{}",
        ascii_heatmap("confusion (counts)", &raw_f, &r.class_names),
        ascii_heatmap("confusion (row-normalized)", &conf.normalized, &r.class_names)
    );
    write(&cfg.out, "confusion_heatmap.txt", &heat)?;
    write(&cfg.out, "model.json", &out.model.to_json())?;
    if let Some(p) = &out.projector {
        write(&cfg.out, "projector.json", &p.to_json())?;
        if !p.explained_ratio.is_empty() {
            let curve: Vec<f64> = p
                .explained_ratio
                .iter()
                .scan(0.0, |acc, r| {
                    *acc += r;
                    Some(*acc)
                })
                .collect();
            write(&cfg.out, "explained_variance.csv", &explained_variance_csv(&curve))?;
        }
    }
    if !out.loss_history.is_empty() {
        write(&cfg.out, "loss.csv", &loss_history_csv(&out.loss_history))?;
    }
    println!("accuracy {:.4} ({} test trials)", r.accuracy, r.n_test);
    Ok(())
}

pub fn cmd_sweep(cfg: &RunConfig, axis: &str) -> Result<()> {
    let ds = load_dataset(&cfg.data)?;
    let base = cfg.pipeline();
    let (res, name) = match axis {
        "components" => {
            let ks: Vec<usize> = match base.reducer {
                // the LDA rank bound caps the default range
                Reducer::Lda => cfg.sweep_k.iter().copied().filter(|&k| k < ds.n_classes()).collect(),
                _ => cfg.sweep_k.clone(),
            };
            (sweep_components(&ds, &base, &ks)?, "sweep_components")
        }
        "split" => (sweep_split(&ds, &base, &cfg.sweep_train_sizes)?, "sweep_split"),
        other => return Err(EmgError::invalid(format!("unknown sweep axis `{other}` (components, split)"))),
    };
    prepare_out(cfg)?;
    write(&cfg.out, &format!("{name}.csv"), &res.to_csv())?;
    write(&cfg.out, &format!("{name}.json"), &to_json(&res))?;
    for p in &res.points {
        println!("{} {} accuracy {:.4}", res.axis, p.x, p.accuracy);
    }
    Ok(())
}

pub fn cmd_grid(cfg: &RunConfig) -> Result<()> {
    let ds = load_dataset(&cfg.data)?;
    let res = run_grid(&ds, &cfg.pipeline(), cfg.grid_pca_k, cfg.grid_lda_k)?;
    prepare_out(cfg)?;
    write(&cfg.out, "grid.csv", &res.to_csv())?;
    write(&cfg.out, "grid_table.csv", &res.to_table_csv())?;
    write(&cfg.out, "grid.json", &to_json(&res))?;
    print!("{}", res.to_table_csv());
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(c) => cmd_synth(&c.resolve()?),
        Command::Extract(c) => cmd_extract(&c.resolve()?),
        Command::Eval(c) => cmd_eval(&c.resolve()?),
        Command::Sweep { axis, common } => {
            if axis != "components" && axis != "split" {
                return Err(EmgError::invalid(format!("unknown sweep axis `{axis}` (components, split)")));
            }
            cmd_sweep(&common.resolve()?, axis)
        }
        Command::Grid(c) => cmd_grid(&c.resolve()?),
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            if code == 0 {
                let _ = e.print();
            } else {
                let msg = e.kind().to_string();
                let detail = e.to_string();
                let first = detail.lines().next().unwrap_or(&msg).trim_start_matches("error: ");
                eprintln!("emg: usage error: {first}");
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("emg: error: {}", e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}
