//! Run configuration: a flat `key = value` text file plus command-line
//! overrides. Every key has a default; file values replace defaults and
//! flags replace file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::{Activation, ClassifierKind, KernelKind, MlpConfig, MulticlassScheme, SvmConfig, TrainConfig};
use crate::dataset::{SplitSpec, SynthConfig};
use crate::error::{EmgError, Result};
use crate::evaluation::{ChannelSelection, PipelineConfig, Reducer, DEFAULT_TRAIN_SIZES};
use crate::features::FeatureConfig;
use crate::rng::sub_seed;

/// Line number used for values that came from the command line.
pub const FLAG_LINE: usize = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub data: PathBuf,
    pub out: PathBuf,
    pub synth: SynthConfig,
    pub features: FeatureConfig,
    pub n_train: usize,
    pub n_test: usize,
    pub stratified: bool,
    pub channels: ChannelSelection,
    pub use_features: bool,
    pub reducer: Reducer,
    pub k: usize,
    pub classifier: ClassifierKind,
    pub standardize: bool,
    pub decimation: usize,
    pub mlp: MlpConfig,
    pub svm: SvmConfig,
    pub sweep_k: Vec<usize>,
    pub sweep_train_sizes: Vec<usize>,
    pub grid_pca_k: usize,
    pub grid_lda_k: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            data: PathBuf::from("data"),
            out: PathBuf::from("out"),
            synth: SynthConfig::default(),
            features: FeatureConfig::default(),
            n_train: 450,
            n_test: 30,
            stratified: true,
            channels: ChannelSelection::AB,
            use_features: true,
            reducer: Reducer::Pca,
            k: 15,
            classifier: ClassifierKind::Ann,
            standardize: true,
            decimation: 100,
            mlp: MlpConfig::default(),
            svm: SvmConfig::default(),
            sweep_k: (1..=30).collect(),
            sweep_train_sizes: DEFAULT_TRAIN_SIZES.to_vec(),
            grid_pca_k: 15,
            grid_lda_k: 9,
        }
    }
}

/// Recognized keys, in the order `--help` lists them.
pub const KEYS: &[&str] = &[
    "seed",
    "data",
    "out",
    "synth.subjects",
    "synth.classes",
    "synth.trials",
    "synth.samples",
    "synth.peak_mv",
    "synth.noise_sigma",
    "synth.flat_envelope",
    "features.zc_threshold",
    "features.ssc_threshold",
    "features.ar_order",
    "features.ar_full",
    "split.train",
    "split.test",
    "split.stratified",
    "channels",
    "use_features",
    "reducer",
    "k",
    "classifier",
    "standardize",
    "decimation",
    "mlp.hidden",
    "mlp.activation",
    "mlp.epochs",
    "mlp.learning_rate",
    "mlp.momentum",
    "mlp.batch_size",
    "svm.c",
    "svm.kernel",
    "svm.gamma",
    "svm.tol",
    "svm.max_passes",
    "svm.max_sweeps",
    "svm.scheme",
    "sweep.k",
    "sweep.train_sizes",
    "grid.pca_k",
    "grid.lda_k",
];

fn parse_num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse `{v}` as a number"))
}

fn parse_f64(v: &str) -> std::result::Result<f64, String> {
    let x: f64 = parse_num(v)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{v}` is not finite"))
    }
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("expected a boolean, got `{v}`")),
    }
}

/// Comma-separated list; `a..b` / `a..=b` ranges are accepted too.
fn parse_list(v: &str) -> std::result::Result<Vec<usize>, String> {
    if let Some((lo, hi)) = v.split_once("..") {
        let (hi, inclusive) = match hi.strip_prefix('=') {
            Some(h) => (h, true),
            None => (hi, false),
        };
        let lo: usize = parse_num(lo.trim())?;
        let hi: usize = parse_num(hi.trim())?;
        let end = if inclusive { hi + 1 } else { hi };
        return Ok((lo..end).collect());
    }
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_num)
        .collect()
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let v = value.trim();
        let r: std::result::Result<(), String> = (|| {
            match key {
                "seed" => self.seed = parse_num(v)?,
                "data" => self.data = PathBuf::from(v),
                "out" => self.out = PathBuf::from(v),
                "synth.subjects" => self.synth.n_subjects = parse_num(v)?,
                "synth.classes" => self.synth.n_classes = parse_num(v)?,
                "synth.trials" => self.synth.n_trials = parse_num(v)?,
                "synth.samples" => self.synth.samples_per_trial = parse_num(v)?,
                "synth.peak_mv" => self.synth.peak_mv = parse_f64(v)?,
                "synth.noise_sigma" => self.synth.noise_sigma = parse_f64(v)?,
                "synth.flat_envelope" => self.synth.flat_envelope = parse_bool(v)?,
                "features.zc_threshold" => self.features.zc_threshold = parse_f64(v)?,
                "features.ssc_threshold" => self.features.ssc_threshold = parse_f64(v)?,
                "features.ar_order" => self.features.ar_order = parse_num(v)?,
                "features.ar_full" => self.features.ar_full = parse_bool(v)?,
                "split.train" => self.n_train = parse_num(v)?,
                "split.test" => self.n_test = parse_num(v)?,
                "split.stratified" => self.stratified = parse_bool(v)?,
                "channels" => {
                    self.channels =
                        ChannelSelection::parse(v).ok_or_else(|| format!("unknown channel selection `{v}` (A, B, AB)"))?
                }
                "use_features" => self.use_features = parse_bool(v)?,
                "reducer" => self.reducer = Reducer::parse(v).ok_or_else(|| format!("unknown reducer `{v}` (pca, lda, none)"))?,
                "k" => self.k = parse_num(v)?,
                "classifier" => {
                    self.classifier = match v.to_ascii_lowercase().as_str() {
                        "svm" => ClassifierKind::Svm,
                        "ann" | "mlp" => ClassifierKind::Ann,
                        _ => return Err(format!("unknown classifier `{v}` (svm, ann)")),
                    }
                }
                "standardize" => self.standardize = parse_bool(v)?,
                "decimation" => self.decimation = parse_num(v)?,
                "mlp.hidden" => self.mlp.hidden = parse_list(v)?,
                "mlp.activation" => {
                    self.mlp.activation = Activation::parse(v).ok_or_else(|| format!("unknown activation `{v}`"))?
                }
                "mlp.epochs" => self.mlp.epochs = parse_num(v)?,
                "mlp.learning_rate" => self.mlp.learning_rate = parse_f64(v)?,
                "mlp.momentum" => self.mlp.momentum = parse_f64(v)?,
                "mlp.batch_size" => self.mlp.batch_size = parse_num(v)?,
                "svm.c" => self.svm.c = parse_f64(v)?,
                "svm.kernel" => {
                    self.svm.kernel = match v.to_ascii_lowercase().as_str() {
                        "linear" => KernelKind::Linear,
                        "rbf" => KernelKind::Rbf,
                        _ => return Err(format!("unknown kernel `{v}` (linear, rbf)")),
                    }
                }
                "svm.gamma" => {
                    self.svm.gamma = if v.eq_ignore_ascii_case("auto") {
                        None
                    } else {
                        Some(parse_f64(v)?)
                    }
                }
                "svm.tol" => self.svm.tol = parse_f64(v)?,
                "svm.max_passes" => self.svm.max_passes = parse_num(v)?,
                "svm.max_sweeps" => self.svm.max_sweeps = parse_num(v)?,
                "svm.scheme" => {
                    self.svm.scheme = match v.to_ascii_lowercase().as_str() {
                        "ovo" | "one_vs_one" => MulticlassScheme::OneVsOne,
                        "ovr" | "one_vs_rest" => MulticlassScheme::OneVsRest,
                        _ => return Err(format!("unknown scheme `{v}` (ovo, ovr)")),
                    }
                }
                "sweep.k" => self.sweep_k = parse_list(v)?,
                "sweep.train_sizes" => self.sweep_train_sizes = parse_list(v)?,
                "grid.pca_k" => self.grid_pca_k = parse_num(v)?,
                "grid.lda_k" => self.grid_lda_k = parse_num(v)?,
                _ => return Err("unknown key".into()),
            }
            Ok(())
        })();
        r.map_err(|message| EmgError::Config {
            line,
            field: key.to_string(),
            message,
        })
    }

    /// Applies a config file's contents on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| EmgError::Config {
                line: i + 1,
                field: line.to_string(),
                message: "expected `key = value`".into(),
            })?;
            self.set(key.trim(), value, i + 1)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| EmgError::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// The dataset generator config with its seed drawn from the global seed.
    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            seed: sub_seed(self.seed, "synth"),
            ..self.synth.clone()
        }
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            n_train: self.n_train,
            n_test: self.n_test,
            seed: sub_seed(self.seed, "split"),
            stratified: self.stratified,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            mlp: MlpConfig {
                seed: sub_seed(self.seed, "init"),
                ..self.mlp.clone()
            },
            svm: SvmConfig {
                seed: sub_seed(self.seed, "smo"),
                ..self.svm.clone()
            },
        }
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            channels: self.channels,
            use_features: self.use_features,
            reducer: self.reducer,
            k: self.k,
            classifier: self.classifier,
            split: self.split_spec(),
            standardize: self.standardize,
            decimation: self.decimation,
            features: self.features.clone(),
            train: self.train_config(),
        }
    }

    /// Checks every sub-config without touching data.
    pub fn validate(&self) -> Result<()> {
        self.synth_config().validate()?;
        self.features.validate()?;
        self.mlp.validate()?;
        self.svm.validate()?;
        if self.decimation == 0 {
            return Err(EmgError::invalid("decimation must be positive"));
        }
        Ok(())
    }

    /// Effective configuration, including the derived sub-seeds.
    pub fn echo_json(&self) -> String {
        let v = serde_json::json!({
            "config": self,
            "derived_seeds": {
                "synth": sub_seed(self.seed, "synth"),
                "split": sub_seed(self.seed, "split"),
                "init": sub_seed(self.seed, "init"),
                "smo": sub_seed(self.seed, "smo"),
            },
        });
        serde_json::to_string_pretty(&v).expect("config serializes")
    }
}
