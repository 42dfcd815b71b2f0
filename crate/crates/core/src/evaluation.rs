//! Accuracy, confusion matrices and the experiment protocols built on
//! [`run_pipeline`]: component sweeps, train-size sweeps and the
//! channel × reducer × classifier × features grid.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ClassifierKind, ClassifierModel, TrainConfig};
use crate::dataset::{split_indices, Dataset, SplitSpec};
use crate::dimred::{fit_projector, Projector, ProjectorKind, Standardizer};
use crate::error::{EmgError, Result};
use crate::features::{extract_dataset, FeatureConfig, CHANNEL_PREFIXES};
use crate::linalg::Matrix;

pub fn accuracy(pred: &[usize], actual: &[usize]) -> Result<f64> {
    if pred.len() != actual.len() {
        return Err(EmgError::DimensionMismatch {
            expected: actual.len(),
            actual: pred.len(),
        });
    }
    if actual.is_empty() {
        return Err(EmgError::invalid("accuracy of an empty label set"));
    }
    let hits = pred.iter().zip(actual).filter(|(p, a)| p == a).count();
    Ok(hits as f64 / actual.len() as f64)
}

/// Rows are actual classes, columns predicted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub raw: Vec<Vec<usize>>,
    /// Row-stochastic; rows of absent classes stay all-zero.
    pub normalized: Vec<Vec<f64>>,
    pub support: Vec<usize>,
    /// Classes with no test samples.
    pub empty_rows: Vec<usize>,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.support.iter().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.raw.len()).map(|i| self.raw[i][i]).sum()
    }
}

pub fn confusion(pred: &[usize], actual: &[usize], n_classes: usize) -> Result<Confusion> {
    if pred.len() != actual.len() {
        return Err(EmgError::DimensionMismatch {
            expected: actual.len(),
            actual: pred.len(),
        });
    }
    let mut raw = vec![vec![0usize; n_classes]; n_classes];
    for (&p, &a) in pred.iter().zip(actual) {
        if p >= n_classes || a >= n_classes {
            return Err(EmgError::invalid(format!(
                "label {} outside 0..{n_classes}",
                p.max(a)
            )));
        }
        raw[a][p] += 1;
    }
    let support: Vec<usize> = raw.iter().map(|r| r.iter().sum()).collect();
    let normalized = raw
        .iter()
        .zip(&support)
        .map(|(row, &s)| {
            row.iter()
                .map(|&c| if s == 0 { 0.0 } else { c as f64 / s as f64 })
                .collect()
        })
        .collect();
    let empty_rows = (0..n_classes).filter(|&c| support[c] == 0).collect();
    Ok(Confusion {
        raw,
        normalized,
        support,
        empty_rows,
    })
}

pub fn confusion_csv_raw(c: &Confusion, class_names: &[String]) -> String {
    let mut out = format!("actual\\predicted,{}\n", class_names.join(","));
    for (name, row) in class_names.iter().zip(&c.raw) {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "{name},{}", cells.join(","));
    }
    out
}

pub fn confusion_csv_normalized(c: &Confusion, class_names: &[String]) -> String {
    let mut out = format!("actual\\predicted,{}\n", class_names.join(","));
    for (name, row) in class_names.iter().zip(&c.normalized) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
        let _ = writeln!(out, "{name},{}", cells.join(","));
    }
    out
}

/// Light to dark.
const SHADES: [char; 10] = [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'];

/// Shade-character grid; darker is larger. `values` are scaled by their max.
pub fn ascii_heatmap(title: &str, values: &[Vec<f64>], class_names: &[String]) -> String {
    let max = values.iter().flatten().fold(0.0_f64, |m, &v| m.max(v));
    let mut out = format!("{title}\n     ");
    for name in class_names {
        let _ = write!(out, "{name:>4}");
    }
    out.push('\n');
    for (name, row) in class_names.iter().zip(values) {
        let _ = write!(out, "{name:>4} ");
        for &v in row {
            let level = if max > 0.0 {
                ((v / max) * (SHADES.len() - 1) as f64).round() as usize
            } else {
                0
            };
            let ch = SHADES[level.min(SHADES.len() - 1)];
            let _ = write!(out, " {ch}{ch}{ch}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "scale: '{}' (0) .. '{}' (max)", SHADES[0], SHADES[SHADES.len() - 1]);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelSelection {
    A,
    B,
    AB,
}

impl ChannelSelection {
    pub const ALL: [ChannelSelection; 3] = [ChannelSelection::A, ChannelSelection::B, ChannelSelection::AB];

    pub fn channels(self) -> &'static [usize] {
        match self {
            ChannelSelection::A => &[0],
            ChannelSelection::B => &[1],
            ChannelSelection::AB => &[0, 1],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChannelSelection::A => "A",
            ChannelSelection::B => "B",
            ChannelSelection::AB => "AB",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Some(ChannelSelection::A),
            "B" => Some(ChannelSelection::B),
            "AB" | "A+B" => Some(ChannelSelection::AB),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reducer {
    Pca,
    Lda,
    None,
}

impl Reducer {
    pub fn name(self) -> &'static str {
        match self {
            Reducer::Pca => "pca",
            Reducer::Lda => "lda",
            Reducer::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pca" => Some(Reducer::Pca),
            "lda" => Some(Reducer::Lda),
            "none" => Some(Reducer::None),
            _ => None,
        }
    }
}

/// Everything one pipeline run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub channels: ChannelSelection,
    pub use_features: bool,
    pub reducer: Reducer,
    pub k: usize,
    pub classifier: ClassifierKind,
    pub split: SplitSpec,
    pub standardize: bool,
    /// Keep every n-th sample for the raw (no-features) input.
    pub decimation: usize,
    pub features: FeatureConfig,
    pub train: TrainConfig,
}

impl PipelineConfig {
    /// Reference protocol defaults for a dataset of `n` recordings: A+B, features
    /// on, PCA k = 15, ANN, 450/30 of 480 (scaled down for smaller datasets).
    pub fn defaults_for(n: usize, seed: u64) -> Self {
        let n_test = (n / 16).max(1);
        Self {
            channels: ChannelSelection::AB,
            use_features: true,
            reducer: Reducer::Pca,
            k: 15,
            classifier: ClassifierKind::Ann,
            split: SplitSpec {
                n_train: n - n_test,
                n_test,
                seed,
                stratified: true,
            },
            standardize: true,
            decimation: 100,
            features: FeatureConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

/// Per-recording input rows for a channel selection, before any split.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub x: Matrix,
    pub y: Vec<usize>,
    pub names: Vec<String>,
    pub n_classes: usize,
    pub feature_warnings: usize,
}

/// Builds the per-trial input matrix: selected feature blocks, or the
/// channel-concatenated raw samples decimated by `decimation`.
pub fn design_matrix(
    ds: &Dataset,
    channels: ChannelSelection,
    use_features: bool,
    features: &FeatureConfig,
    decimation: usize,
) -> Result<Design> {
    if ds.is_empty() {
        return Err(EmgError::invalid("empty dataset"));
    }
    if use_features {
        let fm = extract_dataset(ds, features)?;
        let per = features.per_channel_len();
        let cols: Vec<usize> = channels
            .channels()
            .iter()
            .flat_map(|&ch| ch * per..(ch + 1) * per)
            .collect();
        debug_assert!(cols.iter().all(|&c| fm.names[c].starts_with(CHANNEL_PREFIXES[c / per])));
        return Ok(Design {
            x: fm.matrix.select_cols(&cols),
            y: fm.labels,
            names: cols.iter().map(|&c| fm.names[c].clone()).collect(),
            n_classes: ds.n_classes(),
            feature_warnings: fm.warning_count,
        });
    }
    if decimation == 0 {
        return Err(EmgError::invalid("decimation must be positive"));
    }
    let len = ds.recordings()[0].len();
    if ds.recordings().iter().any(|r| r.len() != len) {
        return Err(EmgError::Data("raw input needs equal-length trials".into()));
    }
    let rows: Vec<Vec<f64>> = ds
        .recordings()
        .iter()
        .map(|r| {
            channels
                .channels()
                .iter()
                .flat_map(|&ch| r.channel(ch).iter().step_by(decimation).copied())
                .collect()
        })
        .collect();
    let per = len.div_ceil(decimation);
    let names = channels
        .channels()
        .iter()
        .flat_map(|&ch| (0..per).map(move |i| format!("{}_s{}", CHANNEL_PREFIXES[ch], i * decimation)))
        .collect();
    Ok(Design {
        x: Matrix::from_rows(&rows)?,
        y: ds.labels(),
        names,
        n_classes: ds.n_classes(),
        feature_warnings: 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub accuracy: f64,
    pub confusion_raw: Vec<Vec<usize>>,
    pub confusion_normalized: Vec<Vec<f64>>,
    /// What "normalized" means in `confusion_normalized`.
    pub normalization: String,
    pub per_class_support: Vec<usize>,
    pub empty_classes: Vec<usize>,
    pub class_names: Vec<String>,
    pub n_train: usize,
    pub n_test: usize,
    pub input_dim: usize,
    pub output_dim: usize,
    pub feature_warnings: usize,
    pub config: PipelineConfig,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn confusion(&self) -> Confusion {
        Confusion {
            raw: self.confusion_raw.clone(),
            normalized: self.confusion_normalized.clone(),
            support: self.per_class_support.clone(),
            empty_rows: self.empty_classes.clone(),
        }
    }
}

/// A finished run: the report plus everything that was fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub report: EvaluationReport,
    pub projector: Option<Projector>,
    /// Used when there is no reducer but standardization is on.
    pub standardizer: Option<Standardizer>,
    pub model: ClassifierModel,
    pub loss_history: Vec<f64>,
    pub test_predictions: Vec<usize>,
}

fn check_config(cfg: &PipelineConfig, n_classes: usize, d: usize) -> Result<()> {
    match cfg.reducer {
        Reducer::Pca if cfg.k < 1 || cfg.k > d => Err(EmgError::invalid(format!(
            "PCA k must be in 1..={d}, got {}",
            cfg.k
        ))),
        Reducer::Lda if cfg.k < 1 || cfg.k > d.min(n_classes - 1) => Err(EmgError::invalid(format!(
            "LDA k must be in 1..={}, got {}",
            d.min(n_classes - 1),
            cfg.k
        ))),
        _ => Ok(()),
    }
}

/// Fits reducer and classifier on the training rows only and scores the
/// test rows.
pub fn evaluate_design(design: &Design, train_idx: &[usize], test_idx: &[usize], cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    check_config(cfg, design.n_classes, design.x.cols())?;
    let x_train = design.x.select_rows(train_idx);
    let x_test = design.x.select_rows(test_idx);
    let y_train: Vec<usize> = train_idx.iter().map(|&i| design.y[i]).collect();
    let y_test: Vec<usize> = test_idx.iter().map(|&i| design.y[i]).collect();

    let (projector, standardizer, z_train, z_test) = match cfg.reducer {
        Reducer::Pca | Reducer::Lda => {
            let kind = if cfg.reducer == Reducer::Pca {
                ProjectorKind::Pca
            } else {
                ProjectorKind::Lda
            };
            let p = fit_projector(kind, &x_train, &y_train, cfg.k, cfg.standardize)?;
            let zt = p.transform(&x_train)?;
            let zs = p.transform(&x_test)?;
            (Some(p), None, zt, zs)
        }
        Reducer::None if cfg.standardize => {
            let s = Standardizer::fit(&x_train)?;
            let zt = s.apply(&x_train)?;
            let zs = s.apply(&x_test)?;
            (None, Some(s), zt, zs)
        }
        Reducer::None => (None, None, x_train, x_test),
    };

    let trained = classifiers::train(cfg.classifier, &z_train, &y_train, design.n_classes, &cfg.train)?;
    let pred = trained.model.predict(&z_test)?;
    let conf = confusion(&pred, &y_test, design.n_classes)?;
    let report = EvaluationReport {
        accuracy: accuracy(&pred, &y_test)?,
        confusion_raw: conf.raw,
        confusion_normalized: conf.normalized,
        normalization: "row (each actual-class row sums to 1)".into(),
        per_class_support: conf.support,
        empty_classes: conf.empty_rows,
        class_names: crate::dataset::CLASS_NAMES[..design.n_classes]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        n_train: train_idx.len(),
        n_test: test_idx.len(),
        input_dim: design.x.cols(),
        output_dim: z_train.cols(),
        feature_warnings: design.feature_warnings,
        config: cfg.clone(),
    };
    Ok(PipelineOutcome {
        report,
        projector,
        standardizer,
        model: trained.model,
        loss_history: trained.loss_history,
        test_predictions: pred,
    })
}

/// One full run: split, build inputs, fit on train, evaluate on test.
pub fn run_pipeline(ds: &Dataset, cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    let (train_idx, test_idx) = split_indices(ds, &cfg.split)?;
    let design = design_matrix(ds, cfg.channels, cfg.use_features, &cfg.features, cfg.decimation)?;
    evaluate_design(&design, &train_idx, &test_idx, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// `k` or `n_train`.
    pub axis: String,
    pub points: Vec<SweepPoint>,
    pub config: PipelineConfig,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},accuracy\n", self.axis);
        for p in &self.points {
            let _ = writeln!(out, "{},{}", p.x, p.accuracy);
        }
        out
    }

    pub fn accuracy_at(&self, x: usize) -> Option<f64> {
        self.points.iter().find(|p| p.x == x).map(|p| p.accuracy)
    }
}

fn check_increasing(xs: &[usize], what: &str) -> Result<()> {
    if xs.is_empty() {
        return Err(EmgError::invalid(format!("{what} list is empty")));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EmgError::invalid(format!("{what} values must be strictly increasing")));
    }
    Ok(())
}

/// Accuracy as a function of the reducer's output dimension, on one split.
pub fn sweep_components(ds: &Dataset, base: &PipelineConfig, k_values: &[usize]) -> Result<SweepResult> {
    check_increasing(k_values, "component")?;
    if base.reducer == Reducer::None {
        return Err(EmgError::invalid("component sweep needs a reducer"));
    }
    let (train_idx, test_idx) = split_indices(ds, &base.split)?;
    let design = design_matrix(ds, base.channels, base.use_features, &base.features, base.decimation)?;
    let points = k_values
        .par_iter()
        .map(|&k| {
            let cfg = PipelineConfig { k, ..base.clone() };
            let out = evaluate_design(&design, &train_idx, &test_idx, &cfg)?;
            Ok(SweepPoint {
                x: k,
                accuracy: out.report.accuracy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis: "k".into(),
        points,
        config: base.clone(),
    })
}

/// Largest valid component count for a reducer on a design.
pub fn max_components(reducer: Reducer, d: usize, n_classes: usize) -> usize {
    match reducer {
        Reducer::Pca => d,
        Reducer::Lda => d.min(n_classes.saturating_sub(1)),
        Reducer::None => d,
    }
}

pub const DEFAULT_TRAIN_SIZES: [usize; 5] = [350, 375, 400, 425, 450];

/// Accuracy as a function of the training-set size; test set is the rest.
pub fn sweep_split(ds: &Dataset, base: &PipelineConfig, train_sizes: &[usize]) -> Result<SweepResult> {
    check_increasing(train_sizes, "train size")?;
    if let Some(&bad) = train_sizes.iter().find(|&&n| n >= ds.len()) {
        return Err(EmgError::invalid(format!(
            "train size {bad} leaves no test data in a dataset of {}",
            ds.len()
        )));
    }
    let design = design_matrix(ds, base.channels, base.use_features, &base.features, base.decimation)?;
    let points = train_sizes
        .par_iter()
        .map(|&n_train| {
            let split = SplitSpec {
                n_train,
                n_test: ds.len() - n_train,
                ..base.split
            };
            let (train_idx, test_idx) = split_indices(ds, &split)?;
            let cfg = PipelineConfig { split, ..base.clone() };
            let out = evaluate_design(&design, &train_idx, &test_idx, &cfg)?;
            Ok(SweepPoint {
                x: n_train,
                accuracy: out.report.accuracy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis: "n_train".into(),
        points,
        config: base.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub channels: ChannelSelection,
    pub reducer: Reducer,
    pub classifier: ClassifierKind,
    pub use_features: bool,
    pub k: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub rows: Vec<GridRow>,
    pub pca_k: usize,
    pub lda_k: usize,
    pub config: PipelineConfig,
}

impl GridResult {
    /// Long form: one row per run.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("channels,reducer,classifier,features,k,accuracy\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.channels.name(),
                r.reducer.name(),
                r.classifier.name(),
                if r.use_features { "with" } else { "without" },
                r.k,
                r.accuracy
            );
        }
        out
    }

    pub fn get(&self, channels: ChannelSelection, reducer: Reducer, classifier: ClassifierKind, use_features: bool) -> Option<&GridRow> {
        self.rows.iter().find(|r| {
            r.channels == channels && r.reducer == reducer && r.classifier == classifier && r.use_features == use_features
        })
    }

    /// Wide form: channel × reducer rows, (features, classifier) columns, in percent.
    pub fn to_table_csv(&self) -> String {
        let mut out = String::from("channels,reducer,with_features_svm,with_features_ann,without_features_svm,without_features_ann\n");
        for ch in ChannelSelection::ALL {
            for red in [Reducer::Pca, Reducer::Lda] {
                let cell = |feat, clf| {
                    self.get(ch, red, clf, feat)
                        .map_or_else(String::new, |r| format!("{:.2}", 100.0 * r.accuracy))
                };
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    ch.name(),
                    red.name(),
                    cell(true, ClassifierKind::Svm),
                    cell(true, ClassifierKind::Ann),
                    cell(false, ClassifierKind::Svm),
                    cell(false, ClassifierKind::Ann)
                );
            }
        }
        out
    }
}

/// The 3 channel selections × {PCA, LDA} × {SVM, ANN} × features on/off grid.
/// `k` is capped at what each input dimension allows.
pub fn run_grid(ds: &Dataset, base: &PipelineConfig, pca_k: usize, lda_k: usize) -> Result<GridResult> {
    let (train_idx, test_idx) = split_indices(ds, &base.split)?;
    let mut designs = Vec::new();
    for ch in ChannelSelection::ALL {
        for feat in [true, false] {
            designs.push(((ch, feat), design_matrix(ds, ch, feat, &base.features, base.decimation)?));
        }
    }
    let mut jobs = Vec::new();
    for (di, ((ch, feat), design)) in designs.iter().enumerate() {
        for reducer in [Reducer::Pca, Reducer::Lda] {
            for classifier in [ClassifierKind::Svm, ClassifierKind::Ann] {
                let want = if reducer == Reducer::Pca { pca_k } else { lda_k };
                let k = want.min(max_components(reducer, design.x.cols(), design.n_classes));
                jobs.push((di, *ch, *feat, reducer, classifier, k));
            }
        }
    }
    let mut rows = jobs
        .par_iter()
        .map(|&(di, channels, use_features, reducer, classifier, k)| {
            let cfg = PipelineConfig {
                channels,
                use_features,
                reducer,
                classifier,
                k,
                ..base.clone()
            };
            let out = evaluate_design(&designs[di].1, &train_idx, &test_idx, &cfg)?;
            Ok(GridRow {
                channels,
                reducer,
                classifier,
                use_features,
                k,
                accuracy: out.report.accuracy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // features-on block first, then channel, reducer, classifier
    rows.sort_by_key(|r| (!r.use_features, r.channels as u8, r.reducer as u8, r.classifier as u8));
    Ok(GridResult {
        rows,
        pca_k,
        lda_k,
        config: base.clone(),
    })
}
