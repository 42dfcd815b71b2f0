//! Multi-subject, multi-class, multi-trial two-channel EMG recordings.
//!
//! On disk a dataset is a directory tree `<root>/s<subject>/c<class>/t<trial>.csv`
//! where every CSV has no header and two comma-separated columns (channel A,
//! channel B) in millivolts, one row per sample.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EmgError, Result};
use crate::rng::{child_seed, rng_from_seed, sub_seed};

/// Finger-movement classes in label order.
pub const CLASS_NAMES: [&str; 10] = ["T", "I", "M", "R", "L", "T-I", "T-M", "T-R", "T-L", "HC"];
pub const MAX_CLASSES: usize = CLASS_NAMES.len();
pub const N_CHANNELS: usize = 2;
pub const MIN_SAMPLES: usize = 16;
pub const CANONICAL_SAMPLES: usize = 20_000;

/// One trial: two equal-length channels plus its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub subject_id: u32,
    pub class_id: usize,
    pub trial_id: u32,
    channels: [Vec<f64>; N_CHANNELS],
}

impl Recording {
    pub fn new(
        subject_id: u32,
        class_id: usize,
        trial_id: u32,
        channel_a: Vec<f64>,
        channel_b: Vec<f64>,
    ) -> Result<Self> {
        if class_id >= MAX_CLASSES {
            return Err(EmgError::Data(format!(
                "class id {class_id} out of range 0..{}",
                MAX_CLASSES - 1
            )));
        }
        if channel_a.len() != channel_b.len() {
            return Err(EmgError::Data(format!(
                "channel lengths differ ({} vs {})",
                channel_a.len(),
                channel_b.len()
            )));
        }
        if channel_a.len() < MIN_SAMPLES {
            return Err(EmgError::Data(format!(
                "recording has {} samples, need at least {MIN_SAMPLES}",
                channel_a.len()
            )));
        }
        if channel_a.iter().chain(&channel_b).any(|v| !v.is_finite()) {
            return Err(EmgError::Data("recording contains a non-finite sample".into()));
        }
        Ok(Self {
            subject_id,
            class_id,
            trial_id,
            channels: [channel_a, channel_b],
        })
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        &self.channels[i]
    }

    pub fn channels(&self) -> &[Vec<f64>; N_CHANNELS] {
        &self.channels
    }

    /// Mutable channel access for fixtures; the caller keeps samples finite.
    pub fn channel_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.channels[i]
    }

    /// (subject, class, trial) sort and identity key.
    pub fn provenance(&self) -> (u32, usize, u32) {
        (self.subject_id, self.class_id, self.trial_id)
    }
}

/// An immutable, provenance-sorted collection of recordings.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    recordings: Vec<Recording>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Sorts by (subject, class, trial); `n_classes` fixes the label space.
    pub fn new(mut recordings: Vec<Recording>, n_classes: usize) -> Result<Self> {
        if n_classes == 0 || n_classes > MAX_CLASSES {
            return Err(EmgError::invalid(format!(
                "class count must be in 1..={MAX_CLASSES}, got {n_classes}"
            )));
        }
        if let Some(r) = recordings.iter().find(|r| r.class_id >= n_classes) {
            return Err(EmgError::Data(format!(
                "recording {:?} has class {} outside 0..{n_classes}",
                r.provenance(),
                r.class_id
            )));
        }
        recordings.sort_by_key(Recording::provenance);
        if let Some(w) = recordings.windows(2).find(|w| w[0].provenance() == w[1].provenance()) {
            return Err(EmgError::Data(format!(
                "duplicate recording {:?}",
                w[0].provenance()
            )));
        }
        Ok(Self {
            recordings,
            class_names: CLASS_NAMES[..n_classes].iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn recordings(&self) -> &[Recording] {
        &self.recordings
    }

    pub fn recordings_mut(&mut self) -> &mut [Recording] {
        &mut self.recordings
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn len(&self) -> usize {
        self.recordings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recordings.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.recordings.iter().map(|r| r.class_id).collect()
    }

    /// Per-class recording counts, indexed by class id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for r in &self.recordings {
            counts[r.class_id] += 1;
        }
        counts
    }

    fn subset(&self, idx: &[usize]) -> Dataset {
        let mut recordings: Vec<Recording> = idx.iter().map(|&i| self.recordings[i].clone()).collect();
        recordings.sort_by_key(Recording::provenance);
        Dataset {
            recordings,
            class_names: self.class_names.clone(),
        }
    }
}

fn trial_path(root: &Path, r: &Recording) -> PathBuf {
    root.join(format!("s{}", r.subject_id))
        .join(format!("c{}", r.class_id))
        .join(format!("t{}.csv", r.trial_id))
}

/// Writes every recording in the on-disk layout. Sample values use the
/// shortest round-trip decimal form, so reloading is exact.
pub fn write_dataset(ds: &Dataset, root: &Path) -> Result<()> {
    fs::create_dir_all(root).map_err(|e| EmgError::io(root, e))?;
    ds.recordings.par_iter().try_for_each(|r| {
        let path = trial_path(root, r);
        let dir = path.parent().expect("trial path has a parent");
        fs::create_dir_all(dir).map_err(|e| EmgError::io(dir, e))?;
        let mut text = String::with_capacity(r.len() * 24);
        for (a, b) in r.channel(0).iter().zip(r.channel(1)) {
            let _ = writeln!(text, "{a},{b}");
        }
        fs::write(&path, text).map_err(|e| EmgError::io(&path, e))
    })
}

fn parse_prefixed(name: &str, prefix: char) -> Option<u32> {
    let rest = name.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

fn numbered_entries(dir: &Path, prefix: char, want_dir: bool) -> Result<Vec<(u32, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| EmgError::io(dir, e))? {
        let entry = entry.map_err(|e| EmgError::io(dir, e))?;
        let path = entry.path();
        if path.is_dir() != want_dir {
            continue;
        }
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        let stem = if want_dir {
            Some(name)
        } else {
            name.strip_suffix(".csv")
        };
        if let Some(id) = stem.and_then(|s| parse_prefixed(s, prefix)) {
            out.push((id, path));
        }
    }
    Ok(out)
}

/// Parses one two-column trial CSV.
pub fn parse_trial_csv(path: &Path, text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != N_CHANNELS {
            return Err(EmgError::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                column: fields.len().min(N_CHANNELS + 1),
                message: format!("expected {N_CHANNELS} columns, found {}", fields.len()),
            });
        }
        for (col, field) in fields.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| EmgError::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                column: col + 1,
                message: format!("not a number: {:?}", field.trim()),
            })?;
            if !v.is_finite() {
                return Err(EmgError::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    column: col + 1,
                    message: "non-finite sample".into(),
                });
            }
            if col == 0 {
                a.push(v);
            } else {
                b.push(v);
            }
        }
    }
    Ok((a, b))
}

/// Loads every `s*/c*/t*.csv` trial below `root`. Other files are ignored.
pub fn load_dataset(root: &Path) -> Result<Dataset> {
    if !root.is_dir() {
        return Err(EmgError::Data(format!(
            "dataset directory {} does not exist",
            root.display()
        )));
    }
    let mut files = Vec::new();
    for (subject, sdir) in numbered_entries(root, 's', true)? {
        for (class, cdir) in numbered_entries(&sdir, 'c', true)? {
            for (trial, path) in numbered_entries(&cdir, 't', false)? {
                files.push((subject, class as usize, trial, path));
            }
        }
    }
    if files.is_empty() {
        return Err(EmgError::Data(format!(
            "no trial files found under {}",
            root.display()
        )));
    }
    let recordings = files
        .par_iter()
        .map(|(subject, class, trial, path)| {
            let text = fs::read_to_string(path).map_err(|e| EmgError::io(path, e))?;
            let (a, b) = parse_trial_csv(path, &text)?;
            Recording::new(*subject, *class, *trial, a, b)
                .map_err(|e| EmgError::Data(format!("{}: {e}", path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    let n_classes = recordings.iter().map(|r| r.class_id).max().unwrap_or(0) + 1;
    if recordings.iter().any(|r| r.len() != CANONICAL_SAMPLES) {
        log::warn!("some trials are not {CANONICAL_SAMPLES} samples long");
    }
    log::info!("loaded {} recordings from {}", recordings.len(), root.display());
    Dataset::new(recordings, n_classes)
}

/// Synthetic surrogate generator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_subjects: usize,
    pub n_classes: usize,
    pub n_trials: usize,
    pub samples_per_trial: usize,
    /// Peak-to-peak amplitude bound; samples are clipped to ±peak_mv/2.
    pub peak_mv: f64,
    /// Std of additive observation noise, independent per channel.
    pub noise_sigma: f64,
    /// Disables the class-specific amplitude envelope.
    pub flat_envelope: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_subjects: 8,
            n_classes: 10,
            n_trials: 6,
            samples_per_trial: CANONICAL_SAMPLES,
            peak_mv: 10.0,
            noise_sigma: 0.05,
            flat_envelope: false,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_classes == 0 || self.n_trials == 0 || self.n_subjects == 0 {
            return Err(EmgError::invalid("synthetic dataset needs at least one subject, class and trial"));
        }
        if self.n_classes > MAX_CLASSES {
            return Err(EmgError::invalid(format!("at most {MAX_CLASSES} classes")));
        }
        if !(self.peak_mv > 0.0 && self.peak_mv.is_finite()) {
            return Err(EmgError::invalid("peak_mv must be positive"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(EmgError::invalid("noise_sigma must be non-negative"));
        }
        if self.samples_per_trial < MIN_SAMPLES {
            return Err(EmgError::invalid(format!(
                "samples_per_trial must be at least {MIN_SAMPLES}"
            )));
        }
        Ok(())
    }
}

/// Per-class generator: `x_n = a1·x_{n−1} + a2·x_{n−2} + e_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassGenerator {
    pub a1: f64,
    pub a2: f64,
    pub pole_radius: f64,
    pub pole_angle: f64,
    pub gain_a: f64,
    pub gain_b: f64,
    pub envelope_depth: f64,
}

impl ClassGenerator {
    /// Poles are spaced uniformly in radius 0.5..0.9 and angle 0.1π..0.45π,
    /// gains in 1.0..3.0 (channel B runs the gain ladder in reverse).
    pub fn for_class(class_id: usize, n_classes: usize) -> Self {
        let u = if n_classes > 1 {
            class_id as f64 / (n_classes - 1) as f64
        } else {
            0.0
        };
        let pole_radius = 0.5 + 0.4 * u;
        let pole_angle = std::f64::consts::PI * (0.1 + 0.35 * u);
        Self {
            a1: 2.0 * pole_radius * pole_angle.cos(),
            a2: -pole_radius * pole_radius,
            pole_radius,
            pole_angle,
            gain_a: 1.0 + 2.0 * u,
            gain_b: 3.0 - 2.0 * u,
            envelope_depth: 0.8 * (1.0 - u),
        }
    }

    /// Stationary variance of the process for unit innovation variance.
    pub fn stationary_variance(&self) -> f64 {
        let (a1, a2) = (self.a1, self.a2);
        (1.0 - a2) / ((1.0 + a2) * ((1.0 - a2).powi(2) - a1 * a1))
    }
}

/// Stationary std of the AR part before gain and envelope, as a fraction of peak_mv.
const BASE_STD_FRACTION: f64 = 0.025;
const WARMUP: usize = 500;

fn synth_channel(
    generator: &ClassGenerator,
    gain: f64,
    cfg: &SynthConfig,
    rng: &mut crate::rng::Rng,
) -> Vec<f64> {
    let n = cfg.samples_per_trial;
    let innovation_std = BASE_STD_FRACTION * cfg.peak_mv / generator.stationary_variance().sqrt();
    let half = cfg.peak_mv / 2.0;
    let (mut x1, mut x2) = (0.0, 0.0);
    let mut out = Vec::with_capacity(n);
    for i in 0..(WARMUP + n) {
        let e: f64 = StandardNormal.sample(rng);
        let x = generator.a1 * x1 + generator.a2 * x2 + innovation_std * e;
        x2 = x1;
        x1 = x;
        if i < WARMUP {
            continue;
        }
        let t = (i - WARMUP) as f64 / n as f64;
        let envelope = if cfg.flat_envelope {
            1.0
        } else {
            1.0 + generator.envelope_depth * (std::f64::consts::PI * t).sin().powi(2)
        };
        let noise = if cfg.noise_sigma > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            cfg.noise_sigma * z
        } else {
            0.0
        };
        out.push((gain * envelope * x + noise).clamp(-half, half));
    }
    out
}

/// Generates a seeded surrogate dataset with the canonical layout.
///
/// Each class is an AR(2) process with its own poles, gains and envelope.
/// Subjects get a small per-channel gain jitter. Every recording draws
/// from its own child stream, so generation order does not matter.
pub fn synth_generate(cfg: &SynthConfig) -> Result<Dataset> {
    cfg.validate()?;
    let synth_seed = sub_seed(cfg.seed, "synth");
    let subject_seed = sub_seed(cfg.seed, "subject");
    let jitter: Vec<[f64; 2]> = (0..cfg.n_subjects)
        .map(|s| {
            let mut rng = rng_from_seed(child_seed(subject_seed, s as u64));
            [rng.random_range(0.92..1.08), rng.random_range(0.92..1.08)]
        })
        .collect();

    let mut triples = Vec::with_capacity(cfg.n_subjects * cfg.n_classes * cfg.n_trials);
    for s in 0..cfg.n_subjects {
        for c in 0..cfg.n_classes {
            for t in 0..cfg.n_trials {
                triples.push((s, c, t));
            }
        }
    }
    let recordings = triples
        .par_iter()
        .enumerate()
        .map(|(idx, &(s, c, t))| {
            let generator = ClassGenerator::for_class(c, cfg.n_classes);
            let mut rng = rng_from_seed(child_seed(synth_seed, idx as u64));
            let a = synth_channel(&generator, generator.gain_a * jitter[s][0], cfg, &mut rng);
            let b = synth_channel(&generator, generator.gain_b * jitter[s][1], cfg, &mut rng);
            Recording::new(s as u32, c, t as u32, a, b)
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(recordings, cfg.n_classes)
}

/// Train/test partition request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
    pub stratified: bool,
}

/// Largest-remainder allocation of `total` across groups proportional to `sizes`.
/// Ties in the fractional part go to the lower group index.
fn proportional_quotas(sizes: &[usize], total: usize) -> Vec<usize> {
    let n: usize = sizes.iter().sum();
    let mut quotas: Vec<usize> = sizes.iter().map(|&s| s * total / n).collect();
    let mut remaining = total - quotas.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    // remainder numerators s*total mod n, compared exactly
    order.sort_by(|&i, &j| {
        let ri = sizes[i] * total % n;
        let rj = sizes[j] * total % n;
        rj.cmp(&ri).then(i.cmp(&j))
    });
    for &i in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        if quotas[i] < sizes[i] {
            quotas[i] += 1;
            remaining -= 1;
        }
    }
    quotas
}

/// Seeded, optionally stratified train/test split.
///
/// Stratification shuffles each class with Fisher-Yates and takes a
/// largest-remainder proportional share for training.
pub fn stratified_split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train_idx, test_idx) = split_indices(ds, spec)?;
    Ok((ds.subset(&train_idx), ds.subset(&test_idx)))
}

/// Row indices (into `ds.recordings()`) of the split, each side ascending.
pub fn split_indices(ds: &Dataset, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if spec.n_train + spec.n_test != ds.len() {
        return Err(EmgError::invalid(format!(
            "split {}+{} does not cover dataset of {}",
            spec.n_train,
            spec.n_test,
            ds.len()
        )));
    }
    if spec.n_test == 0 {
        return Err(EmgError::invalid("empty test set"));
    }
    if spec.n_train == 0 {
        return Err(EmgError::invalid("empty training set"));
    }
    let mut rng = rng_from_seed(spec.seed);
    let mut train_idx = Vec::with_capacity(spec.n_train);
    let mut test_idx = Vec::with_capacity(spec.n_test);
    if spec.stratified {
        let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, r) in ds.recordings.iter().enumerate() {
            by_class.entry(r.class_id).or_default().push(i);
        }
        if spec.n_train < by_class.len() {
            return Err(EmgError::invalid(format!(
                "stratified split needs n_train >= {} classes",
                by_class.len()
            )));
        }
        let sizes: Vec<usize> = by_class.values().map(Vec::len).collect();
        let quotas = proportional_quotas(&sizes, spec.n_train);
        for ((class, members), quota) in by_class.iter_mut().zip(quotas) {
            if quota == 0 {
                return Err(EmgError::invalid(format!(
                    "class {class} has no training members under stratification"
                )));
            }
            members.shuffle(&mut rng);
            train_idx.extend_from_slice(&members[..quota]);
            test_idx.extend_from_slice(&members[quota..]);
        }
    } else {
        let mut all: Vec<usize> = (0..ds.len()).collect();
        all.shuffle(&mut rng);
        train_idx.extend_from_slice(&all[..spec.n_train]);
        test_idx.extend_from_slice(&all[spec.n_train..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((train_idx, test_idx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SynthConfig {
        SynthConfig {
            n_subjects: 2,
            n_classes: 3,
            n_trials: 2,
            samples_per_trial: 256,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn recording_invariants() {
        assert!(Recording::new(0, 0, 0, vec![0.0; 16], vec![0.0; 16]).is_ok());
        assert!(Recording::new(0, 0, 0, vec![0.0; 15], vec![0.0; 15]).is_err());
        assert!(Recording::new(0, 0, 0, vec![0.0; 16], vec![0.0; 17]).is_err());
        assert!(Recording::new(0, 10, 0, vec![0.0; 16], vec![0.0; 16]).is_err());
        let mut a = vec![0.0; 16];
        a[3] = f64::NAN;
        assert!(Recording::new(0, 0, 0, a, vec![0.0; 16]).is_err());
    }

    #[test]
    fn synth_shape_and_clipping() {
        let cfg = small_cfg();
        let ds = synth_generate(&cfg).unwrap();
        assert_eq!(ds.len(), 12);
        assert_eq!(ds.n_classes(), 3);
        for r in ds.recordings() {
            assert_eq!(r.len(), 256);
            for ch in r.channels() {
                assert!(ch.iter().all(|v| v.abs() <= 5.0));
            }
        }
    }

    #[test]
    fn synth_clipping_at_small_peak() {
        let cfg = SynthConfig {
            peak_mv: 0.5,
            noise_sigma: 1.0,
            ..small_cfg()
        };
        let ds = synth_generate(&cfg).unwrap();
        let max = ds
            .recordings()
            .iter()
            .flat_map(|r| r.channels().iter().flatten())
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(max <= 0.25);
        assert_eq!(max, 0.25);
    }

    #[test]
    fn synth_is_deterministic() {
        let a = synth_generate(&small_cfg()).unwrap();
        let b = synth_generate(&small_cfg()).unwrap();
        assert_eq!(a, b);
        let c = synth_generate(&SynthConfig {
            seed: 7,
            ..small_cfg()
        })
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn synth_rejects_bad_config() {
        assert!(synth_generate(&SynthConfig {
            n_classes: 0,
            ..small_cfg()
        })
        .is_err());
        assert!(synth_generate(&SynthConfig {
            n_trials: 0,
            ..small_cfg()
        })
        .is_err());
        assert!(synth_generate(&SynthConfig {
            peak_mv: 0.0,
            ..small_cfg()
        })
        .is_err());
    }

    #[test]
    fn generator_poles_span_the_design_range() {
        let first = ClassGenerator::for_class(0, 10);
        let last = ClassGenerator::for_class(9, 10);
        assert!((first.pole_radius - 0.5).abs() < 1e-15);
        assert!((last.pole_radius - 0.9).abs() < 1e-15);
        assert!((first.pole_angle - 0.1 * std::f64::consts::PI).abs() < 1e-15);
        assert!((last.pole_angle - 0.45 * std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(first.gain_a, 1.0);
        assert_eq!(last.gain_a, 3.0);
    }

    #[test]
    fn quotas_are_proportional() {
        assert_eq!(proportional_quotas(&[48; 10], 450), vec![45; 10]);
        let q = proportional_quotas(&[48; 10], 375);
        assert_eq!(q.iter().sum::<usize>(), 375);
        assert_eq!(q, vec![38, 38, 38, 38, 38, 37, 37, 37, 37, 37]);
        let q = proportional_quotas(&[1, 2, 7], 5);
        assert_eq!(q.iter().sum::<usize>(), 5);
    }

    #[test]
    fn split_errors() {
        let ds = synth_generate(&small_cfg()).unwrap();
        let spec = |n_train, n_test| SplitSpec {
            n_train,
            n_test,
            seed: 1,
            stratified: true,
        };
        assert!(stratified_split(&ds, &spec(12, 0)).is_err());
        assert!(stratified_split(&ds, &spec(5, 5)).is_err());
        assert!(stratified_split(&ds, &spec(2, 10)).is_err());
        let (train, test) = stratified_split(&ds, &spec(9, 3)).unwrap();
        assert_eq!(train.class_counts(), vec![3, 3, 3]);
        assert_eq!(test.class_counts(), vec![1, 1, 1]);
    }

    #[test]
    fn csv_errors_name_the_location() {
        let p = Path::new("x.csv");
        match parse_trial_csv(p, "1,2\n3,4,5\n") {
            Err(EmgError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_trial_csv(p, "1,2\n3,abc\n") {
            Err(EmgError::Parse { line, column, .. }) => assert_eq!((line, column), (2, 2)),
            other => panic!("{other:?}"),
        }
        assert!(parse_trial_csv(p, "1,inf\n").is_err());
    }
}
