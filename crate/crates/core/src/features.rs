//! Time-domain EMG features and the per-trial feature vector.
//!
//! Per channel the vector holds, in order:
//! `rms, mav, zc, ssc, ar1, skew, wl, iav, m1..m{max_moment_order}`,
//! channel A before channel B. With `ar_full` the remaining AR coefficients
//! `ar2..ar{p}` are appended to each channel block after the moments.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Recording, N_CHANNELS};
use crate::error::{EmgError, Result};
use crate::linalg::Matrix;

pub const SCALARS_PER_CHANNEL: usize = 8;
pub const CHANNEL_PREFIXES: [&str; N_CHANNELS] = ["chA", "chB"];

/// Relative scale below which a signal counts as constant.
const DEGENERATE_REL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Minimum jump (mV) for a sign change to count as a zero crossing.
    pub zc_threshold: f64,
    /// Minimum slope product (mV²) for a slope sign change.
    pub ssc_threshold: f64,
    pub ar_order: usize,
    pub max_moment_order: usize,
    pub ar_full: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            zc_threshold: 0.0,
            ssc_threshold: 0.0,
            ar_order: 4,
            max_moment_order: 7,
            ar_full: false,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.zc_threshold >= 0.0) || !(self.ssc_threshold >= 0.0) {
            return Err(EmgError::invalid("feature thresholds must be >= 0"));
        }
        if self.ar_order < 1 {
            return Err(EmgError::invalid("ar_order must be >= 1"));
        }
        if self.max_moment_order < 2 {
            return Err(EmgError::invalid("max_moment_order must be >= 2"));
        }
        Ok(())
    }

    pub fn per_channel_len(&self) -> usize {
        let extra_ar = if self.ar_full { self.ar_order - 1 } else { 0 };
        SCALARS_PER_CHANNEL + self.max_moment_order + extra_ar
    }

    pub fn vector_len(&self) -> usize {
        N_CHANNELS * self.per_channel_len()
    }

    /// Column names in vector order, e.g. `chA_rms ... chB_m7`.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.vector_len());
        for prefix in CHANNEL_PREFIXES {
            for base in ["rms", "mav", "zc", "ssc", "ar1", "skew", "wl", "iav"] {
                names.push(format!("{prefix}_{base}"));
            }
            for k in 1..=self.max_moment_order {
                names.push(format!("{prefix}_m{k}"));
            }
            if self.ar_full {
                for i in 2..=self.ar_order {
                    names.push(format!("{prefix}_ar{i}"));
                }
            }
        }
        names
    }
}

/// Non-fatal degeneracies met while extracting one recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureWarning {
    /// Zero variance; skewness reported as 0.
    ConstantSkewness { channel: usize },
    /// Zero-variance input to the AR fit; coefficients reported as 0.
    DegenerateAr { channel: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: usize,
    pub subject_id: u32,
    pub trial_id: u32,
    pub warnings: Vec<FeatureWarning>,
}

/// AR model in the `x_n = −Σ a_i x_{n−i} + w_n` convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArModel {
    pub coefficients: Vec<f64>,
    /// Final prediction-error power.
    pub noise_variance: f64,
    /// Levinson reflection coefficients, one per recursion order.
    pub reflection: Vec<f64>,
}

/// A statistic that is defined by convention on degenerate input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flagged {
    pub value: f64,
    pub degenerate: bool,
}

fn require_len(x: &[f64], min: usize, what: &str) -> Result<()> {
    if x.len() < min {
        return Err(EmgError::invalid(format!(
            "{what} needs at least {min} samples, got {}",
            x.len()
        )));
    }
    Ok(())
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn rms(x: &[f64]) -> Result<f64> {
    require_len(x, 1, "rms")?;
    Ok((x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt())
}

pub fn mav(x: &[f64]) -> Result<f64> {
    require_len(x, 1, "mav")?;
    Ok(x.iter().map(|v| v.abs()).sum::<f64>() / x.len() as f64)
}

pub fn iav(x: &[f64]) -> Result<f64> {
    require_len(x, 1, "iav")?;
    Ok(x.iter().map(|v| v.abs()).sum())
}

/// Sign changes between neighbours whose jump exceeds `threshold`.
/// Exact zeros carry the previous nonzero sign; leading zeros count as positive.
pub fn zero_crossings(x: &[f64], threshold: f64) -> Result<usize> {
    require_len(x, 2, "zero_crossings")?;
    let mut count = 0;
    let mut prev_positive = true;
    let mut signs = x.iter().map(move |&v| {
        if v != 0.0 {
            prev_positive = v > 0.0;
        }
        prev_positive
    });
    let mut last = signs.next().expect("non-empty");
    for (w, sign) in x.windows(2).zip(signs) {
        if sign != last && (w[0] - w[1]).abs() > threshold {
            count += 1;
        }
        last = sign;
    }
    Ok(count)
}

/// Interior points where `(x_n − x_{n−1})·(x_n − x_{n+1}) > threshold`.
pub fn slope_sign_changes(x: &[f64], threshold: f64) -> Result<usize> {
    require_len(x, 3, "slope_sign_changes")?;
    Ok(x.windows(3)
        .filter(|w| (w[1] - w[0]) * (w[1] - w[2]) > threshold)
        .count())
}

pub fn waveform_length(x: &[f64]) -> Result<f64> {
    require_len(x, 2, "waveform_length")?;
    Ok(x.windows(2).map(|w| (w[1] - w[0]).abs()).sum())
}

/// Population skewness `M3 / M2^{3/2}`; zero (flagged) for constant input.
pub fn skewness(x: &[f64]) -> Result<Flagged> {
    require_len(x, 2, "skewness")?;
    let mu = mean(x);
    let (mut m2, mut m3) = (0.0, 0.0);
    for &v in x {
        let d = v - mu;
        m2 += d * d;
        m3 += d * d * d;
    }
    let n = x.len() as f64;
    m2 /= n;
    m3 /= n;
    let sigma = m2.sqrt();
    if sigma <= DEGENERATE_REL * max_abs(x) || sigma == 0.0 {
        return Ok(Flagged {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(Flagged {
        value: m3 / (sigma * sigma * sigma),
        degenerate: false,
    })
}

/// Entry 1 is the raw mean; entries 2..=max_order are population central moments.
pub fn central_moments(x: &[f64], max_order: usize) -> Result<Vec<f64>> {
    require_len(x, 2, "central_moments")?;
    if max_order < 1 {
        return Err(EmgError::invalid("max_order must be >= 1"));
    }
    let mu = mean(x);
    let mut sums = vec![0.0; max_order + 1];
    for &v in x {
        let d = v - mu;
        let mut p = d;
        for s in sums.iter_mut().skip(2) {
            p *= d;
            *s += p;
        }
    }
    let n = x.len() as f64;
    let mut out = Vec::with_capacity(max_order);
    out.push(mu);
    out.extend(sums[2..].iter().map(|s| s / n));
    Ok(out)
}

/// Biased autocorrelation of the mean-removed signal at lags 0..=max_lag.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    let mu = mean(x);
    let centered: Vec<f64> = x.iter().map(|v| v - mu).collect();
    let n = x.len() as f64;
    (0..=max_lag)
        .map(|k| {
            centered[k..]
                .iter()
                .zip(&centered)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n
        })
        .collect()
}

/// Yule-Walker AR fit via the Levinson-Durbin recursion.
///
/// Coefficients are returned in the `x_n = −Σ a_i x_{n−i} + w_n` form, i.e.
/// negated relative to the usual predictor coefficients.
pub fn ar_fit(x: &[f64], order: usize) -> Result<ArModel> {
    if order < 1 {
        return Err(EmgError::invalid("AR order must be >= 1"));
    }
    if order >= x.len() {
        return Err(EmgError::invalid(format!(
            "AR order {order} needs more than {order} samples, got {}",
            x.len()
        )));
    }
    let r = autocorrelation(x, order);
    let scale = max_abs(x);
    if r[0] <= (DEGENERATE_REL * scale).powi(2) || r[0] == 0.0 {
        return Err(EmgError::Degenerate("AR fit on a zero-variance signal".into()));
    }
    let mut phi = vec![0.0; order];
    let mut scratch = vec![0.0; order];
    let mut reflection = Vec::with_capacity(order);
    let mut err = r[0];
    for m in 1..=order {
        if err <= 0.0 {
            // perfectly predictable; higher orders add nothing
            err = 0.0;
            break;
        }
        let mut acc = r[m];
        for j in 1..m {
            acc -= phi[j - 1] * r[m - j];
        }
        let k = acc / err;
        scratch[..m - 1].copy_from_slice(&phi[..m - 1]);
        for j in 1..m {
            phi[j - 1] = scratch[j - 1] - k * scratch[m - j - 1];
        }
        phi[m - 1] = k;
        reflection.push(k);
        err *= 1.0 - k * k;
    }
    Ok(ArModel {
        coefficients: phi.iter().map(|p| -p).collect(),
        noise_variance: err.max(0.0),
        reflection,
    })
}

/// Builds the feature vector for one recording.
pub fn extract(rec: &Recording, cfg: &FeatureConfig) -> Result<FeatureVector> {
    cfg.validate()?;
    let mut values = Vec::with_capacity(cfg.vector_len());
    let mut warnings = Vec::new();
    for (channel, x) in rec.channels().iter().enumerate() {
        let (ar, ar_ok) = match ar_fit(x, cfg.ar_order) {
            Ok(m) => (m.coefficients, true),
            Err(EmgError::Degenerate(_)) => (vec![0.0; cfg.ar_order], false),
            Err(e) => return Err(e),
        };
        if !ar_ok {
            warnings.push(FeatureWarning::DegenerateAr { channel });
        }
        let skew = skewness(x)?;
        if skew.degenerate {
            warnings.push(FeatureWarning::ConstantSkewness { channel });
        }
        values.extend([
            rms(x)?,
            mav(x)?,
            zero_crossings(x, cfg.zc_threshold)? as f64,
            slope_sign_changes(x, cfg.ssc_threshold)? as f64,
            ar[0],
            skew.value,
            waveform_length(x)?,
            iav(x)?,
        ]);
        values.extend(central_moments(x, cfg.max_moment_order)?);
        if cfg.ar_full {
            values.extend_from_slice(&ar[1..]);
        }
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(EmgError::Numerical(format!(
            "feature {} of recording {:?} is not finite",
            cfg.feature_names()[i],
            rec.provenance()
        )));
    }
    Ok(FeatureVector {
        values,
        label: rec.class_id,
        subject_id: rec.subject_id,
        trial_id: rec.trial_id,
        warnings,
    })
}

/// Feature vectors of a whole dataset, one row per recording in dataset order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub matrix: Matrix,
    pub labels: Vec<usize>,
    pub provenance: Vec<(u32, usize, u32)>,
    pub warning_count: usize,
}

pub fn extract_dataset(ds: &Dataset, cfg: &FeatureConfig) -> Result<FeatureMatrix> {
    cfg.validate()?;
    let vectors = ds
        .recordings()
        .par_iter()
        .map(|r| extract(r, cfg))
        .collect::<Result<Vec<_>>>()?;
    let warning_count = vectors.iter().map(|v| v.warnings.len()).sum();
    if warning_count > 0 {
        log::warn!("{warning_count} degenerate feature values were set to 0");
    }
    let rows: Vec<&[f64]> = vectors.iter().map(|v| v.values.as_slice()).collect();
    Ok(FeatureMatrix {
        names: cfg.feature_names(),
        matrix: Matrix::from_rows(&rows)?,
        labels: vectors.iter().map(|v| v.label).collect(),
        provenance: ds.recordings().iter().map(Recording::provenance).collect(),
        warning_count,
    })
}

/// Header row of feature names plus `label`, one row per trial.
pub fn features_to_csv(fm: &FeatureMatrix) -> String {
    let mut out = fm.names.join(",");
    out.push_str(",label\n");
    for (row, label) in fm.matrix.row_iter().zip(&fm.labels) {
        for v in row {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{label}");
    }
    out
}

pub fn write_features_csv(fm: &FeatureMatrix, path: &Path) -> Result<()> {
    std::fs::write(path, features_to_csv(fm)).map_err(|e| EmgError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-9;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= TOL
    }

    #[test]
    fn rms_examples() {
        assert!(close(rms(&[2.0; 17]).unwrap(), 2.0));
        assert!(close(rms(&[3.0, 4.0]).unwrap(), 12.5_f64.sqrt()));
        assert!(close(rms(&[3.0, 4.0]).unwrap(), 3.535_533_905_932_737_6));
        assert_eq!(rms(&[0.0; 5]).unwrap(), 0.0);
        assert!(rms(&[]).is_err());
    }

    #[test]
    fn mav_and_iav_examples() {
        assert!(close(mav(&[1.0, -2.0, 3.0]).unwrap(), 2.0));
        assert!(close(mav(&[-1.5; 4]).unwrap(), 1.5));
        assert_eq!(mav(&[0.0; 3]).unwrap(), 0.0);
        assert!(close(iav(&[1.0, -2.0, 3.0]).unwrap(), 6.0));
        assert_eq!(iav(&[0.0; 3]).unwrap(), 0.0);
        assert!(mav(&[]).is_err());
        assert!(iav(&[]).is_err());
    }

    #[test]
    fn zero_crossing_examples() {
        assert_eq!(zero_crossings(&[1.0, -1.0, 1.0, -1.0], 0.0).unwrap(), 3);
        assert_eq!(zero_crossings(&[0.2, -0.2], 0.5).unwrap(), 0);
        assert_eq!(zero_crossings(&[0.7; 10], 0.0).unwrap(), 0);
        assert!(zero_crossings(&[1.0], 0.0).is_err());
    }

    #[test]
    fn zero_crossing_zero_ties() {
        // plateau at zero is a single crossing
        assert_eq!(zero_crossings(&[1.0, 0.0, 0.0, -1.0], 0.0).unwrap(), 1);
        // touching zero and returning is no crossing
        assert_eq!(zero_crossings(&[1.0, 0.0, 1.0], 0.0).unwrap(), 0);
        // leading zeros count as positive
        assert_eq!(zero_crossings(&[0.0, 0.0, -1.0], 0.0).unwrap(), 1);
        assert_eq!(zero_crossings(&[0.0, 0.0, 1.0], 0.0).unwrap(), 0);
    }

    #[test]
    fn slope_sign_change_examples() {
        assert_eq!(slope_sign_changes(&[0.0, 1.0, 0.0, 1.0, 0.0], 0.0).unwrap(), 3);
        assert_eq!(slope_sign_changes(&[0.0, 1.0, 2.0, 3.0], 0.0).unwrap(), 0);
        assert_eq!(slope_sign_changes(&[0.0, 1.0, 0.0], 2.0).unwrap(), 0);
        assert!(slope_sign_changes(&[0.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn waveform_length_examples() {
        assert!(close(waveform_length(&[0.0, 1.0, 0.0, 1.0]).unwrap(), 3.0));
        assert_eq!(waveform_length(&[4.0; 6]).unwrap(), 0.0);
        let x = [0.3, -1.2, 2.5, 0.0, 0.7];
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        assert!(close(waveform_length(&x).unwrap(), waveform_length(&rev).unwrap()));
    }

    #[test]
    fn skewness_examples() {
        let s = skewness(&[-1.0, 0.0, 1.0]).unwrap();
        assert!(close(s.value, 0.0) && !s.degenerate);
        // M3 = 2/27, M2 = 2/9 → (2/27)/(2/9)^{3/2} = 1/√2
        let s = skewness(&[0.0, 0.0, 1.0]).unwrap();
        assert!(close(s.value, std::f64::consts::FRAC_1_SQRT_2));
        let s = skewness(&[0.1; 10]).unwrap();
        assert!(s.degenerate);
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn moment_examples() {
        assert_eq!(central_moments(&[2.5; 8], 7).unwrap(), vec![2.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let m = central_moments(&[-1.0, 1.0], 7).unwrap();
        let want = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        for (a, b) in m.iter().zip(want) {
            assert!(close(*a, b));
        }
        let x = [0.5, -1.0, 2.0, 0.25];
        let shifted: Vec<f64> = x.iter().map(|v| v + 3.0).collect();
        let a = central_moments(&x, 7).unwrap();
        let b = central_moments(&shifted, 7).unwrap();
        assert!(close(b[0] - a[0], 3.0));
        for k in 1..7 {
            assert!((a[k] - b[k]).abs() <= 1e-9 * a[k].abs().max(1.0));
        }
    }

    #[test]
    fn ar_fit_rejects_short_and_constant() {
        assert!(ar_fit(&[1.0, 2.0], 2).is_err());
        assert!(ar_fit(&[1.0, 2.0, 3.0], 0).is_err());
        assert!(matches!(ar_fit(&[0.0; 32], 2), Err(EmgError::Degenerate(_))));
        assert!(matches!(ar_fit(&[1.0; 32], 2), Err(EmgError::Degenerate(_))));
    }

    #[test]
    fn ar_fit_order_one_closed_form() {
        // r1/r0 for a short sequence, predictor coefficient negated
        let x = [1.0, 2.0, 0.0, -1.0, 3.0];
        let r = autocorrelation(&x, 1);
        let m = ar_fit(&x, 1).unwrap();
        assert!(close(m.coefficients[0], -r[1] / r[0]));
        assert!(close(m.noise_variance, r[0] * (1.0 - (r[1] / r[0]).powi(2))));
    }

    #[test]
    fn constant_recording_features() {
        let n = 64;
        let rec = Recording::new(3, 2, 1, vec![1.0; n], vec![1.0; n]).unwrap();
        let fv = extract(&rec, &FeatureConfig::default()).unwrap();
        assert_eq!(fv.values.len(), 30);
        let block = [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, n as f64, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        for ch in 0..2 {
            for (a, b) in fv.values[ch * 15..(ch + 1) * 15].iter().zip(block) {
                assert!(close(*a, b), "{a} vs {b}");
            }
        }
        assert_eq!(fv.warnings.len(), 4);
        assert!(fv.warnings.contains(&FeatureWarning::DegenerateAr { channel: 1 }));
        assert_eq!((fv.label, fv.subject_id, fv.trial_id), (2, 3, 1));
    }

    #[test]
    fn names_follow_the_ordering_contract() {
        let names = FeatureConfig::default().feature_names();
        assert_eq!(names.len(), 30);
        assert_eq!(names[0], "chA_rms");
        assert_eq!(names[4], "chA_ar1");
        assert_eq!(names[14], "chA_m7");
        assert_eq!(names[15], "chB_rms");
        assert_eq!(names[29], "chB_m7");
        let full = FeatureConfig {
            ar_full: true,
            ..FeatureConfig::default()
        };
        assert_eq!(full.vector_len(), 36);
        assert_eq!(full.feature_names()[15], "chA_ar2");
    }
}
