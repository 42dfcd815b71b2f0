//! Soft-margin kernel SVM trained with sequential minimal optimization,
//! plus one-vs-one / one-vs-rest multiclass wrappers.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EmgError, Result};
use crate::linalg::{dot, Matrix};
use crate::rng::rng_from_seed;

/// Dual coefficients at or below this are treated as zero.
pub const ALPHA_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MulticlassScheme {
    OneVsOne,
    OneVsRest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub c: f64,
    pub kernel: KernelKind,
    /// RBF width; `None` uses `1 / (d · var(X))` over the training matrix.
    pub gamma: Option<f64>,
    pub tol: f64,
    /// Consecutive sweeps without any α change before stopping.
    pub max_passes: usize,
    /// Hard cap on sweeps over the training set.
    pub max_sweeps: usize,
    pub scheme: MulticlassScheme,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 10.0,
            kernel: KernelKind::Rbf,
            gamma: None,
            tol: 1e-3,
            max_passes: 5,
            max_sweeps: 10_000,
            scheme: MulticlassScheme::OneVsOne,
            seed: 42,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(EmgError::invalid("SVM C must be positive"));
        }
        if !(self.tol > 0.0) {
            return Err(EmgError::invalid("SVM tolerance must be positive"));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(EmgError::invalid("RBF gamma must be positive"));
            }
        }
        if self.max_passes == 0 || self.max_sweeps == 0 {
            return Err(EmgError::invalid("SVM pass limits must be positive"));
        }
        Ok(())
    }

    pub fn resolve_kernel(&self, x: &Matrix) -> Kernel {
        match self.kernel {
            KernelKind::Linear => Kernel::Linear,
            KernelKind::Rbf => Kernel::Rbf {
                gamma: self.gamma.unwrap_or_else(|| scale_gamma(x)),
            },
        }
    }
}

/// `1 / (d · var)` with the variance taken over every entry of `x`.
pub fn scale_gamma(x: &Matrix) -> f64 {
    let v = x.as_slice();
    if v.is_empty() {
        return 1.0;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (x.cols() as f64 * var)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmBinary {
    pub support_vectors: Matrix,
    /// `α_i · y_i` per support vector.
    pub dual_coef: Vec<f64>,
    /// Row of each support vector in the training matrix.
    pub support_indices: Vec<usize>,
    pub bias: f64,
    pub kernel: Kernel,
    pub c: f64,
}

impl SvmBinary {
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.support_vectors.cols() {
            return Err(EmgError::DimensionMismatch {
                expected: self.support_vectors.cols(),
                actual: x.len(),
            });
        }
        Ok(self
            .support_vectors
            .row_iter()
            .zip(&self.dual_coef)
            .map(|(sv, c)| c * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias)
    }

    /// +1 when the decision value is positive, −1 otherwise.
    pub fn predict_sign(&self, x: &[f64]) -> Result<i8> {
        Ok(if self.decision(x)? > 0.0 { 1 } else { -1 })
    }

    /// Full-length α vector for the training set the model came from.
    pub fn alphas(&self, n_train: usize) -> Vec<f64> {
        let mut a = vec![0.0; n_train];
        for (&i, c) in self.support_indices.iter().zip(&self.dual_coef) {
            a[i] = c.abs();
        }
        a
    }

    /// Primal weight vector; only meaningful for the linear kernel.
    pub fn linear_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.support_vectors.cols()];
        for (sv, c) in self.support_vectors.row_iter().zip(&self.dual_coef) {
            for (wi, s) in w.iter_mut().zip(sv) {
                *wi += c * s;
            }
        }
        w
    }
}

/// Count of training points violating the KKT conditions at `tol`:
/// α = 0 needs y·f ≥ 1 − tol, 0 < α < C needs |y·f − 1| ≤ tol,
/// α = C needs y·f ≤ 1 + tol.
pub fn kkt_violations(model: &SvmBinary, x: &Matrix, y: &[i8], tol: f64) -> Result<usize> {
    let alphas = model.alphas(x.rows());
    let mut count = 0;
    for ((row, &label), &a) in x.row_iter().zip(y).zip(&alphas) {
        let margin = f64::from(label) * model.decision(row)?;
        let bad = if a <= ALPHA_EPS {
            margin < 1.0 - tol
        } else if a >= model.c - ALPHA_EPS {
            margin > 1.0 + tol
        } else {
            (margin - 1.0).abs() > tol
        };
        count += usize::from(bad);
    }
    Ok(count)
}

struct Smo<'a> {
    k: Matrix,
    y: &'a [f64],
    alpha: Vec<f64>,
    /// `Σ_j α_j y_j K_ij`, kept in sync after every pair update.
    g: Vec<f64>,
    b: f64,
    c: f64,
    tol: f64,
}

impl Smo<'_> {
    fn error(&self, i: usize) -> f64 {
        self.g[i] + self.b - self.y[i]
    }

    fn violates(&self, i: usize) -> bool {
        let r = self.y[i] * self.error(i);
        (r < -self.tol && self.alpha[i] < self.c) || (r > self.tol && self.alpha[i] > 0.0)
    }

    /// Jointly optimizes α_i, α_j. Returns whether anything moved.
    fn take_step(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (yi, yj) = (self.y[i], self.y[j]);
        let (ai, aj) = (self.alpha[i], self.alpha[j]);
        let (ei, ej) = (self.error(i), self.error(j));
        let (lo, hi) = if yi != yj {
            ((aj - ai).max(0.0), (self.c + aj - ai).min(self.c))
        } else {
            ((ai + aj - self.c).max(0.0), (ai + aj).min(self.c))
        };
        if hi - lo <= 0.0 {
            return false;
        }
        let (kii, kjj, kij) = (self.k[(i, i)], self.k[(j, j)], self.k[(i, j)]);
        let eta = kii + kjj - 2.0 * kij;
        if eta <= 0.0 {
            return false;
        }
        let mut aj_new = (aj + yj * (ei - ej) / eta).clamp(lo, hi);
        if aj_new < ALPHA_EPS {
            aj_new = 0.0;
        } else if aj_new > self.c - ALPHA_EPS {
            aj_new = self.c;
        }
        if (aj_new - aj).abs() < 1e-12 * (aj_new + aj + 1e-12) {
            return false;
        }
        let mut ai_new = ai + yi * yj * (aj - aj_new);
        if ai_new < ALPHA_EPS {
            ai_new = 0.0;
        } else if ai_new > self.c - ALPHA_EPS {
            ai_new = self.c;
        }
        let (di, dj) = (ai_new - ai, aj_new - aj);

        let b1 = self.b - ei - yi * di * kii - yj * dj * kij;
        let b2 = self.b - ej - yi * di * kij - yj * dj * kjj;
        self.b = if ai_new > 0.0 && ai_new < self.c {
            b1
        } else if aj_new > 0.0 && aj_new < self.c {
            b2
        } else {
            0.5 * (b1 + b2)
        };

        self.alpha[i] = ai_new;
        self.alpha[j] = aj_new;
        let (si, sj) = (yi * di, yj * dj);
        for t in 0..self.g.len() {
            self.g[t] += si * self.k[(i, t)] + sj * self.k[(j, t)];
        }
        true
    }

    /// Second-choice hierarchy: the seeded random partner, then the largest
    /// |E_i − E_j|, then every index from a random offset.
    fn examine(&mut self, i: usize, rng: &mut crate::rng::Rng) -> bool {
        let n = self.y.len();
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        if self.take_step(i, j) {
            return true;
        }
        let ei = self.error(i);
        let best = (0..n)
            .filter(|&t| t != i)
            .max_by(|&a, &b| (ei - self.error(a)).abs().total_cmp(&(ei - self.error(b)).abs()));
        if let Some(j) = best {
            if self.take_step(i, j) {
                return true;
            }
        }
        let start = rng.random_range(0..n);
        (0..n).any(|off| self.take_step(i, (start + off) % n))
    }

    /// Sets b from the KKT conditions: the mean over free vectors, or the
    /// midpoint of the feasible interval when every α sits at a bound.
    fn refit_bias(&mut self) {
        let (mut sum, mut free) = (0.0, 0usize);
        let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
        for t in 0..self.y.len() {
            let target = self.y[t] - self.g[t];
            let a = self.alpha[t];
            if a > 0.0 && a < self.c {
                sum += target;
                free += 1;
            } else if (a == 0.0) == (self.y[t] > 0.0) {
                lower = lower.max(target);
            } else {
                upper = upper.min(target);
            }
        }
        self.b = if free > 0 {
            sum / free as f64
        } else if lower.is_finite() && upper.is_finite() {
            0.5 * (lower + upper)
        } else if lower.is_finite() {
            lower
        } else if upper.is_finite() {
            upper
        } else {
            self.b
        };
    }
}

/// Trains a binary soft-margin SVM on labels in {−1, +1}.
pub fn svm_train_binary(x: &Matrix, y: &[i8], cfg: &SvmConfig) -> Result<SvmBinary> {
    cfg.validate()?;
    let kernel = cfg.resolve_kernel(x);
    train_binary_with_kernel(x, y, kernel, cfg, cfg.seed)
}

fn train_binary_with_kernel(
    x: &Matrix,
    y: &[i8],
    kernel: Kernel,
    cfg: &SvmConfig,
    seed: u64,
) -> Result<SvmBinary> {
    let n = x.rows();
    if n != y.len() {
        return Err(EmgError::DimensionMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    if y.iter().any(|&v| v != 1 && v != -1) {
        return Err(EmgError::invalid("binary SVM labels must be -1 or +1"));
    }
    if !(y.contains(&1) && y.contains(&-1)) {
        return Err(EmgError::invalid("binary SVM needs both classes present"));
    }
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(x.row(i), x.row(j));
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    let yf: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
    let mut smo = Smo {
        k,
        y: &yf,
        alpha: vec![0.0; n],
        g: vec![0.0; n],
        b: 0.0,
        c: cfg.c,
        tol: cfg.tol,
    };
    let mut rng = rng_from_seed(seed);
    let mut passes = 0;
    let mut sweeps = 0;
    while sweeps < cfg.max_sweeps {
        let mut changed = 0;
        for i in 0..n {
            if smo.violates(i) && smo.examine(i, &mut rng) {
                changed += 1;
            }
        }
        sweeps += 1;
        if changed > 0 {
            passes = 0;
            continue;
        }
        passes += 1;
        if passes >= cfg.max_passes {
            smo.refit_bias();
            if (0..n).all(|i| !smo.violates(i)) {
                break;
            }
            passes = 0;
        }
    }
    if sweeps == cfg.max_sweeps {
        smo.refit_bias();
        log::warn!("SMO hit the sweep cap ({}) before converging", cfg.max_sweeps);
    }

    let support_indices: Vec<usize> = (0..n).filter(|&i| smo.alpha[i] > ALPHA_EPS).collect();
    Ok(SvmBinary {
        support_vectors: x.select_rows(&support_indices),
        dual_coef: support_indices.iter().map(|&i| smo.alpha[i] * yf[i]).collect(),
        support_indices,
        bias: smo.b,
        kernel,
        c: cfg.c,
    })
}

/// One binary machine inside a multiclass model. Positive decisions vote
/// for `positive`; OvR machines use `negative = None` for "rest".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairModel {
    pub positive: usize,
    pub negative: Option<usize>,
    pub model: SvmBinary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmMulticlass {
    pub n_classes: usize,
    pub scheme: MulticlassScheme,
    pub models: Vec<PairModel>,
}

/// Multiclass SVM. One-vs-one trains C(C−1)/2 machines on class pairs
/// `(a, b)`, `a < b`, with `b` as the positive class and seed `seed + pair`.
pub fn svm_train_multiclass(x: &Matrix, y: &[usize], n_classes: usize, cfg: &SvmConfig) -> Result<SvmMulticlass> {
    cfg.validate()?;
    if n_classes < 2 {
        return Err(EmgError::invalid("multiclass SVM needs at least 2 classes"));
    }
    if x.rows() != y.len() {
        return Err(EmgError::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    let mut by_class = vec![Vec::new(); n_classes];
    for (i, &label) in y.iter().enumerate() {
        if label >= n_classes {
            return Err(EmgError::invalid(format!("label {label} outside 0..{n_classes}")));
        }
        by_class[label].push(i);
    }
    if let Some(c) = by_class.iter().position(Vec::is_empty) {
        return Err(EmgError::invalid(format!("class {c} is absent from the training data")));
    }
    let kernel = cfg.resolve_kernel(x);

    let jobs: Vec<(usize, Option<usize>)> = match cfg.scheme {
        MulticlassScheme::OneVsOne => (0..n_classes)
            .flat_map(|a| ((a + 1)..n_classes).map(move |b| (b, Some(a))))
            .collect(),
        MulticlassScheme::OneVsRest => (0..n_classes).map(|c| (c, None)).collect(),
    };
    let models = jobs
        .par_iter()
        .enumerate()
        .map(|(pair, &(positive, negative))| {
            let (rows, labels): (Vec<usize>, Vec<i8>) = match negative {
                Some(neg) => {
                    let mut rows: Vec<usize> =
                        by_class[neg].iter().chain(&by_class[positive]).copied().collect();
                    rows.sort_unstable();
                    let labels = rows.iter().map(|&r| if y[r] == positive { 1 } else { -1 }).collect();
                    (rows, labels)
                }
                None => {
                    let rows: Vec<usize> = (0..y.len()).collect();
                    let labels = y.iter().map(|&l| if l == positive { 1 } else { -1 }).collect();
                    (rows, labels)
                }
            };
            let sub = x.select_rows(&rows);
            let mut model = train_binary_with_kernel(&sub, &labels, kernel, cfg, cfg.seed.wrapping_add(pair as u64))?;
            // report support indices against the full training matrix
            model.support_indices = model.support_indices.iter().map(|&i| rows[i]).collect();
            Ok(PairModel {
                positive,
                negative,
                model,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SvmMulticlass {
        n_classes,
        scheme: cfg.scheme,
        models,
    })
}

impl SvmMulticlass {
    /// OvO: majority vote; ties go to the tied class with the larger summed
    /// |decision| over its won duels, then the lowest index.
    /// OvR: largest decision value, lowest index on ties.
    pub fn predict_one(&self, x: &[f64]) -> Result<usize> {
        match self.scheme {
            MulticlassScheme::OneVsOne => {
                let mut votes = vec![0usize; self.n_classes];
                let mut strength = vec![0.0; self.n_classes];
                for pm in &self.models {
                    let f = pm.model.decision(x)?;
                    let winner = if f > 0.0 {
                        pm.positive
                    } else {
                        pm.negative.expect("one-vs-one machines name both classes")
                    };
                    votes[winner] += 1;
                    strength[winner] += f.abs();
                }
                let mut best = 0;
                for c in 1..self.n_classes {
                    if votes[c] > votes[best] || (votes[c] == votes[best] && strength[c] > strength[best]) {
                        best = c;
                    }
                }
                Ok(best)
            }
            MulticlassScheme::OneVsRest => {
                let mut best = (0, f64::NEG_INFINITY);
                for pm in &self.models {
                    let f = pm.model.decision(x)?;
                    if f > best.1 {
                        best = (pm.positive, f);
                    }
                }
                Ok(best.0)
            }
        }
    }
}
