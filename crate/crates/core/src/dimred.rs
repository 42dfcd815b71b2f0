//! Covariance, PCA and Fisher LDA.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{EmgError, Result};
use crate::linalg::{self, cholesky, fix_sign, solve_lower, solve_lower_transpose, symmetric_eig, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectorKind {
    Pca,
    Lda,
}

/// Per-feature z-score parameters fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population std; features with zero spread keep scale 1.
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Result<Self> {
        if x.rows() == 0 {
            return Err(EmgError::invalid("cannot standardize an empty matrix"));
        }
        let mean = column_means(x);
        let n = x.rows() as f64;
        let mut var = vec![0.0; x.cols()];
        for r in x.row_iter() {
            for ((v, &xi), m) in var.iter_mut().zip(r).zip(&mean) {
                *v += (xi - m) * (xi - m);
            }
        }
        let scale = var
            .into_iter()
            .zip(&mean)
            .map(|(v, m)| {
                let s = (v / n).sqrt();
                if s > 1e-12 * m.abs().max(1e-300) && s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, scale })
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        check_dim(self.mean.len(), x.cols())?;
        let mut out = x.clone();
        for i in 0..out.rows() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - m) / s;
            }
        }
        Ok(out)
    }
}

/// A fitted linear projection `y = components · (standardize(x) − mean)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projector {
    pub kind: ProjectorKind,
    pub mean: Vec<f64>,
    /// k×d, one component per row.
    pub components: Matrix,
    /// Variance share per component (PCA); empty for LDA.
    pub explained_ratio: Vec<f64>,
    pub k: usize,
    pub standardize: bool,
    pub standardizer: Option<Standardizer>,
}

impl Projector {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        check_dim(self.input_dim(), x.cols())?;
        let scaled;
        let x = match &self.standardizer {
            Some(s) => {
                scaled = s.apply(x)?;
                &scaled
            }
            None => x,
        };
        let mut out = Matrix::zeros(x.rows(), self.k);
        let mut centered = vec![0.0; self.input_dim()];
        for i in 0..x.rows() {
            for ((c, v), m) in centered.iter_mut().zip(x.row(i)).zip(&self.mean) {
                *c = v - m;
            }
            for (j, o) in out.row_mut(i).iter_mut().enumerate() {
                *o = linalg::dot(self.components.row(j), &centered);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("projector serializes")
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(EmgError::DimensionMismatch { expected, actual });
    }
    Ok(())
}

pub fn column_means(x: &Matrix) -> Vec<f64> {
    let mut mean = vec![0.0; x.cols()];
    for r in x.row_iter() {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    let n = x.rows() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

/// Sample covariance (divide by n−1).
pub fn covariance_matrix(x: &Matrix) -> Result<Matrix> {
    if x.rows() < 2 {
        return Err(EmgError::invalid(format!(
            "covariance needs at least 2 rows, got {}",
            x.rows()
        )));
    }
    let mean = column_means(x);
    let d = x.cols();
    let mut cov = Matrix::zeros(d, d);
    let mut centered = vec![0.0; d];
    for r in x.row_iter() {
        for ((c, v), m) in centered.iter_mut().zip(r).zip(&mean) {
            *c = v - m;
        }
        for i in 0..d {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            for j in i..d {
                cov[(i, j)] += ci * centered[j];
            }
        }
    }
    let denom = (x.rows() - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov[(i, j)] / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(cov)
}

/// PCA: top-k eigenvectors of the covariance of mean-centred data.
pub fn pca_fit(x: &Matrix, k: usize) -> Result<Projector> {
    let d = x.cols();
    if k < 1 || k > d {
        return Err(EmgError::invalid(format!("PCA k must be in 1..={d}, got {k}")));
    }
    let cov = covariance_matrix(x)?;
    let eig = symmetric_eig(&cov)?;
    let clamped: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    if !(total > 0.0) {
        return Err(EmgError::Degenerate("data has zero variance in every feature".into()));
    }
    let mut components = Matrix::zeros(k, d);
    for i in 0..k {
        for (j, v) in eig.vector(i).into_iter().enumerate() {
            components[(i, j)] = v;
        }
    }
    Ok(Projector {
        kind: ProjectorKind::Pca,
        mean: column_means(x),
        components,
        explained_ratio: clamped[..k].iter().map(|v| v / total).collect(),
        k,
        standardize: false,
        standardizer: None,
    })
}

/// Cumulative explained-variance ratio for k = 1..=d.
pub fn explained_variance_curve(x: &Matrix) -> Result<Vec<f64>> {
    let p = pca_fit(x, x.cols())?;
    let mut acc = 0.0;
    Ok(p.explained_ratio
        .iter()
        .map(|r| {
            acc += r;
            acc
        })
        .collect())
}

pub fn explained_variance_csv(curve: &[f64]) -> String {
    let mut out = String::from("k,cumulative_ratio\n");
    for (i, c) in curve.iter().enumerate() {
        let _ = writeln!(out, "{},{c}", i + 1);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPair {
    pub s_between: Matrix,
    pub s_within: Matrix,
}

/// Rows of `x` grouped by label, labels ascending.
fn group_by_label(x: &Matrix, y: &[usize]) -> Result<BTreeMap<usize, Vec<usize>>> {
    if x.rows() != y.len() {
        return Err(EmgError::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &label) in y.iter().enumerate() {
        groups.entry(label).or_default().push(i);
    }
    if groups.len() < 2 {
        return Err(EmgError::invalid("scatter matrices need at least 2 classes"));
    }
    Ok(groups)
}

/// Between-class `Σ n_c (μ_c − μ)(μ_c − μ)ᵀ` and within-class
/// `Σ_c Σ_{i∈c} (x_i − μ_c)(x_i − μ_c)ᵀ` scatter.
pub fn scatter_matrices(x: &Matrix, y: &[usize]) -> Result<ScatterPair> {
    let groups = group_by_label(x, y)?;
    let d = x.cols();
    let mu = column_means(x);
    let mut s_between = Matrix::zeros(d, d);
    let mut s_within = Matrix::zeros(d, d);
    let mut diff = vec![0.0; d];
    for members in groups.values() {
        let class_x = x.select_rows(members);
        let mu_c = column_means(&class_x);
        for ((dv, a), b) in diff.iter_mut().zip(&mu_c).zip(&mu) {
            *dv = a - b;
        }
        s_between.rank1_update(members.len() as f64, &diff, &diff);
        for r in class_x.row_iter() {
            for ((dv, a), b) in diff.iter_mut().zip(r).zip(&mu_c) {
                *dv = a - b;
            }
            s_within.rank1_update(1.0, &diff, &diff);
        }
    }
    Ok(ScatterPair {
        s_between,
        s_within,
    })
}

/// Fisher ratio `wᵀ S_B w / wᵀ S_W w` of a direction.
pub fn fisher_ratio(pair: &ScatterPair, w: &[f64]) -> f64 {
    let quad = |m: &Matrix| linalg::dot(w, &m.matvec(w).expect("dimension checked by caller"));
    quad(&pair.s_between) / quad(&pair.s_within)
}

/// Ridge added to S_W before the Cholesky factorization.
pub fn lda_ridge(pair: &ScatterPair) -> f64 {
    let d = pair.s_within.rows() as f64;
    let tw = pair.s_within.trace();
    if tw > 0.0 {
        1e-6 * tw / d
    } else {
        1e-6 * pair.s_between.trace() / d
    }
}

/// Fisher LDA via the symmetrized generalized eigenproblem
/// `L⁻¹ S_B L⁻ᵀ u = λ u`, `S_W + εI = L Lᵀ`, `w = L⁻ᵀ u`.
pub fn lda_fit(x: &Matrix, y: &[usize], k: usize) -> Result<Projector> {
    let groups = group_by_label(x, y)?;
    let d = x.cols();
    let max_k = d.min(groups.len() - 1);
    if k < 1 || k > max_k {
        return Err(EmgError::invalid(format!(
            "LDA k must be in 1..={max_k} for {} classes and {d} features, got {k}",
            groups.len()
        )));
    }
    let pair = scatter_matrices(x, y)?;
    let total_trace = pair.s_between.trace() + pair.s_within.trace();
    if !(pair.s_between.trace() > 1e-14 * total_trace) {
        return Err(EmgError::Degenerate("all class means are equal".into()));
    }
    let eps = lda_ridge(&pair);
    let mut sw = pair.s_within.clone();
    for i in 0..d {
        sw[(i, i)] += eps;
    }
    let l = cholesky(&sw)?;
    let a = solve_lower(&l, &pair.s_between);
    let mut m = solve_lower(&l, &a.transpose());
    for i in 0..d {
        for j in (i + 1)..d {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    let eig = symmetric_eig(&m)?;
    let mut components = Matrix::zeros(k, d);
    for i in 0..k {
        let u = Matrix::from_vec(d, 1, eig.vector(i))?;
        let mut w = solve_lower_transpose(&l, &u).into_vec();
        let n = linalg::norm(&w);
        w.iter_mut().for_each(|v| *v /= n);
        fix_sign(&mut w);
        components.row_mut(i).copy_from_slice(&w);
    }
    Ok(Projector {
        kind: ProjectorKind::Lda,
        mean: column_means(x),
        components,
        explained_ratio: Vec::new(),
        k,
        standardize: false,
        standardizer: None,
    })
}

/// Fits a reducer, optionally z-scoring the inputs first.
pub fn fit_projector(
    kind: ProjectorKind,
    x: &Matrix,
    y: &[usize],
    k: usize,
    standardize: bool,
) -> Result<Projector> {
    let standardizer = if standardize {
        Some(Standardizer::fit(x)?)
    } else {
        None
    };
    let scaled;
    let data = match &standardizer {
        Some(s) => {
            scaled = s.apply(x)?;
            &scaled
        }
        None => x,
    };
    let mut p = match kind {
        ProjectorKind::Pca => pca_fit(data, k)?,
        ProjectorKind::Lda => lda_fit(data, y, k)?,
    };
    p.standardize = standardize;
    p.standardizer = standardizer;
    Ok(p)
}
