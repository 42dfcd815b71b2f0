//! Independent oracles shared by the integration suites and the acceptance
//! harness. Each `check_*` returns `Ok(detail)` or `Err(detail)`.

#![allow(dead_code)]

use emg_core::classifiers::mlp::flatten_layers;
use emg_core::classifiers::{
    kkt_violations, mlp_init, svm_train_binary, Activation, Kernel, KernelKind, SvmBinary, SvmConfig,
};
use emg_core::dataset::{synth_generate, ClassGenerator, SynthConfig};
use emg_core::dimred::{pca_fit, scatter_matrices, fisher_ratio, lda_fit, ProjectorKind};
use emg_core::evaluation::{accuracy, confusion};
use emg_core::features::{self, ar_fit};
use emg_core::linalg::{norm, symmetric_eig, Matrix};
use emg_core::rng::{rng_from_seed, Rng};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

pub type Check = Result<String, String>;

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn gauss(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn random_matrix(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| gauss(rng)).collect()).unwrap()
}

pub fn random_symmetric(rng: &mut Rng, d: usize) -> Matrix {
    let scale = 10f64.powf(rng.random_range(-2.0..3.0));
    let a = random_matrix(rng, d, d);
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m.as_mut_slice()[i * d + j] = scale * 0.5 * (a[(i, j)] + a[(j, i)]);
        }
    }
    m
}

/// Real roots of λ³ + aλ² + bλ + c (all real for symmetric matrices),
/// descending, by the trigonometric method.
pub fn cubic_roots(a: f64, b: f64, c: f64) -> [f64; 3] {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    if p.abs() < 1e-300 {
        let t = (-q).cbrt();
        return [t + shift; 3];
    }
    let r = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
    let phi = arg.acos() / 3.0;
    let mut roots = [0.0; 3];
    for (k, root) in roots.iter_mut().enumerate() {
        *root = r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift;
    }
    roots.sort_by(|x, y| y.total_cmp(x));
    roots
}

/// Characteristic-polynomial eigenvalues of a symmetric 3×3 matrix.
pub fn eig3_oracle(m: &Matrix) -> [f64; 3] {
    let e = |i, j| m[(i, j)];
    let tr = e(0, 0) + e(1, 1) + e(2, 2);
    let minors = e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0) + e(0, 0) * e(2, 2) - e(0, 2) * e(2, 0) + e(1, 1) * e(2, 2)
        - e(1, 2) * e(2, 1);
    let det = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
        + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
    cubic_roots(-tr, minors, -det)
}

/// `x_n = a1·x_{n−1} + a2·x_{n−2} + w_n` with unit Gaussian innovations.
pub fn simulate_ar2(a1: f64, a2: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let burn = 1000;
    let mut x = vec![0.0; n + burn];
    for i in 2..x.len() {
        x[i] = a1 * x[i - 1] + a2 * x[i - 2] + gauss(&mut rng);
    }
    x.split_off(burn)
}

pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| gauss(&mut rng)).collect()
}

/// Feature-module examples with closed-form answers, at 1e-9.
pub fn check_feature_examples() -> Check {
    use features::*;
    const TOL: f64 = 1e-9;
    let close = |name: &str, got: f64, want: f64| {
        ensure((got - want).abs() <= TOL, || format!("{name}: got {got}, want {want}"))
    };
    let mut n = 0;
    let mut c = |r: Result<(), String>| -> Result<(), String> {
        n += 1;
        r
    };
    c(close("rms const", rms(&[2.0; 9]).unwrap(), 2.0))?;
    c(close("rms [3,4]", rms(&[3.0, 4.0]).unwrap(), 12.5f64.sqrt()))?;
    c(close("rms zeros", rms(&[0.0; 5]).unwrap(), 0.0))?;
    c(close("mav [1,-2,3]", mav(&[1.0, -2.0, 3.0]).unwrap(), 2.0))?;
    c(close("mav const", mav(&[-1.5; 4]).unwrap(), 1.5))?;
    c(close("mav zeros", mav(&[0.0; 4]).unwrap(), 0.0))?;
    c(close("zc alt", zero_crossings(&[1.0, -1.0, 1.0, -1.0], 0.0).unwrap() as f64, 3.0))?;
    c(close("zc thr", zero_crossings(&[0.2, -0.2], 0.5).unwrap() as f64, 0.0))?;
    c(close("zc const", zero_crossings(&[0.7; 10], 0.0).unwrap() as f64, 0.0))?;
    c(close("ssc alt", slope_sign_changes(&[0.0, 1.0, 0.0, 1.0, 0.0], 0.0).unwrap() as f64, 3.0))?;
    c(close("ssc ramp", slope_sign_changes(&[0.0, 1.0, 2.0, 3.0], 0.0).unwrap() as f64, 0.0))?;
    c(close("ssc thr", slope_sign_changes(&[0.0, 1.0, 0.0], 2.0).unwrap() as f64, 0.0))?;
    c(close("skew sym", skewness(&[-1.0, 0.0, 1.0]).unwrap().value, 0.0))?;
    c(close("skew [0,0,1]", skewness(&[0.0, 0.0, 1.0]).unwrap().value, 0.5f64.sqrt()))?;
    let s = skewness(&[3.0; 6]).unwrap();
    c(ensure(s.value == 0.0 && s.degenerate, || "skew const not flagged 0".into()))?;
    c(close("wl [0,1,0,1]", waveform_length(&[0.0, 1.0, 0.0, 1.0]).unwrap(), 3.0))?;
    c(close("wl const", waveform_length(&[2.0; 7]).unwrap(), 0.0))?;
    let x = [0.3, -1.2, 2.5, 0.0, 4.1];
    let mut r = x;
    r.reverse();
    c(close("wl reverse", waveform_length(&r).unwrap(), waveform_length(&x).unwrap()))?;
    c(close("iav [1,-2,3]", iav(&[1.0, -2.0, 3.0]).unwrap(), 6.0))?;
    c(close("iav zeros", iav(&[0.0; 3]).unwrap(), 0.0))?;
    c(close("iav = n mav", iav(&x).unwrap(), 5.0 * mav(&x).unwrap()))?;
    let m = central_moments(&[4.0; 8], 7).unwrap();
    c(ensure(m == vec![4.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], || format!("moments const {m:?}")))?;
    let m = central_moments(&[-1.0, 1.0], 7).unwrap();
    for (i, (g, w)) in m.iter().zip([0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]).enumerate() {
        c(close(&format!("moment {}", i + 1), *g, w))?;
    }
    let shifted: Vec<f64> = x.iter().map(|v| v + 2.5).collect();
    let (m0, m1) = (central_moments(&x, 7).unwrap(), central_moments(&shifted, 7).unwrap());
    c(close("moment shift m1", m1[0], m0[0] + 2.5))?;
    for k in 1..7 {
        let tol = 1e-9 * m0[k].abs().max(1.0);
        c(ensure((m1[k] - m0[k]).abs() <= tol, || format!("moment {} not shift invariant", k + 1)))?;
    }
    c(ensure(ar_fit(&[1.0, 2.0, 3.0, 4.0], 4).is_err(), || "ar_fit accepted length p".into()))?;

    // constant recording: [1, 1, 0, 0, 0(flagged), 0, 0, N] + [1, 0×6] per channel
    let n_s = 64;
    let rec = emg_core::Recording::new(0, 0, 0, vec![1.0; n_s], vec![1.0; n_s]).unwrap();
    let cfg = FeatureConfig::default();
    let fv = extract(&rec, &cfg).unwrap();
    let mut block = vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, n_s as f64, 1.0];
    block.extend([0.0; 6]);
    let want: Vec<f64> = block.iter().chain(&block).copied().collect();
    c(ensure(fv.values.len() == 30, || format!("vector length {}", fv.values.len())))?;
    for (i, (g, w)) in fv.values.iter().zip(&want).enumerate() {
        c(close(&format!("constant recording [{i}]"), *g, *w))?;
    }
    c(ensure(fv.warnings.len() == 4, || format!("expected 4 warnings, got {:?}", fv.warnings)))?;

    // scaling leaves counts unchanged at zero thresholds
    let mut rng = rng_from_seed(3);
    let a: Vec<f64> = (0..500).map(|_| gauss(&mut rng)).collect();
    let b: Vec<f64> = (0..500).map(|_| gauss(&mut rng)).collect();
    let base = extract(&emg_core::Recording::new(0, 0, 0, a.clone(), b.clone()).unwrap(), &cfg).unwrap();
    let scaled = extract(
        &emg_core::Recording::new(0, 0, 0, a.iter().map(|v| 3.7 * v).collect(), b.iter().map(|v| 3.7 * v).collect())
            .unwrap(),
        &cfg,
    )
    .unwrap();
    for idx in [2, 3, 17, 18] {
        c(ensure(base.values[idx] == scaled.values[idx], || format!("count {idx} changed under scaling")))?;
    }
    Ok(format!("{n} closed-form feature checks"))
}

/// mav ≤ rms ≤ max|x| on random vectors.
pub fn check_power_mean(trials: usize, seed: u64) -> Check {
    let mut rng = rng_from_seed(seed);
    for t in 0..trials {
        let n = rng.random_range(1..200);
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let x: Vec<f64> = (0..n).map(|_| scale * gauss(&mut rng)).collect();
        let (m, r) = (features::mav(&x).unwrap(), features::rms(&x).unwrap());
        let mx = x.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let slack = 1e-12 * mx;
        ensure(m <= r + slack && r <= mx + slack, || format!("vector {t}: mav {m} rms {r} max {mx}"))?;
    }
    Ok(format!("{trials} random vectors"))
}

pub fn check_ar_recovery() -> Check {
    let x = simulate_ar2(0.5, -0.3, 20000, 2024);
    let m = ar_fit(&x, 2).unwrap();
    // x_n = −Σ a_i x_{n−i} + w_n  ⇒  a = (−0.5, +0.3)
    let (e1, e2) = ((m.coefficients[0] + 0.5).abs(), (m.coefficients[1] - 0.3).abs());
    ensure(e1 <= 0.05 && e2 <= 0.05, || format!("AR(2) got {:?}", m.coefficients))?;
    let w = ar_fit(&white_noise(20000, 77), 2).unwrap();
    ensure(w.coefficients.iter().all(|c| c.abs() <= 0.05), || {
        format!("white noise got {:?}", w.coefficients)
    })?;
    Ok(format!(
        "AR(2) a = [{:.4}, {:.4}], white noise a = [{:.4}, {:.4}]",
        m.coefficients[0], m.coefficients[1], w.coefficients[0], w.coefficients[1]
    ))
}

/// Flat-envelope, noise-free synthetic classes recover their generator.
pub fn check_synth_ar_recovery() -> Check {
    let cfg = SynthConfig {
        n_subjects: 1,
        n_trials: 1,
        noise_sigma: 0.0,
        flat_envelope: true,
        ..SynthConfig::default()
    };
    let ds = synth_generate(&cfg).unwrap();
    let mut worst: f64 = 0.0;
    for rec in ds.recordings() {
        let g = ClassGenerator::for_class(rec.class_id, cfg.n_classes);
        for ch in 0..2 {
            let m = ar_fit(rec.channel(ch), 2).unwrap();
            let err = (m.coefficients[0] + g.a1).abs().max((m.coefficients[1] + g.a2).abs());
            worst = worst.max(err);
        }
    }
    ensure(worst <= 0.05, || format!("worst coefficient error {worst}"))?;
    Ok(format!("worst coefficient error {worst:.4}"))
}

pub fn check_eigensolver(trials: usize, seed: u64) -> Check {
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0_f64;
    for t in 0..trials {
        let d = rng.random_range(1..=30);
        let m = random_symmetric(&mut rng, d);
        let e = symmetric_eig(&m).map_err(|e| format!("matrix {t}: {e}"))?;
        let bound = 1e-8 * m.frobenius_norm().max(1.0);
        ensure(e.values.windows(2).all(|w| w[0] >= w[1]), || format!("matrix {t}: not sorted"))?;
        for i in 0..d {
            let v = e.vector(i);
            let mv = m.matvec(&v).unwrap();
            let res: Vec<f64> = mv.iter().zip(&v).map(|(a, b)| a - e.values[i] * b).collect();
            let r = norm(&res);
            worst = worst.max(r / bound * 1e-8);
            ensure(r <= bound, || format!("matrix {t} (d = {d}) pair {i}: residual {r:e} > {bound:e}"))?;
        }
    }
    // 3×3 against the characteristic polynomial
    for t in 0..200 {
        let m = random_symmetric(&mut rng, 3);
        let want = eig3_oracle(&m);
        let got = symmetric_eig(&m).unwrap().values;
        for (g, w) in got.iter().zip(want) {
            let tol = 1e-6 * w.abs().max(1.0);
            ensure((g - w).abs() <= tol, || format!("3x3 #{t}: {got:?} vs {want:?}"))?;
        }
    }
    Ok(format!("{trials} random matrices, worst relative residual {worst:.2e}; 200 cubic-root checks"))
}

pub fn check_pca() -> Check {
    let mut rng = rng_from_seed(11);
    for t in 0..50 {
        let n = rng.random_range(5..60);
        let d = rng.random_range(1..12);
        let x = random_matrix(&mut rng, n, d);
        let p = pca_fit(&x, d).map_err(|e| e.to_string())?;
        let r = &p.explained_ratio;
        ensure(r.iter().all(|&v| v >= 0.0), || format!("#{t}: negative ratio {r:?}"))?;
        ensure(r.windows(2).all(|w| w[0] >= w[1]), || format!("#{t}: unsorted {r:?}"))?;
        let s: f64 = r.iter().sum();
        ensure((s - 1.0).abs() <= 1e-9, || format!("#{t}: sum {s}"))?;
        let z = p.transform(&x).unwrap();
        for i in 0..n {
            for j in 0..i {
                let dx = norm(&x.row(i).iter().zip(x.row(j)).map(|(a, b)| a - b).collect::<Vec<_>>());
                let dz = norm(&z.row(i).iter().zip(z.row(j)).map(|(a, b)| a - b).collect::<Vec<_>>());
                ensure((dx - dz).abs() <= 1e-8, || format!("#{t}: distance {dx} became {dz}"))?;
            }
        }
    }
    let line = Matrix::from_rows(&(0..10).map(|i| [i as f64, 2.0 * i as f64]).collect::<Vec<_>>()).unwrap();
    let p = pca_fit(&line, 1).unwrap();
    ensure((p.explained_ratio[0] - 1.0).abs() <= 1e-12, || format!("rank-1 ratio {:?}", p.explained_ratio))?;
    let c = p.components.row(0);
    let s5 = 5f64.sqrt();
    ensure((c[0] - 1.0 / s5).abs() < 1e-9 && (c[1] - 2.0 / s5).abs() < 1e-9, || format!("component {c:?}"))?;
    Ok("50 random fits: ratios a sorted probability vector, k = d isometry; rank-1 ratio [1.0]".into())
}

fn total_scatter(x: &Matrix) -> Matrix {
    let d = x.cols();
    let mu = emg_core::dimred::column_means(x);
    let mut s = Matrix::zeros(d, d);
    for r in x.row_iter() {
        let diff: Vec<f64> = r.iter().zip(&mu).map(|(a, b)| a - b).collect();
        s.rank1_update(1.0, &diff, &diff);
    }
    s
}

pub fn labeled_blobs(rng: &mut Rng, n: usize, d: usize, classes: usize, spread: f64) -> (Matrix, Vec<usize>) {
    let centers: Vec<Vec<f64>> = (0..classes).map(|_| (0..d).map(|_| 3.0 * gauss(rng)).collect()).collect();
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % classes;
        rows.push(centers[c].iter().map(|m| m + spread * gauss(rng)).collect::<Vec<f64>>());
        y.push(c);
    }
    (Matrix::from_rows(&rows).unwrap(), y)
}

pub fn check_lda() -> Check {
    let mut rng = rng_from_seed(5);
    for t in 0..100 {
        let classes = rng.random_range(2..=10);
        let n = rng.random_range(classes.max(4)..=200);
        let d = rng.random_range(1..=30);
        let (x, y) = labeled_blobs(&mut rng, n, d, classes, 1.0);
        let s = scatter_matrices(&x, &y).unwrap();
        let sum = s.s_between.add(&s.s_within).unwrap();
        let st = total_scatter(&x);
        let scale = st.max_abs().max(1.0);
        let diff = sum.as_slice().iter().zip(st.as_slice()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        ensure(diff <= 1e-8 * scale, || format!("#{t}: |S_B + S_W − S_T| = {diff:e}"))?;
    }
    let mut worst_ratio = f64::INFINITY;
    for t in 0..20 {
        let (x, y) = labeled_blobs(&mut rng, 60, 2, 2 + t % 3, 1.5);
        let s = scatter_matrices(&x, &y).unwrap();
        let p = lda_fit(&x, &y, 1).unwrap();
        let learned = fisher_ratio(&s, p.components.row(0));
        let best = (0..3600)
            .map(|i| {
                let a = std::f64::consts::PI * i as f64 / 3600.0;
                fisher_ratio(&s, &[a.cos(), a.sin()])
            })
            .fold(0.0_f64, f64::max);
        worst_ratio = worst_ratio.min(learned / best);
        ensure(learned >= 0.999 * best, || format!("#{t}: learned {learned} < 0.999 × grid best {best}"))?;
    }
    let (x, y) = labeled_blobs(&mut rng, 200, 30, 10, 1.0);
    ensure(lda_fit(&x, &y, 10).is_err(), || "k = 10 accepted for 10 classes".into())?;
    let p = emg_core::dimred::fit_projector(ProjectorKind::Lda, &x, &y, 9, true).map_err(|e| e.to_string())?;
    ensure(p.transform(&x).unwrap().cols() == 9, || "k = 9 output width".into())?;
    Ok(format!(
        "100 scatter identities; Fisher ratio ≥ {worst_ratio:.6} × 3600-angle best; k capped at 9 for 10 classes"
    ))
}

/// Linearly separable labels with a margin gap of `gap` around a random hyperplane.
pub fn separable_instance(rng: &mut Rng, n: usize, d: usize, gap: f64) -> (Matrix, Vec<i8>) {
    let w: Vec<f64> = (0..d).map(|_| gauss(rng)).collect();
    let wn = norm(&w);
    let b = 0.5 * gauss(rng);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    while rows.len() < n {
        let x: Vec<f64> = (0..d).map(|_| 2.0 * gauss(rng)).collect();
        let s = (emg_core::linalg::dot(&w, &x) + b) / wn;
        if s.abs() < gap {
            continue;
        }
        y.push(if s > 0.0 { 1 } else { -1 });
        rows.push(x);
    }
    if !y.contains(&1) || !y.contains(&-1) {
        return separable_instance(rng, n, d, gap);
    }
    (Matrix::from_rows(&rows).unwrap(), y)
}

fn linear_cfg(c: f64, tol: f64, seed: u64) -> SvmConfig {
    SvmConfig {
        c,
        kernel: KernelKind::Linear,
        tol,
        seed,
        ..SvmConfig::default()
    }
}

fn dual_checks(m: &SvmBinary, y: &[i8], n: usize) -> Result<(), String> {
    let alphas = m.alphas(n);
    ensure(alphas.iter().all(|&a| (0.0..=m.c + 1e-12).contains(&a)), || "α outside [0, C]".into())?;
    let s: f64 = alphas.iter().zip(y).map(|(a, &l)| a * f64::from(l)).sum();
    ensure(s.abs() <= 1e-6, || format!("Σ α y = {s:e}"))
}

pub fn check_svm() -> Check {
    // analytic two-point problem
    let x = Matrix::from_rows(&[[-1.0], [1.0]]).unwrap();
    let m = svm_train_binary(&x, &[-1, 1], &linear_cfg(1000.0, 1e-3, 1)).unwrap();
    let w = m.linear_weights()[0];
    ensure((w - 1.0).abs() <= 1e-3 && m.bias.abs() <= 1e-3, || format!("two-point w {w}, b {}", m.bias))?;
    ensure(m.decision(&[0.0]).unwrap().abs() <= 1e-3, || "decision(0) not 0".into())?;
    let b = m.bias;

    // KKT on random separable instances
    let mut rng = rng_from_seed(99);
    for t in 0..50 {
        let n = rng.random_range(10..80);
        let d = rng.random_range(2..6);
        let (x, y) = separable_instance(&mut rng, n, d, 0.3);
        let cfg = linear_cfg(10.0, 1e-3, t);
        let m = svm_train_binary(&x, &y, &cfg).map_err(|e| format!("#{t}: {e}"))?;
        let v = kkt_violations(&m, &x, &y, 1e-3).unwrap();
        ensure(v == 0, || format!("instance {t}: {v} KKT violations"))?;
        dual_checks(&m, &y, n).map_err(|e| format!("instance {t}: {e}"))?;
        for (row, &l) in x.row_iter().zip(&y) {
            ensure(m.predict_sign(row).unwrap() == l, || format!("instance {t}: training error"))?;
        }
    }

    // removing zero-α points leaves the decision function unchanged
    let mut worst = 0.0_f64;
    for t in 0..10 {
        let (x, y) = separable_instance(&mut rng, 40, 2, 0.3);
        let cfg = linear_cfg(1000.0, 1e-9, 100 + t);
        let full = svm_train_binary(&x, &y, &cfg).unwrap();
        let keep = full.support_indices.clone();
        let sub_y: Vec<i8> = keep.iter().map(|&i| y[i]).collect();
        let sub = svm_train_binary(&x.select_rows(&keep), &sub_y, &cfg).unwrap();
        for _ in 0..200 {
            let p = [4.0 * gauss(&mut rng), 4.0 * gauss(&mut rng)];
            let diff = (full.decision(&p).unwrap() - sub.decision(&p).unwrap()).abs();
            worst = worst.max(diff);
        }
        ensure(worst <= 1e-6, || format!("instance {t}: decision moved by {worst:e}"))?;
    }

    // XOR with rbf (γ = 1, C = 10)
    let xor = Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]).unwrap();
    let yx = [-1, 1, 1, -1];
    let cfg = SvmConfig {
        c: 10.0,
        kernel: KernelKind::Rbf,
        gamma: Some(1.0),
        ..SvmConfig::default()
    };
    let m = svm_train_binary(&xor, &yx, &cfg).unwrap();
    for (row, &l) in xor.row_iter().zip(&yx) {
        ensure(m.predict_sign(row).unwrap() == l, || "XOR misclassified".into())?;
    }
    ensure(Kernel::Rbf { gamma: 0.7 }.eval(&[1.0, 2.0], &[1.0, 2.0]) == 1.0, || "rbf K(x,x) != 1".into())?;
    Ok(format!(
        "two-point w = {w:.6}, b = {b:.2e}; 50 instances KKT-clean; removal drift {worst:.2e}; XOR solved"
    ))
}

/// Max relative error between analytic and central-difference gradients.
pub fn gradient_error(activation: Activation, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let x = random_matrix(&mut rng, 6, 3);
    let y = vec![0, 1, 2, 0, 1, 2];
    let mut model = mlp_init(&[3, 5, 4, 3], activation, seed).unwrap();
    // non-zero biases so every parameter path is exercised
    let mut p = model.params();
    for v in p.iter_mut() {
        *v += 0.1 * gauss(&mut rng);
    }
    model.set_params(&p).unwrap();
    let rows: Vec<usize> = (0..6).collect();
    let (_, grads) = model.loss_and_gradient(&x, &y, &rows).unwrap();
    let analytic = flatten_layers(&grads);
    let h = 1e-5;
    let mut worst = 0.0_f64;
    for i in 0..p.len() {
        let mut probe = model.clone();
        let mut q = p.clone();
        q[i] = p[i] + h;
        probe.set_params(&q).unwrap();
        let up = probe.loss(&x, &y).unwrap();
        q[i] = p[i] - h;
        probe.set_params(&q).unwrap();
        let down = probe.loss(&x, &y).unwrap();
        let numeric = (up - down) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    worst
}

pub fn check_mlp() -> Check {
    let mut details = Vec::new();
    for act in Activation::ALL {
        let e = gradient_error(act, 17);
        ensure(e <= 1e-4, || format!("{act}: gradient relative error {e:e}"))?;
        details.push(format!("{act} {e:.1e}"));
    }
    let xor = Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]).unwrap();
    let y = [0, 1, 1, 0];
    for hidden in [vec![32], vec![4]] {
        let cfg = emg_core::classifiers::MlpConfig {
            epochs: 5000,
            hidden: hidden.clone(),
            ..Default::default()
        };
        let t = emg_core::classifiers::mlp_train(&xor, &y, 2, &cfg).map_err(|e| e.to_string())?;
        for (row, &l) in xor.row_iter().zip(&y) {
            ensure(t.model.predict_one(row).unwrap() == l, || format!("XOR hidden {hidden:?} not solved"))?;
        }
    }
    let mut worst = 0.0_f64;
    for i in -400..=400 {
        let x = i as f64 * 0.05;
        let s = Activation::Sigmoid.apply(2.0 * x);
        worst = worst.max((Activation::Tanh.apply(x) - (2.0 * s - 1.0)).abs());
    }
    ensure(worst <= 1e-12, || format!("tanh identity off by {worst:e}"))?;
    Ok(format!(
        "gradients [{}]; XOR solved (hidden 32 and 4); tanh identity {worst:.1e}",
        details.join(", ")
    ))
}

/// Direct count versus the library's accuracy/confusion on random pairs.
pub fn check_evaluation_algebra(trials: usize, seed: u64) -> Check {
    let mut rng = rng_from_seed(seed);
    for t in 0..trials {
        let c = rng.random_range(2..=10);
        let n = rng.random_range(1..300);
        let actual: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
        let pred: Vec<usize> = actual
            .iter()
            .map(|&a| if rng.random_bool(0.6) { a } else { rng.random_range(0..c) })
            .collect();
        let conf = confusion(&pred, &actual, c).unwrap();
        let acc = accuracy(&pred, &actual).unwrap();
        for i in 0..c {
            for j in 0..c {
                let direct = pred.iter().zip(&actual).filter(|&(&p, &a)| a == i && p == j).count();
                ensure(conf.raw[i][j] == direct, || format!("#{t}: raw[{i}][{j}]"))?;
            }
            let support = actual.iter().filter(|&&a| a == i).count();
            ensure(conf.support[i] == support, || format!("#{t}: support {i}"))?;
            ensure(conf.raw[i].iter().sum::<usize>() == support, || format!("#{t}: row sum {i}"))?;
            let rs: f64 = conf.normalized[i].iter().sum();
            if support > 0 {
                ensure((rs - 1.0).abs() <= 1e-9, || format!("#{t}: normalized row {i} sums to {rs}"))?;
            } else {
                ensure(rs == 0.0 && conf.empty_rows.contains(&i), || format!("#{t}: empty row {i}"))?;
            }
        }
        ensure(conf.total() == n, || format!("#{t}: total"))?;
        let hits = pred.iter().zip(&actual).filter(|(p, a)| p == a).count();
        ensure(acc == hits as f64 / n as f64, || format!("#{t}: accuracy"))?;
        ensure(acc == conf.trace() as f64 / conf.total() as f64, || format!("#{t}: trace/total"))?;
    }
    Ok(format!("{trials} random prediction/label pairs"))
}

pub fn small_synth(seed: u64) -> emg_core::Dataset {
    synth_generate(&SynthConfig {
        n_subjects: 3,
        n_trials: 4,
        samples_per_trial: 4000,
        seed,
        ..SynthConfig::default()
    })
    .unwrap()
}

/// Rewrites every test-partition recording and checks that nothing fitted
/// on the training partition moves.
pub fn check_no_leakage() -> Check {
    use emg_core::classifiers::ClassifierKind;
    use emg_core::dataset::{split_indices, SplitSpec};
    use emg_core::evaluation::{run_pipeline, ChannelSelection, PipelineConfig, Reducer};

    let ds = small_synth(5);
    let split = SplitSpec {
        n_train: 100,
        n_test: 20,
        seed: 9,
        stratified: true,
    };
    let (_, test_idx) = split_indices(&ds, &split).unwrap();
    let mut mutated = ds.clone();
    let mut rng = rng_from_seed(1234);
    for &i in &test_idx {
        let rec = &mut mutated.recordings_mut()[i];
        for ch in 0..2 {
            for v in rec.channel_mut(ch) {
                *v = (-*v * 1.7 + 0.3 * gauss(&mut rng)).clamp(-5.0, 5.0);
            }
        }
    }
    let combos = [
        (Reducer::Pca, 15, ClassifierKind::Ann, true),
        (Reducer::Lda, 9, ClassifierKind::Svm, true),
        (Reducer::None, 0, ClassifierKind::Svm, true),
        (Reducer::Pca, 10, ClassifierKind::Svm, false),
    ];
    for (reducer, k, classifier, use_features) in combos {
        let mut cfg = PipelineConfig::defaults_for(ds.len(), 9);
        cfg.split = split;
        cfg.reducer = reducer;
        cfg.k = k;
        cfg.classifier = classifier;
        cfg.use_features = use_features;
        cfg.channels = ChannelSelection::AB;
        cfg.train.mlp.epochs = 60;
        let a = run_pipeline(&ds, &cfg).map_err(|e| e.to_string())?;
        let b = run_pipeline(&mutated, &cfg).map_err(|e| e.to_string())?;
        let tag = format!("{}+{}{}", reducer.name(), classifier.name(), if use_features { "" } else { " raw" });
        ensure(a.projector == b.projector, || format!("{tag}: reducer changed"))?;
        ensure(a.standardizer == b.standardizer, || format!("{tag}: standardizer changed"))?;
        ensure(a.model == b.model, || format!("{tag}: classifier changed"))?;
        ensure(a.loss_history == b.loss_history, || format!("{tag}: training loss changed"))?;
        ensure(a.test_predictions != b.test_predictions || a.report != b.report, || {
            format!("{tag}: mutation did not reach the test rows")
        })?;
    }
    Ok(format!("{} reducer/classifier combinations, {} test trials rewritten", combos.len(), test_idx.len()))
}
