//! C ABI over `emg-core`.
//!
//! Conventions:
//! - every fallible call returns an [`EmgStatus`]; on failure a message is
//!   available from [`emg_last_error`] on the same thread;
//! - objects are opaque handles created by `*_new`/`*_fit`/`*_train` style
//!   calls and released with the matching `*_free`;
//! - matrices are row-major `double` buffers with explicit row/column counts;
//! - strings returned by the library are owned by the caller and must be
//!   released with [`emg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use emg_core::classifiers::{self, ClassifierKind, ClassifierModel, TrainConfig};
use emg_core::dataset::{load_dataset, synth_generate, Dataset, Recording, SynthConfig};
use emg_core::dimred::{fit_projector, Projector, ProjectorKind};
use emg_core::evaluation::run_pipeline;
use emg_core::features::{extract, FeatureConfig};
use emg_core::{EmgError, Matrix, RunConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DataError = 3,
    NumericalError = 4,
    IoError = 5,
    /// A Rust panic was caught at the boundary.
    InternalError = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmgReducer {
    Pca = 0,
    Lda = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmgClassifierKind {
    Svm = 0,
    Ann = 1,
}

/// Opaque dataset handle.
pub struct EmgDataset(Dataset);

/// Opaque fitted PCA/LDA projector.
pub struct EmgProjector(Projector);

/// Opaque trained classifier.
pub struct EmgClassifier(ClassifierModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &EmgError) -> EmgStatus {
    match e {
        EmgError::InvalidArgument(_) | EmgError::Config { .. } | EmgError::DimensionMismatch { .. } => {
            EmgStatus::InvalidArgument
        }
        EmgError::Io { .. } => EmgStatus::IoError,
        EmgError::Parse { .. } | EmgError::Data(_) => EmgStatus::DataError,
        EmgError::Degenerate(_) | EmgError::Numerical(_) | EmgError::Diverged { .. } => EmgStatus::NumericalError,
    }
}

enum Fail {
    Null(&'static str),
    Invalid(String),
    Core(EmgError),
}

impl From<EmgError> for Fail {
    fn from(e: EmgError) -> Self {
        Fail::Core(e)
    }
}

/// Runs `f`, converting errors and panics into a status plus last-error text.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EmgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EmgStatus::Ok,
        Ok(Err(Fail::Null(name))) => {
            set_error(&format!("null pointer: {name}"));
            EmgStatus::NullPointer
        }
        Ok(Err(Fail::Invalid(msg))) => {
            set_error(&msg);
            EmgStatus::InvalidArgument
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            EmgStatus::InternalError
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, name: &'static str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn matrix(x: *const f64, rows: usize, cols: usize) -> Result<Matrix, Fail> {
    let n = rows
        .checked_mul(cols)
        .ok_or_else(|| Fail::Invalid("matrix size overflows".into()))?;
    Ok(Matrix::from_vec(rows, cols, slice(x, n, "x")?.to_vec())?)
}

unsafe fn labels(y: *const u32, rows: usize) -> Result<Vec<usize>, Fail> {
    Ok(slice(y, rows, "labels")?.iter().map(|&v| v as usize).collect())
}

unsafe fn out_ptr<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(name))
}

unsafe fn c_str<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Invalid(format!("{name} is not valid UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// owned by the library and valid until the next failing call on the thread.
#[no_mangle]
pub extern "C" fn emg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn emg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Length of the default feature vector (30).
#[no_mangle]
pub extern "C" fn emg_feature_count() -> usize {
    FeatureConfig::default().vector_len()
}

/// Default features of one two-channel trial of `n` samples per channel.
/// Writes [`emg_feature_count`] values to `out`, which holds `out_len`.
///
/// # Safety
/// `a` and `b` must point to `n` doubles; `out` to `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn emg_extract_features(
    a: *const f64,
    b: *const f64,
    n: usize,
    out: *mut f64,
    out_len: usize,
) -> EmgStatus {
    guard(|| {
        let cfg = FeatureConfig::default();
        let a = slice(a, n, "a")?.to_vec();
        let b = slice(b, n, "b")?.to_vec();
        let out = slice_mut(out, out_len, "out")?;
        if out_len < cfg.vector_len() {
            return Err(Fail::Invalid(format!("out holds {out_len} values, need {}", cfg.vector_len())));
        }
        let rec = Recording::new(0, 0, 0, a, b)?;
        let fv = extract(&rec, &cfg)?;
        out[..fv.values.len()].copy_from_slice(&fv.values);
        Ok(())
    })
}

/// Loads a dataset tree (`s<subject>/c<class>/t<trial>.csv`).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn emg_dataset_load(path: *const c_char, out: *mut *mut EmgDataset) -> EmgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let ds = load_dataset(Path::new(c_str(path, "path")?))?;
        *out = Box::into_raw(Box::new(EmgDataset(ds)));
        Ok(())
    })
}

/// Generates a synthetic dataset with the default amplitude and noise.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn emg_dataset_synth(
    n_subjects: usize,
    n_classes: usize,
    n_trials: usize,
    samples_per_trial: usize,
    seed: u64,
    out: *mut *mut EmgDataset,
) -> EmgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cfg = SynthConfig {
            n_subjects,
            n_classes,
            n_trials,
            samples_per_trial,
            seed,
            ..SynthConfig::default()
        };
        *out = Box::into_raw(Box::new(EmgDataset(synth_generate(&cfg)?)));
        Ok(())
    })
}

/// Number of recordings, or 0 for NULL.
///
/// # Safety
/// `ds` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emg_dataset_len(ds: *const EmgDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `ds` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn emg_dataset_free(ds: *mut EmgDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Fits a projector on `rows × cols` data. `labels` is required for LDA and
/// may be NULL for PCA.
///
/// # Safety
/// `x` must hold `rows * cols` doubles, `labels` (if used) `rows` values.
#[no_mangle]
pub unsafe extern "C" fn emg_projector_fit(
    kind: EmgReducer,
    x: *const f64,
    rows: usize,
    cols: usize,
    labels_ptr: *const u32,
    k: usize,
    standardize: bool,
    out: *mut *mut EmgProjector,
) -> EmgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let m = matrix(x, rows, cols)?;
        let (kind, y) = match kind {
            EmgReducer::Pca => (ProjectorKind::Pca, Vec::new()),
            EmgReducer::Lda => (ProjectorKind::Lda, labels(labels_ptr, rows)?),
        };
        let y = if y.is_empty() { vec![0; rows] } else { y };
        let p = fit_projector(kind, &m, &y, k, standardize)?;
        *out = Box::into_raw(Box::new(EmgProjector(p)));
        Ok(())
    })
}

/// Output dimension `k`, or 0 for NULL.
///
/// # Safety
/// `p` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emg_projector_output_dim(p: *const EmgProjector) -> usize {
    p.as_ref().map_or(0, |p| p.0.k)
}

/// Projects `rows × cols` data into `out` (`rows × k`, row-major).
///
/// # Safety
/// `x` must hold `rows * cols` doubles and `out` `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn emg_projector_transform(
    p: *const EmgProjector,
    x: *const f64,
    rows: usize,
    cols: usize,
    out: *mut f64,
    out_len: usize,
) -> EmgStatus {
    guard(|| {
        let p = p.as_ref().ok_or(Fail::Null("projector"))?;
        let z = p.0.transform(&matrix(x, rows, cols)?)?;
        if out_len < z.as_slice().len() {
            return Err(Fail::Invalid(format!("out holds {out_len} values, need {}", z.as_slice().len())));
        }
        slice_mut(out, out_len, "out")?[..z.as_slice().len()].copy_from_slice(z.as_slice());
        Ok(())
    })
}

/// # Safety
/// `p` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn emg_projector_free(p: *mut EmgProjector) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Trains a classifier with default hyperparameters and the given seed.
///
/// # Safety
/// `x` must hold `rows * cols` doubles and `labels` `rows` values.
#[no_mangle]
pub unsafe extern "C" fn emg_classifier_train(
    kind: EmgClassifierKind,
    x: *const f64,
    rows: usize,
    cols: usize,
    labels_ptr: *const u32,
    n_classes: usize,
    seed: u64,
    out: *mut *mut EmgClassifier,
) -> EmgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let m = matrix(x, rows, cols)?;
        let y = labels(labels_ptr, rows)?;
        let mut cfg = TrainConfig::default();
        cfg.mlp.seed = seed;
        cfg.svm.seed = seed;
        let kind = match kind {
            EmgClassifierKind::Svm => ClassifierKind::Svm,
            EmgClassifierKind::Ann => ClassifierKind::Ann,
        };
        let t = classifiers::train(kind, &m, &y, n_classes, &cfg)?;
        *out = Box::into_raw(Box::new(EmgClassifier(t.model)));
        Ok(())
    })
}

/// Predicts one label per row into `out` (`rows` entries).
///
/// # Safety
/// `x` must hold `rows * cols` doubles and `out` `rows` values.
#[no_mangle]
pub unsafe extern "C" fn emg_classifier_predict(
    c: *const EmgClassifier,
    x: *const f64,
    rows: usize,
    cols: usize,
    out: *mut u32,
) -> EmgStatus {
    guard(|| {
        let c = c.as_ref().ok_or(Fail::Null("classifier"))?;
        let pred = c.0.predict(&matrix(x, rows, cols)?)?;
        for (o, p) in slice_mut(out, rows, "out")?.iter_mut().zip(pred) {
            *o = p as u32;
        }
        Ok(())
    })
}

/// Serializes the model as JSON into a new string (free with
/// [`emg_string_free`]).
///
/// # Safety
/// `c` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn emg_classifier_to_json(c: *const EmgClassifier, out: *mut *mut c_char) -> EmgStatus {
    guard(|| {
        let c = c.as_ref().ok_or(Fail::Null("classifier"))?;
        let out = out_ptr(out, "out")?;
        *out = into_c_string(c.0.to_json());
        Ok(())
    })
}

/// # Safety
/// `c` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn emg_classifier_free(c: *mut EmgClassifier) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Runs one pipeline evaluation. `config` uses the CLI's `key = value`
/// format and may be NULL or empty for defaults. `report_json` may be NULL;
/// otherwise it receives the report (free with [`emg_string_free`]).
///
/// # Safety
/// `ds` must be a live handle; `config` NULL or NUL-terminated; `accuracy`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn emg_evaluate(
    ds: *const EmgDataset,
    config: *const c_char,
    accuracy: *mut f64,
    report_json: *mut *mut c_char,
) -> EmgStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or(Fail::Null("dataset"))?;
        let acc = out_ptr(accuracy, "accuracy")?;
        let mut cfg = RunConfig::default();
        if !config.is_null() {
            cfg.apply_text(c_str(config, "config")?)?;
        }
        cfg.validate()?;
        let out = run_pipeline(&ds.0, &cfg.pipeline())?;
        *acc = out.report.accuracy;
        if let Some(r) = report_json.as_mut() {
            *r = into_c_string(out.report.to_json());
        }
        Ok(())
    })
}
