//! C ABI over `conceptrel`.
//!
//! Objects cross the boundary as opaque handles created by `cr_*_new`,
//! `cr_*_load` style constructors and released with the matching
//! `cr_*_free`. Every fallible call returns a [`CrStatus`]; on failure the
//! message is available from [`cr_last_error`] on the same thread until the
//! next failing call. Panics never unwind into C.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use ndarray::Array2;

use conceptrel::bases::{self, ConceptBasis, SkipgramConfig};
use conceptrel::clustering::{self, Dendrogram};
use conceptrel::datasets::{self, ConceptDataset};
use conceptrel::metrics::{self, VectorMetric};
use conceptrel::theory;
use conceptrel::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8 or an out-of-range enum value.
    InvalidArgument = 1,
    /// The library rejected the input (parameters or file contents).
    Validation = 2,
    /// I/O or a numerical failure while computing.
    Runtime = 3,
    /// A bug: the call panicked.
    Panic = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrMetric {
    Euclidean = 0,
    Manhattan = 1,
    Cosine = 2,
}

impl From<CrMetric> for VectorMetric {
    fn from(m: CrMetric) -> Self {
        match m {
            CrMetric::Euclidean => VectorMetric::Euclidean,
            CrMetric::Manhattan => VectorMetric::Manhattan,
            CrMetric::Cosine => VectorMetric::CosineDistance,
        }
    }
}

/// Opaque dataset handle.
pub struct CrDataset(ConceptDataset);

/// Opaque concept basis handle.
pub struct CrBasis(ConceptBasis);

/// Opaque dendrogram handle.
pub struct CrDendrogram(Dendrogram);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

enum Failure {
    Arg(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T> = Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> CrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CrStatus::Ok,
        Ok(Err(Failure::Arg(msg))) => {
            set_error(msg);
            CrStatus::InvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            let status = if e.is_validation() {
                CrStatus::Validation
            } else {
                CrStatus::Runtime
            };
            set_error(e.to_string());
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CrStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| Failure::Arg(format!("{what} is NULL")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| Failure::Arg(format!("{what} is NULL")))
}

unsafe fn path_arg(p: *const c_char) -> FfiResult<PathBuf> {
    Ok(PathBuf::from(str_arg(p, "path")?))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure::Arg(format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Arg(format!("{what} is not valid UTF-8")))
}

fn metric_arg(m: u32) -> FfiResult<VectorMetric> {
    let m = match m {
        0 => CrMetric::Euclidean,
        1 => CrMetric::Manhattan,
        2 => CrMetric::Cosine,
        other => return Err(Failure::Arg(format!("unknown metric {other}"))),
    };
    Ok(m.into())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

// ---- datasets ----

/// Loads a dataset directory.
#[no_mangle]
pub unsafe extern "C" fn cr_dataset_load(dir: *const c_char, out: *mut *mut CrDataset) -> CrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let d = datasets::load_dataset_dir(path_arg(dir)?)?;
        *out = boxed(CrDataset(d));
        Ok(())
    })
}

/// Generates a digit/colour pairs dataset.
#[no_mangle]
pub unsafe extern "C" fn cr_dataset_gen_pairs(
    n_digits: usize,
    n_samples: usize,
    correlation_rate: f64,
    feature_noise: f64,
    seed: u64,
    out: *mut *mut CrDataset,
) -> CrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let d = datasets::gen_correlated_pairs(n_digits, n_samples, correlation_rate, feature_noise, seed)?;
        *out = boxed(CrDataset(d));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cr_dataset_save(d: *const CrDataset, dir: *const c_char) -> CrStatus {
    guard(|| {
        let d = deref(d, "dataset")?;
        datasets::save_dataset(&d.0, path_arg(dir)?)?;
        Ok(())
    })
}

/// Number of samples, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn cr_dataset_num_samples(d: *const CrDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.num_samples())
}

/// Number of concepts, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn cr_dataset_num_concepts(d: *const CrDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.num_concepts())
}

#[no_mangle]
pub unsafe extern "C" fn cr_dataset_free(d: *mut CrDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

// ---- bases ----

#[no_mangle]
pub unsafe extern "C" fn cr_basis_label(d: *const CrDataset, out: *mut *mut CrBasis) -> CrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let b = bases::label_basis(&deref(d, "dataset")?.0)?;
        *out = boxed(CrBasis(b));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cr_basis_concept2vec(
    d: *const CrDataset,
    embed_dim: usize,
    epochs: usize,
    learning_rate: f64,
    negatives_per_positive: usize,
    seed: u64,
    out: *mut *mut CrBasis,
) -> CrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cfg = SkipgramConfig {
            embed_dim,
            epochs,
            learning_rate,
            negatives_per_positive,
            seed,
        };
        let b = bases::concept2vec(&deref(d, "dataset")?.0, &cfg)?;
        *out = boxed(CrBasis(b));
        Ok(())
    })
}

/// Builds a basis from a row-major `k x dim` array and `k` concept names.
#[no_mangle]
pub unsafe extern "C" fn cr_basis_from_rows(
    names: *const *const c_char,
    vectors: *const f64,
    k: usize,
    dim: usize,
    out: *mut *mut CrBasis,
) -> CrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if names.is_null() || vectors.is_null() {
            return Err(Failure::Arg("names and vectors must not be NULL".into()));
        }
        let owned: Vec<String> = (0..k)
            .map(|j| str_arg(*names.add(j), "concept name").map(str::to_owned))
            .collect::<FfiResult<_>>()?;
        let data = std::slice::from_raw_parts(vectors, k * dim).to_vec();
        let arr = Array2::from_shape_vec((k, dim), data).expect("k * dim entries");
        *out = boxed(CrBasis(ConceptBasis::new(owned, arr)?));
        Ok(())
    })
}

/// Reads a basis JSON file.
#[no_mangle]
pub unsafe extern "C" fn cr_basis_import(path: *const c_char, out: *mut *mut CrBasis) -> CrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let b = bases::import_basis(path_arg(path)?)?;
        *out = boxed(CrBasis(b));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cr_basis_export(b: *const CrBasis, path: *const c_char) -> CrStatus {
    guard(|| {
        bases::export_basis(&deref(b, "basis")?.0, path_arg(path)?)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cr_basis_num_concepts(b: *const CrBasis) -> usize {
    b.as_ref().map_or(0, |b| b.0.num_concepts())
}

#[no_mangle]
pub unsafe extern "C" fn cr_basis_dim(b: *const CrBasis) -> usize {
    b.as_ref().map_or(0, |b| b.0.dim())
}

/// Copies the row-major vectors into `buf`, which must hold `k * dim`
/// doubles (`len` is checked).
#[no_mangle]
pub unsafe extern "C" fn cr_basis_vectors(b: *const CrBasis, buf: *mut f64, len: usize) -> CrStatus {
    guard(|| {
        let b = &deref(b, "basis")?.0;
        let need = b.num_concepts() * b.dim();
        if buf.is_null() || len < need {
            return Err(Failure::Arg(format!("buffer needs {need} doubles, got {len}")));
        }
        let dst = std::slice::from_raw_parts_mut(buf, need);
        for (d, s) in dst.iter_mut().zip(b.vectors().iter()) {
            *d = *s;
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cr_basis_free(b: *mut CrBasis) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

// ---- metrics ----

/// Distance between two bases over the same concepts; `metric` is a
/// [`CrMetric`] value.
#[no_mangle]
pub unsafe extern "C" fn cr_basis_distance(
    a: *const CrBasis,
    b: *const CrBasis,
    metric: u32,
    t: usize,
    out: *mut f64,
) -> CrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = metrics::basis_distance(&deref(a, "a")?.0, &deref(b, "b")?.0, metric_arg(metric)?, t)?;
        Ok(())
    })
}

/// Fraction of concepts whose nearest concept is their partner. `pairs`
/// holds `n_pairs` 0-based index pairs, flattened.
#[no_mangle]
pub unsafe extern "C" fn cr_concept_agreement(
    b: *const CrBasis,
    pairs: *const usize,
    n_pairs: usize,
    metric: u32,
    out: *mut f64,
) -> CrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if pairs.is_null() {
            return Err(Failure::Arg("pairs is NULL".into()));
        }
        let flat = std::slice::from_raw_parts(pairs, 2 * n_pairs);
        let pairing: Vec<(usize, usize)> = flat.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        *out = metrics::concept_agreement(&deref(b, "basis")?.0, &pairing, metric_arg(metric)?)?;
        Ok(())
    })
}

// ---- theory ----

/// Co-occurrence estimate of a binary label basis, written row-major into
/// `buf` (`k * k` doubles).
#[no_mangle]
pub unsafe extern "C" fn cr_estimate_cooccurrence(b: *const CrBasis, buf: *mut f64, len: usize) -> CrStatus {
    guard(|| {
        let m = theory::estimate_cooccurrence(&deref(b, "basis")?.0)?;
        let need = m.num_concepts() * m.num_concepts();
        if buf.is_null() || len < need {
            return Err(Failure::Arg(format!("buffer needs {need} doubles, got {len}")));
        }
        let dst = std::slice::from_raw_parts_mut(buf, need);
        for (d, s) in dst.iter_mut().zip(m.matrix().iter()) {
            *d = *s;
        }
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn cr_std_normal_cdf(x: f64) -> f64 {
    theory::std_normal_cdf(x)
}

// ---- clustering ----

#[no_mangle]
pub unsafe extern "C" fn cr_ward_cluster(b: *const CrBasis, out: *mut *mut CrDendrogram) -> CrStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let dg = clustering::ward_cluster(&deref(b, "basis")?.0)?;
        *out = boxed(CrDendrogram(dg));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cr_dendrogram_num_merges(dg: *const CrDendrogram) -> usize {
    dg.as_ref().map_or(0, |d| d.0.merges().len())
}

/// Merge `i`: 1-based cluster ids (leaves first, then merges in order),
/// the Ward height and the merged cluster size.
#[no_mangle]
pub unsafe extern "C" fn cr_dendrogram_merge(
    dg: *const CrDendrogram,
    i: usize,
    left: *mut usize,
    right: *mut usize,
    height: *mut f64,
    size: *mut usize,
) -> CrStatus {
    guard(|| {
        let merges = deref(dg, "dendrogram")?.0.merges();
        let m = merges
            .get(i)
            .ok_or_else(|| Failure::Arg(format!("merge {i} out of range ({} merges)", merges.len())))?;
        *out_ptr(left, "left")? = m.left;
        *out_ptr(right, "right")? = m.right;
        *out_ptr(height, "height")? = m.height;
        *out_ptr(size, "size")? = m.size;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cr_dendrogram_export(dg: *const CrDendrogram, path: *const c_char) -> CrStatus {
    guard(|| {
        clustering::export_dendrogram(&deref(dg, "dendrogram")?.0, path_arg(path)?)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cr_dendrogram_free(dg: *mut CrDendrogram) {
    if !dg.is_null() {
        drop(Box::from_raw(dg));
    }
}
