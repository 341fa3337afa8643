//! C interface to the airholp screening library.
//!
//! Every object crossing the boundary is an opaque handle created by an
//! `airholp_*_new` or `airholp_screen_*` call and released by the matching
//! `airholp_*_free`. Fallible functions return an `AirholpStatus` and
//! write their output through out-pointers, which are left untouched on
//! failure; `airholp_last_error_message` describes the most recent
//! failure on the calling thread. Panics never unwind across the boundary:
//! they are caught and reported as `AirholpStatus::Panic`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use airholp::linalg::{self, DesignMatrix, StandardizeOptions};
use airholp::screening::{
    default_threshold, screen_fixed_ridge, screen_holp, screen_sis, ScreeningResult,
};
use airholp::{air_holp, AirHolpConfig, AirHolpTrace, Error};
use nalgebra::DVector;

/// Outcome of a fallible call. Zero is success; anything else is a failure
/// whose message `airholp_last_error_message` returns.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AirholpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A parameter is outside its documented range.
    InvalidArgument = 2,
    /// Array or matrix shapes do not line up.
    DimensionMismatch = 3,
    /// An input value is NaN or infinite.
    NonFinite = 4,
    /// The response never varies, so correlation scores are undefined.
    ZeroVarianceResponse = 5,
    /// A numerical routine failed.
    Numerical = 6,
    /// Malformed input data.
    Data = 7,
    /// An input/output error from the underlying library.
    Io = 8,
    /// A panic was caught at the boundary; state may be inconsistent.
    Panic = 9,
}

/// An immutable dataset: a design matrix with its response, optionally
/// standardized at construction.
pub struct AirholpDataset {
    x: DesignMatrix,
    y: DVector<f64>,
}

/// Scores, ranking, and retention set from one screening call.
pub struct AirholpResult {
    inner: ScreeningResult,
}

/// The penalty path of one adaptive screening run.
pub struct AirholpTrace {
    inner: AirHolpTrace,
}

/// Tuning knobs for `airholp_screen_air_holp`; get defaults from
/// `airholp_air_options_default`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct AirholpAirOptions {
    /// Starting penalty; clamped into [0, c sqrt(n)] at run time.
    pub r0: f64,
    /// Interval constant: candidate penalties stay in [0, c sqrt(n)].
    pub c: f64,
    /// Stopping tolerance on successive penalties.
    pub delta: f64,
    /// Cap on penalty updates.
    pub max_iter: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let owned = CString::new(message.replace('\0', " ")).expect("nul bytes replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn fail(err: Error) -> AirholpStatus {
    let status = match err {
        Error::DimensionMismatch(_) => AirholpStatus::DimensionMismatch,
        Error::InvalidArgument(_) => AirholpStatus::InvalidArgument,
        Error::NonFinite { .. } => AirholpStatus::NonFinite,
        Error::ZeroVarianceResponse => AirholpStatus::ZeroVarianceResponse,
        Error::Numerical(_) => AirholpStatus::Numerical,
        Error::Data(_) => AirholpStatus::Data,
        Error::Io(_) | Error::Csv(_) => AirholpStatus::Io,
    };
    set_last_error(&err.to_string());
    status
}

fn null_pointer(what: &str) -> AirholpStatus {
    set_last_error(&format!("{what} must not be null"));
    AirholpStatus::NullPointer
}

/// Runs `f`, converting a panic into a status instead of unwinding into C.
fn guarded(f: impl FnOnce() -> AirholpStatus) -> AirholpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let message = if let Some(s) = payload.downcast_ref::<&str>() {
                *s
            } else if let Some(s) = payload.downcast_ref::<String>() {
                s.as_str()
            } else {
                "panic with a non-string payload"
            };
            set_last_error(&format!("internal panic: {message}"));
            AirholpStatus::Panic
        }
    }
}

fn box_out<T>(out: *mut *mut T, value: T) -> AirholpStatus {
    unsafe { *out = Box::into_raw(Box::new(value)) };
    AirholpStatus::Ok
}

/// Copies a slice into a caller buffer that must have exactly its length.
fn copy_exact<T: Copy>(src: &[T], dst: *mut T, len: usize, what: &str) -> AirholpStatus {
    if dst.is_null() {
        return null_pointer("output buffer");
    }
    if len != src.len() {
        return fail(Error::DimensionMismatch(format!(
            "{what} has {} entries but the buffer holds {len}",
            src.len()
        )));
    }
    unsafe { slice::from_raw_parts_mut(dst, len) }.copy_from_slice(src);
    AirholpStatus::Ok
}

/// Message from the most recent failure on this thread, as NUL-terminated
/// UTF-8; empty before the first failure.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn airholp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn airholp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Default retention size ceil(n / ln n) for n observations.
///
/// # Safety
/// `out` must be a valid pointer to a `size_t`.
#[no_mangle]
pub unsafe extern "C" fn airholp_default_threshold(n: usize, out: *mut usize) -> AirholpStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        match default_threshold(n) {
            Ok(m) => {
                unsafe { *out = m };
                AirholpStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Default adaptive-screening options.
#[no_mangle]
pub extern "C" fn airholp_air_options_default() -> AirholpAirOptions {
    let defaults = AirHolpConfig::new(1);
    AirholpAirOptions {
        r0: defaults.r0,
        c: defaults.c,
        delta: defaults.delta,
        max_iter: defaults.max_iter,
    }
}

/// Builds a dataset from a row-major n-by-p design and a response of
/// length n. All entries must be finite, n >= 2 and p >= 1.
///
/// With `standardize` set, columns are centered and scaled to unit sample
/// deviation and the response is centered, matching what the screening
/// theory assumes; otherwise the data are taken as given.
///
/// # Safety
/// `x` must point to n * p readable doubles, `y` to n readable doubles,
/// and `out` must be a valid pointer to receive the handle. The handle
/// must be released with `airholp_dataset_free`.
#[no_mangle]
pub unsafe extern "C" fn airholp_dataset_new(
    n: usize,
    p: usize,
    x: *const f64,
    y: *const f64,
    standardize: bool,
    out: *mut *mut AirholpDataset,
) -> AirholpStatus {
    guarded(|| {
        if x.is_null() {
            return null_pointer("x");
        }
        if y.is_null() {
            return null_pointer("y");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let Some(len) = n.checked_mul(p) else {
            return fail(Error::InvalidArgument(format!(
                "design size {n} x {p} overflows"
            )));
        };
        let design = match DesignMatrix::from_row_major(n, p, unsafe {
            slice::from_raw_parts(x, len)
        }) {
            Ok(design) => design,
            Err(err) => return fail(err),
        };
        let response = DVector::from_column_slice(unsafe { slice::from_raw_parts(y, n) });
        if let Err(err) = linalg::check_vector_finite(&response, "response") {
            return fail(err);
        }
        let (x, y) = if standardize {
            let (z, _) = linalg::standardize(&design, StandardizeOptions::default());
            let (yc, _) = linalg::center_response(&response);
            (z, yc)
        } else {
            (design, response)
        };
        box_out(out, AirholpDataset { x, y })
    })
}

/// Releases a dataset; a null pointer is a no-op.
///
/// # Safety
/// `dataset` must be null or a handle from `airholp_dataset_new` that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn airholp_dataset_free(dataset: *mut AirholpDataset) {
    if !dataset.is_null() {
        drop(unsafe { Box::from_raw(dataset) });
    }
}

/// Number of observations, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn airholp_dataset_n(dataset: *const AirholpDataset) -> usize {
    unsafe { dataset.as_ref() }.map_or(0, |ds| ds.x.n())
}

/// Number of predictors, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn airholp_dataset_p(dataset: *const AirholpDataset) -> usize {
    unsafe { dataset.as_ref() }.map_or(0, |ds| ds.x.p())
}

unsafe fn screen_with(
    dataset: *const AirholpDataset,
    out: *mut *mut AirholpResult,
    screen: impl FnOnce(&AirholpDataset) -> Result<ScreeningResult, Error>,
) -> AirholpStatus {
    let Some(ds) = (unsafe { dataset.as_ref() }) else {
        return null_pointer("dataset");
    };
    if out.is_null() {
        return null_pointer("out");
    }
    match screen(ds) {
        Ok(inner) => box_out(out, AirholpResult { inner }),
        Err(err) => fail(err),
    }
}

/// Marginal correlation screening; keeps the top `m` features.
///
/// # Safety
/// `dataset` must be a live dataset handle and `out` a valid pointer. The
/// result must be released with `airholp_result_free`.
#[no_mangle]
pub unsafe extern "C" fn airholp_screen_sis(
    dataset: *const AirholpDataset,
    m: usize,
    out: *mut *mut AirholpResult,
) -> AirholpStatus {
    guarded(|| unsafe { screen_with(dataset, out, |ds| screen_sis(&ds.x, &ds.y, m)) })
}

/// OLS-projection screening (the ridge limit at r = 0); keeps the top `m`
/// features.
///
/// # Safety
/// Same contract as `airholp_screen_sis`.
#[no_mangle]
pub unsafe extern "C" fn airholp_screen_holp(
    dataset: *const AirholpDataset,
    m: usize,
    out: *mut *mut AirholpResult,
) -> AirholpStatus {
    guarded(|| unsafe {
        screen_with(dataset, out, |ds| {
            let eig = linalg::sym_eigen(&linalg::row_gram(&ds.x), linalg::DEFAULT_RANK_TOL)?;
            screen_holp(&ds.x, &ds.y, &eig, m)
        })
    })
}

/// Penalized projection screening at a fixed penalty r >= 0; keeps the top
/// `m` features.
///
/// # Safety
/// Same contract as `airholp_screen_sis`.
#[no_mangle]
pub unsafe extern "C" fn airholp_screen_ridge_holp(
    dataset: *const AirholpDataset,
    r: f64,
    m: usize,
    out: *mut *mut AirholpResult,
) -> AirholpStatus {
    guarded(|| unsafe { screen_with(dataset, out, |ds| screen_fixed_ridge(&ds.x, &ds.y, r, m)) })
}

/// Adaptive projection screening: tunes the penalty, keeps the top `m`
/// features, and optionally returns the penalty path.
///
/// `options` may be null for defaults. `out_trace` may be null when the
/// caller only wants the final result.
///
/// # Safety
/// `dataset` must be a live dataset handle, `out` a valid pointer, and
/// `options`/`out_trace` each null or valid. The outputs must be released
/// with `airholp_result_free` and `airholp_trace_free`.
#[no_mangle]
pub unsafe extern "C" fn airholp_screen_air_holp(
    dataset: *const AirholpDataset,
    options: *const AirholpAirOptions,
    m: usize,
    out: *mut *mut AirholpResult,
    out_trace: *mut *mut AirholpTrace,
) -> AirholpStatus {
    guarded(|| {
        let Some(ds) = (unsafe { dataset.as_ref() }) else {
            return null_pointer("dataset");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        let opts = unsafe { options.as_ref() }
            .copied()
            .unwrap_or_else(|| airholp_air_options_default());
        let config = AirHolpConfig {
            r0: opts.r0,
            c: opts.c,
            m,
            delta: opts.delta,
            max_iter: opts.max_iter,
        };
        let trace = match air_holp(&ds.x, &ds.y, &config) {
            Ok(trace) => trace,
            Err(err) => return fail(err),
        };
        unsafe {
            *out = Box::into_raw(Box::new(AirholpResult {
                inner: trace.result.clone(),
            }));
            if !out_trace.is_null() {
                *out_trace = Box::into_raw(Box::new(AirholpTrace { inner: trace }));
            }
        }
        AirholpStatus::Ok
    })
}

/// Releases a screening result; a null pointer is a no-op.
///
/// # Safety
/// `result` must be null or an unfreed handle from a screen call.
#[no_mangle]
pub unsafe extern "C" fn airholp_result_free(result: *mut AirholpResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Number of features scored, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn airholp_result_num_features(result: *const AirholpResult) -> usize {
    unsafe { result.as_ref() }.map_or(0, |res| res.inner.scores.len())
}

/// Number of features retained, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn airholp_result_num_screened(result: *const AirholpResult) -> usize {
    unsafe { result.as_ref() }.map_or(0, |res| res.inner.screened.len())
}

/// Ridge penalty behind the scores, or NaN for penalty-free methods and
/// null handles.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn airholp_result_penalty(result: *const AirholpResult) -> f64 {
    unsafe { result.as_ref() }
        .and_then(|res| res.inner.method.penalty())
        .unwrap_or(f64::NAN)
}

/// Copies the per-feature scores; `len` must equal the feature count.
///
/// # Safety
/// `result` must be a live result handle and `out` must point to `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn airholp_result_scores(
    result: *const AirholpResult,
    out: *mut f64,
    len: usize,
) -> AirholpStatus {
    guarded(|| {
        let Some(res) = (unsafe { result.as_ref() }) else {
            return null_pointer("result");
        };
        copy_exact(&res.inner.scores, out, len, "score vector")
    })
}

/// Copies the zero-based feature ranking, best first; `len` must equal the
/// feature count.
///
/// # Safety
/// `result` must be a live result handle and `out` must point to `len`
/// writable `size_t`s.
#[no_mangle]
pub unsafe extern "C" fn airholp_result_ranking(
    result: *const AirholpResult,
    out: *mut usize,
    len: usize,
) -> AirholpStatus {
    guarded(|| {
        let Some(res) = (unsafe { result.as_ref() }) else {
            return null_pointer("result");
        };
        copy_exact(&res.inner.ranking, out, len, "ranking")
    })
}

/// Copies the zero-based retained feature indices; `len` must equal
/// `airholp_result_num_screened`.
///
/// # Safety
/// `result` must be a live result handle and `out` must point to `len`
/// writable `size_t`s.
#[no_mangle]
pub unsafe extern "C" fn airholp_result_screened(
    result: *const AirholpResult,
    out: *mut usize,
    len: usize,
) -> AirholpStatus {
    guarded(|| {
        let Some(res) = (unsafe { result.as_ref() }) else {
            return null_pointer("result");
        };
        copy_exact(&res.inner.screened, out, len, "retention set")
    })
}

/// Number of warnings attached to the result, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn airholp_result_num_warnings(result: *const AirholpResult) -> usize {
    unsafe { result.as_ref() }.map_or(0, |res| res.inner.warnings.len())
}

/// Copies warning `idx` into `buf` as NUL-terminated UTF-8, truncating to
/// `cap` bytes including the terminator. Returns the warning's full byte
/// length excluding the terminator, or -1 when the handle is null or `idx`
/// is out of range; call with a null `buf` to size the allocation first.
///
/// # Safety
/// `result` must be null or a live result handle; `buf` must be null or
/// point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn airholp_result_warning(
    result: *const AirholpResult,
    idx: usize,
    buf: *mut c_char,
    cap: usize,
) -> isize {
    let Some(warning) = (unsafe { result.as_ref() }).and_then(|res| res.inner.warnings.get(idx))
    else {
        return -1;
    };
    let bytes = warning.as_bytes();
    if !buf.is_null() && cap > 0 {
        let written = bytes.len().min(cap - 1);
        unsafe {
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, written);
            *buf.add(written) = 0;
        }
    }
    bytes.len() as isize
}

/// Releases a trace; a null pointer is a no-op.
///
/// # Safety
/// `trace` must be null or an unfreed handle from
/// `airholp_screen_air_holp`.
#[no_mangle]
pub unsafe extern "C" fn airholp_trace_free(trace: *mut AirholpTrace) {
    if !trace.is_null() {
        drop(unsafe { Box::from_raw(trace) });
    }
}

/// Number of penalty updates performed, or 0 for a null handle.
///
/// # Safety
/// `trace` must be null or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn airholp_trace_iterations(trace: *const AirholpTrace) -> usize {
    unsafe { trace.as_ref() }.map_or(0, |tr| tr.inner.iterations)
}

/// Whether the stopping rule fired before the iteration cap; false for a
/// null handle.
///
/// # Safety
/// `trace` must be null or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn airholp_trace_converged(trace: *const AirholpTrace) -> bool {
    unsafe { trace.as_ref() }.is_some_and(|tr| tr.inner.converged)
}

/// Length of the penalty path (iterations + 1), or 0 for a null handle.
///
/// # Safety
/// `trace` must be null or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn airholp_trace_len(trace: *const AirholpTrace) -> usize {
    unsafe { trace.as_ref() }.map_or(0, |tr| tr.inner.penalties.len())
}

/// The final penalty, or NaN for a null handle.
///
/// # Safety
/// `trace` must be null or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn airholp_trace_final_penalty(trace: *const AirholpTrace) -> f64 {
    unsafe { trace.as_ref() }.map_or(f64::NAN, |tr| {
        *tr.inner.penalties.last().expect("path never empty")
    })
}

/// Copies the penalty path, starting value first; `len` must equal
/// `airholp_trace_len`.
///
/// # Safety
/// `trace` must be a live trace handle and `out` must point to `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn airholp_trace_penalties(
    trace: *const AirholpTrace,
    out: *mut f64,
    len: usize,
) -> AirholpStatus {
    guarded(|| {
        let Some(tr) = (unsafe { trace.as_ref() }) else {
            return null_pointer("trace");
        };
        copy_exact(&tr.inner.penalties, out, len, "penalty path")
    })
}

/// Copies the objective value at each accepted update; `len` must equal
/// `airholp_trace_iterations`.
///
/// # Safety
/// `trace` must be a live trace handle and `out` must point to `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn airholp_trace_objective_values(
    trace: *const AirholpTrace,
    out: *mut f64,
    len: usize,
) -> AirholpStatus {
    guarded(|| {
        let Some(tr) = (unsafe { trace.as_ref() }) else {
            return null_pointer("trace");
        };
        copy_exact(&tr.inner.objective_values, out, len, "objective path")
    })
}
