//! C interface to `simtrans-core`.
//!
//! Objects cross the boundary as opaque handles created by a constructor
//! and released by the matching `_free` function. Every fallible call
//! returns a [`SimtransStatus`]; on failure a description of the error is
//! available from [`simtrans_last_error`] on the same thread until the next
//! call into the library.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use num_complex::Complex64;
use simtrans_core::archive::SeriesArchive;
use simtrans_core::builder::{evaluate_series, SeriesFunction};
use simtrans_core::cli::{run_build, verify_series};
use simtrans_core::config::{Resolved, RunConfig};
use simtrans_core::Error;

/// Result of a library call. The nonzero values match the exit statuses
/// of the `simtrans` command.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimtransStatus {
    Ok = 0,
    /// Null pointer, invalid UTF-8 or an index out of range.
    InvalidArgument = 1,
    /// Configuration or domain error.
    Config = 2,
    /// No magnitude beyond the separation threshold within the scan cap.
    ScanExhausted = 3,
    /// Order, escalation, precision or slack limits reached.
    CapExceeded = 4,
    /// At least one certificate failed re-verification.
    VerificationFailed = 5,
    /// The library or ledger cannot serve the requested extraction.
    ExtractionInfeasible = 6,
    /// File or archive error.
    Io = 7,
    /// The library panicked; the handle arguments should be discarded.
    Internal = 8,
}

impl From<&Error> for SimtransStatus {
    fn from(e: &Error) -> Self {
        match e.exit_code() {
            2 => SimtransStatus::Config,
            3 => SimtransStatus::ScanExhausted,
            4 => SimtransStatus::CapExceeded,
            5 => SimtransStatus::VerificationFailed,
            6 => SimtransStatus::ExtractionInfeasible,
            7 => SimtransStatus::Io,
            _ => SimtransStatus::Internal,
        }
    }
}

/// A parsed and validated run configuration.
pub struct SimtransConfig {
    config: RunConfig,
}

/// A built or loaded series with its ledger and configuration.
pub struct SimtransSeries {
    archive: SeriesArchive,
    series: SeriesFunction,
    resolved: Resolved,
}

impl SimtransSeries {
    fn from_archive(archive: SeriesArchive) -> Result<Self, Error> {
        let series = archive.series()?;
        let resolved = archive.resolved()?;
        Ok(SimtransSeries {
            archive,
            series,
            resolved,
        })
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Arg(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// Runs `body`, records any failure and maps it to a status.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SimtransStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SimtransStatus::Ok,
        Ok(Err(Failure::Arg(msg))) => {
            set_error(msg);
            SimtransStatus::InvalidArgument
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            SimtransStatus::from(&e)
        }
        Err(_) => {
            set_error("internal error".into());
            SimtransStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Arg(format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Arg(format!("{what} is not valid UTF-8")))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::Arg(format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::Arg(format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Message describing the last failed call on this thread, or null. The
/// string stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn simtrans_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a TOML run configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn simtrans_config_parse(toml: *const c_char, out: *mut *mut SimtransConfig) -> SimtransStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let config = RunConfig::from_toml(text(toml, "toml")?)?;
        *out = Box::into_raw(Box::new(SimtransConfig { config }));
        Ok(())
    })
}

/// Releases a configuration; null is ignored.
///
/// # Safety
/// `config` must come from [`simtrans_config_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn simtrans_config_free(config: *mut SimtransConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Builds the configured schedule.
///
/// # Safety
/// `config` must be a live configuration handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn simtrans_build(config: *const SimtransConfig, out: *mut *mut SimtransSeries) -> SimtransStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let config = get(config, "config")?;
        let archive = run_build(&config.config, &mut std::io::sink())?;
        *out = Box::into_raw(Box::new(SimtransSeries::from_archive(archive)?));
        Ok(())
    })
}

/// Reads a series archive from a file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn simtrans_series_load(path: *const c_char, out: *mut *mut SimtransSeries) -> SimtransStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let archive = SeriesArchive::read(Path::new(text(path, "path")?))?;
        *out = Box::into_raw(Box::new(SimtransSeries::from_archive(archive)?));
        Ok(())
    })
}

/// Parses a series archive from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn simtrans_series_from_json(json: *const c_char, out: *mut *mut SimtransSeries) -> SimtransStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let archive = SeriesArchive::from_json(text(json, "json")?)?;
        *out = Box::into_raw(Box::new(SimtransSeries::from_archive(archive)?));
        Ok(())
    })
}

/// Writes the series archive to a file.
///
/// # Safety
/// `series` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn simtrans_series_save(series: *const SimtransSeries, path: *const c_char) -> SimtransStatus {
    guard(|| {
        let series = get(series, "series")?;
        series.archive.write(Path::new(text(path, "path")?))?;
        Ok(())
    })
}

/// The archive as JSON; release the string with [`simtrans_string_free`].
///
/// # Safety
/// `series` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn simtrans_series_to_json(series: *const SimtransSeries, out: *mut *mut c_char) -> SimtransStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let series = get(series, "series")?;
        let json = CString::new(series.archive.to_json()).map_err(|_| Failure::Arg("archive contains NUL".into()))?;
        *out = json.into_raw();
        Ok(())
    })
}

/// Releases a string returned by the library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn simtrans_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Releases a series; null is ignored.
///
/// # Safety
/// `series` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn simtrans_series_free(series: *mut SimtransSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Number of certificates in the ledger, 0 for null.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simtrans_series_certificate_count(series: *const SimtransSeries) -> usize {
    series.as_ref().map_or(0, |s| s.series.certificates.len())
}

/// Number of polynomial increments, 0 for null.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simtrans_series_increment_count(series: *const SimtransSeries) -> usize {
    series.as_ref().map_or(0, |s| s.series.increments.len())
}

/// Evaluates the series at `re + i im`.
///
/// # Safety
/// `series` must be a live handle; `out_re` and `out_im` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn simtrans_series_eval(
    series: *const SimtransSeries,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> SimtransStatus {
    guard(|| {
        out_ptr(out_re, "out_re")?;
        out_ptr(out_im, "out_im")?;
        let series = get(series, "series")?;
        let w = evaluate_series(&series.series, Complex64::new(re, im));
        *out_re = w.re;
        *out_im = w.im;
        Ok(())
    })
}

/// Re-verifies certificate `index` (0-based) on a `grid x grid` mesh and
/// stores the sampled sup and whether it is below `1/N`.
///
/// # Safety
/// `series` must be a live handle; `measured` and `passed` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn simtrans_series_verify_one(
    series: *const SimtransSeries,
    index: usize,
    grid: usize,
    measured: *mut f64,
    passed: *mut bool,
) -> SimtransStatus {
    guard(|| {
        out_ptr(measured, "measured")?;
        out_ptr(passed, "passed")?;
        let s = get(series, "series")?;
        let cert = s.series.certificates.get(index).ok_or_else(|| {
            Failure::Arg(format!(
                "certificate {index} out of range ({} certificates)",
                s.series.certificates.len()
            ))
        })?;
        if grid < 2 {
            return Err(Failure::Arg(format!("grid must be at least 2, got {grid}")));
        }
        let (ok, m) = simtrans_core::builder::verify_certificate(&s.series, cert, &s.resolved.dirs, &s.resolved.targets, grid)?;
        *measured = m;
        *passed = ok;
        Ok(())
    })
}

/// Re-verifies every certificate; returns `VerificationFailed` when any
/// fails and stores the number of failures in `failed` when non-null.
///
/// # Safety
/// `series` must be a live handle; `failed` null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn simtrans_series_verify(series: *const SimtransSeries, grid: usize, failed: *mut usize) -> SimtransStatus {
    guard(|| {
        let s = get(series, "series")?;
        if grid < 2 {
            return Err(Failure::Arg(format!("grid must be at least 2, got {grid}")));
        }
        let results = verify_series(&s.series, &s.resolved, grid)?;
        let bad = results.iter().filter(|r| !r.0).count();
        if !failed.is_null() {
            *failed = bad;
        }
        if bad > 0 {
            return Err(Error::VerificationFailed {
                failed: bad,
                total: results.len(),
            }
            .into());
        }
        Ok(())
    })
}
