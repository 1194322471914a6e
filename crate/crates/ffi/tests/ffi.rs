use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use simtrans_core::archive::SeriesArchive;
use simtrans_core::mp::{float_from_decimal, float_to_decimal};
use simtrans_ffi::*;

const SMALL: &str = r#"
directions = ["0", "1/2"]
targets = [[[1, 0]], [[0, 0], [1, 0]]]
schedule = [[1, 2, 1, 2], [1, 4, 2, 2]]

[magnitudes]
kind = "naturals"
"#;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = simtrans_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(text: &str) -> (SimtransStatus, *mut SimtransConfig) {
    let mut cfg = ptr::null_mut();
    let status = unsafe { simtrans_config_parse(cstr(text).as_ptr(), &mut cfg) };
    (status, cfg)
}

fn build(text: &str) -> *mut SimtransSeries {
    let (status, cfg) = parse(text);
    assert_eq!(status, SimtransStatus::Ok);
    let mut series = ptr::null_mut();
    assert_eq!(unsafe { simtrans_build(cfg, &mut series) }, SimtransStatus::Ok);
    unsafe { simtrans_config_free(cfg) };
    series
}

fn to_json(series: *const SimtransSeries) -> String {
    let mut out: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { simtrans_series_to_json(series, &mut out) }, SimtransStatus::Ok);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
    unsafe { simtrans_string_free(out) };
    text
}

fn from_json(text: &str) -> (SimtransStatus, *mut SimtransSeries) {
    let mut series = ptr::null_mut();
    let status = unsafe { simtrans_series_from_json(cstr(text).as_ptr(), &mut series) };
    (status, series)
}

fn eval(series: *const SimtransSeries, re: f64, im: f64) -> (f64, f64) {
    let (mut a, mut b) = (f64::NAN, f64::NAN);
    assert_eq!(unsafe { simtrans_series_eval(series, re, im, &mut a, &mut b) }, SimtransStatus::Ok);
    (a, b)
}

#[test]
fn config_errors_set_status_and_message() {
    let (status, cfg) = parse(&SMALL.replace("\"1/2\"", "\"0\""));
    assert_eq!(status, SimtransStatus::Config);
    assert!(cfg.is_null());
    assert!(last_error().contains("directions"));
    let (status, _) = parse("directions = [");
    assert_eq!(status, SimtransStatus::Config);
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { simtrans_config_parse(ptr::null(), &mut cfg) }, SimtransStatus::InvalidArgument);
    assert!(last_error().contains("null"));
    let (status, cfg) = parse(SMALL);
    assert_eq!(status, SimtransStatus::Ok);
    assert!(simtrans_last_error().is_null());
    unsafe { simtrans_config_free(cfg) };
    unsafe { simtrans_config_free(ptr::null_mut()) };
}

#[test]
fn build_verify_and_round_trip() {
    let series = build(SMALL);
    unsafe {
        assert_eq!(simtrans_series_certificate_count(series), 2);
        assert_eq!(simtrans_series_increment_count(series), 2);
        let mut failed = usize::MAX;
        assert_eq!(simtrans_series_verify(series, 41, &mut failed), SimtransStatus::Ok);
        assert_eq!(failed, 0);
        let (mut m, mut ok) = (f64::NAN, false);
        assert_eq!(simtrans_series_verify_one(series, 1, 41, &mut m, &mut ok), SimtransStatus::Ok);
        assert!(ok && m < 0.25);
        assert_eq!(simtrans_series_verify_one(series, 2, 41, &mut m, &mut ok), SimtransStatus::InvalidArgument);
        assert_eq!(simtrans_series_verify_one(series, 0, 1, &mut m, &mut ok), SimtransStatus::InvalidArgument);
    }
    let json = to_json(series);
    let (status, copy) = from_json(&json);
    assert_eq!(status, SimtransStatus::Ok);
    assert_eq!(to_json(copy), json);
    for z in [(0.3, -0.2), (17.0, 0.5), (-4.0, 1.0)] {
        assert_eq!(eval(series, z.0, z.1), eval(copy, z.0, z.1));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = cstr(dir.path().join("small.json").to_str().unwrap());
    let mut loaded = ptr::null_mut();
    unsafe {
        assert_eq!(simtrans_series_save(series, path.as_ptr()), SimtransStatus::Ok);
        assert_eq!(simtrans_series_load(path.as_ptr(), &mut loaded), SimtransStatus::Ok);
    }
    assert_eq!(to_json(loaded), json);
    unsafe {
        simtrans_series_free(series);
        simtrans_series_free(copy);
        simtrans_series_free(loaded);
    }
}

#[test]
fn tampered_archive_fails_verification() {
    let series = build(SMALL);
    let mut archive = SeriesArchive::from_json(&to_json(series)).unwrap();
    let slot = &mut archive.increments[0][0][0];
    *slot = float_to_decimal(&(float_from_decimal(slot, archive.precision).unwrap() + 1.0));
    let (status, bad) = from_json(&archive.to_json());
    assert_eq!(status, SimtransStatus::Ok);
    let mut failed = 0;
    assert_eq!(unsafe { simtrans_series_verify(bad, 41, &mut failed) }, SimtransStatus::VerificationFailed);
    assert!(failed >= 1);
    assert!(last_error().contains("verification failed"));
    unsafe {
        simtrans_series_free(series);
        simtrans_series_free(bad);
    }
}

#[test]
fn archive_errors() {
    let (status, series) = from_json("{}");
    assert_eq!(status, SimtransStatus::Io);
    assert!(series.is_null());
    assert!(last_error().starts_with("archive"));
    let mut loaded = ptr::null_mut();
    let missing = cstr("/nonexistent/simtrans.json");
    assert_eq!(unsafe { simtrans_series_load(missing.as_ptr(), &mut loaded) }, SimtransStatus::Io);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { simtrans_series_to_json(ptr::null(), &mut out) }, SimtransStatus::InvalidArgument);
    assert_eq!(unsafe { simtrans_series_certificate_count(ptr::null()) }, 0);
}

#[test]
fn empty_schedule_is_the_zero_function() {
    let series = build(&SMALL.replace("schedule = [[1, 2, 1, 2], [1, 4, 2, 2]]", "schedule = \"canonical:0\""));
    assert_eq!(unsafe { simtrans_series_increment_count(series) }, 0);
    assert_eq!(eval(series, 2.0, -7.0), (0.0, 0.0));
    let mut failed = usize::MAX;
    assert_eq!(unsafe { simtrans_series_verify(series, 11, &mut failed) }, SimtransStatus::Ok);
    assert_eq!(failed, 0);
    unsafe { simtrans_series_free(series) };
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include").join("simtrans.h")
}

#[test]
fn header_declares_the_interface() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "typedef enum SimtransStatus",
        "SIMTRANS_STATUS_VERIFICATION_FAILED = 5",
        "typedef struct SimtransConfig SimtransConfig;",
        "typedef struct SimtransSeries SimtransSeries;",
        "simtrans_last_error(void)",
        "simtrans_series_verify_one(",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c_and_cxx() {
    for lang in ["c", "c++"] {
        let out = Command::new("cc")
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(header())
            .output()
            .expect("a C compiler on PATH");
        assert!(out.status.success(), "{lang}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include "simtrans.h"

static const char *config =
    "directions = [\"0\", \"1/2\"]\n"
    "targets = [[[1, 0]]]\n"
    "schedule = [[1, 2, 1, 2]]\n"
    "[magnitudes]\n"
    "kind = \"naturals\"\n";

int main(void) {
    SimtransConfig *cfg = NULL;
    SimtransSeries *series = NULL;
    size_t failed = 99;
    double re = 0, im = 0;
    if (simtrans_config_parse(config, &cfg) != SIMTRANS_STATUS_OK) return 1;
    if (simtrans_build(cfg, &series) != SIMTRANS_STATUS_OK) return 2;
    if (simtrans_series_verify(series, 21, &failed) != SIMTRANS_STATUS_OK || failed != 0) return 3;
    if (simtrans_series_eval(series, 0.0, 0.0, &re, &im) != SIMTRANS_STATUS_OK) return 4;
    if (simtrans_config_parse("directions = 1", &cfg) != SIMTRANS_STATUS_CONFIG) return 5;
    printf("%zu %s\n", simtrans_series_certificate_count(series), simtrans_last_error() ? "error" : "none");
    simtrans_series_free(series);
    simtrans_config_free(cfg);
    return 0;
}
"#;

/// Compiles a C client against the shared library cargo built next to
/// this test binary.
#[test]
fn c_client_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    assert!(lib_dir.join("libsimtrans_ffi.so").exists(), "no shared library in {}", lib_dir.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    let bin = dir.path().join("client");
    std::fs::write(&src, PROGRAM).unwrap();
    let out = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg("-L")
        .arg(&lib_dir)
        .args(["-lsimtrans_ffi", "-o"])
        .arg(&bin)
        .output()
        .expect("a C compiler on PATH");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).env("LD_LIBRARY_PATH", &lib_dir).output().unwrap();
    assert!(run.status.success(), "client exited with {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout), "1 error\n");
}
