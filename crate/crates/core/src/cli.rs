//! Command implementations behind the `simtrans` binary. Each command reads
//! its inputs, writes a human-readable report to `out` and returns a
//! structured error whose [`Error::exit_code`] is the process status.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;

use crate::archive::SeriesArchive;
use crate::builder::{build_with, evaluate_series, verify_certificate, SeriesFunction};
use crate::config::{Resolved, RunConfig};
use crate::error::{Error, Result};
use crate::extraction::{extract_common_indices, remeasure, ExtractionResult};
use crate::poly::Poly;

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

/// Builds the configured schedule, printing one summary line per window.
pub fn run_build(config: &RunConfig, out: &mut dyn Write) -> Result<SeriesArchive> {
    let r = config.resolve()?;
    let mut line_err = None;
    let series = build_with(&r.schedule, &r.seq, &r.targets, &r.dirs, &r.opts, |f, c| {
        let w = c.window;
        let degree = f.increments.last().and_then(|q| q.degree()).map_or(-1, |d| d as i64);
        let res = writeln!(
            out,
            "window ({}, {}, {}, {}): s = {}, |m_s| = {}, degree = {}, created bound = {:e}, precision = {}",
            w.v,
            w.denom,
            w.k,
            w.n,
            c.witness_s,
            c.m_value.norm(),
            degree,
            c.created_bound,
            f.prec
        );
        if let Err(e) = res {
            line_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = line_err {
        return Err(io(e));
    }
    Ok(SeriesArchive::new(config, &series))
}

pub fn cmd_build(config: &Path, archive: &Path, out: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let a = run_build(&cfg, out)?;
    a.write(archive)?;
    writeln!(out, "wrote {} certificates to {}", a.certificates.len(), archive.display()).map_err(io)
}

/// Per-certificate `(passed, measured)` for every ledger entry.
pub fn verify_series(series: &SeriesFunction, r: &Resolved, grid: usize) -> Result<Vec<(bool, f64)>> {
    series
        .certificates
        .iter()
        .map(|c| verify_certificate(series, c, &r.dirs, &r.targets, grid))
        .collect()
}

/// Re-verifies every certificate of the archive at `grid` (the configured
/// grid when `None`); fails when any measured value reaches `1/N`.
pub fn run_verify(archive: &SeriesArchive, grid: Option<usize>, out: &mut dyn Write) -> Result<Vec<(bool, f64)>> {
    let r = archive.resolved()?;
    let grid = grid.unwrap_or(r.grid);
    if grid < 2 {
        return Err(Error::Domain(format!("grid must be at least 2, got {grid}")));
    }
    let series = archive.series()?;
    crate::builder::audit_ledger(&series, &r.seq, &r.dirs)?;
    let results = verify_series(&series, &r, grid)?;
    for (c, (ok, measured)) in series.certificates.iter().zip(&results) {
        let w = c.window;
        writeln!(
            out,
            "window ({}, {}, {}, {}): measured {:e} against 1/N = {:e}: {}",
            w.v,
            w.denom,
            w.k,
            w.n,
            measured,
            w.tolerance(),
            if *ok { "pass" } else { "FAIL" }
        )
        .map_err(io)?;
    }
    let failed = results.iter().filter(|r| !r.0).count();
    if failed > 0 {
        return Err(Error::VerificationFailed {
            failed,
            total: results.len(),
        });
    }
    writeln!(out, "all {} certificates pass", results.len()).map_err(io)?;
    Ok(results)
}

pub fn cmd_verify(archive: &Path, grid: Option<usize>, out: &mut dyn Write) -> Result<()> {
    run_verify(&SeriesArchive::read(archive)?, grid, out).map(|_| ())
}

/// Comma-separated complex coefficients, constant term first, each in the
/// form accepted by `Complex64::from_str` (`1`, `-0.5i`, `2+3i`).
pub fn parse_coeffs(s: &str) -> Result<Vec<Complex64>> {
    s.split(',')
        .map(|t| {
            Complex64::from_str(t.trim()).map_err(|_| Error::Config(format!("bad coefficient {:?} in {s:?}", t.trim())))
        })
        .collect()
}

/// `re,im`.
pub fn parse_point(s: &str) -> Result<Complex64> {
    match parse_reals(s)?.as_slice() {
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(Error::Config(format!("expected re,im, got {s:?}"))),
    }
}

fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Config(format!("bad number {:?} in {s:?}", t.trim())))
        })
        .collect()
}

pub fn run_extract(archive: &SeriesArchive, g: &[Complex64], horizon: usize, out: &mut dyn Write) -> Result<ExtractionResult> {
    let r = archive.resolved()?;
    let series = archive.series()?;
    let g = Poly::from_c64(g, series.prec);
    let res = extract_common_indices(&series, &r.targets, &g, horizon, &r.dirs)?;
    let measured = remeasure(&series, &res, &r.dirs, r.grid)?;
    writeln!(out, "n\ts_n\tk_n\tcertified\tmeasured").map_err(io)?;
    for (e, m) in res.entries.iter().zip(measured) {
        writeln!(out, "{}\t{}\t{}\t{:e}\t{:e}", e.n, e.s, e.k, e.certified, m).map_err(io)?;
    }
    Ok(res)
}

pub fn cmd_extract(archive: &Path, g: &str, horizon: usize, out: &mut dyn Write) -> Result<()> {
    let coeffs = parse_coeffs(g)?;
    run_extract(&SeriesArchive::read(archive)?, &coeffs, horizon, out).map(|_| ())
}

pub fn cmd_eval(archive: &Path, z: &str, out: &mut dyn Write) -> Result<()> {
    let z = parse_point(z)?;
    let series = SeriesArchive::read(archive)?.series()?;
    let w = evaluate_series(&series, z);
    writeln!(out, "{} {}", w.re, w.im).map_err(io)
}

/// Rows `re(z), im(z), re(f), im(f), |f|` over the `n x n` mesh of the
/// square bounding `D(center, r)`, row-major from the lowest imaginary part.
pub fn export_grid(series: &SeriesFunction, center: Complex64, r: f64, n: usize) -> Result<String> {
    if n < 2 {
        return Err(Error::Domain(format!("export needs at least 2 points per axis, got {n}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("disc radius must be positive, got {r}")));
    }
    let step = 2.0 * r / (n - 1) as f64;
    let mut text = String::from("re_z,im_z,re_f,im_f,abs_f\n");
    for row in 0..n {
        for col in 0..n {
            let z = center + Complex64::new(-r + col as f64 * step, -r + row as f64 * step);
            let w = evaluate_series(series, z);
            text.push_str(&format!("{},{},{},{},{}\n", z.re, z.im, w.re, w.im, w.norm()));
        }
    }
    Ok(text)
}

pub fn cmd_export_grid(archive: &Path, disc: &str, n: usize, path: &Path, out: &mut dyn Write) -> Result<()> {
    let (center, r) = match parse_reals(disc)?.as_slice() {
        [cx, cy, r] => (Complex64::new(*cx, *cy), *r),
        _ => return Err(Error::Config(format!("expected cx,cy,r, got {disc:?}"))),
    };
    let series = SeriesArchive::read(archive)?.series()?;
    let text = export_grid(&series, center, r, n)?;
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    writeln!(out, "wrote {} rows to {}", n * n, path.display()).map_err(io)
}
