//! One index sequence for all directions at once, read off the ledger, and
//! a single-direction orbit probe for comparison.

use num_complex::Complex64;

use crate::builder::{
    disc_mesh, horner_c64, magnitude_at, sampled_translate_sup, MagnitudeSequence, SeriesFunction, TargetLibrary,
};
use crate::error::{Error, Result};
use crate::geometry::{Direction, DirectionSet, Disc};
use crate::mp::Cx;
use crate::poly::{sup_bound_on_disc, Poly};

/// One level `n` of an extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionEntry {
    pub n: usize,
    /// Witness index shared by every direction in the first `n`.
    pub s: usize,
    pub m_value: Complex64,
    /// Library index of the target standing in for `g` on `D(0, n)`.
    pub k: usize,
    /// Upper bound for `sup_{|z| <= n} |f(z + m_s u_j) - g(z)|` over the
    /// first `n` directions, `< 1/n`.
    pub certified: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionResult {
    pub entries: Vec<ExtractionEntry>,
    pub g: Poly,
    /// False when the distance between `g` and the library was asserted by
    /// the caller instead of computed.
    pub certified: bool,
}

/// Smallest `k` whose target is within `1/(2n)` of `g` on `D(0, n)`, with
/// that certified distance.
fn closest_target(targets: &TargetLibrary, g: &Poly, n: usize) -> Result<(usize, f64)> {
    let disc = Disc::new(Complex64::new(0.0, 0.0), n as f64)?;
    let half = 1.0 / (2.0 * n as f64);
    for (i, p) in targets.iter().enumerate() {
        let dist = sup_bound_on_disc(&g.sub(p), &disc);
        if dist < half {
            return Ok((i + 1, dist));
        }
    }
    Err(Error::NoCloseTarget(n))
}

fn level_entry(series: &SeriesFunction, n: usize, k: usize, dist: f64) -> Result<ExtractionEntry> {
    let cert = series
        .certificates
        .iter()
        .find(|c| {
            let w = c.window;
            w.v == n && w.denom == 2 * n && w.k == k && w.n == n && c.ledger_consistent()
        })
        .ok_or(Error::MissingWindow { n, k })?;
    Ok(ExtractionEntry {
        n,
        s: cert.witness_s,
        m_value: cert.m_value,
        k,
        certified: cert.guaranteed_bound() + dist,
    })
}

fn check_levels(horizon: usize, dirs: &DirectionSet) -> Result<()> {
    if horizon < 2 {
        return Err(Error::Domain(format!("horizon must be at least 2, got {horizon}")));
    }
    if horizon > dirs.len() {
        return Err(Error::IndexOutOfRange {
            index: horizon,
            len: dirs.len(),
        });
    }
    Ok(())
}

/// For every level `n = 2..=horizon`, picks the smallest library target
/// within `1/(2n)` of `g` on `D(0, n)` and the ledger's witness for window
/// `(n, 2n, k, n)`. The certified value adds the certificate's guaranteed
/// bound to the target distance.
pub fn extract_common_indices(
    series: &SeriesFunction,
    targets: &TargetLibrary,
    g: &Poly,
    horizon: usize,
    dirs: &DirectionSet,
) -> Result<ExtractionResult> {
    check_levels(horizon, dirs)?;
    let g = g.with_prec(series.prec.max(g.prec()));
    let entries = (2..=horizon)
        .map(|n| {
            let (k, dist) = closest_target(targets, &g, n)?;
            level_entry(series, n, k, dist)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExtractionResult {
        entries,
        g,
        certified: true,
    })
}

/// [`extract_common_indices`] for a `g` known only through the caller's
/// claim `sup_{|z| <= horizon} |g - p_k| <= bound`. The result is marked
/// uncertified and carries `g = p_k`.
pub fn extract_with_asserted_distance(
    series: &SeriesFunction,
    targets: &TargetLibrary,
    k: usize,
    bound: f64,
    horizon: usize,
    dirs: &DirectionSet,
) -> Result<ExtractionResult> {
    check_levels(horizon, dirs)?;
    let p = targets.get(k)?.clone();
    if !(bound >= 0.0) {
        return Err(Error::Domain(format!("asserted distance must be nonnegative, got {bound}")));
    }
    let entries = (2..=horizon)
        .map(|n| {
            if !(bound < 1.0 / (2.0 * n as f64)) {
                return Err(Error::NoCloseTarget(n));
            }
            level_entry(series, n, k, bound)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExtractionResult {
        entries,
        g: p,
        certified: false,
    })
}

/// Grid re-measurement of every level: the sampled sup over `D(0, n)` and
/// the first `n` directions, one value per entry.
pub fn remeasure(series: &SeriesFunction, result: &ExtractionResult, dirs: &DirectionSet, grid: usize) -> Result<Vec<f64>> {
    result
        .entries
        .iter()
        .map(|e| {
            let prefix = dirs.prefix(e.n)?;
            Ok(sampled_translate_sup(series, e.m_value, &prefix, &result.g, e.n as f64, grid))
        })
        .collect()
}

/// Grid density used by [`density_probe`].
pub const PROBE_GRID: usize = 101;

/// Scans `s = 1..=s_max` and returns the index minimising the sampled
/// `sup_{|z| <= v} |f(z + m_s u) - g(z)|`, smallest `s` on ties. Scanning
/// stops early at the end of an explicit magnitude list.
pub fn density_probe(
    f: &Poly,
    a: Direction,
    seq: &MagnitudeSequence,
    g: &Poly,
    v: usize,
    s_max: usize,
) -> Result<(usize, f64)> {
    if s_max == 0 {
        return Err(Error::Domain("s_max must be at least 1".into()));
    }
    let prec = f.prec().max(g.prec());
    let pts = disc_mesh(v as f64, PROBE_GRID);
    let mut best = (0, f64::INFINITY);
    for s in 1..=s_max {
        let m = match magnitude_at(seq, s) {
            Ok(m) => m,
            Err(Error::IndexOutOfRange { .. }) => break,
            Err(e) => return Err(e),
        };
        let c = Cx::from_c64(m * a.unit(), prec);
        let local = f.shift_argument(&c).sub(g).to_c64();
        let sup = pts
            .iter()
            .map(|&z| horner_c64(&local, z).norm())
            .fold(0.0, |acc: f64, x| if x.is_nan() { f64::INFINITY } else { acc.max(x) });
        if sup < best.1 || best.0 == 0 {
            best = (s, sup);
        }
    }
    if best.0 == 0 {
        return Err(Error::ScanExhausted {
            threshold: 0.0,
            start: 1,
            scanned: 0,
        });
    }
    Ok(best)
}
