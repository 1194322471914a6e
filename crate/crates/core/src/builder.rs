//! Inductive construction of a series of polynomial increments whose
//! translates satisfy a schedule of windows, with a slack ledger that keeps
//! every earlier certificate valid after later increments are added.

use num_complex::Complex64;
use rug::float::Round;
use rug::ops::{AddAssignRound, MulAssignRound};
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{min_pair_gap, separation_threshold, DirectionSet, TranslationFrame};
use crate::mp::{Cx, DEFAULT_PREC, MAX_PREC, MIN_PREC};
use crate::poly::{
    coefficient_bound, coefficient_bound_mp, modulus_series, modulus_series_mp, scaled_rounding_mp,
    shift_rounding_bound_mp, Poly, SAFETY_FACTOR,
};
use crate::runge::{approximate_blend, plan_blend, ApproxOptions, BlendResult};

/// The window `(v, N, k, n)`: translates in the first `n` directions must be
/// within `1/N` of target `k` on the disc of radius `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub v: usize,
    #[serde(rename = "N")]
    pub denom: usize,
    pub k: usize,
    pub n: usize,
}

impl Window {
    pub fn new(v: usize, denom: usize, k: usize, n: usize) -> Result<Self> {
        if v == 0 || denom == 0 || k == 0 {
            return Err(Error::Domain(format!(
                "window ({v}, {denom}, {k}, {n}): v, N and k must be positive"
            )));
        }
        if n < 2 {
            return Err(Error::Domain(format!(
                "window ({v}, {denom}, {k}, {n}): n must be at least 2"
            )));
        }
        Ok(Window { v, denom, k, n })
    }

    /// `1/N`.
    pub fn tolerance(&self) -> f64 {
        1.0 / self.denom as f64
    }

    /// `1/(2N)`, the creation bound and also the perturbation budget.
    pub fn half_tolerance(&self) -> f64 {
        0.5 / self.denom as f64
    }
}

/// Generator for the translation magnitudes `m_1, m_2, ...`.
#[derive(Debug, Clone, PartialEq)]
pub enum MagnitudeSequence {
    /// `m_s = s`.
    Naturals,
    /// `m_s = a + b s`.
    Arithmetic { a: Complex64, b: Complex64 },
    /// `m_s = s^p`.
    Power { p: f64 },
    /// `m_s = s e^{i s}`.
    Spiral,
    /// `m_s = values[s - 1]`.
    Explicit(Vec<Complex64>),
}

impl MagnitudeSequence {
    /// Rejects generators that cannot be unbounded or produce non-finite values.
    pub fn validate(&self) -> Result<()> {
        match self {
            MagnitudeSequence::Arithmetic { a, b } => {
                if !(a.is_finite() && b.is_finite()) || *b == Complex64::new(0.0, 0.0) {
                    return Err(Error::Domain("arithmetic magnitudes need finite a and nonzero b".into()));
                }
            }
            MagnitudeSequence::Power { p } => {
                if !(p.is_finite() && *p > 0.0) {
                    return Err(Error::Domain(format!("power exponent must be positive, got {p}")));
                }
            }
            MagnitudeSequence::Explicit(values) => {
                if values.iter().any(|m| !m.is_finite()) {
                    return Err(Error::Domain("explicit magnitudes must be finite".into()));
                }
            }
            MagnitudeSequence::Naturals | MagnitudeSequence::Spiral => {}
        }
        Ok(())
    }
}

/// `m_s` for `s >= 1`.
pub fn magnitude_at(seq: &MagnitudeSequence, s: usize) -> Result<Complex64> {
    if s == 0 {
        return Err(Error::Domain("magnitude indices start at 1".into()));
    }
    let x = s as f64;
    Ok(match seq {
        MagnitudeSequence::Naturals => Complex64::new(x, 0.0),
        MagnitudeSequence::Arithmetic { a, b } => a + b * x,
        MagnitudeSequence::Power { p } => Complex64::new(x.powf(*p), 0.0),
        MagnitudeSequence::Spiral => Complex64::from_polar(x, x),
        MagnitudeSequence::Explicit(values) => *values.get(s - 1).ok_or(Error::IndexOutOfRange {
            index: s,
            len: values.len(),
        })?,
    })
}

/// Smallest `s >= start` with `|m_s| > threshold`, looking at no more than
/// `scan_cap` indices.
pub fn scan_witness(seq: &MagnitudeSequence, threshold: f64, start: usize, scan_cap: usize) -> Result<usize> {
    if !(threshold >= 0.0) {
        return Err(Error::Domain(format!("threshold must be nonnegative, got {threshold}")));
    }
    let start = start.max(1);
    let exhausted = |scanned| Error::ScanExhausted {
        threshold,
        start,
        scanned,
    };
    // sequences with increasing modulus s^p jump straight to the crossing
    let increasing = match seq {
        MagnitudeSequence::Naturals | MagnitudeSequence::Spiral => Some(1.0),
        MagnitudeSequence::Power { p } => Some(*p),
        _ => None,
    };
    if let Some(p) = increasing {
        let norm = |s: usize| magnitude_at(seq, s).map(|m| m.norm());
        let guess = threshold.powf(1.0 / p).floor();
        if !(guess < (usize::MAX / 2) as f64) {
            return Err(exhausted(scan_cap));
        }
        let mut s = (guess as usize).max(start);
        while s > start && norm(s - 1)? > threshold {
            s -= 1;
        }
        while norm(s)? <= threshold {
            s += 1;
        }
        return if s - start < scan_cap { Ok(s) } else { Err(exhausted(scan_cap)) };
    }
    for (scanned, s) in (start..start.saturating_add(scan_cap)).enumerate() {
        let m = match magnitude_at(seq, s) {
            Ok(m) => m,
            Err(Error::IndexOutOfRange { .. }) => return Err(exhausted(scanned)),
            Err(e) => return Err(e),
        };
        if m.norm() > threshold {
            return Ok(s);
        }
    }
    Err(exhausted(scan_cap))
}

/// Targets `p_1, p_2, ...`, addressed 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetLibrary {
    targets: Vec<Poly>,
}

impl TargetLibrary {
    pub fn new(targets: Vec<Poly>) -> Self {
        TargetLibrary { targets }
    }

    pub fn from_c64(targets: &[Vec<Complex64>], prec: u32) -> Self {
        Self::new(targets.iter().map(|c| Poly::from_c64(c, prec)).collect())
    }

    pub fn get(&self, k: usize) -> Result<&Poly> {
        k.checked_sub(1)
            .and_then(|i| self.targets.get(i))
            .ok_or(Error::IndexOutOfRange {
                index: k,
                len: self.targets.len(),
            })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Poly> {
        self.targets.iter()
    }
}

/// Ledger entry for one fixed window.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub window: Window,
    /// 1-based build step that created the certificate.
    pub step: usize,
    pub witness_s: usize,
    pub m_value: Complex64,
    /// Separation threshold from `v1` and the direction prefix, before escalation.
    pub threshold: f64,
    pub v1: f64,
    pub escalations: usize,
    /// Interpolation orders of the cutoff, base disc first (empty on the first step).
    pub cutoff_orders: Vec<usize>,
    /// Interpolation orders of the target part, base disc first.
    pub target_orders: Vec<usize>,
    /// Certified max over the translated discs at creation, `< 1/(2N)`.
    pub created_bound: f64,
    pub initial_slack: f64,
    pub slack: f64,
    /// Certified sup bound of each later increment on the protected disc.
    pub deductions: Vec<f64>,
}

impl Certificate {
    /// Certified upper bound for the window inequality on the current function.
    pub fn guaranteed_bound(&self) -> f64 {
        self.created_bound + self.deductions.iter().sum::<f64>()
    }

    /// Re-checks the budget arithmetic from the recorded numbers alone.
    pub fn ledger_consistent(&self) -> bool {
        let mut slack = self.initial_slack;
        for d in &self.deductions {
            if !(*d >= 0.0) {
                return false;
            }
            slack -= d;
            if slack < 0.0 {
                return false;
            }
        }
        self.created_bound >= 0.0
            && self.created_bound < self.window.half_tolerance()
            && self.initial_slack <= self.window.half_tolerance()
            && slack == self.slack
            && self.guaranteed_bound() < self.window.tolerance()
    }
}

/// Partial sum `q_1 + ... + q_T` with its ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFunction {
    pub increments: Vec<Poly>,
    pub certificates: Vec<Certificate>,
    /// Every certified disc lies inside `D(0, protect_radius)`.
    pub protect_radius: f64,
    /// The `eps_t` allowed at each step.
    pub tail_caps: Vec<f64>,
    pub prec: u32,
}

impl SeriesFunction {
    pub fn zero(prec: u32) -> Self {
        SeriesFunction {
            increments: Vec::new(),
            certificates: Vec::new(),
            protect_radius: 0.0,
            tail_caps: Vec::new(),
            prec,
        }
    }

    pub fn steps(&self) -> usize {
        self.increments.len()
    }

    /// The same series carried at a higher working precision.
    pub fn with_prec(&self, prec: u32) -> SeriesFunction {
        let mut out = self.clone();
        out.prec = prec.max(self.prec);
        out.increments = self.increments.iter().map(|q| q.with_prec(out.prec)).collect();
        out
    }

    /// The partial sum as a single polynomial (rounded at the working precision).
    pub fn partial_sum(&self) -> Poly {
        self.increments
            .iter()
            .fold(Poly::zero(self.prec), |acc, q| acc.add(q))
    }

    /// Taylor coefficients of the series around `center`, minus `target`.
    pub fn recentered_difference(&self, center: Complex64, target: &Poly) -> Poly {
        let c = Cx::from_c64(center, self.prec);
        let mut local = target.neg();
        for q in &self.increments {
            local = local.add(&q.shift_argument(&c));
        }
        local
    }
}

/// `sum_t q_t(z)`, each increment evaluated at the working precision.
pub fn evaluate_series(series: &SeriesFunction, z: Complex64) -> Complex64 {
    let z = Cx::from_c64(z, series.prec);
    let mut acc = Cx::zero(series.prec);
    for q in &series.increments {
        acc = &acc + &q.eval(&z);
    }
    acc.to_c64()
}

/// Rigorous bound for `sup_{|w| <= r} |f(center + w) - target(w)|`, with
/// `f` the stored sum of increments.
pub fn translate_bound(series: &SeriesFunction, center: Complex64, r: f64, target: &Poly) -> f64 {
    let c = Cx::from_c64(center, series.prec);
    let mut local = target.neg();
    let mut rounding = Float::with_val(series.prec, 0);
    let mut addends = modulus_series_mp(target, r);
    for q in &series.increments {
        let shifted = q.shift_argument(&c);
        rounding.add_assign_round(shift_rounding_bound_mp(q, &c, r), Round::Up);
        addends.add_assign_round(modulus_series_mp(&shifted, r), Round::Up);
        local = local.add(&shifted);
    }
    // each coefficient of `local` went through at most T + 1 additions
    let terms = series.increments.len() as f64 + 2.0;
    rounding.add_assign_round(scaled_rounding_mp(&addends, terms, series.prec), Round::Up);
    rounding.add_assign_round(coefficient_bound_mp(&local, r), Round::Up);
    rounding.mul_assign_round(SAFETY_FACTOR, Round::Up);
    rounding.to_f64_round(Round::Up)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub initial_order: usize,
    pub order_cap: usize,
    pub scan_cap: usize,
    /// Magnitude threshold doublings allowed per window.
    pub escalation_cap: usize,
    /// Initial working precision in bits.
    pub prec: u32,
    /// The working precision is raised up to this many bits when a step
    /// loses too much accuracy to rounding.
    pub max_prec: u32,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            initial_order: 4,
            order_cap: 256,
            scan_cap: 1_000_000,
            escalation_cap: 8,
            prec: DEFAULT_PREC,
            max_prec: MAX_PREC,
        }
    }
}

impl BuildOptions {
    pub fn validate(&self) -> Result<()> {
        if self.initial_order == 0 || self.order_cap == 0 || self.scan_cap == 0 {
            return Err(Error::Domain("initial order, order cap and scan cap must be positive".into()));
        }
        if self.prec < MIN_PREC {
            return Err(Error::Domain(format!("precision must be at least {MIN_PREC} bits")));
        }
        if self.max_prec < self.prec {
            return Err(Error::Domain("maximum precision is below the initial precision".into()));
        }
        Ok(())
    }
}

fn escalate_until_fit(
    h: &Poly,
    g: &Poly,
    frame_for: impl Fn(f64) -> Result<(usize, TranslationFrame)>,
    threshold: f64,
    tol_base: f64,
    tol_far: f64,
    opts: &BuildOptions,
) -> Result<(usize, usize, TranslationFrame, BlendResult)> {
    let approx = ApproxOptions {
        initial_order: opts.initial_order,
        order_cap: opts.order_cap,
    };
    // every escalation level is planned first; the smallest magnitude whose
    // predicted degree is within a factor of the best is tried first, then
    // the rest in order of predicted degree
    let mut levels = Vec::new();
    let mut first_err = None;
    for esc in 0..=opts.escalation_cap {
        match frame_for(threshold * (esc as f64).exp2()) {
            Ok((s, frame)) => {
                let predicted = plan_blend(h, g, &frame, tol_base, tol_far);
                levels.push((predicted.unwrap_or(usize::MAX), esc, s, frame));
            }
            Err(e) => {
                first_err.get_or_insert(e);
                break;
            }
        }
    }
    if levels.is_empty() {
        return Err(first_err.expect("no level and no error"));
    }
    let best = levels.iter().map(|l| l.0).min().unwrap_or(usize::MAX);
    let near_best = |d: usize| d != usize::MAX && d as f64 <= best as f64 * DEGREE_SLACK + DEGREE_ALLOWANCE;
    levels.sort_by_key(|l| (!near_best(l.0), if near_best(l.0) { l.1 } else { l.0 }, l.1));
    let mut last = None;
    for (predicted, esc, s, frame) in levels {
        if predicted == usize::MAX {
            continue;
        }
        match approximate_blend(h, g, &frame, tol_base, tol_far, &approx) {
            Ok(res) => return Ok((esc, s, frame, res)),
            Err(e @ Error::OrderCapExceeded { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    // running out of magnitudes before the cap is the binding limit
    if let Some(e @ Error::ScanExhausted { .. }) = &first_err {
        return Err(e.clone());
    }
    Err(Error::EscalationExhausted {
        escalations: opts.escalation_cap,
        last: Box::new(last.or(first_err).unwrap_or(Error::OrderCapExceeded {
            cap: opts.order_cap,
            max_bound: f64::INFINITY,
        })),
    })
}

/// Escalation levels whose predicted degree is within this factor (plus a
/// small allowance) of the best are preferred by smallest magnitude.
const DEGREE_SLACK: f64 = 1.1;
const DEGREE_ALLOWANCE: f64 = 10.0;

/// One inductive step: append an increment so that window `w` holds within
/// `1/(2N)`, charging its effect on the protected disc to every earlier
/// certificate.
///
/// When rounding at the current working precision is too coarse for the
/// step, the precision of the whole series is raised and the step redone,
/// up to `opts.max_prec`.
pub fn fix_window(
    series: &SeriesFunction,
    w: Window,
    seq: &MagnitudeSequence,
    targets: &TargetLibrary,
    dirs: &DirectionSet,
    opts: &BuildOptions,
) -> Result<(SeriesFunction, Certificate)> {
    opts.validate()?;
    let mut prec = series.prec.max(opts.prec);
    loop {
        let lifted = series.with_prec(prec);
        match fix_window_at(&lifted, w, seq, targets, dirs, opts) {
            Err(Error::ConditioningFailure { bits_short, .. }) if bits_short > 0 && prec < opts.max_prec => {
                let extra = (bits_short + 64).max(prec / 8);
                prec = (prec + extra).div_ceil(64) * 64;
                prec = prec.min(opts.max_prec);
            }
            other => return other,
        }
    }
}

fn fix_window_at(
    series: &SeriesFunction,
    w: Window,
    seq: &MagnitudeSequence,
    targets: &TargetLibrary,
    dirs: &DirectionSet,
    opts: &BuildOptions,
) -> Result<(SeriesFunction, Certificate)> {
    let w = Window::new(w.v, w.denom, w.k, w.n)?;
    if w.n > dirs.len() {
        return Err(Error::IndexOutOfRange {
            index: w.n,
            len: dirs.len(),
        });
    }
    let g = targets.get(w.k)?.with_prec(series.prec);
    let prefix = dirs.prefix(w.n)?;
    let step = series.steps() + 1;

    let v1 = (w.v as f64).max(series.protect_radius.ceil());
    let slack_min = series
        .certificates
        .iter()
        .map(|c| c.slack)
        .fold(f64::INFINITY, f64::min);
    let eps = (-(step as f64)).exp2().min(slack_min / 2.0);
    if !(eps > 0.0) {
        return Err(Error::SlackDepleted { step });
    }
    let tol = eps.min(w.half_tolerance());

    let threshold = separation_threshold(v1, min_pair_gap(&prefix)?)?;
    let h = series.partial_sum();
    let frame_for = |thr: f64| {
        let s = scan_witness(seq, thr, 1, opts.scan_cap)?;
        let m = magnitude_at(seq, s)?;
        let frame = TranslationFrame::new(v1, m, prefix.clone())?.with_probe_radius(w.v as f64)?;
        Ok((s, frame))
    };
    let (escalations, s, frame, res) =
        escalate_until_fit(&h, &g, frame_for, threshold, tol, w.half_tolerance(), opts)?;

    let q_t = res.q.sub(&h);
    let deduction = coefficient_bound(&q_t, v1);
    if !(deduction < eps) {
        return Err(Error::ConditioningFailure {
            piece: 0,
            rounding: deduction,
            tol: eps,
            bits_short: 0,
        });
    }

    let mut next = series.clone();
    for cert in &mut next.certificates {
        cert.deductions.push(deduction);
        cert.slack -= deduction;
        if cert.slack < 0.0 {
            return Err(Error::SlackDepleted { step });
        }
    }
    next.increments.push(q_t);
    next.tail_caps.push(eps);

    let mut created_bound: f64 = 0.0;
    let mut reach: f64 = 0.0;
    for j in 0..prefix.len() {
        let center = frame.center(j);
        let b = translate_bound(&next, center, w.v as f64, &g);
        if !(b < w.half_tolerance()) {
            return Err(Error::ConditioningFailure {
                piece: j + 1,
                rounding: b,
                tol: w.half_tolerance(),
                bits_short: 0,
            });
        }
        created_bound = created_bound.max(b);
        reach = reach.max(center.norm());
    }
    next.protect_radius = next
        .protect_radius
        .max(reach * (1.0 + 4.0 * f64::EPSILON) + w.v as f64);

    let cert = Certificate {
        window: w,
        step,
        witness_s: s,
        m_value: frame.m,
        threshold,
        v1,
        escalations,
        cutoff_orders: res.cutoff_orders,
        target_orders: res.target_orders,
        created_bound,
        initial_slack: w.half_tolerance(),
        slack: w.half_tolerance(),
        deductions: Vec::new(),
    };
    next.certificates.push(cert.clone());
    Ok((next, cert))
}

/// Folds [`fix_window`] over the schedule, starting from the zero function.
pub fn build(
    schedule: &[Window],
    seq: &MagnitudeSequence,
    targets: &TargetLibrary,
    dirs: &DirectionSet,
    opts: &BuildOptions,
) -> Result<SeriesFunction> {
    build_with(schedule, seq, targets, dirs, opts, |_, _| {})
}

/// [`build`] with a callback after each fixed window.
pub fn build_with(
    schedule: &[Window],
    seq: &MagnitudeSequence,
    targets: &TargetLibrary,
    dirs: &DirectionSet,
    opts: &BuildOptions,
    mut on_step: impl FnMut(&SeriesFunction, &Certificate),
) -> Result<SeriesFunction> {
    seq.validate()?;
    opts.validate()?;
    let mut series = SeriesFunction::zero(opts.prec);
    for &w in schedule {
        let (next, cert) = fix_window(&series, w, seq, targets, dirs, opts)?;
        on_step(&next, &cert);
        series = next;
    }
    Ok(series)
}

/// Sample points of the closed disc `D(0, r)`: the `grid x grid` mesh of the
/// bounding square restricted to the disc, plus `4 grid` boundary points.
pub fn disc_mesh(r: f64, grid: usize) -> Vec<Complex64> {
    let grid = grid.max(2);
    let mut pts = Vec::with_capacity(grid * grid + 4 * grid);
    let step = 2.0 * r / (grid - 1) as f64;
    for a in 0..grid {
        for b in 0..grid {
            let z = Complex64::new(-r + a as f64 * step, -r + b as f64 * step);
            if z.norm() <= r {
                pts.push(z);
            }
        }
    }
    let boundary = 4 * grid;
    for i in 0..boundary {
        let t = std::f64::consts::TAU * i as f64 / boundary as f64;
        pts.push(Complex64::from_polar(r, t));
    }
    pts
}

pub(crate) fn horner_c64(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// Sampled `max_j sup_{|z| <= v} |f(z + m u_j) - p_k(z)|` over the window's
/// directions, and whether it stays below `1/N`.
///
/// The series is recentered at each translate at the working precision and
/// the resulting local difference is sampled in binary64.
pub fn verify_certificate(
    series: &SeriesFunction,
    cert: &Certificate,
    dirs: &DirectionSet,
    targets: &TargetLibrary,
    grid: usize,
) -> Result<(bool, f64)> {
    let w = cert.window;
    let prefix = dirs.prefix(w.n)?;
    let g = targets.get(w.k)?;
    let measured = sampled_translate_sup(series, cert.m_value, &prefix, g, w.v as f64, grid);
    Ok((measured < w.tolerance(), measured))
}

/// Sampled `max_j sup_{|z| <= r} |f(z + m u_j) - g(z)|` over the given
/// directions on the [`disc_mesh`] of density `grid`; NaN samples count as
/// infinite.
pub fn sampled_translate_sup(
    series: &SeriesFunction,
    m: Complex64,
    dirs: &DirectionSet,
    g: &Poly,
    r: f64,
    grid: usize,
) -> f64 {
    let pts = disc_mesh(r, grid);
    let prec = sampling_prec(series, m.norm() + r);
    let lowered = SeriesFunction {
        increments: series.increments.iter().map(|q| q.with_prec(prec)).collect(),
        prec,
        ..SeriesFunction::zero(prec)
    };
    let g = g.with_prec(prec);
    let mut measured: f64 = 0.0;
    for d in dirs.iter() {
        let local = lowered.recentered_difference(m * d.unit(), &g).to_c64();
        for &z in &pts {
            let val = horner_c64(&local, z).norm();
            measured = if val.is_nan() { f64::INFINITY } else { measured.max(val) };
        }
    }
    measured
}

/// Bits kept below the unit place when sampling.
const SAMPLING_GUARD: i64 = 128;

/// Precision for sampled checks within `|z| <= reach`: the series'
/// coefficient sums at `reach` bound every intermediate of the recentering,
/// so carrying them with [`SAMPLING_GUARD`] bits below one leaves the
/// samples exact in binary64. Never above the series precision.
fn sampling_prec(series: &SeriesFunction, reach: f64) -> u32 {
    let top = series
        .increments
        .iter()
        .filter_map(|q| modulus_series_mp(q, reach).get_exp())
        .max()
        .unwrap_or(0) as i64;
    let bits = (top.max(0) + SAMPLING_GUARD).div_euclid(64) * 64 + 64;
    (bits.min(series.prec as i64) as u32).max(MIN_PREC.min(series.prec))
}

/// First `count` windows of the diagonal enumeration of `(v, N, k, n)` by
/// increasing `v + N + k + n`, ties broken lexicographically, restricted to
/// `n >= 2`, `k <= library_len` and `n <= direction_count`.
pub fn canonical_schedule(count: usize, library_len: usize, direction_count: usize) -> Result<Vec<Window>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if library_len == 0 || direction_count < 2 {
        return Err(Error::Domain(
            "canonical schedule needs a nonempty library and at least two directions".into(),
        ));
    }
    let mut out = Vec::with_capacity(count);
    let mut total = 5;
    while out.len() < count {
        for v in 1..=total {
            for denom in 1..=total - v {
                for k in 1..=(total - v - denom).min(library_len) {
                    let n = total - v - denom - k;
                    if (2..=direction_count).contains(&n) {
                        out.push(Window { v, denom, k, n });
                        if out.len() == count {
                            return Ok(out);
                        }
                    }
                }
            }
        }
        total += 1;
    }
    Ok(out)
}

/// Re-checks every ledger entry's arithmetic and witness legality.
pub fn audit_ledger(series: &SeriesFunction, seq: &MagnitudeSequence, dirs: &DirectionSet) -> Result<()> {
    for (i, cert) in series.certificates.iter().enumerate() {
        let fail = |what: &str| Error::Archive(format!("certificate {}: {what}", i + 1));
        if !cert.ledger_consistent() {
            return Err(fail("budget arithmetic does not hold"));
        }
        if cert.deductions.len() != series.steps() - cert.step {
            return Err(fail("deduction count does not match later steps"));
        }
        if magnitude_at(seq, cert.witness_s)? != cert.m_value {
            return Err(fail("witness value does not match the magnitude sequence"));
        }
        let prefix = dirs.prefix(cert.window.n)?;
        let threshold = separation_threshold(cert.v1, min_pair_gap(&prefix)?)?;
        if !(cert.m_value.norm() > threshold) {
            return Err(fail("witness magnitude does not exceed the separation threshold"));
        }
    }
    for (t, &cap) in series.tail_caps.iter().enumerate() {
        if !(cap <= (-((t + 1) as f64)).exp2()) {
            return Err(Error::Archive(format!("tail cap of step {} exceeds 2^-{}", t + 1, t + 1)));
        }
    }
    Ok(())
}

/// Sum of `|q_t|` coefficient moduli at `reach` for each increment; a crude
/// growth profile for reports.
pub fn increment_sizes(series: &SeriesFunction, reach: f64) -> Vec<f64> {
    series.increments.iter().map(|q| modulus_series(q, reach)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const PREC: u32 = 256;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn library() -> TargetLibrary {
        TargetLibrary::from_c64(&[vec![c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]], PREC)
    }

    fn opts() -> BuildOptions {
        BuildOptions {
            prec: PREC,
            ..BuildOptions::default()
        }
    }

    #[test]
    fn magnitude_examples() {
        assert_eq!(magnitude_at(&MagnitudeSequence::Naturals, 7).unwrap(), c(7.0, 0.0));
        let arith = MagnitudeSequence::Arithmetic {
            a: c(1.0, 0.0),
            b: c(2.0, 0.0),
        };
        assert_eq!(magnitude_at(&arith, 3).unwrap(), c(7.0, 0.0));
        let e = magnitude_at(&MagnitudeSequence::Spiral, 1).unwrap();
        assert!((e - c(1f64.cos(), 1f64.sin())).norm() < 1e-15);
        assert!((e - c(0.5403, 0.8415)).norm() < 1e-4);
        let list = MagnitudeSequence::Explicit(vec![c(1.0, 0.0)]);
        assert_eq!(
            magnitude_at(&list, 2),
            Err(Error::IndexOutOfRange { index: 2, len: 1 })
        );
        assert!(magnitude_at(&MagnitudeSequence::Naturals, 0).is_err());
    }

    #[test]
    fn scan_examples() {
        assert_eq!(scan_witness(&MagnitudeSequence::Naturals, 6.0, 1, 100).unwrap(), 7);
        assert_eq!(scan_witness(&MagnitudeSequence::Power { p: 2.0 }, 6.0, 1, 100).unwrap(), 3);
        let list = MagnitudeSequence::Explicit(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        assert!(matches!(
            scan_witness(&list, 5.0, 1, 100),
            Err(Error::ScanExhausted { .. })
        ));
        assert!(matches!(
            scan_witness(&MagnitudeSequence::Naturals, 1000.0, 1, 10),
            Err(Error::ScanExhausted { .. })
        ));
        assert!(scan_witness(&MagnitudeSequence::Naturals, -1.0, 1, 10).is_err());
    }

    #[test]
    fn closed_form_scan_matches_linear_scan() {
        let linear = |seq: &MagnitudeSequence, thr: f64, start: usize| {
            (start..).find(|&s| magnitude_at(seq, s).unwrap().norm() > thr).unwrap()
        };
        let seqs = [
            MagnitudeSequence::Naturals,
            MagnitudeSequence::Spiral,
            MagnitudeSequence::Power { p: 0.5 },
            MagnitudeSequence::Power { p: 1.5 },
            MagnitudeSequence::Power { p: 3.0 },
        ];
        for seq in &seqs {
            for thr in [0.0, 0.5, 1.0, 2.0, 6.0, 9.0, 26.999, 27.0, 100.25, 1234.5] {
                for start in [1, 3, 40] {
                    assert_eq!(
                        scan_witness(seq, thr, start, 1 << 30).unwrap(),
                        linear(seq, thr, start),
                        "{seq:?} {thr} {start}"
                    );
                }
            }
        }
    }

    #[test]
    fn empty_schedule_gives_zero_function() {
        let dirs = DirectionSet::new(&[0.0, 0.5]).unwrap();
        let f = build(&[], &MagnitudeSequence::Naturals, &library(), &dirs, &opts()).unwrap();
        assert_eq!(f.steps(), 0);
        assert!(f.certificates.is_empty());
        assert_eq!(evaluate_series(&f, c(3.0, -2.0)), c(0.0, 0.0));
    }

    #[test]
    fn zero_target_needs_no_correction() {
        let dirs = DirectionSet::new(&[0.0, 0.5]).unwrap();
        let targets = TargetLibrary::from_c64(&[vec![]], PREC);
        let w = Window::new(1, 4, 1, 2).unwrap();
        let (f, cert) =
            fix_window(&SeriesFunction::zero(PREC), w, &MagnitudeSequence::Naturals, &targets, &dirs, &opts()).unwrap();
        assert!(f.increments[0].is_zero());
        assert_eq!(cert.created_bound, 0.0);
        let (ok, measured) = verify_certificate(&f, &cert, &dirs, &targets, 21).unwrap();
        assert!(ok);
        assert_eq!(measured, 0.0);
    }

    #[test]
    fn first_window_example() {
        let dirs = DirectionSet::new(&[0.0, 0.5]).unwrap();
        let w = Window::new(1, 4, 1, 2).unwrap();
        let (f, cert) =
            fix_window(&SeriesFunction::zero(PREC), w, &MagnitudeSequence::Naturals, &library(), &dirs, &opts()).unwrap();
        assert_eq!(cert.v1, 1.0);
        assert_eq!(cert.threshold, 2.0);
        // the smallest legal witness is s = 3, but jet interpolation cannot
        // certify 1/8 there, so the magnitude is escalated
        let escalated = cert.threshold * (cert.escalations as f64).exp2();
        assert_eq!(
            cert.witness_s,
            scan_witness(&MagnitudeSequence::Naturals, escalated, 1, 1000).unwrap()
        );
        assert!(cert.witness_s >= 3);
        assert!(cert.m_value.norm() > cert.threshold);
        assert!(cert.created_bound < 0.125);
        // independent grid check of |f - 1| on both translated discs
        let h = f.partial_sum().to_c64();
        let mut sup: f64 = 0.0;
        for z in disc_mesh(1.0, 101) {
            for sign in [1.0, -1.0] {
                let val = horner_c64(&h, z + cert.m_value * sign) - c(1.0, 0.0);
                sup = sup.max(val.norm());
            }
        }
        assert!(sup < 0.25, "{sup}");
        assert!(sup <= cert.created_bound);
    }

    #[test]
    fn two_windows_keep_the_first_certificate() {
        let dirs = DirectionSet::new(&[0.0, 0.25, 0.5]).unwrap();
        let schedule = [Window::new(1, 2, 1, 2).unwrap(), Window::new(1, 4, 2, 2).unwrap()];
        let f = build(&schedule, &MagnitudeSequence::Naturals, &library(), &dirs, &opts()).unwrap();
        assert_eq!(f.certificates.len(), 2);
        for cert in &f.certificates {
            assert!(cert.ledger_consistent());
            let (ok, measured) = verify_certificate(&f, cert, &dirs, &library(), 101).unwrap();
            assert!(ok, "{:?} measured {measured}", cert.window);
        }
        assert_eq!(f.certificates[0].deductions.len(), 1);
        assert!(f.certificates[0].deductions[0] < f.tail_caps[1]);
        audit_ledger(&f, &MagnitudeSequence::Naturals, &dirs).unwrap();
    }

    #[test]
    fn inflated_denominator_fails_verification() {
        let dirs = DirectionSet::new(&[0.0, 0.5]).unwrap();
        let w = Window::new(1, 4, 1, 2).unwrap();
        let (f, cert) =
            fix_window(&SeriesFunction::zero(PREC), w, &MagnitudeSequence::Naturals, &library(), &dirs, &opts()).unwrap();
        let (_, measured) = verify_certificate(&f, &cert, &dirs, &library(), 101).unwrap();
        let mut tampered = cert.clone();
        tampered.window.denom *= 100;
        assert!(measured >= tampered.window.tolerance(), "{measured}");
        let (ok, again) = verify_certificate(&f, &tampered, &dirs, &library(), 101).unwrap();
        assert!(!ok);
        assert_eq!(again, measured);
    }

    #[test]
    fn perturbed_coefficient_fails_verification() {
        let dirs = DirectionSet::new(&[0.0, 0.5]).unwrap();
        let w = Window::new(1, 4, 1, 2).unwrap();
        let (mut f, cert) =
            fix_window(&SeriesFunction::zero(PREC), w, &MagnitudeSequence::Naturals, &library(), &dirs, &opts()).unwrap();
        let mut coeffs = f.increments[0].to_c64();
        coeffs[0] += 1.0;
        f.increments[0] = Poly::from_c64(&coeffs, PREC);
        let (ok, measured) = verify_certificate(&f, &cert, &dirs, &library(), 101).unwrap();
        assert!(!ok);
        assert!(measured >= 0.75);
    }

    #[test]
    fn evaluation_is_the_sum_of_increments() {
        let mut f = SeriesFunction::zero(PREC);
        assert_eq!(evaluate_series(&f, c(2.0, 1.0)), c(0.0, 0.0));
        f.increments.push(Poly::from_c64(&[c(0.0, 0.0), c(1.0, 0.0)], PREC));
        let z = c(0.3, -1.7);
        assert_eq!(evaluate_series(&f, z), z);
        f.increments.push(Poly::from_c64(&[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)], PREC));
        let direct = z + c(2.0, 0.0) + c(0.0, 1.0) * z * z;
        assert!((evaluate_series(&f, z) - direct).norm() < 1e-14);
    }

    #[test]
    fn canonical_schedule_order() {
        let s = canonical_schedule(4, 3, 3).unwrap();
        assert_eq!(
            s,
            vec![
                Window { v: 1, denom: 1, k: 1, n: 2 },
                Window { v: 1, denom: 1, k: 1, n: 3 },
                Window { v: 1, denom: 1, k: 2, n: 2 },
                Window { v: 1, denom: 2, k: 1, n: 2 },
            ]
        );
        assert!(canonical_schedule(0, 0, 0).unwrap().is_empty());
        assert!(canonical_schedule(1, 0, 3).is_err());
        let long = canonical_schedule(50, 2, 3).unwrap();
        assert_eq!(long.len(), 50);
        let sums: Vec<usize> = long.iter().map(|w| w.v + w.denom + w.k + w.n).collect();
        assert!(sums.windows(2).all(|p| p[0] <= p[1]));
        assert!(long.iter().all(|w| w.k <= 2 && (2..=3).contains(&w.n)));
    }

    #[test]
    fn window_validation() {
        assert!(Window::new(0, 2, 1, 2).is_err());
        assert!(Window::new(1, 2, 1, 1).is_err());
        let dirs = DirectionSet::new(&[0.0, 0.5]).unwrap();
        let too_many = Window { v: 1, denom: 2, k: 1, n: 3 };
        assert!(fix_window(&SeriesFunction::zero(PREC), too_many, &MagnitudeSequence::Naturals, &library(), &dirs, &opts()).is_err());
        let bad_k = Window { v: 1, denom: 2, k: 9, n: 2 };
        assert!(matches!(
            fix_window(&SeriesFunction::zero(PREC), bad_k, &MagnitudeSequence::Naturals, &library(), &dirs, &opts()),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn builds_are_deterministic() {
        let dirs = DirectionSet::new(&[0.0, 0.25, 0.5]).unwrap();
        let schedule = [Window::new(1, 2, 1, 2).unwrap(), Window::new(1, 4, 2, 2).unwrap()];
        let a = build(&schedule, &MagnitudeSequence::Naturals, &library(), &dirs, &opts()).unwrap();
        let b = build(&schedule, &MagnitudeSequence::Naturals, &library(), &dirs, &opts()).unwrap();
        assert_eq!(a, b);
    }
}
