//! Polynomial approximation of a piecewise-polynomial target on disjoint
//! closed discs.
//!
//! The target is a [`Patchwork`]: one local polynomial per disc, written in
//! the disc's local coordinate `w = z - center`. A single global polynomial
//! is produced by Hermite (jet) interpolation: it matches the first `d_j`
//! Taylor coefficients of each local target at each center, assembled
//! Chinese-remainder style (Newton form over the node system). The error on
//! every disc is then certified a posteriori from the exact difference
//! polynomial, and orders are escalated until the certificate clears the
//! tolerance.

use crate::error::{Error, Result};
use crate::geometry::{first_overlap, frame_discs, Disc, TranslationFrame};
use crate::mp::Cx;
use crate::poly::{
    coefficient_bound_mp, modulus_series_mp, scaled_rounding_mp, shift_rounding_bound_mp, sup_bound_on_disc_mp, Poly,
    SAFETY_FACTOR,
};
use rug::float::Round;
use rug::ops::{AddAssignRound, MulAssignRound};
use rug::Float;

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub disc: Disc,
    /// Local target, in `w = z - disc.center`.
    pub target: Poly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Patchwork {
    pieces: Vec<Piece>,
}

impl Patchwork {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Domain("patchwork needs at least one piece".into()));
        }
        let discs: Vec<Disc> = pieces.iter().map(|p| p.disc).collect();
        if let Some((i, j)) = first_overlap(&discs) {
            return Err(Error::OverlappingDiscs(i, j));
        }
        Ok(Patchwork { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn prec(&self) -> u32 {
        self.pieces.iter().map(|p| p.target.prec()).max().unwrap_or(crate::mp::MIN_PREC)
    }

    /// Evaluates the piecewise target at a global point inside one of the discs.
    pub fn eval(&self, z: num_complex::Complex64) -> Option<num_complex::Complex64> {
        let piece = self
            .pieces
            .iter()
            .find(|p| (z - p.disc.center).norm() <= p.disc.radius)?;
        Some(piece.target.eval_c64(z - piece.disc.center))
    }
}

/// Piece 0 is `h` on the base disc (center 0, so local = global); piece `j`
/// holds `g` on the `j`-th translate, since `F(z) = g(z - c_j)` reads `g(w)`
/// in the local coordinate.
pub fn build_patchwork(h: &Poly, g: &Poly, frame: &TranslationFrame) -> Result<Patchwork> {
    let discs = frame_discs(frame);
    let mut pieces = Vec::with_capacity(discs.len());
    for (j, disc) in discs.into_iter().enumerate() {
        let target = if j == 0 { h.clone() } else { g.clone() };
        pieces.push(Piece { disc, target });
    }
    Patchwork::new(pieces)
}

/// Truncated power-series quotient `num / den` to `d` terms; `den[0] != 0`.
fn series_div(num: &[Cx], den: &[Cx], d: usize) -> Vec<Cx> {
    let inv0 = den[0].recip();
    let mut out: Vec<Cx> = Vec::with_capacity(d);
    for (k, nk) in num.iter().enumerate().take(d) {
        let mut acc = nk.clone();
        for (i, oi) in out.iter().enumerate() {
            if let Some(dk) = den.get(k - i) {
                acc = &acc - &(oi * dk);
            }
        }
        out.push(&acc * &inv0);
    }
    out
}

/// Unique polynomial of degree `< sum(orders)` whose first `orders[j]`
/// Taylor coefficients at each center equal those of the local targets.
pub fn hermite_crt(patch: &Patchwork, orders: &[usize]) -> Result<Poly> {
    if orders.len() != patch.len() {
        return Err(Error::Domain(format!(
            "{} orders given for {} pieces",
            orders.len(),
            patch.len()
        )));
    }
    if orders.contains(&0) {
        return Err(Error::Domain("interpolation orders must be positive".into()));
    }
    for j in 0..patch.len() {
        for i in 0..j {
            if patch.pieces[i].disc.center == patch.pieces[j].disc.center {
                return Err(Error::OverlappingDiscs(i, j));
            }
        }
    }
    let prec = patch.prec();
    let mut q = Poly::zero(prec);
    // modulus: prod over processed nodes of (z - c_i)^{d_i}
    let mut modulus = Poly::constant(num_complex::Complex64::new(1.0, 0.0), prec);
    for (j, (piece, &d)) in patch.pieces.iter().zip(orders).enumerate() {
        let c = Cx::from_c64(piece.disc.center, prec);
        let q_jet = q.taylor_jet(&c, d);
        let m_jet = modulus.taylor_jet(&c, d);
        if m_jet[0].is_zero() || !m_jet[0].is_finite() {
            return Err(Error::ConditioningFailure {
                piece: j,
                rounding: f64::INFINITY,
                tol: 0.0,
                bits_short: 0,
            });
        }
        let rhs: Vec<Cx> = (0..d).map(|k| &piece.target.coeff(k) - &q_jet[k]).collect();
        let correction = Poly::new(series_div(&rhs, &m_jet, d), prec);
        let correction = correction.shift_argument(&-&c);
        q = q.add(&modulus.mul(&correction));
        modulus = modulus.mul(&Poly::linear_power(&c, d, prec));
    }
    Ok(q)
}

/// Certified bound on one piece plus its rounding share.
fn piece_bound_mp(q: &Poly, piece: &Piece) -> (Float, Float) {
    let prec = q.prec();
    let c = Cx::from_c64(piece.disc.center, prec);
    let r = piece.disc.radius;
    let delta = q.shift_argument(&c).sub(&piece.target);
    let mut rounding = shift_rounding_bound_mp(q, &c, r);
    rounding.add_assign_round(scaled_rounding_mp(&coefficient_bound_mp(&piece.target, r), 2.0, prec), Round::Up);
    let mut total = rounding.clone();
    total.mul_assign_round(SAFETY_FACTOR, Round::Up);
    total.add_assign_round(coefficient_bound_mp(&delta, r), Round::Up);
    (total, rounding)
}

fn piece_bound(q: &Poly, piece: &Piece) -> (f64, f64) {
    let (total, rounding) = piece_bound_mp(q, piece);
    (total.to_f64_round(Round::Up), rounding.to_f64_round(Round::Up))
}

/// Natural logarithm of a nonnegative multiprecision value as binary64
/// (`-inf` for zero).
fn ln_of(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    Float::with_val(64, x.ln_ref()).to_f64()
}

/// Per-piece upper bounds for `sup_{|w| <= r_j} |q(c_j + w) - target_j(w)|`.
pub fn certified_error(q: &Poly, patch: &Patchwork) -> Vec<f64> {
    patch.pieces.iter().map(|p| piece_bound(q, p).0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxOptions {
    pub initial_order: usize,
    /// Cap on the total interpolation degree `sum(orders)`.
    pub order_cap: usize,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions {
            initial_order: 4,
            order_cap: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxResult {
    pub q: Poly,
    pub per_disc_bound: Vec<f64>,
    pub orders: Vec<usize>,
    pub initial_order: usize,
    /// Certified max bound after each escalation round.
    pub history: Vec<f64>,
}

impl ApproxResult {
    pub fn max_bound(&self) -> f64 {
        self.per_disc_bound.iter().copied().fold(0.0, f64::max)
    }
}

/// Escalating jet interpolation: start every piece at `initial_order`,
/// certify, and double the order of each piece whose bound is not yet below
/// `tol` until all are, or the total degree would pass `order_cap`.
pub fn approximate(patch: &Patchwork, tol: f64, opts: &ApproxOptions) -> Result<ApproxResult> {
    approximate_each(patch, &vec![tol; patch.len()], opts)
}

/// [`approximate`] with a separate tolerance for every piece.
pub fn approximate_each(patch: &Patchwork, tols: &[f64], opts: &ApproxOptions) -> Result<ApproxResult> {
    if tols.len() != patch.len() {
        return Err(Error::Domain(format!(
            "{} tolerances given for {} pieces",
            tols.len(),
            patch.len()
        )));
    }
    if let Some(t) = tols.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::Domain(format!("tolerance must be positive, got {t}")));
    }
    let mut orders = vec![opts.initial_order.max(1); patch.len()];
    let mut history = Vec::new();
    loop {
        if orders.iter().sum::<usize>() > opts.order_cap {
            return Err(Error::OrderCapExceeded {
                cap: opts.order_cap,
                max_bound: history.last().copied().unwrap_or(f64::INFINITY),
            });
        }
        let q = hermite_crt(patch, &orders)?;
        let bounds: Vec<(f64, f64)> = patch.pieces.iter().map(|p| piece_bound(&q, p)).collect();
        for (j, (&(_, rounding), &tol)) in bounds.iter().zip(tols).enumerate() {
            if rounding > tol / 4.0 {
                return Err(Error::ConditioningFailure {
                    piece: j,
                    rounding,
                    tol,
                    bits_short: ((4.0 * rounding / tol).log2().ceil()).max(1.0) as u32,
                });
            }
        }
        let per_disc_bound: Vec<f64> = bounds.iter().map(|b| b.0).collect();
        // progress is measured relative to each piece's own tolerance
        let worst = per_disc_bound
            .iter()
            .zip(tols)
            .map(|(b, t)| b / t)
            .fold(0.0, f64::max);
        history.push(per_disc_bound.iter().copied().fold(0.0, f64::max));
        if worst < 1.0 {
            return Ok(ApproxResult {
                q,
                per_disc_bound,
                orders,
                initial_order: opts.initial_order,
                history,
            });
        }
        for d in orders.iter_mut() {
            *d *= 2;
        }
    }
}

/// A priori orders from the contour-integral form of the Hermite remainder.
///
/// For `z` in disc `j` the interpolation error is a sum over pieces `i` of
/// `(1/2 pi i) oint_{Gamma_i} omega(z) f_i(t) / (omega(t) (t - z)) dt` with
/// `omega = prod (z - c_l)^{d_l}` and `Gamma_i` a circle of radius `rho_i`
/// around `c_i`. Bounding each term by its maximum over the contour gives, in
/// log scale, constraints that are linear in the orders; the smallest total
/// order meeting all of them is found by linear programming for a few contour
/// radii, and the best one is returned (rounded up).
pub fn plan_orders(patch: &Patchwork, tols: &[f64]) -> Option<Vec<usize>> {
    let ln_tols: Vec<f64> = tols.iter().map(|t| t.ln()).collect();
    plan_orders_ln(patch, &ln_tols)
}

/// [`plan_orders`] with tolerances given by their natural logarithms.
pub fn plan_orders_ln(patch: &Patchwork, ln_tols: &[f64]) -> Option<Vec<usize>> {
    if ln_tols.iter().any(|t| !t.is_finite()) {
        return None;
    }
    let pieces = &patch.pieces;
    let np = pieces.len();
    if np < 2 || ln_tols.len() != np {
        return None;
    }
    let dist = |a: usize, b: usize| (pieces[a].disc.center - pieces[b].disc.center).norm();
    // room[i]: distance from c_i to the nearest other disc
    let room: Vec<f64> = (0..np)
        .map(|i| {
            (0..np)
                .filter(|&l| l != i)
                .map(|l| dist(i, l) - pieces[l].disc.radius)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    const FRACTIONS: [f64; 6] = [0.1, 0.25, 0.4, 0.55, 0.7, 0.85];
    let mut best: Option<Vec<usize>> = None;
    for &sigma_base in &FRACTIONS {
        for &sigma_rest in &FRACTIONS {
            let rho: Vec<f64> = (0..np)
                .map(|i| {
                    let r = pieces[i].disc.radius;
                    let sigma = if i == 0 { sigma_base } else { sigma_rest };
                    r + sigma * (room[i] - r)
                })
                .collect();
            let disjoint = (0..np).all(|i| (0..i).all(|l| rho[i] + rho[l] < dist(i, l)));
            if !disjoint {
                continue;
            }
            if let Some(plan) = solve_plan(patch, ln_tols, &rho) {
                let total: usize = plan.iter().sum();
                if best.as_ref().is_none_or(|b| total < b.iter().sum::<usize>()) {
                    best = Some(plan);
                }
            }
        }
    }
    best
}

fn solve_plan(patch: &Patchwork, ln_tols: &[f64], rho: &[f64]) -> Option<Vec<usize>> {
    use minilp::{ComparisonOp, OptimizationDirection, Problem};
    let pieces = &patch.pieces;
    let np = pieces.len();
    // ln of the target sizes on the contours; -inf marks a zero target
    let ln_size: Vec<f64> = (0..np)
        .map(|i| ln_of(&modulus_series_mp(&pieces[i].target, rho[i])))
        .collect();
    if ln_size.iter().any(|m| m.is_nan() || *m == f64::INFINITY) {
        return None;
    }
    let dist = |a: usize, b: usize| (pieces[a].disc.center - pieces[b].disc.center).norm();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..np).map(|_| lp.add_var(1.0, (1.0, f64::INFINITY))).collect();
    let sources = ln_size.iter().filter(|m| m.is_finite()).count().max(1) as f64;
    for j in 0..np {
        let rj = pieces[j].disc.radius;
        for i in (0..np).filter(|&i| ln_size[i].is_finite()) {
            let gap = if i == j { rho[i] - rj } else { dist(i, j) - rho[i] - rj };
            if !(gap > 0.0) {
                return None;
            }
            let coeffs: Vec<_> = (0..np)
                .map(|l| {
                    let far = if l == j { rj } else { dist(j, l) + rj };
                    let near = if l == i { rho[i] } else { dist(i, l) - rho[i] };
                    (vars[l], far.ln() - near.ln())
                })
                .collect();
            let rhs = ln_tols[j] - sources.ln() - ln_size[i] - (rho[i] / gap).ln();
            lp.add_constraint(&coeffs[..], ComparisonOp::Le, rhs);
        }
    }
    let sol = lp.solve().ok()?;
    Some(vars.iter().map(|&v| sol[v].ceil().max(1.0) as usize).collect())
}

/// Jet interpolation with orders taken from [`plan_orders`]. The a priori
/// plan is conservative, so scaled-down versions of it are certified first
/// and the smallest passing one is kept. Without a plan the geometry is too
/// tight for convergence and `OrderCapExceeded` is returned at once.
pub fn approximate_planned(patch: &Patchwork, tols: &[f64], opts: &ApproxOptions) -> Result<ApproxResult> {
    if tols.len() != patch.len() {
        return Err(Error::Domain(format!(
            "{} tolerances given for {} pieces",
            tols.len(),
            patch.len()
        )));
    }
    if let Some(t) = tols.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::Domain(format!("tolerance must be positive, got {t}")));
    }
    let tols: Vec<Float> = tols.iter().map(|&t| Float::with_val(patch.prec(), t)).collect();
    approximate_planned_mp(patch, &tols, opts)
}

/// [`approximate_planned`] with multiprecision tolerances, which may lie
/// outside the binary64 range.
fn approximate_planned_mp(patch: &Patchwork, tols: &[Float], opts: &ApproxOptions) -> Result<ApproxResult> {
    let ln_tols: Vec<f64> = tols.iter().map(ln_of).collect();
    let Some(plan) = plan_orders_ln(patch, &ln_tols) else {
        // no contour system certifies convergence: the discs are too close
        return Err(Error::OrderCapExceeded {
            cap: opts.order_cap,
            max_bound: f64::INFINITY,
        });
    };
    certify_scaled(patch, tols, &plan, &[0.5, 0.7, 1.0, 1.4, 2.0], opts)
}

/// Interpolates with `plan` scaled by each factor in turn and returns the
/// first result whose certified bounds clear `tols`.
fn certify_scaled(
    patch: &Patchwork,
    tols: &[Float],
    plan: &[usize],
    factors: &[f64],
    opts: &ApproxOptions,
) -> Result<ApproxResult> {
    let scaled = |f: f64| -> Vec<usize> { plan.iter().map(|&d| ((d as f64) * f).ceil().max(1.0) as usize).collect() };
    let mut history = Vec::new();
    let mut last_bound = f64::INFINITY;
    for &f in factors {
        let orders = scaled(f);
        if orders.iter().sum::<usize>() > opts.order_cap {
            break;
        }
        let q = hermite_crt(patch, &orders)?;
        let bounds: Vec<(Float, Float)> = patch.pieces.iter().map(|p| piece_bound_mp(&q, p)).collect();
        for (j, ((_, rounding), tol)) in bounds.iter().zip(tols).enumerate() {
            if *rounding > Float::with_val(tol.prec(), tol / 4u32) {
                let short = (ln_of(rounding) - ln_of(tol)) / std::f64::consts::LN_2 + 2.0;
                return Err(Error::ConditioningFailure {
                    piece: j,
                    rounding: rounding.to_f64_round(Round::Up),
                    tol: tol.to_f64_round(Round::Down),
                    bits_short: short.ceil().max(1.0) as u32,
                });
            }
        }
        let per_disc_bound: Vec<f64> = bounds.iter().map(|b| b.0.to_f64_round(Round::Up)).collect();
        last_bound = per_disc_bound.iter().copied().fold(0.0, f64::max);
        history.push(last_bound);
        if bounds.iter().zip(tols).all(|((b, _), t)| b < t) {
            return Ok(ApproxResult {
                q,
                per_disc_bound,
                orders,
                initial_order: opts.initial_order,
                history,
            });
        }
    }
    Err(Error::OrderCapExceeded {
        cap: opts.order_cap,
        max_bound: last_bound,
    })
}

/// `ln(exp(a) + exp(b))`.
fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// Orders for the cutoff: 0 on `discs[0]` (centered at the origin), 1 on
/// the others, within `exp(ln_tols[j])` on disc `j`.
///
/// With order `L + 1` at the origin and `d` at every other center the
/// interpolant is `1 - W T_L`, where `W = prod (1 - z/c_l)^d` and `T_L` is
/// the degree-`L` Taylor section of `1/W`. The coefficients of `1/W` are
/// dominated by those of `(1 - z/mu)^{-S}`, `mu = min |c_l|`, `S = n d`,
/// which bounds the section's tail on the base disc and its size on the
/// others. The plan is the `(L, d)` of least total degree meeting every
/// bound, or `None` when no `d` up to `max_total` does.
pub fn plan_cutoff(discs: &[Disc], ln_tols: &[f64], max_total: usize) -> Option<Vec<usize>> {
    let n = discs.len().checked_sub(1).filter(|&n| n > 0)?;
    if discs[0].center != num_complex::Complex64::new(0.0, 0.0) || ln_tols.len() != discs.len() {
        return None;
    }
    if ln_tols.iter().any(|t| !t.is_finite()) {
        return None;
    }
    let far = &discs[1..];
    let r0 = discs[0].radius;
    let mu = far.iter().map(|d| d.center.norm()).fold(f64::INFINITY, f64::min);
    if !(mu > r0) {
        return None;
    }
    // ln max over disc j of |1 - z/c_l|, per unit of d
    let w_far: Vec<f64> = far
        .iter()
        .map(|dj| {
            far.iter()
                .map(|dl| {
                    if dl.center == dj.center {
                        (dj.radius / dl.center.norm()).ln()
                    } else {
                        ((dj.center - dl.center).norm() + dj.radius).ln() - dl.center.norm().ln()
                    }
                })
                .sum()
        })
        .collect();
    if w_far.iter().any(|w| !(*w < 0.0)) {
        return None;
    }
    let w_base: f64 = far.iter().map(|dl| (r0 / dl.center.norm()).ln_1p()).sum();
    let reach: Vec<f64> = far.iter().map(|d| (d.center.norm() + d.radius).ln()).collect();
    let mut best: Option<(usize, usize, usize)> = None;
    // far excess at the smallest base-feasible L; stop once it no longer improves
    let mut best_excess = f64::INFINITY;
    let mut stale = 0;
    for d in 1..=max_total / n {
        let total_far = n * d;
        if best.is_some_and(|(t, _, _)| total_far + 1 >= t) {
            break;
        }
        let s = total_far as f64;
        // ln a_k for the majorant (1 - z/mu)^{-S}; term ratios at r0,
        // (S + k)/(k + 1) r0/mu, decrease in k, so past the point where they
        // drop below one the tail after L is at most term_{L+1} / (1 - ratio)
        let step = |k: usize| ((s + k as f64) / (k as f64 + 1.0)).ln() - mu.ln();
        let ratio = |k: usize| (s + k as f64) / (k as f64 + 1.0) * r0 / mu;
        let mut limit = max_total.saturating_sub(total_far + 1);
        if let Some((t, _, _)) = best {
            limit = limit.min(t.saturating_sub(total_far + 2));
        }
        let mut ln_a = 0.0;
        let mut heads: Vec<f64> = vec![0.0; n];
        let mut found = None;
        for l in 0..=limit {
            // ln_a = ln a_l; heads[j] = ln sum_{k<=l} a_k reach_j^k
            let next = ln_a + step(l);
            let q = ratio(l + 1);
            if q < 1.0 {
                let tail = next + (l + 1) as f64 * r0.ln() - (-q).ln_1p();
                if w_base * d as f64 + tail <= ln_tols[0] {
                    found = Some(l);
                    break;
                }
            }
            ln_a = next;
            for j in 0..n {
                heads[j] = ln_add(heads[j], ln_a + (l + 1) as f64 * reach[j]);
            }
        }
        // a larger d only raises both terms of the base bound
        let Some(l) = found else {
            break;
        };
        let excess = (0..n)
            .map(|j| w_far[j] * d as f64 + heads[j] - ln_tols[j + 1])
            .fold(f64::NEG_INFINITY, f64::max);
        if excess < best_excess {
            best_excess = excess;
            stale = 0;
        } else {
            stale += 1;
            if stale > STALE_LIMIT {
                break;
            }
        }
        if excess <= 0.0 {
            let total = l + 1 + total_far;
            if best.is_none_or(|(t, _, _)| total < t) {
                best = Some((total, l, d));
            }
        }
    }
    best.map(|(_, l, d)| plan_vec(l, d, n))
}

/// `ln` of a majorant for `sum |phi_k| rho^k`, `phi = 1 - W T_L` as in
/// [`plan_cutoff`] with orders `(L + 1, d, ..., d)`.
fn cutoff_modulus_ln(discs: &[Disc], l: usize, d: usize, rho: f64) -> f64 {
    let far = &discs[1..];
    let s = (far.len() * d) as f64;
    let mu = far.iter().map(|c| c.center.norm()).fold(f64::INFINITY, f64::min);
    let w: f64 = far.iter().map(|c| (rho / c.center.norm()).ln_1p()).sum::<f64>() * d as f64;
    let mut ln_a = 0.0;
    let mut head = 0.0;
    for k in 0..l {
        ln_a += ((s + k as f64) / (k as f64 + 1.0)).ln() - mu.ln();
        head = ln_add(head, ln_a + (k + 1) as f64 * rho.ln());
    }
    ln_add(0.0, w + head)
}

/// Fails early with the estimated shortfall when the working precision
/// cannot resolve the cutoff to its tolerances on the translated discs:
/// rounding there scales with the cutoff's coefficient sums at the disc's
/// reach, and the tolerances already carry the size of `h`.
fn check_cutoff_precision(h: &Poly, discs: &[Disc], plan: &[usize], tols: &[Float], prec: u32) -> Result<()> {
    let l = plan[0].saturating_sub(1);
    let d = plan[1..].iter().copied().max().unwrap_or(0);
    let gamma = (8.0 * (h.len() + plan.iter().sum::<usize>() + 2) as f64).log2();
    for (j, disc) in discs.iter().enumerate().skip(1) {
        let rho = (disc.center.norm() + disc.radius) * (1.0 + f64::EPSILON);
        let ln_needed = cutoff_modulus_ln(discs, l, d, rho) - ln_of(&tols[j]);
        let bits = ln_needed / std::f64::consts::LN_2 + gamma + PRECISION_MARGIN;
        if bits > prec as f64 {
            return Err(Error::ConditioningFailure {
                piece: j,
                rounding: f64::INFINITY,
                tol: tols[j].to_f64_round(Round::Down),
                bits_short: (bits - prec as f64).ceil() as u32,
            });
        }
    }
    Ok(())
}

/// Guard bits kept above the a priori rounding estimate.
const PRECISION_MARGIN: f64 = 64.0;

/// Consecutive cutoff orders without progress on the far bound before the
/// search gives up.
const STALE_LIMIT: usize = 32;

fn plan_vec(l: usize, d: usize, n: usize) -> Vec<usize> {
    let mut v = vec![l + 1];
    v.extend(std::iter::repeat_n(d, n));
    v
}

/// Result of [`approximate_blend`].
#[derive(Debug, Clone, PartialEq)]
pub struct BlendResult {
    /// `h (1 - phi) + gq`, global coordinate.
    pub q: Poly,
    /// Certified bounds of `q` against the patchwork `(h, g, ..., g)`.
    pub per_disc_bound: Vec<f64>,
    /// Orders of the cutoff `phi` (empty when `h = 0`).
    pub cutoff_orders: Vec<usize>,
    /// Orders of the target part `gq`.
    pub target_orders: Vec<usize>,
}

fn blend_pieces(discs: &[Disc], base: &Poly, far: &Poly) -> Result<Patchwork> {
    Patchwork::new(
        discs
            .iter()
            .enumerate()
            .map(|(j, &disc)| Piece {
                disc,
                target: if j == 0 { base.clone() } else { far.clone() },
            })
            .collect(),
    )
}

/// Sizes of `h` on each frame disc: exact recentered bounds when `exact`,
/// otherwise the cheaper `sum |h_k| (|c| + r)^k`.
fn sizes_on(h: &Poly, discs: &[Disc], exact: bool) -> Vec<Float> {
    discs
        .iter()
        .map(|d| {
            if exact || d.center == num_complex::Complex64::new(0.0, 0.0) {
                sup_bound_on_disc_mp(h, d)
            } else {
                modulus_series_mp(h, (d.center.norm() + d.radius) * (1.0 + f64::EPSILON))
            }
        })
        .collect()
}

/// Tolerances `t * share / size` for the cutoff, rounded downward.
fn cutoff_tolerances(tols: &[f64], h_size: &[Float], share: f64) -> Vec<Float> {
    tols.iter()
        .zip(h_size)
        .map(|(&t, s)| {
            let num = Float::with_val_round(s.prec(), t * share, Round::Down).0;
            if s.is_zero() {
                num
            } else {
                Float::with_val_round(s.prec(), &num / s, Round::Down).0
            }
        })
        .collect()
}

/// Orders for the cutoff patchwork with the scale factors to try: the
/// contour plan, or the closed-form plan of [`plan_cutoff`] when no contour
/// plan exists.
fn cutoff_plan(phi: &Patchwork, discs: &[Disc], ln_tols: &[f64], cap: usize) -> Option<(Vec<usize>, &'static [f64])> {
    if let Some(plan) = plan_orders_ln(phi, ln_tols) {
        return Some((plan, &[1.0, 1.4, 2.0]));
    }
    plan_cutoff(discs, ln_tols, cap).map(|p| (p, &[1.0, 1.25, 1.6][..]))
}

/// Largest cutoff degree considered when predicting.
const CUTOFF_SEARCH: usize = 1 << 16;

/// Predicted degree of [`approximate_blend`] on this frame, from the a priori
/// order plans alone (no interpolation is performed). `None` when either
/// plan is infeasible.
pub fn plan_blend(h: &Poly, g: &Poly, frame: &TranslationFrame, tol_base: f64, tol_far: f64) -> Option<usize> {
    let discs = frame_discs(frame);
    let prec = h.prec().max(g.prec());
    let tols: Vec<f64> = (0..discs.len())
        .map(|j| if j == 0 { tol_base } else { tol_far })
        .collect();
    let zero = Poly::zero(prec);
    let mut degree = 0;
    if !h.is_zero() {
        let h_size = sizes_on(h, &discs, false);
        let ln_tols: Vec<f64> = cutoff_tolerances(&tols, &h_size, 0.5).iter().map(ln_of).collect();
        let one = Poly::constant(num_complex::Complex64::new(1.0, 0.0), prec);
        let phi = blend_pieces(&discs, &zero, &one).ok()?;
        degree += h.len() + cutoff_plan(&phi, &discs, &ln_tols, CUTOFF_SEARCH)?.0.iter().sum::<usize>();
    }
    let gp = blend_pieces(&discs, &zero, g).ok()?;
    let g_tols: Vec<f64> = tols.iter().map(|t| t * 0.5).collect();
    Some(degree.max(plan_orders(&gp, &g_tols)?.iter().sum()))
}

/// Approximates the patchwork `h` on the base disc, `g` on every translate,
/// as `h (1 - phi) + gq` where `phi ~ 0` on the base and `~ 1` on the
/// translates, and `gq ~ 0` on the base and `~ g` on the translates.
///
/// A direct jet interpolant of the patchwork has to reproduce the large
/// values of `h` on the translates through its own high-order jets, which
/// inflates its size on the base disc and forces the degree to grow by a
/// factor with every step. Multiplying `h` by a cutoff needs only the order
/// that makes `1 - phi` smaller than `1/|h|` on the translates, so the degree
/// of the result exceeds that of `h` by an additive amount.
///
/// The returned bounds are certified directly on `q`.
pub fn approximate_blend(
    h: &Poly,
    g: &Poly,
    frame: &TranslationFrame,
    tol_base: f64,
    tol_far: f64,
    opts: &ApproxOptions,
) -> Result<BlendResult> {
    if !(tol_base > 0.0 && tol_far > 0.0) {
        return Err(Error::Domain(format!(
            "tolerances must be positive, got {tol_base} and {tol_far}"
        )));
    }
    let patch = build_patchwork(h, g, frame)?;
    let prec = patch.prec();
    let discs = frame_discs(frame);
    let tols: Vec<f64> = (0..discs.len())
        .map(|j| if j == 0 { tol_base } else { tol_far })
        .collect();
    let zero = Poly::zero(prec);
    let one = Poly::constant(num_complex::Complex64::new(1.0, 0.0), prec);
    let h_size = sizes_on(h, &discs, true);
    // each part gets half the tolerance, shrunk further if the composed
    // certificate comes out looser than the parts
    let mut share = 0.5;
    let mut last = None;
    for _ in 0..4 {
        let (cutoff, cutoff_orders) = if h.is_zero() {
            (zero.clone(), Vec::new())
        } else {
            let phi = blend_pieces(&discs, &zero, &one)?;
            let phi_tols = cutoff_tolerances(&tols, &h_size, share);
            let ln_tols: Vec<f64> = phi_tols.iter().map(ln_of).collect();
            let (plan, factors) = cutoff_plan(&phi, &discs, &ln_tols, opts.order_cap).ok_or(Error::OrderCapExceeded {
                cap: opts.order_cap,
                max_bound: f64::INFINITY,
            })?;
            let first: Vec<usize> = plan.iter().map(|&d| (d as f64 * factors[0]).ceil() as usize).collect();
            check_cutoff_precision(h, &discs, &first, &phi_tols, prec)?;
            let r = certify_scaled(&phi, &phi_tols, &plan, factors, opts)?;
            (h.mul(&r.q), r.orders)
        };
        let g_tols: Vec<f64> = tols.iter().map(|t| t * share).collect();
        let gq = approximate_planned(&blend_pieces(&discs, &zero, g)?, &g_tols, opts)?;
        let q = h.sub(&cutoff).add(&gq.q);
        let per_disc_bound = certified_error(&q, &patch);
        let ok = per_disc_bound.iter().zip(&tols).all(|(b, t)| b < t);
        let result = BlendResult {
            q,
            per_disc_bound,
            cutoff_orders,
            target_orders: gq.orders,
        };
        if ok {
            return Ok(result);
        }
        share *= 0.25;
        last = Some(result);
    }
    let max_bound = last
        .map(|r| r.per_disc_bound.iter().copied().fold(0.0, f64::max))
        .unwrap_or(f64::INFINITY);
    Err(Error::OrderCapExceeded {
        cap: opts.order_cap,
        max_bound,
    })
}
