//! Directions, discs and the separation arithmetic that keeps the base disc
//! and its translates pairwise disjoint.
//!
//! All geometry is binary64. Translation centers are formed here as
//! `m * unit(theta)` in `f64` and that rounded value is the translation used
//! everywhere downstream (construction, certification, verification), so the
//! multiple-precision layers only ever see exactly-promoted centers.

use std::f64::consts::PI;

use num_complex::Complex64;
use crate::error::{Error, Result};

/// `e^{2 pi i theta}` for `theta` in `[0, 1)`.
///
/// Multiples of a quarter turn are returned exactly.
pub fn unit_direction(theta: f64) -> Result<Complex64> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::Domain(format!("theta {theta} outside [0, 1)")));
    }
    let quarters = theta * 4.0;
    if quarters.fract() == 0.0 {
        return Ok(match quarters as u8 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        });
    }
    let (s, c) = (2.0 * PI * theta).sin_cos();
    Ok(Complex64::new(c, s))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    theta: f64,
    unit: Complex64,
}

impl Direction {
    pub fn new(theta: f64) -> Result<Self> {
        Ok(Direction {
            theta,
            unit: unit_direction(theta)?,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn unit(&self) -> Complex64 {
        self.unit
    }
}

/// Ordered, pairwise-distinct directions. Index `j` (0-based) is the
/// `(j+1)`-th direction of every prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    dirs: Vec<Direction>,
}

impl DirectionSet {
    pub fn new(thetas: &[f64]) -> Result<Self> {
        let dirs = thetas
            .iter()
            .map(|&t| Direction::new(t))
            .collect::<Result<Vec<_>>>()?;
        for (i, a) in thetas.iter().enumerate() {
            if thetas[..i].contains(a) {
                return Err(Error::Domain(format!("duplicate direction theta {a}")));
            }
        }
        Ok(DirectionSet { dirs })
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn get(&self, j: usize) -> Option<&Direction> {
        self.dirs.get(j)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Direction> {
        self.dirs.iter()
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.dirs.iter().map(Direction::theta).collect()
    }

    /// The first `n` directions.
    pub fn prefix(&self, n: usize) -> Result<DirectionSet> {
        if n > self.dirs.len() {
            return Err(Error::IndexOutOfRange {
                index: n,
                len: self.dirs.len(),
            });
        }
        Ok(DirectionSet {
            dirs: self.dirs[..n].to_vec(),
        })
    }
}

/// Smallest `|e^{2 pi i (a - b)} - 1| = 2 |sin(pi (a - b))|` over unordered pairs.
pub fn min_pair_gap(dirs: &DirectionSet) -> Result<f64> {
    pair_gap_with(dirs, |a, b| 2.0 * (PI * (a.theta - b.theta)).sin().abs())
}

/// Same minimum through direct complex subtraction of the unit vectors.
pub fn min_pair_gap_by_subtraction(dirs: &DirectionSet) -> Result<f64> {
    pair_gap_with(dirs, |a, b| (a.unit - b.unit).norm())
}

fn pair_gap_with(dirs: &DirectionSet, gap: impl Fn(&Direction, &Direction) -> f64) -> Result<f64> {
    if dirs.len() < 2 {
        return Err(Error::Domain(
            "pair gap needs at least two directions".to_string(),
        ));
    }
    let mut best = f64::INFINITY;
    for (i, a) in dirs.dirs.iter().enumerate() {
        for b in &dirs.dirs[..i] {
            if a.theta == b.theta {
                return Err(Error::Domain(format!("duplicate direction theta {}", a.theta)));
            }
            best = best.min(gap(a, b));
        }
    }
    Ok(best)
}

/// `max(2 v1, 2 v1 / m0)`: any translation magnitude strictly above it keeps
/// the base disc and every translate pairwise disjoint.
pub fn separation_threshold(v1: f64, m0: f64) -> Result<f64> {
    if !(v1 > 0.0 && m0 > 0.0) {
        return Err(Error::Domain(format!(
            "separation threshold needs positive inputs, got v1={v1}, M0={m0}"
        )));
    }
    Ok((2.0 * v1).max(2.0 * v1 / m0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: Complex64,
    pub radius: f64,
}

impl Disc {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("disc radius must be positive, got {radius}")));
        }
        Ok(Disc { center, radius })
    }

    pub fn contains_disc(&self, other: &Disc) -> bool {
        (other.center - self.center).norm() + other.radius <= self.radius
    }
}

/// Closed discs, so tangency counts as intersecting.
pub fn discs_pairwise_disjoint(discs: &[Disc]) -> bool {
    first_overlap(discs).is_none()
}

/// First intersecting pair `(i, j)` with `i < j`, if any.
pub fn first_overlap(discs: &[Disc]) -> Option<(usize, usize)> {
    for j in 0..discs.len() {
        for i in 0..j {
            let d = (discs[i].center - discs[j].center).norm();
            if d <= discs[i].radius + discs[j].radius {
                return Some((i, j));
            }
        }
    }
    None
}

/// Base disc `D(0, v1)` together with its translates by `m * unit(theta_j)`.
///
/// The translates default to radius `v1` as well; the builder shrinks them to
/// the window radius through [`TranslationFrame::with_probe_radius`], which can
/// only increase separation.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationFrame {
    pub v1: f64,
    pub m: Complex64,
    pub dirs: DirectionSet,
    probe_radius: f64,
}

impl TranslationFrame {
    pub fn new(v1: f64, m: Complex64, dirs: DirectionSet) -> Result<Self> {
        if !(v1 > 0.0) {
            return Err(Error::Domain(format!("frame radius must be positive, got {v1}")));
        }
        Ok(TranslationFrame {
            v1,
            m,
            dirs,
            probe_radius: v1,
        })
    }

    pub fn with_probe_radius(mut self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r <= self.v1) {
            return Err(Error::Domain(format!(
                "probe radius {r} must lie in (0, v1 = {}]",
                self.v1
            )));
        }
        self.probe_radius = r;
        Ok(self)
    }

    pub fn probe_radius(&self) -> f64 {
        self.probe_radius
    }

    /// Center of translate `j` (0-based direction index).
    pub fn center(&self, j: usize) -> Complex64 {
        self.m * self.dirs.dirs[j].unit
    }
}

/// `[D(0, v1), D(m u_1, r), ..., D(m u_n, r)]` in direction order.
pub fn frame_discs(frame: &TranslationFrame) -> Vec<Disc> {
    let mut out = Vec::with_capacity(frame.dirs.len() + 1);
    out.push(Disc {
        center: Complex64::new(0.0, 0.0),
        radius: frame.v1,
    });
    for j in 0..frame.dirs.len() {
        out.push(Disc {
            center: frame.center(j),
            radius: frame.probe_radius,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_direction_quarter_turns() {
        assert_eq!(unit_direction(0.0).unwrap(), c(1.0, 0.0));
        assert_eq!(unit_direction(0.25).unwrap(), c(0.0, 1.0));
        assert_eq!(unit_direction(0.5).unwrap(), c(-1.0, 0.0));
        let u = unit_direction(0.1).unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unit_direction_rejects_out_of_range() {
        assert!(unit_direction(1.0).is_err());
        assert!(unit_direction(-0.1).is_err());
        assert!(unit_direction(f64::NAN).is_err());
    }

    #[test]
    fn pair_gaps() {
        let anti = DirectionSet::new(&[0.0, 0.5]).unwrap();
        assert_eq!(min_pair_gap(&anti).unwrap(), 2.0);
        let quarter = DirectionSet::new(&[0.0, 0.25]).unwrap();
        assert!((min_pair_gap(&quarter).unwrap() - std::f64::consts::SQRT_2).abs() < 1e-12);
        let thirds = DirectionSet::new(&[0.0, 1.0 / 3.0, 2.0 / 3.0]).unwrap();
        assert!((min_pair_gap(&thirds).unwrap() - 1.7320508075688772).abs() < 1e-12);
    }

    #[test]
    fn pair_gap_errors() {
        let one = DirectionSet::new(&[0.3]).unwrap();
        assert!(min_pair_gap(&one).is_err());
        assert!(DirectionSet::new(&[0.3, 0.3]).is_err());
    }

    #[test]
    fn thresholds() {
        assert_eq!(separation_threshold(3.0, 2.0).unwrap(), 6.0);
        assert_eq!(separation_threshold(3.0, 2f64.sqrt()).unwrap(), 6.0);
        assert_eq!(separation_threshold(1.0, 0.5).unwrap(), 4.0);
        assert!(separation_threshold(0.0, 1.0).is_err());
        assert!(separation_threshold(1.0, -1.0).is_err());
    }

    #[test]
    fn frame_disc_layout() {
        let f = TranslationFrame::new(1.0, c(10.0, 0.0), DirectionSet::new(&[0.0]).unwrap()).unwrap();
        let d = frame_discs(&f);
        assert_eq!(d, vec![Disc { center: c(0.0, 0.0), radius: 1.0 }, Disc { center: c(10.0, 0.0), radius: 1.0 }]);

        let f = TranslationFrame::new(3.0, c(7.0, 0.0), DirectionSet::new(&[0.0, 0.25]).unwrap()).unwrap();
        let d = frame_discs(&f);
        assert_eq!(d[1].center, c(7.0, 0.0));
        assert_eq!(d[2].center, c(0.0, 7.0));
        assert!(d.iter().all(|x| x.radius == 3.0));
        assert!(discs_pairwise_disjoint(&d));

        let f = TranslationFrame::new(1.0, c(0.0, 0.0), DirectionSet::new(&[0.0]).unwrap()).unwrap();
        assert!(!discs_pairwise_disjoint(&frame_discs(&f)));
    }

    #[test]
    fn disjointness_predicate() {
        let tangent = [Disc::new(c(0.0, 0.0), 3.0).unwrap(), Disc::new(c(6.0, 0.0), 3.0).unwrap()];
        assert!(!discs_pairwise_disjoint(&tangent));
        assert!(discs_pairwise_disjoint(&[Disc::new(c(0.0, 0.0), 1.0).unwrap()]));
        assert!(discs_pairwise_disjoint(&[]));
    }

    #[test]
    fn antipodal_tangency_at_threshold() {
        let dirs = DirectionSet::new(&[0.0, 0.5]).unwrap();
        let v1 = 2.5;
        let t = separation_threshold(v1, min_pair_gap(&dirs).unwrap()).unwrap();
        assert_eq!(t, 2.0 * v1);
        let f = TranslationFrame::new(v1, c(t, 0.0), dirs).unwrap();
        assert!(!discs_pairwise_disjoint(&frame_discs(&f)));
    }

    #[test]
    fn probe_radius_bounds() {
        let f = TranslationFrame::new(2.0, c(9.0, 0.0), DirectionSet::new(&[0.0]).unwrap()).unwrap();
        assert!(f.clone().with_probe_radius(3.0).is_err());
        let g = f.with_probe_radius(1.0).unwrap();
        assert_eq!(frame_discs(&g)[1].radius, 1.0);
        assert_eq!(frame_discs(&g)[0].radius, 2.0);
    }
}
