//! Complex polynomials with multiple-precision coefficients, Taylor
//! re-centering and certified sup-norm bounds on discs.

use num_complex::Complex64;
use rug::float::Round;
use rug::ops::{AddAssignRound, MulAssignRound};
use rug::Float;

use crate::geometry::Disc;
use crate::mp::{add_mul, Cx, Multiplier};

/// Relative inflation applied to every certified upper bound.
pub const SAFETY_FACTOR: f64 = 1.0 + 1e-9;

/// Dense polynomial `c_0 + c_1 z + ... + c_d z^d`, trailing exact zeros trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    coeffs: Vec<Cx>,
    prec: u32,
}

impl Poly {
    pub fn zero(prec: u32) -> Self {
        Poly {
            coeffs: Vec::new(),
            prec,
        }
    }

    pub fn new(coeffs: Vec<Cx>, prec: u32) -> Self {
        let mut p = Poly { coeffs, prec };
        p.trim();
        p
    }

    pub fn from_c64(coeffs: &[Complex64], prec: u32) -> Self {
        Self::new(coeffs.iter().map(|&c| Cx::from_c64(c, prec)).collect(), prec)
    }

    pub fn constant(c: Complex64, prec: u32) -> Self {
        Self::from_c64(&[c], prec)
    }

    /// `z^k`.
    pub fn monomial(k: usize, prec: u32) -> Self {
        let mut coeffs = vec![Cx::zero(prec); k + 1];
        coeffs[k] = Cx::one(prec);
        Poly { coeffs, prec }
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Cx::is_zero) {
            self.coeffs.pop();
        }
    }

    /// The same polynomial carried at working precision `prec`; exact when
    /// `prec` is not below the current one.
    pub fn with_prec(&self, prec: u32) -> Poly {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| Cx {
                re: Float::with_val(prec, &c.re),
                im: Float::with_val(prec, &c.im),
            })
            .collect();
        Poly::new(coeffs, prec)
    }

    pub fn coeffs(&self) -> &[Cx] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Cx> {
        self.coeffs
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Number of stored coefficients (degree + 1, or 0).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: usize) -> Cx {
        self.coeffs.get(k).cloned().unwrap_or_else(|| Cx::zero(self.prec))
    }

    pub fn to_c64(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(Cx::to_c64).collect()
    }

    /// Horner evaluation.
    pub fn eval(&self, z: &Cx) -> Cx {
        let mut acc = Cx::zero(self.prec);
        let mut m = Multiplier::new(z);
        for c in self.coeffs.iter().rev() {
            m.horner_step(&mut acc, c);
        }
        acc
    }

    pub fn eval_c64(&self, z: Complex64) -> Complex64 {
        self.eval(&Cx::from_c64(z, self.prec)).to_c64()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let prec = self.prec.max(other.prec);
        let n = self.len().max(other.len());
        let coeffs = (0..n)
            .map(|k| match (self.coeffs.get(k), other.coeffs.get(k)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Poly::new(coeffs, prec)
    }

    pub fn neg(&self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, a: &Cx) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * a).collect(), self.prec.max(a.prec()))
    }

    /// Schoolbook product.
    pub fn mul(&self, other: &Poly) -> Poly {
        let prec = self.prec.max(other.prec);
        if self.is_zero() || other.is_zero() {
            return Poly::zero(prec);
        }
        let mut out = vec![Cx::zero(prec); self.len() + other.len() - 1];
        let mut scratch = (Float::new(prec), Float::new(prec));
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                add_mul(&mut out[i + j], a, b, &mut scratch);
            }
        }
        Poly::new(out, prec)
    }

    /// `(z - a)^d`, expanded.
    pub fn linear_power(a: &Cx, d: usize, prec: u32) -> Poly {
        Poly::monomial(d, prec).shift_argument(&-a)
    }

    /// `q(z) = p(z + a)`, by the in-place Taylor shift (repeated synthetic
    /// division by `z - a`).
    pub fn shift_argument(&self, a: &Cx) -> Poly {
        let mut c = self.coeffs.clone();
        let n = c.len();
        if a.is_zero() || n < 2 {
            return Poly::new(c, self.prec);
        }
        let mut m = Multiplier::new(a);
        for k in 0..n - 1 {
            for j in (k..n - 1).rev() {
                let (lo, hi) = c.split_at_mut(j + 1);
                m.add_product(&mut lo[j], &hi[0]);
            }
        }
        Poly::new(c, self.prec)
    }

    /// First `d` Taylor coefficients at `c` (zero padded), `O(d * deg)`.
    pub fn taylor_jet(&self, c: &Cx, d: usize) -> Vec<Cx> {
        let (jet, _) = self.taylor_split(c, d);
        jet
    }

    /// Splits `p(z) = sum_{k<d} jet_k (z - c)^k + (z - c)^d quotient(z)`.
    pub fn taylor_split(&self, c: &Cx, d: usize) -> (Vec<Cx>, Poly) {
        let mut rem = self.coeffs.clone();
        let mut jet = Vec::with_capacity(d);
        let mut m = Multiplier::new(c);
        for _ in 0..d {
            if rem.is_empty() {
                jet.push(Cx::zero(self.prec));
                continue;
            }
            // synthetic division of rem by (z - c)
            let n = rem.len();
            let mut acc = Cx::zero(self.prec);
            let mut quot = vec![Cx::zero(self.prec); n - 1];
            for i in (0..n).rev() {
                m.horner_step(&mut acc, &rem[i]);
                if i > 0 {
                    quot[i - 1] = acc.clone();
                }
            }
            jet.push(acc);
            rem = quot;
        }
        (jet, Poly::new(rem, self.prec))
    }
}

/// `sum |p_k| reach^k` with every operation rounded upward; stays finite
/// where the binary64 range would overflow.
pub fn modulus_series_mp(p: &Poly, reach: f64) -> Float {
    let prec = p.prec();
    let reach = Float::with_val(prec, reach);
    let mut rk = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 0);
    for c in p.coeffs() {
        let term = Float::with_val_round(prec, &c.abs_up() * &rk, Round::Up).0;
        sum.add_assign_round(term, Round::Up);
        rk.mul_assign_round(&reach, Round::Up);
    }
    sum
}

/// `sum |p_k| reach^k`, rounded upward to binary64 (possibly infinite).
pub fn modulus_series(p: &Poly, reach: f64) -> f64 {
    modulus_series_mp(p, reach).to_f64_round(Round::Up)
}

/// Multiprecision [`coefficient_bound`], rounded upward.
pub fn coefficient_bound_mp(local: &Poly, r: f64) -> Float {
    let mut out = modulus_series_mp(local, r);
    out.mul_assign_round(SAFETY_FACTOR, Round::Up);
    out
}

/// Coefficient-sum bound `sum |b_k| r^k` for a polynomial already expressed
/// in the local coordinate of a disc of radius `r` centered at the origin,
/// inflated by [`SAFETY_FACTOR`].
pub fn coefficient_bound(local: &Poly, r: f64) -> f64 {
    coefficient_bound_mp(local, r).to_f64_round(Round::Up)
}

/// Relative rounding unit `2^(1 - prec)` scaled by `factor`, times `x`,
/// rounded upward to binary64.
pub fn scaled_rounding(x: &Float, factor: f64, prec: u32) -> f64 {
    scaled_rounding_mp(x, factor, prec).to_f64_round(Round::Up)
}

/// Multiprecision [`scaled_rounding`], rounded upward.
pub fn scaled_rounding_mp(x: &Float, factor: f64, prec: u32) -> Float {
    let unit = Float::with_val(prec, Float::i_exp(1, 1 - prec as i32));
    let mut out = Float::with_val_round(prec, x * &unit, Round::Up).0;
    out.mul_assign_round(factor, Round::Up);
    out
}

/// Bound on the rounding error of [`Poly::shift_argument`] by `a`, measured
/// by its effect on the coefficient sum at radius `r`: `gamma * sum |p_k| (|a| + r)^k`.
pub fn shift_rounding_bound(p: &Poly, a: &Cx, r: f64) -> f64 {
    shift_rounding_bound_mp(p, a, r).to_f64_round(Round::Up)
}

/// Multiprecision [`shift_rounding_bound`], rounded upward.
pub fn shift_rounding_bound_mp(p: &Poly, a: &Cx, r: f64) -> Float {
    if p.len() < 2 || a.is_zero() {
        return Float::with_val(p.prec(), 0);
    }
    let reach = (a.abs_f64_up() + r) * (1.0 + f64::EPSILON);
    // Each coefficient passes through at most deg complex fused steps; a
    // complex multiply-add at precision prec has relative error <= 4 * 2^-prec.
    let gamma = 8.0 * (p.len() as f64 + 2.0);
    scaled_rounding_mp(&modulus_series_mp(p, reach), gamma, p.prec())
}

/// Rigorous upper bound for `sup_{z in d} |p(z)|`: re-center at `d.center`,
/// sum coefficient moduli against powers of the radius, add the re-centering
/// rounding bound, inflate.
pub fn sup_bound_on_disc(p: &Poly, d: &Disc) -> f64 {
    sup_bound_on_disc_mp(p, d).to_f64_round(Round::Up)
}

/// Multiprecision [`sup_bound_on_disc`], rounded upward.
pub fn sup_bound_on_disc_mp(p: &Poly, d: &Disc) -> Float {
    let c = Cx::from_c64(d.center, p.prec());
    let local = p.shift_argument(&c);
    let mut rounding = shift_rounding_bound_mp(p, &c, d.radius);
    rounding.mul_assign_round(SAFETY_FACTOR, Round::Up);
    let mut out = coefficient_bound_mp(&local, d.radius);
    out.add_assign_round(&rounding, Round::Up);
    out
}

/// Largest `|p|` over `n` equispaced boundary points of `d` (a lower
/// estimate of the sup by the maximum modulus principle).
pub fn sup_sample_on_disc(p: &Poly, d: &Disc, n: usize) -> f64 {
    if p.is_zero() {
        return 0.0;
    }
    let n = n.max(1);
    (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            let z = d.center + Complex64::from_polar(d.radius, t);
            p.eval(&Cx::from_c64(z, p.prec())).abs_f64()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(cs: &[(f64, f64)]) -> Poly {
        Poly::from_c64(&cs.iter().map(|&(a, b)| c(a, b)).collect::<Vec<_>>(), P)
    }

    #[test]
    fn eval_examples() {
        let p = poly(&[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(p.eval_c64(c(0.0, 2.0)), c(-3.0, 0.0));
        assert_eq!(Poly::zero(P).eval_c64(c(5.0, 1.0)), c(0.0, 0.0));
        assert_eq!(poly(&[(1.0, 0.0), (1.0, 0.0)]).eval_c64(c(1.0, 0.0)), c(2.0, 0.0));
    }

    #[test]
    fn arithmetic_trims() {
        let z = poly(&[(0.0, 0.0), (1.0, 0.0)]);
        let one = poly(&[(1.0, 0.0)]);
        assert_eq!(z.add(&one).to_c64(), vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let p = poly(&[(0.3, 1.0), (2.0, -1.0), (0.7, 0.7)]);
        assert!(p.sub(&p).is_zero());
        assert!(poly(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]).scale(&Cx::zero(P)).is_zero());
        assert_eq!(poly(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]).degree(), Some(0));
        assert_eq!(Poly::zero(P).degree(), None);
    }

    #[test]
    fn shift_examples() {
        let z = poly(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(z.shift_argument(&Cx::from_f64(3.0, 0.0, P)).to_c64(), vec![c(3.0, 0.0), c(1.0, 0.0)]);
        let z2 = Poly::monomial(2, P);
        assert_eq!(
            z2.shift_argument(&Cx::from_f64(1.0, 0.0, P)).to_c64(),
            vec![c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]
        );
        let p = poly(&[(0.3, 1.0), (2.0, -1.0), (0.7, 0.7)]);
        assert_eq!(p.shift_argument(&Cx::zero(P)), p);
    }

    #[test]
    fn bound_examples() {
        let p = poly(&[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let b = sup_bound_on_disc(&p, &Disc::new(c(0.0, 0.0), 2.0).unwrap());
        assert!((b - 5.0).abs() < 1e-8 && b >= 5.0);
        let z = poly(&[(0.0, 0.0), (1.0, 0.0)]);
        let b = sup_bound_on_disc(&z, &Disc::new(c(3.0, 0.0), 1.0).unwrap());
        assert!((b - 4.0).abs() < 1e-8 && b >= 4.0);
        let zm3 = poly(&[(-3.0, 0.0), (1.0, 0.0)]);
        let b = sup_bound_on_disc(&zm3, &Disc::new(c(3.0, 0.0), 1.0).unwrap());
        assert!((b - 1.0).abs() < 1e-8 && b >= 1.0);
    }

    #[test]
    fn sample_examples() {
        let z = poly(&[(0.0, 0.0), (1.0, 0.0)]);
        let s = sup_sample_on_disc(&z, &Disc::new(c(0.0, 0.0), 1.0).unwrap(), 4);
        assert!((s - 1.0).abs() < 1e-15);
        assert_eq!(sup_sample_on_disc(&Poly::zero(P), &Disc::new(c(1.0, 1.0), 3.0).unwrap(), 7), 0.0);
        let p = poly(&[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let s = sup_sample_on_disc(&p, &Disc::new(c(0.0, 0.0), 2.0).unwrap(), 512);
        assert!((4.999..=5.0 + 1e-12).contains(&s), "{s}");
    }

    #[test]
    fn taylor_split_examples() {
        let z2 = Poly::monomial(2, P);
        let (jet, q) = z2.taylor_split(&Cx::zero(P), 1);
        assert_eq!(jet.iter().map(Cx::to_c64).collect::<Vec<_>>(), vec![c(0.0, 0.0)]);
        assert_eq!(q.to_c64(), vec![c(0.0, 0.0), c(1.0, 0.0)]);

        let (jet, q) = z2.taylor_split(&Cx::from_f64(1.0, 0.0, P), 2);
        assert_eq!(jet.iter().map(Cx::to_c64).collect::<Vec<_>>(), vec![c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(q.to_c64(), vec![c(1.0, 0.0)]);

        let p = poly(&[(0.5, 0.0), (1.0, 1.0), (0.0, 2.0)]);
        let at = Cx::from_f64(-1.0, 0.5, P);
        let (jet, q) = p.taylor_split(&at, 5);
        assert!(q.is_zero());
        assert_eq!(Poly::new(jet, P), p.shift_argument(&at));
    }

    #[test]
    fn linear_power_expands() {
        let p = Poly::linear_power(&Cx::from_f64(2.0, 0.0, P), 3, P);
        assert_eq!(p.to_c64(), vec![c(-8.0, 0.0), c(12.0, 0.0), c(-6.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn rounding_term_is_negligible_for_benign_input() {
        let p = poly(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]);
        let r = shift_rounding_bound(&p, &Cx::from_f64(5.0, 0.0, P), 1.0);
        assert!(r > 0.0 && r < 1e-60);
    }
}
