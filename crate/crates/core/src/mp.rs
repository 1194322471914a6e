//! Multiple-precision complex scalars.
//!
//! Every polynomial coefficient in the construction is a [`Cx`]: a pair of
//! MPFR floats sharing one working precision. Partial sums of the series
//! reach magnitudes far outside the binary64 range on the translated discs
//! and must cancel there to a few digits, so the arithmetic substrate is
//! arbitrary precision. Values derived from user input (directions,
//! magnitudes, target coefficients) start life as `f64` and are promoted
//! exactly.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rug::float::Round;
use rug::Float;

/// Working precision used when the caller does not choose one.
pub const DEFAULT_PREC: u32 = 1536;

/// Default ceiling for adaptive precision increases.
pub const MAX_PREC: u32 = 1 << 15;

/// Smallest precision accepted anywhere in the crate.
pub const MIN_PREC: u32 = 64;

/// Complex number with MPFR real and imaginary parts.
#[derive(Clone, PartialEq)]
pub struct Cx {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.to_c64();
        write!(f, "Cx({:e}, {:e})", c.re, c.im)
    }
}

impl Cx {
    pub fn zero(prec: u32) -> Self {
        Cx {
            re: Float::with_val(prec, 0),
            im: Float::with_val(prec, 0),
        }
    }

    pub fn one(prec: u32) -> Self {
        Cx {
            re: Float::with_val(prec, 1),
            im: Float::with_val(prec, 0),
        }
    }

    /// Exact promotion of a binary64 pair.
    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        Cx {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn from_c64(z: Complex64, prec: u32) -> Self {
        Self::from_f64(z.re, z.im, prec)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    /// Nearest binary64 pair.
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// Modulus rounded upward, returned as a Float at the working precision.
    pub fn abs_up(&self) -> Float {
        let mut r = self.re.clone();
        r.hypot_round(&self.im, Round::Up);
        r
    }

    /// Modulus as `f64`, rounded upward.
    pub fn abs_f64_up(&self) -> f64 {
        self.abs_up().to_f64_round(Round::Up)
    }

    pub fn abs_f64(&self) -> f64 {
        let mut r = self.re.clone();
        r.hypot_mut(&self.im);
        r.to_f64()
    }

    /// `self <- self * z + c`, the Horner step. Loops should prefer a
    /// [`Multiplier`].
    pub fn mul_add_assign(&mut self, z: &Cx, c: &Cx) {
        let prec = self.prec();
        // (a + bi)(x + yi) = (ax - by) + (ay + bx)i
        let mut re = Float::with_val(prec, self.re.mul_sub_mul_ref(&z.re, &self.im, &z.im));
        let mut im = Float::with_val(prec, self.re.mul_add_mul_ref(&z.im, &self.im, &z.re));
        re += &c.re;
        im += &c.im;
        self.re = re;
        self.im = im;
    }

    pub fn recip(&self) -> Cx {
        let prec = self.prec();
        let mut den = Float::with_val(prec, self.re.square_ref());
        den += Float::with_val(prec, self.im.square_ref());
        Cx {
            re: Float::with_val(prec, &self.re / &den),
            im: -Float::with_val(prec, &self.im / &den),
        }
    }

    pub fn div(&self, other: &Cx) -> Cx {
        self * &other.recip()
    }

    pub fn scale_real(&self, s: &Float) -> Cx {
        let prec = self.prec();
        Cx {
            re: Float::with_val(prec, &self.re * s),
            im: Float::with_val(prec, &self.im * s),
        }
    }

    /// Canonical signed zero: MPFR distinguishes -0 from +0, the archive does not.
    pub fn normalize_zero(mut self) -> Self {
        if self.re.is_zero() {
            self.re = Float::with_val(self.re.prec(), 0);
        }
        if self.im.is_zero() {
            self.im = Float::with_val(self.im.prec(), 0);
        }
        self
    }
}

/// Repeated multiplication by a fixed complex factor with reusable scratch
/// space. Factors that are small integers on the real or imaginary axis
/// (translation centers `+-m`, `+-im` for integer `m`) use exact integer
/// scaling, which is far cheaper than a full multiprecision product. Every
/// path rounds each component at most twice, like the general one.
pub struct Multiplier {
    a: Cx,
    kind: Axis,
    t: Float,
    u: Float,
}

#[derive(Clone, Copy)]
enum Axis {
    Real(i64),
    Imag(i64),
    General,
}

fn small_integer(x: &Float) -> Option<i64> {
    // below 2^53 the binary64 conversion is exact
    let v = x.to_f64();
    (x.is_integer() && v.abs() < 9.007_199_254_740_992e15).then_some(v as i64)
}

impl Multiplier {
    pub fn new(a: &Cx) -> Self {
        let prec = a.prec();
        let kind = match (small_integer(&a.re), small_integer(&a.im)) {
            (Some(k), Some(0)) => Axis::Real(k),
            (Some(0), Some(k)) => Axis::Imag(k),
            _ => Axis::General,
        };
        Multiplier {
            a: a.clone(),
            kind,
            t: Float::new(prec),
            u: Float::new(prec),
        }
    }

    /// `(t, u) <- a * x`.
    fn product(&mut self, x: &Cx) {
        use rug::Assign;
        let prec = x.prec();
        self.t.set_prec(prec);
        self.u.set_prec(prec);
        match self.kind {
            Axis::Real(k) => {
                self.t.assign(&x.re * k);
                self.u.assign(&x.im * k);
            }
            Axis::Imag(k) => {
                self.t.assign(&x.im * -k);
                self.u.assign(&x.re * k);
            }
            Axis::General => {
                self.t.assign(x.re.mul_sub_mul_ref(&self.a.re, &x.im, &self.a.im));
                self.u.assign(x.re.mul_add_mul_ref(&self.a.im, &x.im, &self.a.re));
            }
        }
    }

    /// `acc <- acc + a * x`.
    pub fn add_product(&mut self, acc: &mut Cx, x: &Cx) {
        self.product(x);
        acc.re += &self.t;
        acc.im += &self.u;
    }

    /// `acc <- a * acc + c`, the Horner step.
    pub fn horner_step(&mut self, acc: &mut Cx, c: &Cx) {
        self.product(acc);
        acc.re.clone_from(&self.t);
        acc.im.clone_from(&self.u);
        acc.re += &c.re;
        acc.im += &c.im;
    }
}

/// `acc <- acc + x * y` with one scratch pair.
pub fn add_mul(acc: &mut Cx, x: &Cx, y: &Cx, scratch: &mut (Float, Float)) {
    use rug::Assign;
    scratch.0.set_prec(acc.prec());
    scratch.1.set_prec(acc.prec());
    scratch.0.assign(x.re.mul_sub_mul_ref(&y.re, &x.im, &y.im));
    scratch.1.assign(x.re.mul_add_mul_ref(&y.im, &x.im, &y.re));
    acc.re += &scratch.0;
    acc.im += &scratch.1;
}

impl<'a> Add<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn add(self, o: &'a Cx) -> Cx {
        let prec = self.prec().max(o.prec());
        Cx {
            re: Float::with_val(prec, &self.re + &o.re),
            im: Float::with_val(prec, &self.im + &o.im),
        }
    }
}

impl<'a> Sub<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn sub(self, o: &'a Cx) -> Cx {
        let prec = self.prec().max(o.prec());
        Cx {
            re: Float::with_val(prec, &self.re - &o.re),
            im: Float::with_val(prec, &self.im - &o.im),
        }
    }
}

impl<'a> Mul<&'a Cx> for &'a Cx {
    type Output = Cx;
    fn mul(self, o: &'a Cx) -> Cx {
        let prec = self.prec().max(o.prec());
        Cx {
            re: Float::with_val(prec, self.re.mul_sub_mul_ref(&o.re, &self.im, &o.im)),
            im: Float::with_val(prec, self.re.mul_add_mul_ref(&o.im, &self.im, &o.re)),
        }
    }
}

impl Neg for &Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

/// Decimal digits needed so that printing then parsing at `prec` bits is exact.
pub fn roundtrip_digits(prec: u32) -> usize {
    2 + (prec as f64 * std::f64::consts::LOG10_2).ceil() as usize
}

/// Decimal rendering that parses back to the identical value at the same
/// precision. Trailing zeros are dropped, so exact short values stay short.
pub fn float_to_decimal(x: &Float) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf" } else { "inf" }.to_string();
    }
    let raw = x.to_string_radix(10, Some(roundtrip_digits(x.prec())));
    trim_decimal(&raw)
}

fn trim_decimal(raw: &str) -> String {
    let (mant, exp) = match raw.find(['e', 'E']) {
        Some(i) => (&raw[..i], raw[i + 1..].parse::<i64>().unwrap_or(0)),
        None => (raw, 0),
    };
    let (sign, mant) = match mant.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mant),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    let digits = format!("{int}{frac}");
    // value = 0.digits... shifted so the decimal point sits after `point` digits
    let point = int.len() as i64 + exp;
    let digits = digits.trim_end_matches('0');
    let lead = digits.len() - digits.trim_start_matches('0').len();
    let digits = &digits[lead..];
    let point = point - lead as i64;
    if digits.is_empty() {
        return "0".to_string();
    }
    let n = digits.len() as i64;
    if (-6..=21).contains(&point) {
        if point <= 0 {
            format!("{sign}0.{}{digits}", "0".repeat((-point) as usize))
        } else if point >= n {
            format!("{sign}{digits}{}", "0".repeat((point - n) as usize))
        } else {
            let (a, b) = digits.split_at(point as usize);
            format!("{sign}{a}.{b}")
        }
    } else {
        let (a, b) = digits.split_at(1);
        let e = point - 1;
        if b.is_empty() {
            format!("{sign}{a}e{e}")
        } else {
            format!("{sign}{a}.{b}e{e}")
        }
    }
}

/// Parses a decimal string at `prec` bits with correct rounding.
pub fn float_from_decimal(s: &str, prec: u32) -> Option<Float> {
    let parsed = Float::parse(s.trim()).ok()?;
    let f = Float::with_val(prec, parsed);
    if f.is_finite() {
        Some(f)
    } else {
        None
    }
}
