//! Complex numbers over MPFR floats with a fixed decimal precision.

use std::fmt;

use rug::float::Constant;
use rug::{Float, Rational};

/// Bits of working precision for a decimal digit count, with guard bits.
pub fn bits_for_digits(digits: u32) -> u32 {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32 + 32
}

#[derive(Clone)]
pub struct BigFloatComplex {
    re: Float,
    im: Float,
    digits: u32,
}

impl BigFloatComplex {
    pub fn new(re: Float, im: Float, digits: u32) -> Self {
        let bits = bits_for_digits(digits);
        BigFloatComplex { re: Float::with_val(bits, re), im: Float::with_val(bits, im), digits }
    }

    pub fn zero(digits: u32) -> Self {
        let bits = bits_for_digits(digits);
        BigFloatComplex { re: Float::new(bits), im: Float::new(bits), digits }
    }

    pub fn one(digits: u32) -> Self {
        Self::from_rational(&Rational::from(1), digits)
    }

    pub fn from_rational(r: &Rational, digits: u32) -> Self {
        let bits = bits_for_digits(digits);
        BigFloatComplex { re: Float::with_val(bits, r), im: Float::new(bits), digits }
    }

    pub fn from_rationals(re: &Rational, im: &Rational, digits: u32) -> Self {
        let bits = bits_for_digits(digits);
        BigFloatComplex { re: Float::with_val(bits, re), im: Float::with_val(bits, im), digits }
    }

    pub fn from_f64(re: f64, im: f64, digits: u32) -> Self {
        let bits = bits_for_digits(digits);
        BigFloatComplex { re: Float::with_val(bits, re), im: Float::with_val(bits, im), digits }
    }

    /// `x + i sqrt(y)` for rationals `x`, `y >= 0`.
    pub fn from_quadratic_point(x: &Rational, y: &Rational, digits: u32) -> Self {
        let bits = bits_for_digits(digits);
        BigFloatComplex {
            re: Float::with_val(bits, x),
            im: Float::with_val(bits, y).sqrt(),
            digits,
        }
    }

    pub fn i(digits: u32) -> Self {
        let bits = bits_for_digits(digits);
        BigFloatComplex { re: Float::new(bits), im: Float::with_val(bits, 1), digits }
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn bits(&self) -> u32 {
        self.re.prec()
    }

    pub fn re(&self) -> &Float {
        &self.re
    }

    pub fn im(&self) -> &Float {
        &self.im
    }

    pub fn pi(digits: u32) -> Float {
        Float::with_val(bits_for_digits(digits), Constant::Pi)
    }

    pub fn add(&self, o: &Self) -> Self {
        let bits = self.bits();
        BigFloatComplex {
            re: Float::with_val(bits, &self.re + &o.re),
            im: Float::with_val(bits, &self.im + &o.im),
            digits: self.digits,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let bits = self.bits();
        BigFloatComplex {
            re: Float::with_val(bits, &self.re - &o.re),
            im: Float::with_val(bits, &self.im - &o.im),
            digits: self.digits,
        }
    }

    pub fn neg(&self) -> Self {
        BigFloatComplex { re: Float::with_val(self.bits(), -&self.re), im: Float::with_val(self.bits(), -&self.im), digits: self.digits }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let bits = self.bits();
        let rr = Float::with_val(bits, &self.re * &o.re);
        let ii = Float::with_val(bits, &self.im * &o.im);
        let ri = Float::with_val(bits, &self.re * &o.im);
        let ir = Float::with_val(bits, &self.im * &o.re);
        BigFloatComplex { re: rr - ii, im: ri + ir, digits: self.digits }
    }

    pub fn scale(&self, r: &Float) -> Self {
        let bits = self.bits();
        BigFloatComplex {
            re: Float::with_val(bits, &self.re * r),
            im: Float::with_val(bits, &self.im * r),
            digits: self.digits,
        }
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        self.scale(&Float::with_val(self.bits(), r))
    }

    pub fn norm_sqr(&self) -> Float {
        let bits = self.bits();
        Float::with_val(bits, self.re.clone().square() + self.im.clone().square())
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn conj(&self) -> Self {
        BigFloatComplex { re: self.re.clone(), im: Float::with_val(self.bits(), -&self.im), digits: self.digits }
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        let bits = self.bits();
        BigFloatComplex {
            re: Float::with_val(bits, &self.re / &n),
            im: -Float::with_val(bits, &self.im / &n),
            digits: self.digits,
        }
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.recip())
    }

    pub fn exp(&self) -> Self {
        let bits = self.bits();
        let m = Float::with_val(bits, self.re.exp_ref());
        let (s, c) = self.im.clone().sin_cos(Float::new(bits));
        BigFloatComplex { re: Float::with_val(bits, &m * &c), im: m * s, digits: self.digits }
    }

    /// `e(z) = exp(2 pi i z)`.
    pub fn e(&self) -> Self {
        let two_pi = Float::with_val(self.bits(), Constant::Pi) * 2u32;
        let arg = BigFloatComplex {
            re: -Float::with_val(self.bits(), &self.im * &two_pi),
            im: Float::with_val(self.bits(), &self.re * &two_pi),
            digits: self.digits,
        };
        arg.exp()
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        let bits = self.bits();
        BigFloatComplex {
            re: self.abs().ln(),
            im: Float::with_val(bits, self.im.atan2_ref(&self.re)),
            digits: self.digits,
        }
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        if self.re.is_zero() && self.im.is_zero() {
            return self.clone();
        }
        let bits = self.bits();
        let r = self.abs();
        let half = Float::with_val(bits, 0.5);
        let a = (Float::with_val(bits, &r + &self.re) * &half).sqrt();
        let b = (Float::with_val(bits, &r - &self.re) * &half).sqrt();
        let b = if self.im < 0 { -b } else { b };
        BigFloatComplex { re: a, im: b, digits: self.digits }
    }

    pub fn powi(&self, n: i64) -> Self {
        let mut base = if n < 0 { self.recip() } else { self.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = Self::one(self.digits);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// Decimal rendering of the real part with the configured digits.
    pub fn re_string(&self) -> String {
        format_float(&self.re, self.digits)
    }

    pub fn im_string(&self) -> String {
        format_float(&self.im, self.digits)
    }

    /// `|self - other|` as an `f64`, for tolerance checks.
    pub fn dist(&self, other: &Self) -> f64 {
        self.sub(other).abs().to_f64()
    }
}

/// Formats with `digits` significant digits.
pub fn format_float(x: &Float, digits: u32) -> String {
    x.to_string_radix(10, Some(digits as usize))
}

impl fmt::Debug for BigFloatComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for BigFloatComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.digits.min(30) as usize;
        write!(
            f,
            "{} + {}i",
            self.re.to_string_radix(10, Some(d)),
            self.im.to_string_radix(10, Some(d))
        )
    }
}
