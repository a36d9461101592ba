//! Arbitrary-precision real scalar.
//!
//! [`BigReal`] wraps an MPFR float. Every value carries its own binary
//! precision; binary operations produce a result at the larger of the two
//! operand precisions, so a computation seeded at one [`Precision`] stays at
//! that precision throughout.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use rug::float::Round;
use rug::ops::Pow;
use rug::Float;

use crate::error::SeriesError;

/// Default working precision in decimal digits.
pub const DEFAULT_DIGITS: u32 = 120;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Working precision, expressed in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precision {
    digits: u32,
}

impl Precision {
    pub const fn digits(digits: u32) -> Self {
        Precision { digits }
    }

    pub const fn decimal_digits(self) -> u32 {
        self.digits
    }

    /// Binary precision backing `digits` decimal digits.
    pub fn bits(self) -> u32 {
        (f64::from(self.digits) * LOG2_10).ceil() as u32 + 4
    }

    /// Decimal digits carried by a float of `bits` binary digits.
    pub fn from_bits(bits: u32) -> Self {
        Precision {
            digits: ((f64::from(bits.saturating_sub(4))) / LOG2_10).floor() as u32,
        }
    }

    /// `10^(-exp)` at this precision.
    pub fn ten_pow_neg(self, exp: i32) -> BigReal {
        BigReal::from_int(self, 10).powi(-exp)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::digits(DEFAULT_DIGITS)
    }
}

#[derive(Clone, Debug)]
pub struct BigReal(Float);

impl BigReal {
    pub fn zero(prec: Precision) -> Self {
        BigReal(Float::new(prec.bits()))
    }

    pub fn one(prec: Precision) -> Self {
        Self::from_int(prec, 1)
    }

    pub fn from_int(prec: Precision, v: i64) -> Self {
        BigReal(Float::with_val(prec.bits(), v))
    }

    /// `num / den`, rounded once.
    pub fn from_ratio(prec: Precision, num: i64, den: i64) -> Self {
        let n = Float::with_val(prec.bits(), num);
        BigReal(Float::with_val(prec.bits(), n / den))
    }

    /// Exact conversion of the binary64 value. Prefer [`BigReal::parse`] for
    /// decimal literals such as `0.4`.
    pub fn from_f64(prec: Precision, v: f64) -> Self {
        BigReal(Float::with_val(prec.bits(), v))
    }

    /// Parses a decimal literal (`"2.477838"`, `"-1e-3"`) at `prec`.
    pub fn parse(prec: Precision, s: &str) -> Result<Self, SeriesError> {
        let parsed = Float::parse(s.trim()).map_err(|_| SeriesError::Parse(s.to_string()))?;
        Ok(BigReal(Float::with_val(prec.bits(), parsed)))
    }

    pub fn from_float(f: Float) -> Self {
        BigReal(f)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn bits(&self) -> u32 {
        self.0.prec()
    }

    pub fn precision(&self) -> Precision {
        Precision::from_bits(self.bits())
    }

    /// Same value re-rounded to `prec`.
    pub fn with_precision(&self, prec: Precision) -> Self {
        BigReal(Float::with_val(prec.bits(), &self.0))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Binary exponent `e` with `2^(e-1) <= |x| < 2^e`; `None` for zero.
    pub fn exponent(&self) -> Option<i32> {
        self.0.get_exp()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        match self.0.cmp0() {
            Some(Ordering::Less) => -1,
            Some(Ordering::Greater) => 1,
            _ => 0,
        }
    }

    pub fn abs(&self) -> Self {
        BigReal(self.0.clone().abs())
    }

    pub fn sqrt(&self) -> Self {
        BigReal(self.0.clone().sqrt())
    }

    pub fn exp(&self) -> Self {
        BigReal(self.0.clone().exp())
    }

    pub fn ln(&self) -> Self {
        BigReal(self.0.clone().ln())
    }

    pub fn recip(&self) -> Self {
        BigReal(self.0.clone().recip())
    }

    pub fn square(&self) -> Self {
        BigReal(self.0.clone().square())
    }

    pub fn powi(&self, e: i32) -> Self {
        BigReal(Float::with_val(self.bits(), (&self.0).pow(e)))
    }

    pub fn pow(&self, e: &BigReal) -> Self {
        BigReal(Float::with_val(self.bits().max(e.bits()), (&self.0).pow(&e.0)))
    }

    pub fn mul_int(&self, k: i64) -> Self {
        BigReal(Float::with_val(self.bits(), &self.0 * k))
    }

    pub fn div_int(&self, k: i64) -> Self {
        BigReal(Float::with_val(self.bits(), &self.0 / k))
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// Nearest integer, if it fits in `i64`.
    pub fn round_to_i64(&self) -> Option<i64> {
        self.0.to_integer().and_then(|i| i.to_i64())
    }

    /// Decimal scientific notation with `digits` significant digits.
    pub fn to_sci_string(&self, digits: usize) -> String {
        self.0.to_string_radix_round(10, Some(digits.max(1)), Round::Nearest)
    }

    /// Fixed-point notation with `decimals` digits after the point.
    pub fn to_fixed(&self, decimals: usize) -> String {
        if !self.0.is_finite() {
            return self.0.to_string();
        }
        let neg = self.0.is_sign_negative() && !self.0.is_zero();
        let scale = Float::with_val(self.bits() + 8, 10).pow(decimals as u32);
        let scaled = Float::with_val(self.bits() + 8, &self.0 * &scale).abs();
        let int = scaled.to_integer().unwrap_or_default();
        let mut digits = int.to_string();
        if digits.len() <= decimals {
            digits = format!("{}{}", "0".repeat(decimals + 1 - digits.len()), digits);
        }
        let split = digits.len() - decimals;
        let (whole, frac) = digits.split_at(split);
        let body = if decimals == 0 {
            whole.to_string()
        } else {
            format!("{whole}.{frac}")
        };
        if neg && int != 0 {
            format!("-{body}")
        } else {
            body
        }
    }

    /// Full-precision decimal string, round-trippable through [`BigReal::parse`].
    pub fn to_decimal_string(&self) -> String {
        let digits = self.precision().decimal_digits() as usize + 2;
        self.to_sci_string(digits)
    }

    /// `|a - b| / max(|a|, |b|)`, or `|a - b|` when both are zero-ish.
    pub fn relative_diff(&self, other: &BigReal) -> BigReal {
        let diff = (self - other).abs();
        let scale = self.abs().max(other.abs());
        if scale.is_zero() {
            diff
        } else {
            &diff / &scale
        }
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl PartialEq<f64> for BigReal {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for BigReal {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => f.write_str(&self.to_fixed(p)),
            None => f.write_str(&self.to_sci_string(20)),
        }
    }
}

impl FromStr for BigReal {
    type Err = SeriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BigReal::parse(Precision::default(), s)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&BigReal> for &BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &BigReal) -> BigReal {
                let bits = self.0.prec().max(rhs.0.prec());
                BigReal(Float::with_val(bits, $trait::$method(&self.0, &rhs.0)))
            }
        }
        impl $trait<BigReal> for &BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                $trait::$method(self, &rhs)
            }
        }
        impl $trait<&BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &BigReal) -> BigReal {
                $trait::$method(&self, rhs)
            }
        }
        impl $trait<BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                $trait::$method(&self, &rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl AddAssign<&BigReal> for BigReal {
    fn add_assign(&mut self, rhs: &BigReal) {
        if rhs.0.prec() > self.0.prec() {
            self.0.set_prec(rhs.0.prec());
        }
        self.0 += &rhs.0;
    }
}

impl SubAssign<&BigReal> for BigReal {
    fn sub_assign(&mut self, rhs: &BigReal) {
        if rhs.0.prec() > self.0.prec() {
            self.0.set_prec(rhs.0.prec());
        }
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&BigReal> for BigReal {
    fn mul_assign(&mut self, rhs: &BigReal) {
        if rhs.0.prec() > self.0.prec() {
            self.0.set_prec(rhs.0.prec());
        }
        self.0 *= &rhs.0;
    }
}

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(-self.0)
    }
}

impl Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(-self.0.clone())
    }
}
