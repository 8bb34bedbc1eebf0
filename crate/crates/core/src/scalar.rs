//! Real scalar abstraction shared by the analysis code.
//!
//! Tableaux, elementary weights and simplifying-assumption checks are generic
//! over [`Scalar`]. Two implementations are provided: plain `f64`, used by the
//! integrators and stability sweeps, and [`Real`], a binary floating point
//! number with a configurable mantissa used for order analysis.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::{DBig, FBig};

use crate::error::{Error, Result};

/// Mantissa length in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Precision(pub u32);

impl Precision {
    pub const F64: Precision = Precision(53);
    pub const DEFAULT: Precision = Precision(256);

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Number of significant decimal digits carried by this precision.
    pub fn decimal_digits(self) -> u32 {
        (f64::from(self.0) * std::f64::consts::LOG10_2).floor() as u32
    }

    /// Default precision, overridable through `SDCRK_PRECISION_BITS`.
    pub fn from_env() -> Precision {
        std::env::var("SDCRK_PRECISION_BITS")
            .ok()
            .and_then(|v| v.trim().parse::<u32>().ok())
            .filter(|&b| b >= 53)
            .map(Precision)
            .unwrap_or(Precision::DEFAULT)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::DEFAULT
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
{
    fn from_i64(v: i64, prec: Precision) -> Self;
    fn from_f64(v: f64, prec: Precision) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn precision(&self) -> Precision;
    /// Decimal representation carrying every significant digit.
    fn to_full_string(&self) -> String;
    fn parse_decimal(s: &str, prec: Precision) -> Result<Self>;

    /// `self += a * b`.
    fn mul_add_assign(&mut self, a: &Self, b: &Self);

    fn zero(prec: Precision) -> Self {
        Self::from_i64(0, prec)
    }

    fn one(prec: Precision) -> Self {
        Self::from_i64(1, prec)
    }

    fn ratio(num: i64, den: i64, prec: Precision) -> Self {
        Self::from_i64(num, prec) / Self::from_i64(den, prec)
    }

    /// Unit roundoff `2^-bits`.
    fn epsilon(prec: Precision) -> Self {
        let mut e = Self::one(prec);
        let half = Self::ratio(1, 2, prec);
        for _ in 0..prec.bits() {
            e *= &half;
        }
        e
    }

    /// `10^-digits`.
    fn pow10_neg(digits: u32, prec: Precision) -> Self {
        let mut e = Self::one(prec);
        let tenth = Self::ratio(1, 10, prec);
        for _ in 0..digits {
            e *= &tenth;
        }
        e
    }

    fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one(self.precision());
        for _ in 0..n {
            acc *= self;
        }
        acc
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64, _prec: Precision) -> Self {
        v as f64
    }
    fn from_f64(v: f64, _prec: Precision) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn precision(&self) -> Precision {
        Precision::F64
    }
    fn to_full_string(&self) -> String {
        format!("{:e}", self)
    }
    fn parse_decimal(s: &str, _prec: Precision) -> Result<Self> {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn epsilon(_prec: Precision) -> Self {
        f64::EPSILON / 2.0
    }
}

type Inner = FBig<HalfEven, 2>;

/// Binary floating point number with a per-value mantissa length.
///
/// Arithmetic between two values uses the larger of the two precisions,
/// rounding half to even.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(Inner);

impl Real {
    fn wrap(v: Inner) -> Real {
        Real(v)
    }

    pub fn inner(&self) -> &FBig<HalfEven, 2> {
        &self.0
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({})", self.to_f64())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = f.precision() {
            write!(f, "{:.*e}", p, self.to_f64())
        } else {
            write!(f, "{}", self.to_f64())
        }
    }
}

macro_rules! real_binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, $op:tt) => {
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                Real::wrap(self.0 $op rhs.0)
            }
        }
        impl<'a> $tr<&'a Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &'a Real) -> Real {
                Real::wrap(self.0 $op &rhs.0)
            }
        }
        impl<'a, 'b> $tr<&'b Real> for &'a Real {
            type Output = Real;
            fn $m(self, rhs: &'b Real) -> Real {
                Real::wrap(&self.0 $op &rhs.0)
            }
        }
        impl $atr<Real> for Real {
            fn $am(&mut self, rhs: Real) {
                let lhs = std::mem::replace(&mut self.0, Inner::ZERO);
                self.0 = lhs $op rhs.0;
            }
        }
        impl<'a> $atr<&'a Real> for Real {
            fn $am(&mut self, rhs: &'a Real) {
                let lhs = std::mem::replace(&mut self.0, Inner::ZERO);
                self.0 = lhs $op &rhs.0;
            }
        }
    };
}

real_binop!(Add, add, AddAssign, add_assign, +);
real_binop!(Sub, sub, SubAssign, sub_assign, -);
real_binop!(Mul, mul, MulAssign, mul_assign, *);
real_binop!(Div, div, DivAssign, div_assign, /);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::wrap(-self.0)
    }
}

impl Sum for Real {
    fn sum<I: Iterator<Item = Real>>(iter: I) -> Real {
        let mut it = iter;
        match it.next() {
            None => Real::zero(Precision::DEFAULT),
            Some(first) => it.fold(first, |acc, x| acc + x),
        }
    }
}

impl Scalar for Real {
    fn from_i64(v: i64, prec: Precision) -> Self {
        Real::wrap(Inner::from(v).with_precision(prec.bits() as usize).value())
    }

    fn from_f64(v: f64, prec: Precision) -> Self {
        let exact = Inner::try_from(v).unwrap_or(Inner::ZERO);
        Real::wrap(exact.with_precision(prec.bits() as usize).value())
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    fn abs(&self) -> Self {
        if self.0 < Inner::ZERO {
            Real::wrap(-self.0.clone())
        } else {
            self.clone()
        }
    }

    fn is_zero(&self) -> bool {
        self.0.repr().significand().is_zero()
    }

    fn precision(&self) -> Precision {
        Precision(self.0.precision() as u32)
    }

    fn to_full_string(&self) -> String {
        let digits = self.precision().decimal_digits().max(17) as usize;
        let dec = self.0.to_decimal().value().with_precision(digits).value();
        dec.to_string()
    }

    fn parse_decimal(s: &str, prec: Precision) -> Result<Self> {
        let dec = DBig::from_str(s.trim()).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        // carry enough decimal digits through the base change
        let digits = prec.decimal_digits() as usize + 8;
        let keep = digits.max(dec.precision());
        let dec = dec.with_precision(keep).value();
        let bin = dec.to_binary().value();
        let bin: Inner = bin.with_rounding();
        Ok(Real::wrap(bin.with_precision(prec.bits() as usize).value()))
    }

    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        let prod = &a.0 * &b.0;
        let lhs = std::mem::replace(&mut self.0, Inner::ZERO);
        self.0 = lhs + prod;
    }
}

/// Total order helper for scalars that are never NaN.
pub fn cmp_scalar<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_arithmetic_keeps_precision() {
        let p = Precision(256);
        let third = Real::ratio(1, 3, p);
        assert_eq!(third.precision(), p);
        let back = third.clone() * Real::from_i64(3, p);
        let err = (back - Real::one(p)).abs();
        assert!(err < Real::epsilon(p) * Real::from_i64(4, p));
    }

    #[test]
    fn real_beats_f64() {
        let p = Precision(200);
        let tiny = Real::pow10_neg(30, p);
        let x = Real::one(p) + &tiny;
        let diff = x - Real::one(p);
        assert!(((diff.to_f64() - 1e-30) / 1e-30).abs() < 1e-12);
    }

    #[test]
    fn decimal_round_trip() {
        let p = Precision(256);
        let x = Real::ratio(2, 7, p);
        let s = x.to_full_string();
        let y = Real::parse_decimal(&s, p).unwrap();
        let rel = ((x - y) / Real::ratio(2, 7, p)).abs();
        assert!(rel < Real::pow10_neg(70, p), "{s}");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(Real::parse_decimal("1.2.3x", Precision(128)).is_err());
        assert!(f64::parse_decimal("nope", Precision::F64).is_err());
    }

    #[test]
    fn env_precision_falls_back() {
        // unset or unusable values give the default
        assert!(Precision::from_env().bits() >= 53);
    }
}
