//! Exact rational weights and their extension with infinities.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::ParseWeightError;

/// An exact rational number in canonical reduced form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Weight(BigRational);

impl Weight {
    pub fn zero() -> Self {
        Weight(BigRational::zero())
    }

    pub fn one() -> Self {
        Weight(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Weight(BigRational::from_integer(BigInt::from(n)))
    }

    /// Builds `num / den`; returns `None` for a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Option<Self> {
        if den == 0 {
            return None;
        }
        Some(Weight(BigRational::new(
            BigInt::from(num),
            BigInt::from(den),
        )))
    }

    pub fn from_bigs(num: BigInt, den: BigInt) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        Some(Weight(BigRational::new(num, den)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Weight(self.0.abs())
    }

    pub fn min_of(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }

    pub fn max_of(self, other: Self) -> Self {
        std::cmp::max(self, other)
    }

    /// Smallest multiple of `step` that is `>= self`. `step` must be positive.
    pub fn ceil_to(&self, step: &Weight) -> Weight {
        let q = (&self.0 / &step.0).ceil();
        Weight(q * &step.0)
    }

    /// Greatest common divisor of two rationals: the largest `d` such that both are
    /// integer multiples of `d`. Returns the other operand when one is zero.
    pub fn gcd(&self, other: &Weight) -> Weight {
        if self.is_zero() {
            return other.abs();
        }
        if other.is_zero() {
            return self.abs();
        }
        let num = self.numer().gcd(other.numer());
        let den = self.denom().lcm(other.denom());
        Weight(BigRational::new(num, den))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Weight {
    type Err = ParseWeightError;

    /// Accepts `n`, `-n`, `+n`, `p/q` with an optional sign on `p`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parse_int = |t: &str| -> Result<BigInt, ParseWeightError> {
            let body = t.strip_prefix('+').unwrap_or(t);
            let digits = body.strip_prefix('-').unwrap_or(body);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(ParseWeightError::Malformed(s.to_string()));
            }
            body.parse::<BigInt>()
                .map_err(|_| ParseWeightError::Malformed(s.to_string()))
        };
        match s.split_once('/') {
            None => Ok(Weight(BigRational::from_integer(parse_int(s)?))),
            Some((p, q)) => {
                let p = parse_int(p)?;
                if q.starts_with(['+', '-']) {
                    return Err(ParseWeightError::Malformed(s.to_string()));
                }
                let q = parse_int(q)?;
                if q.is_zero() {
                    return Err(ParseWeightError::ZeroDenominator);
                }
                Ok(Weight(BigRational::new(p, q)))
            }
        }
    }
}

impl From<i64> for Weight {
    fn from(n: i64) -> Self {
        Weight::from_int(n)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr for Weight {
            type Output = Weight;
            fn $method(self, rhs: Weight) -> Weight {
                Weight(self.0 $op rhs.0)
            }
        }
        impl<'a> $tr<&'a Weight> for &'a Weight {
            type Output = Weight;
            fn $method(self, rhs: &'a Weight) -> Weight {
                Weight(&self.0 $op &rhs.0)
            }
        }
        impl<'a> $tr<&'a Weight> for Weight {
            type Output = Weight;
            fn $method(self, rhs: &'a Weight) -> Weight {
                Weight(self.0 $op &rhs.0)
            }
        }
    };
}

forward_binop!(Add, add, +);
forward_binop!(Sub, sub, -);
forward_binop!(Mul, mul, *);

impl Div for Weight {
    type Output = Weight;
    /// Panics on division by zero, like the underlying rational type.
    fn div(self, rhs: Weight) -> Weight {
        Weight(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a Weight> for &'a Weight {
    type Output = Weight;
    fn div(self, rhs: &'a Weight) -> Weight {
        Weight(&self.0 / &rhs.0)
    }
}

impl AddAssign<&Weight> for Weight {
    fn add_assign(&mut self, rhs: &Weight) {
        self.0 += &rhs.0;
    }
}

impl Neg for Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight(-self.0)
    }
}

impl Neg for &Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight(-&self.0)
    }
}

impl std::iter::Sum for Weight {
    fn sum<I: Iterator<Item = Weight>>(iter: I) -> Weight {
        iter.fold(Weight::zero(), |acc, w| acc + w)
    }
}

/// A weight extended with `-inf` and `+inf`.
///
/// The derived order places `NegInf` below every finite value and `PosInf` above.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtValue {
    NegInf,
    Finite(Weight),
    PosInf,
}

impl ExtValue {
    pub fn finite(&self) -> Option<&Weight> {
        match self {
            ExtValue::Finite(w) => Some(w),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtValue::Finite(_))
    }

    /// Sum, undefined (`None`) for `inf + -inf`.
    pub fn checked_add(&self, other: &ExtValue) -> Option<ExtValue> {
        use ExtValue::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Some(Finite(a + b)),
            (NegInf, PosInf) | (PosInf, NegInf) => None,
            (NegInf, _) | (_, NegInf) => Some(NegInf),
            (PosInf, _) | (_, PosInf) => Some(PosInf),
        }
    }

    pub fn negate(&self) -> ExtValue {
        match self {
            ExtValue::NegInf => ExtValue::PosInf,
            ExtValue::PosInf => ExtValue::NegInf,
            ExtValue::Finite(w) => ExtValue::Finite(-w),
        }
    }
}

impl From<Weight> for ExtValue {
    fn from(w: Weight) -> Self {
        ExtValue::Finite(w)
    }
}

impl From<i64> for ExtValue {
    fn from(n: i64) -> Self {
        ExtValue::Finite(Weight::from_int(n))
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::NegInf => f.write_str("-inf"),
            ExtValue::PosInf => f.write_str("inf"),
            ExtValue::Finite(w) => write!(f, "{w}"),
        }
    }
}

impl fmt::Debug for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ExtValue {
    type Err = ParseWeightError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "+inf" => Ok(ExtValue::PosInf),
            "-inf" => Ok(ExtValue::NegInf),
            other => other.parse().map(ExtValue::Finite),
        }
    }
}
