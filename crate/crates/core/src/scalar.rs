//! A scalar that is either an exact rational or a 64-bit float.
//!
//! Arithmetic stays exact as long as every operand is exact; mixing an
//! exact value with a float demotes the result to a float. Comparisons on
//! floats use a caller-supplied tolerance when a sign decision matters.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub enum Scalar {
    Exact(BigRational),
    Real(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
            Sign::Pos => Sign::Neg,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Neg => -1,
            Sign::Zero => 0,
            Sign::Pos => 1,
        }
    }
}

impl Scalar {
    pub fn zero() -> Scalar {
        Scalar::Exact(BigRational::zero())
    }

    pub fn one() -> Scalar {
        Scalar::int(1)
    }

    pub fn int(n: i64) -> Scalar {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(p: i64, q: i64) -> Scalar {
        assert!(q != 0, "zero denominator");
        Scalar::Exact(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn real(x: f64) -> Scalar {
        Scalar::Real(x)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Real(x) => *x == 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Real(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Real(_) => None,
        }
    }

    /// Demote to a float scalar.
    pub fn to_real(&self) -> Scalar {
        Scalar::Real(self.to_f64())
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Real(x) => Scalar::Real(x.abs()),
        }
    }

    /// Sign with exact decision for rationals; floats with magnitude at most
    /// `tol` (other than an exact 0.0, which is a genuine zero) are
    /// indeterminate and yield `None`.
    pub fn sign_with_tol(&self, tol: f64) -> Option<Sign> {
        match self {
            Scalar::Exact(r) => Some(if r.is_zero() {
                Sign::Zero
            } else if r.is_positive() {
                Sign::Pos
            } else {
                Sign::Neg
            }),
            Scalar::Real(x) => {
                if *x == 0.0 {
                    Some(Sign::Zero)
                } else if x.abs() <= tol {
                    None
                } else if *x > 0.0 {
                    Some(Sign::Pos)
                } else {
                    Some(Sign::Neg)
                }
            }
        }
    }

    /// Strict sign ignoring tolerance (floats decide by comparison with 0).
    pub fn sign(&self) -> Sign {
        match self {
            Scalar::Exact(r) => {
                if r.is_zero() {
                    Sign::Zero
                } else if r.is_positive() {
                    Sign::Pos
                } else {
                    Sign::Neg
                }
            }
            Scalar::Real(x) => {
                if *x == 0.0 {
                    Sign::Zero
                } else if *x > 0.0 {
                    Sign::Pos
                } else {
                    Sign::Neg
                }
            }
        }
    }

    pub fn min(self, other: Scalar) -> Scalar {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn recip(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.recip()),
            Scalar::Real(x) => Scalar::Real(1.0 / x),
        }
    }

    pub fn pow(&self, n: u32) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn parse(s: &str) -> Option<Scalar> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p = BigInt::from_str(p.trim()).ok()?;
            let q = BigInt::from_str(q.trim()).ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Scalar::Exact(BigRational::new(p, q)))
        } else if let Ok(p) = BigInt::from_str(s) {
            Some(Scalar::Exact(BigRational::from_integer(p)))
        } else if let Ok(x) = f64::from_str(s) {
            Some(Scalar::Real(x))
        } else {
            None
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    _ => Scalar::Real(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
        impl std::ops::$trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl std::ops::$trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl std::ops::$trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl std::ops::Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Real(x) => Scalar::Real(-x),
        }
    }
}

impl std::ops::Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Scalar) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => {
                if r.denom() == &BigInt::from(1) {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Real(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(r) => {
                if r.denom() == &BigInt::from(1) {
                    if let Some(n) = r.numer().to_i64() {
                        return ser.serialize_i64(n);
                    }
                }
                ser.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
            }
            Scalar::Real(x) => ser.serialize_f64(*x),
        }
    }
}

struct ScalarVisitor;

impl<'de> Visitor<'de> for ScalarVisitor {
    type Value = Scalar;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a number or a rational string like \"3/4\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
        Ok(Scalar::int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
        Ok(Scalar::Exact(BigRational::from_integer(BigInt::from(v))))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Scalar, E> {
        Ok(Scalar::Real(v))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
        Scalar::parse(v).ok_or_else(|| E::custom(format!("malformed rational {v:?}")))
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Scalar, D::Error> {
        de.deserialize_any(ScalarVisitor)
    }
}

/// Sum of a slice of scalars.
pub fn sum(values: &[Scalar]) -> Scalar {
    values.iter().fold(Scalar::zero(), |acc, v| acc + v)
}

/// Dot product of equal-length slices.
pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(Scalar::zero(), |acc, (x, y)| acc + x * y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Scalar::ratio(1, 3);
        let b = Scalar::ratio(1, 6);
        let c = &a + &b;
        assert!(c.is_exact());
        assert_eq!(c, Scalar::ratio(1, 2));
    }

    #[test]
    fn mixed_arithmetic_demotes() {
        let a = Scalar::ratio(1, 3);
        let b = Scalar::real(0.5);
        assert!(!(&a * &b).is_exact());
    }

    #[test]
    fn serde_round_trip() {
        let vals = vec![
            Scalar::ratio(-7, 3),
            Scalar::int(5),
            Scalar::real(0.25),
        ];
        let s = serde_json::to_string(&vals).unwrap();
        assert_eq!(s, "[\"-7/3\",5,0.25]");
        let back: Vec<Scalar> = serde_json::from_str(&s).unwrap();
        assert_eq!(back[0], Scalar::ratio(-7, 3));
        assert!(back[0].is_exact());
        assert!(back[1].is_exact());
        assert!(!back[2].is_exact());
    }

    #[test]
    fn sign_tolerance() {
        assert_eq!(Scalar::real(1e-12).sign_with_tol(1e-9), None);
        assert_eq!(Scalar::real(0.0).sign_with_tol(1e-9), Some(Sign::Zero));
        assert_eq!(
            Scalar::ratio(1, 1_000_000_000_000).sign_with_tol(1e-9),
            Some(Sign::Pos)
        );
        assert_eq!(Scalar::real(-1e-3).sign_with_tol(1e-9), Some(Sign::Neg));
    }
}
