//! Dual-mode scalars: exact rationals where instances are declared rational,
//! `f64` elsewhere. Mixed arithmetic is contagious towards `f64`.
//!
//! [`Quad`] extends the exact side to numbers of the form `a + b*sqrt(d)`,
//! which is what square-root-bearing gadget values live in.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = num_rational::BigRational;

/// Absolute tolerance used for real-mode comparisons throughout the crate.
pub const REAL_TOL: f64 = 1e-9;

/// A scalar that is either an exact rational or a binary float.
///
/// Arithmetic between two `Exact` operands stays exact; as soon as a `Real`
/// operand is involved the result is a `Real`. Infinities are represented on
/// the `Real` side in both modes (they only ever act as argmax sentinels).
#[derive(Clone, Debug)]
pub enum Value {
    Exact(Rational),
    Real(f64),
}

impl Value {
    pub fn zero() -> Self {
        Value::Exact(Rational::zero())
    }

    pub fn one() -> Self {
        Value::Exact(Rational::one())
    }

    pub fn int(n: i64) -> Self {
        Value::Exact(Rational::from_integer(BigInt::from(n)))
    }

    pub fn usize(n: usize) -> Self {
        Value::Exact(Rational::from_integer(BigInt::from(n)))
    }

    /// Exact ratio `p/q`. Panics if `q == 0`.
    pub fn ratio(p: i64, q: i64) -> Self {
        Value::Exact(Rational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn real(x: f64) -> Self {
        debug_assert!(!x.is_nan(), "NaN is never a legal Value");
        Value::Real(x)
    }

    pub fn infinity() -> Self {
        Value::Real(f64::INFINITY)
    }

    pub fn neg_infinity() -> Self {
        Value::Real(f64::NEG_INFINITY)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Value::Exact(_) => true,
            Value::Real(x) => x.is_finite(),
        }
    }

    pub fn is_infinite(&self) -> bool {
        !self.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_zero(),
            Value::Real(x) => *x == 0.0,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_positive(),
            Value::Real(x) => *x > 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_negative(),
            Value::Real(x) => *x < 0.0,
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Real(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64().unwrap_or(0.0),
            Value::Real(x) => *x,
        }
    }

    pub fn abs(&self) -> Value {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Total order; both operands exact compares exactly, otherwise via `f64`.
    pub fn total_cmp(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a.cmp(b),
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                a.partial_cmp(&b)
                    .expect("NaN is never a legal Value operand")
            }
        }
    }

    /// `|self - other| <= tol`, with exact equality when both operands are exact.
    pub fn approx_eq(&self, other: &Value, tol: f64) -> bool {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            _ => {
                let d = self.to_f64() - other.to_f64();
                d.abs() <= tol
            }
        }
    }

    pub fn max_of(self, other: Value) -> Value {
        if self.total_cmp(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn min_of(self, other: Value) -> Value {
        if self.total_cmp(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    /// Parses "p/q", an integer string, or a finite decimal such as "0.05"
    /// into an exact rational.
    pub fn parse_exact(s: &str) -> Option<Value> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            return Some(Value::Exact(Rational::new(p, q)));
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            let negative = int.trim_start().starts_with('-');
            let int_part: BigInt = if int.is_empty() || int == "-" {
                BigInt::zero()
            } else {
                int.parse().ok()?
            };
            let frac_num: BigInt = frac.parse().ok()?;
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let unsigned_frac = Rational::new(frac_num, scale);
            let int_rat = Rational::from_integer(int_part);
            let r = if negative {
                int_rat - unsigned_frac
            } else {
                int_rat + unsigned_frac
            };
            return Some(Value::Exact(r));
        }
        let p: BigInt = s.parse().ok()?;
        Some(Value::Exact(Rational::from_integer(p)))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Value::Real(x) => write!(f, "{x}"),
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.total_cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
}

impl From<Rational> for Value {
    fn from(r: Rational) -> Self {
        Value::Exact(r)
    }
}

macro_rules! value_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for &Value {
            type Output = Value;
            fn $method(self, rhs: &Value) -> Value {
                match (self, rhs) {
                    (Value::Exact(a), Value::Exact(b)) => Value::Exact(a $op b),
                    _ => Value::Real(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
        impl $trait for Value {
            type Output = Value;
            fn $method(self, rhs: Value) -> Value {
                (&self).$method(&rhs)
            }
        }
    };
}

value_binop!(Add, add, +);
value_binop!(Sub, sub, -);
value_binop!(Mul, mul, *);

impl Div for &Value {
    type Output = Value;
    fn div(self, rhs: &Value) -> Value {
        match (self, rhs) {
            (Value::Exact(a), Value::Exact(b)) => {
                assert!(!b.is_zero(), "exact division by zero");
                Value::Exact(a / b)
            }
            _ => Value::Real(self.to_f64() / rhs.to_f64()),
        }
    }
}

impl Div for Value {
    type Output = Value;
    fn div(self, rhs: Value) -> Value {
        (&self) / (&rhs)
    }
}

impl Neg for &Value {
    type Output = Value;
    fn neg(self) -> Value {
        match self {
            Value::Exact(r) => Value::Exact(-r),
            Value::Real(x) => Value::Real(-x),
        }
    }
}

impl Neg for Value {
    type Output = Value;
    fn neg(self) -> Value {
        -(&self)
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Exact(_) => serializer.serialize_str(&self.to_string()),
            Value::Real(x) if x.is_finite() => serializer.serialize_f64(*x),
            Value::Real(x) => serializer.serialize_str(if *x > 0.0 { "inf" } else { "-inf" }),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Int(n) => Ok(Value::int(n)),
            Repr::Num(x) => {
                if x.is_nan() {
                    Err(D::Error::custom("NaN is not a legal value"))
                } else {
                    Ok(Value::Real(x))
                }
            }
            Repr::Str(s) => match s.trim() {
                "inf" => Ok(Value::infinity()),
                "-inf" => Ok(Value::neg_infinity()),
                _ => Value::parse_exact(&s)
                    .ok_or_else(|| D::Error::custom(format!("cannot parse '{s}' as a rational"))),
            },
        }
    }
}

/// Exact number of the form `a + b*sqrt(root)` with rational `a`, `b`.
///
/// When `root` is a perfect square the irrational part folds into `a`, so a
/// `Quad` with `b == 0` is a plain rational regardless of its root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quad {
    a: Rational,
    b: Rational,
    root: u64,
}

fn integer_sqrt(n: u64) -> Option<u64> {
    let s = (n as f64).sqrt().round() as u64;
    (s.saturating_sub(1)..=s + 1).find(|c| c.checked_mul(*c) == Some(n))
}

impl Quad {
    pub fn new(a: Rational, b: Rational, root: u64) -> Self {
        if b.is_zero() {
            return Quad { a, b, root: 0 };
        }
        if let Some(s) = integer_sqrt(root) {
            let folded = a + b * Rational::from_integer(BigInt::from(s));
            return Quad {
                a: folded,
                b: Rational::zero(),
                root: 0,
            };
        }
        Quad { a, b, root }
    }

    pub fn rational(a: Rational) -> Self {
        Quad {
            a,
            b: Rational::zero(),
            root: 0,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Quad::rational(Rational::from_integer(BigInt::from(n)))
    }

    /// `sqrt(root)` itself.
    pub fn sqrt(root: u64) -> Self {
        Quad::new(Rational::zero(), Rational::one(), root)
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        if self.is_rational() {
            Some(&self.a)
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(0.0) + self.b.to_f64().unwrap_or(0.0) * (self.root as f64).sqrt()
    }

    fn common_root(&self, other: &Quad) -> u64 {
        match (self.b.is_zero(), other.b.is_zero()) {
            (true, true) => 0,
            (false, true) => self.root,
            (true, false) => other.root,
            (false, false) => {
                assert_eq!(
                    self.root, other.root,
                    "mixed quadratic roots are not supported"
                );
                self.root
            }
        }
    }

    pub fn add(&self, other: &Quad) -> Quad {
        let root = self.common_root(other);
        Quad::new(&self.a + &other.a, &self.b + &other.b, root)
    }

    pub fn sub(&self, other: &Quad) -> Quad {
        let root = self.common_root(other);
        Quad::new(&self.a - &other.a, &self.b - &other.b, root)
    }

    pub fn mul(&self, other: &Quad) -> Quad {
        let root = self.common_root(other);
        let d = Rational::from_integer(BigInt::from(root));
        let a = &self.a * &other.a + &self.b * &other.b * &d;
        let b = &self.a * &other.b + &self.b * &other.a;
        Quad::new(a, b, root)
    }

    /// Division via the conjugate. Panics when `other` is zero.
    pub fn div(&self, other: &Quad) -> Quad {
        assert!(!other.is_zero(), "quadratic division by zero");
        let root = self.common_root(other);
        let d = Rational::from_integer(BigInt::from(other.root));
        // (a - b*sqrt(d)) * (a + b*sqrt(d)) = a^2 - b^2 d, nonzero since sqrt(d) is irrational
        let denom = &other.a * &other.a - &other.b * &other.b * &d;
        let conj = Quad {
            a: other.a.clone(),
            b: -other.b.clone(),
            root: other.root,
        };
        let num = self.mul(&conj);
        Quad::new(num.a / &denom, num.b / &denom, root)
    }

    pub fn neg(&self) -> Quad {
        Quad {
            a: -self.a.clone(),
            b: -self.b.clone(),
            root: self.root,
        }
    }

    fn sign(&self) -> Ordering {
        if self.b.is_zero() {
            return self.a.cmp(&Rational::zero());
        }
        let d = Rational::from_integer(BigInt::from(self.root));
        match (self.a.is_negative(), self.b.is_negative()) {
            (false, false) => Ordering::Greater,
            (true, true) => Ordering::Less,
            // a >= 0 > b: sign of a^2 - b^2 d
            (false, true) => (&self.a * &self.a).cmp(&(&self.b * &self.b * &d)),
            // b > 0 > a: sign of b^2 d - a^2
            (true, false) => (&self.b * &self.b * &d).cmp(&(&self.a * &self.a)),
        }
    }
}

impl PartialOrd for Quad {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Quad {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sub(other).sign()
    }
}

impl fmt::Display for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", Value::Exact(self.a.clone()))
        } else {
            write!(
                f,
                "{} + {}*sqrt({})",
                Value::Exact(self.a.clone()),
                Value::Exact(self.b.clone()),
                self.root
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Value::ratio(1, 3);
        let b = Value::ratio(1, 6);
        let s = &a + &b;
        assert_eq!(s, Value::ratio(1, 2));
        assert!(s.is_exact());
    }

    #[test]
    fn mixed_arithmetic_promotes_to_real() {
        let a = Value::ratio(1, 2);
        let b = Value::real(0.25);
        let s = &a + &b;
        assert!(!s.is_exact());
        assert!((s.to_f64() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn parse_exact_forms() {
        assert_eq!(Value::parse_exact("3/4"), Some(Value::ratio(3, 4)));
        assert_eq!(Value::parse_exact("-7"), Some(Value::int(-7)));
        assert_eq!(Value::parse_exact("0.05"), Some(Value::ratio(1, 20)));
        assert_eq!(Value::parse_exact("-0.5"), Some(Value::ratio(-1, 2)));
        assert_eq!(Value::parse_exact("1/0"), None);
        assert_eq!(Value::parse_exact("abc"), None);
    }

    #[test]
    fn display_rationals() {
        assert_eq!(Value::ratio(3, 4).to_string(), "3/4");
        assert_eq!(Value::ratio(8, 4).to_string(), "2");
        assert_eq!(Value::ratio(-1, 2).to_string(), "-1/2");
    }

    #[test]
    fn order_mixes_infinities() {
        assert!(Value::neg_infinity() < Value::int(-1_000_000));
        assert!(Value::infinity() > Value::int(1_000_000));
        assert!(Value::ratio(1, 3) < Value::ratio(1, 2));
    }

    #[test]
    fn quad_folds_perfect_squares() {
        let q = Quad::new(Rational::zero(), Rational::one(), 4);
        assert!(q.is_rational());
        assert_eq!(q.as_rational().unwrap(), &Rational::from_integer(2.into()));
    }

    #[test]
    fn quad_sqrt2_arithmetic() {
        let r2 = Quad::sqrt(2);
        // (1 + sqrt 2)(1 - sqrt 2) = -1
        let one = Quad::from_int(1);
        let prod = one.add(&r2).mul(&one.sub(&r2));
        assert_eq!(prod, Quad::from_int(-1));
        // 1 / (2 - sqrt 2) = (2 + sqrt 2) / 2
        let inv = one.div(&Quad::from_int(2).sub(&r2));
        let expected = Quad::new(Rational::one(), Rational::new(1.into(), 2.into()), 2);
        assert_eq!(inv, expected);
    }

    #[test]
    fn quad_sign_comparisons() {
        let r2 = Quad::sqrt(2);
        assert_eq!(r2.cmp(&Quad::from_int(1)), Ordering::Greater);
        assert_eq!(r2.cmp(&Quad::from_int(2)), Ordering::Less);
        // 3 - 2*sqrt(2) > 0 (since sqrt(8) < 3)
        let x = Quad::new(
            Rational::from_integer(3.into()),
            Rational::from_integer((-2).into()),
            2,
        );
        assert_eq!(x.sign(), Ordering::Greater);
        // 1 - sqrt(2) < 0
        let y = Quad::from_int(1).sub(&r2);
        assert_eq!(y.sign(), Ordering::Less);
    }
}
