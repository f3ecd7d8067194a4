//! Exact numbers of the form `a + b·√5` with rational `a`, `b`, plus `+∞`.
//!
//! Every quantity in the crate (costs, payments, probabilities scaled into
//! costs, ratios) is an [`ExactScalar`]. Comparisons never touch floating
//! point: the sign of `a + b√5` is decided from the signs of `a`, `b` and of
//! `a² − 5b²`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// An element of `ℚ(√5) ∪ {+∞}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactScalar(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Finite { rational: BigRational, surd: BigRational },
    Infinite,
}

/// Parses `"p"`, `"-p"` or `"p/q"` into a reduced rational.
pub fn parse_rational(text: &str) -> Result<BigRational, Error> {
    let text = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {text:?}")));
    }
    Ok(BigRational::new(num, den))
}

/// Formats a rational as `p` or `p/q`.
pub fn format_rational(value: &BigRational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// `num/den` as a reduced rational. Panics on a zero denominator.
pub fn rational(num: i64, den: i64) -> BigRational {
    assert!(den != 0, "zero denominator");
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn sign_of(value: &BigRational) -> Ordering {
    value.cmp(&BigRational::zero())
}

impl ExactScalar {
    pub fn new(rational: BigRational, surd: BigRational) -> Self {
        ExactScalar(Repr::Finite { rational, surd })
    }

    pub fn zero() -> Self {
        Self::from_rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn infinity() -> Self {
        ExactScalar(Repr::Infinite)
    }

    pub fn from_integer(value: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn from_rational(value: BigRational) -> Self {
        Self::new(value, BigRational::zero())
    }

    /// `num/den`. Panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(rational(num, den))
    }

    pub fn sqrt5() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    /// The golden ratio `(1+√5)/2`.
    pub fn golden_ratio() -> Self {
        Self::new(rational(1, 2), rational(1, 2))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.0, Repr::Infinite)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Finite { rational, surd } => rational.is_zero() && surd.is_zero(),
            Repr::Infinite => false,
        }
    }

    /// The rational coordinate `a`, or `None` for `+∞`.
    pub fn rational_part(&self) -> Option<&BigRational> {
        match &self.0 {
            Repr::Finite { rational, .. } => Some(rational),
            Repr::Infinite => None,
        }
    }

    /// The `√5` coordinate `b`, or `None` for `+∞`.
    pub fn surd_part(&self) -> Option<&BigRational> {
        match &self.0 {
            Repr::Finite { surd, .. } => Some(surd),
            Repr::Infinite => None,
        }
    }

    /// The value as a plain rational, if it has no `√5` component.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.0 {
            Repr::Finite { rational, surd } if surd.is_zero() => Some(rational),
            _ => None,
        }
    }

    /// Exact sign. `+∞` is positive.
    pub fn signum(&self) -> Ordering {
        let (a, b) = match &self.0 {
            Repr::Infinite => return Ordering::Greater,
            Repr::Finite { rational, surd } => (rational, surd),
        };
        let (sa, sb) = (sign_of(a), sign_of(b));
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // Opposite signs: compare a² with 5b².
        let lhs = a * a;
        let rhs = b * b * BigRational::from_integer(BigInt::from(5));
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => unreachable!("√5 is irrational"),
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    /// `self − rhs`, or `None` when the result is not representable
    /// (`∞ − ∞` or `x − ∞`).
    pub fn checked_sub(&self, rhs: &Self) -> Option<Self> {
        match (&self.0, &rhs.0) {
            (_, Repr::Infinite) => None,
            (Repr::Infinite, _) => Some(Self::infinity()),
            (Repr::Finite { rational: a, surd: b }, Repr::Finite { rational: c, surd: d }) => {
                Some(Self::new(a - c, b - d))
            }
        }
    }

    /// `self / rhs`, or `None` for division by zero, `∞/∞`, or a negative
    /// divisor of `∞`.
    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        match (&self.0, &rhs.0) {
            (Repr::Infinite, Repr::Infinite) => None,
            (Repr::Finite { .. }, Repr::Infinite) => Some(Self::zero()),
            (Repr::Infinite, Repr::Finite { .. }) => {
                if rhs.is_positive() {
                    Some(Self::infinity())
                } else {
                    None
                }
            }
            (Repr::Finite { rational: a, surd: b }, Repr::Finite { rational: c, surd: d }) => {
                if rhs.is_zero() {
                    return None;
                }
                // (a + b√5)(c − d√5) / (c² − 5d²)
                let five = BigRational::from_integer(BigInt::from(5));
                let norm = c * c - d * d * &five;
                let rational = (a * c - b * d * &five) / &norm;
                let surd = (b * c - a * d) / &norm;
                Some(Self::new(rational, surd))
            }
        }
    }

    /// Multiplication with the measure-theoretic convention `0·∞ = 0`.
    /// `None` when a negative number meets `∞`.
    pub fn checked_mul(&self, rhs: &Self) -> Option<Self> {
        match (&self.0, &rhs.0) {
            (Repr::Infinite, Repr::Infinite) => Some(Self::infinity()),
            (Repr::Infinite, _) | (_, Repr::Infinite) => {
                let finite = if self.is_infinite() { rhs } else { self };
                match finite.signum() {
                    Ordering::Equal => Some(Self::zero()),
                    Ordering::Greater => Some(Self::infinity()),
                    Ordering::Less => None,
                }
            }
            (Repr::Finite { rational: a, surd: b }, Repr::Finite { rational: c, surd: d }) => {
                if b.is_zero() && d.is_zero() {
                    return Some(Self::from_rational(a * c));
                }
                let five = BigRational::from_integer(BigInt::from(5));
                Some(Self::new(a * c + b * d * five, a * d + b * c))
            }
        }
    }

    /// Multiplies by a rational (probabilities, weights).
    pub fn scale(&self, factor: &BigRational) -> Self {
        self.checked_mul(&Self::from_rational(factor.clone()))
            .expect("scaling +∞ by a negative rational")
    }

    /// Floating-point approximation, for display only.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Infinite => f64::INFINITY,
            Repr::Finite { rational, surd } => {
                rational.to_f64().unwrap_or(f64::NAN) + surd.to_f64().unwrap_or(f64::NAN) * 5f64.sqrt()
            }
        }
    }

    pub fn min_of<'a>(values: impl IntoIterator<Item = &'a ExactScalar>) -> Option<ExactScalar> {
        values.into_iter().min().cloned()
    }

    pub fn max_of<'a>(values: impl IntoIterator<Item = &'a ExactScalar>) -> Option<ExactScalar> {
        values.into_iter().max().cloned()
    }
}

impl Default for ExactScalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for ExactScalar {
    fn from(value: i64) -> Self {
        Self::from_integer(value)
    }
}

impl From<BigRational> for ExactScalar {
    fn from(value: BigRational) -> Self {
        Self::from_rational(value)
    }
}

impl Ord for ExactScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Infinite, Repr::Infinite) => Ordering::Equal,
            (Repr::Infinite, _) => Ordering::Greater,
            (_, Repr::Infinite) => Ordering::Less,
            (Repr::Finite { rational: a, surd: b }, Repr::Finite { rational: c, surd: d }) => {
                if b == d {
                    return a.cmp(c);
                }
                Self::new(a - c, b - d).signum()
            }
        }
    }
}

impl PartialOrd for ExactScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &ExactScalar {
    type Output = ExactScalar;

    fn add(self, rhs: &ExactScalar) -> ExactScalar {
        match (&self.0, &rhs.0) {
            (Repr::Infinite, _) | (_, Repr::Infinite) => ExactScalar::infinity(),
            (Repr::Finite { rational: a, surd: b }, Repr::Finite { rational: c, surd: d }) => {
                ExactScalar::new(a + c, b + d)
            }
        }
    }
}

/// Panics when the result would be `−∞` or undefined; see
/// [`ExactScalar::checked_sub`].
impl Sub for &ExactScalar {
    type Output = ExactScalar;

    fn sub(self, rhs: &ExactScalar) -> ExactScalar {
        self.checked_sub(rhs)
            .unwrap_or_else(|| panic!("{self} - {rhs} is not representable"))
    }
}

/// Panics when a negative number meets `+∞`.
impl Mul for &ExactScalar {
    type Output = ExactScalar;

    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        self.checked_mul(rhs)
            .unwrap_or_else(|| panic!("{self} * {rhs} is not representable"))
    }
}

/// Panics on division by zero and on `∞/∞`.
impl Div for &ExactScalar {
    type Output = ExactScalar;

    fn div(self, rhs: &ExactScalar) -> ExactScalar {
        self.checked_div(rhs)
            .unwrap_or_else(|| panic!("{self} / {rhs} is not representable"))
    }
}

macro_rules! forward_owned_binop {
    ($($trait:ident :: $method:ident),*) => {$(
        impl $trait for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: &ExactScalar) -> ExactScalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<ExactScalar> for &ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                self.$method(&rhs)
            }
        }
    )*};
}

forward_owned_binop!(Add::add, Sub::sub, Mul::mul, Div::div);

impl Neg for &ExactScalar {
    type Output = ExactScalar;

    fn neg(self) -> ExactScalar {
        match &self.0 {
            Repr::Infinite => panic!("-inf is not representable"),
            Repr::Finite { rational, surd } => ExactScalar::new(-rational, -surd),
        }
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;

    fn neg(self) -> ExactScalar {
        -&self
    }
}

impl Sum for ExactScalar {
    fn sum<I: Iterator<Item = ExactScalar>>(iter: I) -> Self {
        iter.fold(ExactScalar::zero(), |acc, x| &acc + &x)
    }
}

impl<'a> Sum<&'a ExactScalar> for ExactScalar {
    fn sum<I: Iterator<Item = &'a ExactScalar>>(iter: I) -> Self {
        iter.fold(ExactScalar::zero(), |acc, x| &acc + x)
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = match &self.0 {
            Repr::Infinite => return f.write_str("inf"),
            Repr::Finite { rational, surd } => (rational, surd),
        };
        if b.is_zero() {
            return f.write_str(&format_rational(a));
        }
        let surd = if b.abs().is_one() {
            "sqrt5".to_string()
        } else {
            format!("{}*sqrt5", format_rational(&b.abs()))
        };
        match (a.is_zero(), b.is_negative()) {
            (true, false) => f.write_str(&surd),
            (true, true) => write!(f, "-{surd}"),
            (false, false) => write!(f, "{}+{surd}", format_rational(a)),
            (false, true) => write!(f, "{}-{surd}", format_rational(a)),
        }
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for ExactScalar {
    type Err = Error;

    /// Accepts `inf`, `p`, `p/q`, and `a+b*sqrt5` forms as printed by
    /// [`Display`](fmt::Display).
    fn from_str(text: &str) -> Result<Self, Error> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact == "inf" || compact == "+inf" {
            return Ok(Self::infinity());
        }
        let Some(head) = compact.strip_suffix("sqrt5") else {
            return parse_rational(&compact).map(Self::from_rational);
        };
        let head = head.strip_suffix('*').unwrap_or(head);
        // Split "a±b" at the last sign that is not the leading one.
        let split = head
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .last();
        let (rational_text, surd_text) = match split {
            Some(i) => (&head[..i], &head[i..]),
            None => ("0", head),
        };
        let surd = match surd_text.trim_start_matches('+') {
            "" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other)?,
        };
        Ok(Self::new(parse_rational(rational_text)?, surd))
    }
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match &self.0 {
            Repr::Infinite => serializer.serialize_str("inf"),
            Repr::Finite { rational, surd } if surd.is_zero() => {
                match rational.is_integer().then(|| rational.numer().to_i64()).flatten() {
                    Some(n) => serializer.serialize_i64(n),
                    None => serializer.serialize_str(&format_rational(rational)),
                }
            }
            Repr::Finite { rational, surd } => {
                let mut map = serializer.serialize_map(Some(2))?;
                map.serialize_entry("r", &format_rational(rational))?;
                map.serialize_entry("s", &format_rational(surd))?;
                map.end()
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WirePart {
    Int(i64),
    Text(String),
}

impl WirePart {
    fn into_rational(self) -> Result<BigRational, Error> {
        match self {
            WirePart::Int(n) => Ok(BigRational::from_integer(BigInt::from(n))),
            WirePart::Text(text) => parse_rational(&text),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WireScalar {
    Int(i64),
    Text(String),
    Surd { r: WirePart, s: WirePart },
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = WireScalar::deserialize(deserializer)
            .map_err(|_| de::Error::custom("expected an integer, \"p/q\", \"inf\" or {\"r\":..,\"s\":..}"))?;
        let value = match wire {
            WireScalar::Int(n) => Ok(ExactScalar::from_integer(n)),
            WireScalar::Text(text) => text.parse(),
            WireScalar::Surd { r, s } => r
                .into_rational()
                .and_then(|r| Ok(ExactScalar::new(r, s.into_rational()?))),
        };
        value.map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> ExactScalar {
        text.parse().unwrap()
    }

    #[test]
    fn golden_ratio_squared_is_phi_plus_one() {
        let phi = ExactScalar::golden_ratio();
        let lhs = &phi * &phi;
        assert_eq!(lhs, s("3/2+1/2*sqrt5"));
        assert_eq!(lhs.cmp(&(&phi + &ExactScalar::one())), Ordering::Equal);
    }

    #[test]
    fn one_plus_phi_beats_phi_squared_minus_epsilon() {
        let phi = ExactScalar::golden_ratio();
        let eps = ExactScalar::ratio(1, 100);
        let lhs = &ExactScalar::one() + &phi;
        let rhs = &(&phi * &phi) - &eps;
        assert_eq!(lhs.cmp(&rhs), Ordering::Greater);
    }

    #[test]
    fn infinity_dominates_large_finite_values() {
        let eps = ExactScalar::ratio(1, 100);
        let four_over_eps = &ExactScalar::from_integer(4) / &eps;
        assert_eq!(four_over_eps, ExactScalar::from_integer(400));
        assert!(ExactScalar::infinity() > four_over_eps);
        assert_eq!(ExactScalar::infinity(), ExactScalar::infinity());
    }

    #[test]
    fn sign_of_mixed_terms() {
        assert!(s("3-1*sqrt5").is_positive()); // 9 > 5
        assert!(s("2-1*sqrt5").is_negative()); // 4 < 5
        assert!(s("-3+sqrt5").is_negative());
        assert!(s("-2+sqrt5").is_positive());
        assert_eq!(s("0").signum(), Ordering::Equal);
    }

    #[test]
    fn division_rationalises_denominator() {
        let phi = ExactScalar::golden_ratio();
        let inv = &ExactScalar::one() / &phi;
        assert_eq!(inv, &phi - &ExactScalar::one());
        assert_eq!(&inv * &phi, ExactScalar::one());
    }

    #[test]
    fn infinity_arithmetic() {
        let inf = ExactScalar::infinity();
        let two = ExactScalar::from_integer(2);
        assert_eq!(&inf + &two, inf);
        assert_eq!(&inf - &two, inf);
        assert_eq!(ExactScalar::zero().checked_mul(&inf), Some(ExactScalar::zero()));
        assert_eq!(two.checked_sub(&inf), None);
        assert_eq!(inf.checked_sub(&inf), None);
        assert_eq!(two.checked_div(&ExactScalar::zero()), None);
        assert_eq!(two.checked_div(&inf), Some(ExactScalar::zero()));
    }

    #[test]
    fn display_and_parse_agree() {
        for text in [
            "0",
            "-7",
            "3/4",
            "inf",
            "sqrt5",
            "-sqrt5",
            "1/2+1/2*sqrt5",
            "1/4-3/2*sqrt5",
            "-1/3*sqrt5",
        ] {
            assert_eq!(s(text).to_string(), text, "round trip of {text}");
        }
    }

    #[test]
    fn json_encodings() {
        let cases = [
            ("5", ExactScalar::from_integer(5)),
            ("\"-3/4\"", ExactScalar::ratio(-3, 4)),
            ("\"inf\"", ExactScalar::infinity()),
            ("{\"r\":\"1/4\",\"s\":\"1/4\"}", s("1/4+1/4*sqrt5")),
        ];
        for (json, value) in cases {
            let parsed: ExactScalar = serde_json::from_str(json).unwrap();
            assert_eq!(parsed, value);
            assert_eq!(serde_json::to_string(&value).unwrap(), json);
        }
        assert!(serde_json::from_str::<ExactScalar>("1.5").is_err());
        assert!(serde_json::from_str::<ExactScalar>("\"1/0\"").is_err());
    }
}
