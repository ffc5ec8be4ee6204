//! Exact rational parameters.
//!
//! The smoothness s and sample-size exponent γ enter boundary indicators that
//! fire only on exact equality (γ = p(s+1), γ = p(s+1)+s), so they are carried
//! as exact rationals end to end; floating comparison would misclassify the
//! boundaries.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// An exact rational number, serialized as "p/q" (or "p" when integral).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<i64>);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        Rational(Ratio::new(numer, denom))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(Ratio::from_integer(n))
    }

    pub fn zero() -> Self {
        Rational(Ratio::zero())
    }

    pub fn one() -> Self {
        Rational(Ratio::from_integer(1))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn floor_to_integer(&self) -> i64 {
        self.0.floor().to_integer()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().expect("i64 ratio always converts")
    }

    /// Recovers the decimal a float was written as (shortest round-trip
    /// representation), so a config value like 1.3 means exactly 13/10.
    pub fn from_f64_decimal(value: f64) -> Result<Self, Error> {
        if !value.is_finite() {
            return Err(Error::InvalidConfig(format!("non-finite rational {value}")));
        }
        format!("{value}").parse()
    }
}

impl std::ops::Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Self) -> Self {
        Rational(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Self) -> Self {
        Rational(self.0 - rhs.0)
    }
}

impl std::ops::Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Self) -> Self {
        Rational(self.0 * rhs.0)
    }
}

impl std::ops::Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Self) -> Self {
        Rational(self.0 / rhs.0)
    }
}

impl std::ops::Mul<i64> for Rational {
    type Output = Rational;
    fn mul(self, rhs: i64) -> Self {
        Rational(self.0 * Ratio::from_integer(rhs))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts "p/q", an integer "p", or a decimal like "1.3" (exactly 13/10).
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::InvalidConfig(format!("cannot parse rational {s:?}"));
        if let Some((num, den)) = s.split_once('/') {
            let n: i64 = num.trim().parse().map_err(|_| bad())?;
            let d: i64 = den.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            return Ok(Rational::new(n, d));
        }
        if let Some((int_part, frac_part)) = s.split_once('.') {
            if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = int_part.trim_start().starts_with('-');
            let whole: i64 = if int_part.is_empty() || int_part == "-" {
                0
            } else {
                int_part.parse().map_err(|_| bad())?
            };
            let digits: i64 = frac_part.parse().map_err(|_| bad())?;
            let scale = 10i64
                .checked_pow(frac_part.len() as u32)
                .ok_or_else(bad)?;
            let frac = Rational::new(if negative { -digits } else { digits }, scale);
            return Ok(Rational::from_integer(whole) + frac);
        }
        let n: i64 = s.parse().map_err(|_| bad())?;
        Ok(Rational::from_integer(n))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(n) => Ok(Rational::from_integer(n)),
            Raw::Float(v) => Rational::from_f64_decimal(v).map_err(serde::de::Error::custom),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_decimal() {
        assert_eq!("3/2".parse::<Rational>().unwrap(), Rational::new(3, 2));
        assert_eq!("7".parse::<Rational>().unwrap(), Rational::from_integer(7));
        assert_eq!("1.3".parse::<Rational>().unwrap(), Rational::new(13, 10));
        assert_eq!("-0.25".parse::<Rational>().unwrap(), Rational::new(-1, 4));
        assert_eq!("0.01".parse::<Rational>().unwrap(), Rational::new(1, 100));
        assert!("x/y".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
    }

    #[test]
    fn decimal_float_roundtrip_is_exact() {
        // 1.3 is not exactly representable in binary, but its shortest
        // decimal form is recovered.
        assert_eq!(
            Rational::from_f64_decimal(1.3).unwrap(),
            Rational::new(13, 10)
        );
        assert_eq!(
            Rational::from_f64_decimal(7.5).unwrap(),
            Rational::new(15, 2)
        );
    }

    #[test]
    fn arithmetic_and_floor() {
        let g = Rational::new(15, 2);
        let s = Rational::from_integer(3);
        let p = (g / (s + Rational::one())).floor_to_integer();
        assert_eq!(p, 1);
        assert_eq!((g - Rational::from_integer(1)).to_f64(), 6.5);
    }

    #[test]
    fn display_and_serde() {
        assert_eq!(Rational::new(3, 2).to_string(), "3/2");
        assert_eq!(Rational::from_integer(4).to_string(), "4");
        let json = serde_json::to_string(&Rational::new(13, 10)).unwrap();
        assert_eq!(json, "\"13/10\"");
        let back: Rational = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Rational::new(13, 10));
        let from_float: Rational = serde_json::from_str("1.3").unwrap();
        assert_eq!(from_float, Rational::new(13, 10));
    }
}
