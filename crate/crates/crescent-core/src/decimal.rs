//! Exact decimal values for canonical answers.
//!
//! Answers are grouped for voting and scored for correctness by their
//! extracted final number. Comparison is exact decimal equality, so
//! `1234 == 1234.0` and `0.1` never suffers binary-float drift.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An exact decimal number: `mantissa * 10^(-scale)`, stored normalized
/// (no trailing zeros in the fractional part, `-0` collapsed to `0`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecimalValue {
    mantissa: BigInt,
    scale: u32,
}

impl DecimalValue {
    /// Build from integer mantissa and decimal scale, normalizing.
    pub fn new(mantissa: BigInt, scale: u32) -> Self {
        let mut v = DecimalValue { mantissa, scale };
        v.normalize();
        v
    }

    pub fn from_int(n: i64) -> Self {
        DecimalValue {
            mantissa: BigInt::from(n),
            scale: 0,
        }
    }

    fn normalize(&mut self) {
        if self.mantissa.is_zero() {
            self.scale = 0;
            return;
        }
        let ten = BigInt::from(10);
        while self.scale > 0 && (&self.mantissa % &ten).is_zero() {
            self.mantissa /= &ten;
            self.scale -= 1;
        }
    }

    /// Parse a bare decimal literal: optional sign, digits, optional
    /// fractional part. Commas, currency symbols, and percent signs must
    /// already be stripped (see [`crate::extract`]).
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.is_empty() {
            return None;
        }
        let (sign, digits) = match s.as_bytes()[0] {
            b'-' => (-1, &s[1..]),
            b'+' => (1, &s[1..]),
            _ => (1, s),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((i, f)) => (i, f),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return None;
        }
        let joined = format!("{int_part}{frac_part}");
        let mantissa = BigInt::from_str(if joined.is_empty() { "0" } else { &joined }).ok()?;
        let mantissa = if sign < 0 { -mantissa } else { mantissa };
        Some(DecimalValue::new(mantissa, frac_part.len() as u32))
    }
}

impl fmt::Display for DecimalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.mantissa);
        }
        let abs = self.mantissa.abs().to_string();
        let scale = self.scale as usize;
        let sign = if self.mantissa.is_negative() { "-" } else { "" };
        if abs.len() <= scale {
            write!(f, "{sign}0.{}{abs}", "0".repeat(scale - abs.len()))
        } else {
            let (int_part, frac_part) = abs.split_at(abs.len() - scale);
            write!(f, "{sign}{int_part}.{frac_part}")
        }
    }
}

impl PartialOrd for DecimalValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn pow10(n: u32) -> BigInt {
    let mut r = BigInt::from(1);
    for _ in 0..n {
        r *= 10;
    }
    r
}

impl Ord for DecimalValue {
    fn cmp(&self, other: &Self) -> Ordering {
        // Align scales before comparing mantissas.
        let (a, b) = if self.scale == other.scale {
            (self.mantissa.clone(), other.mantissa.clone())
        } else if self.scale < other.scale {
            (
                &self.mantissa * pow10(other.scale - self.scale),
                other.mantissa.clone(),
            )
        } else {
            (
                self.mantissa.clone(),
                &other.mantissa * pow10(self.scale - other.scale),
            )
        };
        a.cmp(&b)
    }
}

impl Serialize for DecimalValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DecimalValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        DecimalValue::parse(&s).ok_or_else(|| D::Error::custom(format!("invalid decimal: {s}")))
    }
}

/// The canonical final answer extracted from a model output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CanonicalAnswer {
    Numeric { value: DecimalValue },
    Unextractable,
}

impl CanonicalAnswer {
    pub fn numeric(value: DecimalValue) -> Self {
        CanonicalAnswer::Numeric { value }
    }

    pub fn from_int(n: i64) -> Self {
        CanonicalAnswer::Numeric {
            value: DecimalValue::from_int(n),
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, CanonicalAnswer::Numeric { .. })
    }

    pub fn value(&self) -> Option<&DecimalValue> {
        match self {
            CanonicalAnswer::Numeric { value } => Some(value),
            CanonicalAnswer::Unextractable => None,
        }
    }
}

impl fmt::Display for CanonicalAnswer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonicalAnswer::Numeric { value } => write!(f, "{value}"),
            CanonicalAnswer::Unextractable => write!(f, "<unextractable>"),
        }
    }
}

/// True iff both answers are numeric and decimally equal. Unextractable
/// never equals anything, including itself.
pub fn canonical_equal(a: &CanonicalAnswer, b: &CanonicalAnswer) -> bool {
    match (a, b) {
        (CanonicalAnswer::Numeric { value: va }, CanonicalAnswer::Numeric { value: vb }) => {
            va == vb
        }
        _ => false,
    }
}
