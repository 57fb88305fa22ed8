//! Exact rational scalars and the helpers shared by every module.
//!
//! Geometric predicates run on [`Q`] (arbitrary precision rationals); metric
//! quantities are converted to `f64` at the last possible moment.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserializer, Serializer};

use crate::error::{Error, Result};

/// Exact rational number.
pub type Q = BigRational;

/// Point or vector with exact coordinates.
pub type QVec = Vec<Q>;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qvec(coords: &[i64]) -> QVec {
    coords.iter().map(|&c| qi(c)).collect()
}

/// Converts a finite float to the rational it represents exactly.
pub fn from_f64(x: f64) -> Result<Q> {
    Q::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite coordinate {x}")))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for direct conversion
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn vec_to_f64(v: &[Q]) -> Vec<f64> {
    v.iter().map(to_f64).collect()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn sub(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Q], t: &Q) -> QVec {
    a.iter().map(|x| x * t).collect()
}

pub fn norm2(a: &[Q]) -> Q {
    dot(a, a)
}

pub fn is_zero_vec(a: &[Q]) -> bool {
    a.iter().all(Zero::is_zero)
}

/// Lexicographic comparison of exact vectors.
pub fn lex_cmp(a: &[Q], b: &[Q]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Least common multiple of all denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Q>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Scales a point set by the common denominator so every coordinate is an integer.
pub fn integerize(points: &[QVec]) -> Vec<Vec<BigInt>> {
    let den = common_denominator(points.iter().flatten());
    points
        .iter()
        .map(|p| {
            p.iter()
                .map(|c| c.numer() * (&den / c.denom()))
                .collect()
        })
        .collect()
}

/// Divides an integer vector by the gcd of its entries.
pub fn primitive(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

/// Rescales a rational vector so that its first non-zero entry is `±1`.
pub fn normalize_direction(v: &[Q]) -> QVec {
    match v.iter().find(|x| !x.is_zero()) {
        Some(lead) => {
            let s = lead.abs();
            v.iter().map(|x| x / &s).collect()
        }
        None => v.to_vec(),
    }
}

/// Parses `"p/q"`, `"p"` or a decimal literal such as `"0.25"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Q::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Ok(Q::from_integer(n));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if !frac.is_empty() && frac.chars().all(|c| c.is_ascii_digit()) {
            let neg = int.starts_with('-');
            let int_part: BigInt = if int.is_empty() || int == "-" {
                BigInt::zero()
            } else {
                int.parse()
                    .map_err(|_| Error::Parse(format!("bad decimal {s:?}")))?
            };
            let frac_part: BigInt = frac.parse().expect("digits");
            let den = num_traits::pow(BigInt::from(10), frac.len());
            let mag = Q::new(int_part.abs() * &den + frac_part, den);
            return Ok(if neg { -mag } else { mag });
        }
    }
    let x: f64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("not a rational: {s:?}")))?;
    from_f64(x)
}

pub fn format_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Formats a float with 17 significant digits; the report format depends on it.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

/// `serde` adapter writing rationals as `"p/q"` strings and accepting strings or numbers.
pub mod serde_q {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        d.deserialize_any(QVisitor)
    }

    pub(super) struct QVisitor;

    impl<'de> Visitor<'de> for QVisitor {
        type Value = Q;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a rational as \"p/q\" string or a number")
        }

        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Q, E> {
            parse_q(v).map_err(E::custom)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Q, E> {
            Ok(qi(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Q, E> {
            Ok(Q::from_integer(BigInt::from(v)))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Q, E> {
            from_f64(v).map_err(E::custom)
        }

        fn visit_map<A: de::MapAccess<'de>>(self, map: A) -> std::result::Result<Q, A::Error> {
            // arbitrary_precision numbers arrive as a single-entry map
            let v: serde_json::Value =
                serde::Deserialize::deserialize(de::value::MapAccessDeserializer::new(map))?;
            match v {
                serde_json::Value::Number(n) => parse_q(&n.to_string()).map_err(de::Error::custom),
                other => Err(de::Error::custom(format!("expected rational, got {other}"))),
            }
        }
    }
}

/// Same as [`serde_q`] for nested coordinate lists.
pub mod serde_qvec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::Deserialize;

    pub fn serialize<S: Serializer>(v: &[QVec], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for p in v {
            let strs: Vec<String> = p.iter().map(format_q).collect();
            seq.serialize_element(&strs)?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<QVec>, D::Error> {
        let raw: Vec<Vec<serde_json::Value>> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|p| p.into_iter().map(|c| value_to_q(&c).map_err(de::Error::custom)).collect())
            .collect()
    }
}

/// Same as [`serde_q`] for a single coordinate vector.
pub mod serde_qvec_flat {
    use super::*;
    use serde::Deserialize;

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<QVec, D::Error> {
        let raw: Vec<serde_json::Value> = Vec::deserialize(d)?;
        raw.iter().map(|c| value_to_q(c).map_err(de::Error::custom)).collect()
    }
}

pub fn value_to_q(v: &serde_json::Value) -> Result<Q> {
    match v {
        serde_json::Value::String(s) => parse_q(s),
        serde_json::Value::Number(n) => parse_q(&n.to_string()),
        other => Err(Error::Parse(format!("expected rational, got {other}"))),
    }
}

pub fn q_to_value(x: &Q) -> serde_json::Value {
    serde_json::Value::String(format_q(x))
}

/// JSON number with the fixed 17-significant-digit formatting.
pub fn f64_to_value(x: f64) -> serde_json::Value {
    if !x.is_finite() {
        return serde_json::Value::String(x.to_string());
    }
    let n: serde_json::Number = format_f64(x).parse().expect("formatted float parses");
    serde_json::Value::Number(n)
}

pub fn value_to_f64(v: &serde_json::Value) -> Result<f64> {
    match v {
        serde_json::Value::Number(n) => n
            .to_string()
            .parse()
            .map_err(|_| Error::Parse(format!("bad number {n}"))),
        serde_json::Value::String(s) => parse_q(s).map(|x| to_f64(&x)),
        other => Err(Error::Parse(format!("expected number, got {other}"))),
    }
}
