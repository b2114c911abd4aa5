//! Serde support for extended reals: `+∞` travels as the string `"inf"`
//! in both TOML and JSON documents.

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else if self.0.is_nan() {
            s.serialize_str("nan")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

struct ExtRealVisitor;

impl<'de> Visitor<'de> for ExtRealVisitor {
    type Value = ExtReal;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or \"inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
        Ok(ExtReal(v))
    }
    fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
        Ok(ExtReal(v as f64))
    }
    fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
        Ok(ExtReal(v as f64))
    }
    fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
        match v {
            "inf" | "+inf" | "infinity" => Ok(ExtReal(f64::INFINITY)),
            "-inf" => Ok(ExtReal(f64::NEG_INFINITY)),
            "nan" => Ok(ExtReal(f64::NAN)),
            other => other
                .parse()
                .map(ExtReal)
                .map_err(|_| E::custom(format!("invalid extended real {other:?}"))),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(ExtRealVisitor)
    }
}

/// `#[serde(with = "crate::extreal::field")]` for plain `f64` fields.
pub mod field {
    use super::ExtReal;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        ExtReal(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        ExtReal::deserialize(d).map(|e| e.0)
    }
}
