//! Tolerances and the JSON encoding of extended nonnegative reals.
//!
//! Infinite constants are legal results (a positive coefficient on a
//! zero-mass set admits no finite constant) and travel through JSON as the
//! string `"inf"`.

use serde::{Deserialize, Deserializer, Serializer};

/// Default absolute-plus-relative comparison tolerance.
pub const TOLERANCE: f64 = 1e-9;

/// Relative slack under which two ratios are treated as tied.
pub const TIE_EPS: f64 = 1e-12;

/// `a <= b` up to `tol * (1 + |b|)`.
pub fn le_tol(a: f64, b: f64, tol: f64) -> bool {
    if b.is_infinite() && b > 0.0 {
        return true;
    }
    a <= b + tol * (1.0 + b.abs())
}

/// `|a - b| <= tol * (1 + max(|a|, |b|))`, with equal infinities treated as equal.
pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

pub(crate) fn is_nonneg_finite(value: f64) -> bool {
    value.is_finite() && value >= 0.0
}

/// Serde adapter for `f64` fields that may hold `+inf`.
pub mod extended {
    use super::*;

    pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
        if value.is_infinite() && *value > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*value)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got \"{s}\""
            ))),
        }
    }
}

/// `serde_json::Value` for an extended real.
pub fn extended_value(v: f64) -> serde_json::Value {
    if v.is_infinite() && v > 0.0 {
        serde_json::Value::from("inf")
    } else {
        serde_json::Value::from(v)
    }
}
