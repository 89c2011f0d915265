//! Float formatting shared by the CSV and JSON writers.
//!
//! JSON has no representation for infinities, so non-finite values are
//! written as the strings `"inf"`, `"-inf"` and `"nan"`. The same spelling is
//! used in CSV cells.

use serde::Serializer;

pub fn fmt(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&fmt(*x))
    }
}

pub fn serialize_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => serialize(v, s),
        None => s.serialize_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spelling() {
        assert_eq!(fmt(f64::INFINITY), "inf");
        assert_eq!(fmt(-f64::INFINITY), "-inf");
        assert_eq!(fmt(0.5), "0.5");
        #[derive(serde::Serialize)]
        struct W {
            #[serde(serialize_with = "serialize")]
            v: f64,
        }
        assert_eq!(serde_json::to_string(&W { v: f64::INFINITY }).unwrap(), r#"{"v":"inf"}"#);
        assert_eq!(serde_json::to_string(&W { v: 2.0 }).unwrap(), r#"{"v":2.0}"#);
    }
}
