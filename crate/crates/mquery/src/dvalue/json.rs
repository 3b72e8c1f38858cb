//! JSON serialization of d-values.
//!
//! Parsing preserves object field order and rejects duplicate keys;
//! numbers become 64-bit floats.  Writing is canonical: in unordered mode
//! object keys are emitted byte-lexicographically sorted, and whole
//! numbers print without a fractional part.

use std::fmt::Write as _;

use serde::de::{self, Deserialize, Deserializer, MapAccess, SeqAccess, Visitor};

use super::{DValue, Literal, Object, SemanticsMode};

impl<'de> Deserialize<'de> for DValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<DValue, D::Error> {
        struct V;

        impl<'de> Visitor<'de> for V {
            type Value = DValue;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("any JSON value")
            }

            fn visit_unit<E>(self) -> Result<DValue, E> {
                Ok(DValue::null())
            }

            fn visit_bool<E>(self, b: bool) -> Result<DValue, E> {
                Ok(DValue::bool(b))
            }

            fn visit_i64<E>(self, n: i64) -> Result<DValue, E> {
                Ok(DValue::number(n as f64))
            }

            fn visit_u64<E>(self, n: u64) -> Result<DValue, E> {
                Ok(DValue::number(n as f64))
            }

            fn visit_f64<E>(self, n: f64) -> Result<DValue, E> {
                Ok(DValue::number(n))
            }

            fn visit_str<E>(self, s: &str) -> Result<DValue, E> {
                Ok(DValue::string(s))
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<DValue, A::Error> {
                let mut items = Vec::new();
                while let Some(v) = seq.next_element()? {
                    items.push(v);
                }
                Ok(DValue::Array(items))
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<DValue, A::Error> {
                let mut pairs: Vec<(String, DValue)> = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, DValue>()? {
                    if pairs.iter().any(|(seen, _)| *seen == k) {
                        return Err(de::Error::custom(format!("duplicate object key {k:?}")));
                    }
                    pairs.push((k, v));
                }
                Ok(DValue::Object(Object::from_pairs(pairs)))
            }
        }

        deserializer.deserialize_any(V)
    }
}

/// Parses one JSON document into a d-value.
pub fn parse_dvalue(text: &str) -> Result<DValue, serde_json::Error> {
    serde_json::from_str(text)
}

fn write_number(out: &mut String, n: f64) {
    // Whole numbers in the f64-exact integer range print as integers, so
    // values parsed from integer literals round-trip verbatim.
    if n.fract() == 0.0 && n.abs() < 9.007_199_254_740_992e15 {
        let _ = write!(out, "{}", n as i64);
    } else {
        let _ = write!(out, "{n}");
    }
}

fn write_string(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("string serialization is infallible"));
}

fn write_value(out: &mut String, v: &DValue, mode: SemanticsMode, indent: Option<usize>) {
    match v {
        DValue::Literal(Literal::Null) => out.push_str("null"),
        DValue::Literal(Literal::Bool(b)) => {
            out.push_str(if *b { "true" } else { "false" })
        }
        DValue::Literal(Literal::Number(n)) => write_number(out, *n),
        DValue::Literal(Literal::String(s)) => write_string(out, s),
        DValue::Array(items) => write_seq(out, items.len(), indent, '[', ']', |out, i, ind| {
            write_value(out, &items[i], mode, ind)
        }),
        DValue::Object(o) => {
            let mut pairs: Vec<&(String, DValue)> = o.pairs().iter().collect();
            if mode == SemanticsMode::Unordered {
                pairs.sort_by(|(ka, _), (kb, _)| ka.as_bytes().cmp(kb.as_bytes()));
            }
            write_seq(out, pairs.len(), indent, '{', '}', |out, i, ind| {
                let (k, v) = pairs[i];
                write_string(out, k);
                out.push_str(": ");
                write_value(out, v, mode, ind);
            })
        }
    }
}

fn write_seq(
    out: &mut String,
    len: usize,
    indent: Option<usize>,
    open: char,
    close: char,
    mut item: impl FnMut(&mut String, usize, Option<usize>),
) {
    out.push(open);
    if len > 0 {
        for i in 0..len {
            if i > 0 {
                out.push(',');
                if indent.is_none() {
                    out.push(' ');
                }
            }
            if let Some(n) = indent {
                out.push('\n');
                out.push_str(&"  ".repeat(n + 1));
            }
            item(out, i, indent.map(|n| n + 1));
        }
        if let Some(n) = indent {
            out.push('\n');
            out.push_str(&"  ".repeat(n));
        }
    }
    out.push(close);
}

/// Compact canonical serialization.
pub fn write_dvalue(v: &DValue, mode: SemanticsMode) -> String {
    let mut out = String::new();
    write_value(&mut out, v, mode, None);
    out
}

/// Two-space-indented canonical serialization.
pub fn write_dvalue_pretty(v: &DValue, mode: SemanticsMode) -> String {
    let mut out = String::new();
    write_value(&mut out, v, mode, Some(0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_preserves_field_order() {
        let v = parse_dvalue(r#"{"z": 1, "a": 2}"#).unwrap();
        assert_eq!(write_dvalue(&v, SemanticsMode::Ordered), r#"{"z": 1, "a": 2}"#);
    }

    #[test]
    fn unordered_output_sorts_keys() {
        let v = parse_dvalue(r#"{"z": 1, "a": {"q": 0, "b": 1}}"#).unwrap();
        assert_eq!(
            write_dvalue(&v, SemanticsMode::Unordered),
            r#"{"a": {"b": 1, "q": 0}, "z": 1}"#
        );
    }

    #[test]
    fn duplicate_keys_rejected() {
        assert!(parse_dvalue(r#"{"a": 1, "a": 2}"#).is_err());
    }

    #[test]
    fn numbers_round_trip_as_integers_when_whole() {
        let v = parse_dvalue("[1973, 2.5, -0.25]").unwrap();
        assert_eq!(write_dvalue(&v, SemanticsMode::Ordered), "[1973, 2.5, -0.25]");
    }

    #[test]
    fn pretty_printing_indents() {
        let v = parse_dvalue(r#"{"a": [1]}"#).unwrap();
        assert_eq!(
            write_dvalue_pretty(&v, SemanticsMode::Ordered),
            "{\n  \"a\": [\n    1\n  ]\n}"
        );
    }
}
