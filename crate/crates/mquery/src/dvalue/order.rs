//! The natural total order over d-values.
//!
//! Literals precede objects, which precede arrays.  Literals order as
//! null < booleans (false < true) < numbers (numeric) < strings
//! (byte-lexicographic).  Arrays compare lexicographically by element.
//! Objects compare lexicographically by pair, where a pair comparison
//! looks at the value's type tag first, then the key, then the value.
//! Under unordered semantics each object is sorted by that pair order
//! before the lexicographic comparison, so objects with equal key→value
//! maps compare equal.

use std::cmp::Ordering;

use super::{DValue, Literal, Object, SemanticsMode};

fn type_rank(v: &DValue) -> u8 {
    match v {
        DValue::Literal(_) => 0,
        DValue::Object(_) => 1,
        DValue::Array(_) => 2,
    }
}

fn literal_rank(l: &Literal) -> u8 {
    match l {
        Literal::Null => 0,
        Literal::Bool(_) => 1,
        Literal::Number(_) => 2,
        Literal::String(_) => 3,
    }
}

fn compare_literals(a: &Literal, b: &Literal) -> Ordering {
    match (a, b) {
        (Literal::Null, Literal::Null) => Ordering::Equal,
        (Literal::Bool(x), Literal::Bool(y)) => x.cmp(y),
        (Literal::Number(x), Literal::Number(y)) => x.total_cmp(y),
        (Literal::String(x), Literal::String(y)) => x.as_bytes().cmp(y.as_bytes()),
        _ => literal_rank(a).cmp(&literal_rank(b)),
    }
}

fn compare_pairs(
    (ka, va): &(String, DValue),
    (kb, vb): &(String, DValue),
    mode: SemanticsMode,
) -> Ordering {
    type_rank(va)
        .cmp(&type_rank(vb))
        .then_with(|| ka.as_bytes().cmp(kb.as_bytes()))
        .then_with(|| natural_compare(va, vb, mode))
}

fn compare_objects(a: &Object, b: &Object, mode: SemanticsMode) -> Ordering {
    let cmp_seq = |xs: &[(String, DValue)], ys: &[(String, DValue)]| {
        for (x, y) in xs.iter().zip(ys.iter()) {
            let c = compare_pairs(x, y, mode);
            if c != Ordering::Equal {
                return c;
            }
        }
        xs.len().cmp(&ys.len())
    };
    match mode {
        SemanticsMode::Ordered => cmp_seq(a.pairs(), b.pairs()),
        SemanticsMode::Unordered => {
            let mut xs = a.pairs().to_vec();
            let mut ys = b.pairs().to_vec();
            xs.sort_by(|x, y| compare_pairs(x, y, mode));
            ys.sort_by(|x, y| compare_pairs(x, y, mode));
            cmp_seq(&xs, &ys)
        }
    }
}

/// Total comparison of two d-values under the given semantics mode.
pub fn natural_compare(a: &DValue, b: &DValue, mode: SemanticsMode) -> Ordering {
    match (a, b) {
        (DValue::Literal(x), DValue::Literal(y)) => compare_literals(x, y),
        (DValue::Array(xs), DValue::Array(ys)) => {
            for (x, y) in xs.iter().zip(ys.iter()) {
                let c = natural_compare(x, y, mode);
                if c != Ordering::Equal {
                    return c;
                }
            }
            xs.len().cmp(&ys.len())
        }
        (DValue::Object(x), DValue::Object(y)) => compare_objects(x, y, mode),
        _ => type_rank(a).cmp(&type_rank(b)),
    }
}

/// Equality induced by the natural order: structural in ordered mode,
/// map equality in unordered mode.
pub fn mode_eq(a: &DValue, b: &DValue, mode: SemanticsMode) -> bool {
    natural_compare(a, b, mode) == Ordering::Equal
}
