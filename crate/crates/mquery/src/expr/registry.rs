//! The builtin function registry.
//!
//! Every registered function is total: nonsensical input maps to null,
//! as do arithmetic results that would leave the finite range.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::dvalue::{mode_eq, DValue, SemanticsMode};

type BuiltinFn = Arc<dyn Fn(&DValue) -> DValue + Send + Sync>;

/// Immutable name → total function table.
#[derive(Clone)]
pub struct FunctionRegistry {
    entries: BTreeMap<String, BuiltinFn>,
}

impl FunctionRegistry {
    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    /// Applies a function by name; unknown names yield null (validation
    /// rejects them before evaluation, this is the totality backstop).
    pub fn apply(&self, name: &str, v: &DValue) -> DValue {
        match self.entries.get(name) {
            Some(f) => f(v),
            None => DValue::null(),
        }
    }
}

fn number(n: f64) -> DValue {
    if n.is_finite() {
        DValue::number(n)
    } else {
        DValue::null()
    }
}

fn numeric_items(v: &DValue) -> Option<Vec<f64>> {
    v.as_array()?.iter().map(|item| item.as_number()).collect()
}

fn binary_numbers(v: &DValue) -> Option<(f64, f64)> {
    match v.as_array()? {
        [a, b] => Some((a.as_number()?, b.as_number()?)),
        _ => None,
    }
}

fn fold_numeric(v: &DValue, f: impl Fn(&[f64]) -> Option<f64>) -> DValue {
    match numeric_items(v) {
        Some(ns) => match f(&ns) {
            Some(n) => number(n),
            None => DValue::null(),
        },
        None => DValue::null(),
    }
}

/// The default registry: ordered-mode equality wherever a builtin needs
/// one (only setUnion does).
pub fn builtin_registry() -> FunctionRegistry {
    builtin_registry_for_mode(SemanticsMode::Ordered)
}

/// A registry whose equality-sensitive builtins use the given mode.
pub fn builtin_registry_for_mode(mode: SemanticsMode) -> FunctionRegistry {
    let mut entries: BTreeMap<String, BuiltinFn> = BTreeMap::new();
    let mut add = |name: &str, f: BuiltinFn| {
        entries.insert(name.to_string(), f);
    };

    add("size", Arc::new(|v| match v.as_array() {
        Some(items) => DValue::number(items.len() as f64),
        None => DValue::null(),
    }));
    add("sum", Arc::new(|v| fold_numeric(v, |ns| Some(ns.iter().sum()))));
    add("min", Arc::new(|v| {
        fold_numeric(v, |ns| ns.iter().copied().reduce(f64::min))
    }));
    add("max", Arc::new(|v| {
        fold_numeric(v, |ns| ns.iter().copied().reduce(f64::max))
    }));
    add("avg", Arc::new(|v| {
        fold_numeric(v, |ns| {
            if ns.is_empty() {
                None
            } else {
                Some(ns.iter().sum::<f64>() / ns.len() as f64)
            }
        })
    }));
    add("trunc", Arc::new(|v| match v.as_number() {
        Some(n) => number(n.trunc()),
        None => DValue::null(),
    }));
    add("concat", Arc::new(|v| {
        let parts: Option<Vec<&str>> = v
            .as_array()
            .and_then(|items| items.iter().map(|i| i.as_str()).collect());
        match parts {
            Some(ps) => DValue::string(ps.concat()),
            None => DValue::null(),
        }
    }));
    add("toLower", Arc::new(|v| match v.as_str() {
        Some(s) => DValue::string(s.to_lowercase()),
        None => DValue::null(),
    }));
    add("toUpper", Arc::new(|v| match v.as_str() {
        Some(s) => DValue::string(s.to_uppercase()),
        None => DValue::null(),
    }));
    add("add", Arc::new(|v| match binary_numbers(v) {
        Some((a, b)) => number(a + b),
        None => DValue::null(),
    }));
    add("subtract", Arc::new(|v| match binary_numbers(v) {
        Some((a, b)) => number(a - b),
        None => DValue::null(),
    }));
    add("multiply", Arc::new(|v| match binary_numbers(v) {
        Some((a, b)) => number(a * b),
        None => DValue::null(),
    }));
    add("divide", Arc::new(|v| match binary_numbers(v) {
        Some((a, b)) => number(a / b),
        None => DValue::null(),
    }));
    add("setUnion", Arc::new(move |v| match v.as_array() {
        Some(items) => {
            let mut out: Vec<DValue> = Vec::new();
            for item in items {
                if !out.iter().any(|seen| mode_eq(seen, item, mode)) {
                    out.push(item.clone());
                }
            }
            DValue::Array(out)
        }
        None => DValue::null(),
    }));

    FunctionRegistry { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvalue::parse_dvalue;

    fn v(text: &str) -> DValue {
        parse_dvalue(text).unwrap()
    }

    #[test]
    fn size_counts_and_rejects() {
        let reg = builtin_registry();
        assert_eq!(reg.apply("size", &v("[1, 2, 3]")), v("3"));
        assert_eq!(reg.apply("size", &v("\"not an array\"")), v("null"));
    }

    #[test]
    fn subtract_pairs() {
        let reg = builtin_registry();
        assert_eq!(reg.apply("subtract", &v("[1973, 1970]")), v("3"));
        assert_eq!(reg.apply("subtract", &v("[1973]")), v("null"));
    }

    #[test]
    fn divide_by_zero_is_null() {
        let reg = builtin_registry();
        assert_eq!(reg.apply("divide", &v("[1, 0]")), v("null"));
    }

    #[test]
    fn aggregates() {
        let reg = builtin_registry();
        assert_eq!(reg.apply("sum", &v("[1, 2, 3]")), v("6"));
        assert_eq!(reg.apply("min", &v("[3, 1, 2]")), v("1"));
        assert_eq!(reg.apply("max", &v("[]")), v("null"));
        assert_eq!(reg.apply("avg", &v("[1, 2]")), v("1.5"));
        assert_eq!(reg.apply("sum", &v("[1, \"x\"]")), v("null"));
    }

    #[test]
    fn strings() {
        let reg = builtin_registry();
        assert_eq!(reg.apply("concat", &v("[\"a\", \"b\"]")), v("\"ab\""));
        assert_eq!(reg.apply("toUpper", &v("\"abba\"")), v("\"ABBA\""));
        assert_eq!(reg.apply("toLower", &v("\"ABBA\"")), v("\"abba\""));
    }

    #[test]
    fn set_union_dedups_by_mode_equality() {
        let ordered = builtin_registry_for_mode(SemanticsMode::Ordered);
        let unordered = builtin_registry_for_mode(SemanticsMode::Unordered);
        let input = v(r#"[{"a": 1, "b": 2}, {"b": 2, "a": 1}]"#);
        assert_eq!(ordered.apply("setUnion", &input).as_array().unwrap().len(), 2);
        assert_eq!(unordered.apply("setUnion", &input).as_array().unwrap().len(), 1);
    }

    #[test]
    fn unknown_function_is_null() {
        let reg = builtin_registry();
        assert_eq!(reg.apply("nope", &v("[1]")), v("null"));
    }
}
