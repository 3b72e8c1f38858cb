//! The document data model: d-values, paths, ordering, and structural merge.
//!
//! A d-value is a literal, an array of d-values, or an object — a finite
//! sequence of key-value pairs with pairwise-distinct keys.  Objects carry
//! their pairs in insertion order; whether that order is significant is
//! decided by the [`SemanticsMode`] threaded through comparisons.

mod json;
mod merge;
mod order;
mod path;

pub use json::{parse_dvalue, write_dvalue, write_dvalue_pretty};
pub use merge::{merge_or_override, merge_pair, obj_for_path, override_path};
pub use order::{mode_eq, natural_compare};
pub use path::{Path, PathSeg};

use std::collections::BTreeMap;
use std::fmt;

/// Scalar payloads: null, booleans, 64-bit floats, and strings.
///
/// Numbers are uniformly `f64`, so `1` and `1.0` denote the same value.
/// Engine arithmetic never produces non-finite numbers (operations that
/// would are mapped to null), which keeps the literal order total.
#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Null,
    Bool(bool),
    Number(f64),
    String(String),
}

/// A d-value: the universal unit of data.
#[derive(Clone, Debug, PartialEq)]
pub enum DValue {
    Literal(Literal),
    Array(Vec<DValue>),
    Object(Object),
}

impl DValue {
    pub const NULL: DValue = DValue::Literal(Literal::Null);

    pub fn null() -> DValue {
        DValue::NULL
    }

    pub fn bool(b: bool) -> DValue {
        DValue::Literal(Literal::Bool(b))
    }

    pub fn number(n: f64) -> DValue {
        DValue::Literal(Literal::Number(n))
    }

    pub fn string(s: impl Into<String>) -> DValue {
        DValue::Literal(Literal::String(s.into()))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, DValue::Literal(Literal::Null))
    }

    pub fn as_array(&self) -> Option<&[DValue]> {
        match self {
            DValue::Array(items) => Some(items),
            _ => None,
        }
    }

    pub fn as_object(&self) -> Option<&Object> {
        match self {
            DValue::Object(o) => Some(o),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            DValue::Literal(Literal::Number(n)) => Some(*n),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            DValue::Literal(Literal::String(s)) => Some(s),
            _ => None,
        }
    }

    /// Total path evaluation: any step that does not apply yields null.
    ///
    /// The empty path returns the value itself; a key step requires the
    /// current value to be an object defining that key; an index step
    /// requires an array with that (0-based) position defined.
    pub fn eval_path(&self, p: &Path) -> DValue {
        let mut cur = self;
        for seg in p.segments() {
            match (seg, cur) {
                (PathSeg::Key(k), DValue::Object(o)) => match o.get(k) {
                    Some(v) => cur = v,
                    None => return DValue::null(),
                },
                (PathSeg::Index(i), DValue::Array(items)) => match items.get(*i) {
                    Some(v) => cur = v,
                    None => return DValue::null(),
                },
                _ => return DValue::null(),
            }
        }
        cur.clone()
    }

    /// `v ⊨ ∃p`: the path evaluates to something other than null.
    pub fn path_exists(&self, p: &Path) -> bool {
        !self.eval_path(p).is_null()
    }
}

impl fmt::Display for DValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_dvalue(self, SemanticsMode::Ordered))
    }
}

/// An object: a sequence of key-value pairs with distinct keys.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Object {
    pairs: Vec<(String, DValue)>,
}

impl Object {
    pub fn new() -> Object {
        Object { pairs: Vec::new() }
    }

    /// Builds an object from pairs; panics if keys repeat (construction
    /// sites guarantee distinctness, parsers report it as a user error).
    pub fn from_pairs(pairs: Vec<(String, DValue)>) -> Object {
        let o = Object { pairs };
        debug_assert!(o.keys_distinct(), "object keys must be distinct");
        o
    }

    pub fn pairs(&self) -> &[(String, DValue)] {
        &self.pairs
    }

    pub fn iter(&self) -> std::slice::Iter<'_, (String, DValue)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&DValue> {
        self.pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.pairs.iter().any(|(k, _)| k == key)
    }

    /// Appends a fresh pair; panics in debug builds if the key is present.
    pub fn push(&mut self, key: impl Into<String>, value: DValue) {
        let key = key.into();
        debug_assert!(!self.contains_key(&key), "duplicate key {key:?}");
        self.pairs.push((key, value));
    }

    /// Replaces the value of an existing key in place, keeping its position.
    pub fn set(&mut self, key: &str, value: DValue) {
        match self.pairs.iter_mut().find(|(k, _)| k == key) {
            Some((_, v)) => *v = value,
            None => self.pairs.push((key.to_string(), value)),
        }
    }

    pub fn keys_distinct(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.pairs.iter().all(|(k, _)| seen.insert(k.as_str()))
    }
}

impl FromIterator<(String, DValue)> for Object {
    fn from_iter<T: IntoIterator<Item = (String, DValue)>>(iter: T) -> Object {
        Object::from_pairs(iter.into_iter().collect())
    }
}

/// Whether object pair order is significant.
///
/// Ordered is the engine default; unordered treats an object as a
/// key-to-value map, which affects equality, the natural order, and
/// canonical serialization (keys sorted).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SemanticsMode {
    #[default]
    Ordered,
    Unordered,
}

/// A collection, represented by one deterministic sequence of the bag.
pub type Collection = Vec<Object>;

/// A database instance: named collections plus the active semantics mode.
#[derive(Clone, Debug, Default)]
pub struct DatabaseInstance {
    pub collections: BTreeMap<String, Collection>,
    pub mode: SemanticsMode,
}

impl DatabaseInstance {
    pub fn new(mode: SemanticsMode) -> DatabaseInstance {
        DatabaseInstance { collections: BTreeMap::new(), mode }
    }

    /// Collection lookup is total: unknown names are empty collections.
    pub fn collection(&self, name: &str) -> &[Object] {
        self.collections.get(name).map(|c| c.as_slice()).unwrap_or(&[])
    }
}
