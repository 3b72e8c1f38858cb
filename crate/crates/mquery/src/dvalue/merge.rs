//! Structural merge and override of path-value pairs into objects.
//!
//! `merge_pair` implements ⊕, the operation behind project; `override_path`
//! rewrites an existing binding in place (unwind); `merge_or_override` (⊕*)
//! dispatches between them (lookup and graphLookup attachments).

use super::{DValue, Object, Path, PathSeg};

/// The nested single-key object for `p ↦ v`: `k1.k2 ↦ v` becomes
/// `⟨k1 ↦ ⟨k2 ↦ v⟩⟩`.  The constructor itself never filters nulls;
/// null-dropping is merge's business.
///
/// Panics if `p` is empty or carries indices — parsed queries cannot
/// produce such calls (target paths are validated index-free non-empty).
pub fn obj_for_path(p: &Path, v: DValue) -> Object {
    assert!(!p.is_empty() && p.is_index_free(), "obj_for_path needs an index-free non-empty path");
    let keys: Vec<&str> = p
        .segments()
        .iter()
        .map(|s| match s {
            PathSeg::Key(k) => k.as_str(),
            PathSeg::Index(_) => unreachable!(),
        })
        .collect();
    let mut acc = v;
    for k in keys.iter().rev() {
        let mut o = Object::new();
        o.push(*k, acc);
        acc = DValue::Object(o);
    }
    match acc {
        DValue::Object(o) => o,
        _ => unreachable!(),
    }
}

/// Replaces the value at `p` in `o`, preserving every other pair and the
/// pair order.  Callers guard with `∃p`; if the chain is broken the input
/// is returned unchanged (and debug builds assert).
pub fn override_path(o: &Object, p: &Path, v: DValue) -> Object {
    fn go(o: &Object, segs: &[PathSeg], v: DValue) -> Option<Object> {
        let key = match &segs[0] {
            PathSeg::Key(k) => k.as_str(),
            PathSeg::Index(_) => return None,
        };
        let mut out = o.clone();
        let slot = out.pairs.iter_mut().find(|(k, _)| k == key)?;
        if segs.len() == 1 {
            slot.1 = v;
        } else {
            match &slot.1 {
                DValue::Object(inner) => slot.1 = DValue::Object(go(inner, &segs[1..], v)?),
                _ => return None,
            }
        }
        Some(out)
    }
    if p.is_empty() {
        debug_assert!(false, "override_path with empty path");
        return o.clone();
    }
    match go(o, p.segments(), v) {
        Some(out) => out,
        None => {
            debug_assert!(false, "override_path precondition ∃{p} violated");
            o.clone()
        }
    }
}

/// Extends `u` with the chain for `p ↦ v`, replacing an existing
/// null-valued binding of the first key in place rather than appending a
/// duplicate.
fn extend_object(u: &Object, p: &Path, v: DValue) -> Object {
    let head = p.head_key().expect("index-free path");
    let rest = p.tail();
    let chain = if rest.is_empty() { v } else { DValue::Object(obj_for_path(&rest, v)) };
    let mut out = u.clone();
    if out.contains_key(head) {
        // The key can only be present with value null here (anything else
        // would make a longer prefix exist); replace it in place.
        out.set(head, chain);
    } else {
        out.push(head, chain);
    }
    out
}

/// ⊕ — merges `p ↦ v` into `o`, assuming `o ⊭ ∃p`:
///
/// * `v = null` leaves `o` unchanged;
/// * if no non-empty prefix of `p` exists in `o`, the chain for `p ↦ v`
///   is appended at the end;
/// * otherwise `p` splits as `p1.p2` at the longest existing prefix `p1`
///   and the value there is extended with the chain for `p2 ↦ v`; a
///   non-object value at `p1` is overridden by the chain outright.
pub fn merge_pair(o: &Object, p: &Path, v: DValue) -> Object {
    debug_assert!(!p.is_empty() && p.is_index_free());
    if v.is_null() {
        return o.clone();
    }
    // Longest non-empty existing prefix of p.
    let split = (1..=p.len())
        .rev()
        .map(|n| {
            (
                Path::from_segments(p.segments()[..n].to_vec()),
                Path::from_segments(p.segments()[n..].to_vec()),
            )
        })
        .find(|(p1, _)| o.path_exists_obj(p1));
    match split {
        None => extend_object(o, p, v),
        Some((p1, p2)) => {
            debug_assert!(!p2.is_empty(), "merge_pair precondition o ⊭ ∃p violated");
            match DValue::Object(o.clone()).eval_path(&p1) {
                DValue::Object(u) => override_path(o, &p1, DValue::Object(extend_object(&u, &p2, v))),
                // Non-object prefix: override it with the fresh chain.
                _ => override_path(o, &p1, DValue::Object(obj_for_path(&p2, v))),
            }
        }
    }
}

impl Object {
    fn path_exists_obj(&self, p: &Path) -> bool {
        DValue::Object(self.clone()).path_exists(p)
    }
}

/// ⊕* — override when `o ⊨ ∃p`, merge otherwise.
pub fn merge_or_override(o: &Object, p: &Path, v: DValue) -> Object {
    if DValue::Object(o.clone()).path_exists(p) {
        override_path(o, p, v)
    } else {
        merge_pair(o, p, v)
    }
}
