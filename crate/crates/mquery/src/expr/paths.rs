//! Absolute-path usage analysis for terms and Boolean expressions.
//!
//! The result is the set of absolute paths a term reads, reconstructed
//! from variable-relative ones: inside `map(p, x, body)` a path headed by
//! `x` contributes its remainder prefixed by `p`, and root-relative body
//! paths are prefixed by `p` as well.  Object-constructor children are
//! *not* prefixed by their constructor key — those keys name output
//! positions, not input locations, and the optimizer's preconditions need
//! the read set.  Free variables (lookup template parameters) read from a
//! different document entirely and contribute nothing.

use std::collections::BTreeSet;

use crate::dvalue::Path;

use super::{BoolExpr, PathRef, Term};

/// A path use before resolution against enclosing map/filter inputs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Use {
    Root(Path),
    Var(String, Path),
}

fn resolve_through(input: &PathRef, suffix: &Path) -> Use {
    let joined = input.path.join(suffix);
    match &input.var {
        None => Use::Root(joined),
        Some(y) => Use::Var(y.clone(), joined),
    }
}

/// Rebinds the body uses of a map/filter scope: uses of the bound
/// variable and root-relative uses are both prefixed by the input path.
fn close_scope(uses: BTreeSet<Use>, input: &PathRef, var: &str) -> BTreeSet<Use> {
    uses.into_iter()
        .map(|u| match u {
            Use::Root(q) => resolve_through(input, &q),
            Use::Var(x, rest) if x == var => resolve_through(input, &rest),
            outer => outer,
        })
        .collect()
}

fn term_uses(t: &Term) -> BTreeSet<Use> {
    let mut out = BTreeSet::new();
    match t {
        Term::Const(_) => {}
        Term::Path(pr) => {
            out.insert(match &pr.var {
                None => Use::Root(pr.path.clone()),
                Some(x) => Use::Var(x.clone(), pr.path.clone()),
            });
        }
        Term::Array(items) => {
            for it in items {
                out.extend(term_uses(it));
            }
        }
        Term::Object(fields) => {
            for (_, it) in fields {
                out.extend(term_uses(it));
            }
        }
        Term::FnCall { arg, .. } => out.extend(term_uses(arg)),
        Term::Cond { cond, then, els } => {
            out.extend(bool_uses(cond));
            out.extend(term_uses(then));
            out.extend(term_uses(els));
        }
        Term::Map { input, var, body } => {
            out.extend(close_scope(term_uses(body), input, var));
        }
        Term::Filter { input, var, cond } => {
            out.extend(close_scope(bool_uses(cond), input, var));
        }
    }
    out
}

fn bool_uses(e: &BoolExpr) -> BTreeSet<Use> {
    let mut out = BTreeSet::new();
    match e {
        BoolExpr::Exists(pr) => {
            out.insert(match &pr.var {
                None => Use::Root(pr.path.clone()),
                Some(x) => Use::Var(x.clone(), pr.path.clone()),
            });
        }
        BoolExpr::Eq(a, b) | BoolExpr::Lte(a, b) | BoolExpr::In(a, b) => {
            out.extend(term_uses(a));
            out.extend(term_uses(b));
        }
        BoolExpr::Not(inner) => out.extend(bool_uses(inner)),
        BoolExpr::And(a, b) => {
            out.extend(bool_uses(a));
            out.extend(bool_uses(b));
        }
    }
    out
}

fn roots(uses: BTreeSet<Use>) -> BTreeSet<Path> {
    uses.into_iter()
        .filter_map(|u| match u {
            Use::Root(p) => Some(p),
            Use::Var(..) => None,
        })
        .collect()
}

/// The set of absolute paths read by a term.
pub fn paths_of_term(t: &Term) -> BTreeSet<Path> {
    roots(term_uses(t))
}

/// The set of absolute paths read by a Boolean expression.
pub fn paths_of_bool(e: &BoolExpr) -> BTreeSet<Path> {
    roots(bool_uses(e))
}
