//! Terms and Boolean expressions: ASTs, evaluation, builtin functions,
//! and the absolute-path usage analysis backing the optimizer.

mod eval;
mod paths;
mod registry;

pub use eval::{eval_term, satisfies, EvalContext};
pub use paths::{paths_of_bool, paths_of_term};
pub use registry::{builtin_registry, builtin_registry_for_mode, FunctionRegistry};

use crate::dvalue::{DValue, Path};

/// A reference to a location: a root path (`$p`) or a variable-relative
/// path (`$$x.p`) whose head resolves against the innermost binding of
/// `x` introduced by an enclosing map/filter or a lookup variable set.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRef {
    pub var: Option<String>,
    pub path: Path,
}

impl PathRef {
    pub fn root(path: Path) -> PathRef {
        PathRef { var: None, path }
    }

    pub fn var(name: impl Into<String>, path: Path) -> PathRef {
        PathRef { var: Some(name.into()), path }
    }
}

/// A term of the expression grammar.
///
/// `Const` carries any d-value; scalar literals and `$literal` payloads
/// both land here.  Constructors (`Array`, `Object`) evaluate their
/// children, which distinguishes them from constants.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Const(DValue),
    Path(PathRef),
    Array(Vec<Term>),
    Object(Vec<(String, Term)>),
    FnCall { name: String, arg: Box<Term> },
    Cond { cond: Box<BoolExpr>, then: Box<Term>, els: Box<Term> },
    Map { input: PathRef, var: String, body: Box<Term> },
    Filter { input: PathRef, var: String, cond: Box<BoolExpr> },
}

impl Term {
    pub fn null() -> Term {
        Term::Const(DValue::null())
    }

    pub fn path(p: Path) -> Term {
        Term::Path(PathRef::root(p))
    }
}

/// A Boolean expression.  The surface operators ≠, <, ≥, > and ∨ are
/// parser sugar over this core and never appear in the AST.
#[derive(Clone, Debug, PartialEq)]
pub enum BoolExpr {
    Exists(PathRef),
    Eq(Term, Term),
    Lte(Term, Term),
    In(Term, Term),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn not(e: BoolExpr) -> BoolExpr {
        BoolExpr::Not(Box::new(e))
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    /// ∨ desugars to ¬(¬φ ∧ ¬ψ).
    pub fn or(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::not(BoolExpr::and(BoolExpr::not(a), BoolExpr::not(b)))
    }

    /// Folds a conjunct list back into a right-nested conjunction.
    pub fn conjunction(mut conjuncts: Vec<BoolExpr>) -> Option<BoolExpr> {
        let last = conjuncts.pop()?;
        Some(conjuncts.into_iter().rev().fold(last, |acc, c| BoolExpr::and(c, acc)))
    }

    /// Flattens nested conjunctions into the conjunct list, in order.
    pub fn conjuncts(&self) -> Vec<&BoolExpr> {
        match self {
            BoolExpr::And(a, b) => {
                let mut out = a.conjuncts();
                out.extend(b.conjuncts());
                out
            }
            other => vec![other],
        }
    }
}
