//! Total evaluation of terms and Boolean expressions.

use std::cmp::Ordering;

use crate::dvalue::{mode_eq, natural_compare, DValue, Object, SemanticsMode};

use super::{BoolExpr, FunctionRegistry, PathRef, Term};

/// The evaluation context: the root document plus the variable bindings
/// introduced by enclosing map/filter scopes, innermost last.  Shadowing
/// resolves innermost-first.
#[derive(Clone, Debug)]
pub struct EvalContext {
    pub root: DValue,
    bindings: Vec<(String, DValue)>,
}

impl EvalContext {
    pub fn new(root: DValue) -> EvalContext {
        EvalContext { root, bindings: Vec::new() }
    }

    pub fn for_object(o: &Object) -> EvalContext {
        EvalContext::new(DValue::Object(o.clone()))
    }

    fn lookup(&self, var: &str) -> Option<&DValue> {
        self.bindings.iter().rev().find(|(name, _)| name == var).map(|(_, v)| v)
    }

    /// Resolves a path reference: root paths against the root document,
    /// variable paths against the innermost binding.  An unbound variable
    /// resolves to null (evaluation stays total; validation rejects such
    /// queries up front).
    pub fn resolve(&self, pr: &PathRef) -> DValue {
        match &pr.var {
            None => self.root.eval_path(&pr.path),
            Some(x) => match self.lookup(x) {
                Some(v) => v.eval_path(&pr.path),
                None => DValue::null(),
            },
        }
    }
}

/// Evaluates a term to a d-value.  Never fails.
pub fn eval_term(
    ctx: &mut EvalContext,
    t: &Term,
    reg: &FunctionRegistry,
    mode: SemanticsMode,
) -> DValue {
    match t {
        Term::Const(v) => v.clone(),
        Term::Path(pr) => ctx.resolve(pr),
        Term::Array(items) => {
            // The constructor always produces an array of the same arity;
            // null elements are kept.
            DValue::Array(items.iter().map(|it| eval_term(ctx, it, reg, mode)).collect())
        }
        Term::Object(fields) => {
            // Pairs whose value evaluates to null are omitted.
            let mut o = Object::new();
            for (k, item) in fields {
                let v = eval_term(ctx, item, reg, mode);
                if !v.is_null() {
                    o.push(k.clone(), v);
                }
            }
            DValue::Object(o)
        }
        Term::FnCall { name, arg } => {
            let v = eval_term(ctx, arg, reg, mode);
            reg.apply(name, &v)
        }
        Term::Cond { cond, then, els } => {
            if satisfies(ctx, cond, reg, mode) {
                eval_term(ctx, then, reg, mode)
            } else {
                eval_term(ctx, els, reg, mode)
            }
        }
        Term::Map { input, var, body } => match ctx.resolve(input) {
            DValue::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    ctx.bindings.push((var.clone(), item));
                    out.push(eval_term(ctx, body, reg, mode));
                    ctx.bindings.pop();
                }
                DValue::Array(out)
            }
            _ => DValue::null(),
        },
        Term::Filter { input, var, cond } => match ctx.resolve(input) {
            DValue::Array(items) => {
                let mut out = Vec::new();
                for item in items {
                    ctx.bindings.push((var.clone(), item.clone()));
                    let keep = satisfies(ctx, cond, reg, mode);
                    ctx.bindings.pop();
                    if keep {
                        out.push(item);
                    }
                }
                DValue::Array(out)
            }
            _ => DValue::null(),
        },
    }
}

/// Two-valued satisfaction of a Boolean expression.  Never fails:
/// comparisons fall back on the total natural order and `∈` over a
/// non-array right side is simply false.
pub fn satisfies(
    ctx: &mut EvalContext,
    e: &BoolExpr,
    reg: &FunctionRegistry,
    mode: SemanticsMode,
) -> bool {
    match e {
        BoolExpr::Exists(pr) => !ctx.resolve(pr).is_null(),
        BoolExpr::Eq(a, b) => {
            let (va, vb) = (eval_term(ctx, a, reg, mode), eval_term(ctx, b, reg, mode));
            mode_eq(&va, &vb, mode)
        }
        BoolExpr::Lte(a, b) => {
            let (va, vb) = (eval_term(ctx, a, reg, mode), eval_term(ctx, b, reg, mode));
            natural_compare(&va, &vb, mode) != Ordering::Greater
        }
        BoolExpr::In(a, b) => {
            let va = eval_term(ctx, a, reg, mode);
            match eval_term(ctx, b, reg, mode) {
                DValue::Array(items) => items.iter().any(|item| mode_eq(&va, item, mode)),
                _ => false,
            }
        }
        BoolExpr::Not(inner) => !satisfies(ctx, inner, reg, mode),
        BoolExpr::And(a, b) => {
            satisfies(ctx, a, reg, mode) && satisfies(ctx, b, reg, mode)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvalue::{parse_dvalue, Path};
    use crate::expr::builtin_registry;

    fn ctx(text: &str) -> EvalContext {
        EvalContext::new(parse_dvalue(text).unwrap())
    }

    fn p(text: &str) -> Path {
        Path::parse(text).unwrap()
    }

    const M: SemanticsMode = SemanticsMode::Ordered;

    #[test]
    fn map_projects_each_element() {
        let reg = builtin_registry();
        let mut c = ctx(
            r#"{"albums": [{"release": 1973}, {"release": 1975}, {"release": 1977}]}"#,
        );
        let t = Term::Map {
            input: PathRef::root(p("albums")),
            var: "x".into(),
            body: Box::new(Term::Path(PathRef::var("x", p("release")))),
        };
        assert_eq!(eval_term(&mut c, &t, &reg, M), parse_dvalue("[1973, 1975, 1977]").unwrap());
    }

    #[test]
    fn map_body_may_read_the_root() {
        // diff = map(albums, x, x.release − formation) on the ABBA shape.
        let reg = builtin_registry();
        let mut c = ctx(r#"{"formation": 1972, "albums": [{"release": 1974}, {"release": 1975}]}"#);
        let t = Term::Map {
            input: PathRef::root(p("albums")),
            var: "x".into(),
            body: Box::new(Term::FnCall {
                name: "subtract".into(),
                arg: Box::new(Term::Array(vec![
                    Term::Path(PathRef::var("x", p("release"))),
                    Term::path(p("formation")),
                ])),
            }),
        };
        assert_eq!(eval_term(&mut c, &t, &reg, M), parse_dvalue("[2, 3]").unwrap());
    }

    #[test]
    fn object_ctor_drops_null_fields() {
        let reg = builtin_registry();
        let mut c = ctx(r#"{"a": 1}"#);
        let t = Term::Object(vec![("k".into(), Term::path(p("missing")))]);
        assert_eq!(eval_term(&mut c, &t, &reg, M), parse_dvalue("{}").unwrap());
    }

    #[test]
    fn array_ctor_keeps_nulls() {
        let reg = builtin_registry();
        let mut c = ctx(r#"{"a": 1}"#);
        let t = Term::Array(vec![Term::path(p("missing"))]);
        assert_eq!(eval_term(&mut c, &t, &reg, M), parse_dvalue("[null]").unwrap());
    }

    #[test]
    fn in_over_scalar_is_false() {
        let reg = builtin_registry();
        let mut c = ctx(r#"{"origin": "UK"}"#);
        let e = BoolExpr::In(Term::Const(DValue::string("UK")), Term::path(p("origin")));
        assert!(!satisfies(&mut c, &e, &reg, M));
    }

    #[test]
    fn truthiness_encoding_of_zero() {
        // ¬(τ ∈ [0, false, null]) is false for τ = 0.
        let reg = builtin_registry();
        let mut c = ctx("{}");
        let e = BoolExpr::not(BoolExpr::In(
            Term::Const(DValue::number(0.0)),
            Term::Const(parse_dvalue("[0, false, null]").unwrap()),
        ));
        assert!(!satisfies(&mut c, &e, &reg, M));
    }

    #[test]
    fn shadowing_resolves_innermost_first() {
        let reg = builtin_registry();
        let mut c = ctx(r#"{"outer": [[1, 2]], "inner": null}"#);
        // map(outer, x, map(x, x, x)) — the inner x shadows the outer one.
        let t = Term::Map {
            input: PathRef::root(p("outer")),
            var: "x".into(),
            body: Box::new(Term::Map {
                input: PathRef::var("x", Path::empty()),
                var: "x".into(),
                body: Box::new(Term::Path(PathRef::var("x", Path::empty()))),
            }),
        };
        assert_eq!(eval_term(&mut c, &t, &reg, M), parse_dvalue("[[1, 2]]").unwrap());
    }

    #[test]
    fn filter_keeps_order_and_subsequence() {
        let reg = builtin_registry();
        let mut c = ctx(r#"{"xs": [3, 1, 4, 1, 5]}"#);
        let t = Term::Filter {
            input: PathRef::root(p("xs")),
            var: "x".into(),
            cond: Box::new(BoolExpr::Lte(
                Term::Path(PathRef::var("x", Path::empty())),
                Term::Const(DValue::number(3.0)),
            )),
        };
        assert_eq!(eval_term(&mut c, &t, &reg, M), parse_dvalue("[3, 1, 1]").unwrap());
    }
}
