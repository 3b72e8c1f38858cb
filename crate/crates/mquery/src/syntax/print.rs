//! Canonical printing of queries back into the surface dialect.
//!
//! The printer is the inverse of the parser on validated queries:
//! parsing the printed text reproduces the AST structurally.  Where the
//! dialect offers sugar the printer makes one canonical choice — idle
//! projections print as `1`, desugared ∨ prints as `$or`, and builtin
//! calls print in their `{"$size": …}` shorthand.

use crate::dvalue::{write_dvalue_pretty, DValue, Object, Path, SemanticsMode};
use crate::engine::{PathDefinition, Query, SortDirection, Stage};
use crate::expr::{BoolExpr, PathRef, Term};

/// Prints a query as a pretty surface document.
pub fn print_query(q: &Query) -> String {
    write_dvalue_pretty(&query_to_dvalue(q), SemanticsMode::Ordered)
}

/// Prints a query on one line.
pub fn print_query_compact(q: &Query) -> String {
    crate::dvalue::write_dvalue(&query_to_dvalue(q), SemanticsMode::Ordered)
}

/// The surface form as a d-value (field order is significant).
pub fn query_to_dvalue(q: &Query) -> DValue {
    let mut o = Object::new();
    o.push("collection", DValue::string(&q.source));
    o.push("pipeline", DValue::Array(q.stages.iter().map(stage_to_dvalue).collect()));
    DValue::Object(o)
}

fn op(name: &str, body: DValue) -> DValue {
    let mut o = Object::new();
    o.push(name, body);
    DValue::Object(o)
}

fn path_string(p: &Path) -> DValue {
    if p.is_empty() {
        // The root reference prints as a bare "$".
        DValue::string("$")
    } else {
        DValue::string(format!("${p}"))
    }
}

fn path_ref_string(pr: &PathRef) -> DValue {
    match &pr.var {
        None => path_string(&pr.path),
        Some(x) if pr.path.is_empty() => DValue::string(format!("$${x}")),
        Some(x) => DValue::string(format!("$${x}.{}", pr.path)),
    }
}

pub(crate) fn stage_to_dvalue(s: &Stage) -> DValue {
    match s {
        Stage::Match(cond) => op("$match", bool_to_dvalue(cond)),
        Stage::Unwind(p) => op("$unwind", path_string(p)),
        Stage::Project(defs) => {
            let mut body = Object::new();
            for def in defs {
                body.push(def.target.to_string(), definition_to_dvalue(def));
            }
            op("$project", DValue::Object(body))
        }
        Stage::Group { id, collect } => {
            let mut body = Object::new();
            body.push(
                "_id",
                match id {
                    Some(g) => DValue::string(g),
                    None => DValue::null(),
                },
            );
            body.push(
                "collect",
                DValue::Array(collect.iter().map(|k| DValue::string(k)).collect()),
            );
            op("$group", DValue::Object(body))
        }
        Stage::Lookup { vars, template, as_ } => {
            let mut body = Object::new();
            if !vars.is_empty() {
                let mut lets = Object::new();
                for vd in vars {
                    lets.push(vd.var.clone(), path_string(&vd.source));
                }
                body.push("let", DValue::Object(lets));
            }
            body.push("pipeline", query_to_dvalue(template));
            body.push("as", DValue::string(as_.to_string()));
            op("$lookup", DValue::Object(body))
        }
        Stage::GraphLookup { from_coll, start_with, connect_from, connect_to, as_ } => {
            let mut body = Object::new();
            body.push("from", DValue::string(from_coll));
            body.push("startWith", path_string(start_with));
            body.push("connectFromField", DValue::string(connect_from.to_string()));
            body.push("connectToField", DValue::string(connect_to.to_string()));
            body.push("as", DValue::string(as_.to_string()));
            op("$graphLookup", DValue::Object(body))
        }
        Stage::UnionWith(q) => op("$unionWith", query_to_dvalue(q)),
        Stage::Count(key) => op("$count", DValue::string(key)),
        Stage::Sort(comparators) => {
            let mut body = Object::new();
            for c in comparators {
                let dir = match c.direction {
                    SortDirection::Ascending => 1.0,
                    SortDirection::Descending => -1.0,
                };
                body.push(c.path.to_string(), DValue::number(dir));
            }
            op("$sort", DValue::Object(body))
        }
        Stage::Limit(m) => op("$limit", DValue::number(*m as f64)),
        Stage::Skip(m) => op("$skip", DValue::number(*m as f64)),
    }
}

fn definition_to_dvalue(def: &PathDefinition) -> DValue {
    if def.is_idle() {
        return DValue::number(1.0);
    }
    // A literal 1 in definition position would read back as idle.
    if let Term::Const(v) = &def.value {
        if v.as_number() == Some(1.0) {
            return op("$literal", v.clone());
        }
    }
    term_to_dvalue(&def.value)
}

fn const_to_dvalue(v: &DValue) -> DValue {
    let needs_escape = match v {
        // A bare $-string would read back as a path; bare composites
        // would read back as constructors.
        DValue::Literal(crate::dvalue::Literal::String(s)) => s.starts_with('$'),
        DValue::Literal(_) => false,
        DValue::Array(_) | DValue::Object(_) => true,
    };
    if needs_escape {
        op("$literal", v.clone())
    } else {
        v.clone()
    }
}

fn term_to_dvalue(t: &Term) -> DValue {
    match t {
        Term::Const(v) => const_to_dvalue(v),
        Term::Path(pr) => path_ref_string(pr),
        Term::Array(items) => DValue::Array(items.iter().map(term_to_dvalue).collect()),
        Term::Object(fields) => {
            let mut body = Object::new();
            for (k, item) in fields {
                body.push(k.clone(), term_to_dvalue(item));
            }
            op("$object", DValue::Object(body))
        }
        Term::FnCall { name, arg } => op(&format!("${name}"), term_to_dvalue(arg)),
        Term::Cond { cond, then, els } => {
            let mut body = Object::new();
            body.push("if", bool_to_dvalue(cond));
            body.push("then", term_to_dvalue(then));
            body.push("else", term_to_dvalue(els));
            op("$cond", DValue::Object(body))
        }
        Term::Map { input, var, body } => {
            let mut parts = Object::new();
            parts.push("input", path_ref_string(input));
            parts.push("as", DValue::string(var));
            parts.push("in", term_to_dvalue(body));
            op("$map", DValue::Object(parts))
        }
        Term::Filter { input, var, cond } => {
            let mut parts = Object::new();
            parts.push("input", path_ref_string(input));
            parts.push("as", DValue::string(var));
            parts.push("cond", bool_to_dvalue(cond));
            op("$filter", DValue::Object(parts))
        }
    }
}

fn bool_to_dvalue(e: &BoolExpr) -> DValue {
    // ¬(¬φ ∧ ¬ψ) is how ∨ desugars; print it back as $or.
    if let BoolExpr::Not(inner) = e {
        if let BoolExpr::And(a, b) = inner.as_ref() {
            if let (BoolExpr::Not(a), BoolExpr::Not(b)) = (a.as_ref(), b.as_ref()) {
                return op("$or", DValue::Array(vec![bool_to_dvalue(a), bool_to_dvalue(b)]));
            }
        }
    }
    match e {
        BoolExpr::Exists(pr) => op("$exists", path_ref_string(pr)),
        BoolExpr::Eq(a, b) => {
            op("$eq", DValue::Array(vec![term_to_dvalue(a), term_to_dvalue(b)]))
        }
        BoolExpr::Lte(a, b) => {
            op("$lte", DValue::Array(vec![term_to_dvalue(a), term_to_dvalue(b)]))
        }
        BoolExpr::In(a, b) => {
            op("$in", DValue::Array(vec![term_to_dvalue(a), term_to_dvalue(b)]))
        }
        BoolExpr::Not(inner) => op("$not", bool_to_dvalue(inner)),
        BoolExpr::And(a, b) => {
            op("$and", DValue::Array(vec![bool_to_dvalue(a), bool_to_dvalue(b)]))
        }
    }
}
