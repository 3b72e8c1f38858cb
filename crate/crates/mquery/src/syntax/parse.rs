//! Parsing of surface queries into the validated AST.

use crate::dvalue::{parse_dvalue, DValue, Object, Path};
use crate::engine::{
    ObjectComparator, PathDefinition, Query, SortDirection, Stage, VariableDefinition,
};
use crate::expr::{builtin_registry, BoolExpr, FunctionRegistry, PathRef, Term};

use super::{join_pointer, IssueKind, ParseIssue};

/// Parses and validates the surface form of a query.  On failure, every
/// collected issue carries a JSON-pointer location into the input.
pub fn parse_query(text: &str) -> Result<Query, Vec<ParseIssue>> {
    let doc = match parse_dvalue(text) {
        Ok(doc) => doc,
        Err(e) => {
            return Err(vec![ParseIssue {
                location: String::new(),
                message: format!("invalid JSON: {e}"),
                kind: IssueKind::Syntax,
            }])
        }
    };
    let mut cx = Cx { issues: Vec::new(), registry: builtin_registry() };
    match cx.query(&doc, "") {
        Ok(q) if cx.issues.is_empty() => Ok(q),
        _ => Err(cx.issues),
    }
}

struct Cx {
    issues: Vec<ParseIssue>,
    registry: FunctionRegistry,
}

type R<T> = Result<T, ()>;

impl Cx {
    fn syntax<T>(&mut self, loc: &str, message: impl Into<String>) -> R<T> {
        self.issues.push(ParseIssue {
            location: loc.to_string(),
            message: message.into(),
            kind: IssueKind::Syntax,
        });
        Err(())
    }

    fn invalid<T>(&mut self, loc: &str, message: impl Into<String>) -> R<T> {
        self.issues.push(ParseIssue {
            location: loc.to_string(),
            message: message.into(),
            kind: IssueKind::Validation,
        });
        Err(())
    }

    fn object<'a>(&mut self, v: &'a DValue, loc: &str) -> R<&'a Object> {
        match v.as_object() {
            Some(o) => Ok(o),
            None => self.syntax(loc, "expected an object"),
        }
    }

    fn array<'a>(&mut self, v: &'a DValue, loc: &str) -> R<&'a [DValue]> {
        match v.as_array() {
            Some(items) => Ok(items),
            None => self.syntax(loc, "expected an array"),
        }
    }

    fn string<'a>(&mut self, v: &'a DValue, loc: &str) -> R<&'a str> {
        match v.as_str() {
            Some(s) => Ok(s),
            None => self.syntax(loc, "expected a string"),
        }
    }

    fn field<'a>(&mut self, o: &'a Object, key: &str, loc: &str) -> R<&'a DValue> {
        match o.get(key) {
            Some(v) => Ok(v),
            None => self.syntax(loc, format!("missing required field \"{key}\"")),
        }
    }

    fn reject_unknown_fields(&mut self, o: &Object, allowed: &[&str], loc: &str) {
        for (k, _) in o.iter() {
            if !allowed.contains(&k.as_str()) {
                let _: R<()> =
                    self.syntax(&join_pointer(loc, k), format!("unknown field \"{k}\""));
            }
        }
    }

    fn path(&mut self, text: &str, loc: &str) -> R<Path> {
        match Path::parse(text) {
            Ok(p) => Ok(p),
            Err(e) => self.syntax(loc, e),
        }
    }

    fn index_free_path(&mut self, text: &str, loc: &str) -> R<Path> {
        let p = self.path(text, loc)?;
        if p.is_index_free() {
            Ok(p)
        } else {
            self.invalid(loc, format!("path \"{text}\" must not contain array indices here"))
        }
    }

    /// A `$`-prefixed reference: `$p`, `$$x`, or `$$x.p`.
    fn path_ref(&mut self, text: &str, loc: &str) -> R<PathRef> {
        let Some(body) = text.strip_prefix('$') else {
            return self.syntax(loc, format!("expected a $-prefixed path, got \"{text}\""));
        };
        if let Some(var_body) = body.strip_prefix('$') {
            let (var, rest) = match var_body.split_once('.') {
                Some((var, rest)) => (var, rest),
                None => (var_body, ""),
            };
            if var.is_empty() {
                return self.syntax(loc, "variable reference has an empty name");
            }
            let path = if rest.is_empty() { Path::empty() } else { self.path(rest, loc)? };
            Ok(PathRef::var(var, path))
        } else if body.is_empty() {
            Ok(PathRef::root(Path::empty()))
        } else {
            Ok(PathRef::root(self.path(body, loc)?))
        }
    }

    /// A root-only `$p` reference (lookup variable sources).
    fn root_path(&mut self, text: &str, loc: &str) -> R<Path> {
        let pr = self.path_ref(text, loc)?;
        match pr.var {
            None => Ok(pr.path),
            Some(_) => self.syntax(loc, "a variable reference is not allowed here"),
        }
    }

    fn whole_number(&mut self, v: &DValue, loc: &str) -> R<f64> {
        match v.as_number() {
            Some(n) if n.fract() == 0.0 => Ok(n),
            _ => self.syntax(loc, "expected an integer"),
        }
    }

    fn query(&mut self, v: &DValue, loc: &str) -> R<Query> {
        let o = self.object(v, loc)?;
        self.reject_unknown_fields(o, &["collection", "pipeline"], loc);
        let coll_loc = join_pointer(loc, "collection");
        let source = self
            .field(o, "collection", loc)
            .and_then(|v| self.string(v, &coll_loc))
            .map(str::to_string);
        let pipe_loc = join_pointer(loc, "pipeline");
        let stages_v = self.field(o, "pipeline", loc).and_then(|v| self.array(v, &pipe_loc));

        let mut stages = Vec::new();
        let mut ok = true;
        if let Ok(items) = stages_v {
            for (i, item) in items.iter().enumerate() {
                match self.stage(item, &join_pointer(&pipe_loc, &i.to_string())) {
                    Ok(s) => stages.push(s),
                    Err(()) => ok = false,
                }
            }
        } else {
            ok = false;
        }
        match (source, ok) {
            (Ok(source), true) => Ok(Query { source, stages }),
            _ => Err(()),
        }
    }

    fn stage(&mut self, v: &DValue, loc: &str) -> R<Stage> {
        let o = self.object(v, loc)?;
        let [(op, body)] = o.pairs() else {
            return self.syntax(loc, "a stage must have exactly one operator key");
        };
        let body_loc = join_pointer(loc, op);
        match op.as_str() {
            "$match" => Ok(Stage::Match(self.bool_expr(body, &body_loc)?)),
            "$unwind" => {
                let s = self.string(body, &body_loc)?.to_string();
                let pr = self.path_ref(&s, &body_loc)?;
                if pr.var.is_some() {
                    return self.syntax(&body_loc, "unwind takes a root path");
                }
                if pr.path.is_empty() {
                    return self.syntax(&body_loc, "unwind path must be non-empty");
                }
                Ok(Stage::Unwind(pr.path))
            }
            "$project" => self.project(body, &body_loc),
            "$group" => self.group(body, &body_loc),
            "$lookup" => self.lookup(body, &body_loc),
            "$graphLookup" => self.graph_lookup(body, &body_loc),
            "$unionWith" => Ok(Stage::UnionWith(Box::new(self.query(body, &body_loc)?))),
            "$count" => {
                let key = self.string(body, &body_loc)?.to_string();
                if key.is_empty() || key.contains('.') {
                    return self.syntax(&body_loc, "count takes a single non-empty key");
                }
                Ok(Stage::Count(key))
            }
            "$sort" => self.sort(body, &body_loc),
            "$limit" => {
                let n = self.whole_number(body, &body_loc)?;
                if n < 1.0 {
                    return self.invalid(&body_loc, "limit must be positive");
                }
                Ok(Stage::Limit(n as usize))
            }
            "$skip" => {
                let n = self.whole_number(body, &body_loc)?;
                if n < 1.0 {
                    return self.invalid(&body_loc, "skip must be positive");
                }
                Ok(Stage::Skip(n as usize))
            }
            other => self.syntax(loc, format!("unknown stage operator \"{other}\"")),
        }
    }

    fn project(&mut self, v: &DValue, loc: &str) -> R<Stage> {
        let o = self.object(v, loc)?;
        if o.pairs().is_empty() {
            return self.syntax(loc, "project needs at least one definition");
        }
        let mut defs: Vec<PathDefinition> = Vec::new();
        let mut ok = true;
        for (key, value) in o.iter() {
            let def_loc = join_pointer(loc, key);
            let parsed = self.index_free_path(key, &def_loc).and_then(|target| {
                // Targets must be pairwise incomparable under the prefix
                // order, or the merge contract breaks.
                if !target.is_compatible_with(defs.iter().map(|d| &d.target)) {
                    return self.invalid(
                        &def_loc,
                        format!("target \"{target}\" conflicts with an earlier target"),
                    );
                }
                let value = if value.as_number() == Some(1.0) {
                    Term::path(target.clone())
                } else {
                    self.term(value, &def_loc)?
                };
                Ok(PathDefinition { target, value })
            });
            match parsed {
                Ok(def) => defs.push(def),
                Err(()) => ok = false,
            }
        }
        if ok {
            Ok(Stage::Project(defs))
        } else {
            Err(())
        }
    }

    fn group(&mut self, v: &DValue, loc: &str) -> R<Stage> {
        let o = self.object(v, loc)?;
        self.reject_unknown_fields(o, &["_id", "collect"], loc);
        let id_loc = join_pointer(loc, "_id");
        let id = match self.field(o, "_id", loc)? {
            DValue::Literal(crate::dvalue::Literal::Null) => None,
            v => Some(self.string(v, &id_loc)?.to_string()),
        };
        let mut collect = Vec::new();
        if let Some(v) = o.get("collect") {
            let c_loc = join_pointer(loc, "collect");
            for (i, item) in self.array(v, &c_loc)?.iter().enumerate() {
                let k_loc = join_pointer(&c_loc, &i.to_string());
                let key = self.string(item, &k_loc)?.to_string();
                if key == "_id" {
                    return self.invalid(&k_loc, "\"_id\" cannot be collated");
                }
                if collect.contains(&key) {
                    return self.invalid(&k_loc, format!("duplicate collated key \"{key}\""));
                }
                collect.push(key);
            }
        }
        Ok(Stage::Group { id, collect })
    }

    fn lookup(&mut self, v: &DValue, loc: &str) -> R<Stage> {
        let o = self.object(v, loc)?;
        self.reject_unknown_fields(o, &["let", "pipeline", "as"], loc);
        let mut vars: Vec<VariableDefinition> = Vec::new();
        if let Some(v) = o.get("let") {
            let let_loc = join_pointer(loc, "let");
            for (name, source) in self.object(v, &let_loc)?.iter() {
                let v_loc = join_pointer(&let_loc, name);
                if vars.iter().any(|vd| vd.var == *name) {
                    return self.invalid(&v_loc, format!("duplicate variable \"{name}\""));
                }
                let s = self.string(source, &v_loc)?.to_string();
                let source = self.root_path(&s, &v_loc)?;
                vars.push(VariableDefinition { var: name.clone(), source });
            }
        }
        let pipe_loc = join_pointer(loc, "pipeline");
        let template = self.field(o, "pipeline", loc).and_then(|v| self.query(v, &pipe_loc))?;
        let as_loc = join_pointer(loc, "as");
        let as_text = self.field(o, "as", loc).and_then(|v| self.string(v, &as_loc))?.to_string();
        let as_ = self.index_free_path(&as_text, &as_loc)?;
        Ok(Stage::Lookup { vars, template: Box::new(template), as_ })
    }

    fn graph_lookup(&mut self, v: &DValue, loc: &str) -> R<Stage> {
        let o = self.object(v, loc)?;
        let fields = ["from", "startWith", "connectFromField", "connectToField", "as"];
        self.reject_unknown_fields(o, &fields, loc);
        let mut texts = Vec::new();
        for key in fields {
            let f_loc = join_pointer(loc, key);
            let text = self.field(o, key, loc).and_then(|v| self.string(v, &f_loc))?.to_string();
            texts.push((text, f_loc));
        }
        let from_coll = texts[0].0.clone();
        let start_with = {
            let (t, l) = &texts[1];
            let t = t.clone();
            let l = l.clone();
            self.root_path(&t, &l)?
        };
        let connect_from = {
            let (t, l) = (texts[2].0.clone(), texts[2].1.clone());
            self.path(&t, &l)?
        };
        let connect_to = {
            let (t, l) = (texts[3].0.clone(), texts[3].1.clone());
            self.path(&t, &l)?
        };
        let as_ = {
            let (t, l) = (texts[4].0.clone(), texts[4].1.clone());
            self.index_free_path(&t, &l)?
        };
        Ok(Stage::GraphLookup { from_coll, start_with, connect_from, connect_to, as_ })
    }

    fn sort(&mut self, v: &DValue, loc: &str) -> R<Stage> {
        let o = self.object(v, loc)?;
        if o.pairs().is_empty() {
            return self.syntax(loc, "sort needs at least one comparator");
        }
        let mut comparators = Vec::new();
        for (key, dir) in o.iter() {
            let c_loc = join_pointer(loc, key);
            let path = self.path(key, &c_loc)?;
            let direction = match dir.as_number() {
                Some(n) if n == 1.0 => SortDirection::Ascending,
                Some(n) if n == -1.0 => SortDirection::Descending,
                _ => return self.syntax(&c_loc, "sort direction must be 1 or -1"),
            };
            comparators.push(ObjectComparator { path, direction });
        }
        Ok(Stage::Sort(comparators))
    }

    const BOOL_OPS: [&'static str; 11] = [
        "$eq", "$ne", "$lt", "$lte", "$gt", "$gte", "$in", "$and", "$or", "$not", "$exists",
    ];

    fn term(&mut self, v: &DValue, loc: &str) -> R<Term> {
        match v {
            DValue::Literal(crate::dvalue::Literal::String(s)) => {
                if s.starts_with('$') {
                    Ok(Term::Path(self.path_ref(s, loc)?))
                } else {
                    Ok(Term::Const(v.clone()))
                }
            }
            DValue::Literal(_) => Ok(Term::Const(v.clone())),
            DValue::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    out.push(self.term(item, &join_pointer(loc, &i.to_string()))?);
                }
                Ok(Term::Array(out))
            }
            DValue::Object(o) => self.term_operator(o, loc),
        }
    }

    fn term_operator(&mut self, o: &Object, loc: &str) -> R<Term> {
        let [(op, body)] = o.pairs() else {
            return self.syntax(
                loc,
                "expected a single-operator object; use {\"$object\": …} for an object \
                 constructor or {\"$literal\": …} for a constant",
            );
        };
        let body_loc = join_pointer(loc, op);
        match op.as_str() {
            "$literal" => Ok(Term::Const(body.clone())),
            "$object" => {
                let fields = self.object(body, &body_loc)?;
                let mut out = Vec::new();
                for (k, v) in fields.iter() {
                    out.push((k.clone(), self.term(v, &join_pointer(&body_loc, k))?));
                }
                Ok(Term::Object(out))
            }
            "$cond" => {
                let parts = self.object(body, &body_loc)?.clone();
                self.reject_unknown_fields(&parts, &["if", "then", "else"], &body_loc);
                let cond = self
                    .field(&parts, "if", &body_loc)
                    .cloned()
                    .and_then(|v| self.bool_expr(&v, &join_pointer(&body_loc, "if")))?;
                let then = self
                    .field(&parts, "then", &body_loc)
                    .cloned()
                    .and_then(|v| self.term(&v, &join_pointer(&body_loc, "then")))?;
                let els = self
                    .field(&parts, "else", &body_loc)
                    .cloned()
                    .and_then(|v| self.term(&v, &join_pointer(&body_loc, "else")))?;
                Ok(Term::Cond { cond: Box::new(cond), then: Box::new(then), els: Box::new(els) })
            }
            "$map" => {
                let (input, var, body_loc, parts) =
                    self.binder_head(body, &body_loc, "in")?;
                let body = self
                    .field(&parts, "in", &body_loc)
                    .cloned()
                    .and_then(|v| self.term(&v, &join_pointer(&body_loc, "in")))?;
                Ok(Term::Map { input, var, body: Box::new(body) })
            }
            "$filter" => {
                let (input, var, body_loc, parts) =
                    self.binder_head(body, &body_loc, "cond")?;
                let cond = self
                    .field(&parts, "cond", &body_loc)
                    .cloned()
                    .and_then(|v| self.bool_expr(&v, &join_pointer(&body_loc, "cond")))?;
                Ok(Term::Filter { input, var, cond: Box::new(cond) })
            }
            "$fn" => {
                let parts = self.object(body, &body_loc)?.clone();
                self.reject_unknown_fields(&parts, &["name", "arg"], &body_loc);
                let name_loc = join_pointer(&body_loc, "name");
                let name = self
                    .field(&parts, "name", &body_loc)
                    .cloned()
                    .and_then(|v| self.string(&v, &name_loc).map(str::to_string))?;
                if !self.registry.contains(&name) {
                    return self.invalid(&name_loc, format!("unknown function \"{name}\""));
                }
                let arg = self
                    .field(&parts, "arg", &body_loc)
                    .cloned()
                    .and_then(|v| self.term(&v, &join_pointer(&body_loc, "arg")))?;
                Ok(Term::FnCall { name, arg: Box::new(arg) })
            }
            op if Self::BOOL_OPS.contains(&op) => self.syntax(
                loc,
                format!("Boolean operator \"{op}\" where a term was expected (wrap it in $cond)"),
            ),
            op => match op.strip_prefix('$') {
                // {"$size": t} is sugar for {"$fn": {"name": "size", "arg": t}}.
                Some(name) if self.registry.contains(name) => {
                    let arg = self.term(body, &body_loc)?;
                    Ok(Term::FnCall { name: name.to_string(), arg: Box::new(arg) })
                }
                _ => self.syntax(loc, format!("unknown operator \"{op}\"")),
            },
        }
    }

    /// Shared input/as head of $map and $filter.
    fn binder_head(
        &mut self,
        body: &DValue,
        loc: &str,
        third: &str,
    ) -> R<(PathRef, String, String, Object)> {
        let parts = self.object(body, loc)?.clone();
        self.reject_unknown_fields(&parts, &["input", "as", third], loc);
        let input_loc = join_pointer(loc, "input");
        let input_text = self
            .field(&parts, "input", loc)
            .cloned()
            .and_then(|v| self.string(&v, &input_loc).map(str::to_string))?;
        let input = self.path_ref(&input_text, &input_loc)?;
        let as_loc = join_pointer(loc, "as");
        let var = self
            .field(&parts, "as", loc)
            .cloned()
            .and_then(|v| self.string(&v, &as_loc).map(str::to_string))?;
        if var.is_empty() {
            return self.syntax(&as_loc, "binder name must be non-empty");
        }
        Ok((input, var, loc.to_string(), parts))
    }

    fn bool_expr(&mut self, v: &DValue, loc: &str) -> R<BoolExpr> {
        let o = self.object(v, loc)?;
        let [(op, body)] = o.pairs() else {
            return self.syntax(loc, "expected a single-operator Boolean object");
        };
        let body_loc = join_pointer(loc, op);
        match op.as_str() {
            "$eq" | "$ne" | "$lt" | "$lte" | "$gt" | "$gte" | "$in" => {
                let items = self.array(body, &body_loc)?;
                let [a, b] = items else {
                    return self.syntax(&body_loc, format!("{op} takes exactly two operands"));
                };
                let (a, b) = (a.clone(), b.clone());
                let ta = self.term(&a, &join_pointer(&body_loc, "0"))?;
                let tb = self.term(&b, &join_pointer(&body_loc, "1"))?;
                Ok(match op.as_str() {
                    "$eq" => BoolExpr::Eq(ta, tb),
                    "$ne" => BoolExpr::not(BoolExpr::Eq(ta, tb)),
                    "$lte" => BoolExpr::Lte(ta, tb),
                    // a < b ⇔ ¬(b ≤ a); a > b ⇔ ¬(a ≤ b); a ≥ b ⇔ b ≤ a.
                    "$lt" => BoolExpr::not(BoolExpr::Lte(tb, ta)),
                    "$gt" => BoolExpr::not(BoolExpr::Lte(ta, tb)),
                    "$gte" => BoolExpr::Lte(tb, ta),
                    _ => BoolExpr::In(ta, tb),
                })
            }
            "$and" | "$or" => {
                let items = self.array(body, &body_loc)?.to_vec();
                if items.is_empty() {
                    return self.syntax(&body_loc, format!("{op} takes at least one operand"));
                }
                let mut parsed = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    parsed.push(self.bool_expr(item, &join_pointer(&body_loc, &i.to_string()))?);
                }
                let mut out = parsed.pop().expect("non-empty");
                while let Some(e) = parsed.pop() {
                    out = if op == "$and" { BoolExpr::and(e, out) } else { BoolExpr::or(e, out) };
                }
                Ok(out)
            }
            "$not" => Ok(BoolExpr::not(self.bool_expr(body, &body_loc)?)),
            "$exists" => {
                let s = self.string(body, &body_loc)?.to_string();
                Ok(BoolExpr::Exists(self.path_ref(&s, &body_loc)?))
            }
            other => self.syntax(loc, format!("unknown Boolean operator \"{other}\"")),
        }
    }
}
