//! Evaluation of queries over database instances.
//!
//! Everything here is total and deterministic: the engine works on one
//! ordered representative of each bag and never errors on data shapes.

use std::collections::BTreeMap;

use crate::dvalue::{
    merge_or_override, merge_pair, mode_eq, natural_compare, override_path, Collection,
    DatabaseInstance, DValue, Object, SemanticsMode,
};
use crate::expr::{
    builtin_registry_for_mode, eval_term, satisfies, BoolExpr, EvalContext, FunctionRegistry,
    PathRef, Term,
};

use super::{ObjectComparator, PathDefinition, Query, SortDirection, Stage, VariableDefinition};

struct Engine<'a> {
    instance: &'a DatabaseInstance,
    registry: FunctionRegistry,
    mode: SemanticsMode,
}

/// Evaluates a validated query over an instance.  Unknown source
/// collections evaluate as empty.
pub fn eval_query(instance: &DatabaseInstance, q: &Query) -> Collection {
    let engine = Engine {
        instance,
        registry: builtin_registry_for_mode(instance.mode),
        mode: instance.mode,
    };
    engine.eval_query(q)
}

impl Engine<'_> {
    fn eval_query(&self, q: &Query) -> Collection {
        let mut coll: Collection = self.instance.collection(&q.source).to_vec();
        for stage in &q.stages {
            coll = self.eval_stage(coll, stage);
        }
        coll
    }

    fn eval_stage(&self, coll: Collection, stage: &Stage) -> Collection {
        match stage {
            Stage::Match(cond) => self.eval_match(coll, cond),
            Stage::Unwind(p) => self.eval_unwind(coll, p),
            Stage::Project(defs) => self.eval_project(coll, defs),
            Stage::Group { id, collect } => self.eval_group(coll, id.as_deref(), collect),
            Stage::Lookup { vars, template, as_ } => self.eval_lookup(coll, vars, template, as_),
            Stage::GraphLookup { from_coll, start_with, connect_from, connect_to, as_ } => {
                self.eval_graphlookup(coll, from_coll, start_with, connect_from, connect_to, as_)
            }
            Stage::UnionWith(q) => {
                let mut out = coll;
                out.extend(self.eval_query(q));
                out
            }
            Stage::Count(key) => {
                let mut o = Object::new();
                o.push(key.clone(), DValue::number(coll.len() as f64));
                vec![o]
            }
            Stage::Sort(comparators) => self.eval_sort(coll, comparators),
            Stage::Limit(m) => coll.into_iter().take(*m).collect(),
            Stage::Skip(m) => coll.into_iter().skip(*m).collect(),
        }
    }

    fn eval_match(&self, coll: Collection, cond: &BoolExpr) -> Collection {
        coll.into_iter()
            .filter(|o| {
                let mut ctx = EvalContext::for_object(o);
                satisfies(&mut ctx, cond, &self.registry, self.mode)
            })
            .collect()
    }

    fn eval_unwind(&self, coll: Collection, p: &crate::dvalue::Path) -> Collection {
        let mut out = Vec::new();
        for o in coll {
            // Only array values unwind; scalars, objects, and missing
            // paths contribute no output documents.
            if let DValue::Array(items) = DValue::Object(o.clone()).eval_path(p) {
                for item in items {
                    out.push(override_path(&o, p, item));
                }
            }
        }
        out
    }

    fn eval_project(&self, coll: Collection, defs: &[PathDefinition]) -> Collection {
        coll.into_iter()
            .map(|o| {
                let mut ctx = EvalContext::for_object(&o);
                let mut out = Object::new();
                for def in defs {
                    let v = eval_term(&mut ctx, &def.value, &self.registry, self.mode);
                    out = merge_pair(&out, &def.target, v);
                }
                out
            })
            .collect()
    }

    fn eval_group(&self, coll: Collection, id: Option<&str>, collect: &[String]) -> Collection {
        // Classes keep first-appearance order, as do their members.
        let mut classes: Vec<(DValue, Vec<Object>)> = Vec::new();
        for o in coll {
            let class_id = id
                .and_then(|g| o.get(g).cloned())
                .unwrap_or(DValue::null());
            match classes.iter_mut().find(|(cid, _)| mode_eq(cid, &class_id, self.mode)) {
                Some((_, members)) => members.push(o),
                None => classes.push((class_id, vec![o])),
            }
        }
        classes
            .into_iter()
            .map(|(class_id, members)| {
                let mut out = Object::new();
                out.push("_id", class_id);
                for key in collect {
                    // Absent keys contribute nothing; explicit nulls are
                    // collected.
                    let values: Vec<DValue> =
                        members.iter().filter_map(|m| m.get(key).cloned()).collect();
                    out.push(key.clone(), DValue::Array(values));
                }
                out
            })
            .collect()
    }

    fn eval_lookup(
        &self,
        coll: Collection,
        vars: &[VariableDefinition],
        template: &Query,
        as_: &crate::dvalue::Path,
    ) -> Collection {
        coll.into_iter()
            .map(|o| {
                let grounded = ground_template(template, vars, &o);
                let results: Vec<DValue> =
                    self.eval_query(&grounded).into_iter().map(DValue::Object).collect();
                merge_or_override(&o, as_, DValue::Array(results))
            })
            .collect()
    }

    fn eval_graphlookup(
        &self,
        coll: Collection,
        from_coll: &str,
        start_with: &crate::dvalue::Path,
        connect_from: &crate::dvalue::Path,
        connect_to: &crate::dvalue::Path,
        as_: &crate::dvalue::Path,
    ) -> Collection {
        let external = self.instance.collection(from_coll);
        let to_values: Vec<DValue> = external
            .iter()
            .map(|t| DValue::Object(t.clone()).eval_path(connect_to))
            .collect();
        let from_values: Vec<DValue> = external
            .iter()
            .map(|t| DValue::Object(t.clone()).eval_path(connect_from))
            .collect();

        coll.into_iter()
            .map(|o| {
                // Direct successors of the input document, then a fixpoint
                // over the external relation.
                let seed = DValue::Object(o.clone()).eval_path(start_with);
                let mut reached = vec![false; external.len()];
                let mut frontier: Vec<usize> = (0..external.len())
                    .filter(|&j| mode_eq(&seed, &to_values[j], self.mode))
                    .collect();
                for &j in &frontier {
                    reached[j] = true;
                }
                while let Some(i) = frontier.pop() {
                    for j in 0..external.len() {
                        if !reached[j] && mode_eq(&from_values[i], &to_values[j], self.mode) {
                            reached[j] = true;
                            frontier.push(j);
                        }
                    }
                }
                // Distinct targets in external-collection order.
                let mut targets: Vec<DValue> = Vec::new();
                for (j, hit) in reached.iter().enumerate() {
                    if *hit {
                        let t = DValue::Object(external[j].clone());
                        if !targets.iter().any(|seen| mode_eq(seen, &t, self.mode)) {
                            targets.push(t);
                        }
                    }
                }
                merge_or_override(&o, as_, DValue::Array(targets))
            })
            .collect()
    }

    fn eval_sort(&self, mut coll: Collection, comparators: &[ObjectComparator]) -> Collection {
        coll.sort_by(|a, b| {
            for c in comparators {
                let va = DValue::Object(a.clone()).eval_path(&c.path);
                let vb = DValue::Object(b.clone()).eval_path(&c.path);
                let ord = natural_compare(&va, &vb, self.mode);
                let ord = match c.direction {
                    SortDirection::Ascending => ord,
                    SortDirection::Descending => ord.reverse(),
                };
                if ord != std::cmp::Ordering::Equal {
                    return ord;
                }
            }
            std::cmp::Ordering::Equal
        });
        coll
    }
}

/// Substitutes a lookup's variables with the d-values read from `o`,
/// producing a closed query.  Inner map/filter binders and nested lookup
/// variable sets shadow outer variables of the same name.
pub fn ground_template(template: &Query, vars: &[VariableDefinition], o: &Object) -> Query {
    let bindings: BTreeMap<String, DValue> = vars
        .iter()
        .map(|vd| (vd.var.clone(), DValue::Object(o.clone()).eval_path(&vd.source)))
        .collect();
    subst_query(template, &bindings)
}

fn without<'a>(
    bindings: &'a BTreeMap<String, DValue>,
    shadowed: &str,
) -> BTreeMap<String, DValue> {
    let mut out = bindings.clone();
    out.remove(shadowed);
    out
}

fn subst_query(q: &Query, bindings: &BTreeMap<String, DValue>) -> Query {
    if bindings.is_empty() {
        return q.clone();
    }
    Query {
        source: q.source.clone(),
        stages: q.stages.iter().map(|s| subst_stage(s, bindings)).collect(),
    }
}

fn subst_stage(s: &Stage, bindings: &BTreeMap<String, DValue>) -> Stage {
    match s {
        Stage::Match(cond) => Stage::Match(subst_bool(cond, bindings)),
        Stage::Project(defs) => Stage::Project(
            defs.iter()
                .map(|d| PathDefinition {
                    target: d.target.clone(),
                    value: subst_term(&d.value, bindings),
                })
                .collect(),
        ),
        Stage::Lookup { vars, template, as_ } => {
            let mut inner = bindings.clone();
            for vd in vars {
                inner.remove(&vd.var);
            }
            Stage::Lookup {
                vars: vars.clone(),
                template: Box::new(subst_query(template, &inner)),
                as_: as_.clone(),
            }
        }
        Stage::UnionWith(q) => Stage::UnionWith(Box::new(subst_query(q, bindings))),
        other => other.clone(),
    }
}

fn subst_path_ref(pr: &PathRef, bindings: &BTreeMap<String, DValue>) -> Option<DValue> {
    match &pr.var {
        Some(x) => bindings.get(x).map(|v| v.eval_path(&pr.path)),
        None => None,
    }
}

fn subst_term(t: &Term, bindings: &BTreeMap<String, DValue>) -> Term {
    match t {
        Term::Const(_) => t.clone(),
        Term::Path(pr) => match subst_path_ref(pr, bindings) {
            Some(v) => Term::Const(v),
            None => t.clone(),
        },
        Term::Array(items) => {
            Term::Array(items.iter().map(|it| subst_term(it, bindings)).collect())
        }
        Term::Object(fields) => Term::Object(
            fields.iter().map(|(k, it)| (k.clone(), subst_term(it, bindings))).collect(),
        ),
        Term::FnCall { name, arg } => {
            Term::FnCall { name: name.clone(), arg: Box::new(subst_term(arg, bindings)) }
        }
        Term::Cond { cond, then, els } => Term::Cond {
            cond: Box::new(subst_bool(cond, bindings)),
            then: Box::new(subst_term(then, bindings)),
            els: Box::new(subst_term(els, bindings)),
        },
        Term::Map { input, var, body } => {
            let inner = without(bindings, var);
            Term::Map {
                input: subst_input(input, bindings),
                var: var.clone(),
                body: Box::new(subst_term(body, &inner)),
            }
        }
        Term::Filter { input, var, cond } => {
            let inner = without(bindings, var);
            Term::Filter {
                input: subst_input(input, bindings),
                var: var.clone(),
                cond: Box::new(subst_bool(cond, &inner)),
            }
        }
    }
}

/// Map/filter inputs are path references; a substituted one would become a
/// constant, which the input slot cannot hold.  Validation requires lookup
/// variables and map inputs not to collide, so this only resolves inputs
/// headed by map variables (left alone) or root paths.
fn subst_input(input: &PathRef, _bindings: &BTreeMap<String, DValue>) -> PathRef {
    input.clone()
}

fn subst_bool(e: &BoolExpr, bindings: &BTreeMap<String, DValue>) -> BoolExpr {
    match e {
        BoolExpr::Exists(pr) => match subst_path_ref(pr, bindings) {
            // ∃ of a known value is a constant comparison against null.
            Some(v) => BoolExpr::not(BoolExpr::Eq(Term::Const(v), Term::null())),
            None => e.clone(),
        },
        BoolExpr::Eq(a, b) => BoolExpr::Eq(subst_term(a, bindings), subst_term(b, bindings)),
        BoolExpr::Lte(a, b) => BoolExpr::Lte(subst_term(a, bindings), subst_term(b, bindings)),
        BoolExpr::In(a, b) => BoolExpr::In(subst_term(a, bindings), subst_term(b, bindings)),
        BoolExpr::Not(inner) => BoolExpr::not(subst_bool(inner, bindings)),
        BoolExpr::And(a, b) => {
            BoolExpr::and(subst_bool(a, bindings), subst_bool(b, bindings))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvalue::{parse_dvalue, Path};

    fn p(text: &str) -> Path {
        Path::parse(text).unwrap()
    }

    fn obj(text: &str) -> Object {
        match parse_dvalue(text).unwrap() {
            DValue::Object(o) => o,
            _ => panic!("expected object"),
        }
    }

    fn instance(colls: &[(&str, &[&str])]) -> DatabaseInstance {
        let mut i = DatabaseInstance::new(SemanticsMode::Ordered);
        for (name, docs) in colls {
            i.collections
                .insert(name.to_string(), docs.iter().map(|d| obj(d)).collect());
        }
        i
    }

    fn bands() -> DatabaseInstance {
        instance(&[(
            "bands",
            &[
                r#"{"_id": 1, "name": "Queen", "origin": "UK",
                    "albums": [{"title": "Queen", "release": 1973},
                               {"title": "A Night at the Opera", "release": 1975}]}"#,
                r#"{"_id": 2, "name": "ABBA", "origin": "Sweden",
                    "albums": [{"title": "Waterloo", "release": 1974}]}"#,
                r#"{"_id": 3, "name": "Tinariwen", "origin": "Mali", "albums": 7}"#,
            ],
        )])
    }

    #[test]
    fn unknown_collection_is_empty() {
        let i = bands();
        assert!(eval_query(&i, &Query::new("nope", vec![])).is_empty());
    }

    #[test]
    fn match_filters_documents() {
        let i = bands();
        let q = Query::new(
            "bands",
            vec![Stage::Match(BoolExpr::Eq(
                Term::path(p("origin")),
                Term::Const(DValue::string("UK")),
            ))],
        );
        let out = eval_query(&i, &q);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].get("name"), Some(&DValue::string("Queen")));
    }

    #[test]
    fn unwind_replaces_the_array_in_place() {
        let i = bands();
        let q = Query::new("bands", vec![Stage::Unwind(p("albums"))]);
        let out = eval_query(&i, &q);
        // Queen contributes two documents, ABBA one; Tinariwen's scalar
        // `albums` contributes none.
        assert_eq!(out.len(), 3);
        assert_eq!(
            out[0].get("albums"),
            Some(&parse_dvalue(r#"{"title": "Queen", "release": 1973}"#).unwrap())
        );
        assert_eq!(out[2].get("name"), Some(&DValue::string("ABBA")));
    }

    #[test]
    fn unwind_of_empty_array_emits_nothing() {
        let i = instance(&[("c", &[r#"{"_id": 1, "xs": []}"#])]);
        let out = eval_query(&i, &Query::new("c", vec![Stage::Unwind(p("xs"))]));
        assert!(out.is_empty());
    }

    #[test]
    fn project_merges_definitions_left_to_right() {
        let i = bands();
        let q = Query::new(
            "bands",
            vec![Stage::Project(vec![
                PathDefinition::idle(p("name")),
                PathDefinition {
                    target: p("albums_number"),
                    value: Term::FnCall {
                        name: "size".into(),
                        arg: Box::new(Term::path(p("albums"))),
                    },
                },
            ])],
        );
        let out = eval_query(&i, &q);
        assert_eq!(
            DValue::Object(out[0].clone()),
            parse_dvalue(r#"{"name": "Queen", "albums_number": 2}"#).unwrap()
        );
        // size of a scalar is null, and null-valued merges leave the
        // accumulator unchanged.
        assert_eq!(
            DValue::Object(out[2].clone()),
            parse_dvalue(r#"{"name": "Tinariwen"}"#).unwrap()
        );
    }

    #[test]
    fn group_classes_keep_first_appearance_order() {
        let i = instance(&[(
            "c",
            &[
                r#"{"g": "b", "v": 1}"#,
                r#"{"g": "a", "v": 2}"#,
                r#"{"g": "b", "v": 3}"#,
                r#"{"v": 4}"#,
                r#"{"g": null, "v": 5}"#,
            ],
        )]);
        let q = Query::new(
            "c",
            vec![Stage::Group { id: Some("g".into()), collect: vec!["v".into()] }],
        );
        let out = eval_query(&i, &q);
        let printed: Vec<DValue> = out.into_iter().map(DValue::Object).collect();
        // The missing key and the explicit null land in the same class.
        assert_eq!(
            printed,
            vec![
                parse_dvalue(r#"{"_id": "b", "v": [1, 3]}"#).unwrap(),
                parse_dvalue(r#"{"_id": "a", "v": [2]}"#).unwrap(),
                parse_dvalue(r#"{"_id": null, "v": [4, 5]}"#).unwrap(),
            ]
        );
    }

    #[test]
    fn group_without_id_forms_a_single_class() {
        let i = bands();
        let q = Query::new(
            "c_missing",
            vec![Stage::Group { id: None, collect: vec![] }],
        );
        // An empty input still means no classes at all.
        assert!(eval_query(&i, &q).is_empty());

        let q = Query::new("bands", vec![Stage::Group { id: None, collect: vec!["name".into()] }]);
        let out = eval_query(&i, &q);
        assert_eq!(
            DValue::Object(out[0].clone()),
            parse_dvalue(r#"{"_id": null, "name": ["Queen", "ABBA", "Tinariwen"]}"#).unwrap()
        );
    }

    #[test]
    fn group_skips_absent_keys_but_collects_explicit_nulls() {
        let i = instance(&[("c", &[r#"{"v": null}"#, r#"{"w": 1}"#])]);
        let q = Query::new("c", vec![Stage::Group { id: None, collect: vec!["v".into()] }]);
        let out = eval_query(&i, &q);
        assert_eq!(
            DValue::Object(out[0].clone()),
            parse_dvalue(r#"{"_id": null, "v": [null]}"#).unwrap()
        );
    }

    #[test]
    fn lookup_grounds_the_template_per_document() {
        let i = instance(&[
            ("bands", &[r#"{"_id": 1, "name": "Queen"}"#, r#"{"_id": 2, "name": "ABBA"}"#]),
            (
                "songs",
                &[
                    r#"{"_id": 10, "band": "Queen", "title": "Bohemian Rhapsody"}"#,
                    r#"{"_id": 11, "band": "ABBA", "title": "Waterloo"}"#,
                    r#"{"_id": 12, "band": "Queen", "title": "'39"}"#,
                ],
            ),
        ]);
        let template = Query::new(
            "songs",
            vec![
                Stage::Match(BoolExpr::Eq(
                    Term::path(p("band")),
                    Term::Path(PathRef::var("b", Path::empty())),
                )),
                Stage::Project(vec![PathDefinition::idle(p("title"))]),
            ],
        );
        let q = Query::new(
            "bands",
            vec![Stage::Lookup {
                vars: vec![VariableDefinition { var: "b".into(), source: p("name") }],
                template: Box::new(template),
                as_: p("songs"),
            }],
        );
        let out = eval_query(&i, &q);
        assert_eq!(
            out[0].get("songs"),
            Some(
                &parse_dvalue(r#"[{"title": "Bohemian Rhapsody"}, {"title": "'39"}]"#).unwrap()
            )
        );
        assert_eq!(
            out[1].get("songs"),
            Some(&parse_dvalue(r#"[{"title": "Waterloo"}]"#).unwrap())
        );
    }

    #[test]
    fn lookup_with_no_matches_attaches_an_empty_array() {
        let i = instance(&[("bands", &[r#"{"_id": 1, "name": "Queen"}"#])]);
        let template = Query::new("songs", vec![]);
        let q = Query::new(
            "bands",
            vec![Stage::Lookup { vars: vec![], template: Box::new(template), as_: p("songs") }],
        );
        let out = eval_query(&i, &q);
        assert_eq!(out[0].get("songs"), Some(&parse_dvalue("[]").unwrap()));
    }

    #[test]
    fn graphlookup_collects_the_transitive_closure() {
        // 5 samples 6, 6 samples 7: starting from 5's sampled list we reach
        // 6 directly and 7 through it.
        let i = instance(&[(
            "songs",
            &[
                r#"{"_id": 5, "sampled": 6}"#,
                r#"{"_id": 6, "sampled": 7}"#,
                r#"{"_id": 7}"#,
                r#"{"_id": 8, "sampled": 5}"#,
            ],
        )]);
        let q = Query::new(
            "songs",
            vec![Stage::GraphLookup {
                from_coll: "songs".into(),
                start_with: p("sampled"),
                connect_from: p("sampled"),
                connect_to: p("_id"),
                as_: p("uses"),
            }],
        );
        let out = eval_query(&i, &q);
        let ids = |o: &Object| -> Vec<f64> {
            o.get("uses")
                .and_then(DValue::as_array)
                .unwrap()
                .iter()
                .map(|t| t.eval_path(&p("_id")).as_number().unwrap())
                .collect()
        };
        assert_eq!(ids(&out[0]), vec![6.0, 7.0]);
        assert_eq!(ids(&out[1]), vec![7.0]);
        assert_eq!(ids(&out[2]), Vec::<f64>::new());
        // From 8 the chain walks 5 → 6 → 7; order follows the external
        // collection, not discovery.
        assert_eq!(ids(&out[3]), vec![5.0, 6.0, 7.0]);
    }

    #[test]
    fn union_appends_the_second_operand() {
        let i = instance(&[
            ("a", &[r#"{"x": 1}"#, r#"{"x": 2}"#]),
            ("b", &[r#"{"x": 3}"#]),
        ]);
        let q = Query::new("a", vec![Stage::UnionWith(Box::new(Query::new("b", vec![])))]);
        let out = eval_query(&i, &q);
        let xs: Vec<&DValue> = out.iter().map(|o| o.get("x").unwrap()).collect();
        assert_eq!(xs, vec![&DValue::number(1.0), &DValue::number(2.0), &DValue::number(3.0)]);
    }

    #[test]
    fn count_wraps_the_cardinality() {
        let i = bands();
        let q = Query::new("bands", vec![Stage::Count("n".into())]);
        assert_eq!(
            eval_query(&i, &q),
            vec![obj(r#"{"n": 3}"#)]
        );
    }

    #[test]
    fn sort_is_stable_and_lexicographic() {
        let i = instance(&[(
            "c",
            &[
                r#"{"a": 2, "tag": "first"}"#,
                r#"{"a": 1, "b": 2}"#,
                r#"{"a": 2, "tag": "second"}"#,
                r#"{"a": 1, "b": 1}"#,
            ],
        )]);
        let q = Query::new(
            "c",
            vec![Stage::Sort(vec![
                ObjectComparator { path: p("a"), direction: SortDirection::Ascending },
                ObjectComparator { path: p("b"), direction: SortDirection::Descending },
            ])],
        );
        let out = eval_query(&i, &q);
        let printed: Vec<DValue> = out.into_iter().map(DValue::Object).collect();
        assert_eq!(
            printed,
            vec![
                parse_dvalue(r#"{"a": 1, "b": 2}"#).unwrap(),
                parse_dvalue(r#"{"a": 1, "b": 1}"#).unwrap(),
                // Equal keys keep input order.
                parse_dvalue(r#"{"a": 2, "tag": "first"}"#).unwrap(),
                parse_dvalue(r#"{"a": 2, "tag": "second"}"#).unwrap(),
            ]
        );
    }

    #[test]
    fn limit_and_skip_slice_the_sequence() {
        let i = bands();
        let take = eval_query(&i, &Query::new("bands", vec![Stage::Limit(2)]));
        assert_eq!(take.len(), 2);
        let rest = eval_query(&i, &Query::new("bands", vec![Stage::Skip(2)]));
        assert_eq!(rest.len(), 1);
        assert_eq!(rest[0].get("name"), Some(&DValue::string("Tinariwen")));
        assert!(eval_query(&i, &Query::new("bands", vec![Stage::Skip(9)])).is_empty());
    }

    #[test]
    fn grounding_substitutes_paths_and_exists() {
        let template = Query::new(
            "songs",
            vec![Stage::Match(BoolExpr::and(
                BoolExpr::Eq(Term::path(p("band")), Term::Path(PathRef::var("b", p("name")))),
                BoolExpr::Exists(PathRef::var("b", p("origin"))),
            ))],
        );
        let o = obj(r#"{"info": {"name": "Queen", "origin": "UK"}}"#);
        let vars = vec![VariableDefinition { var: "b".into(), source: p("info") }];
        let grounded = ground_template(&template, &vars, &o);
        let expected = Query::new(
            "songs",
            vec![Stage::Match(BoolExpr::and(
                BoolExpr::Eq(Term::path(p("band")), Term::Const(DValue::string("Queen"))),
                BoolExpr::not(BoolExpr::Eq(Term::Const(DValue::string("UK")), Term::null())),
            ))],
        );
        assert_eq!(grounded, expected);
    }

    #[test]
    fn grounding_respects_map_binder_shadowing() {
        // map(xs, b, b.name) must not substitute the lookup variable b.
        let body = Term::Path(PathRef::var("b", p("name")));
        let template = Query::new(
            "songs",
            vec![Stage::Project(vec![PathDefinition {
                target: p("out"),
                value: Term::Map {
                    input: PathRef::root(p("xs")),
                    var: "b".into(),
                    body: Box::new(body.clone()),
                },
            }])],
        );
        let o = obj(r#"{"name": "Queen"}"#);
        let vars = vec![VariableDefinition { var: "b".into(), source: Path::empty() }];
        let grounded = ground_template(&template, &vars, &o);
        match &grounded.stages[0] {
            Stage::Project(defs) => match &defs[0].value {
                Term::Map { body: b, .. } => assert_eq!(**b, body),
                other => panic!("unexpected term {other:?}"),
            },
            other => panic!("unexpected stage {other:?}"),
        }
    }

    #[test]
    fn nested_lookup_vars_shadow_outer_ones() {
        let inner_template = Query::new(
            "t",
            vec![Stage::Match(BoolExpr::Eq(
                Term::Path(PathRef::var("b", Path::empty())),
                Term::null(),
            ))],
        );
        let template = Query::new(
            "songs",
            vec![Stage::Lookup {
                vars: vec![VariableDefinition { var: "b".into(), source: p("k") }],
                template: Box::new(inner_template.clone()),
                as_: p("r"),
            }],
        );
        let o = obj(r#"{"name": "Queen"}"#);
        let vars = vec![VariableDefinition { var: "b".into(), source: p("name") }];
        let grounded = ground_template(&template, &vars, &o);
        match &grounded.stages[0] {
            Stage::Lookup { template: t, .. } => assert_eq!(**t, inner_template),
            other => panic!("unexpected stage {other:?}"),
        }
    }
}
