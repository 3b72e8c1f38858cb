//! A second, deliberately naive evaluator used as a differential oracle.
//!
//! Each stage is written as a direct set-builder transcription with no
//! shared control flow with the engine: grouping re-scans the input per
//! class, the graph stage iterates a fixpoint over the whole external
//! collection instead of keeping a frontier, and sorting repeatedly
//! extracts minima instead of calling a sort.  Expression evaluation and
//! the merge operators are the shared data-model primitives; what this
//! module double-checks is the stage logic built on top of them.

use crate::dvalue::{
    merge_or_override, merge_pair, mode_eq, natural_compare, override_path, Collection, DValue,
    DatabaseInstance, Object, Path, SemanticsMode,
};
use crate::engine::{ground_template, ObjectComparator, Query, SortDirection, Stage};
use crate::expr::{builtin_registry_for_mode, eval_term, satisfies, EvalContext, FunctionRegistry};

/// Evaluates a query with the naive stage implementations.
pub fn oracle_eval(instance: &DatabaseInstance, q: &Query) -> Collection {
    let registry = builtin_registry_for_mode(instance.mode);
    let mut docs: Collection = instance.collection(&q.source).to_vec();
    for stage in &q.stages {
        docs = apply(instance, &registry, docs, stage);
    }
    docs
}

fn value_at(o: &Object, p: &Path) -> DValue {
    DValue::Object(o.clone()).eval_path(p)
}

fn apply(
    instance: &DatabaseInstance,
    registry: &FunctionRegistry,
    input: Collection,
    stage: &Stage,
) -> Collection {
    let mode = instance.mode;
    match stage {
        Stage::Match(cond) => {
            let mut out = Vec::new();
            for o in input {
                let mut ctx = EvalContext::for_object(&o);
                if satisfies(&mut ctx, cond, registry, mode) {
                    out.push(o);
                }
            }
            out
        }
        Stage::Unwind(p) => {
            let mut out = Vec::new();
            for o in input {
                if let DValue::Array(items) = value_at(&o, p) {
                    for item in items {
                        out.push(override_path(&o, p, item));
                    }
                }
            }
            out
        }
        Stage::Project(defs) => {
            let mut out = Vec::new();
            for o in input {
                let mut ctx = EvalContext::for_object(&o);
                let mut doc = Object::new();
                for def in defs {
                    let v = eval_term(&mut ctx, &def.value, registry, mode);
                    doc = merge_pair(&doc, &def.target, v);
                }
                out.push(doc);
            }
            out
        }
        Stage::Group { id, collect } => {
            let class_of = |o: &Object| -> DValue {
                match id {
                    Some(g) => o.get(g).cloned().unwrap_or(DValue::null()),
                    None => DValue::null(),
                }
            };
            // Distinct class identifiers, in first-appearance order; then a
            // fresh pass over the whole input for every class.
            let mut class_ids: Vec<DValue> = Vec::new();
            for o in &input {
                let cid = class_of(o);
                if !class_ids.iter().any(|seen| mode_eq(seen, &cid, mode)) {
                    class_ids.push(cid);
                }
            }
            let mut out = Vec::new();
            for cid in class_ids {
                let members: Vec<&Object> =
                    input.iter().filter(|o| mode_eq(&class_of(o), &cid, mode)).collect();
                let mut doc = Object::new();
                doc.push("_id", cid);
                for key in collect {
                    let values: Vec<DValue> =
                        members.iter().filter_map(|m| m.get(key).cloned()).collect();
                    doc.push(key.clone(), DValue::Array(values));
                }
                out.push(doc);
            }
            out
        }
        Stage::Lookup { vars, template, as_ } => {
            let mut out = Vec::new();
            for o in input {
                let grounded = ground_template(template, vars, &o);
                let answers: Vec<DValue> =
                    oracle_eval(instance, &grounded).into_iter().map(DValue::Object).collect();
                out.push(merge_or_override(&o, as_, DValue::Array(answers)));
            }
            out
        }
        Stage::GraphLookup { from_coll, start_with, connect_from, connect_to, as_ } => {
            let external = instance.collection(from_coll);
            let mut out = Vec::new();
            for o in input {
                let seed = value_at(&o, start_with);
                // Iterate membership to a fixpoint: a target is reached if
                // its connect-to value meets the seed, or the connect-from
                // value of any already-reached target.
                let mut reached = vec![false; external.len()];
                loop {
                    let mut changed = false;
                    for j in 0..external.len() {
                        if reached[j] {
                            continue;
                        }
                        let to = value_at(&external[j], connect_to);
                        let hit = mode_eq(&seed, &to, mode)
                            || (0..external.len()).any(|i| {
                                reached[i]
                                    && mode_eq(&value_at(&external[i], connect_from), &to, mode)
                            });
                        if hit {
                            reached[j] = true;
                            changed = true;
                        }
                    }
                    if !changed {
                        break;
                    }
                }
                let mut targets: Vec<DValue> = Vec::new();
                for (j, hit) in reached.iter().enumerate() {
                    if *hit {
                        let t = DValue::Object(external[j].clone());
                        if !targets.iter().any(|seen| mode_eq(seen, &t, mode)) {
                            targets.push(t);
                        }
                    }
                }
                out.push(merge_or_override(&o, as_, DValue::Array(targets)));
            }
            out
        }
        Stage::UnionWith(q) => {
            let mut out = input;
            out.extend(oracle_eval(instance, q));
            out
        }
        Stage::Count(key) => {
            let mut doc = Object::new();
            doc.push(key.clone(), DValue::number(input.len() as f64));
            vec![doc]
        }
        Stage::Sort(comparators) => selection_sort(input, comparators, mode),
        Stage::Limit(m) => input.into_iter().take(*m).collect(),
        Stage::Skip(m) => input.into_iter().skip(*m).collect(),
    }
}

fn compare_docs(
    a: &Object,
    b: &Object,
    comparators: &[ObjectComparator],
    mode: SemanticsMode,
) -> std::cmp::Ordering {
    for c in comparators {
        let ord = natural_compare(&value_at(a, &c.path), &value_at(b, &c.path), mode);
        let ord = match c.direction {
            SortDirection::Ascending => ord,
            SortDirection::Descending => ord.reverse(),
        };
        if ord != std::cmp::Ordering::Equal {
            return ord;
        }
    }
    std::cmp::Ordering::Equal
}

/// Stable selection sort: repeatedly extract the first minimal document.
fn selection_sort(
    mut input: Collection,
    comparators: &[ObjectComparator],
    mode: SemanticsMode,
) -> Collection {
    let mut out = Vec::with_capacity(input.len());
    while !input.is_empty() {
        let mut best = 0;
        for i in 1..input.len() {
            if compare_docs(&input[i], &input[best], comparators, mode)
                == std::cmp::Ordering::Less
            {
                best = i;
            }
        }
        out.push(input.remove(best));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{load_instance, parse_query};

    fn check(instance_text: &str, query_text: &str) {
        let i = load_instance(instance_text, SemanticsMode::Ordered).unwrap();
        let q = parse_query(query_text).unwrap();
        let engine = crate::engine::eval_query(&i, &q);
        let oracle = oracle_eval(&i, &q);
        assert_eq!(engine, oracle, "query {query_text}");
    }

    #[test]
    fn oracle_matches_the_engine_on_a_grouping_pipeline() {
        check(
            r#"{"c": [{"_id": 1, "g": "x", "v": 1}, {"_id": 2, "v": 2},
                     {"_id": 3, "g": "x", "v": 3}, {"_id": 4, "g": null}]}"#,
            r#"{"collection": "c", "pipeline": [
                {"$group": {"_id": "g", "collect": ["v"]}}]}"#,
        );
    }

    #[test]
    fn oracle_matches_the_engine_on_a_graph_pipeline() {
        check(
            r#"{"s": [{"_id": 1, "n": 2}, {"_id": 2, "n": 3}, {"_id": 3}, {"_id": 4, "n": 1}]}"#,
            r#"{"collection": "s", "pipeline": [
                {"$graphLookup": {"from": "s", "startWith": "$n",
                                  "connectFromField": "n", "connectToField": "_id",
                                  "as": "r"}}]}"#,
        );
    }

    #[test]
    fn oracle_sort_is_stable_like_the_engine() {
        check(
            r#"{"c": [{"_id": 1, "a": 2, "t": "p"}, {"_id": 2, "a": 1},
                     {"_id": 3, "a": 2, "t": "q"}, {"_id": 4}]}"#,
            r#"{"collection": "c", "pipeline": [{"$sort": {"a": 1}}, {"$limit": 3}]}"#,
        );
    }
}
