//! Bag comparison of query answers and the differential-equivalence check.

use crate::dvalue::{mode_eq, Collection, DValue, DatabaseInstance, Object, SemanticsMode};
use crate::engine::{eval_query, Query};
use crate::syntax::instance_to_dvalue;

/// A witness that two queries disagree on some instance: a document whose
/// multiplicities in the two answers differ.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub instance: DatabaseInstance,
    pub left: Collection,
    pub right: Collection,
    pub witness: DValue,
    pub left_count: usize,
    pub right_count: usize,
}

/// The outcome of checking two queries across a set of instances.
#[derive(Clone, Debug)]
pub struct EquivReport {
    pub instances_checked: usize,
    pub counterexample: Option<Counterexample>,
}

impl EquivReport {
    pub fn is_equal(&self) -> bool {
        self.counterexample.is_none()
    }

    /// A JSON value with everything needed to replay the result by hand:
    /// the instance, both answers, and the disagreeing witness.
    pub fn to_dvalue(&self) -> DValue {
        let mut o = Object::new();
        match &self.counterexample {
            None => o.push("verdict", DValue::string("equal")),
            Some(cx) => {
                o.push("verdict", DValue::string("counterexample"));
                let mut c = Object::new();
                c.push("instance", instance_to_dvalue(&cx.instance));
                c.push("left", collection_value(&cx.left));
                c.push("right", collection_value(&cx.right));
                c.push("witness", cx.witness.clone());
                c.push("leftCount", DValue::number(cx.left_count as f64));
                c.push("rightCount", DValue::number(cx.right_count as f64));
                o.push("counterexample", DValue::Object(c));
            }
        }
        o.push("instancesChecked", DValue::number(self.instances_checked as f64));
        DValue::Object(o)
    }
}

fn collection_value(docs: &[Object]) -> DValue {
    DValue::Array(docs.iter().map(|d| DValue::Object(d.clone())).collect())
}

fn count_in(docs: &[Object], needle: &DValue, mode: SemanticsMode) -> usize {
    docs.iter()
        .filter(|d| mode_eq(&DValue::Object((*d).clone()), needle, mode))
        .count()
}

/// Compares two collections as bags under the mode's document equality.
/// Returns the first document (left bag first, then right) whose
/// multiplicities differ, or None when the bags agree.
pub fn bag_diff(
    left: &[Object],
    right: &[Object],
    mode: SemanticsMode,
) -> Option<(DValue, usize, usize)> {
    for doc in left.iter().chain(right.iter()) {
        let v = DValue::Object(doc.clone());
        let l = count_in(left, &v, mode);
        let r = count_in(right, &v, mode);
        if l != r {
            return Some((v, l, r));
        }
    }
    None
}

/// True when the two collections are equal as bags of documents.
pub fn bag_eq(left: &[Object], right: &[Object], mode: SemanticsMode) -> bool {
    bag_diff(left, right, mode).is_none()
}

/// Evaluates both queries on every instance and reports the first
/// disagreement, if any.  Answers are compared as bags: none of the
/// checked fragments pins down an answer order across rewrites.
pub fn check_equiv(q1: &Query, q2: &Query, instances: &[DatabaseInstance]) -> EquivReport {
    let mut checked = 0;
    for instance in instances {
        checked += 1;
        let left = eval_query(instance, q1);
        let right = eval_query(instance, q2);
        if let Some((witness, left_count, right_count)) = bag_diff(&left, &right, instance.mode) {
            return EquivReport {
                instances_checked: checked,
                counterexample: Some(Counterexample {
                    instance: instance.clone(),
                    left,
                    right,
                    witness,
                    left_count,
                    right_count,
                }),
            };
        }
    }
    EquivReport { instances_checked: checked, counterexample: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{load_instance, parse_query};

    fn inst(text: &str) -> DatabaseInstance {
        load_instance(text, SemanticsMode::Ordered).unwrap()
    }

    fn q(text: &str) -> Query {
        parse_query(text).unwrap()
    }

    #[test]
    fn bag_comparison_ignores_order_but_counts_multiplicity() {
        let a = inst(r#"{"c": [{"_id": 1}, {"_id": 2}]}"#).collection("c").to_vec();
        let b: Vec<Object> = a.iter().rev().cloned().collect();
        assert!(bag_eq(&a, &b, SemanticsMode::Ordered));
        let doubled: Vec<Object> = a.iter().chain(a.iter()).cloned().collect();
        let (w, l, r) = bag_diff(&a, &doubled, SemanticsMode::Ordered).unwrap();
        assert_eq!((l, r), (1, 2));
        assert_eq!(w.eval_path(&crate::dvalue::Path::key("_id")), DValue::number(1.0));
    }

    #[test]
    fn identical_queries_are_reported_equal() {
        let i = inst(r#"{"c": [{"_id": 1, "a": 3}]}"#);
        let query = q(r#"{"collection": "c", "pipeline": [{"$match": {"$lte": ["$a", 5]}}]}"#);
        let report = check_equiv(&query, &query, &[i]);
        assert!(report.is_equal());
        assert_eq!(report.instances_checked, 1);
    }

    #[test]
    fn disagreeing_queries_produce_a_witness() {
        let i = inst(r#"{"c": [{"_id": 1, "a": 3}, {"_id": 2, "a": 9}]}"#);
        let all = q(r#"{"collection": "c", "pipeline": []}"#);
        let some = q(r#"{"collection": "c", "pipeline": [{"$match": {"$lte": ["$a", 5]}}]}"#);
        let report = check_equiv(&all, &some, &[i]);
        let cx = report.counterexample.expect("counterexample");
        assert_eq!((cx.left_count, cx.right_count), (1, 0));
        assert_eq!(cx.witness.eval_path(&crate::dvalue::Path::key("_id")), DValue::number(2.0));
    }
}
