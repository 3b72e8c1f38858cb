//! The normalization driver: a deterministic fixpoint over a loop-free
//! subset of the catalog, with a replayable trace.
//!
//! The driver moves matches as far upstream as possible, lookups above
//! unwinds and projections, unwinds above projections, and merges and
//! collapses what it can.  The resulting stage order (match, lookup,
//! unwind, project) is a strict priority: for every driver rule the
//! moved-up stage ranks strictly lower than the stage it crosses, so no
//! two driver rules can undo each other and the fixpoint is idempotent.

use crate::dvalue::DValue;
use crate::engine::{Query, Stage};
use crate::syntax::query_to_dvalue;

use super::rules::{rule_catalog, RewriteRule};

/// Rules the driver applies, in priority order.  Directionless swaps and
/// the downstream duals are deliberately absent (they would ping-pong).
const DRIVER_RULES: &[&str] = &[
    "match.merge",
    "project.collapse",
    "project.past-group",
    "unwind.past-match",
    "project.past-match",
    "group.past-match",
    "lookup.past-match",
    "unwind.past-lookup",
    "project.past-lookup",
    "project.past-unwind",
];

/// A generous bound on driver steps; every rule strictly decreases a
/// (stage count, upstream-rank inversions, conjunct positions) measure,
/// so hitting the ceiling would be a bug.
pub const STEP_CEILING: usize = 10_000;

/// One applied rewrite.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub rule: &'static str,
    pub position: usize,
    pub before: Vec<Stage>,
    pub after: Vec<Stage>,
}

/// The sequence of rewrites normalize performed, replayable from the
/// original query.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RewriteTrace {
    pub steps: Vec<TraceStep>,
}

impl RewriteTrace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    /// The trace as a JSON value, with stage windows in surface syntax.
    pub fn to_dvalue(&self) -> DValue {
        let stages_value = |stages: &[Stage]| {
            DValue::Array(stages.iter().map(crate::syntax::stage_to_dvalue).collect())
        };
        DValue::Array(
            self.steps
                .iter()
                .map(|s| {
                    let mut o = crate::dvalue::Object::new();
                    o.push("rule", DValue::string(s.rule));
                    o.push("position", DValue::number(s.position as f64));
                    o.push("before", stages_value(&s.before));
                    o.push("after", stages_value(&s.after));
                    DValue::Object(o)
                })
                .collect(),
        )
    }
}

/// Re-applies a trace to a query; None if any window fails to match.
pub fn replay(q: &Query, trace: &RewriteTrace) -> Option<Query> {
    let mut stages = q.stages.clone();
    for step in &trace.steps {
        let end = step.position.checked_add(step.before.len())?;
        if end > stages.len() || stages[step.position..end] != step.before[..] {
            return None;
        }
        stages.splice(step.position..end, step.after.iter().cloned());
    }
    Some(Query { source: q.source.clone(), stages })
}

fn driver_rules() -> Vec<&'static RewriteRule> {
    DRIVER_RULES
        .iter()
        .map(|id| {
            rule_catalog()
                .iter()
                .find(|r| r.id == *id)
                .expect("driver rule present in catalog")
        })
        .collect()
}

/// Rewrites a query to its normal form, returning the applied trace.
/// Deterministic: at each step the leftmost window wins, with ties broken
/// by driver-rule priority.
pub fn normalize(q: &Query) -> (Query, RewriteTrace) {
    let rules = driver_rules();
    let mut stages = q.stages.clone();
    let mut trace = RewriteTrace::default();
    'outer: while trace.steps.len() < STEP_CEILING {
        for pos in 0..stages.len().saturating_sub(1) {
            for rule in &rules {
                if let Some(window) = rule.try_apply(&stages[pos], &stages[pos + 1]) {
                    trace.steps.push(TraceStep {
                        rule: rule.id,
                        position: pos,
                        before: stages[pos..pos + 2].to_vec(),
                        after: window.clone(),
                    });
                    stages.splice(pos..pos + 2, window);
                    continue 'outer;
                }
            }
        }
        break;
    }
    (Query { source: q.source.clone(), stages }, trace)
}

/// Surface-syntax form of the normalized query plus trace (CLI output).
pub fn normalize_report(q: &Query) -> (Query, RewriteTrace, DValue) {
    let (normal, trace) = normalize(q);
    let mut o = crate::dvalue::Object::new();
    o.push("query", query_to_dvalue(&normal));
    o.push("trace", trace.to_dvalue());
    (normal, trace, DValue::Object(o))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_query;

    fn q(text: &str) -> Query {
        parse_query(text).unwrap()
    }

    #[test]
    fn two_matches_merge_with_a_one_step_trace() {
        let query = q(r#"{"collection": "c", "pipeline": [
            {"$match": {"$eq": ["$a", 1]}},
            {"$match": {"$eq": ["$b", 2]}}]}"#);
        let (normal, trace) = normalize(&query);
        assert_eq!(normal.stages.len(), 1);
        assert_eq!(trace.len(), 1);
        assert_eq!(trace.steps[0].rule, "match.merge");
        assert_eq!(replay(&query, &trace), Some(normal));
    }

    #[test]
    fn matches_bubble_to_the_front() {
        let query = q(r#"{"collection": "bands", "pipeline": [
            {"$unwind": "$albums"},
            {"$match": {"$and": [{"$eq": ["$name", "ABBA"]},
                                 {"$lte": ["$albums.release", 1975]}]}}]}"#);
        let (normal, trace) = normalize(&query);
        assert!(matches!(normal.stages[0], Stage::Match(_)));
        assert!(matches!(normal.stages[1], Stage::Unwind(_)));
        assert!(matches!(normal.stages[2], Stage::Match(_)));
        assert_eq!(replay(&query, &trace), Some(normal));
    }

    #[test]
    fn normalize_is_idempotent_on_a_mixed_pipeline() {
        let query = q(r#"{"collection": "bands", "pipeline": [
            {"$project": {"name": 1, "albums": 1, "year": "$formation"}},
            {"$unwind": "$albums"},
            {"$lookup": {"let": {"x": "$name"},
                         "pipeline": {"collection": "songs", "pipeline": []},
                         "as": "songs"}},
            {"$match": {"$eq": ["$name", "Queen"]}},
            {"$match": {"$eq": ["$albums.release", 1973]}}]}"#);
        let (once, trace) = normalize(&query);
        let (twice, retrace) = normalize(&once);
        assert_eq!(once, twice);
        assert!(retrace.is_empty());
        assert!(trace.len() < STEP_CEILING);
        assert_eq!(replay(&query, &trace), Some(once));
    }

    #[test]
    fn already_normal_queries_are_untouched() {
        let query = q(r#"{"collection": "c", "pipeline": [
            {"$match": {"$eq": ["$a", 1]}},
            {"$sort": {"a": 1}},
            {"$limit": 3}]}"#);
        let (normal, trace) = normalize(&query);
        assert_eq!(normal, query);
        assert!(trace.is_empty());
    }

    #[test]
    fn replay_rejects_a_mismatched_origin() {
        let query = q(r#"{"collection": "c", "pipeline": [
            {"$match": {"$eq": ["$a", 1]}},
            {"$match": {"$eq": ["$b", 2]}}]}"#);
        let (_, trace) = normalize(&query);
        let other = q(r#"{"collection": "c", "pipeline": [{"$count": "n"}]}"#);
        assert_eq!(replay(&other, &trace), None);
    }
}
