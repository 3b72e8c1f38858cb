//! Per-rule differential campaigns for the rewrite catalog.
//!
//! For every rule the campaign constructs stage windows that satisfy the
//! rule's precondition *by construction* (disjoint key families make the
//! compatibility side conditions hold), applies the rule, and compares
//! the answers of the original and rewritten windows as bags over a
//! generated instance.  Campaigns run in unordered semantics: the
//! lookup-reordering rules move attachment points, which bag equality
//! under ordered document equality would misjudge for reordered keys.

use crate::dvalue::{DValue, Object, Path, SemanticsMode};
use crate::engine::{eval_query, PathDefinition, Query, Stage, VariableDefinition};
use crate::expr::{BoolExpr, Term};
use crate::optimizer::{rule_catalog, RewriteRule, RuleFamily};

use super::equiv::bag_diff;
use super::gen::{gen_instance, Draw, GenParams};

/// The outcome of one rule's campaign.
#[derive(Clone, Debug)]
pub struct RuleStats {
    pub rule: &'static str,
    /// Windows whose precondition held and on which the rule fired.
    pub applications: usize,
    /// Fired windows whose before/after answers were bag-equal.
    pub verified: usize,
    /// Descriptions of any failures, each with its replay seed.
    pub violations: Vec<String>,
}

/// Results for every campaigned rule.
#[derive(Clone, Debug)]
pub struct FuzzSummary {
    pub stats: Vec<RuleStats>,
}

impl FuzzSummary {
    pub fn total_violations(&self) -> usize {
        self.stats.iter().map(|s| s.violations.len()).sum()
    }

    pub fn to_dvalue(&self) -> DValue {
        DValue::Array(
            self.stats
                .iter()
                .map(|s| {
                    let mut o = Object::new();
                    o.push("rule", DValue::string(s.rule));
                    o.push("applications", DValue::number(s.applications as f64));
                    o.push("verified", DValue::number(s.verified as f64));
                    o.push(
                        "violations",
                        DValue::Array(
                            s.violations.iter().map(|v| DValue::string(v.clone())).collect(),
                        ),
                    );
                    DValue::Object(o)
                })
                .collect(),
        )
    }
}

fn k(p: &str) -> Path {
    Path::parse(p).unwrap()
}

fn eq(p: &str, v: DValue) -> BoolExpr {
    BoolExpr::Eq(Term::path(k(p)), Term::Const(v))
}

struct WindowDraw<'a>(Draw<'a>);

impl WindowDraw<'_> {
    fn lit(&mut self) -> DValue {
        self.0.literal()
    }

    fn pick_bool(&mut self) -> bool {
        matches!(self.lit(), DValue::Literal(crate::dvalue::Literal::Bool(true)))
    }

    /// A conjunct whose every path starts at `head` (optionally one level
    /// deeper), so its compatibility facts are known up front.
    fn conjunct_over(&mut self, head: &str) -> BoolExpr {
        let p = if self.pick_bool() { format!("{head}.{}", self.0.key()) } else { head.into() };
        match self.lit() {
            DValue::Literal(crate::dvalue::Literal::Null) => {
                BoolExpr::Exists(crate::expr::PathRef::root(k(&p)))
            }
            v if self.pick_bool() => BoolExpr::Lte(Term::path(k(&p)), Term::Const(v)),
            v => eq(&p, v),
        }
    }

    /// `movable ∧ kept?` in a random association.
    fn match_over(&mut self, movable_head: &str, kept_head: Option<&str>) -> Stage {
        let movable = self.conjunct_over(movable_head);
        let cond = match kept_head {
            Some(h) if self.pick_bool() => {
                let kept = self.conjunct_over(h);
                if self.pick_bool() {
                    BoolExpr::and(movable, kept)
                } else {
                    BoolExpr::and(kept, movable)
                }
            }
            _ => movable,
        };
        Stage::Match(cond)
    }

    /// A lookup over `d` whose output key and optional variable source are
    /// fixed by the caller; the template only mentions alphabet keys.
    fn lookup(&mut self, var_source: Option<&str>, as_: &str) -> Stage {
        let vars = match var_source {
            Some(src) if self.pick_bool() => {
                vec![VariableDefinition { var: "x".into(), source: k(src) }]
            }
            _ => Vec::new(),
        };
        let stages = if self.pick_bool() {
            vec![Stage::Match(self.0.bool_expr(1))]
        } else if self.pick_bool() {
            vec![self.0.project()]
        } else {
            Vec::new()
        };
        Stage::Lookup {
            vars,
            template: Box::new(Query::new("d", stages)),
            as_: k(as_),
        }
    }

    fn unwind_under(&mut self, head: &str) -> Stage {
        let p = if self.pick_bool() { format!("{head}.{}", self.0.key()) } else { head.into() };
        Stage::Unwind(k(&p))
    }
}

/// A two-stage window satisfying the named rule's precondition.  The key
/// families are chosen so the compatibility requirements hold: `a`..`f`
/// is the document alphabet and `r`/`s` only ever appear as lookup
/// outputs.
fn build_window(rule: &str, d: &mut WindowDraw) -> Vec<Stage> {
    match rule {
        "match.merge" => {
            vec![Stage::Match(d.0.bool_expr(2)), Stage::Match(d.0.bool_expr(2))]
        }
        "unwind.past-match" => {
            // Conjuncts over `c` avoid the unwound subtree of `a`; kept
            // conjuncts sit inside it.
            let unwind = d.unwind_under("a");
            let m = d.match_over("c", Some("a"));
            vec![unwind, m]
        }
        "project.past-match" => {
            let defs = vec![
                PathDefinition::idle(k("a")),
                PathDefinition::idle(k("b")),
                PathDefinition { target: k("e"), value: Term::path(k("c")) },
            ];
            let head = if d.pick_bool() { "a" } else { "b" };
            let m = d.match_over(head, Some("e"));
            vec![Stage::Project(defs), m]
        }
        "group.past-match" => {
            let g = if d.pick_bool() { "a" } else { "b" };
            let collect = if d.pick_bool() { vec!["c".to_string()] } else { vec![] };
            let m = d.match_over("_id", Some("c"));
            vec![Stage::Group { id: Some(g.into()), collect }, m]
        }
        "lookup.past-match" => {
            let l = d.lookup(Some("a"), "r");
            let m = d.match_over("b", Some("r"));
            vec![l, m]
        }
        "match.past-lookup" => {
            // The whole condition ranges over the alphabet, never `r`.
            let m = Stage::Match(d.0.bool_expr(2));
            let l = d.lookup(Some("a"), "r");
            vec![m, l]
        }
        "unwind.swap" => vec![d.unwind_under("a"), d.unwind_under("b")],
        "unwind.past-lookup" => vec![d.unwind_under("b"), d.lookup(Some("a"), "r")],
        "lookup.past-unwind" => vec![d.lookup(Some("a"), "r"), d.unwind_under("b")],
        "unwind.past-project" | "project.past-unwind" => {
            let defs = vec![
                PathDefinition::idle(k("a")),
                PathDefinition { target: k("e"), value: Term::path(k("c")) },
            ];
            let u = d.unwind_under("a");
            if rule == "unwind.past-project" {
                vec![u, Stage::Project(defs)]
            } else {
                vec![Stage::Project(defs), u]
            }
        }
        "project.collapse" => {
            let first = vec![
                PathDefinition::idle(k("a")),
                PathDefinition::idle(k("b")),
                PathDefinition { target: k("e"), value: Term::Const(d.lit()) },
            ];
            let mut second = vec![PathDefinition {
                target: k("x"),
                value: Term::path(if d.pick_bool() { k("a.k") } else { k("a") }),
            }];
            if d.pick_bool() {
                second.push(PathDefinition::idle(k("b")));
            } else {
                second.push(PathDefinition { target: k("y"), value: Term::path(k("b.m")) });
            }
            vec![Stage::Project(first), Stage::Project(second)]
        }
        "project.past-lookup" | "lookup.past-project" => {
            let defs = vec![
                PathDefinition::idle(k("a")),
                PathDefinition::idle(k("r")),
                PathDefinition { target: k("e"), value: Term::path(k("c")) },
            ];
            let l = d.lookup(Some("a"), "r");
            if rule == "project.past-lookup" {
                vec![Stage::Project(defs), l]
            } else {
                vec![l, Stage::Project(defs)]
            }
        }
        "project.past-group" => {
            let defs = vec![
                PathDefinition::idle(k("a")),
                PathDefinition::idle(k("c")),
                PathDefinition { target: k("e"), value: Term::path(k("b")) },
            ];
            let id = if d.pick_bool() { Some("a".to_string()) } else { None };
            let collect = if id.is_none() || d.pick_bool() { vec!["c".to_string()] } else { vec![] };
            vec![Stage::Project(defs), Stage::Group { id, collect }]
        }
        "lookup.swap" => vec![d.lookup(Some("a"), "r"), d.lookup(Some("b"), "s")],
        other => panic!("no window builder for rule {other}"),
    }
}

fn campaign(rule: &RewriteRule, seeds: u64) -> RuleStats {
    let mut stats =
        RuleStats { rule: rule.id, applications: 0, verified: 0, violations: Vec::new() };
    let rule_salt = {
        // Stable per-rule stream so campaigns are independent of ordering.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in rule.id.bytes() {
            h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    };
    // Rules that commute or drop a projection around null-observing
    // stages are checked over null-free instances: a projection's merge
    // erases null pairs, while unwind keeps a null element in place and
    // group collects explicit nulls.  No syntactic precondition can see
    // data; the divergence is pinned by unit tests on the rule catalog.
    let include_null = !matches!(
        rule.id,
        "unwind.past-project" | "project.past-unwind" | "project.past-group"
    );
    for seed in 0..seeds {
        let params =
            GenParams { include_null, ..GenParams::with_seed(seed ^ rule_salt) };
        let mut draw = WindowDraw(Draw::new(&params, 4));
        let window = build_window(rule.id, &mut draw);
        let Some(rewritten) = rule.try_apply(&window[0], &window[1]) else {
            stats
                .violations
                .push(format!("{}: seed {seed}: precondition did not hold", rule.id));
            continue;
        };
        stats.applications += 1;
        let instance = gen_instance(&params, SemanticsMode::Unordered);
        let before = eval_query(&instance, &Query::new("c", window));
        let after = eval_query(&instance, &Query::new("c", rewritten));
        match bag_diff(&before, &after, SemanticsMode::Unordered) {
            None => stats.verified += 1,
            Some((witness, l, r)) => stats.violations.push(format!(
                "{}: seed {seed}: answers differ on {witness} ({l} vs {r})",
                rule.id
            )),
        }
    }
    stats
}

/// Runs the campaign for every rule (optionally restricted to one
/// family), with `seeds` constructed windows per rule.
pub fn fuzz_rules(family: Option<RuleFamily>, seeds: u64) -> FuzzSummary {
    let stats = rule_catalog()
        .iter()
        .filter(|r| family.map_or(true, |f| r.family == f))
        .map(|r| campaign(r, seeds))
        .collect();
    FuzzSummary { stats }
}
