//! The rewrite-rule catalog: adjacent-stage transformations with
//! machine-checked preconditions.
//!
//! Naming: `a.past-b` rewrites the window `[a, b]` into `[b, a]` (the
//! first-named stage moves downstream).  All preconditions are purely
//! syntactic and conservative — when a rule fires, both windows evaluate
//! to the same bag on every instance, with one documented exception:
//! rules that move or drop a projection (`unwind.past-project`,
//! `project.past-unwind`, `project.past-group`) diverge on documents with
//! explicit nulls at the touched paths, because a projection's merge
//! erases null pairs while unwind and group observe them.  The tests pin
//! both divergences.

use std::collections::BTreeSet;

use crate::dvalue::Path;
use crate::engine::{PathDefinition, Query, Stage};
use crate::expr::{paths_of_bool, paths_of_term, BoolExpr, PathRef, Term};

use super::analysis::{
    all_in_extensions, analyze_definitions, in_extensions, lookup_var_paths,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleFamily {
    Match,
    Unwind,
    Project,
    Lookup,
}

/// One rewrite rule over a two-stage window.
pub struct RewriteRule {
    pub id: &'static str,
    pub family: RuleFamily,
    apply: fn(&Stage, &Stage) -> Option<Vec<Stage>>,
}

impl RewriteRule {
    /// Applies the rule if the window matches and the precondition holds.
    pub fn try_apply(&self, first: &Stage, second: &Stage) -> Option<Vec<Stage>> {
        (self.apply)(first, second)
    }
}

/// Every rule of the catalog, in a stable order.
pub fn rule_catalog() -> &'static [RewriteRule] {
    const CATALOG: &[RewriteRule] = &[
        RewriteRule { id: "match.merge", family: RuleFamily::Match, apply: match_merge },
        RewriteRule {
            id: "unwind.past-match",
            family: RuleFamily::Match,
            apply: unwind_past_match,
        },
        RewriteRule {
            id: "project.past-match",
            family: RuleFamily::Match,
            apply: project_past_match,
        },
        RewriteRule {
            id: "group.past-match",
            family: RuleFamily::Match,
            apply: group_past_match,
        },
        RewriteRule {
            id: "lookup.past-match",
            family: RuleFamily::Match,
            apply: lookup_past_match,
        },
        RewriteRule {
            id: "match.past-lookup",
            family: RuleFamily::Lookup,
            apply: match_past_lookup,
        },
        RewriteRule { id: "unwind.swap", family: RuleFamily::Unwind, apply: unwind_swap },
        RewriteRule {
            id: "unwind.past-lookup",
            family: RuleFamily::Unwind,
            apply: unwind_past_lookup,
        },
        RewriteRule {
            id: "lookup.past-unwind",
            family: RuleFamily::Lookup,
            apply: lookup_past_unwind,
        },
        RewriteRule {
            id: "unwind.past-project",
            family: RuleFamily::Unwind,
            apply: unwind_past_project,
        },
        RewriteRule {
            id: "project.past-unwind",
            family: RuleFamily::Project,
            apply: project_past_unwind,
        },
        RewriteRule {
            id: "project.collapse",
            family: RuleFamily::Project,
            apply: project_collapse,
        },
        RewriteRule {
            id: "project.past-lookup",
            family: RuleFamily::Project,
            apply: project_past_lookup,
        },
        RewriteRule {
            id: "lookup.past-project",
            family: RuleFamily::Lookup,
            apply: lookup_past_project,
        },
        RewriteRule {
            id: "project.past-group",
            family: RuleFamily::Project,
            apply: project_past_group,
        },
        RewriteRule { id: "lookup.swap", family: RuleFamily::Lookup, apply: lookup_swap },
    ];
    CATALOG
}

/// Enumerates every applicable (rule, window position, rewritten query).
pub fn rewrite_step(q: &Query) -> Vec<(&'static RewriteRule, usize, Query)> {
    let mut out = Vec::new();
    if q.stages.len() < 2 {
        return out;
    }
    for pos in 0..q.stages.len() - 1 {
        for rule in rule_catalog() {
            if let Some(window) = rule.try_apply(&q.stages[pos], &q.stages[pos + 1]) {
                let mut stages = q.stages.clone();
                stages.splice(pos..pos + 2, window);
                out.push((rule, pos, Query { source: q.source.clone(), stages }));
            }
        }
    }
    out
}

// --- match family: anticipated filtering -------------------------------

fn match_merge(first: &Stage, second: &Stage) -> Option<Vec<Stage>> {
    let (Stage::Match(a), Stage::Match(b)) = (first, second) else { return None };
    Some(vec![Stage::Match(BoolExpr::and(a.clone(), b.clone()))])
}

/// Splits a match's conjuncts by `movable` and rebuilds the window as
/// `match(movable) ▷ mid ▷ match(rest)`, applying `rewrite` to each moved
/// conjunct.  None when nothing can move.
fn split_match(
    mid: &Stage,
    cond: &BoolExpr,
    movable: impl Fn(&BoolExpr) -> bool,
    rewrite: impl Fn(&BoolExpr) -> BoolExpr,
) -> Option<Vec<Stage>> {
    let mut moved = Vec::new();
    let mut kept = Vec::new();
    for c in cond.conjuncts() {
        if movable(c) {
            moved.push(rewrite(c));
        } else {
            kept.push(c.clone());
        }
    }
    let moved = BoolExpr::conjunction(moved)?;
    let mut window = vec![Stage::Match(moved), mid.clone()];
    if let Some(rest) = BoolExpr::conjunction(kept) {
        window.push(Stage::Match(rest));
    }
    Some(window)
}

fn unwind_past_match(first: &Stage, second: &Stage) -> Option<Vec<Stage>> {
    let (Stage::Unwind(p), Stage::Match(cond)) = (first, second) else { return None };
    split_match(
        first,
        cond,
        |c| p.is_compatible_with(&paths_of_bool(c)),
        Clone::clone,
    )
}

fn project_past_match(first: &Stage, second: &Stage) -> Option<Vec<Stage>> {
    let (Stage::Project(defs), Stage::Match(cond)) = (first, second) else { return None };
    let a = analyze_definitions(defs);
    split_match(
        first,
        cond,
        |c| all_in_extensions(&paths_of_bool(c), &a.idle),
        Clone::clone,
    )
}

fn group_past_match(first: &Stage, second: &Stage) -> Option<Vec<Stage>> {
    let (Stage::Group { id: Some(g), .. }, Stage::Match(cond)) = (first, second) else {
        return None;
    };
    let id_path: BTreeSet<Path> = [Path::key("_id")].into_iter().collect();
    split_match(
        first,
        cond,
        |c| all_in_extensions(&paths_of_bool(c), &id_path),
        |c| retarget_bool(c, "_id", g),
    )
}

fn lookup_past_match(first: &Stage, second: &Stage) -> Option<Vec<Stage>> {
    let (Stage::Lookup { as_, .. }, Stage::Match(cond)) = (first, second) else {
        return None;
    };
    split_match(
        first,
        cond,
        |c| as_.is_compatible_with(&paths_of_bool(c)),
        Clone::clone,
    )
}

fn match_past_lookup(first: &Stage, second: &Stage) -> Option<Vec<Stage>> {
    let (Stage::Match(cond), Stage::Lookup { as_, .. }) = (first, second) else {
        return None;
    };
    if as_.is_compatible_with(&paths_of_bool(cond)) {
        Some(vec![second.clone(), first.clone()])
    } else {
        None
    }
}

// --- unwind family: postponed unnesting --------------------------------

fn unwind_swap(first: &Stage, second: &Stage) -> Option<Vec<Stage>> {
    let (Stage::Unwind(p1), Stage::Unwind(p2)) = (first, second) else { return None };
    // Compatibility is required in both directions: unwinding a path also
    // rewrites the value at every extension of it.
    if p1.is_compatible_with([p2]) {
        Some(vec![second.clone(), first.clone()])
    } else {
        None
    }
}

fn unwind_lookup_precondition(p: &Path, stage: &Stage) -> bool {
    let Stage::Lookup { vars, as_, .. } = stage else { return false };
    let mut touched = lookup_var_paths(vars);
    touched.insert(as_.clone());
    p.is_compatible_with(&touched)
}

fn unwind_past_lookup(first: &Stage, second: &Stage) -> Option<Vec<Stage>> {
    let Stage::Unwind(p) = first else { return None };
    if unwind_lookup_precondition(p, second) {
        Some(vec![second.clone(), first.clone()])
    } else {
        None
    }
}

fn lookup_past_unwind(first: &Stage, second: &Stage) -> Option<Vec<Stage>> {
    let Stage::Unwind(p) = second else { return None };
    if unwind_lookup_precondition(p, first) {
        Some(vec![second.clone(), first.clone()])
    } else {
        None
    }
}

fn unwind_project_precondition(p: &Path, defs: &[PathDefinition]) -> bool {
    // The projection must copy p's array verbatim (p extends an idle
    // target) and no computing right-hand side may read into or across p.
    //
    // Known limit: if the unwound array contains an explicit null,
    // unwinding after the projection keeps the null pair while unwinding
    // before it lets the projection's merge erase it.  That asymmetry is
    // in the data, not the stages, so no syntactic precondition can
    // exclude it; the commutation is exact on null-free instances.
    let a = analyze_definitions(defs);
    p.is_compatible_with(&a.rhs_paths_non_idle) && in_extensions(p, &a.idle)
}

fn unwind_past_project(first: &Stage, second: &Stage) -> Option<Vec<Stage>> {
    let (Stage::Unwind(p), Stage::Project(defs)) = (first, second) else { return None };
    if unwind_project_precondition(p, defs) {
        Some(vec![second.clone(), first.clone()])
    } else {
        None
    }
}

// --- project family: postponed or simplified projections ---------------

fn project_past_unwind(first: &Stage, second: &Stage) -> Option<Vec<Stage>> {
    let (Stage::Project(defs), Stage::Unwind(p)) = (first, second) else { return None };
    if unwind_project_precondition(p, defs) {
        Some(vec![second.clone(), first.clone()])
    } else {
        None
    }
}

fn project_collapse(first: &Stage, second: &Stage) -> Option<Vec<Stage>> {
    let (Stage::Project(d1), Stage::Project(d2)) = (first, second) else { return None };
    // When the second projection reads only what the first copies
    // verbatim, the first is invisible to it.
    let a1 = analyze_definitions(d1);
    let a2 = analyze_definitions(d2);
    if all_in_extensions(&a2.rhs_paths, &a1.idle) {
        Some(vec![second.clone()])
    } else {
        None
    }
}

fn project_lookup_precondition(defs: &[PathDefinition], stage: &Stage) -> bool {
    let Stage::Lookup { vars, as_, .. } = stage else { return false };
    let a = analyze_definitions(defs);
    let mut touched = lookup_var_paths(vars);
    touched.insert(as_.clone());
    as_.is_compatible_with(&a.rhs_paths_non_idle) && all_in_extensions(&touched, &a.idle)
}

fn project_past_lookup(first: &Stage, second: &Stage) -> Option<Vec<Stage>> {
    let Stage::Project(defs) = first else { return None };
    if project_lookup_precondition(defs, second) {
        Some(vec![second.clone(), first.clone()])
    } else {
        None
    }
}

fn lookup_past_project(first: &Stage, second: &Stage) -> Option<Vec<Stage>> {
    let Stage::Project(defs) = second else { return None };
    if project_lookup_precondition(defs, first) {
        Some(vec![second.clone(), first.clone()])
    } else {
        None
    }
}

fn project_past_group(first: &Stage, second: &Stage) -> Option<Vec<Stage>> {
    let (Stage::Project(defs), Stage::Group { id, collect }) = (first, second) else {
        return None;
    };
    // The group reads only the top-level keys g and A; if the projection
    // keeps all of them in place it cannot influence the group at all.
    // (Validation guarantees no other target writes into those subtrees.)
    //
    // Known limit: an explicit null under a collected key is erased by
    // the projection's merge but collected by the group, so the two
    // windows differ on such documents (exact on null-free instances).
    let a = analyze_definitions(defs);
    let keys = collect.iter().chain(id.as_ref());
    let mut needed = keys.map(|k| Path::key(k.clone()));
    if needed.all(|k| a.idle.contains(&k)) {
        Some(vec![second.clone()])
    } else {
        None
    }
}

// --- lookup family: anticipated or postponed lookups -------------------

fn lookup_swap(first: &Stage, second: &Stage) -> Option<Vec<Stage>> {
    let (
        Stage::Lookup { vars: v1, template: t1, as_: a1 },
        Stage::Lookup { vars: v2, template: t2, as_: a2 },
    ) = (first, second)
    else {
        return None;
    };
    let mut touched1 = lookup_var_paths(v1);
    touched1.insert(a1.clone());
    let mut touched2 = lookup_var_paths(v2);
    touched2.insert(a2.clone());
    // Mutual independence of the attachment points and variable reads,
    // plus a conservative guard: neither template mentions the other's
    // output path anywhere.
    if a1.is_compatible_with(&touched2)
        && a2.is_compatible_with(&touched1)
        && a1.is_compatible_with(&query_paths(t2))
        && a2.is_compatible_with(&query_paths(t1))
    {
        Some(vec![second.clone(), first.clone()])
    } else {
        None
    }
}

/// Every path a query's stages mention, recursively (reads, targets, and
/// attachment points alike).  Used only as a conservative guard.
fn query_paths(q: &Query) -> BTreeSet<Path> {
    let mut out = BTreeSet::new();
    for stage in &q.stages {
        match stage {
            Stage::Match(cond) => out.extend(paths_of_bool(cond)),
            Stage::Unwind(p) => {
                out.insert(p.clone());
            }
            Stage::Project(defs) => {
                for def in defs {
                    out.insert(def.target.clone());
                    out.extend(paths_of_term(&def.value));
                }
            }
            Stage::Group { id, collect } => {
                out.extend(id.iter().map(|k| Path::key(k.clone())));
                out.extend(collect.iter().map(|k| Path::key(k.clone())));
            }
            Stage::Lookup { vars, template, as_ } => {
                out.extend(lookup_var_paths(vars));
                out.insert(as_.clone());
                out.extend(query_paths(template));
            }
            Stage::GraphLookup { start_with, connect_from, connect_to, as_, .. } => {
                out.extend(
                    [start_with, connect_from, connect_to, as_].into_iter().cloned(),
                );
            }
            Stage::UnionWith(inner) => out.extend(query_paths(inner)),
            Stage::Count(key) => {
                out.insert(Path::key(key.clone()));
            }
            Stage::Sort(comparators) => {
                out.extend(comparators.iter().map(|c| c.path.clone()));
            }
            Stage::Limit(_) | Stage::Skip(_) => {}
        }
    }
    out
}

// --- head-key substitution (φ[_id → g]) --------------------------------

fn retarget_path_ref(pr: &PathRef, from: &str, to: &str) -> PathRef {
    match &pr.var {
        None if pr.path.head_key() == Some(from) => {
            PathRef::root(Path::key(to).join(&pr.path.tail()))
        }
        _ => pr.clone(),
    }
}

fn retarget_term(t: &Term, from: &str, to: &str) -> Term {
    match t {
        Term::Const(_) => t.clone(),
        Term::Path(pr) => Term::Path(retarget_path_ref(pr, from, to)),
        Term::Array(items) => {
            Term::Array(items.iter().map(|it| retarget_term(it, from, to)).collect())
        }
        Term::Object(fields) => Term::Object(
            fields.iter().map(|(k, it)| (k.clone(), retarget_term(it, from, to))).collect(),
        ),
        Term::FnCall { name, arg } => Term::FnCall {
            name: name.clone(),
            arg: Box::new(retarget_term(arg, from, to)),
        },
        Term::Cond { cond, then, els } => Term::Cond {
            cond: Box::new(retarget_bool(cond, from, to)),
            then: Box::new(retarget_term(then, from, to)),
            els: Box::new(retarget_term(els, from, to)),
        },
        Term::Map { input, var, body } => Term::Map {
            input: retarget_path_ref(input, from, to),
            var: var.clone(),
            body: Box::new(retarget_term(body, from, to)),
        },
        Term::Filter { input, var, cond } => Term::Filter {
            input: retarget_path_ref(input, from, to),
            var: var.clone(),
            cond: Box::new(retarget_bool(cond, from, to)),
        },
    }
}

fn retarget_bool(e: &BoolExpr, from: &str, to: &str) -> BoolExpr {
    match e {
        BoolExpr::Exists(pr) => BoolExpr::Exists(retarget_path_ref(pr, from, to)),
        BoolExpr::Eq(a, b) => {
            BoolExpr::Eq(retarget_term(a, from, to), retarget_term(b, from, to))
        }
        BoolExpr::Lte(a, b) => {
            BoolExpr::Lte(retarget_term(a, from, to), retarget_term(b, from, to))
        }
        BoolExpr::In(a, b) => {
            BoolExpr::In(retarget_term(a, from, to), retarget_term(b, from, to))
        }
        BoolExpr::Not(inner) => BoolExpr::not(retarget_bool(inner, from, to)),
        BoolExpr::And(a, b) => {
            BoolExpr::and(retarget_bool(a, from, to), retarget_bool(b, from, to))
        }
    }
}
