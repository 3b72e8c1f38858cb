//! The embedded golden corpus: fixed queries over the bands/songs
//! fixtures with their exact expected answers.
//!
//! Each case file carries the query in surface syntax and the expected
//! answer as a JSON array; the runner evaluates under ordered semantics
//! and compares structurally, so answer order and field order both count.

use crate::dvalue::{
    mode_eq, parse_dvalue, write_dvalue, DValue, DatabaseInstance, SemanticsMode,
};
use crate::engine::eval_query;
use crate::syntax::{load_instance, parse_query};

const BANDS: &str = include_str!("../../fixtures/bands.json");
const SONGS: &str = include_str!("../../fixtures/songs.json");
#[cfg(test)]
const MANIFEST: &str = include_str!("../../fixtures/goldens/manifest.json");

const CASES: &[(&str, &str)] = &[
    ("project-idle", include_str!("../../fixtures/goldens/project-idle.json")),
    ("project-rename", include_str!("../../fixtures/goldens/project-rename.json")),
    ("project-map-release", include_str!("../../fixtures/goldens/project-map-release.json")),
    ("project-map-diff", include_str!("../../fixtures/goldens/project-map-diff.json")),
    ("unwind-albums", include_str!("../../fixtures/goldens/unwind-albums.json")),
    ("unwind-project", include_str!("../../fixtures/goldens/unwind-project.json")),
    ("match-formation", include_str!("../../fixtures/goldens/match-formation.json")),
    ("match-or", include_str!("../../fixtures/goldens/match-or.json")),
    ("eponymous", include_str!("../../fixtures/goldens/eponymous.json")),
    ("group-by-year", include_str!("../../fixtures/goldens/group-by-year.json")),
    ("lookup-compositions", include_str!("../../fixtures/goldens/lookup-compositions.json")),
    (
        "composer-not-interpreter",
        include_str!("../../fixtures/goldens/composer-not-interpreter.json"),
    ),
    (
        "graphlookup-sampled-by",
        include_str!("../../fixtures/goldens/graphlookup-sampled-by.json"),
    ),
    (
        "union-members-composers",
        include_str!("../../fixtures/goldens/union-members-composers.json"),
    ),
    ("sort-desc-title", include_str!("../../fixtures/goldens/sort-desc-title.json")),
    ("sort-asc-title", include_str!("../../fixtures/goldens/sort-asc-title.json")),
    ("limit-most-albums", include_str!("../../fixtures/goldens/limit-most-albums.json")),
    ("ra-self-join", include_str!("../../fixtures/goldens/ra-self-join.json")),
    ("ra-union-linearised", include_str!("../../fixtures/goldens/ra-union-linearised.json")),
    ("ra-difference", include_str!("../../fixtures/goldens/ra-difference.json")),
];

/// The bands/songs instance every golden case runs against.
pub fn music_instance() -> DatabaseInstance {
    let text = format!("{{\"bands\": {BANDS}, \"songs\": {SONGS}}}");
    load_instance(&text, SemanticsMode::Ordered).expect("fixture instance is valid")
}

/// One case's verdict; `detail` explains a failure.
#[derive(Clone, Debug)]
pub struct CaseOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: Option<String>,
}

/// The whole corpus run.
#[derive(Clone, Debug)]
pub struct GoldenReport {
    pub outcomes: Vec<CaseOutcome>,
}

impl GoldenReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn to_dvalue(&self) -> DValue {
        DValue::Array(
            self.outcomes
                .iter()
                .map(|c| {
                    let mut o = crate::dvalue::Object::new();
                    o.push("case", DValue::string(c.name.clone()));
                    o.push("passed", DValue::bool(c.passed));
                    if let Some(d) = &c.detail {
                        o.push("detail", DValue::string(d.clone()));
                    }
                    DValue::Object(o)
                })
                .collect(),
        )
    }
}

fn run_case(instance: &DatabaseInstance, name: &str, text: &str) -> CaseOutcome {
    let fail = |detail: String| CaseOutcome {
        name: name.to_string(),
        passed: false,
        detail: Some(detail),
    };
    let doc = match parse_dvalue(text) {
        Ok(d) => d,
        Err(e) => return fail(format!("fixture is not valid JSON: {e}")),
    };
    let Some(fields) = doc.as_object() else {
        return fail("fixture is not an object".into());
    };
    let (Some(query_v), Some(expected)) = (fields.get("query"), fields.get("expected")) else {
        return fail("fixture needs \"query\" and \"expected\"".into());
    };
    let query_text = write_dvalue(query_v, SemanticsMode::Ordered);
    let query = match parse_query(&query_text) {
        Ok(q) => q,
        Err(issues) => {
            let lines: Vec<String> = issues.iter().map(|i| i.to_string()).collect();
            return fail(format!("query does not parse: {}", lines.join("; ")));
        }
    };
    let answer = DValue::Array(
        eval_query(instance, &query).into_iter().map(DValue::Object).collect(),
    );
    if mode_eq(&answer, expected, SemanticsMode::Ordered) {
        CaseOutcome { name: name.to_string(), passed: true, detail: None }
    } else {
        fail(format!(
            "expected {}\n  but got {}",
            write_dvalue(expected, SemanticsMode::Ordered),
            write_dvalue(&answer, SemanticsMode::Ordered)
        ))
    }
}

/// Runs every embedded case and collects the verdicts.
pub fn run_golden_corpus() -> GoldenReport {
    let instance = music_instance();
    GoldenReport {
        outcomes: CASES.iter().map(|(name, text)| run_case(&instance, name, text)).collect(),
    }
}

/// The embedded case texts, for syntax-level tests over the corpus.
pub fn golden_case_texts() -> impl Iterator<Item = (&'static str, &'static str)> {
    CASES.iter().copied()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn the_whole_corpus_passes() {
        let report = run_golden_corpus();
        for c in &report.outcomes {
            assert!(c.passed, "{}: {}", c.name, c.detail.as_deref().unwrap_or(""));
        }
        assert_eq!(report.outcomes.len(), CASES.len());
    }

    #[test]
    fn the_manifest_lists_exactly_the_embedded_cases() {
        let doc = parse_dvalue(MANIFEST).unwrap();
        let listed: Vec<String> = doc
            .as_object()
            .and_then(|o| o.get("cases"))
            .and_then(DValue::as_array)
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect();
        let embedded: Vec<String> = CASES.iter().map(|(n, _)| n.to_string()).collect();
        assert_eq!(listed, embedded);
    }

    #[test]
    fn case_names_match_their_fixture_field() {
        for (name, text) in CASES {
            let doc = parse_dvalue(text).unwrap();
            let inner = doc.as_object().and_then(|o| o.get("name")).and_then(DValue::as_str);
            assert_eq!(inner, Some(*name));
        }
    }
}
