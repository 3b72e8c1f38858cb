//! Test harness: seeded generators, a differential oracle, bag-equality
//! checking, per-rule rewrite campaigns, and the embedded golden corpus.

mod equiv;
mod fuzz;
mod gen;
mod golden;
mod oracle;

pub use equiv::{bag_diff, bag_eq, check_equiv, Counterexample, EquivReport};
pub use fuzz::{fuzz_rules, FuzzSummary, RuleStats};
pub use gen::{
    gen_instance, gen_query, gen_values, permuted_object, GenParams, StageFamily, CORE_FAMILIES,
};
pub use golden::{
    golden_case_texts, music_instance, run_golden_corpus, CaseOutcome, GoldenReport,
};
pub use oracle::oracle_eval;
