//! Algebraic rewriting: the rule catalog, precondition analyses, and the
//! normalization driver.

mod analysis;
mod normalize;
mod rules;

pub use analysis::{analyze_definitions, lookup_var_paths, DefinitionAnalysis};
pub use normalize::{normalize, normalize_report, replay, RewriteTrace, TraceStep, STEP_CEILING};
pub use rules::{rewrite_step, rule_catalog, RewriteRule, RuleFamily};
