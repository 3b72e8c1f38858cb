//! Syntactic analysis of projection definitions and lookup variables,
//! feeding the rewrite-rule preconditions.

use std::collections::BTreeSet;

use crate::dvalue::Path;
use crate::engine::{PathDefinition, VariableDefinition};
use crate::expr::paths_of_term;

/// What a projection's definitions copy and read.
#[derive(Clone, Debug, Default)]
pub struct DefinitionAnalysis {
    /// Targets of idle definitions (`p/p`).
    pub idle: BTreeSet<Path>,
    /// Paths read by any right-hand side, idle ones included.
    pub rhs_paths: BTreeSet<Path>,
    /// Paths read by non-idle right-hand sides only.
    pub rhs_paths_non_idle: BTreeSet<Path>,
}

pub fn analyze_definitions(defs: &[PathDefinition]) -> DefinitionAnalysis {
    let mut out = DefinitionAnalysis::default();
    for def in defs {
        let read = paths_of_term(&def.value);
        if def.is_idle() {
            out.idle.insert(def.target.clone());
        } else {
            out.rhs_paths_non_idle.extend(read.iter().cloned());
        }
        out.rhs_paths.extend(read);
    }
    out
}

/// The source paths a lookup's variable set reads from each document.
pub fn lookup_var_paths(vars: &[VariableDefinition]) -> BTreeSet<Path> {
    vars.iter().map(|vd| vd.source.clone()).collect()
}

/// Whether `p` extends some member of `set` (the member may be `p` itself).
pub fn in_extensions<'a>(p: &Path, set: impl IntoIterator<Item = &'a Path>) -> bool {
    set.into_iter().any(|t| t.is_prefix_of(p))
}

/// Whether every path of `paths` extends some member of `set`.
pub fn all_in_extensions<'a, 'b>(
    paths: impl IntoIterator<Item = &'a Path>,
    set: &'b BTreeSet<Path>,
) -> bool {
    paths.into_iter().all(|p| in_extensions(p, set))
}
