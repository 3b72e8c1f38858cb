//! Pipeline stages and query evaluation.

mod eval;

pub use eval::{eval_query, ground_template};

use crate::dvalue::Path;
use crate::expr::{BoolExpr, PathRef, Term};

/// A projection definition `target/value`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathDefinition {
    pub target: Path,
    pub value: Term,
}

impl PathDefinition {
    /// An idle definition copies its own target (`p/p`).
    pub fn is_idle(&self) -> bool {
        matches!(&self.value, Term::Path(PathRef { var: None, path }) if *path == self.target)
    }

    pub fn idle(target: Path) -> PathDefinition {
        PathDefinition { value: Term::path(target.clone()), target }
    }
}

/// A lookup variable definition `x/p`.
#[derive(Clone, Debug, PartialEq)]
pub struct VariableDefinition {
    pub var: String,
    pub source: Path,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SortDirection {
    Ascending,
    Descending,
}

/// One sort criterion: a path with a direction.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectComparator {
    pub path: Path,
    pub direction: SortDirection,
}

/// A pipeline stage.
#[derive(Clone, Debug, PartialEq)]
pub enum Stage {
    Match(BoolExpr),
    Unwind(Path),
    Project(Vec<PathDefinition>),
    /// Group by the value of key `id` (`None` puts everything in one
    /// class) and collate the values of the `collect` keys.
    Group { id: Option<String>, collect: Vec<String> },
    /// Join: for each document, ground `template` with the values the
    /// `vars` read from it, run it, and attach the result array at `as_`.
    Lookup { vars: Vec<VariableDefinition>, template: Box<Query>, as_: Path },
    /// Recursive traversal of `from_coll`: seed values (read at
    /// `start_with`) match targets at `connect_to`; discovered targets
    /// chain on via their `connect_from` values.
    GraphLookup {
        from_coll: String,
        start_with: Path,
        connect_from: Path,
        connect_to: Path,
        as_: Path,
    },
    UnionWith(Box<Query>),
    Count(String),
    Sort(Vec<ObjectComparator>),
    Limit(usize),
    Skip(usize),
}

/// A query: a source collection name followed by a stage sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub source: String,
    pub stages: Vec<Stage>,
}

impl Query {
    pub fn new(source: impl Into<String>, stages: Vec<Stage>) -> Query {
        Query { source: source.into(), stages }
    }
}
