//! The concrete JSON dialect: query parsing/printing and instance files.

mod instance;
mod parse;
mod print;

pub use instance::{instance_to_dvalue, load_instance};
pub use parse::parse_query;
pub use print::{print_query, print_query_compact, query_to_dvalue};
pub(crate) use print::stage_to_dvalue;

use std::fmt;

/// Whether an issue is about JSON/operator shape or a semantic rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IssueKind {
    Syntax,
    Validation,
}

/// A located parse or validation problem.  `location` is a JSON pointer
/// into the input document ("" is the root).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseIssue {
    pub location: String,
    pub message: String,
    pub kind: IssueKind,
}

impl fmt::Display for ParseIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            IssueKind::Syntax => "syntax",
            IssueKind::Validation => "validation",
        };
        write!(f, "{kind} error at `{}`: {}", self.location, self.message)
    }
}

/// Appends a JSON-pointer token, escaping per RFC 6901.
pub(crate) fn join_pointer(base: &str, token: &str) -> String {
    let escaped = token.replace('~', "~0").replace('/', "~1");
    format!("{base}/{escaped}")
}
