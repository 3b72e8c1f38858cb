//! Reference engine for MQuery, a formal core of document aggregation
//! pipelines.
//!
//! The crate is organised bottom-up:
//!
//! * [`dvalue`] — the document data model: d-values (literals, arrays,
//!   objects with ordered key-value pairs), paths, the natural total order,
//!   and the structural merge/override primitives.
//! * [`expr`] — terms and Boolean expressions, their evaluators, the
//!   builtin function registry, and the path-usage analysis.
//! * [`engine`] — pipeline stages and query evaluation over database
//!   instances.
//! * [`syntax`] — a JSON surface syntax: parsing, printing, and instance
//!   loading with located diagnostics.
//! * [`optimizer`] — precondition-checked rewrite rules and a
//!   normalization driver with replayable traces.
//! * [`harness`] — seeded instance/query generators, a bag-equality
//!   differential checker, the golden corpus, and the rule-soundness
//!   fuzzer.

pub mod dvalue;
pub mod expr;
pub mod engine;
pub mod syntax;
pub mod optimizer;
pub mod harness;
