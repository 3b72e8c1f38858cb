//! Loading database-instance files.

use crate::dvalue::{parse_dvalue, DValue, DatabaseInstance, SemanticsMode};

use super::{join_pointer, IssueKind, ParseIssue};

/// Loads an instance file: a JSON object mapping collection names to
/// arrays of documents.  Every document needs an `_id`, unique within its
/// collection; field order is preserved.
pub fn load_instance(text: &str, mode: SemanticsMode) -> Result<DatabaseInstance, Vec<ParseIssue>> {
    let doc = match parse_dvalue(text) {
        Ok(doc) => doc,
        Err(e) => {
            return Err(vec![ParseIssue {
                location: String::new(),
                message: format!("invalid JSON: {e}"),
                kind: IssueKind::Syntax,
            }])
        }
    };
    let mut issues = Vec::new();
    fn syntax_issue(issues: &mut Vec<ParseIssue>, loc: String, message: String) {
        issues.push(ParseIssue { location: loc, message, kind: IssueKind::Syntax });
    }

    let mut instance = DatabaseInstance::new(mode);
    let Some(collections) = doc.as_object() else {
        syntax_issue(&mut issues, String::new(), "instance file must be an object of collections".into());
        return Err(issues);
    };
    for (name, coll_v) in collections.iter() {
        let coll_loc = join_pointer("", name);
        let Some(docs) = coll_v.as_array() else {
            syntax_issue(&mut issues, coll_loc, format!("collection \"{name}\" must be an array"));
            continue;
        };
        let mut coll = Vec::with_capacity(docs.len());
        let mut ids: Vec<&DValue> = Vec::new();
        for (i, d) in docs.iter().enumerate() {
            let doc_loc = join_pointer(&coll_loc, &i.to_string());
            let Some(o) = d.as_object() else {
                syntax_issue(&mut issues, doc_loc, "document must be an object".into());
                continue;
            };
            let Some(id) = o.get("_id") else {
                issues.push(ParseIssue {
                    location: doc_loc,
                    message: "document has no \"_id\"".into(),
                    kind: IssueKind::Validation,
                });
                continue;
            };
            // Identifier equality is structural regardless of mode:
            // identifiers are scalars in practice.
            if ids.contains(&id) {
                issues.push(ParseIssue {
                    location: join_pointer(&doc_loc, "_id"),
                    message: format!("duplicate identifier {id} in collection \"{name}\""),
                    kind: IssueKind::Validation,
                });
                continue;
            }
            ids.push(id);
            coll.push(o.clone());
        }
        instance.collections.insert(name.clone(), coll);
    }
    if issues.is_empty() {
        Ok(instance)
    } else {
        Err(issues)
    }
}

/// The instance as a d-value in the file format `load_instance` reads.
/// Collections appear in the instance's (sorted) storage order.
pub fn instance_to_dvalue(instance: &DatabaseInstance) -> DValue {
    let mut out = crate::dvalue::Object::new();
    for (name, docs) in &instance.collections {
        out.push(
            name.clone(),
            DValue::Array(docs.iter().map(|d| DValue::Object(d.clone())).collect()),
        );
    }
    DValue::Object(out)
}
