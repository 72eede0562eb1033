use std::collections::HashSet;
use std::fmt;

use crate::config::is_valid_local_name;
use crate::digest::{is_commit_hex, is_sha256_hex};

use super::*;

/// One broken document invariant: the offending id and the rule it breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub id: String,
    pub rule: String,
}

impl Violation {
    fn new(id: impl fmt::Display, rule: impl Into<String>) -> Self {
        Violation {
            id: id.to_string(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.id, self.rule)
    }
}

/// Checks every document invariant. An empty result means the document is valid.
pub fn validate(doc: &ProvDocument) -> Vec<Violation> {
    let mut out = Vec::new();

    for (prefix, ns) in &doc.prefixes {
        if !crate::config::is_valid_prefix(prefix) {
            out.push(Violation::new(prefix, "prefix is not a valid name"));
        }
        if ns.is_empty() {
            out.push(Violation::new(prefix, "namespace URI is empty"));
        }
    }

    let check_name = |q: &QualifiedName, out: &mut Vec<Violation>| {
        if !doc.prefixes.contains_key(&q.prefix) {
            out.push(Violation::new(q, format!("prefix {:?} is not declared", q.prefix)));
        }
        if !is_valid_local_name(&q.local) {
            out.push(Violation::new(q, "local part is empty or contains whitespace or '\\'"));
        }
    };
    let check_attr_key = |owner: &QualifiedName, key: &str, out: &mut Vec<Violation>| match QualifiedName::parse(key) {
        Some(q) if q.prefix == "prov" || doc.prefixes.contains_key(&q.prefix) => {}
        Some(q) => out.push(Violation::new(
            owner,
            format!("attribute {key:?} uses undeclared prefix {:?}", q.prefix),
        )),
        None => out.push(Violation::new(
            owner,
            format!("attribute {key:?} is not a qualified name"),
        )),
    };

    let mut node_ids: HashSet<&QualifiedName> = HashSet::new();
    for (key, e) in &doc.entities {
        if key != &e.id {
            out.push(Violation::new(key, "map key differs from entity id"));
        }
        check_name(&e.id, &mut out);
        if !node_ids.insert(&e.id) {
            out.push(Violation::new(&e.id, "id declared more than once"));
        }
        if e.copied && (e.sha256.is_none() || e.size_bytes.is_none()) {
            out.push(Violation::new(&e.id, "copied entity lacks sha256 or size_bytes"));
        }
        if let Some(d) = &e.sha256 {
            if !is_sha256_hex(d) {
                out.push(Violation::new(&e.id, "sha256 is not 64 lowercase hex characters"));
            }
        }
        for key in e.extra_attributes.keys() {
            if TYPED_ENTITY_ATTRS.contains(&key.as_str()) {
                out.push(Violation::new(
                    &e.id,
                    format!("extra attribute {key:?} shadows a typed field"),
                ));
            }
            check_attr_key(&e.id, key, &mut out);
        }
    }
    for (key, a) in &doc.activities {
        if key != &a.id {
            out.push(Violation::new(key, "map key differs from activity id"));
        }
        check_name(&a.id, &mut out);
        if !node_ids.insert(&a.id) {
            out.push(Violation::new(&a.id, "id declared more than once"));
        }
        if a.start_time > a.end_time {
            out.push(Violation::new(&a.id, "start_time is after end_time"));
        }
        if let Some(c) = &a.git_commit {
            if !is_commit_hex(c) {
                out.push(Violation::new(&a.id, "git_commit is not 40 lowercase hex characters"));
            }
        }
        for key in a.extra_attributes.keys() {
            if TYPED_ACTIVITY_ATTRS.contains(&key.as_str()) {
                out.push(Violation::new(
                    &a.id,
                    format!("extra attribute {key:?} shadows a typed field"),
                ));
            }
            check_attr_key(&a.id, key, &mut out);
        }
    }
    for (key, g) in &doc.agents {
        if key != &g.id {
            out.push(Violation::new(key, "map key differs from agent id"));
        }
        check_name(&g.id, &mut out);
        if !node_ids.insert(&g.id) {
            out.push(Violation::new(&g.id, "id declared more than once"));
        }
        if g.username.is_empty() || g.hostname.is_empty() {
            out.push(Violation::new(&g.id, "username and hostname must be non-empty"));
        }
    }

    if doc.agents.len() != 1 {
        out.push(Violation::new(
            "document",
            format!("expected exactly one agent, found {}", doc.agents.len()),
        ));
    }
    if doc.activities.is_empty() {
        out.push(Violation::new("document", "expected at least one activity"));
    }

    let mut relation_ids: HashSet<&QualifiedName> = HashSet::new();
    let mut last_kind = None;
    for r in &doc.relations {
        check_name(&r.relation_id, &mut out);
        if !relation_ids.insert(&r.relation_id) {
            out.push(Violation::new(&r.relation_id, "relation id is not unique"));
        }
        if last_kind.is_some_and(|k| k > r.kind) {
            out.push(Violation::new(&r.relation_id, "relations are not grouped by kind"));
        }
        last_kind = Some(r.kind);

        let (subject_ok, object_ok, expected) = match r.kind {
            RelationKind::Used => (
                doc.activities.contains_key(&r.subject),
                doc.entities.contains_key(&r.object),
                ("activity", "entity"),
            ),
            RelationKind::WasGeneratedBy => (
                doc.entities.contains_key(&r.subject),
                doc.activities.contains_key(&r.object),
                ("entity", "activity"),
            ),
            RelationKind::WasAssociatedWith => (
                doc.activities.contains_key(&r.subject),
                doc.agents.contains_key(&r.object),
                ("activity", "agent"),
            ),
        };
        if !subject_ok {
            out.push(Violation::new(
                &r.subject,
                format!(
                    "{} {} does not reference a declared {}",
                    r.kind.section(),
                    r.relation_id,
                    expected.0
                ),
            ));
        }
        if !object_ok {
            out.push(Violation::new(
                &r.object,
                format!(
                    "{} {} does not reference a declared {}",
                    r.kind.section(),
                    r.relation_id,
                    expected.1
                ),
            ));
        }
    }
    out
}
