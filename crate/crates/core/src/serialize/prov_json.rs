use std::collections::BTreeMap;

use serde_json::{Map, Value};

use super::{pretty_json, InvalidDocument};
use crate::prov::*;
use crate::timestamp::Timestamp;

const SECTIONS: [&str; 7] = [
    "prefix",
    "entity",
    "activity",
    "agent",
    "used",
    "wasGeneratedBy",
    "wasAssociatedWith",
];

/// Serializes a valid document as PROV-JSON.
///
/// Sections appear in a fixed order and are omitted when empty. Node keys
/// and attribute keys are sorted; relations keep document order. Every
/// attribute value is a string.
pub fn to_prov_json(doc: &ProvDocument) -> Result<Vec<u8>, InvalidDocument> {
    let violations = validate(doc);
    if !violations.is_empty() {
        return Err(InvalidDocument(violations));
    }

    let mut root = Map::new();
    root.insert(
        "prefix".into(),
        Value::Object(
            doc.prefixes
                .iter()
                .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                .collect(),
        ),
    );

    if !doc.entities.is_empty() {
        let section = doc
            .entities
            .values()
            .map(|e| (e.id.to_string(), attrs_object(entity_attrs(e))))
            .collect();
        root.insert("entity".into(), Value::Object(section));
    }
    let activities = doc
        .activities
        .values()
        .map(|a| (a.id.to_string(), attrs_object(activity_attrs(a))))
        .collect();
    root.insert("activity".into(), Value::Object(activities));
    let agents = doc
        .agents
        .values()
        .map(|g| {
            let attrs = BTreeMap::from([
                (ATTR_HOSTNAME.to_string(), g.hostname.clone()),
                (ATTR_USERNAME.to_string(), g.username.clone()),
            ]);
            (g.id.to_string(), attrs_object(attrs))
        })
        .collect();
    root.insert("agent".into(), Value::Object(agents));

    for kind in [
        RelationKind::Used,
        RelationKind::WasGeneratedBy,
        RelationKind::WasAssociatedWith,
    ] {
        let section: Map<String, Value> = doc
            .relations_of(kind)
            .map(|r| {
                let (a, b) = relation_endpoints(r);
                let mut obj = Map::new();
                obj.insert(a.0.into(), Value::String(a.1.to_string()));
                obj.insert(b.0.into(), Value::String(b.1.to_string()));
                (r.relation_id.to_string(), Value::Object(obj))
            })
            .collect();
        if !section.is_empty() {
            root.insert(kind.section().into(), Value::Object(section));
        }
    }
    Ok(pretty_json(&Value::Object(root)))
}

/// The two endpoint keys in lexicographic order.
fn relation_endpoints(r: &ProvRelation) -> ((&'static str, &QualifiedName), (&'static str, &QualifiedName)) {
    match r.kind {
        RelationKind::Used => (("prov:activity", &r.subject), ("prov:entity", &r.object)),
        RelationKind::WasGeneratedBy => (("prov:activity", &r.object), ("prov:entity", &r.subject)),
        RelationKind::WasAssociatedWith => (("prov:activity", &r.subject), ("prov:agent", &r.object)),
    }
}

fn entity_attrs(e: &ProvEntity) -> BTreeMap<String, String> {
    let mut m = e.extra_attributes.clone();
    m.insert(ATTR_ROLE.into(), e.role.as_str().into());
    m.insert(ATTR_LOGGED_BY.into(), e.logged_by.as_str().into());
    m.insert(ATTR_COPIED.into(), e.copied.to_string());
    if let Some(d) = &e.sha256 {
        m.insert(ATTR_SHA256.into(), d.clone());
    }
    if let Some(s) = e.size_bytes {
        m.insert(ATTR_SIZE_BYTES.into(), s.to_string());
    }
    m
}

fn activity_attrs(a: &ProvActivity) -> BTreeMap<String, String> {
    let mut m = a.extra_attributes.clone();
    m.insert(ATTR_START_TIME.into(), a.start_time.to_string());
    m.insert(ATTR_END_TIME.into(), a.end_time.to_string());
    m.insert(ATTR_COMMAND.into(), a.command.clone());
    m.insert(ATTR_EXIT_STATUS.into(), a.exit_status.to_string());
    if let Some(c) = &a.git_commit {
        m.insert(ATTR_GIT_COMMIT.into(), c.clone());
    }
    m
}

fn attrs_object(attrs: BTreeMap<String, String>) -> Value {
    Value::Object(attrs.into_iter().map(|(k, v)| (k, Value::String(v))).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("not valid JSON: {0}")]
    Json(String),
    #[error("expected a JSON object at {0}")]
    NotAnObject(String),
    #[error("unknown top-level key {0:?}")]
    UnknownSection(String),
    #[error("missing required section {0:?}")]
    MissingSection(&'static str),
    #[error("{0:?} is not a qualified name")]
    BadName(String),
    #[error("prefix {prefix:?} used by {id:?} is not declared")]
    UndeclaredPrefix { prefix: String, id: String },
    #[error("{id}: attribute {key:?}: {message}")]
    Attribute { id: String, key: String, message: String },
    #[error("relation {id}: {message}")]
    Relation { id: String, message: String },
    #[error(transparent)]
    Invalid(#[from] InvalidDocument),
}

/// Reads a document written by [`to_prov_json`].
pub fn parse_prov_json(bytes: &[u8]) -> Result<ProvDocument, ParseError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| ParseError::Json(e.to_string()))?;
    let root = value
        .as_object()
        .ok_or_else(|| ParseError::NotAnObject("document root".into()))?;
    if let Some(unknown) = root.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
        return Err(ParseError::UnknownSection(unknown.clone()));
    }
    for required in ["prefix", "activity", "agent"] {
        if !root.contains_key(required) {
            return Err(ParseError::MissingSection(required));
        }
    }

    let mut doc = ProvDocument::new();
    for (prefix, ns) in object(root, "prefix")? {
        let ns = ns
            .as_str()
            .ok_or_else(|| ParseError::NotAnObject(format!("prefix.{prefix} (expected a string)")))?;
        doc.prefixes.insert(prefix.clone(), ns.to_string());
    }
    let name = |s: &str, doc: &ProvDocument| -> Result<QualifiedName, ParseError> {
        let q = QualifiedName::parse(s).ok_or_else(|| ParseError::BadName(s.to_string()))?;
        if !doc.prefixes.contains_key(&q.prefix) {
            return Err(ParseError::UndeclaredPrefix {
                prefix: q.prefix,
                id: s.to_string(),
            });
        }
        Ok(q)
    };

    if root.contains_key("entity") {
        for (key, attrs) in object(root, "entity")? {
            let id = name(key, &doc)?;
            let mut attrs = string_attrs(key, attrs)?;
            let role = take(&mut attrs, key, ATTR_ROLE)?;
            let role = Role::parse(&role).ok_or_else(|| attr_err(key, ATTR_ROLE, "unknown role"))?;
            let logged = take(&mut attrs, key, ATTR_LOGGED_BY)?;
            let logged_by =
                LoggedBy::parse(&logged).ok_or_else(|| attr_err(key, ATTR_LOGGED_BY, "expected auto or user"))?;
            let copied = match take(&mut attrs, key, ATTR_COPIED)?.as_str() {
                "true" => true,
                "false" => false,
                _ => return Err(attr_err(key, ATTR_COPIED, "expected \"true\" or \"false\"")),
            };
            let sha256 = attrs.remove(ATTR_SHA256);
            let size_bytes = attrs
                .remove(ATTR_SIZE_BYTES)
                .map(|s| parse_canonical_u64(&s).ok_or_else(|| attr_err(key, ATTR_SIZE_BYTES, "not a byte count")))
                .transpose()?;
            doc.add_entity(ProvEntity {
                id,
                role,
                logged_by,
                sha256,
                size_bytes,
                copied,
                extra_attributes: attrs,
            });
        }
    }

    for (key, attrs) in object(root, "activity")? {
        let id = name(key, &doc)?;
        let mut attrs = string_attrs(key, attrs)?;
        let time = |attrs: &mut BTreeMap<String, String>, k: &str| -> Result<Timestamp, ParseError> {
            take(attrs, key, k)?
                .parse()
                .map_err(|e: crate::timestamp::TimestampParseError| attr_err(key, k, &e.to_string()))
        };
        let start_time = time(&mut attrs, ATTR_START_TIME)?;
        let end_time = time(&mut attrs, ATTR_END_TIME)?;
        let command = take(&mut attrs, key, ATTR_COMMAND)?;
        let status = take(&mut attrs, key, ATTR_EXIT_STATUS)?;
        let exit_status = status
            .parse::<i32>()
            .ok()
            .filter(|n| n.to_string() == status)
            .ok_or_else(|| attr_err(key, ATTR_EXIT_STATUS, "not an integer"))?;
        let git_commit = attrs.remove(ATTR_GIT_COMMIT);
        doc.add_activity(ProvActivity {
            id,
            command,
            start_time,
            end_time,
            git_commit,
            exit_status,
            extra_attributes: attrs,
        });
    }

    for (key, attrs) in object(root, "agent")? {
        let id = name(key, &doc)?;
        let mut attrs = string_attrs(key, attrs)?;
        let username = take(&mut attrs, key, ATTR_USERNAME)?;
        let hostname = take(&mut attrs, key, ATTR_HOSTNAME)?;
        if let Some(extra) = attrs.keys().next() {
            return Err(attr_err(key, extra, "unsupported agent attribute"));
        }
        doc.add_agent(ProvAgent { id, username, hostname });
    }

    for kind in [
        RelationKind::Used,
        RelationKind::WasGeneratedBy,
        RelationKind::WasAssociatedWith,
    ] {
        let section = kind.section();
        if !root.contains_key(section) {
            continue;
        }
        let object_key = match kind {
            RelationKind::Used | RelationKind::WasGeneratedBy => "prov:entity",
            RelationKind::WasAssociatedWith => "prov:agent",
        };
        for (key, body) in object(root, section)? {
            let relation_id = name(key, &doc)?;
            let rel_err = |message: String| ParseError::Relation {
                id: key.clone(),
                message,
            };
            let body = body.as_object().ok_or_else(|| rel_err("expected an object".into()))?;
            if body.len() != 2 || !body.contains_key("prov:activity") || !body.contains_key(object_key) {
                return Err(rel_err(format!(
                    "{section} requires exactly \"prov:activity\" and {object_key:?}"
                )));
            }
            let endpoint = |k: &str| -> Result<QualifiedName, ParseError> {
                let s = body[k]
                    .as_str()
                    .ok_or_else(|| rel_err(format!("{k} must be a string")))?;
                name(s, &doc)
            };
            let activity = endpoint("prov:activity")?;
            let other = endpoint(object_key)?;

            let (subject, object) = match kind {
                RelationKind::WasGeneratedBy => (other, activity),
                _ => (activity, other),
            };
            doc.push_relation(ProvRelation {
                kind,
                relation_id,
                subject,
                object,
            });
        }
    }

    let violations = validate(&doc);
    if !violations.is_empty() {
        return Err(InvalidDocument(violations).into());
    }
    Ok(doc)
}

fn object<'a>(root: &'a Map<String, Value>, key: &str) -> Result<&'a Map<String, Value>, ParseError> {
    root.get(key)
        .and_then(Value::as_object)
        .ok_or_else(|| ParseError::NotAnObject(key.to_string()))
}

fn string_attrs(id: &str, v: &Value) -> Result<BTreeMap<String, String>, ParseError> {
    let obj = v.as_object().ok_or_else(|| ParseError::NotAnObject(id.to_string()))?;
    obj.iter()
        .map(|(k, v)| {
            v.as_str()
                .map(|s| (k.clone(), s.to_string()))
                .ok_or_else(|| attr_err(id, k, "value must be a string"))
        })
        .collect()
}

fn take(attrs: &mut BTreeMap<String, String>, id: &str, key: &str) -> Result<String, ParseError> {
    attrs.remove(key).ok_or_else(|| attr_err(id, key, "missing"))
}

fn attr_err(id: &str, key: &str, message: &str) -> ParseError {
    ParseError::Attribute {
        id: id.to_string(),
        key: key.to_string(),
        message: message.to_string(),
    }
}

/// Only the canonical decimal form, so re-serialization reproduces the input.
fn parse_canonical_u64(s: &str) -> Option<u64> {
    s.parse::<u64>().ok().filter(|n| n.to_string() == s)
}
