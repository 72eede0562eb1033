//! W3C PROV graph types restricted to the constructs a single wrapped run
//! needs: entities, activities, one agent, and the `used`,
//! `wasGeneratedBy` and `wasAssociatedWith` relations.

mod build;
mod validate;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::timestamp::Timestamp;

pub use build::{build_document, BuildError};
pub use validate::{validate, Violation};

/// Namespace bound to the `yprov` prefix used by all custom attributes.
pub const YPROV_NAMESPACE: &str = "urn:yprov:";
pub const YPROV_PREFIX: &str = "yprov";

pub const ATTR_ROLE: &str = "yprov:role";
pub const ATTR_LOGGED_BY: &str = "yprov:logged_by";
pub const ATTR_SHA256: &str = "yprov:sha256";
pub const ATTR_SIZE_BYTES: &str = "yprov:size_bytes";
pub const ATTR_COPIED: &str = "yprov:copied";
pub const ATTR_ORIGINAL_PATH: &str = "yprov:original_path";
pub const ATTR_SKIP_REASON: &str = "yprov:skip_reason";
pub const ATTR_COMMAND: &str = "yprov:command";
pub const ATTR_GIT_COMMIT: &str = "yprov:git_commit";
pub const ATTR_EXIT_STATUS: &str = "yprov:exit_status";
pub const ATTR_USERNAME: &str = "yprov:username";
pub const ATTR_HOSTNAME: &str = "yprov:hostname";
pub const ATTR_START_TIME: &str = "prov:startTime";
pub const ATTR_END_TIME: &str = "prov:endTime";

/// Attribute keys carried by typed fields; they may not appear in `extra_attributes`.
pub(crate) const TYPED_ENTITY_ATTRS: [&str; 5] = [ATTR_ROLE, ATTR_LOGGED_BY, ATTR_SHA256, ATTR_SIZE_BYTES, ATTR_COPIED];
pub(crate) const TYPED_ACTIVITY_ATTRS: [&str; 5] = [
    ATTR_COMMAND,
    ATTR_GIT_COMMIT,
    ATTR_EXIT_STATUS,
    ATTR_START_TIME,
    ATTR_END_TIME,
];

/// A `prefix:local` identifier.
///
/// Ordering follows the rendered string so sorted maps iterate in the same
/// order the serializers emit keys.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QualifiedName {
    pub prefix: String,
    pub local: String,
}

impl QualifiedName {
    pub fn new(prefix: impl Into<String>, local: impl Into<String>) -> Self {
        QualifiedName {
            prefix: prefix.into(),
            local: local.into(),
        }
    }

    /// Splits at the first `:`. Both halves must be non-empty.
    pub fn parse(s: &str) -> Option<Self> {
        let (prefix, local) = s.split_once(':')?;
        if prefix.is_empty() || local.is_empty() {
            return None;
        }
        Some(QualifiedName::new(prefix, local))
    }

    fn rendered_bytes(&self) -> impl Iterator<Item = u8> + '_ {
        self.prefix
            .bytes()
            .chain(std::iter::once(b':'))
            .chain(self.local.bytes())
    }
}

impl Ord for QualifiedName {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rendered_bytes().cmp(other.rendered_bytes())
    }
}

impl PartialOrd for QualifiedName {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for QualifiedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.prefix, self.local)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Input,
    Output,
    Source,
    Environment,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Input => "input",
            Role::Output => "output",
            Role::Source => "source",
            Role::Environment => "environment",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "input" => Some(Role::Input),
            "output" => Some(Role::Output),
            "source" => Some(Role::Source),
            "environment" => Some(Role::Environment),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LoggedBy {
    Auto,
    User,
}

impl LoggedBy {
    pub fn as_str(self) -> &'static str {
        match self {
            LoggedBy::Auto => "auto",
            LoggedBy::User => "user",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "auto" => Some(LoggedBy::Auto),
            "user" => Some(LoggedBy::User),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvEntity {
    pub id: QualifiedName,
    pub role: Role,
    pub logged_by: LoggedBy,
    pub sha256: Option<String>,
    pub size_bytes: Option<u64>,
    pub copied: bool,
    pub extra_attributes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvActivity {
    pub id: QualifiedName,
    pub command: String,
    pub start_time: Timestamp,
    pub end_time: Timestamp,
    pub git_commit: Option<String>,
    pub exit_status: i32,
    pub extra_attributes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvAgent {
    pub id: QualifiedName,
    pub username: String,
    pub hostname: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationKind {
    Used,
    WasGeneratedBy,
    WasAssociatedWith,
}

impl RelationKind {
    /// The PROV-JSON section name.
    pub fn section(self) -> &'static str {
        match self {
            RelationKind::Used => "used",
            RelationKind::WasGeneratedBy => "wasGeneratedBy",
            RelationKind::WasAssociatedWith => "wasAssociatedWith",
        }
    }
}

/// `subject` and `object` follow the PROV argument order: Used is
/// activity→entity, WasGeneratedBy entity→activity, WasAssociatedWith
/// activity→agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvRelation {
    pub kind: RelationKind,
    pub relation_id: QualifiedName,
    pub subject: QualifiedName,
    pub object: QualifiedName,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProvDocument {
    pub prefixes: BTreeMap<String, String>,
    pub entities: BTreeMap<QualifiedName, ProvEntity>,
    pub activities: BTreeMap<QualifiedName, ProvActivity>,
    pub agents: BTreeMap<QualifiedName, ProvAgent>,
    /// Grouped by kind (Used, WasGeneratedBy, WasAssociatedWith), insertion
    /// order within each group. Use [`ProvDocument::push_relation`].
    pub relations: Vec<ProvRelation>,
}

impl ProvDocument {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_entity(&mut self, entity: ProvEntity) {
        self.entities.insert(entity.id.clone(), entity);
    }

    pub fn add_activity(&mut self, activity: ProvActivity) {
        self.activities.insert(activity.id.clone(), activity);
    }

    pub fn add_agent(&mut self, agent: ProvAgent) {
        self.agents.insert(agent.id.clone(), agent);
    }

    /// Appends after the last relation of the same or an earlier kind.
    pub fn push_relation(&mut self, relation: ProvRelation) {
        let at = self
            .relations
            .iter()
            .rposition(|r| r.kind <= relation.kind)
            .map_or(0, |i| i + 1);
        self.relations.insert(at, relation);
    }

    pub fn relations_of(&self, kind: RelationKind) -> impl Iterator<Item = &ProvRelation> {
        self.relations.iter().filter(move |r| r.kind == kind)
    }
}
