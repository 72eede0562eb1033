use std::collections::HashMap;

use crate::classify::ArtifactRecord;
use crate::config::RunConfig;
use crate::runmeta::RunMetadata;

use super::*;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("bundle path {path:?} claimed by both {first:?} and {second:?}")]
    DuplicatePath {
        path: String,
        first: String,
        second: String,
    },
}

/// Builds the provenance graph of one run segment.
///
/// The activity is named after `config.run_name`; entity local names are
/// the records' bundle-relative paths. Relation ids are `u<k>`, `g<k>` and
/// `a<k>`, numbered per kind in record order.
pub fn build_document(
    records: &[ArtifactRecord],
    meta: &RunMetadata,
    config: &RunConfig,
) -> Result<ProvDocument, BuildError> {
    let prefix = config.prefix.as_str();
    let qn = |local: &str| QualifiedName::new(prefix, local);

    let mut seen: HashMap<&str, &ArtifactRecord> = HashMap::new();
    for record in records {
        if let Some(prev) = seen.insert(&record.bundle_relative_path, record) {
            return Err(BuildError::DuplicatePath {
                path: record.bundle_relative_path.clone(),
                first: prev.original_path.display().to_string(),
                second: record.original_path.display().to_string(),
            });
        }
    }

    let mut doc = ProvDocument::new();
    doc.prefixes
        .insert(prefix.to_string(), config.default_namespace.clone());
    doc.prefixes
        .insert(YPROV_PREFIX.to_string(), YPROV_NAMESPACE.to_string());

    let activity_id = qn(&config.run_name);
    doc.add_activity(ProvActivity {
        id: activity_id.clone(),
        command: meta.command.clone(),
        start_time: meta.start_time,
        end_time: meta.end_time,
        git_commit: meta.git_commit.clone(),
        exit_status: meta.exit_status,
        extra_attributes: BTreeMap::new(),
    });

    let agent_id = qn("agent");
    doc.add_agent(ProvAgent {
        id: agent_id.clone(),
        username: non_empty_or_unknown(&meta.username),
        hostname: non_empty_or_unknown(&meta.hostname),
    });

    let (mut used, mut generated) = (0usize, 0usize);
    for record in records {
        let entity_id = qn(&record.bundle_relative_path);
        let mut extra = BTreeMap::new();
        extra.insert(
            ATTR_ORIGINAL_PATH.to_string(),
            record.original_path.display().to_string(),
        );
        if let Some(reason) = record.skip_reason {
            extra.insert(ATTR_SKIP_REASON.to_string(), reason.as_str().to_string());
        }
        doc.add_entity(ProvEntity {
            id: entity_id.clone(),
            role: record.category,
            logged_by: record.logged_by,
            sha256: record.sha256.clone(),
            size_bytes: record.size_bytes,
            copied: record.copied,
            extra_attributes: extra,
        });

        if record.category != Role::Output {
            doc.push_relation(ProvRelation {
                kind: RelationKind::Used,
                relation_id: qn(&format!("u{used}")),
                subject: activity_id.clone(),
                object: entity_id.clone(),
            });
            used += 1;
        }
        if record.category == Role::Output || record.also_generated {
            doc.push_relation(ProvRelation {
                kind: RelationKind::WasGeneratedBy,
                relation_id: qn(&format!("g{generated}")),
                subject: entity_id,
                object: activity_id.clone(),
            });
            generated += 1;
        }
    }

    doc.push_relation(ProvRelation {
        kind: RelationKind::WasAssociatedWith,
        relation_id: qn("a0"),
        subject: activity_id,
        object: agent_id,
    });
    Ok(doc)
}

fn non_empty_or_unknown(s: &str) -> String {
    if s.trim().is_empty() {
        "unknown".to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use std::path::PathBuf;

    use super::*;
    use crate::classify::SkipReason;
    use crate::timestamp::Timestamp;

    pub(crate) fn meta() -> RunMetadata {
        RunMetadata {
            command: "python examples/main.py".into(),
            argv: vec!["python".into(), "examples/main.py".into()],
            start_time: Timestamp::from_millis(1_000).unwrap(),
            end_time: Timestamp::from_millis(2_000).unwrap(),
            exit_status: 0,
            username: "alice".into(),
            hostname: "host".into(),
            cwd: PathBuf::from("/work"),
            git_commit: None,
        }
    }

    fn record(path: &str, category: Role, bundle: &str) -> ArtifactRecord {
        ArtifactRecord {
            original_path: PathBuf::from(path),
            bundle_relative_path: bundle.into(),
            category,
            also_generated: false,
            logged_by: LoggedBy::Auto,
            sha256: Some("0".repeat(64)),
            size_bytes: Some(1),
            copied: true,
            skip_reason: None,
        }
    }

    fn count(doc: &ProvDocument, kind: RelationKind) -> usize {
        doc.relations_of(kind).count()
    }

    #[test]
    fn sample_script_run() {
        let records = vec![
            record("/work/results.csv", Role::Input, "inputs/results.csv"),
            record("/work/example.png", Role::Output, "outputs/example.png"),
            record("/work/examples/main.py", Role::Source, "src/examples/main.py"),
        ];
        let doc = build_document(&records, &meta(), &RunConfig::default()).unwrap();
        assert_eq!(doc.entities.len(), 3);
        assert_eq!(count(&doc, RelationKind::Used), 2);
        assert_eq!(count(&doc, RelationKind::WasGeneratedBy), 1);
        assert_eq!(count(&doc, RelationKind::WasAssociatedWith), 1);
        assert!(doc
            .entities
            .contains_key(&QualifiedName::new("yProv4DA", "inputs/results.csv")));
        assert!(doc
            .activities
            .contains_key(&QualifiedName::new("yProv4DA", "experiment_run")));
        assert!(validate(&doc).is_empty());
    }

    #[test]
    fn empty_run() {
        let doc = build_document(&[], &meta(), &RunConfig::default()).unwrap();
        assert_eq!(doc.activities.len(), 1);
        assert_eq!(doc.agents.len(), 1);
        assert!(doc.entities.is_empty());
        assert_eq!(doc.relations.len(), 1);
        assert_eq!(doc.relations[0].kind, RelationKind::WasAssociatedWith);
        assert!(validate(&doc).is_empty());
    }

    #[test]
    fn read_and_created_yields_both_edges() {
        let mut r = record("/work/results.csv", Role::Input, "inputs/results.csv");
        r.also_generated = true;
        let doc = build_document(&[r], &meta(), &RunConfig::default()).unwrap();
        assert_eq!(doc.entities.len(), 1);
        assert_eq!(count(&doc, RelationKind::Used), 1);
        assert_eq!(count(&doc, RelationKind::WasGeneratedBy), 1);
    }

    #[test]
    fn duplicate_bundle_path_is_rejected() {
        let records = vec![
            record("/a/x", Role::Input, "inputs/_external/a__x"),
            record("/a__x", Role::Input, "inputs/_external/a__x"),
        ];
        let err = build_document(&records, &meta(), &RunConfig::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("/a/x") && msg.contains("/a__x"), "{msg}");
    }

    #[test]
    fn relation_ids_follow_record_order() {
        let mut skipped = record("/work/big.nc", Role::Input, "inputs/big.nc");
        skipped.copied = false;
        skipped.skip_reason = Some(SkipReason::SizeThreshold);
        let records = vec![
            record("/work/a.csv", Role::Input, "inputs/a.csv"),
            skipped,
            record("/work/o.png", Role::Output, "outputs/o.png"),
        ];
        let doc = build_document(&records, &meta(), &RunConfig::default()).unwrap();
        let used: Vec<_> = doc
            .relations_of(RelationKind::Used)
            .map(|r| (r.relation_id.local.clone(), r.object.local.clone()))
            .collect();
        assert_eq!(
            used,
            [
                ("u0".to_string(), "inputs/a.csv".to_string()),
                ("u1".to_string(), "inputs/big.nc".to_string())
            ]
        );
        let big = &doc.entities[&QualifiedName::new("yProv4DA", "inputs/big.nc")];
        assert_eq!(big.extra_attributes[ATTR_SKIP_REASON], "size_threshold");
    }

    #[test]
    fn blank_identity_falls_back_to_unknown() {
        let mut m = meta();
        m.username.clear();
        m.hostname = " ".into();
        let doc = build_document(&[], &m, &RunConfig::default()).unwrap();
        let agent = doc.agents.values().next().unwrap();
        assert_eq!(agent.username, "unknown");
        assert_eq!(agent.hostname, "unknown");
    }
}
