use std::collections::BTreeMap;

use proptest::prelude::*;
use provcap::prov::*;
use provcap::serialize::{parse_prov_json, to_dot, to_prov_json};
use provcap::Timestamp;

const PREFIX: &str = "ex";

fn qn(local: &str) -> QualifiedName {
    QualifiedName::new(PREFIX, local)
}

fn arb_local() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9_./é-]{1,12}"
}

fn arb_hex(len: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(b"0123456789abcdef".to_vec()), len)
        .prop_map(|v| String::from_utf8(v).unwrap())
}

fn arb_role() -> impl Strategy<Value = Role> {
    prop::sample::select(vec![Role::Input, Role::Output, Role::Source, Role::Environment])
}

#[derive(Debug, Clone)]
struct EntitySpec {
    local: String,
    role: Role,
    user: bool,
    copied: bool,
    digest: Option<(String, u64)>,
    original: Option<String>,
}

fn arb_entity() -> impl Strategy<Value = EntitySpec> {
    (
        arb_local(),
        arb_role(),
        any::<bool>(),
        any::<bool>(),
        prop::option::of((arb_hex(64), any::<u64>())),
        prop::option::of("[ -~]{0,20}"),
    )
        .prop_map(|(local, role, user, copied, digest, original)| EntitySpec {
            local,
            role,
            user,
            copied,
            digest,
            original,
        })
}

fn arb_document() -> impl Strategy<Value = ProvDocument> {
    (
        prop::collection::vec(arb_entity(), 0..6),
        arb_local(),
        "[ -~]{0,30}",
        0i64..4_000_000_000_000,
        0i64..100_000_000,
        prop::option::of(arb_hex(40)),
        any::<i32>(),
        ("[a-z]{1,8}", "[a-z.-]{1,12}"),
    )
        .prop_map(|(entities, run, command, start, dur, commit, status, (user, host))| {
            let mut doc = ProvDocument::new();
            doc.prefixes.insert(PREFIX.into(), "http://example.org/".into());
            doc.prefixes.insert(YPROV_PREFIX.into(), YPROV_NAMESPACE.into());
            let activity = qn(&format!("run-{run}"));
            doc.add_activity(ProvActivity {
                id: activity.clone(),
                command,
                start_time: Timestamp::from_millis(start).unwrap(),
                end_time: Timestamp::from_millis(start + dur).unwrap(),
                git_commit: commit,
                exit_status: status,
                extra_attributes: BTreeMap::new(),
            });
            doc.add_agent(ProvAgent {
                id: qn("agent"),
                username: user,
                hostname: host,
            });
            let (mut u, mut g) = (0, 0);
            for e in entities {
                let id = qn(&format!("f/{}", e.local));
                if doc.entities.contains_key(&id) {
                    continue;
                }
                let copied = e.copied && e.digest.is_some();
                let mut extra = BTreeMap::new();
                if let Some(o) = e.original {
                    extra.insert(ATTR_ORIGINAL_PATH.to_string(), o);
                }
                doc.add_entity(ProvEntity {
                    id: id.clone(),
                    role: e.role,
                    logged_by: if e.user { LoggedBy::User } else { LoggedBy::Auto },
                    sha256: e.digest.as_ref().map(|d| d.0.clone()),
                    size_bytes: e.digest.as_ref().map(|d| d.1),
                    copied,
                    extra_attributes: extra,
                });
                if e.role == Role::Output {
                    doc.push_relation(ProvRelation {
                        kind: RelationKind::WasGeneratedBy,
                        relation_id: qn(&format!("g{g}")),
                        subject: id,
                        object: activity.clone(),
                    });
                    g += 1;
                } else {
                    doc.push_relation(ProvRelation {
                        kind: RelationKind::Used,
                        relation_id: qn(&format!("u{u}")),
                        subject: activity.clone(),
                        object: id,
                    });
                    u += 1;
                }
            }
            doc.push_relation(ProvRelation {
                kind: RelationKind::WasAssociatedWith,
                relation_id: qn("a0"),
                subject: activity,
                object: qn("agent"),
            });
            doc
        })
}

proptest! {
    #[test]
    fn round_trip(doc in arb_document()) {
        prop_assert!(validate(&doc).is_empty(), "{:?}", validate(&doc));
        let bytes = to_prov_json(&doc).unwrap();
        let back = parse_prov_json(&bytes).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(to_prov_json(&back).unwrap(), bytes.clone());
        prop_assert_eq!(to_prov_json(&doc).unwrap(), bytes.clone());
        let text = String::from_utf8(bytes).unwrap();
        prop_assert!(!text.contains('\r'));
        prop_assert!(text.lines().all(|l| !l.ends_with(' ')));
    }

    #[test]
    fn dot_is_deterministic(doc in arb_document()) {
        let dot = to_dot(&doc).unwrap();
        prop_assert_eq!(&to_dot(&doc.clone()).unwrap(), &dot);
        let edges = dot.lines().filter(|l| l.contains(" -> ")).count();
        prop_assert_eq!(edges, doc.relations.len() + doc.activities.len());
    }
}
