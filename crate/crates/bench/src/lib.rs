//! Synthetic inputs shared by the benchmarks.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use provcap::prov::*;
use provcap::Timestamp;

/// Writes `files` files of `size` bytes spread over a few nested directories.
pub fn write_tree(root: &Path, files: usize, size: usize) -> io::Result<()> {
    for i in 0..files {
        let dir = root.join(format!("d{}/e{}", i % 7, i % 3));
        fs::create_dir_all(&dir)?;
        let body: Vec<u8> = (0..size).map(|j| (i * 31 + j) as u8).collect();
        fs::write(dir.join(format!("f{i}.dat")), body)?;
    }
    Ok(())
}

/// A transcript of `n` lines mixing reads, writes, failures, split calls and noise.
pub fn trace_lines(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            let pid = 4000 + (i % 4);
            let t = format!("1700000000.{:06}", i % 1_000_000);
            match i % 6 {
                0 => format!("{pid} {t} openat(AT_FDCWD, \"data/in{i}.csv\", O_RDONLY|O_CLOEXEC) = 3"),
                1 => format!("{pid} {t} openat(AT_FDCWD, \"out/{i}.png\", O_WRONLY|O_CREAT|O_TRUNC, 0666) = 4"),
                2 => {
                    format!("{pid} {t} openat(AT_FDCWD, \"gone{i}\", O_RDONLY) = -1 ENOENT (No such file or directory)")
                }
                3 => format!("{pid} {t} read(3, \"abc\", 4096) = 3"),
                4 => format!("{pid} {t} openat(AT_FDCWD, \"esc\\303\\251{i}\", O_RDONLY <unfinished ...>"),
                _ => format!("{} {t} <... openat resumed>) = 5", pid - 1),
            }
        })
        .collect()
}

/// A valid document with `entities` entities and one relation each.
pub fn document(entities: usize) -> ProvDocument {
    let qn = |local: &str| QualifiedName::new("yProv4DA", local);
    let mut doc = ProvDocument::new();
    doc.prefixes.insert("yProv4DA".into(), "http://example.org/".into());
    doc.prefixes.insert(YPROV_PREFIX.into(), YPROV_NAMESPACE.into());
    let activity = qn("experiment_run");
    doc.add_activity(ProvActivity {
        id: activity.clone(),
        command: "python3 examples/main.py --epochs 10".into(),
        start_time: Timestamp::from_millis(1_700_000_000_000).unwrap(),
        end_time: Timestamp::from_millis(1_700_000_123_456).unwrap(),
        git_commit: Some("0123456789abcdef0123456789abcdef01234567".into()),
        exit_status: 0,
        extra_attributes: BTreeMap::new(),
    });
    doc.add_agent(ProvAgent {
        id: qn("agent"),
        username: "alice".into(),
        hostname: "lab".into(),
    });
    for i in 0..entities {
        let output = i % 2 == 1;
        let id = qn(&format!("{}/file{i}.csv", if output { "outputs" } else { "inputs" }));
        let mut extra = BTreeMap::new();
        extra.insert(ATTR_ORIGINAL_PATH.to_string(), format!("/work/file{i}.csv"));
        doc.add_entity(ProvEntity {
            id: id.clone(),
            role: if output { Role::Output } else { Role::Input },
            logged_by: LoggedBy::Auto,
            sha256: Some(format!("{:064x}", i)),
            size_bytes: Some(i as u64 * 1000),
            copied: true,
            extra_attributes: extra,
        });
        let (kind, subject, object) = if output {
            (RelationKind::WasGeneratedBy, id, activity.clone())
        } else {
            (RelationKind::Used, activity.clone(), id)
        };
        doc.push_relation(ProvRelation {
            kind,
            relation_id: qn(&format!("r{i}")),
            subject,
            object,
        });
    }
    doc.push_relation(ProvRelation {
        kind: RelationKind::WasAssociatedWith,
        relation_id: qn("a0"),
        subject: activity,
        object: qn("agent"),
    });
    doc
}
