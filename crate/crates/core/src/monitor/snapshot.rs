use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use log::warn;
use walkdir::WalkDir;

use super::{EventKind, FileEvent};
use crate::digest::sha256_file;
use crate::paths::{relative_slash, GlobFilter};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotEntry {
    pub size_bytes: u64,
    pub mtime: SystemTime,
    pub sha256: String,
}

/// Content-hashed listing of every regular file under `root`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub root: PathBuf,
    /// Keyed by `/`-separated path relative to `root`.
    pub entries: BTreeMap<String, SnapshotEntry>,
    /// Files or directories that could not be read.
    pub warnings: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("cannot snapshot {path}: {source}")]
    Root { path: PathBuf, source: std::io::Error },
    #[error("{0} is not a directory")]
    NotADirectory(PathBuf),
    #[error("invalid exclude pattern: {0}")]
    Pattern(#[from] globset::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot diff snapshots of different roots: {before} vs {after}")]
pub struct DiffError {
    pub before: PathBuf,
    pub after: PathBuf,
}

pub fn take_snapshot<S: AsRef<str>>(root: &Path, excludes: &[S]) -> Result<Snapshot, SnapshotError> {
    let filter = GlobFilter::new(excludes)?;
    let root = root.canonicalize().map_err(|source| SnapshotError::Root {
        path: root.to_path_buf(),
        source,
    })?;
    if !root.is_dir() {
        return Err(SnapshotError::NotADirectory(root));
    }

    let mut entries = BTreeMap::new();
    let mut warnings = Vec::new();
    let walker = WalkDir::new(&root)
        .follow_links(false)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| match relative_slash(e.path(), &root) {
            Some(rel) if e.file_type().is_dir() => !filter.matches_dir(&rel),
            _ => true,
        });
    for item in walker {
        let entry = match item {
            Ok(e) => e,
            Err(e) => {
                warn!("snapshot: {e}");
                warnings.push(e.to_string());
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let Some(rel) = relative_slash(entry.path(), &root) else {
            continue;
        };
        if filter.matches_file(&rel) {
            continue;
        }
        let mtime = match entry.metadata() {
            Ok(m) => m.modified().unwrap_or(SystemTime::UNIX_EPOCH),
            Err(e) => {
                warnings.push(format!("{rel}: {e}"));
                continue;
            }
        };
        match sha256_file(entry.path()) {
            Ok((sha256, size_bytes)) => {
                entries.insert(
                    rel,
                    SnapshotEntry {
                        size_bytes,
                        mtime,
                        sha256,
                    },
                );
            }
            Err(e) => {
                warn!("snapshot: skipping {rel}: {e}");
                warnings.push(format!("{rel}: {e}"));
            }
        }
    }
    Ok(Snapshot {
        root,
        entries,
        warnings,
    })
}

/// Created / Modified / Removed events between two snapshots of one root,
/// sorted by path. Modified requires a size or content change; mtime alone
/// never counts.
pub fn diff_snapshots(before: &Snapshot, after: &Snapshot) -> Result<Vec<FileEvent>, DiffError> {
    if before.root != after.root {
        return Err(DiffError {
            before: before.root.clone(),
            after: after.root.clone(),
        });
    }
    let mut paths: Vec<&String> = before.entries.keys().chain(after.entries.keys()).collect();
    paths.sort();
    paths.dedup();

    let mut events = Vec::new();
    for rel in paths {
        let change = match (before.entries.get(rel), after.entries.get(rel)) {
            (None, Some(a)) => Some((EventKind::Created, Some(a.mtime))),
            (Some(_), None) => Some((EventKind::Removed, None)),
            (Some(b), Some(a)) if b.size_bytes != a.size_bytes || b.sha256 != a.sha256 => {
                Some((EventKind::Modified, Some(a.mtime)))
            }
            _ => None,
        };
        if let Some((kind, time)) = change {
            events.push(FileEvent {
                path: after.root.join(rel),
                kind,
                seq: events.len() as u64,
                pid: None,
                time,
            });
        }
    }
    Ok(events)
}
