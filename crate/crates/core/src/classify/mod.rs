//! Turns the merged event/directive timeline into per-segment artifact
//! records: inputs, outputs, source files and the environment manifest.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use log::debug;

use crate::config::{is_valid_local_name, RunConfig};
use crate::digest::sha256_file;
use crate::monitor::{ControlDirective, DirectiveKind, EventKind, FileEvent};
use crate::paths::{normalize, relative_slash, GlobFilter};
use crate::prov::{LoggedBy, Role};

/// Dependency manifest picked up from the working directory when present.
pub const ENVIRONMENT_MANIFEST: &str = "requirements.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SkipReason {
    SizeThreshold,
    SubsetMode,
    InputsNotSaved,
    Vanished,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::SizeThreshold => "size_threshold",
            SkipReason::SubsetMode => "subset_mode",
            SkipReason::InputsNotSaved => "inputs_not_saved",
            SkipReason::Vanished => "vanished",
        }
    }
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactRecord {
    pub original_path: PathBuf,
    /// Under `inputs/`, `outputs/` or `src/`.
    pub bundle_relative_path: String,
    pub category: Role,
    /// Read and also written during the segment.
    pub also_generated: bool,
    pub logged_by: LoggedBy,
    pub sha256: Option<String>,
    pub size_bytes: Option<u64>,
    pub copied: bool,
    pub skip_reason: Option<SkipReason>,
}

/// A path-level problem found while classifying; never fatal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifyIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ClassifyIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSegment {
    pub name: String,
    pub records: Vec<ArtifactRecord>,
    pub issues: Vec<ClassifyIssue>,
}

/// Facts about the run that classification needs besides the timeline.
#[derive(Debug, Clone, Default)]
pub struct ClassifyContext {
    /// Canonical working directory of the wrapped command.
    pub cwd: PathBuf,
    /// Canonical extra roots (`--watch`); `cwd` is always watched.
    pub watch_dirs: Vec<PathBuf>,
    /// Script named on the command line, always preserved as source.
    pub entry_script: Option<PathBuf>,
    /// Files present after the run, used to expand `source_roots`.
    pub known_files: Vec<PathBuf>,
    /// Wrapper-internal files (control channel, transcript) never recorded.
    pub ignore: Vec<PathBuf>,
}

impl ClassifyContext {
    pub fn new(cwd: impl Into<PathBuf>) -> Self {
        ClassifyContext {
            cwd: cwd.into(),
            ..Default::default()
        }
    }

    fn roots(&self) -> impl Iterator<Item = &PathBuf> {
        std::iter::once(&self.cwd).chain(&self.watch_dirs)
    }

    fn root_relative(&self, path: &Path) -> Option<String> {
        self.roots().find_map(|r| relative_slash(path, r))
    }
}

/// Picks the script a command runs: the first argument naming an existing
/// regular file, skipping a bare program name looked up on `PATH`.
pub fn detect_entry_script<S: AsRef<str>>(argv: &[S], cwd: &Path) -> Option<PathBuf> {
    argv.iter().enumerate().find_map(|(i, arg)| {
        let arg = arg.as_ref();
        if arg.is_empty() || arg.starts_with('-') || (i == 0 && !arg.contains('/')) {
            return None;
        }
        let p = normalize(Path::new(arg), cwd);
        p.is_file().then_some(p)
    })
}

enum Item<'a> {
    Event(&'a FileEvent),
    Directive(&'a ControlDirective),
}

impl Item<'_> {
    fn seq(&self) -> u64 {
        match self {
            Item::Event(e) => e.seq,
            Item::Directive(d) => d.seq,
        }
    }
}

/// Splits the seq-ordered timeline at every `END_RUN` and classifies each
/// part. A trailing segment always exists; unnamed segments take
/// `config.run_name` and repeated names get a `_<n>` suffix.
pub fn classify(
    events: &[FileEvent],
    directives: &[ControlDirective],
    config: &RunConfig,
    ctx: &ClassifyContext,
) -> Vec<RunSegment> {
    let mut items: Vec<Item> = events
        .iter()
        .map(Item::Event)
        .chain(directives.iter().map(Item::Directive))
        .collect();
    // Stable: on equal seq, events precede directives.
    items.sort_by_key(|i| i.seq());

    let mut parts: Vec<(Option<String>, Vec<&Item>)> = Vec::new();
    let mut current = Vec::new();
    for item in &items {
        match item {
            Item::Directive(d) if d.kind == DirectiveKind::EndRun => {
                parts.push((
                    Some(d.run_name.clone().unwrap_or_default()),
                    std::mem::take(&mut current),
                ));
            }
            _ => current.push(item),
        }
    }
    parts.push((None, current));

    let filter = GlobFilter::new(&config.monitor_excludes()).unwrap_or_else(|e| {
        debug!("ignoring invalid exclude set: {e}");
        GlobFilter::empty()
    });
    let source_filter = GlobFilter::new(&config.source_roots).unwrap_or_else(|_| GlobFilter::empty());

    let mut used_names: HashSet<String> = HashSet::new();
    parts
        .into_iter()
        .map(|(requested, items)| {
            let mut issues = Vec::new();
            let base = match requested.as_deref() {
                Some("") | None => config.run_name.clone(),
                Some(name) if is_valid_local_name(name) => name.to_string(),
                Some(name) => {
                    issues.push(ClassifyIssue {
                        path: name.to_string(),
                        message: format!("invalid END_RUN name, using {:?}", config.run_name),
                    });
                    config.run_name.clone()
                }
            };
            let name = unique_name(&base, &mut used_names);
            let mut seg = Segmenter {
                config,
                ctx,
                filter: &filter,
                source_filter: &source_filter,
                states: BTreeMap::new(),
                issues,
            };
            for item in items {
                match item {
                    Item::Event(e) => seg.event(e),
                    Item::Directive(d) => seg.directive(d),
                }
            }
            let (records, issues) = seg.finish();
            RunSegment { name, records, issues }
        })
        .collect()
}

fn unique_name(base: &str, used: &mut HashSet<String>) -> String {
    let mut name = base.to_string();
    let mut n = 1;
    while used.contains(&name) {
        name = format!("{base}_{n}");
        n += 1;
    }
    used.insert(name.clone());
    name
}

/// Marks `record` as not copied when it exceeds `limit_mb` decimal megabytes.
pub fn apply_size_threshold(mut record: ArtifactRecord, limit_mb: u64) -> ArtifactRecord {
    if let Some(size) = record.size_bytes {
        if record.copied && size > limit_mb.saturating_mul(1_000_000) {
            record.copied = false;
            record.skip_reason = Some(SkipReason::SizeThreshold);
        }
    }
    record
}

#[derive(Debug, Default)]
struct PathState {
    read: bool,
    written: bool,
    by_user: bool,
    untracked: bool,
}

struct Segmenter<'a> {
    config: &'a RunConfig,
    ctx: &'a ClassifyContext,
    filter: &'a GlobFilter,
    source_filter: &'a GlobFilter,
    states: BTreeMap<PathBuf, PathState>,
    issues: Vec<ClassifyIssue>,
}

impl Segmenter<'_> {
    fn is_bundle_path(&self, path: &Path) -> bool {
        relative_slash(path, &self.ctx.cwd)
            .and_then(|rel| rel.split('/').next().map(|c| self.config.is_bundle_component(c)))
            .unwrap_or(false)
            || self.ctx.ignore.iter().any(|i| i == path)
    }

    fn event(&mut self, e: &FileEvent) {
        let path = normalize(&e.path, &self.ctx.cwd);
        if self.is_bundle_path(&path) {
            return;
        }
        // Automatic detection is bounded by the watched roots.
        let Some(rel) = self.ctx.root_relative(&path) else {
            debug!("ignoring {} outside watched roots", path.display());
            return;
        };
        if self.filter.matches_file(&rel) {
            return;
        }
        let state = self.states.entry(path).or_default();
        match e.kind {
            EventKind::ReadIntent => state.read = true,
            EventKind::WriteIntent | EventKind::Created | EventKind::Modified => state.written = true,
            EventKind::Removed => state.written = false,
        }
    }

    fn directive(&mut self, d: &ControlDirective) {
        if d.path.contains(['\t', '\n']) {
            self.issues.push(ClassifyIssue {
                path: d.path.clone(),
                message: "paths containing TAB or LF are not supported".into(),
            });
            return;
        }
        let path = normalize(Path::new(&d.path), &self.ctx.cwd);
        if self.is_bundle_path(&path) {
            return;
        }
        if self.ctx.root_relative(&path).is_none() && !path.exists() {
            self.issues.push(ClassifyIssue {
                path: d.path.clone(),
                message: "outside all watched roots and does not exist".into(),
            });
            return;
        }
        let state = self.states.entry(path).or_default();
        match d.kind {
            DirectiveKind::Input => {
                state.read = true;
                state.by_user = true;
            }
            DirectiveKind::Output => {
                state.written = true;
                state.by_user = true;
            }
            DirectiveKind::Untrack => state.untracked = true,
            DirectiveKind::EndRun => {}
        }
    }

    fn is_source_file(&self, path: &Path) -> bool {
        let ext_match = path
            .extension()
            .map(|e| format!(".{}", e.to_string_lossy()))
            .is_some_and(|e| self.config.source_extensions.iter().any(|s| s.eq_ignore_ascii_case(&e)));
        ext_match || self.under_source_roots(path)
    }

    fn under_source_roots(&self, path: &Path) -> bool {
        relative_slash(path, &self.ctx.cwd).is_some_and(|rel| self.source_filter.matches_file(&rel))
    }

    fn finish(mut self) -> (Vec<ArtifactRecord>, Vec<ClassifyIssue>) {
        let mut wanted: BTreeMap<PathBuf, (Role, bool, LoggedBy)> = BTreeMap::new();
        let manifest = self.ctx.cwd.join(ENVIRONMENT_MANIFEST);

        for (path, st) in &self.states {
            if st.untracked {
                continue;
            }
            let logged_by = if st.by_user { LoggedBy::User } else { LoggedBy::Auto };
            let (role, also_generated) = match (st.read, st.written) {
                (true, true) => (Role::Input, true),
                (true, false) if self.is_source_file(path) => (Role::Source, false),
                (true, false) => (Role::Input, false),
                (false, true) => (Role::Output, false),
                (false, false) => continue,
            };
            let role = if *path == manifest { Role::Environment } else { role };
            if !path.is_file() {
                if st.by_user {
                    self.issues.push(ClassifyIssue {
                        path: path.display().to_string(),
                        message: "logged file does not exist".into(),
                    });
                }
                continue;
            }
            wanted.insert(path.clone(), (role, also_generated, logged_by));
        }

        let untracked = |p: &Path| self.states.get(p).is_some_and(|s| s.untracked);
        let written = |p: &Path| self.states.get(p).is_some_and(|s| s.written);

        let mut implicit: Vec<(PathBuf, Role)> = Vec::new();
        if let Some(entry) = &self.ctx.entry_script {
            implicit.push((entry.clone(), Role::Source));
        }
        for known in &self.ctx.known_files {
            if self.under_source_roots(known) && !written(known) {
                implicit.push((known.clone(), Role::Source));
            }
        }
        implicit.push((manifest.clone(), Role::Environment));
        for (path, role) in implicit {
            if untracked(&path) || !path.is_file() || self.is_bundle_path(&path) {
                continue;
            }
            wanted
                .entry(path)
                .and_modify(|w| {
                    if !w.1 {
                        w.0 = role;
                    }
                })
                .or_insert((role, false, LoggedBy::Auto));
        }

        let mut records: Vec<ArtifactRecord> = Vec::new();
        let mut taken: BTreeMap<String, PathBuf> = BTreeMap::new();
        for (path, (role, also_generated, logged_by)) in wanted {
            let bundle_relative_path = self.bundle_path(&path, role);
            if let Some(prev) = taken.get(&bundle_relative_path) {
                self.issues.push(ClassifyIssue {
                    path: path.display().to_string(),
                    message: format!("bundle path {bundle_relative_path} already used by {}", prev.display()),
                });
                continue;
            }
            let (sha256, size) = match sha256_file(&path) {
                Ok(d) => d,
                Err(e) => {
                    self.issues.push(ClassifyIssue {
                        path: path.display().to_string(),
                        message: format!("cannot read: {e}"),
                    });
                    continue;
                }
            };
            let mut record = ArtifactRecord {
                original_path: path.clone(),
                bundle_relative_path: bundle_relative_path.clone(),
                category: role,
                also_generated,
                logged_by,
                sha256: Some(sha256),
                size_bytes: Some(size),
                copied: true,
                skip_reason: None,
            };
            if role == Role::Input {
                if self.config.save_input_files_subset {
                    record.copied = false;
                    record.skip_reason = Some(SkipReason::SubsetMode);
                } else if !self.config.save_input_files_full {
                    record.copied = false;
                    record.skip_reason = Some(SkipReason::InputsNotSaved);
                }
            }
            records.push(apply_size_threshold(record, self.config.skip_files_larger_than));
            taken.insert(bundle_relative_path, path);
        }
        records.sort_by(|a, b| a.bundle_relative_path.cmp(&b.bundle_relative_path));
        (records, self.issues)
    }

    /// `inputs/<rel>`, `outputs/<rel>` or `src/<rel>` for files under the
    /// working directory; `<dir>/_external/<abs path with / as __>` otherwise.
    fn bundle_path(&self, path: &Path, role: Role) -> String {
        let dir = match role {
            Role::Input | Role::Environment => "inputs",
            Role::Output => "outputs",
            Role::Source => "src",
        };
        match relative_slash(path, &self.ctx.cwd) {
            Some(rel) => format!("{dir}/{rel}"),
            None => {
                let flat: Vec<String> = path
                    .components()
                    .filter_map(|c| match c {
                        std::path::Component::Normal(s) => Some(s.to_string_lossy().into_owned()),
                        _ => None,
                    })
                    .collect();
                format!("{dir}/_external/{}", flat.join("__"))
            }
        }
    }
}
