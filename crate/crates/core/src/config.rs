use std::collections::BTreeSet;
use std::path::PathBuf;
use std::str::FromStr;

/// Prefixes that the emitted documents already use for their own attributes.
pub const RESERVED_PREFIXES: [&str; 3] = ["prov", "yprov", "xsd"];

/// Monitoring patterns that are excluded before any user `--exclude`.
pub const DEFAULT_EXCLUDES: [&str; 2] = [".git/**", "**/__pycache__/**"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Trace when a tracer is available, otherwise snapshot diff.
    #[default]
    Auto,
    Diff,
    Trace,
}

impl FromStr for Backend {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Backend::Auto),
            "diff" => Ok(Backend::Diff),
            "trace" => Ok(Backend::Trace),
            other => Err(ConfigError::Backend(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("run name must be non-empty and contain no whitespace: {0:?}")]
    RunName(String),
    #[error("provenance directory must be a single relative path component: {0:?}")]
    ProvenanceDirectory(String),
    #[error("prefix must be a non-empty name without ':' or whitespace and not one of prov/yprov/xsd: {0:?}")]
    Prefix(String),
    #[error("namespace must be a non-empty URI: {0:?}")]
    Namespace(String),
    #[error("size threshold must be greater than zero")]
    SizeThreshold,
    #[error("unknown backend {0:?} (expected auto, diff or trace)")]
    Backend(String),
    #[error("invalid glob {pattern:?}: {message}")]
    Glob { pattern: String, message: String },
}

/// Everything that controls a capture, with the library defaults of the
/// original single-call API plus the wrapper-specific monitoring options.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub run_name: String,
    pub provenance_directory: String,
    pub prefix: String,
    pub default_namespace: String,
    pub create_json_file: bool,
    pub create_dot_file: bool,
    pub create_svg_file: bool,
    pub create_rocrate: bool,
    pub save_input_files_full: bool,
    pub save_input_files_subset: bool,
    /// Megabytes, decimal (10^6 bytes).
    pub skip_files_larger_than: u64,
    pub verbose: bool,
    /// Extensions including the leading dot, e.g. `.py`.
    pub source_extensions: BTreeSet<String>,
    pub source_roots: Vec<String>,
    pub watch_dirs: Vec<PathBuf>,
    pub backend: Backend,
    pub excludes: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            run_name: "experiment_run".to_string(),
            provenance_directory: "prov".to_string(),
            prefix: "yProv4DA".to_string(),
            default_namespace: "http://example.org/".to_string(),
            create_json_file: false,
            create_dot_file: false,
            create_svg_file: false,
            create_rocrate: true,
            save_input_files_full: true,
            save_input_files_subset: false,
            skip_files_larger_than: 50,
            verbose: false,
            source_extensions: [".py".to_string()].into_iter().collect(),
            source_roots: Vec::new(),
            watch_dirs: Vec::new(),
            backend: Backend::Auto,
            excludes: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !is_valid_local_name(&self.run_name) {
            return Err(ConfigError::RunName(self.run_name.clone()));
        }
        let dir = &self.provenance_directory;
        if dir.is_empty()
            || dir == "."
            || dir == ".."
            || dir.contains(['/', '\\'])
            || dir.chars().any(char::is_whitespace)
        {
            return Err(ConfigError::ProvenanceDirectory(dir.clone()));
        }
        if !is_valid_prefix(&self.prefix) || RESERVED_PREFIXES.contains(&self.prefix.as_str()) {
            return Err(ConfigError::Prefix(self.prefix.clone()));
        }
        let ns = &self.default_namespace;
        if ns.is_empty() || !ns.contains(':') || ns.chars().any(char::is_whitespace) {
            return Err(ConfigError::Namespace(ns.clone()));
        }
        if self.skip_files_larger_than == 0 {
            return Err(ConfigError::SizeThreshold);
        }
        for pattern in self.source_roots.iter().chain(&self.excludes) {
            globset::Glob::new(pattern).map_err(|e| ConfigError::Glob {
                pattern: pattern.clone(),
                message: e.kind().to_string(),
            })?;
        }
        Ok(())
    }

    /// Size threshold in bytes.
    pub fn size_limit_bytes(&self) -> u64 {
        self.skip_files_larger_than.saturating_mul(1_000_000)
    }

    /// A copy of this configuration whose activity is named `name`.
    pub fn for_segment(&self, name: &str) -> RunConfig {
        RunConfig {
            run_name: name.to_string(),
            ..self.clone()
        }
    }

    /// Snapshot exclusion patterns: defaults, bundle directories, then user patterns.
    pub fn monitor_excludes(&self) -> Vec<String> {
        let mut out: Vec<String> = DEFAULT_EXCLUDES.iter().map(|s| s.to_string()).collect();
        out.push(format!("{}_*/**", self.provenance_directory));
        out.push(format!("{}_*.json", self.provenance_directory));
        out.extend(self.excludes.iter().cloned());
        out
    }

    /// True when `first_component` names a bundle directory or a standalone
    /// JSON copy written next to one (`prov_3`, `prov_3.json`).
    pub fn is_bundle_component(&self, first_component: &str) -> bool {
        let Some(rest) = first_component
            .strip_prefix(self.provenance_directory.as_str())
            .and_then(|r| r.strip_prefix('_'))
        else {
            return false;
        };
        let digits = rest.strip_suffix(".json").unwrap_or(rest);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    }
}

pub(crate) fn is_valid_local_name(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(char::is_whitespace) && !s.contains('\\')
}

pub(crate) fn is_valid_prefix(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}
