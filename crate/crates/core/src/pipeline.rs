//! One wrapped run end to end: snapshot, spawn, collect, classify, bundle.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use log::{info, warn};

use crate::classify::{classify, detect_entry_script, ClassifyContext};
use crate::config::{Backend, ConfigError, RunConfig};
use crate::monitor::{
    diff_snapshots, parse_control_stream, parse_trace_stream, take_snapshot, ControlDirective, DirectiveKind,
    FileEvent, ParseMode, Snapshot, CONTROL_ENV,
};
use crate::package::{allocate_run_dir, write_bundle, BundleReport};
use crate::paths::normalize;
use crate::runmeta::{capture_run_with, CaptureError, CaptureOptions, RunMetadata};
use crate::serialize::DEFAULT_RENDERER;
use crate::timestamp::Timestamp;

/// Default syscall tracer for the trace backend.
pub const DEFAULT_TRACER: &str = "strace";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineOptions {
    /// Working directory of the wrapped command; defaults to the current one.
    pub cwd: Option<PathBuf>,
    pub tracer: String,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            cwd: None,
            tracer: DEFAULT_TRACER.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub exit_status: i32,
    pub backend: Backend,
    pub meta: RunMetadata,
    pub bundles: Vec<BundleReport>,
    pub warnings: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    /// Nothing was executed.
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Nothing was executed.
    #[error("{0}")]
    Preflight(String),
    #[error(transparent)]
    Capture(#[from] CaptureError),
    /// The child ran; `exit_status` is its status.
    #[error("provenance capture failed: {message}")]
    Provenance { exit_status: i32, message: String },
}

/// Runs `argv` under monitoring and writes one bundle per run segment.
pub fn run_pipeline(
    argv: &[String],
    config: &RunConfig,
    options: &PipelineOptions,
) -> Result<PipelineOutcome, PipelineError> {
    config.validate()?;
    if argv.is_empty() {
        return Err(CaptureError::EmptyCommand.into());
    }
    let cwd = match &options.cwd {
        Some(c) => c.clone(),
        None => std::env::current_dir().map_err(|e| PipelineError::Preflight(format!("working directory: {e}")))?,
    };
    let cwd = fs::canonicalize(&cwd).map_err(|e| PipelineError::Preflight(format!("{}: {e}", cwd.display())))?;
    let backend = resolve_backend(config.backend, &options.tracer)?;
    if config.create_svg_file && which::which(DEFAULT_RENDERER).is_err() {
        return Err(PipelineError::Preflight(format!(
            "SVG output requires the Graphviz `{DEFAULT_RENDERER}` executable on PATH"
        )));
    }
    let mut roots = vec![cwd.clone()];
    for w in &config.watch_dirs {
        let p = normalize(w, &cwd);
        if !p.is_dir() {
            return Err(PipelineError::Preflight(format!(
                "watch directory {} does not exist",
                w.display()
            )));
        }
        if !roots.contains(&p) {
            roots.push(p);
        }
    }

    let excludes = config.monitor_excludes();
    let before = snapshot_all(&roots, &excludes).map_err(PipelineError::Preflight)?;

    let scratch = tempfile::Builder::new()
        .prefix("yprov-")
        .tempdir()
        .map_err(|e| PipelineError::Preflight(format!("scratch directory: {e}")))?;
    let scratch_dir =
        fs::canonicalize(scratch.path()).map_err(|e| PipelineError::Preflight(format!("scratch directory: {e}")))?;
    let control_path = scratch_dir.join("control");
    let trace_path = scratch_dir.join("trace");
    fs::File::create(&control_path).map_err(|e| PipelineError::Preflight(format!("control file: {e}")))?;

    let mut env = BTreeMap::new();
    env.insert(CONTROL_ENV.to_string(), control_path.to_string_lossy().into_owned());
    let launcher = match backend {
        Backend::Trace => vec![
            options.tracer.clone(),
            "-f".into(),
            "-y".into(),
            "-ttt".into(),
            "-qq".into(),
            "-e".into(),
            "trace=open,openat,openat2,creat".into(),
            "-o".into(),
            trace_path.to_string_lossy().into_owned(),
            "--".into(),
        ],
        _ => Vec::new(),
    };

    let mut watcher = ControlWatcher::new(&control_path);
    let mut poll = || watcher.poll();
    let meta = capture_run_with(
        argv,
        &env,
        CaptureOptions {
            launcher,
            cwd: Some(cwd.clone()),
            on_poll: Some(&mut poll),
            ..Default::default()
        },
    )?;
    let exit_status = meta.exit_status;
    info!("child exited with status {exit_status}");
    let failed = |message: String| PipelineError::Provenance { exit_status, message };

    let mut warnings = Vec::new();
    let after = snapshot_all(&roots, &excludes).map_err(failed)?;
    let end = meta.end_time.to_system_time();
    let start = meta.start_time.to_system_time();

    let mut events = Vec::new();
    for (b, a) in before.iter().zip(&after) {
        warnings.extend(a.warnings.iter().cloned());
        let diff = diff_snapshots(b, a).map_err(|e| failed(e.to_string()))?;
        events.extend(diff.into_iter().map(|mut e| {
            e.time = Some(e.time.unwrap_or(end));
            e
        }));
    }
    if backend == Backend::Trace {
        let text = fs::read(&trace_path).map_err(|e| failed(format!("reading trace transcript: {e}")))?;
        let text = String::from_utf8_lossy(&text);
        let parsed = parse_trace_stream(text.lines(), ParseMode::Lenient).map_err(|e| failed(e.to_string()))?;
        for w in parsed.warnings {
            warnings.push(format!("trace line {}: {}", w.line, w.message));
        }
        events.extend(parsed.events);
    }

    let control_text = fs::read(&control_path).map_err(|e| failed(format!("reading control file: {e}")))?;
    let control_text =
        String::from_utf8(control_text).map_err(|e| failed(format!("control file is not UTF-8: {e}")))?;
    let line_times = watcher.finish(control_text.lines().count(), end);
    let directives = parse_control_stream(control_text.lines())
        .map_err(|e| failed(format!("control file line {}: {}", e.line, e.message)))?;

    let (events, directives, boundaries) = merge_timeline(events, directives, &line_times, start, end);

    let mut known_files = Vec::new();
    for snap in &after {
        known_files.extend(snap.entries.keys().map(|rel| snap.root.join(rel)));
    }
    let ctx = ClassifyContext {
        cwd: cwd.clone(),
        watch_dirs: roots[1..].to_vec(),
        entry_script: detect_entry_script(argv, &cwd),
        known_files,
        ignore: vec![control_path.clone(), trace_path.clone()],
    };
    let segments = classify(&events, &directives, config, &ctx);

    let mut bundles = Vec::new();
    for (i, segment) in segments.iter().enumerate() {
        for issue in &segment.issues {
            warnings.push(format!("{}: {issue}", segment.name));
        }
        let seg_start = if i == 0 { meta.start_time } else { boundaries[i - 1] };
        let seg_end = boundaries.get(i).copied().unwrap_or(meta.end_time).max(seg_start);
        let seg_meta = RunMetadata {
            start_time: seg_start,
            end_time: seg_end,
            ..meta.clone()
        };
        let dir = allocate_run_dir(&config.provenance_directory, &cwd).map_err(|e| failed(e.to_string()))?;
        let (report, _) = write_bundle(segment, &seg_meta, &config.for_segment(&segment.name), &dir)
            .map_err(|e| failed(format!("{}: {e}", dir.display())))?;
        warnings.extend(report.warnings.iter().cloned());
        bundles.push(report);
    }
    for w in &warnings {
        warn!("{w}");
    }

    Ok(PipelineOutcome {
        exit_status,
        backend,
        meta,
        bundles,
        warnings,
    })
}

fn resolve_backend(requested: Backend, tracer: &str) -> Result<Backend, PipelineError> {
    let available = cfg!(target_os = "linux") && which::which(tracer).is_ok();
    match requested {
        Backend::Diff => Ok(Backend::Diff),
        Backend::Trace if available => Ok(Backend::Trace),
        Backend::Trace => Err(PipelineError::Preflight(format!(
            "the trace backend requires `{tracer}` on PATH (Linux only)"
        ))),
        Backend::Auto if available => Ok(Backend::Trace),
        Backend::Auto => Ok(Backend::Diff),
    }
}

fn snapshot_all(roots: &[PathBuf], excludes: &[String]) -> Result<Vec<Snapshot>, String> {
    roots
        .iter()
        .map(|r| take_snapshot(r, excludes).map_err(|e| e.to_string()))
        .collect()
}

/// Orders events and directives on one timeline and renumbers them.
///
/// Items sort by time, clamped to the run; on ties events come first and
/// each source keeps its own order. Returns the END_RUN instants as segment
/// boundaries.
fn merge_timeline(
    events: Vec<FileEvent>,
    directives: Vec<ControlDirective>,
    line_times: &[SystemTime],
    start: SystemTime,
    end: SystemTime,
) -> (Vec<FileEvent>, Vec<ControlDirective>, Vec<Timestamp>) {
    let clamp = |t: SystemTime| t.clamp(start, end);
    let mut keys: Vec<(SystemTime, u8, usize)> = Vec::new();
    for (i, e) in events.iter().enumerate() {
        keys.push((clamp(e.time.unwrap_or(end)), 0, i));
    }
    let directive_time = |d: &ControlDirective| clamp(line_times.get(d.seq as usize).copied().unwrap_or(end));
    for (i, d) in directives.iter().enumerate() {
        keys.push((directive_time(d), 1, i));
    }
    keys.sort();

    let mut events = events;
    let mut directives = directives;
    let boundaries = directives
        .iter()
        .filter(|d| d.kind == DirectiveKind::EndRun)
        .map(|d| Timestamp::from_system_time(directive_time(d)))
        .collect::<Vec<_>>();
    for (seq, (_, source, i)) in keys.into_iter().enumerate() {
        match source {
            0 => events[i].seq = seq as u64,
            _ => directives[i].seq = seq as u64,
        }
    }
    events.sort_by_key(|e| e.seq);
    directives.sort_by_key(|d| d.seq);
    let mut boundaries = boundaries;
    boundaries.sort();
    (events, directives, boundaries)
}

/// Timestamps control-file lines as they appear, using the file's mtime
/// when the line was first seen.
struct ControlWatcher {
    path: PathBuf,
    len: u64,
    times: Vec<SystemTime>,
}

impl ControlWatcher {
    fn new(path: &Path) -> Self {
        ControlWatcher {
            path: path.to_path_buf(),
            len: 0,
            times: Vec::new(),
        }
    }

    fn poll(&mut self) {
        if let Err(e) = self.try_poll() {
            log::debug!("control file poll: {e}");
        }
    }

    fn try_poll(&mut self) -> io::Result<()> {
        let md = fs::metadata(&self.path)?;
        if md.len() == self.len {
            return Ok(());
        }
        let bytes = fs::read(&self.path)?;
        let mtime = md.modified()?;
        self.len = bytes.len() as u64;
        let complete = bytes.iter().filter(|&&b| b == b'\n').count();
        while self.times.len() < complete {
            self.times.push(mtime);
        }
        Ok(())
    }

    /// Times for `lines` lines; any line not seen while polling gets the
    /// file's final mtime, or `fallback`.
    fn finish(mut self, lines: usize, fallback: SystemTime) -> Vec<SystemTime> {
        self.poll();
        let last = fs::metadata(&self.path).and_then(|m| m.modified()).unwrap_or(fallback);
        while self.times.len() < lines {
            self.times.push(last);
        }
        self.times
    }
}
