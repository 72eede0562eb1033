//! Sources of file activity for a wrapped run: before/after snapshot
//! diffing, syscall-trace transcripts, and the control-channel file.

mod control;
mod snapshot;
mod trace;

use std::path::PathBuf;
use std::time::SystemTime;

pub use control::{parse_control_stream, ControlDirective, ControlError, DirectiveKind, CONTROL_ENV};
pub use snapshot::{diff_snapshots, take_snapshot, DiffError, Snapshot, SnapshotEntry, SnapshotError};
pub use trace::{parse_trace_stream, ParseMode, TraceError, TraceParse, TraceWarning};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    ReadIntent,
    WriteIntent,
    Created,
    Modified,
    Removed,
}

impl EventKind {
    pub fn is_write(self) -> bool {
        matches!(self, EventKind::WriteIntent | EventKind::Created | EventKind::Modified)
    }
}

/// One observed filesystem fact.
///
/// `seq` orders events within one source; once the orchestrator merges
/// sources it is rewritten to a position on the shared run timeline.
/// `time` is the wall-clock instant the source attributes to the event,
/// when it knows one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileEvent {
    pub path: PathBuf,
    pub kind: EventKind,
    pub seq: u64,
    pub pid: Option<u32>,
    pub time: Option<SystemTime>,
}
