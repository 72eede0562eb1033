//! Provenance capture for arbitrary commands.
//!
//! A wrapped run is observed through filesystem snapshots, an optional
//! syscall trace and a control file the program can write to. Observed files
//! are classified as inputs, outputs, sources or environment and packaged
//! into numbered bundle directories with a PROV-JSON record and RO-Crate
//! metadata.

pub mod classify;
pub mod config;
pub mod digest;
pub mod monitor;
pub mod package;
pub mod paths;
pub mod pipeline;
pub mod prov;
pub mod runmeta;
pub mod serialize;
pub mod timestamp;

pub use classify::{ArtifactRecord, RunSegment, SkipReason};
pub use config::{Backend, ConfigError, RunConfig};
pub use package::{BundleReport, PackageError};
pub use pipeline::{run_pipeline, PipelineError, PipelineOptions, PipelineOutcome};
pub use prov::{ProvDocument, QualifiedName};
pub use runmeta::RunMetadata;
pub use timestamp::Timestamp;
