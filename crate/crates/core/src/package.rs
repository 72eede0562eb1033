//! Bundle directories: allocation, byte-exact artifact copies and the
//! serialized provenance products.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use log::{info, warn};

use crate::classify::{RunSegment, SkipReason};
use crate::config::RunConfig;
use crate::digest::sha256_file;
use crate::prov::{build_document, BuildError, ProvDocument};
use crate::runmeta::RunMetadata;
use crate::serialize::{
    render_svg, to_dot, to_prov_json, to_rocrate_metadata, CrateError, InvalidDocument, SvgError, DEFAULT_RENDERER,
    PROVENANCE_DOT, PROVENANCE_JSON, PROVENANCE_SVG, ROCRATE_METADATA,
};

#[derive(Debug, thiserror::Error)]
pub enum PackageError {
    #[error("cannot create a bundle directory in {parent}: {source}")]
    Allocate { parent: PathBuf, source: io::Error },
    #[error("copying {from} to {to}: {source}")]
    Copy {
        from: PathBuf,
        to: PathBuf,
        source: io::Error,
    },
    #[error("{path}: copied content has digest {actual}, expected {expected}")]
    DigestMismatch {
        path: PathBuf,
        expected: String,
        actual: String,
    },
    #[error("writing {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Invalid(#[from] InvalidDocument),
    #[error(transparent)]
    Crate(#[from] CrateError),
    #[error(transparent)]
    Svg(#[from] SvgError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleReport {
    pub bundle_dir: PathBuf,
    /// Bundle-relative, in write order.
    pub files_written: Vec<String>,
    pub bytes_copied: u64,
    pub warnings: Vec<String>,
    /// The copy of `provenance.json` written beside the bundle, if requested.
    pub standalone_json: Option<PathBuf>,
}

/// Creates `<parent>/<base_name>_<k>` for the smallest free `k`.
///
/// Creation is exclusive, so concurrent invocations never share a directory.
pub fn allocate_run_dir(base_name: &str, parent: &Path) -> Result<PathBuf, PackageError> {
    let alloc_err = |source| PackageError::Allocate {
        parent: parent.to_path_buf(),
        source,
    };
    let parent = fs::canonicalize(parent).map_err(alloc_err)?;
    for k in 0u64.. {
        let candidate = parent.join(format!("{base_name}_{k}"));
        match fs::create_dir(&candidate) {
            Ok(()) => return Ok(candidate),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(alloc_err(e)),
        }
    }
    unreachable!("bundle index space exhausted")
}

/// Copies the segment's artifacts into `bundle_dir` and writes its
/// provenance files.
///
/// A file that disappeared since classification is downgraded to not
/// copied; a copy whose digest differs from the classified one is an error.
/// The document is built after copying so it reflects those downgrades.
pub fn write_bundle(
    segment: &RunSegment,
    meta: &RunMetadata,
    config: &RunConfig,
    bundle_dir: &Path,
) -> Result<(BundleReport, ProvDocument), PackageError> {
    let mut report = BundleReport {
        bundle_dir: bundle_dir.to_path_buf(),
        files_written: Vec::new(),
        bytes_copied: 0,
        warnings: Vec::new(),
        standalone_json: None,
    };
    let mut segment = segment.clone();

    for record in segment.records.iter_mut().filter(|r| r.copied) {
        let to = bundle_dir.join(&record.bundle_relative_path);
        let copy_err = |source| PackageError::Copy {
            from: record.original_path.clone(),
            to: to.clone(),
            source,
        };
        if let Some(dir) = to.parent() {
            fs::create_dir_all(dir).map_err(copy_err)?;
        }
        match fs::copy(&record.original_path, &to) {
            Ok(n) => report.bytes_copied += n,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                let msg = format!("{} vanished before it could be copied", record.original_path.display());
                warn!("{msg}");
                report.warnings.push(msg);
                record.copied = false;
                record.skip_reason = Some(SkipReason::Vanished);
                prune_empty_dirs(to.parent(), bundle_dir);
                continue;
            }
            Err(e) => return Err(copy_err(e)),
        }
        let (actual, _) = sha256_file(&to).map_err(copy_err)?;
        let expected = record.sha256.clone().unwrap_or_default();
        if actual != expected {
            return Err(PackageError::DigestMismatch {
                path: record.original_path.clone(),
                expected,
                actual,
            });
        }
        report.files_written.push(record.bundle_relative_path.clone());
    }

    let doc = build_document(&segment.records, meta, config)?;
    let json = to_prov_json(&doc)?;
    write_file(bundle_dir, PROVENANCE_JSON, &json, &mut report)?;

    if config.create_dot_file || config.create_svg_file {
        let dot = to_dot(&doc)?;
        if config.create_dot_file {
            write_file(bundle_dir, PROVENANCE_DOT, dot.as_bytes(), &mut report)?;
        }
        if config.create_svg_file {
            let svg = render_svg(&dot, DEFAULT_RENDERER)?;
            write_file(bundle_dir, PROVENANCE_SVG, &svg, &mut report)?;
        }
    }
    if config.create_rocrate {
        let crate_json = to_rocrate_metadata(&segment, meta, &json)?;
        write_file(bundle_dir, ROCRATE_METADATA, &crate_json, &mut report)?;
    }
    if config.create_json_file {
        if let (Some(parent), Some(name)) = (bundle_dir.parent(), bundle_dir.file_name()) {
            let path = parent.join(format!("{}.json", name.to_string_lossy()));
            fs::write(&path, &json).map_err(|source| PackageError::Write {
                path: path.clone(),
                source,
            })?;
            report.standalone_json = Some(path);
        }
    }
    info!(
        "wrote {} ({} files, {} bytes copied)",
        bundle_dir.display(),
        report.files_written.len(),
        report.bytes_copied
    );
    Ok((report, doc))
}

/// Removes now-empty directories from `dir` up to, not including, `stop`.
fn prune_empty_dirs(mut dir: Option<&Path>, stop: &Path) {
    while let Some(d) = dir {
        if d == stop || !d.starts_with(stop) || fs::remove_dir(d).is_err() {
            break;
        }
        dir = d.parent();
    }
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], report: &mut BundleReport) -> Result<(), PackageError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|source| PackageError::Write { path, source })?;
    report.files_written.push(name.to_string());
    Ok(())
}
