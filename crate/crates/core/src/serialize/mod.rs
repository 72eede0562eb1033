//! Deterministic writers for PROV-JSON, DOT and RO-Crate metadata, a
//! PROV-JSON reader, and SVG rendering through an external layout engine.

mod dot;
mod media;
mod prov_json;
mod rocrate;
mod svg;

pub use dot::to_dot;
pub use media::media_type;
pub use prov_json::{parse_prov_json, to_prov_json, ParseError};
pub use rocrate::{to_rocrate_metadata, CrateError, ROCRATE_CONTEXT, ROCRATE_PROFILE};
pub use svg::{render_svg, SvgError, DEFAULT_RENDERER};

use crate::prov::Violation;

pub const PROVENANCE_JSON: &str = "provenance.json";
pub const PROVENANCE_DOT: &str = "provenance.dot";
pub const PROVENANCE_SVG: &str = "provenance.svg";
pub const ROCRATE_METADATA: &str = "ro-crate-metadata.json";

/// Refusal to serialize a document that fails validation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid provenance document: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct InvalidDocument(pub Vec<Violation>);

/// Pretty JSON with 2-space indentation and a trailing LF.
pub(crate) fn pretty_json(value: &serde_json::Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("in-memory JSON serialization cannot fail");
    out.push(b'\n');
    out
}
