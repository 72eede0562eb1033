use serde_json::{json, Map, Value};

use super::{media_type, pretty_json, PROVENANCE_JSON, ROCRATE_METADATA};
use crate::classify::RunSegment;
use crate::digest::sha256_hex;
use crate::prov::Role;
use crate::runmeta::RunMetadata;

pub const ROCRATE_CONTEXT: &str = "https://w3id.org/ro/crate/1.1/context";
pub const ROCRATE_PROFILE: &str = "https://w3id.org/ro/crate/1.1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CrateError {
    #[error("copied record {0:?} lacks a digest or size")]
    IncompleteRecord(String),
}

/// Builds `ro-crate-metadata.json` for a bundle whose copies are final.
///
/// Only copied records become File entities. `provenance_json` is the exact
/// content written as `provenance.json`, which the crate also describes.
pub fn to_rocrate_metadata(
    segment: &RunSegment,
    meta: &RunMetadata,
    provenance_json: &[u8],
) -> Result<Vec<u8>, CrateError> {
    let mut files = Vec::new();
    for r in segment.records.iter().filter(|r| r.copied) {
        let (Some(sha), Some(size)) = (&r.sha256, r.size_bytes) else {
            return Err(CrateError::IncompleteRecord(r.bundle_relative_path.clone()));
        };
        let ty = if r.category == Role::Source {
            json!(["File", "SoftwareSourceCode"])
        } else {
            json!("File")
        };
        files.push(file_entity(&r.bundle_relative_path, ty, size, sha));
    }
    files.push(file_entity(
        PROVENANCE_JSON,
        json!("File"),
        provenance_json.len() as u64,
        &sha256_hex(provenance_json),
    ));
    files.sort_by(|a, b| a["@id"].as_str().cmp(&b["@id"].as_str()));

    let has_part: Vec<Value> = files.iter().map(|f| json!({ "@id": f["@id"] })).collect();
    let descriptor = entity(
        ROCRATE_METADATA,
        json!("CreativeWork"),
        [
            ("about", json!({ "@id": "./" })),
            ("conformsTo", json!({ "@id": ROCRATE_PROFILE })),
        ],
    );
    let root = entity(
        "./",
        json!("Dataset"),
        [
            ("datePublished", json!(meta.end_time.to_string())),
            ("hasPart", Value::Array(has_part)),
            ("name", json!(segment.name)),
        ],
    );

    let mut graph = vec![descriptor, root];
    graph.extend(files);
    let doc = json!({ "@context": ROCRATE_CONTEXT, "@graph": graph });
    Ok(pretty_json(&doc))
}

fn file_entity(id: &str, ty: Value, size: u64, sha: &str) -> Value {
    entity(
        id,
        ty,
        [
            ("contentSize", json!(size)),
            ("encodingFormat", json!(media_type(id))),
            ("sha256", json!(sha)),
        ],
    )
}

/// `@id` and `@type` first, then the remaining keys sorted.
fn entity<const N: usize>(id: &str, ty: Value, props: [(&str, Value); N]) -> Value {
    let mut props = props.to_vec();
    props.sort_by(|a, b| a.0.cmp(b.0));
    let mut m = Map::new();
    m.insert("@id".into(), json!(id));
    m.insert("@type".into(), ty);
    for (k, v) in props {
        m.insert(k.into(), v);
    }
    Value::Object(m)
}
