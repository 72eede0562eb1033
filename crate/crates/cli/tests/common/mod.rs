#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_provcap")
}

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn copy_tree(from: &Path, to: &Path) {
    for entry in WalkDir::new(from) {
        let entry = entry.unwrap();
        let dest = to.join(entry.path().strip_prefix(from).unwrap());
        if entry.file_type().is_dir() {
            fs::create_dir_all(&dest).unwrap();
        } else {
            fs::copy(entry.path(), &dest).unwrap();
        }
    }
}

/// A scratch working directory holding a copy of the sample project.
pub fn project() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_tree(&fixtures().join("project"), dir.path());
    dir
}

/// A scratch working directory holding one fixture script.
pub fn with_script(name: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixtures().join(name), dir.path().join(name)).unwrap();
    dir
}

pub fn provcap(cwd: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(cwd)
        .env_remove("YPROV_CONTROL")
        .env_remove("RUST_LOG")
        .output()
        .unwrap()
}

pub fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

/// Bundle-relative paths of every regular file under `dir`, sorted.
pub fn files_under(dir: &Path) -> Vec<String> {
    let mut out: Vec<String> = WalkDir::new(dir)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .map(|e| e.path().strip_prefix(dir).unwrap().to_string_lossy().replace('\\', "/"))
        .collect();
    out.sort();
    out
}

pub fn top_level(dir: &Path) -> Vec<String> {
    let mut out: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    out.sort();
    out
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn sha256_of(path: &Path) -> String {
    let bytes = fs::read(path).unwrap();
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn section_len(prov: &Value, key: &str) -> usize {
    prov.get(key).and_then(Value::as_object).map_or(0, |m| m.len())
}

/// Local names (after `prefix:`) of the entities in a PROV-JSON document.
pub fn entity_locals(prov: &Value) -> Vec<String> {
    prov.get("entity")
        .and_then(Value::as_object)
        .map(|m| m.keys().map(|k| k.split_once(':').unwrap().1.to_string()).collect())
        .unwrap_or_default()
}

/// Checks one crate against the files actually in its bundle. Returns a
/// description of the first problem found.
pub fn check_crate(bundle: &Path) -> Result<(), String> {
    let meta = read_json(&bundle.join("ro-crate-metadata.json"));
    if meta["@context"] != "https://w3id.org/ro/crate/1.1/context" {
        return Err(format!("unexpected @context {}", meta["@context"]));
    }
    let graph = meta["@graph"].as_array().ok_or("no @graph")?;
    let by_id = |id: &str| graph.iter().find(|e| e["@id"] == id);

    let descriptor = by_id("ro-crate-metadata.json").ok_or("no metadata descriptor")?;
    if descriptor["about"]["@id"] != "./" {
        return Err("descriptor is not about ./".into());
    }
    if descriptor["conformsTo"]["@id"] != "https://w3id.org/ro/crate/1.1" {
        return Err("descriptor does not conform to RO-Crate 1.1".into());
    }
    let root = by_id("./").ok_or("no root dataset")?;
    if root["@type"] != "Dataset" {
        return Err("root is not a Dataset".into());
    }
    let mut has_part: Vec<String> = root["hasPart"]
        .as_array()
        .ok_or("no hasPart")?
        .iter()
        .map(|p| p["@id"].as_str().unwrap_or_default().to_string())
        .collect();
    has_part.sort();

    let expected: Vec<String> = files_under(bundle)
        .into_iter()
        .filter(|f| {
            !matches!(
                f.as_str(),
                "ro-crate-metadata.json" | "provenance.dot" | "provenance.svg"
            )
        })
        .collect();
    if has_part != expected {
        return Err(format!("hasPart {has_part:?} != files on disk {expected:?}"));
    }
    for id in &has_part {
        let entity = by_id(id).ok_or_else(|| format!("no entity for {id}"))?;
        let actual = sha256_of(&bundle.join(id));
        if entity["sha256"] != actual.as_str() {
            return Err(format!("{id}: sha256 {} != recomputed {actual}", entity["sha256"]));
        }
        let size = fs::metadata(bundle.join(id)).unwrap().len();
        if entity["contentSize"] != size {
            return Err(format!("{id}: contentSize {} != {size}", entity["contentSize"]));
        }
    }
    Ok(())
}

pub fn has_python() -> bool {
    Command::new("python3")
        .arg("--version")
        .output()
        .is_ok_and(|o| o.status.success())
}
