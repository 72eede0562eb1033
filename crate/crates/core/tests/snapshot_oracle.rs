//! `diff_snapshots` against an independent list-and-hash oracle.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use proptest::prelude::*;
use provcap::monitor::{diff_snapshots, take_snapshot, EventKind};
use provcap::paths::relative_slash;
use sha2::{Digest, Sha256};

const NO_EXCLUDES: [&str; 0] = [];

/// Recursively lists regular files with their length and digest.
fn list_and_hash(root: &Path) -> BTreeMap<String, (u64, Vec<u8>)> {
    fn walk(dir: &Path, prefix: &str, out: &mut BTreeMap<String, (u64, Vec<u8>)>) {
        for entry in fs::read_dir(dir).unwrap() {
            let entry = entry.unwrap();
            let name = entry.file_name().into_string().unwrap();
            let rel = if prefix.is_empty() {
                name
            } else {
                format!("{prefix}/{name}")
            };
            let ft = entry.file_type().unwrap();
            if ft.is_dir() {
                walk(&entry.path(), &rel, out);
            } else if ft.is_file() {
                let bytes = fs::read(entry.path()).unwrap();
                out.insert(rel, (bytes.len() as u64, Sha256::digest(&bytes).to_vec()));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, "", &mut out);
    out
}

fn oracle(
    before: &BTreeMap<String, (u64, Vec<u8>)>,
    after: &BTreeMap<String, (u64, Vec<u8>)>,
) -> Vec<(EventKind, String)> {
    let mut out = Vec::new();
    let mut all: Vec<&String> = before.keys().chain(after.keys()).collect();
    all.sort();
    all.dedup();
    for p in all {
        match (before.get(p), after.get(p)) {
            (None, Some(_)) => out.push((EventKind::Created, p.clone())),
            (Some(_), None) => out.push((EventKind::Removed, p.clone())),
            (Some(b), Some(a)) if b != a => out.push((EventKind::Modified, p.clone())),
            _ => {}
        }
    }
    out
}

fn set_tree(root: &Path, files: &BTreeMap<String, Option<Vec<u8>>>) {
    for (rel, content) in files {
        let path = root.join(rel);
        match content {
            Some(c) => {
                fs::create_dir_all(path.parent().unwrap()).unwrap();
                fs::write(&path, c).unwrap();
            }
            None => {
                let _ = fs::remove_file(&path);
            }
        }
    }
}

fn check(before: &BTreeMap<String, Option<Vec<u8>>>, after: &BTreeMap<String, Option<Vec<u8>>>) {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    set_tree(root, before);
    let s1 = take_snapshot(root, &NO_EXCLUDES).unwrap();
    let o1 = list_and_hash(root);
    set_tree(root, after);
    let s2 = take_snapshot(root, &NO_EXCLUDES).unwrap();
    let o2 = list_and_hash(root);

    let got: Vec<(EventKind, String)> = diff_snapshots(&s1, &s2)
        .unwrap()
        .into_iter()
        .map(|e| (e.kind, relative_slash(&e.path, &s2.root).unwrap()))
        .collect();
    assert_eq!(got, oracle(&o1, &o2), "before {before:?} after {after:?}");
    assert!(diff_snapshots(&s2, &s2).unwrap().is_empty());
}

/// Every before/after combination of three files, each absent, "x", "y" or "xy".
#[test]
fn exhaustive_three_files() {
    let names = ["a", "b", "d/c"];
    let states: [Option<&[u8]>; 4] = [None, Some(b"x"), Some(b"y"), Some(b"xy")];
    let tree = |code: usize| -> BTreeMap<String, Option<Vec<u8>>> {
        let mut c = code;
        names
            .iter()
            .map(|n| {
                let s = states[c % 4].map(<[u8]>::to_vec);
                c /= 4;
                (n.to_string(), s)
            })
            .collect()
    };
    let n = 4usize.pow(names.len() as u32);
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    for b in 0..n {
        for a in 0..n {
            let (before, after) = (tree(b), tree(a));
            // Reuse one directory: reset, then apply both states.
            let clear: BTreeMap<String, Option<Vec<u8>>> = names.iter().map(|n| (n.to_string(), None)).collect();
            set_tree(root, &clear);
            set_tree(root, &before);
            let s1 = take_snapshot(root, &NO_EXCLUDES).unwrap();
            let o1 = list_and_hash(root);
            set_tree(root, &after);
            let s2 = take_snapshot(root, &NO_EXCLUDES).unwrap();
            let o2 = list_and_hash(root);
            let got: Vec<(EventKind, String)> = diff_snapshots(&s1, &s2)
                .unwrap()
                .into_iter()
                .map(|e| (e.kind, relative_slash(&e.path, &s2.root).unwrap()))
                .collect();
            assert_eq!(got, oracle(&o1, &o2), "before {before:?} after {after:?}");
        }
    }
}

#[test]
fn spec_example_listing() {
    let before = BTreeMap::from([
        ("a".to_string(), Some(b"1".to_vec())),
        ("b".to_string(), Some(b"2".to_vec())),
        ("c".to_string(), None),
    ]);
    let after = BTreeMap::from([
        ("a".to_string(), None),
        ("b".to_string(), Some(b"22".to_vec())),
        ("c".to_string(), Some(b"3".to_vec())),
    ]);
    check(&before, &after);
}

fn arb_tree() -> impl Strategy<Value = BTreeMap<String, Option<Vec<u8>>>> {
    let name = prop::sample::select(vec!["a", "b", "c", "d/e", "d/f", "d/g/h", "i", "j", "k/l", "m"]);
    let content = prop::option::of(prop::collection::vec(any::<u8>(), 0..4));
    prop::collection::btree_map(name.prop_map(str::to_string), content, 0..=10)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_trees_match_oracle(before in arb_tree(), mutation in arb_tree()) {
        let mut after = before.clone();
        for (k, v) in mutation {
            after.insert(k, v);
        }
        check(&before, &after);
    }
}
