//! Path normalization and glob matching over working-directory-relative paths.

use std::path::{Component, Path, PathBuf};

use globset::{Glob, GlobBuilder, GlobSet, GlobSetBuilder};

/// Resolves `path` against `base`, folds `.`/`..` lexically, then resolves
/// symlinks for the longest prefix that exists on disk.
pub fn normalize(path: &Path, base: &Path) -> PathBuf {
    let joined = if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    };
    let lexical = lexical_normalize(&joined);
    if let Ok(real) = lexical.canonicalize() {
        return real;
    }
    // Canonicalize the deepest existing ancestor and re-attach the rest.
    let mut tail = Vec::new();
    let mut cursor = lexical.as_path();
    while let Some(parent) = cursor.parent() {
        if let Some(name) = cursor.file_name() {
            tail.push(name.to_os_string());
        }
        if let Ok(real) = parent.canonicalize() {
            let mut out = real;
            out.extend(tail.iter().rev());
            return out;
        }
        cursor = parent;
    }
    lexical
}

pub fn lexical_normalize(path: &Path) -> PathBuf {
    let mut out = PathBuf::new();
    for comp in path.components() {
        match comp {
            Component::CurDir => {}
            Component::ParentDir => {
                if !out.pop() {
                    out.push("..");
                }
            }
            other => out.push(other.as_os_str()),
        }
    }
    out
}

/// `path` relative to `root` with `/` separators, if `path` lies under `root`.
pub fn relative_slash(path: &Path, root: &Path) -> Option<String> {
    let rel = path.strip_prefix(root).ok()?;
    let parts: Vec<String> = rel
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect();
    if parts.is_empty() {
        return None;
    }
    Some(parts.join("/"))
}

/// Compiled exclusion patterns, matched against `/`-separated relative paths.
///
/// `*` never crosses a separator; `**` does. A pattern ending in `/**` also
/// prunes the directory it names so walks can skip it entirely.
#[derive(Debug, Clone)]
pub struct GlobFilter {
    files: GlobSet,
    dirs: GlobSet,
}

impl GlobFilter {
    pub fn new<S: AsRef<str>>(patterns: &[S]) -> Result<Self, globset::Error> {
        let mut files = GlobSetBuilder::new();
        let mut dirs = GlobSetBuilder::new();
        for p in patterns {
            let p = p.as_ref();
            files.add(glob(p)?);
            if let Some(dir) = p.strip_suffix("/**") {
                if !dir.is_empty() {
                    dirs.add(glob(dir)?);
                }
            }
        }
        Ok(GlobFilter {
            files: files.build()?,
            dirs: dirs.build()?,
        })
    }

    pub fn empty() -> Self {
        GlobFilter {
            files: GlobSet::empty(),
            dirs: GlobSet::empty(),
        }
    }

    pub fn matches_file(&self, rel: &str) -> bool {
        self.files.is_match(rel)
    }

    pub fn matches_dir(&self, rel: &str) -> bool {
        self.dirs.is_match(rel)
    }
}

fn glob(pattern: &str) -> Result<Glob, globset::Error> {
    GlobBuilder::new(pattern).literal_separator(true).build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexical() {
        assert_eq!(lexical_normalize(Path::new("/a/./b/../c")), PathBuf::from("/a/c"));
        assert_eq!(lexical_normalize(Path::new("a/../../b")), PathBuf::from("../b"));
    }

    #[test]
    fn normalize_missing_file_keeps_tail() {
        let dir = tempfile::tempdir().unwrap();
        let real = dir.path().canonicalize().unwrap();
        let p = normalize(Path::new("sub/../x/y.txt"), dir.path());
        assert_eq!(p, real.join("x/y.txt"));
    }

    #[cfg(unix)]
    #[test]
    fn normalize_resolves_symlinks() {
        let dir = tempfile::tempdir().unwrap();
        let real = dir.path().canonicalize().unwrap();
        std::fs::create_dir(real.join("data")).unwrap();
        std::fs::write(real.join("data/a.csv"), "1").unwrap();
        std::os::unix::fs::symlink(real.join("data"), real.join("link")).unwrap();
        assert_eq!(normalize(Path::new("link/a.csv"), &real), real.join("data/a.csv"));
    }

    #[test]
    fn relative() {
        assert_eq!(
            relative_slash(Path::new("/w/a/b.txt"), Path::new("/w")).as_deref(),
            Some("a/b.txt")
        );
        assert_eq!(relative_slash(Path::new("/w"), Path::new("/w")), None);
        assert_eq!(relative_slash(Path::new("/x/a"), Path::new("/w")), None);
    }

    #[test]
    fn glob_filter() {
        let f = GlobFilter::new(&["prov_*/**", "**/__pycache__/**", "*.tmp"]).unwrap();
        assert!(f.matches_file("prov_0/x"));
        assert!(f.matches_file("prov_0/a/b"));
        assert!(f.matches_dir("prov_0"));
        assert!(f.matches_file("a/__pycache__/m.pyc"));
        assert!(f.matches_dir("a/b/__pycache__"));
        assert!(f.matches_file("x.tmp"));
        assert!(!f.matches_file("sub/x.tmp"));
        assert!(!f.matches_file("prov/x"));
    }
}
