use std::fs;
use std::path::{Path, PathBuf};

use log::info;

use crate::digest::is_commit_hex;

/// Finds the commit checked out in the repository enclosing `start_dir` by
/// reading `.git/HEAD`, loose refs and `packed-refs` directly.
pub fn resolve_git_head(start_dir: &Path) -> Option<String> {
    let git_dir = find_git_dir(start_dir)?;
    let head = match fs::read_to_string(git_dir.join("HEAD")) {
        Ok(h) => h,
        Err(e) => {
            info!("git: cannot read {}: {e}", git_dir.join("HEAD").display());
            return None;
        }
    };
    let head = head.trim();
    if is_commit_hex(head) {
        return Some(head.to_string());
    }
    let Some(refpath) = head.strip_prefix("ref:").map(str::trim) else {
        info!("git: unrecognised HEAD contents {head:?}");
        return None;
    };
    // Linked worktrees keep shared refs in the common directory.
    let mut dirs = vec![git_dir.clone()];
    if let Ok(common) = fs::read_to_string(git_dir.join("commondir")) {
        dirs.push(git_dir.join(common.trim()));
    }
    for dir in &dirs {
        if let Some(hash) = read_loose_ref(dir, refpath) {
            return Some(hash);
        }
    }
    for dir in &dirs {
        if let Some(hash) = read_packed_ref(dir, refpath) {
            return Some(hash);
        }
    }
    info!("git: {refpath} does not resolve to a commit");
    None
}

fn find_git_dir(start: &Path) -> Option<PathBuf> {
    for dir in start.ancestors() {
        let candidate = dir.join(".git");
        if candidate.is_dir() {
            return Some(candidate);
        }
        if candidate.is_file() {
            // `gitdir: <path>` indirection used by worktrees and submodules.
            let text = fs::read_to_string(&candidate).ok()?;
            let target = text.trim().strip_prefix("gitdir:")?.trim();
            return Some(dir.join(target));
        }
    }
    info!("git: no repository above {}", start.display());
    None
}

fn read_loose_ref(git_dir: &Path, refpath: &str) -> Option<String> {
    let text = fs::read_to_string(git_dir.join(refpath)).ok()?;
    let hash = text.trim();
    is_commit_hex(hash).then(|| hash.to_string())
}

fn read_packed_ref(git_dir: &Path, refpath: &str) -> Option<String> {
    let text = fs::read_to_string(git_dir.join("packed-refs")).ok()?;
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('^'))
        .filter_map(|l| l.split_once(' '))
        .find(|(_, name)| name.trim_end() == refpath)
        .map(|(hash, _)| hash)
        .filter(|h| is_commit_hex(h))
        .map(str::to_string)
}

#[cfg(test)]
mod tests {
    use super::*;

    const H1: &str = "0123456789abcdef0123456789abcdef01234567";
    const H2: &str = "89abcdef0123456789abcdef0123456789abcdef";

    fn repo() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join(".git/refs/heads")).unwrap();
        dir
    }

    #[test]
    fn symbolic_ref_to_loose_ref() {
        let dir = repo();
        fs::write(dir.path().join(".git/HEAD"), "ref: refs/heads/main\n").unwrap();
        fs::write(dir.path().join(".git/refs/heads/main"), format!("{H1}\n")).unwrap();
        assert_eq!(resolve_git_head(dir.path()).as_deref(), Some(H1));
    }

    #[test]
    fn detached_head() {
        let dir = repo();
        fs::write(dir.path().join(".git/HEAD"), format!("{H2}\n")).unwrap();
        assert_eq!(resolve_git_head(dir.path()).as_deref(), Some(H2));
    }

    #[test]
    fn packed_refs_fallback() {
        let dir = repo();
        fs::write(dir.path().join(".git/HEAD"), "ref: refs/heads/feature/x\n").unwrap();
        fs::write(
            dir.path().join(".git/packed-refs"),
            format!("# pack-refs with: peeled fully-peeled sorted \n{H2} refs/heads/main\n{H1} refs/heads/feature/x\n^{H2}\n"),
        )
        .unwrap();
        assert_eq!(resolve_git_head(dir.path()).as_deref(), Some(H1));
    }

    #[test]
    fn walks_up_from_subdirectory() {
        let dir = repo();
        fs::write(dir.path().join(".git/HEAD"), format!("{H1}\n")).unwrap();
        let sub = dir.path().join("a/b");
        fs::create_dir_all(&sub).unwrap();
        assert_eq!(resolve_git_head(&sub).as_deref(), Some(H1));
    }

    #[test]
    fn unresolvable_or_missing() {
        let dir = repo();
        fs::write(dir.path().join(".git/HEAD"), "ref: refs/heads/nowhere\n").unwrap();
        assert_eq!(resolve_git_head(dir.path()), None);

        fs::write(dir.path().join(".git/HEAD"), "garbage\n").unwrap();
        assert_eq!(resolve_git_head(dir.path()), None);

        let plain = tempfile::tempdir().unwrap();
        // A temp dir normally has no repository above it; skip if it does.
        if find_git_dir(plain.path()).is_none() {
            assert_eq!(resolve_git_head(plain.path()), None);
        }
    }

    #[test]
    fn gitdir_file_indirection() {
        let store = repo();
        fs::write(store.path().join(".git/HEAD"), format!("{H2}\n")).unwrap();
        let wt = tempfile::tempdir().unwrap();
        fs::write(
            wt.path().join(".git"),
            format!("gitdir: {}\n", store.path().join(".git").display()),
        )
        .unwrap();
        assert_eq!(resolve_git_head(wt.path()).as_deref(), Some(H2));
    }
}
