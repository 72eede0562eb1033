//! Execution metadata: the command line, timing, exit status, who ran it
//! where, and the commit checked out in the enclosing git repository.

mod capture;
mod git;

use std::path::PathBuf;

use crate::timestamp::Timestamp;

pub use capture::{capture_run, capture_run_with, CaptureError, CaptureOptions};
pub use git::resolve_git_head;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMetadata {
    pub command: String,
    pub argv: Vec<String>,
    pub start_time: Timestamp,
    pub end_time: Timestamp,
    pub exit_status: i32,
    pub username: String,
    pub hostname: String,
    pub cwd: PathBuf,
    pub git_commit: Option<String>,
}

/// Joins `argv` with spaces. Arguments that are empty or contain whitespace
/// or `"` are wrapped in double quotes with inner quotes backslash-escaped.
pub fn quote_command<S: AsRef<str>>(argv: &[S]) -> String {
    argv.iter()
        .map(|a| {
            let a = a.as_ref();
            if a.is_empty() || a.chars().any(|c| c.is_whitespace() || c == '"') {
                format!("\"{}\"", a.replace('"', "\\\""))
            } else {
                a.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn current_username() -> String {
    ["USER", "LOGNAME", "USERNAME"]
        .iter()
        .filter_map(|k| std::env::var(k).ok())
        .find(|v| !v.trim().is_empty())
        .unwrap_or_else(|| "unknown".to_string())
}

pub fn current_hostname() -> String {
    #[cfg(unix)]
    {
        let mut buf = [0u8; 256];
        // SAFETY: buf is valid for buf.len() bytes; gethostname NUL-terminates on success.
        let rc = unsafe { libc::gethostname(buf.as_mut_ptr().cast(), buf.len()) };
        if rc == 0 {
            let end = buf.iter().position(|&b| b == 0).unwrap_or(buf.len());
            let name = String::from_utf8_lossy(&buf[..end]).trim().to_string();
            if !name.is_empty() {
                return name;
            }
        }
    }
    ["HOSTNAME", "COMPUTERNAME"]
        .iter()
        .filter_map(|k| std::env::var(k).ok())
        .find(|v| !v.trim().is_empty())
        .unwrap_or_else(|| "unknown".to_string())
}
