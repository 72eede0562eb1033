//! Parser for `strace -f` transcripts restricted to the open family
//! (`open`, `openat`, `openat2`, `creat`).
//!
//! Accepted line shapes, each optionally prefixed by a pid (`1234 ` or
//! `[pid 1234] `) and a timestamp (`-ttt` epoch seconds or `-t`/`-tt`
//! wall-clock time):
//!
//! ```text
//! openat(AT_FDCWD, "results.csv", O_RDONLY|O_CLOEXEC) = 3
//! openat(AT_FDCWD, "lib.py", O_RDONLY <unfinished ...>
//! <... openat resumed>) = 4
//! ```
//!
//! Split calls are re-joined by `(pid, syscall)` before interpretation.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::sync::LazyLock;
use std::time::{Duration, SystemTime};

use regex::Regex;

use super::{EventKind, FileEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Malformed lines are skipped with a warning.
    #[default]
    Lenient,
    /// The first malformed line aborts parsing.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceWarning {
    /// 1-based.
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct TraceError {
    /// 1-based.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "trace line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceParse {
    pub events: Vec<FileEvent>,
    pub warnings: Vec<TraceWarning>,
}

static PREFIX: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?x)
        ^(?: \[pid \s+ (?P<pid_a>\d+) \] \s+ | (?P<pid_b>\d+) \s+ )?
        (?: (?P<secs>\d+)\.(?P<frac>\d{1,9}) \s+ | \d{2}:\d{2}:\d{2}(?:\.\d+)? \s+ )?
        (?P<body>.*)$",
    )
    .unwrap()
});

static RESUMED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^<\.\.\. (?P<name>[A-Za-z0-9_]+) resumed>(?P<rest>.*)$").unwrap());

static CALL_NAME: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(?P<name>[A-Za-z0-9_]+)\(").unwrap());

static RETURN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?P<args>.*)\)\s+=\s+(?P<ret>-?\d+|\?)(?:<[^>]*>)?(?:\s.*)?$").unwrap());

const UNFINISHED: &str = " <unfinished ...>";
const WRITE_FLAGS: [&str; 5] = ["O_WRONLY", "O_RDWR", "O_CREAT", "O_TRUNC", "O_APPEND"];

struct Pending {
    text: String,
    time: Option<SystemTime>,
    line: usize,
}

enum Outcome {
    Event(FileEvent),
    Skip,
    Warn(String),
}

pub fn parse_trace_stream<I, S>(lines: I, mode: ParseMode) -> Result<TraceParse, TraceError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = TraceParse::default();
    let mut pending: HashMap<(Option<u32>, String), Pending> = HashMap::new();

    let problem = |out: &mut TraceParse, line: usize, message: String| -> Result<(), TraceError> {
        match mode {
            ParseMode::Strict => Err(TraceError { line, message }),
            ParseMode::Lenient => {
                log::warn!("trace line {line}: {message}");
                out.warnings.push(TraceWarning { line, message });
                Ok(())
            }
        }
    };

    for (index, raw) in lines.into_iter().enumerate() {
        let line_no = index + 1;
        let raw = raw.as_ref().trim_end_matches(['\n', '\r']);
        if raw.trim().is_empty() {
            continue;
        }
        let caps = PREFIX.captures(raw).expect("prefix pattern matches any line");
        let pid = caps
            .name("pid_a")
            .or_else(|| caps.name("pid_b"))
            .and_then(|m| m.as_str().parse::<u32>().ok());
        let time = caps.name("secs").map(|s| {
            let frac = caps.name("frac").unwrap().as_str();
            let nanos: u32 = format!("{frac:0<9}").parse().unwrap_or(0);
            SystemTime::UNIX_EPOCH + Duration::new(s.as_str().parse().unwrap_or(0), nanos)
        });
        let body = caps.name("body").unwrap().as_str();

        let (call, call_time) = if let Some(r) = RESUMED.captures(body) {
            let name = r.name("name").unwrap().as_str();
            match pending.remove(&(pid, name.to_string())) {
                Some(p) => (
                    format!("{}{}", p.text, r.name("rest").unwrap().as_str()),
                    p.time.or(time),
                ),
                None => {
                    problem(
                        &mut out,
                        line_no,
                        format!("resumed {name} call has no matching unfinished line"),
                    )?;
                    continue;
                }
            }
        } else if let Some(head) = body.strip_suffix(UNFINISHED) {
            if let Some(c) = CALL_NAME.captures(head) {
                let key = (pid, c.name("name").unwrap().as_str().to_string());
                let entry = Pending {
                    text: head.to_string(),
                    time,
                    line: line_no,
                };
                if let Some(prev) = pending.insert(key, entry) {
                    out.warnings.push(TraceWarning {
                        line: prev.line,
                        message: "unfinished call was never resumed".to_string(),
                    });
                }
            }
            continue;
        } else {
            (body.to_string(), time)
        };

        match interpret_call(&call) {
            Ok(Outcome::Event(mut ev)) => {
                ev.seq = out.events.len() as u64;
                ev.pid = pid;
                ev.time = call_time;
                out.events.push(ev);
            }
            Ok(Outcome::Skip) => {}
            Ok(Outcome::Warn(message)) => out.warnings.push(TraceWarning { line: line_no, message }),
            Err(message) => problem(&mut out, line_no, message)?,
        }
    }

    let mut leftovers: Vec<_> = pending.into_values().map(|p| p.line).collect();
    leftovers.sort_unstable();
    for line in leftovers {
        out.warnings.push(TraceWarning {
            line,
            message: "unfinished call was never resumed".to_string(),
        });
    }
    Ok(out)
}

/// Interprets one complete (possibly re-joined) call.
fn interpret_call(call: &str) -> Result<Outcome, String> {
    let Some(c) = CALL_NAME.captures(call) else {
        return Ok(Outcome::Skip);
    };
    let name = c.name("name").unwrap().as_str();
    let after_paren = &call[c.get(0).unwrap().end()..];

    let (dirfd, quoted) = match name {
        "open" | "creat" => (None, after_paren),
        "openat" | "openat2" => match after_paren.find(", \"") {
            Some(i) => (Some(&after_paren[..i]), &after_paren[i + 2..]),
            None => return Err(format!("{name}: expected a quoted path argument")),
        },
        _ => return Ok(Outcome::Skip),
    };
    if !quoted.starts_with('"') {
        return Err(format!("{name}: expected a quoted path argument"));
    }
    let (path_bytes, rest, odd_escapes) = unquote(&quoted[1..])?;

    let Some(r) = RETURN.captures(rest) else {
        return Err(format!("{name}: missing return value"));
    };
    let ret = r.name("ret").unwrap().as_str();
    if ret == "?" || ret.starts_with('-') {
        return Ok(Outcome::Skip);
    }

    let kind = if name == "creat" || has_write_flag(r.name("args").unwrap().as_str()) {
        EventKind::WriteIntent
    } else {
        EventKind::ReadIntent
    };

    let mut path = bytes_to_path(path_bytes);
    if path.is_relative() {
        match dirfd.map(str::trim) {
            None | Some("AT_FDCWD") => {}
            Some(fd) => match decorated_dir(fd) {
                Some(dir) => path = PathBuf::from(dir).join(path),
                None => {
                    return Ok(Outcome::Warn(format!(
                        "{name}: relative path {} against undecorated dirfd {fd} cannot be resolved",
                        path.display()
                    )))
                }
            },
        }
    }

    if !odd_escapes.is_empty() {
        log::warn!(
            "trace: kept unknown escapes {odd_escapes:?} verbatim in {}",
            path.display()
        );
    }
    Ok(Outcome::Event(FileEvent {
        path,
        kind,
        seq: 0,
        pid: None,
        time: None,
    }))
}

fn has_write_flag(args: &str) -> bool {
    args.split(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .any(|tok| WRITE_FLAGS.contains(&tok))
}

/// `3</home/u/data>` → `/home/u/data`.
fn decorated_dir(fd: &str) -> Option<&str> {
    let start = fd.find('<')?;
    fd[start + 1..].strip_suffix('>')
}

/// Decodes a quoted string body (opening quote already consumed). Returns
/// the bytes, the text after the closing quote, and any escapes that were
/// kept verbatim.
fn unquote(s: &str) -> Result<(Vec<u8>, &str, Vec<String>), String> {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut odd = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'"' => return Ok((out, &s[i + 1..], odd)),
            b'\\' => {
                let Some(&next) = bytes.get(i + 1) else {
                    break;
                };
                match next {
                    b'"' | b'\\' => {
                        out.push(next);
                        i += 2;
                    }
                    b'n' => {
                        out.push(b'\n');
                        i += 2;
                    }
                    b't' => {
                        out.push(b'\t');
                        i += 2;
                    }
                    b'r' => {
                        out.push(b'\r');
                        i += 2;
                    }
                    b'v' => {
                        out.push(0x0b);
                        i += 2;
                    }
                    b'f' => {
                        out.push(0x0c);
                        i += 2;
                    }
                    b'0'..=b'7' => {
                        let digits = bytes[i + 1..]
                            .iter()
                            .take(3)
                            .take_while(|b| (b'0'..=b'7').contains(b))
                            .count();
                        let value = bytes[i + 1..i + 1 + digits]
                            .iter()
                            .fold(0u32, |acc, d| acc * 8 + u32::from(d - b'0'));
                        if value > 0xff {
                            return Err(format!("octal escape out of range: \\{value:o}"));
                        }
                        out.push(value as u8);
                        i += 1 + digits;
                    }
                    other => {
                        out.push(b'\\');
                        out.push(other);
                        odd.push(format!("\\{}", other as char));
                        i += 2;
                    }
                }
            }
            b => {
                out.push(b);
                i += 1;
            }
        }
    }
    Err("unterminated quoted path".to_string())
}

#[cfg(unix)]
fn bytes_to_path(bytes: Vec<u8>) -> PathBuf {
    use std::os::unix::ffi::OsStringExt;
    PathBuf::from(std::ffi::OsString::from_vec(bytes))
}

#[cfg(not(unix))]
fn bytes_to_path(bytes: Vec<u8>) -> PathBuf {
    PathBuf::from(String::from_utf8_lossy(&bytes).into_owned())
}
