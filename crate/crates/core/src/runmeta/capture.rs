use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitStatus};
use std::time::Duration;

use super::{current_hostname, current_username, quote_command, resolve_git_head, RunMetadata};
use crate::monitor::CONTROL_ENV;
use crate::timestamp::Timestamp;

#[derive(Debug, thiserror::Error)]
pub enum CaptureError {
    #[error("no command given")]
    EmptyCommand,
    #[error("cannot execute {program:?}: {reason}")]
    NotExecutable { program: String, reason: String },
    #[error("failed to spawn {program:?}: {source}")]
    Spawn { program: String, source: io::Error },
    #[error("waiting for child: {0}")]
    Wait(io::Error),
    #[error("cannot determine working directory: {0}")]
    Cwd(io::Error),
}

/// How the child is launched and observed while it runs.
pub struct CaptureOptions<'a> {
    /// Prepended to the command line, e.g. a tracer and its flags ending in `--`.
    pub launcher: Vec<String>,
    /// Working directory for the child; defaults to the current one.
    pub cwd: Option<PathBuf>,
    pub poll_interval: Duration,
    /// Called every `poll_interval` while the child runs, and once after it exits.
    pub on_poll: Option<&'a mut dyn FnMut()>,
}

impl Default for CaptureOptions<'_> {
    fn default() -> Self {
        CaptureOptions {
            launcher: Vec::new(),
            cwd: None,
            poll_interval: Duration::from_millis(5),
            on_poll: None,
        }
    }
}

/// Runs `argv` to completion with `env_overrides` applied and records its
/// metadata. Standard streams are inherited.
pub fn capture_run(argv: &[String], env_overrides: &BTreeMap<String, String>) -> Result<RunMetadata, CaptureError> {
    capture_run_with(argv, env_overrides, CaptureOptions::default())
}

pub fn capture_run_with(
    argv: &[String],
    env_overrides: &BTreeMap<String, String>,
    mut options: CaptureOptions<'_>,
) -> Result<RunMetadata, CaptureError> {
    let program = argv.first().ok_or(CaptureError::EmptyCommand)?;
    let cwd = match options.cwd.take() {
        Some(c) => c,
        None => std::env::current_dir().map_err(CaptureError::Cwd)?,
    };
    resolve_program(program, &cwd)?;
    if let Some(launcher) = options.launcher.first() {
        resolve_program(launcher, &cwd)?;
    }

    let full: Vec<&String> = options.launcher.iter().chain(argv).collect();
    let mut cmd = Command::new(full[0]);
    cmd.args(&full[1..]).current_dir(&cwd).envs(env_overrides);
    if !env_overrides.contains_key(CONTROL_ENV) {
        cmd.env_remove(CONTROL_ENV);
    }

    let start_time = Timestamp::now();
    let mut child = cmd.spawn().map_err(|source| CaptureError::Spawn {
        program: full[0].clone(),
        source,
    })?;
    let forwarder = SignalForwarder::start(child.id());

    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {
                if let Some(poll) = options.on_poll.as_mut() {
                    poll();
                }
                std::thread::sleep(options.poll_interval);
            }
            Err(e) => {
                forwarder.stop();
                return Err(CaptureError::Wait(e));
            }
        }
    };
    forwarder.stop();
    if let Some(poll) = options.on_poll.as_mut() {
        poll();
    }
    let end_time = Timestamp::now().max(start_time);

    Ok(RunMetadata {
        command: quote_command(argv),
        argv: argv.to_vec(),
        start_time,
        end_time,
        exit_status: exit_code(status),
        username: current_username(),
        hostname: current_hostname(),
        git_commit: resolve_git_head(&cwd),
        cwd,
    })
}

fn resolve_program(program: &str, cwd: &Path) -> Result<PathBuf, CaptureError> {
    let path = std::env::var_os("PATH");
    which::which_in(program, path, cwd).map_err(|e| CaptureError::NotExecutable {
        program: program.to_string(),
        reason: e.to_string(),
    })
}

/// The shell convention: the exit code, or 128 + signal number.
fn exit_code(status: ExitStatus) -> i32 {
    if let Some(code) = status.code() {
        return code;
    }
    #[cfg(unix)]
    {
        use std::os::unix::process::ExitStatusExt;
        if let Some(sig) = status.signal() {
            return 128 + sig;
        }
    }
    1
}

/// Relays interrupt-style signals received by the wrapper to the child so
/// it is never orphaned.
struct SignalForwarder {
    #[cfg(unix)]
    inner: Option<(signal_hook::iterator::Handle, std::thread::JoinHandle<()>)>,
}

impl SignalForwarder {
    #[cfg(unix)]
    fn start(child_pid: u32) -> Self {
        use signal_hook::consts::{SIGHUP, SIGINT, SIGQUIT, SIGTERM};
        use signal_hook::iterator::Signals;

        let inner = Signals::new([SIGINT, SIGTERM, SIGHUP, SIGQUIT])
            .map_err(|e| log::warn!("signal forwarding unavailable: {e}"))
            .ok()
            .map(|mut signals| {
                let handle = signals.handle();
                let thread = std::thread::spawn(move || {
                    for sig in signals.forever() {
                        // SAFETY: kill has no memory-safety preconditions.
                        unsafe {
                            libc::kill(child_pid as libc::pid_t, sig);
                        }
                    }
                });
                (handle, thread)
            });
        SignalForwarder { inner }
    }

    #[cfg(not(unix))]
    fn start(_child_pid: u32) -> Self {
        SignalForwarder {}
    }

    fn stop(self) {
        #[cfg(unix)]
        if let Some((handle, thread)) = self.inner {
            handle.close();
            let _ = thread.join();
        }
    }
}
