mod args;

use std::fs::OpenOptions;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use provcap::monitor::CONTROL_ENV;
use provcap::runmeta::CaptureError;
use provcap::{run_pipeline, PipelineError, PipelineOptions};

use args::{Cli, Command, LogArgs, RunArgs};

const USAGE_ERROR: u8 = 2;
const PROVENANCE_ERROR: u8 = 3;
const NOT_EXECUTABLE: u8 = 127;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run(&args),
        Command::Log(args) => log_directive(&args),
    }
}

fn run(args: &RunArgs) -> ExitCode {
    let level = if args.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_target(false)
        .init();

    let config = args.to_config();
    match run_pipeline(&args.command, &config, &PipelineOptions::default()) {
        Ok(outcome) => {
            for b in &outcome.bundles {
                log::info!("bundle {} ({} files)", b.bundle_dir.display(), b.files_written.len());
            }
            ExitCode::from(status_byte(outcome.exit_status))
        }
        Err(PipelineError::Config(e)) => fail(USAGE_ERROR, &format!("invalid option: {e}")),
        Err(PipelineError::Preflight(msg)) => fail(USAGE_ERROR, &msg),
        Err(PipelineError::Capture(e @ CaptureError::EmptyCommand)) => fail(USAGE_ERROR, &e.to_string()),
        Err(PipelineError::Capture(e @ (CaptureError::NotExecutable { .. } | CaptureError::Spawn { .. }))) => {
            fail(NOT_EXECUTABLE, &e.to_string())
        }
        Err(PipelineError::Capture(e)) => fail(PROVENANCE_ERROR, &e.to_string()),
        Err(PipelineError::Provenance { exit_status, message }) => {
            eprintln!("provcap: {message} (command exited with status {exit_status})");
            let code = if exit_status == 0 {
                PROVENANCE_ERROR
            } else {
                status_byte(exit_status)
            };
            ExitCode::from(code)
        }
    }
}

fn log_directive(args: &LogArgs) -> ExitCode {
    let line = match args.to_line() {
        Ok(l) => l,
        Err(e) => return fail(USAGE_ERROR, &e),
    };
    let Some(path) = std::env::var_os(CONTROL_ENV) else {
        return fail(
            USAGE_ERROR,
            &format!("{CONTROL_ENV} is not set; run this inside `provcap run`"),
        );
    };
    let written = OpenOptions::new()
        .append(true)
        .open(&path)
        .and_then(|mut f| f.write_all(format!("{line}\n").as_bytes()));
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(1, &format!("{}: {e}", path.to_string_lossy())),
    }
}

fn fail(code: u8, message: &str) -> ExitCode {
    eprintln!("provcap: {message}");
    ExitCode::from(code)
}

/// Exit statuses are reported modulo 256, as a shell would see them.
fn status_byte(status: i32) -> u8 {
    (status & 0xff) as u8
}
