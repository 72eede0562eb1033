use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use provcap::{Backend, RunConfig};

/// Record the provenance of a command and package a reproducibility bundle.
#[derive(Debug, Parser)]
#[command(name = "provcap", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a command and write prov_<k> bundles for it.
    Run(RunArgs),
    /// Append a directive to the control file of the enclosing run.
    Log(LogArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Activity name of the run.
    #[arg(long, default_value = "experiment_run")]
    pub name: String,
    /// Base name of bundle directories (<dir>_<k>).
    #[arg(long, default_value = "prov")]
    pub dir: String,
    #[arg(long, default_value = "yProv4DA")]
    pub prefix: String,
    #[arg(long, default_value = "http://example.org/")]
    pub namespace: String,
    /// Also write <dir>_<k>.json beside the bundle.
    #[arg(long)]
    pub json: bool,
    /// Write provenance.dot.
    #[arg(long)]
    pub dot: bool,
    /// Write provenance.svg (needs Graphviz `dot`).
    #[arg(long)]
    pub svg: bool,
    #[arg(long)]
    pub no_rocrate: bool,
    /// Record inputs without copying them.
    #[arg(long)]
    pub no_save_inputs: bool,
    /// Record inputs as subset-only (not copied).
    #[arg(long)]
    pub subset_inputs: bool,
    /// Files larger than this many MB (10^6 bytes) are not copied.
    #[arg(long, value_name = "MB", default_value_t = 50)]
    pub max_file_mb: u64,
    /// Source file extension, e.g. .py; replaces the default set when given.
    #[arg(long = "source-ext", value_name = "EXT")]
    pub source_ext: Vec<String>,
    /// Glob (relative to the working directory) of files always kept as source.
    #[arg(long = "source-root", value_name = "GLOB")]
    pub source_root: Vec<String>,
    /// Extra directory to monitor.
    #[arg(long, value_name = "DIR")]
    pub watch: Vec<PathBuf>,
    /// Glob of paths to ignore.
    #[arg(long, value_name = "GLOB")]
    pub exclude: Vec<String>,
    #[arg(long, value_enum, default_value_t = BackendArg::Auto)]
    pub backend: BackendArg,
    #[arg(long, short)]
    pub verbose: bool,
    /// The command to run, after `--`.
    #[arg(last = true, required = true, value_name = "COMMAND")]
    pub command: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Auto,
    Diff,
    Trace,
}

#[derive(Debug, Args)]
pub struct LogArgs {
    #[arg(value_enum)]
    pub verb: Verb,
    /// Path for input/output/untrack; optional segment name for end-run.
    pub arg: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Verb {
    Input,
    Output,
    Untrack,
    EndRun,
}

impl RunArgs {
    pub fn to_config(&self) -> RunConfig {
        let defaults = RunConfig::default();
        let source_extensions = if self.source_ext.is_empty() {
            defaults.source_extensions.clone()
        } else {
            self.source_ext
                .iter()
                .map(|e| if e.starts_with('.') { e.clone() } else { format!(".{e}") })
                .collect()
        };
        RunConfig {
            run_name: self.name.clone(),
            provenance_directory: self.dir.clone(),
            prefix: self.prefix.clone(),
            default_namespace: self.namespace.clone(),
            create_json_file: self.json,
            create_dot_file: self.dot,
            create_svg_file: self.svg,
            create_rocrate: !self.no_rocrate,
            save_input_files_full: !self.no_save_inputs,
            save_input_files_subset: self.subset_inputs,
            skip_files_larger_than: self.max_file_mb,
            verbose: self.verbose,
            source_extensions,
            source_roots: self.source_root.clone(),
            watch_dirs: self.watch.clone(),
            backend: match self.backend {
                BackendArg::Auto => Backend::Auto,
                BackendArg::Diff => Backend::Diff,
                BackendArg::Trace => Backend::Trace,
            },
            excludes: self.exclude.clone(),
        }
    }
}

impl LogArgs {
    /// The control line without its LF.
    pub fn to_line(&self) -> Result<String, String> {
        let verb = match self.verb {
            Verb::Input => "INPUT",
            Verb::Output => "OUTPUT",
            Verb::Untrack => "UNTRACK",
            Verb::EndRun => "END_RUN",
        };
        let arg = self.arg.as_deref().unwrap_or("");
        if arg.contains(['\t', '\n']) {
            return Err("paths and names may not contain TAB or LF".into());
        }
        match (self.verb, arg.is_empty()) {
            (Verb::EndRun, true) => Ok(verb.to_string()),
            (_, true) => Err(format!("{} needs a path", verb.to_lowercase())),
            _ => Ok(format!("{verb}\t{arg}")),
        }
    }
}
