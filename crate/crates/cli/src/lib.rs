//! The `btdiv` command-line tool.
//!
//! Every command reads and validates its inputs in full before writing
//! anything, writes outputs through temporary files, and produces the same
//! bytes for the same inputs, flags and seed regardless of `--threads`.
//! Failures print one JSON object on stderr and exit with status 1 for bad
//! input or configuration, 2 for internal errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

pub mod config;
mod decode;
mod diversity;
pub mod error;
pub mod files;
mod group;
mod stats;

pub use decode::{DecodeArgs, TrainArgs};
pub use diversity::DiversityArgs;
pub use error::{CliError, CliResult, ErrorKind};
pub use group::{GroupArgs, SighistArgs};
pub use stats::StatsArgs;

use config::FileConfig;
use files::{write_atomic, InputDigest};

#[derive(Debug, Parser)]
#[command(
    name = "btdiv",
    version,
    about = "Diversity metrics for sets of candidate translations"
)]
pub struct Cli {
    /// Worker threads; 0 uses one per core. Outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// TOML configuration file. Flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score candidate groups with i-BLEU, i-chrF and the tree-kernel difference.
    Diversity(DiversityArgs),
    /// Summary statistics of a text file, optionally with neologisms.
    Stats(StatsArgs),
    /// Train an n-gram model.
    Train(TrainArgs),
    /// Generate candidate groups from an n-gram model.
    Decode(DecodeArgs),
    /// Build fine-tuning sets from the largest syntactic groups of a corpus.
    Group(GroupArgs),
    /// Compare first-split signature frequencies across tree files.
    Sighist(SighistArgs),
}

/// Provenance block at the top of every report.
#[derive(Debug, Clone, Serialize)]
pub struct Header {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: serde_json::Value,
    config_sha256: String,
    inputs: Vec<InputDigest>,
}

impl Header {
    pub fn new(
        command: &'static str,
        config: serde_json::Value,
        config_sha256: String,
        inputs: Vec<InputDigest>,
    ) -> Self {
        Self {
            tool: "btdiv",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            config_sha256,
            inputs,
        }
    }

    /// The header as `# `-prefixed lines for TSV outputs.
    pub fn comment_lines(&self) -> String {
        let mut out = format!("# {} {} {}\n", self.tool, self.version, self.command);
        out.push_str(&format!("# config_sha256: {}\n", self.config_sha256));
        out.push_str(&format!("# config: {}\n", self.config));
        for i in &self.inputs {
            out.push_str(&format!("# input: {} sha256:{}\n", i.file, i.sha256));
        }
        out
    }
}

/// Writes to `path` atomically, or to stdout without one.
fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::internal(format!("cannot write stdout: {e}")))
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let config = FileConfig::load(cli.config.as_deref())?;
    with_threads(cli.threads, move || match cli.command {
        Command::Diversity(a) => diversity::run(a, config),
        Command::Stats(a) => stats::run(a, config),
        Command::Train(a) => decode::train(a, config),
        Command::Decode(a) => decode::decode(a, config),
        Command::Group(a) => group::group(a, config),
        Command::Sighist(a) => group::sighist(a),
    })
}

#[cfg(feature = "parallel")]
fn with_threads<F: FnOnce() -> CliResult<()> + Send>(threads: usize, f: F) -> CliResult<()> {
    if threads == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::internal(format!("cannot start worker threads: {e}")))?
        .install(f)
}

#[cfg(not(feature = "parallel"))]
fn with_threads<F: FnOnce() -> CliResult<()> + Send>(_threads: usize, f: F) -> CliResult<()> {
    f()
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let err = CliError::validation(e.to_string().trim_end());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}", err.to_json());
            err.exit_code()
        }
    }
}
