//! `btdiv stats`: corpus summary statistics and neologisms.

use std::collections::HashSet;
use std::path::PathBuf;

use btdiv_core::corpuslab::{corpus_stats, neologisms, CorpusStats, NeologismReport};
use clap::Args;
use serde::Serialize;

use crate::config::{fingerprint, FileConfig};
use crate::error::CliResult;
use crate::files::Input;
use crate::{emit, Header};

const DEFAULT_NEOLOGISM_CAP: usize = 20;

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Text file, one sentence per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Reference vocabulary, one word per line. Enables the neologism report.
    #[arg(long)]
    pub reference_vocab: Option<PathBuf>,
    /// Most neologisms listed in the report.
    #[arg(long)]
    pub neologism_cap: Option<usize>,
    /// Output file [default: stdout].
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct StatsReport {
    header: Header,
    stats: CorpusStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    neologisms: Option<NeologismReport>,
}

pub fn run(args: StatsArgs, config: FileConfig) -> CliResult<()> {
    let cap = args
        .neologism_cap
        .or(config.stats.neologism_cap)
        .unwrap_or(DEFAULT_NEOLOGISM_CAP);
    let input = Input::read(&args.input)?;
    let mut digests = vec![input.digest()];
    let lines = input.lines();
    let neo = match &args.reference_vocab {
        Some(path) => {
            let vocab_file = Input::read(path)?;
            digests.push(vocab_file.digest());
            let vocab: HashSet<String> = vocab_file
                .lines()
                .into_iter()
                .map(str::trim)
                .filter(|w| !w.is_empty())
                .map(str::to_owned)
                .collect();
            Some(neologisms(&lines, &vocab, cap))
        }
        None => None,
    };
    let (config_json, hash) = fingerprint(&serde_json::json!({ "neologism_cap": cap }));
    let report = StatsReport {
        header: Header::new("stats", config_json, hash, digests),
        stats: corpus_stats(&lines),
        neologisms: neo,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("serializes");
    text.push('\n');
    emit(args.output.as_deref(), &text)
}
