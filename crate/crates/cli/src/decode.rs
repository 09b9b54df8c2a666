//! `btdiv train` and `btdiv decode`: the n-gram model and candidate
//! generation.

use std::path::PathBuf;

use btdiv_core::decodelab::{
    generate_candidates, load_model, save_model, train_ngram_model, DecoderConfig, Prompts, SequenceModel, Strategy,
};
use btdiv_core::Execution;
use clap::{ArgGroup, Args};

use crate::config::FileConfig;
use crate::error::{CliError, CliResult};
use crate::files::{write_atomic, Input};

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training text, one sentence per line.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub order: Option<usize>,
    /// Add-alpha smoothing of the unigram base distribution.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn train(args: TrainArgs, config: FileConfig) -> CliResult<()> {
    let mut cfg = config.ngram;
    if let Some(o) = args.order {
        cfg.order = o;
    }
    if let Some(a) = args.alpha {
        cfg.alpha = a;
    }
    let input = Input::read(&args.input)?;
    let model = train_ngram_model(input.lines(), cfg)?;
    let mut bytes = Vec::new();
    save_model(&model, &mut bytes).map_err(|e| CliError::internal(e.to_string()))?;
    write_atomic(&args.output, &bytes)
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["prompts", "groups"])))]
pub struct DecodeArgs {
    /// Model file written by `btdiv train`.
    #[arg(long)]
    pub model: PathBuf,
    /// One prompt per line; each yields a group whose candidates continue it.
    #[arg(long)]
    pub prompts: Option<PathBuf>,
    /// Number of unconditioned groups.
    #[arg(long)]
    pub groups: Option<usize>,
    #[arg(long)]
    pub strategy: Option<Strategy>,
    #[arg(long)]
    pub beam_size: Option<usize>,
    /// Nucleus mass threshold.
    #[arg(long)]
    pub p: Option<f64>,
    /// Candidates per group.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: PathBuf,
}

fn overlay(args: &DecodeArgs, mut cfg: DecoderConfig) -> DecoderConfig {
    if let Some(s) = args.strategy {
        cfg.strategy = s;
    }
    if let Some(b) = args.beam_size {
        cfg.beam_size = b;
    }
    if let Some(p) = args.p {
        cfg.p = p;
    }
    if let Some(k) = args.k {
        cfg.n_best = k;
    }
    if let Some(m) = args.max_len {
        cfg.max_len = m;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg
}

pub fn decode(args: DecodeArgs, config: FileConfig) -> CliResult<()> {
    let cfg = overlay(&args, config.decoder);
    cfg.validate()?;
    let model_file = Input::read(&args.model)?;
    let model = load_model(model_file.text.as_bytes())
        .map_err(|e| CliError::validation(format!("{}: {e}", args.model.display())))?;

    let prompts = match (&args.prompts, args.groups) {
        (Some(path), _) => {
            let file = Input::read(path)?;
            let encoded = file
                .lines()
                .into_iter()
                .enumerate()
                .map(|(i, line)| {
                    model
                        .vocab()
                        .encode(line)
                        .map_err(|e| CliError::validation(format!("{}:{}: {e}", path.display(), i + 1)))
                })
                .collect::<CliResult<Vec<_>>>()?;
            Prompts::Prefixes(encoded)
        }
        (None, Some(n)) => Prompts::Unconditioned(n),
        (None, None) => unreachable!("clap requires one prompt source"),
    };

    let mut out = String::new();
    for generated in generate_candidates(&model, &prompts, &cfg, Execution::Parallel)? {
        let g = generated.map_err(|e| CliError::internal(format!("decoding failed: {e}")))?;
        out.push_str(&serde_json::to_string(&g.group).expect("serializes"));
        out.push('\n');
    }
    write_atomic(&args.output, out.as_bytes())
}
