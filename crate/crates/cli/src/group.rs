//! `btdiv group` and `btdiv sighist`: syntactic groups of a parallel corpus.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use btdiv_core::grouper::{
    build_finetune_sets, compare_histograms, partition_by_signature, signature_histogram, MergeRule, SentencePair,
};
use btdiv_core::treebank::parse_bracketed;
use clap::Args;
use serde::Serialize;

use crate::config::{fingerprint, FileConfig};
use crate::error::{CliError, CliResult};
use crate::files::{commit, stage, Input};
use crate::{emit, Header};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MergeRuleArg {
    None,
    MergeNextUntilMin,
}

impl From<MergeRuleArg> for MergeRule {
    fn from(a: MergeRuleArg) -> Self {
        match a {
            MergeRuleArg::None => MergeRule::None,
            MergeRuleArg::MergeNextUntilMin => MergeRule::MergeNextUntilMin,
        }
    }
}

#[derive(Debug, Args)]
pub struct GroupArgs {
    /// Source side of the parallel corpus, one sentence per line.
    #[arg(long)]
    pub source: PathBuf,
    /// Target side, line-aligned with the source.
    #[arg(long)]
    pub target: PathBuf,
    /// Parses of the target side, line-aligned. Blank lines are missing.
    #[arg(long)]
    pub trees: PathBuf,
    #[arg(long)]
    pub num_sets: Option<usize>,
    /// Smallest acceptable set before the last set absorbs further groups.
    #[arg(long)]
    pub min_size: Option<usize>,
    #[arg(long, value_enum)]
    pub merge_rule: Option<MergeRuleArg>,
    /// Directory for the datasets and `manifest.json`.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Serialize)]
struct ManifestSet {
    name: String,
    size: usize,
    signatures: Vec<String>,
    source_file: String,
    target_file: String,
}

#[derive(Debug, Serialize)]
struct Manifest {
    header: Header,
    total_pairs: usize,
    unparsed: usize,
    sets: Vec<ManifestSet>,
}

pub fn group(args: GroupArgs, config: FileConfig) -> CliResult<()> {
    let mut spec = config.group;
    if let Some(n) = args.num_sets {
        spec.num_sets = n;
    }
    if let Some(m) = args.min_size {
        spec.min_size = m;
    }
    if let Some(r) = args.merge_rule {
        spec.merge_rule = r.into();
    }
    let source = Input::read(&args.source)?;
    let target = Input::read(&args.target)?;
    let trees = Input::read(&args.trees)?;
    let (src, tgt) = (source.lines(), target.lines());
    if src.len() != tgt.len() {
        return Err(CliError::validation(format!(
            "source and target: {} vs {} lines",
            src.len(),
            tgt.len()
        )));
    }
    let pairs: Vec<SentencePair> = src.iter().zip(&tgt).map(|(s, t)| SentencePair::new(*s, *t)).collect();
    let partition = partition_by_signature(&pairs, &trees.lines())?;
    let sets = build_finetune_sets(&partition, &spec)?;

    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::write(&args.out_dir, e))?;
    let mut staged = Vec::new();
    let mut listed = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        let name = format!("set{}", i + 1);
        let (mut s, mut t) = (String::new(), String::new());
        for pair in set.pairs(&pairs) {
            let _ = writeln!(s, "{}", pair.source);
            let _ = writeln!(t, "{}", pair.target);
        }
        let source_file = format!("{name}.src");
        let target_file = format!("{name}.tgt");
        staged.push(stage(&args.out_dir.join(&source_file), s.as_bytes())?);
        staged.push(stage(&args.out_dir.join(&target_file), t.as_bytes())?);
        listed.push(ManifestSet {
            name,
            size: set.len(),
            signatures: set.signatures.clone(),
            source_file,
            target_file,
        });
    }
    let (config_json, hash) = fingerprint(&spec);
    let manifest = Manifest {
        header: Header::new(
            "group",
            config_json,
            hash,
            vec![source.digest(), target.digest(), trees.digest()],
        ),
        total_pairs: partition.total_pairs,
        unparsed: partition.unparsed,
        sets: listed,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("serializes");
    text.push('\n');
    staged.push(stage(&args.out_dir.join("manifest.json"), text.as_bytes())?);
    staged.into_iter().try_for_each(commit)
}

#[derive(Debug, Args)]
pub struct SighistArgs {
    /// Tree files, one parse per line. The first one fixes the row order.
    #[arg(required = true)]
    pub trees: Vec<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub top_n: usize,
    /// Output file [default: stdout].
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn column_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn sighist(args: SighistArgs) -> CliResult<()> {
    let mut histograms = Vec::new();
    let mut digests = Vec::new();
    let mut unparsed = Vec::new();
    for path in &args.trees {
        let file = Input::read(path)?;
        let mut skipped = 0usize;
        let trees: Vec<_> = file
            .lines()
            .into_iter()
            .filter_map(|l| {
                let t = parse_bracketed(l).ok();
                skipped += t.is_none() as usize;
                t
            })
            .collect();
        let top = if histograms.is_empty() { args.top_n } else { usize::MAX };
        histograms.push(signature_histogram(&trees, top));
        digests.push(file.digest());
        unparsed.push(skipped);
    }

    let (config_json, hash) = fingerprint(&serde_json::json!({ "top_n": args.top_n }));
    let header = Header::new("sighist", config_json, hash, digests);
    let mut out = header.comment_lines();
    let _ = writeln!(
        out,
        "# unparsed: {}",
        unparsed.iter().map(usize::to_string).collect::<Vec<_>>().join("\t")
    );
    out.push_str("signature");
    for path in &args.trees {
        out.push('\t');
        out.push_str(&column_name(path));
    }
    out.push('\n');
    let baseline = &histograms[0];
    let columns: Vec<_> = histograms[1..]
        .iter()
        .map(|h| compare_histograms(baseline, h))
        .collect();
    for (r, (signature, count)) in baseline.iter().enumerate() {
        let _ = write!(out, "{signature}\t{count}");
        for col in &columns {
            let _ = write!(out, "\t{}", col[r].system);
        }
        out.push('\n');
    }
    emit(args.output.as_deref(), &out)
}
