//! `btdiv diversity`: per-group i-BLEU, i-chrF and tree-kernel difference.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::PathBuf;

use btdiv_core::corpuslab::{sample_groups, SampleSpec};
use btdiv_core::lexdiv::{i_score, BleuConfig, ChrfConfig, LexicalMetric};
use btdiv_core::synkernel::{kernel_difference, KernelConfig};
use btdiv_core::treebank::ParseTree;
use btdiv_core::{CandidateGroup, Execution};
use clap::Args;
use serde::Serialize;

use crate::config::{fingerprint, FileConfig, Metric, ReportFormat};
use crate::error::{CliError, CliResult};
use crate::files::{commit, parse_groups, parse_tree_lines, stage, Input};
use crate::Header;

#[derive(Debug, Args)]
pub struct DiversityArgs {
    /// Candidate groups, one JSON object per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Parses of the candidates, one per line in group order (k lines per
    /// group). A blank line is a missing parse.
    #[arg(long)]
    pub trees: Option<PathBuf>,
    /// Comma-separated metrics [default: bleu,chrf, plus kernel with --trees].
    #[arg(long, value_enum, value_delimiter = ',')]
    pub metrics: Option<Vec<Metric>>,
    /// Score a uniform sample of this many groups.
    #[arg(long)]
    pub sample_n: Option<usize>,
    #[arg(long)]
    pub sample_seed: Option<u64>,
    /// Tree-kernel fragment decay.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<ReportFormat>,
    #[arg(long)]
    pub output: PathBuf,
    /// Also write (dataset, metric, value) triples for charting.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
    /// Dataset name in plot data [default: input file stem].
    #[arg(long)]
    pub dataset: Option<String>,
}

#[derive(Debug, Serialize)]
struct Effective<'a> {
    metrics: &'a [Metric],
    sample_n: Option<usize>,
    sample_seed: u64,
    format: ReportFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    bleu: Option<&'a BleuConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chrf: Option<&'a ChrfConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kernel: Option<&'a KernelConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Cell {
    Value(f64),
    /// The metric rejected the group (too few candidates, empty sentence,
    /// degenerate trees).
    Failed,
    /// Some candidate of the group has no parse.
    Unparsed,
}

impl Cell {
    fn value(self) -> Option<f64> {
        match self {
            Cell::Value(v) => Some(v),
            _ => None,
        }
    }
}

struct Row {
    id: String,
    cells: Vec<Cell>,
}

/// Footer of a report. Every mean is recomputable from the emitted rows.
#[derive(Debug, Serialize)]
struct Aggregate {
    groups: usize,
    mean: BTreeMap<&'static str, Option<f64>>,
    scored: BTreeMap<&'static str, usize>,
    failed: BTreeMap<&'static str, usize>,
    unparsed: BTreeMap<&'static str, usize>,
}

pub fn run(args: DiversityArgs, config: FileConfig) -> CliResult<()> {
    let section = config.diversity;
    let metrics = args.metrics.or(section.metrics).unwrap_or_else(|| match args.trees {
        Some(_) => vec![Metric::Bleu, Metric::Chrf, Metric::Kernel],
        None => vec![Metric::Bleu, Metric::Chrf],
    });
    let metrics = dedup(metrics);
    if metrics.is_empty() {
        return Err(CliError::validation("no metrics selected"));
    }
    let wants = |m: Metric| metrics.contains(&m);
    if wants(Metric::Kernel) && args.trees.is_none() {
        return Err(CliError::validation("the kernel metric needs a tree file (--trees)"));
    }
    let mut kernel = config.kernel;
    if let Some(l) = args.lambda {
        kernel.lambda = l;
    }
    let bleu = LexicalMetric::Bleu(config.bleu.clone());
    let chrf = LexicalMetric::Chrf(config.chrf.clone());
    bleu.validate()?;
    chrf.validate()?;
    kernel.validate()?;

    let sample_n = args.sample_n.or(section.sample_n);
    let sample_seed = args.sample_seed.unwrap_or(section.sample_seed);
    let format = args.format.unwrap_or(section.format);
    let effective = Effective {
        metrics: &metrics,
        sample_n,
        sample_seed,
        format,
        bleu: wants(Metric::Bleu).then_some(&config.bleu),
        chrf: wants(Metric::Chrf).then_some(&config.chrf),
        kernel: wants(Metric::Kernel).then_some(&kernel),
    };

    let input = Input::read(&args.input)?;
    let groups = parse_groups(&input)?;
    let k = groups[0].k();
    let mut digests = vec![input.digest()];
    let trees = match &args.trees {
        Some(path) if wants(Metric::Kernel) => {
            let file = Input::read(path)?;
            let trees = parse_tree_lines(&file)?;
            if trees.len() != groups.len() * k {
                return Err(CliError::validation(format!(
                    "{}: expected {} tree lines ({} groups of {k}), found {}",
                    path.display(),
                    groups.len() * k,
                    groups.len(),
                    trees.len()
                )));
            }
            digests.push(file.digest());
            Some(trees)
        }
        _ => None,
    };

    let position: HashMap<String, usize> = groups
        .iter()
        .enumerate()
        .map(|(i, g)| (g.group_id.clone(), i))
        .collect();
    let mut selected = match sample_n {
        Some(n) => sample_groups(groups, &SampleSpec { n, seed: sample_seed })?,
        None => groups,
    };
    selected.sort_by(|a, b| a.group_id.cmp(&b.group_id));

    let score_group = |g: &CandidateGroup| -> Row {
        let cells = metrics
            .iter()
            .map(|m| match m {
                Metric::Bleu => lexical(g, &bleu),
                Metric::Chrf => lexical(g, &chrf),
                Metric::Kernel => {
                    let all = trees.as_ref().expect("kernel implies trees");
                    let start = position[&g.group_id] * k;
                    let mine: Option<Vec<ParseTree>> = all[start..start + k].iter().cloned().collect();
                    match mine {
                        None => Cell::Unparsed,
                        Some(t) => kernel_difference(&g.group_id, &t, &kernel)
                            .map_or(Cell::Failed, |r| Cell::Value(r.difference)),
                    }
                }
            })
            .collect();
        Row {
            id: g.group_id.clone(),
            cells,
        }
    };
    let rows = Execution::Parallel.map(&selected, score_group);
    let aggregate = aggregate(&metrics, &rows);

    let (config_json, config_hash) = fingerprint(&effective);
    let header = Header::new("diversity", config_json, config_hash, digests);
    let report = match format {
        ReportFormat::Tsv => render_tsv(&header, &metrics, &rows, &aggregate),
        ReportFormat::Jsonl => render_jsonl(&header, &metrics, &rows, &aggregate),
    };

    let mut staged = vec![stage(&args.output, report.as_bytes())?];
    if let Some(path) = &args.plot_data {
        let dataset = args.dataset.clone().unwrap_or_else(|| {
            args.input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        });
        staged.push(stage(path, render_plot(&dataset, &metrics, &rows).as_bytes())?);
    }
    staged.into_iter().try_for_each(commit)
}

fn dedup(metrics: Vec<Metric>) -> Vec<Metric> {
    let mut out = Vec::with_capacity(metrics.len());
    for m in metrics {
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

fn lexical(g: &CandidateGroup, metric: &LexicalMetric) -> Cell {
    i_score(g, metric).map_or(Cell::Failed, Cell::Value)
}

fn aggregate(metrics: &[Metric], rows: &[Row]) -> Aggregate {
    let mut agg = Aggregate {
        groups: rows.len(),
        mean: BTreeMap::new(),
        scored: BTreeMap::new(),
        failed: BTreeMap::new(),
        unparsed: BTreeMap::new(),
    };
    for (c, m) in metrics.iter().enumerate() {
        let (mut sum, mut n, mut failed, mut unparsed) = (0.0, 0usize, 0usize, 0usize);
        for row in rows {
            match row.cells[c] {
                Cell::Value(v) => {
                    sum += v;
                    n += 1;
                }
                Cell::Failed => failed += 1,
                Cell::Unparsed => unparsed += 1,
            }
        }
        let name = m.column();
        agg.mean.insert(name, (n > 0).then(|| sum / n as f64));
        agg.scored.insert(name, n);
        agg.failed.insert(name, failed);
        if *m == Metric::Kernel {
            agg.unparsed.insert(name, unparsed);
        }
    }
    agg
}

/// Shortest representation that parses back to the same value.
fn number(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_owned(), |v| v.to_string())
}

fn render_tsv(header: &Header, metrics: &[Metric], rows: &[Row], agg: &Aggregate) -> String {
    let mut out = header.comment_lines();
    out.push_str("id");
    for m in metrics {
        out.push('\t');
        out.push_str(m.column());
    }
    out.push('\n');
    for row in rows {
        out.push_str(&row.id);
        for cell in &row.cells {
            out.push('\t');
            out.push_str(&number(cell.value()));
        }
        out.push('\n');
    }
    let _ = writeln!(out, "# aggregate: {}", serde_json::to_string(agg).expect("serializes"));
    out
}

fn render_jsonl(header: &Header, metrics: &[Metric], rows: &[Row], agg: &Aggregate) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", serde_json::json!({ "header": header }));
    for row in rows {
        // `id` first, then the metric columns in report order.
        let mut line = serde_json::to_string(&serde_json::json!({ "id": row.id })).expect("serializes");
        line.pop();
        for (m, cell) in metrics.iter().zip(&row.cells) {
            let _ = write!(line, ",\"{}\":{}", m.column(), serde_json::json!(cell.value()));
        }
        line.push('}');
        out.push_str(&line);
        out.push('\n');
    }
    let _ = writeln!(out, "{}", serde_json::json!({ "aggregate": agg }));
    out
}

fn render_plot(dataset: &str, metrics: &[Metric], rows: &[Row]) -> String {
    let mut out = String::from("dataset\tmetric\tvalue\n");
    for row in rows {
        for (m, cell) in metrics.iter().zip(&row.cells) {
            if let Some(v) = cell.value() {
                let _ = writeln!(out, "{dataset}\t{}\t{v}", m.column());
            }
        }
    }
    out
}
