//! Syntactic grouping of a parallel corpus by first-split signature and
//! construction of fine-tuning sets from the largest groups.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::treebank::{first_split_signature, parse_bracketed, ParseTree};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub source: String,
    pub target: String,
}

impl SentencePair {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignaturePartition {
    /// Canonical signature string to pair indices, ascending.
    pub buckets: BTreeMap<String, Vec<usize>>,
    /// Pairs that landed in a bucket.
    pub total_pairs: usize,
    /// Pairs whose parse is missing, malformed or a bare leaf.
    pub unparsed: usize,
}

impl SignaturePartition {
    /// Buckets ordered by size descending, ties by signature ascending.
    pub fn ranked(&self) -> Vec<(&str, &[usize])> {
        let mut v: Vec<(&str, &[usize])> = self.buckets.iter().map(|(s, i)| (s.as_str(), i.as_slice())).collect();
        v.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(b.0)));
        v
    }
}

fn signature_of_line(line: &str) -> Option<String> {
    if line.trim().is_empty() {
        return None;
    }
    let tree = parse_bracketed(line).ok()?;
    first_split_signature(&tree).ok().map(|s| s.to_string())
}

/// Buckets sentence pairs by the first split of the parse of their English
/// side. `tree_lines[i]` is the parse of `pairs[i]`; a blank line means no
/// parse.
pub fn partition_by_signature<S: AsRef<str>>(pairs: &[SentencePair], tree_lines: &[S]) -> Result<SignaturePartition> {
    if pairs.len() != tree_lines.len() {
        return Err(Error::LengthMismatch {
            what: "sentence pairs and parses",
            left: pairs.len(),
            right: tree_lines.len(),
        });
    }
    let mut partition = SignaturePartition::default();
    for (i, line) in tree_lines.iter().enumerate() {
        match signature_of_line(line.as_ref()) {
            Some(sig) => {
                partition.buckets.entry(sig).or_default().push(i);
                partition.total_pairs += 1;
            }
            None => partition.unparsed += 1,
        }
    }
    Ok(partition)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeRule {
    None,
    /// Grow the smallest selected set with the next-largest buckets until it
    /// reaches `min_size`.
    #[default]
    MergeNextUntilMin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FinetuneSetSpec {
    pub num_sets: usize,
    pub min_size: usize,
    pub merge_rule: MergeRule,
}

impl Default for FinetuneSetSpec {
    fn default() -> Self {
        Self {
            num_sets: 3,
            min_size: 10_000,
            merge_rule: MergeRule::MergeNextUntilMin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinetuneSet {
    /// Constituent signatures, largest bucket first.
    pub signatures: Vec<String>,
    /// Pair indices in corpus order.
    pub indices: Vec<usize>,
}

impl FinetuneSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn pairs<'a>(&'a self, corpus: &'a [SentencePair]) -> impl Iterator<Item = &'a SentencePair> + 'a {
        self.indices.iter().map(move |&i| &corpus[i])
    }
}

/// Turns the `num_sets` largest buckets into fine-tuning sets.
///
/// Under [`MergeRule::MergeNextUntilMin`] the last selected set absorbs the
/// following buckets in rank order while it is below `min_size`. If the
/// buckets run out first the set is kept at whatever size it reached.
pub fn build_finetune_sets(partition: &SignaturePartition, spec: &FinetuneSetSpec) -> Result<Vec<FinetuneSet>> {
    if spec.num_sets < 1 {
        return Err(Error::InvalidConfig("num_sets must be at least 1".into()));
    }
    let ranked: Vec<(&str, &[usize])> = partition.ranked().into_iter().filter(|(_, v)| !v.is_empty()).collect();
    if ranked.len() < spec.num_sets {
        return Err(Error::NotEnoughBuckets {
            needed: spec.num_sets,
            available: ranked.len(),
        });
    }
    let mut sets: Vec<FinetuneSet> = ranked[..spec.num_sets]
        .iter()
        .map(|(sig, idx)| FinetuneSet {
            signatures: vec![sig.to_string()],
            indices: idx.to_vec(),
        })
        .collect();

    if spec.merge_rule == MergeRule::MergeNextUntilMin {
        let last = sets.last_mut().expect("num_sets >= 1");
        for (sig, idx) in &ranked[spec.num_sets..] {
            if last.len() >= spec.min_size {
                break;
            }
            last.signatures.push(sig.to_string());
            last.indices.extend_from_slice(idx);
        }
        last.indices.sort_unstable();
    }
    Ok(sets)
}

/// The `top_n` most frequent first-split signatures, count descending and
/// ties by signature. Bare-leaf trees have no signature and are skipped.
pub fn signature_histogram<'a, I>(trees: I, top_n: usize) -> Vec<(String, usize)>
where
    I: IntoIterator<Item = &'a ParseTree>,
{
    let mut counts: HashMap<String, usize> = HashMap::new();
    for t in trees {
        if let Ok(sig) = first_split_signature(t) {
            *counts.entry(sig.to_string()).or_insert(0) += 1;
        }
    }
    rank_counts(counts, top_n)
}

fn rank_counts(counts: HashMap<String, usize>, top_n: usize) -> Vec<(String, usize)> {
    let mut v: Vec<(String, usize)> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(top_n);
    v
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub signature: String,
    pub baseline: usize,
    pub system: usize,
}

/// Side-by-side counts for the baseline's top signatures, in the
/// baseline's order. Signatures missing from one side count as 0.
pub fn compare_histograms(baseline: &[(String, usize)], system: &[(String, usize)]) -> Vec<HistogramRow> {
    let other: HashMap<&str, usize> = system.iter().map(|(s, c)| (s.as_str(), *c)).collect();
    baseline
        .iter()
        .map(|(s, c)| HistogramRow {
            signature: s.clone(),
            baseline: *c,
            system: other.get(s.as_str()).copied().unwrap_or(0),
        })
        .collect()
}
