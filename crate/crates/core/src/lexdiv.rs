//! Sentence-level BLEU and chrF, and the inter-sentence diversity scores built
//! on them.
//!
//! Both scorers follow sacreBLEU 2.0.0 (`BLEU|nrefs:1|case:mixed|eff:no|
//! tok:13a|smooth:exp` and `chrF2` with character order 6, word order 0), down
//! to the order of floating point operations. The one deliberate difference
//! is that scores are clamped to `[0, 100]`; the reference toolkit can return
//! `100.00000000000004` for identical sentences.
//!
//! An i-score is `100 - mean(score(i, j))` over all ordered candidate pairs
//! `i != j` of a group, so a group of identical candidates scores 0 and higher
//! values mean more diverse output.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpuslab::{sample_groups, SampleSpec};
use crate::textnorm::{self, split_whitespace};
use crate::{Error, Execution, Result};

/// One source sentence and the candidates generated for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateGroup {
    #[serde(rename = "id")]
    pub group_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub candidates: Vec<String>,
}

impl CandidateGroup {
    pub fn new(group_id: impl Into<String>, candidates: Vec<String>) -> Self {
        Self {
            group_id: group_id.into(),
            source: None,
            candidates,
        }
    }

    pub fn k(&self) -> usize {
        self.candidates.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothing {
    /// NIST geometric smoothing: the n-th order with zero matches gets a
    /// precision of `1 / (2^k * total)`, `k` counting zero-match orders so far.
    #[default]
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    #[default]
    Mixed,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BleuConfig {
    pub max_order: usize,
    pub smoothing: Smoothing,
    pub effective_order: bool,
    pub case: Case,
}

impl Default for BleuConfig {
    fn default() -> Self {
        Self {
            max_order: 4,
            smoothing: Smoothing::Exp,
            effective_order: false,
            case: Case::Mixed,
        }
    }
}

impl BleuConfig {
    /// sacreBLEU-style signature string.
    pub fn signature(&self) -> String {
        let case = match self.case {
            Case::Mixed => "mixed",
            Case::Lower => "lc",
        };
        let eff = if self.effective_order { "yes" } else { "no" };
        format!("nrefs:1|case:{case}|eff:{eff}|tok:13a|smooth:exp|version:2.0.0")
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_order < 1 {
            return Err(Error::InvalidOrder(self.max_order));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChrfConfig {
    pub char_order: usize,
    pub word_order: usize,
    pub beta: f64,
    pub strip_whitespace: bool,
}

impl Default for ChrfConfig {
    fn default() -> Self {
        Self {
            char_order: 6,
            word_order: 0,
            beta: 2.0,
            strip_whitespace: true,
        }
    }
}

impl ChrfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.char_order < 1 {
            return Err(Error::InvalidOrder(self.char_order));
        }
        if self.beta.is_nan() || self.beta <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "chrF beta must be positive, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// `log` floored the way sacreBLEU floors it.
fn floored_log(x: f64) -> f64 {
    if x == 0.0 {
        -9_999_999_999.0
    } else {
        x.ln()
    }
}

fn word_ngram_counts<'t, 'a>(tokens: &'t [&'a str], max_order: usize) -> HashMap<&'t [&'a str], usize> {
    let mut counts = HashMap::new();
    for n in 1..=max_order {
        if tokens.len() < n {
            break;
        }
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

fn bleu_preprocess(sentence: &str, case: Case) -> String {
    let trimmed = sentence.trim_end_matches(textnorm::is_split_whitespace);
    let text = match case {
        Case::Mixed => trimmed.to_owned(),
        Case::Lower => trimmed.to_lowercase(),
    };
    textnorm::tokenize_13a_str(&text)
}

/// Sufficient statistics for one hypothesis/reference pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BleuStats {
    pub hyp_len: usize,
    pub ref_len: usize,
    pub correct: Vec<usize>,
    pub total: Vec<usize>,
}

pub fn bleu_stats(hypothesis: &str, reference: &str, config: &BleuConfig) -> Result<BleuStats> {
    config.validate()?;
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    let hyp = bleu_preprocess(hypothesis, config.case);
    let reference = bleu_preprocess(reference, config.case);
    let hyp_toks: Vec<&str> = hyp.split(' ').filter(|t| !t.is_empty()).collect();
    let ref_toks: Vec<&str> = reference.split(' ').filter(|t| !t.is_empty()).collect();

    let ref_counts = word_ngram_counts(&ref_toks, config.max_order);
    let hyp_counts = word_ngram_counts(&hyp_toks, config.max_order);

    let mut correct = vec![0; config.max_order];
    let mut total = vec![0; config.max_order];
    for (ngram, &count) in &hyp_counts {
        let n = ngram.len() - 1;
        total[n] += count;
        if let Some(&rc) = ref_counts.get(ngram) {
            correct[n] += count.min(rc);
        }
    }
    Ok(BleuStats {
        hyp_len: hyp_toks.len(),
        ref_len: ref_toks.len(),
        correct,
        total,
    })
}

/// BLEU from sufficient statistics, unclamped.
pub fn bleu_from_stats(stats: &BleuStats, config: &BleuConfig) -> f64 {
    let (sys_len, ref_len) = (stats.hyp_len, stats.ref_len);
    let bp = if sys_len < ref_len {
        if sys_len > 0 {
            (1.0 - ref_len as f64 / sys_len as f64).exp()
        } else {
            0.0
        }
    } else {
        1.0
    };

    if stats.correct.iter().all(|&c| c == 0) {
        return 0.0;
    }

    let max_order = config.max_order;
    let mut precisions = vec![0.0f64; max_order];
    let mut smooth = 1.0f64;
    let mut eff_order = max_order;
    for n in 1..=max_order {
        let (correct, total) = (stats.correct[n - 1], stats.total[n - 1]);
        if total == 0 {
            break;
        }
        if config.effective_order {
            eff_order = n;
        }
        precisions[n - 1] = if correct == 0 {
            match config.smoothing {
                Smoothing::Exp => {
                    smooth *= 2.0;
                    100.0 / (smooth * total as f64)
                }
            }
        } else {
            100.0 * correct as f64 / total as f64
        };
    }

    let log_sum: f64 = precisions[..eff_order].iter().map(|&p| floored_log(p)).sum();
    bp * (log_sum / eff_order as f64).exp()
}

/// Sentence BLEU of `hypothesis` against a single `reference`, in `[0, 100]`.
///
/// An empty reference is an error (the reference toolkit rejects it); an
/// empty hypothesis scores 0.
pub fn sentence_bleu(hypothesis: &str, reference: &str, config: &BleuConfig) -> Result<f64> {
    let stats = bleu_stats(hypothesis, reference, config)?;
    Ok(bleu_from_stats(&stats, config).clamp(0.0, 100.0))
}

fn remove_punctuation(sentence: &str) -> Vec<String> {
    const PUNCTS: &str = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";
    let mut out = Vec::new();
    for w in split_whitespace(sentence) {
        let chars: Vec<char> = w.chars().collect();
        if chars.len() == 1 {
            out.push(w.to_owned());
        } else if PUNCTS.contains(chars[chars.len() - 1]) {
            out.push(chars[..chars.len() - 1].iter().collect());
            out.push(chars[chars.len() - 1].to_string());
        } else if PUNCTS.contains(chars[0]) {
            out.push(chars[0].to_string());
            out.push(chars[1..].iter().collect());
        } else {
            out.push(w.to_owned());
        }
    }
    out
}

fn word_ngrams_joined(words: &[String], n: usize) -> HashMap<String, usize> {
    let mut counts = HashMap::new();
    if words.len() >= n {
        for w in words.windows(n) {
            *counts.entry(w.join(" ")).or_insert(0) += 1;
        }
    }
    counts
}

fn chrf_ngrams(sentence: &str, config: &ChrfConfig) -> Vec<HashMap<String, usize>> {
    let chars: Vec<char> = if config.strip_whitespace {
        sentence
            .chars()
            .filter(|&c| !textnorm::is_split_whitespace(c))
            .collect()
    } else {
        sentence.chars().collect()
    };
    let mut out: Vec<_> = (1..=config.char_order)
        .map(|n| textnorm::char_ngrams_of(&chars, n).counts)
        .collect();
    if config.word_order > 0 {
        let words = remove_punctuation(sentence);
        out.extend((1..=config.word_order).map(|n| word_ngrams_joined(&words, n)));
    }
    out
}

/// Per-order `[hyp, ref, match]` counts.
fn chrf_stats(hyp: &[HashMap<String, usize>], reference: &[HashMap<String, usize>]) -> Vec<[usize; 3]> {
    hyp.iter()
        .zip(reference)
        .map(|(h, r)| {
            let mut matched = 0;
            let mut hyp_count = 0;
            for (ng, &c) in h {
                hyp_count += c;
                if let Some(&rc) = r.get(ng) {
                    matched += c.min(rc);
                }
            }
            let hyp_count = if r.is_empty() { 0 } else { hyp_count };
            [hyp_count, r.values().sum(), matched]
        })
        .collect()
}

fn chrf_from_stats(stats: &[[usize; 3]], beta: f64) -> f64 {
    let factor = beta * beta;
    let (mut avg_prec, mut avg_rec) = (0.0f64, 0.0f64);
    let mut effective_order = 0usize;
    for &[n_hyp, n_ref, n_match] in stats {
        if n_hyp > 0 && n_ref > 0 {
            avg_prec += n_match as f64 / n_hyp as f64;
            avg_rec += n_match as f64 / n_ref as f64;
            effective_order += 1;
        }
    }
    if effective_order == 0 {
        return 0.0;
    }
    avg_prec /= effective_order as f64;
    avg_rec /= effective_order as f64;
    if avg_prec + avg_rec == 0.0 {
        return 0.0;
    }
    let mut score = (1.0 + factor) * avg_prec * avg_rec;
    score /= factor * avg_prec + avg_rec;
    100.0 * score
}

/// Sentence chrF of `hypothesis` against a single `reference`, in `[0, 100]`.
pub fn sentence_chrf(hypothesis: &str, reference: &str, config: &ChrfConfig) -> Result<f64> {
    config.validate()?;
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    let stats = chrf_stats(&chrf_ngrams(hypothesis, config), &chrf_ngrams(reference, config));
    Ok(chrf_from_stats(&stats, config.beta).clamp(0.0, 100.0))
}

/// A pairwise sentence metric together with its configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "lowercase")]
pub enum LexicalMetric {
    Bleu(BleuConfig),
    Chrf(ChrfConfig),
}

impl LexicalMetric {
    pub fn bleu() -> Self {
        LexicalMetric::Bleu(BleuConfig::default())
    }

    pub fn chrf() -> Self {
        LexicalMetric::Chrf(ChrfConfig::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            LexicalMetric::Bleu(_) => "i_bleu",
            LexicalMetric::Chrf(_) => "i_chrf",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LexicalMetric::Bleu(c) => c.validate(),
            LexicalMetric::Chrf(c) => c.validate(),
        }
    }

    pub fn score(&self, hypothesis: &str, reference: &str) -> Result<f64> {
        match self {
            LexicalMetric::Bleu(c) => sentence_bleu(hypothesis, reference, c),
            LexicalMetric::Chrf(c) => sentence_chrf(hypothesis, reference, c),
        }
    }
}

/// Scores of every ordered candidate pair `(hypothesis, reference)` of a group.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseScoreMatrix {
    pub group_id: String,
    pub scores: BTreeMap<(usize, usize), f64>,
}

impl PairwiseScoreMatrix {
    pub fn mean(&self) -> f64 {
        self.scores.values().sum::<f64>() / self.scores.len() as f64
    }

    /// `100 - mean`, clamped to `[0, 100]`.
    pub fn i_score(&self) -> f64 {
        (100.0 - self.mean()).clamp(0.0, 100.0)
    }
}

pub fn pairwise_scores(group: &CandidateGroup, metric: &LexicalMetric) -> Result<PairwiseScoreMatrix> {
    let k = group.k();
    if k < 2 {
        return Err(Error::TooFewCandidates {
            group_id: group.group_id.clone(),
            k,
        });
    }
    let mut scores = BTreeMap::new();
    for i in 0..k {
        for j in 0..k {
            if i != j {
                let s = metric.score(&group.candidates[i], &group.candidates[j])?;
                scores.insert((i, j), s);
            }
        }
    }
    Ok(PairwiseScoreMatrix {
        group_id: group.group_id.clone(),
        scores,
    })
}

/// `100 - mean` of the pairwise scores of a group.
pub fn i_score(group: &CandidateGroup, metric: &LexicalMetric) -> Result<f64> {
    Ok(pairwise_scores(group, metric)?.i_score())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupScore {
    pub group_id: String,
    pub score: Result<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetScore {
    /// Mean over the groups that scored successfully.
    pub mean: f64,
    /// One entry per scored group, sorted by group id.
    pub per_group: Vec<GroupScore>,
    pub failures: usize,
}

/// Mean i-score over a (optionally sampled) collection of groups.
///
/// Groups that fail to score (fewer than two candidates, empty reference
/// sentence) are reported in `per_group` and counted in `failures`; the mean
/// is taken over the rest, accumulated in group-id order.
pub fn dataset_i_score<I>(
    groups: I,
    metric: &LexicalMetric,
    sample: Option<&SampleSpec>,
    exec: Execution,
) -> Result<DatasetScore>
where
    I: IntoIterator<Item = CandidateGroup>,
{
    let mut groups: Vec<CandidateGroup> = match sample {
        Some(spec) => sample_groups(groups, spec)?,
        None => groups.into_iter().collect(),
    };
    if groups.is_empty() {
        return Err(Error::NoGroups);
    }
    groups.sort_by(|a, b| a.group_id.cmp(&b.group_id));
    let scores = exec.map(&groups, |g| i_score(g, metric));
    aggregate(&groups, scores)
}

fn aggregate(groups: &[CandidateGroup], scores: Vec<Result<f64>>) -> Result<DatasetScore> {
    let mut sum = 0.0;
    let mut ok = 0usize;
    let mut per_group = Vec::with_capacity(groups.len());
    for (g, s) in groups.iter().zip(scores) {
        if let Ok(v) = s {
            sum += v;
            ok += 1;
        }
        per_group.push(GroupScore {
            group_id: g.group_id.clone(),
            score: s,
        });
    }
    if ok == 0 {
        return Err(Error::NoGroups);
    }
    Ok(DatasetScore {
        mean: sum / ok as f64,
        failures: groups.len() - ok,
        per_group,
    })
}
