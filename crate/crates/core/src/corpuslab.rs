//! Corpus summary statistics, neologism detection and reproducible group
//! sampling.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::lexdiv::CandidateGroup;
use crate::textnorm::wc_split;
use crate::{Error, Result};

/// Summary statistics over a corpus, with `wc` word semantics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub line_count: usize,
    pub word_count: usize,
    /// Words per line.
    pub mean_sentence_length: f64,
    /// Unicode scalar values per word occurrence.
    pub mean_word_length: f64,
    pub vocab_size: usize,
}

/// Mergeable partial state for [`CorpusStats`].
///
/// Accumulators built over disjoint shards can be merged in any order and
/// yield the same statistics as one pass over the whole stream.
#[derive(Debug, Clone, Default)]
pub struct StatsAccumulator {
    lines: usize,
    words: usize,
    chars: usize,
    vocab: HashSet<String>,
}

impl StatsAccumulator {
    pub fn push_line(&mut self, line: &str) {
        self.lines += 1;
        for w in wc_split(line) {
            self.words += 1;
            self.chars += w.chars().count();
            if !self.vocab.contains(w) {
                self.vocab.insert(w.to_owned());
            }
        }
    }

    pub fn merge(mut self, other: StatsAccumulator) -> Self {
        self.lines += other.lines;
        self.words += other.words;
        self.chars += other.chars;
        if self.vocab.len() < other.vocab.len() {
            let mut v = other.vocab;
            v.extend(self.vocab);
            self.vocab = v;
        } else {
            self.vocab.extend(other.vocab);
        }
        self
    }

    pub fn vocab(&self) -> &HashSet<String> {
        &self.vocab
    }

    pub fn finish(&self) -> CorpusStats {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        CorpusStats {
            line_count: self.lines,
            word_count: self.words,
            mean_sentence_length: ratio(self.words, self.lines),
            mean_word_length: ratio(self.chars, self.words),
            vocab_size: self.vocab.len(),
        }
    }
}

pub fn corpus_stats<I, S>(lines: I) -> CorpusStats
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut acc = StatsAccumulator::default();
    for line in lines {
        acc.push_line(line.as_ref());
    }
    acc.finish()
}

/// Distinct `wc` words of a corpus.
pub fn vocabulary<I, S>(lines: I) -> HashSet<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut vocab = HashSet::new();
    for line in lines {
        for w in wc_split(line.as_ref()) {
            if !vocab.contains(w) {
                vocab.insert(w.to_owned());
            }
        }
    }
    vocab
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeologismReport {
    /// Distinct generated words missing from the reference vocabulary.
    pub count: usize,
    /// The first `cap` of them, in order of first appearance.
    pub sample: Vec<String>,
}

pub fn neologisms<I, S>(generated: I, reference_vocab: &HashSet<String>, cap: usize) -> NeologismReport
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut seen = HashSet::new();
    let mut sample = Vec::new();
    for line in generated {
        for w in wc_split(line.as_ref()) {
            if !reference_vocab.contains(w) && seen.insert(w.to_owned()) && sample.len() < cap {
                sample.push(w.to_owned());
            }
        }
    }
    NeologismReport {
        count: seen.len(),
        sample,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub n: usize,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self { n: 30_000, seed: 0 }
    }
}

/// SplitMix64 finalizer.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Sampling priority of a group id under `seed`.
pub fn sample_priority(seed: u64, group_id: &str) -> u64 {
    mix64(mix64(seed) ^ fnv1a64(group_id.as_bytes()))
}

struct Ranked {
    priority: u64,
    group: CandidateGroup,
}

impl Ranked {
    fn key(&self) -> (u64, &str) {
        (self.priority, &self.group.group_id)
    }
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// Uniform sample of `min(n, len)` groups, sorted by group id.
///
/// Each group gets a pseudo-random priority from `(seed, group_id)` and the
/// reservoir keeps the `n` smallest priorities (bottom-k sampling). The
/// result depends only on the seed and the set of ids, so datasets that share
/// a group-id universe are sampled in alignment: the same seed picks the same
/// ids from each of them.
pub fn sample_groups<I>(groups: I, spec: &SampleSpec) -> Result<Vec<CandidateGroup>>
where
    I: IntoIterator<Item = CandidateGroup>,
{
    if spec.n < 1 {
        return Err(Error::InvalidConfig("sample size must be at least 1".into()));
    }
    let seed_key = mix64(spec.seed);
    let mut heap: BinaryHeap<Ranked> = BinaryHeap::with_capacity(spec.n.min(1 << 20) + 1);
    for group in groups {
        let priority = mix64(seed_key ^ fnv1a64(group.group_id.as_bytes()));
        if heap.len() < spec.n {
            heap.push(Ranked { priority, group });
        } else if let Some(top) = heap.peek() {
            if (priority, group.group_id.as_str()) < top.key() {
                heap.pop();
                heap.push(Ranked { priority, group });
            }
        }
    }
    let mut out: Vec<CandidateGroup> = heap.into_iter().map(|r| r.group).collect();
    out.sort_by(|a, b| a.group_id.cmp(&b.group_id));
    Ok(out)
}
