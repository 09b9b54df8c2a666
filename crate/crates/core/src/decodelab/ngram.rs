use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{SequenceModel, TokenId, Vocabulary, BOS, EOS};
use crate::textnorm::split_whitespace;
use crate::{Error, Result};

pub const MODEL_FORMAT: &str = "btdiv-ngram-counts";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NGramConfig {
    pub order: usize,
    /// Add-α pseudo-count of the unigram base distribution.
    pub alpha: f64,
}

impl Default for NGramConfig {
    fn default() -> Self {
        Self { order: 3, alpha: 0.1 }
    }
}

impl NGramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::InvalidOrder(self.order));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ContextEntry {
    total: u64,
    /// `(token, count)` sorted by token.
    followers: Vec<(TokenId, u64)>,
}

/// Interpolated Witten-Bell n-gram model over an add-α unigram base.
///
/// `P(w | h) = (c(h w) + T(h) · P(w | h')) / (c(h) + T(h))` where `h'` drops
/// the oldest context token and `T(h)` is the number of distinct followers
/// of `h`. Unseen contexts fall through to the shorter one, so every word
/// and `</s>` keeps non-zero probability. `<s>` is never predicted.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    config: NGramConfig,
    vocab: Vocabulary,
    /// `contexts[k - 1]` holds contexts of length `k`, for `k < order`.
    contexts: Vec<HashMap<Vec<TokenId>, ContextEntry>>,
    base: Vec<f64>,
    /// Highest-order counts; everything else is derived from them.
    top: HashMap<Vec<TokenId>, u64>,
}

impl NGramModel {
    pub fn config(&self) -> &NGramConfig {
        &self.config
    }

    pub fn order(&self) -> usize {
        self.config.order
    }

    fn from_counts(config: NGramConfig, vocab: Vocabulary, top: HashMap<Vec<TokenId>, u64>) -> Result<Self> {
        config.validate()?;
        let n = config.order;
        let v = vocab.len();
        let mut unigram = vec![0u64; v];
        let mut raw: Vec<HashMap<Vec<TokenId>, HashMap<TokenId, u64>>> = vec![HashMap::new(); n - 1];
        for (gram, &c) in &top {
            let w = gram[n - 1];
            unigram[w as usize] += c;
            for k in 1..n {
                let ctx = gram[n - 1 - k..n - 1].to_vec();
                *raw[k - 1].entry(ctx).or_default().entry(w).or_insert(0) += c;
            }
        }
        let contexts = raw
            .into_iter()
            .map(|level| {
                level
                    .into_iter()
                    .map(|(ctx, f)| {
                        let mut followers: Vec<(TokenId, u64)> = f.into_iter().collect();
                        followers.sort_unstable();
                        let total = followers.iter().map(|x| x.1).sum();
                        (ctx, ContextEntry { total, followers })
                    })
                    .collect()
            })
            .collect();

        let tokens: u64 = unigram.iter().sum();
        if tokens == 0 {
            return Err(Error::EmptyCorpus);
        }
        let alpha = config.alpha;
        let denom = tokens as f64 + alpha * (v - 1) as f64;
        let mut base: Vec<f64> = unigram.iter().map(|&c| (c as f64 + alpha) / denom).collect();
        base[BOS as usize] = 0.0;
        if base.iter().skip(1).any(|&p| p <= 0.0) {
            return Err(Error::Model(
                "alpha = 0 leaves a vocabulary entry without probability".into(),
            ));
        }
        Ok(Self {
            config,
            vocab,
            contexts,
            base,
            top,
        })
    }

    /// Conditional distribution given the full history (without padding).
    fn distribution(&self, history: &[TokenId]) -> Vec<f64> {
        let n = self.config.order;
        let mut padded: Vec<TokenId> = Vec::with_capacity(n - 1);
        let keep = history.len().min(n - 1);
        padded.resize(n - 1 - keep, BOS);
        padded.extend_from_slice(&history[history.len() - keep..]);

        let mut p = self.base.clone();
        for k in 1..n {
            let Some(entry) = self.contexts[k - 1].get(&padded[n - 1 - k..]) else {
                // a longer context cannot be seen if its suffix was not
                break;
            };
            let distinct = entry.followers.len() as f64;
            let denom = entry.total as f64 + distinct;
            let scale = distinct / denom;
            p.iter_mut().for_each(|x| *x *= scale);
            for &(w, c) in &entry.followers {
                p[w as usize] += c as f64 / denom;
            }
        }
        p
    }
}

impl SequenceModel for NGramModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_distribution(&self, prefix: &[TokenId]) -> Vec<f64> {
        self.distribution(prefix)
    }
}

fn sentences<I, S>(lines: I) -> Vec<Vec<String>>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    lines
        .into_iter()
        .map(|l| split_whitespace(l.as_ref()).map(str::to_owned).collect::<Vec<_>>())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Trains on whitespace-tokenized lines, one sentence per line. Blank lines
/// are skipped. The vocabulary is every training word, sorted.
pub fn train_ngram_model<I, S>(lines: I, config: NGramConfig) -> Result<NGramModel>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    config.validate()?;
    let sents = sentences(lines);
    if sents.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let words: BTreeSet<&str> = sents.iter().flatten().map(String::as_str).collect();
    let vocab = Vocabulary::new(words.iter().copied())?;

    let n = config.order;
    let mut top: HashMap<Vec<TokenId>, u64> = HashMap::new();
    for s in &sents {
        let mut ids: Vec<TokenId> = vec![BOS; n - 1];
        ids.extend(s.iter().map(|w| vocab.id(w).expect("word in vocabulary")));
        ids.push(EOS);
        for gram in ids.windows(n) {
            *top.entry(gram.to_vec()).or_insert(0) += 1;
        }
    }
    NGramModel::from_counts(config, vocab, top)
}

/// Per-token perplexity, `</s>` included, over the non-blank lines.
pub fn perplexity<M, I, S>(model: &M, lines: I) -> Result<f64>
where
    M: SequenceModel + ?Sized,
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let vocab = model.vocab();
    let mut logsum = 0.0;
    let mut count = 0usize;
    for s in sentences(lines) {
        let mut ids = s
            .iter()
            .map(|w| vocab.id(w).ok_or_else(|| Error::UnknownToken(w.clone())))
            .collect::<Result<Vec<_>>>()?;
        ids.push(EOS);
        for i in 0..ids.len() {
            logsum += model.next_distribution(&ids[..i])[ids[i] as usize].ln();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok((-logsum / count as f64).exp())
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    order: usize,
    alpha: f64,
    /// Words in id order starting at id 2.
    vocab: Vec<String>,
    /// Highest-order n-gram ids followed by the count.
    ngrams: Vec<Vec<u64>>,
}

/// Writes the model as a JSON count table. Output is byte-stable for a
/// given model.
pub fn save_model<W: Write>(model: &NGramModel, writer: W) -> Result<()> {
    let mut ngrams: Vec<Vec<u64>> = model
        .top
        .iter()
        .map(|(g, &c)| g.iter().map(|&t| t as u64).chain([c]).collect())
        .collect();
    ngrams.sort_unstable();
    let file = ModelFile {
        format: MODEL_FORMAT.to_owned(),
        version: MODEL_VERSION,
        order: model.config.order,
        alpha: model.config.alpha,
        vocab: model.vocab.words().to_vec(),
        ngrams,
    };
    serde_json::to_writer(writer, &file).map_err(|e| Error::Model(e.to_string()))
}

pub fn load_model<R: Read>(reader: R) -> Result<NGramModel> {
    let file: ModelFile =
        serde_json::from_reader(reader).map_err(|e| Error::Model(format!("unreadable model file: {e}")))?;
    if file.format != MODEL_FORMAT {
        return Err(Error::Model(format!("unexpected model format {:?}", file.format)));
    }
    if file.version != MODEL_VERSION {
        return Err(Error::Model(format!("unsupported model version {}", file.version)));
    }
    let config = NGramConfig {
        order: file.order,
        alpha: file.alpha,
    };
    config.validate()?;
    let vocab = Vocabulary::new(file.vocab)?;
    let n = config.order;
    let mut top = HashMap::with_capacity(file.ngrams.len());
    for row in file.ngrams {
        if row.len() != n + 1 {
            return Err(Error::Model(format!(
                "n-gram row of length {} in an order-{n} model",
                row.len()
            )));
        }
        let count = row[n];
        let gram: Vec<TokenId> = row[..n]
            .iter()
            .map(|&t| {
                (t < vocab.len() as u64)
                    .then_some(t as TokenId)
                    .ok_or_else(|| Error::Model(format!("token id {t} out of range")))
            })
            .collect::<Result<_>>()?;
        if count == 0 || gram[n - 1] == BOS {
            return Err(Error::Model("zero count or <s> as a predicted token".into()));
        }
        if top.insert(gram, count).is_some() {
            return Err(Error::Model("duplicate n-gram row".into()));
        }
    }
    NGramModel::from_counts(config, vocab, top)
}
