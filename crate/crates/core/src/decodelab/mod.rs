//! Sequence models and decoders for generating candidate groups.
//!
//! A [`SequenceModel`] maps a token prefix to a next-token distribution. The
//! decoders ([`beam_search`], [`ancestral_sample`], [`nucleus_sample`] and
//! [`greedy_decode`]) consume that contract and hold all randomness
//! themselves, seeded through [`derive_seed`] so that every (group, draw)
//! pair gets its own reproducible ChaCha8 stream.

mod beam;
mod ngram;

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpuslab::mix64;
use crate::textnorm::split_whitespace;
use crate::{CandidateGroup, Error, Execution, Result};

pub use beam::beam_search;
pub use ngram::{
    load_model, perplexity, save_model, train_ngram_model, NGramConfig, NGramModel, MODEL_FORMAT, MODEL_VERSION,
};

pub type TokenId = u32;

pub const BOS: TokenId = 0;
pub const EOS: TokenId = 1;
pub const BOS_TOKEN: &str = "<s>";
pub const EOS_TOKEN: &str = "</s>";

/// Token inventory: `<s>` is id 0, `</s>` id 1, then words in the order given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl Vocabulary {
    /// Builds a vocabulary from distinct words. Duplicates and the reserved
    /// markers are rejected.
    pub fn new<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut tokens = vec![BOS_TOKEN.to_owned(), EOS_TOKEN.to_owned()];
        let mut index: HashMap<String, TokenId> = tokens.iter().cloned().zip(0..).collect();
        for w in words {
            let w = w.into();
            if index.contains_key(&w) {
                return Err(Error::Model(format!("duplicate or reserved vocabulary entry {w:?}")));
            }
            index.insert(w.clone(), tokens.len() as TokenId);
            tokens.push(w);
        }
        Ok(Self { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.tokens[id as usize]
    }

    /// Words only, without the two markers.
    pub fn words(&self) -> &[String] {
        &self.tokens[2..]
    }

    pub fn encode(&self, text: &str) -> Result<Vec<TokenId>> {
        split_whitespace(text)
            .map(|w| self.id(w).ok_or_else(|| Error::UnknownToken(w.to_owned())))
            .collect()
    }

    /// Space-joined words; `</s>` ends the text and `<s>` is dropped.
    pub fn decode(&self, ids: &[TokenId]) -> String {
        ids.iter()
            .take_while(|&&t| t != EOS)
            .filter(|&&t| t != BOS)
            .map(|&t| self.token(t))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A next-token distribution over a fixed vocabulary.
///
/// `prefix` holds the tokens generated so far, without `<s>`. The returned
/// vector has one non-negative entry per vocabulary id and sums to 1. It
/// must depend only on the prefix.
pub trait SequenceModel: Sync {
    fn vocab(&self) -> &Vocabulary;
    fn next_distribution(&self, prefix: &[TokenId]) -> Vec<f64>;
}

impl<M: SequenceModel + ?Sized> SequenceModel for &M {
    fn vocab(&self) -> &Vocabulary {
        (**self).vocab()
    }
    fn next_distribution(&self, prefix: &[TokenId]) -> Vec<f64> {
        (**self).next_distribution(prefix)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Beam,
    Ancestral,
    Nucleus,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Beam => "beam",
            Strategy::Ancestral => "ancestral",
            Strategy::Nucleus => "nucleus",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beam" => Ok(Strategy::Beam),
            "ancestral" | "sampling" => Ok(Strategy::Ancestral),
            "nucleus" => Ok(Strategy::Nucleus),
            _ => Err(Error::InvalidConfig(format!("unknown strategy {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecoderConfig {
    pub strategy: Strategy,
    pub beam_size: usize,
    /// Nucleus mass threshold in `(0, 1]`.
    pub p: f64,
    /// Maximum generated tokens, `</s>` included.
    pub max_len: usize,
    /// Candidates per group.
    pub n_best: usize,
    pub seed: u64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Nucleus,
            beam_size: 5,
            p: 0.95,
            max_len: 50,
            n_best: 3,
            seed: 0,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.max_len < 1 {
            return bad("max_len must be at least 1".into());
        }
        if self.n_best < 1 {
            return bad("n_best must be at least 1".into());
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return bad(format!("p must be in (0, 1], got {}", self.p));
        }
        if self.strategy == Strategy::Beam && self.beam_size < self.n_best {
            return bad(format!(
                "beam_size ({}) must be at least n_best ({})",
                self.beam_size, self.n_best
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    /// Generated tokens after the prompt, ending in `</s>` when complete.
    pub tokens: Vec<TokenId>,
    /// Sum of the log-probabilities of `tokens`.
    pub logprob: f64,
    /// False when `max_len` was reached before `</s>`.
    pub complete: bool,
}

/// Keeps the smallest prefix of the probability-sorted tokens whose mass
/// reaches `p` and renormalizes it. Equal probabilities keep index order.
/// `p >= 1` returns the distribution unchanged.
pub fn truncate_nucleus(dist: &[f64], p: f64) -> Vec<f64> {
    if p >= 1.0 {
        return dist.to_vec();
    }
    let floor = mass_floor(dist, p);
    let mut head: Vec<(f64, usize)> = dist
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > 0.0 && bucket(x) >= floor)
        .map(|(i, &x)| (x, i))
        .collect();
    let cut = match sorted_cut(&mut head, p) {
        Some(cut) => Some(cut),
        // the bucket sums fell a rounding error short: rank everything
        None => {
            head = dist
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0.0)
                .map(|(i, &x)| (x, i))
                .collect();
            sorted_cut(&mut head, p)
        }
    };
    let (kept, mass) = cut.unwrap_or_else(|| (head.len(), head.iter().map(|x| x.0).sum()));
    let mut out = vec![0.0; dist.len()];
    for &(x, i) in &head[..kept] {
        out[i] = x / mass;
    }
    out
}

/// Order-preserving 19-bit bucket of a positive float: its exponent and
/// the top 8 mantissa bits.
fn bucket(x: f64) -> u32 {
    (x.to_bits() >> 44) as u32
}

/// Highest bucket `b` such that the tokens in buckets `>= b` carry mass `p`.
/// Two passes: binary exponent, then mantissa bits within the boundary
/// exponent. Sorting is then limited to tokens at or above the floor.
fn mass_floor(dist: &[f64], p: f64) -> u32 {
    let mut by_exponent = [0.0f64; 2048];
    for &x in dist.iter().filter(|&&x| x > 0.0) {
        by_exponent[(bucket(x) >> 8) as usize] += x;
    }
    let mut above = 0.0;
    let mut exp = 0;
    for e in (0..2048).rev() {
        if above + by_exponent[e] >= p {
            exp = e;
            break;
        }
        above += by_exponent[e];
    }
    let mut by_mantissa = [0.0f64; 256];
    for &x in dist.iter().filter(|&&x| x > 0.0 && (bucket(x) >> 8) as usize == exp) {
        by_mantissa[(bucket(x) & 0xff) as usize] += x;
    }
    for m in (0..256).rev() {
        above += by_mantissa[m];
        if above >= p {
            return ((exp as u32) << 8) | m as u32;
        }
    }
    (exp as u32) << 8
}

fn by_rank(a: &(f64, usize), b: &(f64, usize)) -> std::cmp::Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

/// Sorts `items` by rank and returns the smallest prefix length whose
/// running mass reaches `p`, with that mass.
fn sorted_cut(items: &mut [(f64, usize)], p: f64) -> Option<(usize, f64)> {
    items.sort_unstable_by(by_rank);
    let mut mass = 0.0;
    for (n, x) in items.iter().enumerate() {
        mass += x.0;
        if mass >= p {
            return Some((n + 1, mass));
        }
    }
    None
}

fn draw(dist: &[f64], rng: &mut ChaCha8Rng) -> Result<TokenId> {
    let w = WeightedIndex::new(dist).map_err(|e| Error::Model(format!("invalid next-token distribution: {e}")))?;
    Ok(w.sample(rng) as TokenId)
}

fn log(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn run_sampler<M, F>(model: &M, prompt: &[TokenId], max_len: usize, mut pick: F) -> Result<Hypothesis>
where
    M: SequenceModel + ?Sized,
    F: FnMut(&[f64]) -> Result<TokenId>,
{
    if max_len < 1 {
        return Err(Error::InvalidConfig("max_len must be at least 1".into()));
    }
    let mut context = prompt.to_vec();
    let mut tokens = Vec::new();
    let mut logprob = 0.0;
    while tokens.len() < max_len {
        let dist = model.next_distribution(&context);
        let t = pick(&dist)?;
        logprob += log(dist[t as usize]);
        tokens.push(t);
        context.push(t);
        if t == EOS {
            return Ok(Hypothesis {
                tokens,
                logprob,
                complete: true,
            });
        }
    }
    Ok(Hypothesis {
        tokens,
        logprob,
        complete: false,
    })
}

/// Draws each token from the full model distribution.
pub fn ancestral_sample<M: SequenceModel + ?Sized>(
    model: &M,
    prompt: &[TokenId],
    max_len: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Hypothesis> {
    run_sampler(model, prompt, max_len, |d| draw(d, rng))
}

/// Draws each token from the nucleus-truncated distribution. The logprob
/// is still measured under the untruncated model.
pub fn nucleus_sample<M: SequenceModel + ?Sized>(
    model: &M,
    prompt: &[TokenId],
    max_len: usize,
    p: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Hypothesis> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidConfig(format!("p must be in (0, 1], got {p}")));
    }
    run_sampler(model, prompt, max_len, |d| draw(&truncate_nucleus(d, p), rng))
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(dist: &[f64]) -> TokenId {
    let mut best = 0;
    for (i, &v) in dist.iter().enumerate() {
        if v > dist[best] {
            best = i;
        }
    }
    best as TokenId
}

pub fn greedy_decode<M: SequenceModel + ?Sized>(model: &M, prompt: &[TokenId], max_len: usize) -> Result<Hypothesis> {
    run_sampler(model, prompt, max_len, |d| Ok(argmax(d)))
}

/// Seed of draw `draw` within group `group` under the run seed.
pub fn derive_seed(seed: u64, group: u64, draw: u64) -> u64 {
    mix64(mix64(mix64(seed) ^ group) ^ draw.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

pub fn rng_for(seed: u64, group: u64, draw: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, group, draw))
}

/// What to condition each generated group on.
#[derive(Debug, Clone, PartialEq)]
pub enum Prompts {
    /// `n` groups generated from the start symbol alone.
    Unconditioned(usize),
    /// One group per prompt; each candidate starts with its prompt.
    Prefixes(Vec<Vec<TokenId>>),
}

impl Prompts {
    pub fn len(&self) -> usize {
        match self {
            Prompts::Unconditioned(n) => *n,
            Prompts::Prefixes(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, i: usize) -> &[TokenId] {
        match self {
            Prompts::Unconditioned(_) => &[],
            Prompts::Prefixes(p) => &p[i],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedGroup {
    pub group: CandidateGroup,
    pub hypotheses: Vec<Hypothesis>,
    /// Candidates that hit `max_len` before `</s>`.
    pub incomplete: usize,
}

/// Decodes one group: the n-best list of a beam search, or `n_best`
/// independent draws for the sampling strategies.
pub fn decode_group<M: SequenceModel + ?Sized>(
    model: &M,
    prompt: &[TokenId],
    group_index: u64,
    config: &DecoderConfig,
) -> Result<Vec<Hypothesis>> {
    config.validate()?;
    match config.strategy {
        Strategy::Beam => beam_search(model, prompt, config),
        Strategy::Ancestral | Strategy::Nucleus => (0..config.n_best as u64)
            .map(|d| {
                let mut rng = rng_for(config.seed, group_index, d);
                if config.strategy == Strategy::Ancestral {
                    ancestral_sample(model, prompt, config.max_len, &mut rng)
                } else {
                    nucleus_sample(model, prompt, config.max_len, config.p, &mut rng)
                }
            })
            .collect(),
    }
}

/// Candidate groups for every prompt, ordered by group index. Group ids are
/// the zero-padded index; failures are returned in place without stopping
/// the rest.
pub fn generate_candidates<M: SequenceModel + ?Sized>(
    model: &M,
    prompts: &Prompts,
    config: &DecoderConfig,
    exec: Execution,
) -> Result<Vec<Result<GeneratedGroup>>> {
    config.validate()?;
    let vocab = model.vocab();
    Ok(exec.map_range(prompts.len(), |i| {
        let prompt = prompts.get(i);
        let hypotheses = decode_group(model, prompt, i as u64, config)?;
        let candidates = hypotheses
            .iter()
            .map(|h| {
                let mut ids = prompt.to_vec();
                ids.extend_from_slice(&h.tokens);
                vocab.decode(&ids)
            })
            .collect();
        let mut group = CandidateGroup::new(format!("{i:08}"), candidates);
        if !prompt.is_empty() {
            group.source = Some(vocab.decode(prompt));
        }
        Ok(GeneratedGroup {
            group,
            incomplete: hypotheses.iter().filter(|h| !h.complete).count(),
            hypotheses,
        })
    }))
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    /// A model given by an explicit function of the prefix.
    pub struct FnModel<F> {
        pub vocab: Vocabulary,
        pub f: F,
    }

    impl<F: Fn(&[TokenId]) -> Vec<f64> + Sync> SequenceModel for FnModel<F> {
        fn vocab(&self) -> &Vocabulary {
            &self.vocab
        }
        fn next_distribution(&self, prefix: &[TokenId]) -> Vec<f64> {
            (self.f)(prefix)
        }
    }

    pub fn words(n: usize) -> Vocabulary {
        Vocabulary::new((0..n).map(|i| format!("w{i}"))).unwrap()
    }

    /// Deterministic chain: w0 w1 w2 then `</s>`.
    pub fn chain() -> FnModel<impl Fn(&[TokenId]) -> Vec<f64> + Sync> {
        FnModel {
            vocab: words(3),
            f: |prefix: &[TokenId]| {
                let mut d = vec![0.0; 5];
                let next = if prefix.len() < 3 {
                    2 + prefix.len()
                } else {
                    EOS as usize
                };
                d[next] = 1.0;
                d
            },
        }
    }
}
