//! Decoder behaviour on an order-3 model trained on the bundled corpus.

use std::sync::OnceLock;

use btdiv_core::decodelab::{
    ancestral_sample, generate_candidates, nucleus_sample, perplexity, rng_for, train_ngram_model, truncate_nucleus,
    DecoderConfig, NGramConfig, NGramModel, Prompts, SequenceModel, Strategy,
};
use btdiv_core::lexdiv::{dataset_i_score, LexicalMetric};
use btdiv_core::Execution;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const CORPUS: &str = include_str!("../data/corpus_en.txt");

fn model() -> &'static NGramModel {
    static MODEL: OnceLock<NGramModel> = OnceLock::new();
    MODEL.get_or_init(|| train_ngram_model(CORPUS.lines(), NGramConfig::default()).unwrap())
}

/// Pearson chi-square p-value of observed counts against `probs`, with
/// cells of expected count below 5 pooled (smallest first).
fn gof_p_value(observed: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = observed.iter().sum();
    let mut cells: Vec<(f64, u64)> = probs
        .iter()
        .zip(observed)
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &o)| (p * n as f64, o))
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pooled: Vec<(f64, u64)> = Vec::new();
    let mut acc = (0.0, 0u64);
    for (e, o) in cells {
        acc = (acc.0 + e, acc.1 + o);
        if acc.0 >= 5.0 {
            pooled.push(acc);
            acc = (0.0, 0);
        }
    }
    if acc.0 > 0.0 {
        let last = pooled.last_mut().unwrap();
        *last = (last.0 + acc.0, last.1 + acc.1);
    }
    let stat: f64 = pooled.iter().map(|&(e, o)| (o as f64 - e).powi(2) / e).sum();
    let df = (pooled.len() - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

fn first_token_counts(p: Option<f64>, draws: usize) -> Vec<u64> {
    let m = model();
    let mut rng = rng_for(2024, 0, 0);
    let mut counts = vec![0u64; m.vocab().len()];
    for _ in 0..draws {
        let h = match p {
            None => ancestral_sample(m, &[], 1, &mut rng).unwrap(),
            Some(p) => nucleus_sample(m, &[], 1, p, &mut rng).unwrap(),
        };
        counts[h.tokens[0] as usize] += 1;
    }
    counts
}

#[test]
fn ancestral_first_token_fits_model() {
    let dist = model().next_distribution(&[]);
    let counts = first_token_counts(None, 20_000);
    let p = gof_p_value(&counts, &dist);
    assert!(p > 0.001, "p = {p}");
}

#[test]
fn nucleus_first_token_fits_truncated_model() {
    let dist = truncate_nucleus(&model().next_distribution(&[]), 0.95);
    let counts = first_token_counts(Some(0.95), 20_000);
    let p = gof_p_value(&counts, &dist);
    assert!(p > 0.001, "p = {p}");
    for (c, q) in counts.iter().zip(&dist) {
        assert!(*q > 0.0 || *c == 0, "token outside the nucleus was drawn");
    }
}

#[test]
fn nucleus_never_leaves_support_over_many_steps() {
    let m = model();
    let mut steps = 0;
    let mut draw = 0;
    while steps < 10_000 {
        let mut rng = rng_for(7, 0, draw);
        draw += 1;
        let h = nucleus_sample(m, &[], 40, 0.95, &mut rng).unwrap();
        let mut ctx = Vec::new();
        for &t in &h.tokens {
            let support = truncate_nucleus(&m.next_distribution(&ctx), 0.95);
            assert!(support[t as usize] > 0.0);
            ctx.push(t);
            steps += 1;
        }
    }
}

#[test]
fn higher_order_has_lower_held_out_perplexity() {
    let lines: Vec<&str> = CORPUS.lines().collect();
    let train: Vec<&str> = lines
        .iter()
        .copied()
        .enumerate()
        .filter(|(i, _)| i % 10 != 0)
        .map(|x| x.1)
        .collect();
    let m1 = train_ngram_model(&train, NGramConfig { order: 1, alpha: 0.1 }).unwrap();
    let m3 = train_ngram_model(&train, NGramConfig { order: 3, alpha: 0.1 }).unwrap();
    let held: Vec<&str> = lines
        .iter()
        .copied()
        .step_by(10)
        .filter(|l| m1.vocab().encode(l).is_ok())
        .collect();
    assert!(held.len() > 500);
    let (p1, p3) = (perplexity(&m1, &held).unwrap(), perplexity(&m3, &held).unwrap());
    assert!(p3 <= p1, "order 3: {p3}, order 1: {p1}");
}

#[test]
fn seeded_sample_is_frozen() {
    let m = model();
    let h = ancestral_sample(m, &[], 40, &mut rng_for(42, 0, 0)).unwrap();
    assert_eq!(
        m.vocab().decode(&h.tokens),
        "but if by his cats heard them all , when her the"
    );
    assert!(h.complete);
    assert!((h.logprob - -65.54399312271033).abs() < 1e-9);
}

#[test]
fn beam_groups_are_near_duplicates() {
    let m = model();
    let prompts: Vec<Vec<u32>> = CORPUS
        .lines()
        .step_by(97)
        .take(100)
        .map(|l| {
            m.vocab()
                .encode(&l.split(' ').take(2).collect::<Vec<_>>().join(" "))
                .unwrap()
        })
        .collect();
    let cfg = DecoderConfig {
        strategy: Strategy::Beam,
        max_len: 30,
        ..Default::default()
    };
    let groups: Vec<_> = generate_candidates(m, &Prompts::Prefixes(prompts), &cfg, Execution::default())
        .unwrap()
        .into_iter()
        .map(|g| g.unwrap().group)
        .collect();
    let score = dataset_i_score(groups, &LexicalMetric::bleu(), None, Execution::default()).unwrap();
    // 69.47 when frozen; sampling strategies land above 90 on the same prompts
    assert!(score.mean < 75.0, "{}", score.mean);
}
