use std::cmp::Ordering;

use super::{DecoderConfig, Hypothesis, SequenceModel, TokenId, EOS};
use crate::Result;

struct Extension {
    score: f64,
    parent: usize,
    token: TokenId,
}

fn rank(a: &Extension, b: &Extension) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.parent.cmp(&b.parent))
        .then(a.token.cmp(&b.token))
}

fn by_logprob(a: &Hypothesis, b: &Hypothesis) -> Ordering {
    b.logprob.total_cmp(&a.logprob).then_with(|| a.tokens.cmp(&b.tokens))
}

/// Beam search over summed log-probabilities with no length penalty.
///
/// Each step scores every extension of the live beam and walks the best
/// `2 · beam_size` of them in order. An `</s>` extension ranked within the
/// first `beam_size` finishes a hypothesis; other extensions refill the live
/// beam up to `beam_size`. The search stops when the live beam is empty,
/// `max_len` is reached, or no live hypothesis can still beat the current
/// `n_best`-th finished one (log-probabilities only decrease).
///
/// Returns up to `n_best` finished hypotheses, best first. If fewer than
/// `n_best` finish, the best truncated ones fill the list with
/// `complete == false`.
pub fn beam_search<M: SequenceModel + ?Sized>(
    model: &M,
    prompt: &[TokenId],
    config: &DecoderConfig,
) -> Result<Vec<Hypothesis>> {
    config.validate()?;
    let width = config.beam_size;
    let mut live: Vec<(Vec<TokenId>, f64)> = vec![(Vec::new(), 0.0)];
    let mut finished: Vec<Hypothesis> = Vec::new();
    let mut context = prompt.to_vec();

    for _ in 0..config.max_len {
        let mut ext = Vec::new();
        for (parent, (tokens, score)) in live.iter().enumerate() {
            context.truncate(prompt.len());
            context.extend_from_slice(tokens);
            let dist = model.next_distribution(&context);
            for (t, &p) in dist.iter().enumerate() {
                if p > 0.0 {
                    ext.push(Extension {
                        score: score + p.ln(),
                        parent,
                        token: t as TokenId,
                    });
                }
            }
        }
        let keep = (2 * width).min(ext.len());
        if keep < ext.len() {
            ext.select_nth_unstable_by(keep, rank);
            ext.truncate(keep);
        }
        ext.sort_unstable_by(rank);

        let mut next = Vec::with_capacity(width);
        for (pos, e) in ext.iter().enumerate() {
            let mut tokens = live[e.parent].0.clone();
            tokens.push(e.token);
            if e.token == EOS {
                if pos < width {
                    finished.push(Hypothesis {
                        tokens,
                        logprob: e.score,
                        complete: true,
                    });
                }
            } else if next.len() < width {
                next.push((tokens, e.score));
            }
        }
        live = next;

        if live.is_empty() {
            break;
        }
        if finished.len() >= config.n_best {
            finished.sort_by(by_logprob);
            let bar = finished[config.n_best - 1].logprob;
            if live.iter().all(|(_, s)| *s <= bar) {
                break;
            }
        }
    }

    finished.sort_by(by_logprob);
    finished.truncate(config.n_best);
    if finished.len() < config.n_best {
        let mut truncated: Vec<Hypothesis> = live
            .into_iter()
            .map(|(tokens, logprob)| Hypothesis {
                tokens,
                logprob,
                complete: false,
            })
            .collect();
        truncated.sort_by(by_logprob);
        finished.extend(truncated.into_iter().take(config.n_best - finished.len()));
    }
    Ok(finished)
}

#[cfg(test)]
mod tests {
    use super::super::testing::*;
    use super::super::{Strategy, Vocabulary};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn cfg(beam_size: usize, n_best: usize, max_len: usize) -> DecoderConfig {
        DecoderConfig {
            strategy: Strategy::Beam,
            beam_size,
            n_best,
            max_len,
            ..Default::default()
        }
    }

    #[test]
    fn chain_gives_one_certain_hypothesis() {
        let m = chain();
        let out = beam_search(&m, &[], &cfg(5, 1, 10)).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].tokens, [2, 3, 4, EOS]);
        assert_eq!(out[0].logprob, 0.0);
        assert!(out[0].complete);
    }

    #[test]
    fn truncated_hypotheses_are_flagged() {
        let m = chain();
        let out = beam_search(&m, &[], &cfg(5, 1, 2)).unwrap();
        assert_eq!(out.len(), 1);
        assert!(!out[0].complete);
        assert_eq!(out[0].tokens, [2, 3]);
    }

    /// A random model over `n` words whose distribution depends on the full
    /// prefix through a table filled lazily from a seeded generator.
    struct TableModel {
        vocab: Vocabulary,
        table: HashMap<Vec<TokenId>, Vec<f64>>,
    }

    impl TableModel {
        fn random(seed: u64, words: usize, max_len: usize) -> Self {
            let vocab = super::super::testing::words(words);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut table = HashMap::new();
            let mut frontier: Vec<Vec<TokenId>> = vec![vec![]];
            for _ in 0..max_len {
                let mut next = Vec::new();
                for prefix in frontier {
                    let mut d: Vec<f64> = (0..vocab.len()).map(|_| rng.gen::<f64>().powi(3)).collect();
                    d[0] = 0.0;
                    let s: f64 = d.iter().sum();
                    d.iter_mut().for_each(|x| *x /= s);
                    for t in 2..vocab.len() as TokenId {
                        let mut p = prefix.clone();
                        p.push(t);
                        next.push(p);
                    }
                    table.insert(prefix, d);
                }
                frontier = next;
            }
            Self { vocab, table }
        }
    }

    impl SequenceModel for TableModel {
        fn vocab(&self) -> &Vocabulary {
            &self.vocab
        }
        fn next_distribution(&self, prefix: &[TokenId]) -> Vec<f64> {
            self.table[prefix].clone()
        }
    }

    /// Best complete sequence by exhaustive enumeration.
    fn brute_force(m: &TableModel, max_len: usize) -> (Vec<TokenId>, f64) {
        let mut best = (Vec::new(), f64::NEG_INFINITY);
        let mut stack: Vec<(Vec<TokenId>, f64)> = vec![(vec![], 0.0)];
        while let Some((prefix, lp)) = stack.pop() {
            if prefix.len() == max_len {
                continue;
            }
            let d = m.next_distribution(&prefix);
            for (t, &p) in d.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let mut seq = prefix.clone();
                seq.push(t as TokenId);
                let score = lp + p.ln();
                if t as TokenId == EOS {
                    if score > best.1 {
                        best = (seq, score);
                    }
                } else {
                    stack.push((seq, score));
                }
            }
        }
        best
    }

    #[test]
    fn beam_wide_enough_is_exact() {
        // 3 words, max_len 5: at most 81 live prefixes with 4 extensions
        // each, so a beam of 324 never prunes. 121 complete sequences.
        for seed in 0..20 {
            let m = TableModel::random(seed, 3, 5);
            let (seq, lp) = brute_force(&m, 5);
            let out = beam_search(&m, &[], &cfg(324, 1, 5)).unwrap();
            assert_eq!(out[0].tokens, seq, "seed {seed}");
            assert!((out[0].logprob - lp).abs() < 1e-12);
        }
    }

    #[test]
    fn n_best_is_distinct_and_ordered() {
        let m = TableModel::random(7, 3, 5);
        let out = beam_search(&m, &[], &cfg(5, 3, 5)).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.windows(2).all(|w| w[0].logprob >= w[1].logprob));
        assert!(out[0].tokens != out[1].tokens && out[1].tokens != out[2].tokens && out[0].tokens != out[2].tokens);
        assert_eq!(beam_search(&m, &[], &cfg(5, 3, 5)).unwrap(), out);
    }
}
