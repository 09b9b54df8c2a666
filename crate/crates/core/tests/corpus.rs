//! Corpus statistics and sampling at file scale.

use btdiv_core::corpuslab::{corpus_stats, neologisms, sample_groups, vocabulary, SampleSpec, StatsAccumulator};
use btdiv_core::textnorm::wc_words;
use btdiv_core::CandidateGroup;

const WC_SAMPLE: &str = include_str!("fixtures/wc_sample.txt");
const CORPUS: &str = include_str!("../data/corpus_en.txt");

#[test]
fn word_count_matches_wc() {
    // `wc -w fixtures/wc_sample.txt` prints 37 under both C and C.UTF-8
    assert_eq!(wc_words(WC_SAMPLE), 37);
    assert_eq!(corpus_stats(WC_SAMPLE.lines()).word_count, 37);
}

#[test]
fn sharded_stats_match_single_pass() {
    let lines: Vec<&str> = CORPUS.lines().collect();
    let whole = corpus_stats(&lines);
    let merged = lines
        .chunks(1000)
        .map(|chunk| {
            let mut acc = StatsAccumulator::default();
            chunk.iter().for_each(|l| acc.push_line(l));
            acc
        })
        .rev()
        .fold(StatsAccumulator::default(), StatsAccumulator::merge)
        .finish();
    assert_eq!(merged, whole);
    assert_eq!(whole.line_count, lines.len());
    assert!(whole.vocab_size <= whole.word_count);
}

#[test]
fn corpus_has_no_neologisms_against_itself() {
    let vocab = vocabulary(CORPUS.lines());
    assert_eq!(neologisms(CORPUS.lines(), &vocab, 10).count, 0);
    let r = neologisms(["the king governmentregluru said"], &vocab, 10);
    assert_eq!(r.sample, ["governmentregluru"]);
}

fn dataset(n: usize, tag: &str) -> impl Iterator<Item = CandidateGroup> + '_ {
    (0..n).map(move |i| CandidateGroup::new(format!("{i:08}"), vec![format!("{tag} {i}"); 3]))
}

#[test]
fn aligned_sampling_over_large_streams() {
    let spec = SampleSpec { n: 30_000, seed: 11 };
    let a = sample_groups(dataset(300_000, "beam"), &spec).unwrap();
    let b = sample_groups(dataset(300_000, "nucleus"), &spec).unwrap();
    assert_eq!(a.len(), 30_000);
    let ids = |v: &[CandidateGroup]| v.iter().map(|g| g.group_id.clone()).collect::<Vec<_>>();
    assert_eq!(ids(&a), ids(&b));
    assert_eq!(sample_groups(dataset(300_000, "beam"), &spec).unwrap(), a);
}
