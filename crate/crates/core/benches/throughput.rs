//! Sequential against data-parallel execution for the three group-level
//! workloads: lexical i-scores, tree-kernel differences and decoding.

use std::hint::black_box;

use btdiv_core::decodelab::{generate_candidates, train_ngram_model, DecoderConfig, NGramConfig, Prompts, Strategy};
use btdiv_core::lexdiv::{dataset_i_score, LexicalMetric};
use btdiv_core::synkernel::{dataset_kernel_difference, KernelConfig};
use btdiv_core::treebank::parse_bracketed;
use btdiv_core::{CandidateGroup, Execution};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const CORPUS: &str = include_str!("../data/corpus_en.txt");
const TREES: &str = include_str!("../tests/fixtures/trees.txt");
const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

/// Triplets of consecutive corpus lines.
fn corpus_groups(n: usize) -> Vec<CandidateGroup> {
    let lines: Vec<&str> = CORPUS.lines().filter(|l| !l.trim().is_empty()).collect();
    (0..n)
        .map(|i| {
            let c = lines[3 * i..3 * i + 3].iter().map(|s| s.to_string()).collect();
            CandidateGroup::new(format!("{i:06}"), c)
        })
        .collect()
}

fn i_scores(c: &mut Criterion) {
    let groups = corpus_groups(500);
    let mut g = c.benchmark_group("i_score_500_triplets");
    g.sample_size(10);
    for metric in [LexicalMetric::bleu(), LexicalMetric::chrf()] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(metric.name(), name), &exec, |b, &exec| {
                b.iter(|| dataset_i_score(black_box(groups.clone()), &metric, None, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn kernels(c: &mut Criterion) {
    let trees: Vec<_> = TREES.lines().map(|l| parse_bracketed(l).unwrap()).collect();
    let groups: Vec<(String, Vec<_>)> = (0..2000)
        .map(|i| {
            let pick = |k: usize| trees[(i * 7 + k * 5) % trees.len()].clone();
            (format!("{i:06}"), vec![pick(0), pick(1), pick(2)])
        })
        .collect();
    let cfg = KernelConfig::default();
    let mut g = c.benchmark_group("kernel_2000_triplets");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| dataset_kernel_difference(black_box(&groups), &cfg, exec).unwrap())
        });
    }
    g.finish();
}

fn decoding(c: &mut Criterion) {
    let model = train_ngram_model(CORPUS.lines(), NGramConfig::default()).unwrap();
    let mut g = c.benchmark_group("decode_50_groups");
    g.sample_size(10);
    for strategy in [Strategy::Ancestral, Strategy::Nucleus, Strategy::Beam] {
        let cfg = DecoderConfig {
            strategy,
            max_len: 30,
            ..Default::default()
        };
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(strategy.name(), name), &exec, |b, &exec| {
                b.iter(|| generate_candidates(&model, &Prompts::Unconditioned(50), &cfg, exec).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, i_scores, kernels, decoding);
criterion_main!(benches);
