#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_btdiv");

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/corpus_en.txt")
}

pub fn btdiv<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(BIN).args(args).output().expect("binary runs")
}

/// Runs and requires exit status 0.
pub fn ok<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let out = btdiv(args);
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// The parsed stderr error object of a failed run.
pub fn error_of(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let v: serde_json::Value = serde_json::from_str(text.trim()).expect("stderr is one JSON object");
    v["error"].clone()
}

/// Bucket `i` gets `sizes[i]` pairs whose parse has first split
/// `S -> NP VP` followed by `i` extra `PP` children. Buckets are interleaved
/// so pair order differs from bucket order.
pub fn engineered_corpus(dir: &Path, sizes: &[usize]) -> (PathBuf, PathBuf, PathBuf) {
    let mut left: Vec<usize> = sizes.to_vec();
    let (mut src, mut tgt, mut trees) = (String::new(), String::new(), String::new());
    let mut n = 0;
    while left.iter().any(|&c| c > 0) {
        for (b, c) in left.iter_mut().enumerate() {
            if *c == 0 {
                continue;
            }
            *c -= 1;
            src.push_str(&format!("quelle {n}\n"));
            tgt.push_str(&format!("target {n} bucket {b}\n"));
            let pps = " (PP (IN of) (NP (NN it)))".repeat(b);
            trees.push_str(&format!("(ROOT (S (NP (NN target)) (VP (VB is)){pps}))\n"));
            n += 1;
        }
    }
    let paths = (dir.join("corpus.src"), dir.join("corpus.tgt"), dir.join("corpus.trees"));
    std::fs::write(&paths.0, src).unwrap();
    std::fs::write(&paths.1, tgt).unwrap();
    std::fs::write(&paths.2, trees).unwrap();
    paths
}

pub type ReportRow = (String, Vec<Option<f64>>);

/// Metric columns, `(id, values)` rows and the aggregate object of a TSV
/// report.
pub fn parse_tsv_report(text: &str) -> (Vec<String>, Vec<ReportRow>, serde_json::Value) {
    let mut columns = Vec::new();
    let mut rows = Vec::new();
    let mut aggregate = serde_json::Value::Null;
    for line in text.lines() {
        if let Some(a) = line.strip_prefix("# aggregate: ") {
            aggregate = serde_json::from_str(a).unwrap();
        } else if line.starts_with('#') {
            continue;
        } else if columns.is_empty() {
            columns = line.split('\t').skip(1).map(str::to_owned).collect();
        } else {
            let mut f = line.split('\t');
            let id = f.next().unwrap().to_owned();
            rows.push((id, f.map(|v| v.parse().ok()).collect()));
        }
    }
    (columns, rows, aggregate)
}
