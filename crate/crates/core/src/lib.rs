//! Lexical and syntactic diversity measurement for sets of candidate
//! translations.
//!
//! The crate is organised around the pipeline a back-translation study runs:
//!
//! * [`textnorm`] tokenizes and counts (13a word tokens, `wc`-style words,
//!   character n-grams).
//! * [`lexdiv`] scores sentence pairs with BLEU and chrF and turns pairwise
//!   scores into the inter-sentence diversity scores i-BLEU and i-chrF.
//! * [`treebank`] reads bracketed constituency parses, masks their terminals
//!   and extracts first-split signatures.
//! * [`synkernel`] computes the subset-tree kernel and the mean tree-kernel
//!   difference of a candidate group.
//! * [`grouper`] partitions a parallel corpus into syntactic groups and builds
//!   fine-tuning sets from the largest ones.
//! * [`decodelab`] holds a small n-gram sequence model together with beam
//!   search, ancestral sampling and nucleus sampling decoders.
//! * [`corpuslab`] computes corpus summary statistics, finds neologisms and
//!   draws reproducible group samples.
//!
//! Work over groups is data-parallel through [`Execution`]; with the
//! `parallel` feature disabled everything runs on the calling thread.

pub mod corpuslab;
pub mod decodelab;
mod error;
pub mod grouper;
pub mod lexdiv;
mod par;
pub mod synkernel;
pub mod textnorm;
pub mod treebank;

pub use error::{Error, Result};
pub use lexdiv::CandidateGroup;
pub use par::Execution;
