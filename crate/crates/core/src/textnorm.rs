//! Tokenization and counting primitives shared by the metrics.
//!
//! The 13a tokenizer and the whitespace rules reproduce sacreBLEU 2.0.0 so that
//! sentence scores computed here agree with that toolkit to floating point
//! precision. All text is handled as Unicode scalar values.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;

use crate::{Error, Result};

/// Whitespace as understood by Python's `str.split()` / `str.isspace()`.
///
/// This is Rust's `White_Space` set plus the ASCII information separators
/// U+001C..U+001F, which Python also treats as whitespace.
pub fn is_split_whitespace(c: char) -> bool {
    c.is_whitespace() || ('\u{1c}'..='\u{1f}').contains(&c)
}

/// Splits on [`is_split_whitespace`] runs, dropping empty pieces.
pub fn split_whitespace(text: &str) -> impl Iterator<Item = &str> {
    text.split(is_split_whitespace).filter(|s| !s.is_empty())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedSentence {
    pub raw: String,
    pub tokens: Vec<String>,
}

impl TokenizedSentence {
    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

struct Rules13a {
    punct: Regex,
    period_comma_after: Regex,
    period_comma_before: Regex,
    dash_after_digit: Regex,
}

fn rules() -> &'static Rules13a {
    static RULES: OnceLock<Rules13a> = OnceLock::new();
    RULES.get_or_init(|| Rules13a {
        punct: Regex::new(r"([\{-\~\[-\` -\&\(-\+\:-\@/])").unwrap(),
        period_comma_after: Regex::new(r"([^0-9])([\.,])").unwrap(),
        period_comma_before: Regex::new(r"([\.,])([^0-9])").unwrap(),
        dash_after_digit: Regex::new(r"([0-9])(-)").unwrap(),
    })
}

/// Applies the mteval-13a scheme and returns the space-joined token string.
pub fn tokenize_13a_str(text: &str) -> String {
    let mut line = text.replace("<skipped>", "").replace("-\n", "").replace('\n', " ");
    if line.contains('&') {
        line = line
            .replace("&quot;", "\"")
            .replace("&amp;", "&")
            .replace("&lt;", "<")
            .replace("&gt;", ">");
    }
    let line = format!(" {line} ");

    let r = rules();
    let line = r.punct.replace_all(&line, " ${1} ");
    let line = r.period_comma_after.replace_all(&line, "${1} ${2} ");
    let line = r.period_comma_before.replace_all(&line, " ${1} ${2}");
    let line = r.dash_after_digit.replace_all(&line, "${1} ${2} ");

    let mut out = String::with_capacity(line.len());
    for tok in split_whitespace(&line) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(tok);
    }
    out
}

/// 13a word tokenization. Case is preserved.
pub fn tokenize_13a(text: &str) -> TokenizedSentence {
    let joined = tokenize_13a_str(text);
    TokenizedSentence {
        raw: text.to_owned(),
        tokens: joined.split(' ').filter(|t| !t.is_empty()).map(str::to_owned).collect(),
    }
}

/// Number of words as counted by `wc -w` in the C locale: maximal runs of
/// characters other than space, tab, newline, vertical tab, form feed and
/// carriage return.
pub fn wc_words(text: &str) -> usize {
    text.split(is_wc_space).filter(|s| !s.is_empty()).count()
}

/// Word iterator matching [`wc_words`].
pub fn wc_split(text: &str) -> impl Iterator<Item = &str> {
    text.split(is_wc_space).filter(|s| !s.is_empty())
}

fn is_wc_space(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\n' | '\u{b}' | '\u{c}' | '\r')
}

/// Multiset of n-grams of a single order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NGramProfile {
    pub order: usize,
    pub counts: HashMap<String, usize>,
}

impl NGramProfile {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn get(&self, ngram: &str) -> usize {
        self.counts.get(ngram).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Removes every whitespace character (chrF's default preprocessing).
pub fn strip_whitespace(text: &str) -> String {
    text.chars().filter(|&c| !is_split_whitespace(c)).collect()
}

/// Character n-grams of order `n` over Unicode scalar values.
pub fn char_ngrams(text: &str, n: usize, strip_whitespace: bool) -> Result<NGramProfile> {
    if n < 1 {
        return Err(Error::InvalidOrder(n));
    }
    let chars: Vec<char> = if strip_whitespace {
        text.chars().filter(|&c| !is_split_whitespace(c)).collect()
    } else {
        text.chars().collect()
    };
    Ok(char_ngrams_of(&chars, n))
}

pub(crate) fn char_ngrams_of(chars: &[char], n: usize) -> NGramProfile {
    let mut counts = HashMap::new();
    if chars.len() >= n {
        for window in chars.windows(n) {
            *counts.entry(window.iter().collect::<String>()).or_insert(0) += 1;
        }
    }
    NGramProfile { order: n, counts }
}
