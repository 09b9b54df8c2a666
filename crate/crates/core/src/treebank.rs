//! Bracketed constituency trees: parsing, rendering, terminal masking and
//! first-split signatures.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_DUMMY: &str = "<T>";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeContent {
    /// Pre-terminal: the node dominates a single word.
    Terminal(String),
    /// Internal node; never empty.
    Children(Vec<ParseTree>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParseTree {
    pub label: String,
    pub content: NodeContent,
}

impl ParseTree {
    pub fn leaf(label: impl Into<String>, terminal: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            content: NodeContent::Terminal(terminal.into()),
        }
    }

    /// Panics if `children` is empty.
    pub fn node(label: impl Into<String>, children: Vec<ParseTree>) -> Self {
        assert!(!children.is_empty(), "internal node without children");
        Self {
            label: label.into(),
            content: NodeContent::Children(children),
        }
    }

    pub fn children(&self) -> &[ParseTree] {
        match &self.content {
            NodeContent::Children(c) => c,
            NodeContent::Terminal(_) => &[],
        }
    }

    pub fn terminal(&self) -> Option<&str> {
        match &self.content {
            NodeContent::Terminal(t) => Some(t),
            NodeContent::Children(_) => None,
        }
    }

    pub fn is_preterminal(&self) -> bool {
        matches!(self.content, NodeContent::Terminal(_))
    }

    /// Number of labelled nodes (terminal words are not nodes).
    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(ParseTree::node_count).sum::<usize>()
    }

    pub fn labels(&self) -> Vec<&str> {
        let mut out = vec![self.label.as_str()];
        for c in self.children() {
            out.extend(c.labels());
        }
        out
    }

    pub fn terminals(&self) -> Vec<&str> {
        match &self.content {
            NodeContent::Terminal(t) => vec![t.as_str()],
            NodeContent::Children(c) => c.iter().flat_map(|c| c.terminals()).collect(),
        }
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.label)?;
        match &self.content {
            NodeContent::Terminal(t) => write!(f, " {}", escape_terminal(t))?,
            NodeContent::Children(children) => {
                for c in children {
                    write!(f, " {c}")?;
                }
            }
        }
        f.write_str(")")
    }
}

fn escape_terminal(t: &str) -> String {
    t.replace('(', "-LRB-").replace(')', "-RRB-")
}

/// Canonical single-line rendering with Penn Treebank bracket escapes.
pub fn render_bracketed(tree: &ParseTree) -> String {
    tree.to_string()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Open,
    Close,
    Atom(&'a str),
}

struct Lexer<'a> {
    src: &'a str,
    // (byte index, char offset)
    pos: usize,
    chars: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0, chars: 0 }
    }

    fn skip_ws(&mut self) {
        for c in self.src[self.pos..].chars() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
            self.chars += 1;
        }
    }

    /// Next token and the character offset where it starts.
    fn next(&mut self) -> Option<(Tok<'a>, usize)> {
        self.skip_ws();
        let start_chars = self.chars;
        let rest = &self.src[self.pos..];
        let c = rest.chars().next()?;
        match c {
            '(' | ')' => {
                self.pos += 1;
                self.chars += 1;
                Some((if c == '(' { Tok::Open } else { Tok::Close }, start_chars))
            }
            _ => {
                let mut len = 0;
                for ch in rest.chars() {
                    if ch.is_whitespace() || ch == '(' || ch == ')' {
                        break;
                    }
                    len += ch.len_utf8();
                    self.chars += 1;
                }
                let atom = &rest[..len];
                self.pos += len;
                Some((Tok::Atom(atom), start_chars))
            }
        }
    }

    fn end_offset(&self) -> usize {
        self.chars + self.src[self.pos..].chars().count()
    }
}

fn perr(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        message: message.into(),
    }
}

fn parse_node(lex: &mut Lexer<'_>, open_at: usize) -> Result<ParseTree> {
    // the opening bracket has been consumed
    let eof = |lex: &Lexer<'_>| perr(lex.end_offset(), "unexpected end of input");
    let (label, mut next) = match lex.next().ok_or_else(|| eof(lex))? {
        (Tok::Atom(a), _) => (a.to_owned(), lex.next().ok_or_else(|| eof(lex))?),
        // "( (S ...))": unlabelled wrapper
        other => (String::new(), other),
    };

    let mut children = Vec::new();
    loop {
        match next {
            (Tok::Close, at) => {
                if children.is_empty() {
                    return Err(perr(at, format!("node {label:?} has no children or terminal")));
                }
                break;
            }
            (Tok::Open, at) => children.push(parse_node(lex, at)?),
            (Tok::Atom(word), at) => {
                if !children.is_empty() {
                    return Err(perr(at, format!("terminal {word:?} mixed with subtrees")));
                }
                let word = word.to_owned();
                match lex.next() {
                    Some((Tok::Close, _)) => {
                        if label.is_empty() {
                            return Err(perr(open_at, "pre-terminal without a label"));
                        }
                        return Ok(ParseTree::leaf(label, word));
                    }
                    Some((_, at2)) => return Err(perr(at2, "expected ')' after terminal")),
                    None => return Err(eof(lex)),
                }
            }
        }
        next = lex.next().ok_or_else(|| eof(lex))?;
    }

    if label.is_empty() {
        if children.len() == 1 {
            return Ok(children.pop().unwrap());
        }
        return Err(perr(open_at, "unlabelled node with several children"));
    }
    Ok(ParseTree::node(label, children))
}

/// Parses one bracketed tree such as `(S (NP (DT The) (NN cat)) (VP (VBZ sits)))`.
///
/// An unlabelled outer wrapper with a single child, `( (S ...) )`, is
/// unwrapped. Errors carry the character offset of the problem.
pub fn parse_bracketed(line: &str) -> Result<ParseTree> {
    let mut lex = Lexer::new(line);
    let tree = match lex.next() {
        None => return Err(perr(0, "empty input")),
        Some((Tok::Open, at)) => parse_node(&mut lex, at)?,
        Some((_, at)) => return Err(perr(at, "expected '('")),
    };
    if let Some((_, at)) = lex.next() {
        return Err(perr(at, "trailing input after the root"));
    }
    Ok(tree)
}

/// Replaces every terminal with `dummy`, leaving labels and shape unchanged.
pub fn mask_terminals(tree: &ParseTree, dummy: &str) -> ParseTree {
    match &tree.content {
        NodeContent::Terminal(_) => ParseTree::leaf(tree.label.clone(), dummy),
        NodeContent::Children(children) => ParseTree {
            label: tree.label.clone(),
            content: NodeContent::Children(children.iter().map(|c| mask_terminals(c, dummy)).collect()),
        },
    }
}

/// Root label plus the ordered labels of the root's children.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupSignature {
    pub root_label: String,
    pub child_labels: Vec<String>,
}

impl fmt::Display for GroupSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ->", self.root_label)?;
        for c in &self.child_labels {
            write!(f, " {c}")?;
        }
        Ok(())
    }
}

/// The first split of a tree, e.g. `S -> PP NP VP .`.
///
/// A unary `ROOT` node, as emitted by the Stanford parsers, is looked
/// through so that the signature describes the sentence node.
pub fn first_split_signature(tree: &ParseTree) -> Result<GroupSignature> {
    let mut node = tree;
    while node.label == "ROOT" && node.children().len() == 1 && !node.children()[0].is_preterminal() {
        node = &node.children()[0];
    }
    match &node.content {
        NodeContent::Terminal(_) => Err(Error::LeafRoot(node.label.clone())),
        NodeContent::Children(children) => Ok(GroupSignature {
            root_label: node.label.clone(),
            child_labels: children.iter().map(|c| c.label.clone()).collect(),
        }),
    }
}
