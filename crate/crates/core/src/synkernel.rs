//! Subset-tree (SST) kernel over terminal-masked parse trees and the mean
//! tree-kernel difference of a candidate group.
//!
//! `Δ(n1, n2)` is 0 when the productions at the two nodes differ, `λ` when
//! both are matching pre-terminals, and `λ · Π (1 + Δ(c1_i, c2_i))` otherwise.
//! The kernel sums `Δ` over all node pairs. Terminals never enter a
//! production key, which is the same as masking them.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::treebank::{ParseTree, DEFAULT_DUMMY};
use crate::{Error, Execution, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelConfig {
    /// Fragment decay in `(0, 1]`.
    pub lambda: f64,
    /// Cosine-normalize pairwise kernels. The difference score needs it.
    pub normalize: bool,
    pub dummy_token: String,
    /// Largest fragment count [`enumerate_fragments`] will materialize.
    pub fragment_cap: u64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            normalize: true,
            dummy_token: DEFAULT_DUMMY.to_owned(),
            fragment_cap: 1_000_000,
        }
    }
}

impl KernelConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be in (0, 1], got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

#[derive(Hash, PartialEq, Eq)]
enum ProductionKey<'a> {
    PreTerminal(&'a str),
    Internal(&'a str, Vec<&'a str>),
}

#[derive(Default)]
struct Interner<'a> {
    ids: HashMap<ProductionKey<'a>, u32>,
}

impl<'a> Interner<'a> {
    fn id(&mut self, key: ProductionKey<'a>) -> u32 {
        let next = self.ids.len() as u32;
        *self.ids.entry(key).or_insert(next)
    }
}

/// A tree flattened in post-order: children always precede their parent.
struct FlatTree {
    production: Vec<u32>,
    children: Vec<Vec<usize>>,
}

impl FlatTree {
    fn new<'a>(tree: &'a ParseTree, interner: &mut Interner<'a>) -> Self {
        let mut flat = FlatTree {
            production: Vec::new(),
            children: Vec::new(),
        };
        flat.push(tree, interner);
        flat
    }

    fn push<'a>(&mut self, node: &'a ParseTree, interner: &mut Interner<'a>) -> usize {
        let key = if node.is_preterminal() {
            ProductionKey::PreTerminal(&node.label)
        } else {
            ProductionKey::Internal(&node.label, node.children().iter().map(|c| c.label.as_str()).collect())
        };
        let kids: Vec<usize> = node.children().iter().map(|c| self.push(c, interner)).collect();
        self.production.push(interner.id(key));
        self.children.push(kids);
        self.production.len() - 1
    }

    fn len(&self) -> usize {
        self.production.len()
    }
}

fn flat_kernel(a: &FlatTree, b: &FlatTree, lambda: f64) -> f64 {
    let m = b.len();
    let mut delta = vec![0.0f64; a.len() * m];
    let mut total = 0.0;
    for i in 0..a.len() {
        for j in 0..m {
            if a.production[i] != b.production[j] {
                continue;
            }
            let ca = &a.children[i];
            let d = if ca.is_empty() {
                lambda
            } else {
                // equal productions imply equal arity
                let cb = &b.children[j];
                ca.iter()
                    .zip(cb)
                    .fold(lambda, |acc, (&x, &y)| acc * (1.0 + delta[x * m + y]))
            };
            delta[i * m + j] = d;
            total += d;
        }
    }
    total
}

/// Raw SST kernel `K(t1, t2)`.
pub fn sst_kernel(t1: &ParseTree, t2: &ParseTree, config: &KernelConfig) -> f64 {
    let mut interner = Interner::default();
    let a = FlatTree::new(t1, &mut interner);
    let b = FlatTree::new(t2, &mut interner);
    flat_kernel(&a, &b, config.lambda)
}

fn cosine(k12: f64, k11: f64, k22: f64) -> Result<f64> {
    if k11 <= 0.0 || k22 <= 0.0 {
        return Err(Error::DegenerateTree);
    }
    Ok((k12 / (k11 * k22).sqrt()).clamp(0.0, 1.0))
}

/// `K(t1, t2) / sqrt(K(t1, t1) · K(t2, t2))`, in `[0, 1]`.
pub fn normalized_similarity(t1: &ParseTree, t2: &ParseTree, config: &KernelConfig) -> Result<f64> {
    let mut interner = Interner::default();
    let a = FlatTree::new(t1, &mut interner);
    let b = FlatTree::new(t2, &mut interner);
    let l = config.lambda;
    cosine(flat_kernel(&a, &b, l), flat_kernel(&a, &a, l), flat_kernel(&b, &b, l))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub group_id: String,
    /// Normalized similarity per unordered pair `(i, j)`, `i < j`, over the
    /// non-degenerate trees.
    pub pairwise_similarity: BTreeMap<(usize, usize), f64>,
    /// `100 · (1 − mean similarity)`.
    pub difference: f64,
    /// Trees left out because their self-kernel is zero.
    pub degenerate: usize,
}

/// Mean tree-kernel difference of a group of parses.
pub fn kernel_difference(group_id: &str, trees: &[ParseTree], config: &KernelConfig) -> Result<KernelReport> {
    config.validate()?;
    if !config.normalize {
        return Err(Error::InvalidConfig(
            "the kernel difference is defined on normalized similarities".into(),
        ));
    }
    if trees.len() < 2 {
        return Err(Error::TooFewCandidates {
            group_id: group_id.to_owned(),
            k: trees.len(),
        });
    }
    let mut interner = Interner::default();
    let flats: Vec<FlatTree> = trees.iter().map(|t| FlatTree::new(t, &mut interner)).collect();
    let selfk: Vec<f64> = flats.iter().map(|f| flat_kernel(f, f, config.lambda)).collect();
    let live: Vec<usize> = (0..flats.len()).filter(|&i| selfk[i] > 0.0).collect();
    let degenerate = flats.len() - live.len();
    if live.len() < 2 {
        return Err(Error::DegenerateTree);
    }

    let mut pairwise_similarity = BTreeMap::new();
    let mut sum = 0.0;
    for (x, &i) in live.iter().enumerate() {
        for &j in &live[x + 1..] {
            let s = cosine(flat_kernel(&flats[i], &flats[j], config.lambda), selfk[i], selfk[j])?;
            sum += s;
            pairwise_similarity.insert((i, j), s);
        }
    }
    let mean = sum / pairwise_similarity.len() as f64;
    Ok(KernelReport {
        group_id: group_id.to_owned(),
        pairwise_similarity,
        difference: (100.0 * (1.0 - mean)).clamp(0.0, 100.0),
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelGroupResult {
    pub group_id: String,
    pub report: Result<KernelReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelDatasetScore {
    /// Mean difference over the groups that scored.
    pub mean: f64,
    pub per_group: Vec<KernelGroupResult>,
    pub failures: usize,
}

/// Kernel difference for many groups, in input order.
pub fn dataset_kernel_difference(
    groups: &[(String, Vec<ParseTree>)],
    config: &KernelConfig,
    exec: Execution,
) -> Result<KernelDatasetScore> {
    config.validate()?;
    if groups.is_empty() {
        return Err(Error::NoGroups);
    }
    let reports = exec.map(groups, |(id, trees)| kernel_difference(id, trees, config));
    let mut sum = 0.0;
    let mut ok = 0usize;
    let per_group: Vec<KernelGroupResult> = groups
        .iter()
        .zip(reports)
        .map(|((id, _), report)| {
            if let Ok(r) = &report {
                sum += r.difference;
                ok += 1;
            }
            KernelGroupResult {
                group_id: id.clone(),
                report,
            }
        })
        .collect();
    if ok == 0 {
        return Err(Error::NoGroups);
    }
    Ok(KernelDatasetScore {
        mean: sum / ok as f64,
        failures: groups.len() - ok,
        per_group,
    })
}

/// Number of SST fragments rooted at `node`, saturating.
fn rooted_fragment_count(node: &ParseTree) -> u128 {
    node.children()
        .iter()
        .fold(1u128, |acc, c| acc.saturating_mul(1 + rooted_fragment_count(c)))
}

/// Total number of SST fragments in a tree, saturating.
pub fn fragment_count(tree: &ParseTree) -> u128 {
    tree.children().iter().fold(rooted_fragment_count(tree), |acc, c| {
        acc.saturating_add(fragment_count(c))
    })
}

fn rooted_fragments(node: &ParseTree, dummy: &str) -> Vec<String> {
    if node.is_preterminal() {
        return vec![format!("({} {})", node.label, dummy)];
    }
    let mut partial = vec![format!("({}", node.label)];
    for child in node.children() {
        let mut options = vec![child.label.clone()];
        options.extend(rooted_fragments(child, dummy));
        partial = partial
            .iter()
            .flat_map(|p| options.iter().map(move |o| format!("{p} {o}")))
            .collect();
    }
    partial.into_iter().map(|p| p + ")").collect()
}

fn collect_fragments(node: &ParseTree, dummy: &str, out: &mut HashMap<String, u64>) {
    for f in rooted_fragments(node, dummy) {
        *out.entry(f).or_insert(0) += 1;
    }
    for c in node.children() {
        collect_fragments(c, dummy, out);
    }
}

/// Brute-force multiset of SST fragments in canonical bracketed form.
///
/// A fragment keeps whole productions: each node in it has either all of its
/// children or none. Unexpanded nodes appear as bare labels and pre-terminals
/// always carry the dummy token, so `(A (B x))` yields `(A B)`, `(A (B <T>))`
/// and `(B <T>)`.
pub fn enumerate_fragments(tree: &ParseTree, config: &KernelConfig) -> Result<HashMap<String, u64>> {
    let dummy = config.dummy_token.as_str();
    if let Some(label) = tree.labels().into_iter().find(|&l| l == dummy) {
        return Err(Error::AmbiguousLabel(label.to_owned()));
    }
    let count = fragment_count(tree);
    if count > config.fragment_cap as u128 {
        return Err(Error::FragmentCap {
            count,
            cap: config.fragment_cap,
        });
    }
    let mut out = HashMap::new();
    collect_fragments(tree, dummy, &mut out);
    Ok(out)
}

/// `Σ_f c1(f) · c2(f) · λ^size(f)`, where size counts the productions in `f`.
pub fn fragment_dot(a: &HashMap<String, u64>, b: &HashMap<String, u64>, lambda: f64) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small
        .iter()
        .filter_map(|(f, &c1)| {
            let c2 = *large.get(f)?;
            let size = f.matches('(').count() as i32;
            Some((c1 * c2) as f64 * lambda.powi(size))
        })
        .sum()
}
