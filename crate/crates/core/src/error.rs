use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("n-gram order must be at least 1, got {0}")]
    InvalidOrder(usize),

    #[error("reference sentence is empty")]
    EmptyReference,

    #[error("group {group_id:?} has {k} candidate(s), at least 2 are required")]
    TooFewCandidates { group_id: String, k: usize },

    #[error("no groups left to score")]
    NoGroups,

    #[error("parse error at character {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("tree root {0:?} is a leaf and has no first split")]
    LeafRoot(String),

    #[error("tree has a zero self-kernel")]
    DegenerateTree,

    #[error("fragment enumeration would produce {count} fragments (cap {cap})")]
    FragmentCap { count: u128, cap: u64 },

    #[error("label {0:?} collides with the dummy terminal token")]
    AmbiguousLabel(String),

    #[error("{what}: {left} vs {right} lines")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("need {needed} syntactic groups, only {available} available")]
    NotEnoughBuckets { needed: usize, available: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training corpus is empty")]
    EmptyCorpus,

    #[error("token {0:?} is not in the model vocabulary")]
    UnknownToken(String),

    #[error("model file: {0}")]
    Model(String),
}
