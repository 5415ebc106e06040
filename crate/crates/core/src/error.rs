use thiserror::Error;

use crate::seqcode::FinSeq;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("prefix length {n} exceeds sequence length {len}")]
    PrefixOutOfRange { len: usize, n: usize },

    #[error("sequence code decodes to an entry that does not fit in 64 bits")]
    EntryOverflow,

    #[error("level {depth} has more than {cap} nodes")]
    LevelCapExceeded { depth: usize, cap: usize },

    #[error("no child of {node} found within {cap} candidates")]
    SearchCapExceeded { node: FinSeq, cap: u64 },

    #[error("{op} does not support {kind} bars")]
    KindNotSupported {
        op: &'static str,
        kind: &'static str,
    },

    #[error("malformed block code {code}: {reason}")]
    MalformedCode { code: FinSeq, reason: &'static str },

    #[error("no commitment along {node}*0^w within depth {depth}")]
    NoCommitment { node: FinSeq, depth: usize },

    #[error("no uniform bound up to depth {max_depth}")]
    NotFoundWithinBudget { max_depth: usize },

    #[error("bound {searched} from the bar search could not be certified up to depth {max_depth}")]
    VerificationFailed { searched: usize, max_depth: usize },

    #[error("no net point of I({level}) lies close enough to the point")]
    NoNetCandidate { level: u32 },

    #[error("precision: {0}")]
    Precision(String),

    #[error("validation failed: {what} (witness {witness})")]
    Validation { what: String, witness: String },

    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema: {0}")]
    Schema(String),

    #[error("unknown {kind} id `{id}`")]
    UnknownId { kind: &'static str, id: String },

    #[error("conversion from {from} to {to} is not supported")]
    UnsupportedDirection { from: &'static str, to: String },
}

impl Error {
    pub(crate) fn validation(what: impl Into<String>, witness: impl ToString) -> Self {
        Error::Validation {
            what: what.into(),
            witness: witness.to_string(),
        }
    }
}
