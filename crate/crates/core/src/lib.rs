//! Compositional verification of almost-sure Büchi objectives on string
//! diagrams of rightward-open MDPs.
//!
//! The crate answers one question — given an entrance of a composed MDP, is
//! there a strategy that visits a Büchi vertex infinitely often with
//! probability one? — by four interchangeable methods that must agree on
//! every instance:
//!
//! * [`diagram::monolithic_check`]: flatten the diagram and run the classical
//!   `νY.μX` Büchi fixpoint on the monolithic graph.
//! * [`compose::bottom_up`]: compute per-leaf solutions (all effects of
//!   no-lose strategies) and compose them along the diagram term.
//! * [`shortcut::shortcut_check`]: materialize the shortcut graph whose
//!   probabilistic vertices are effects, then run the classical fixpoint.
//! * [`refinement::strat_ref`]: iterative strategy refinement over one
//!   maximum effect per entrance; polynomial time, never builds the full
//!   shortcut graph.

pub mod cli;
pub mod compose;
pub mod diagfile;
pub mod diagram;
pub mod export;
pub mod fixtures;
pub mod generator;
pub mod graph;
pub mod import;
pub mod oracle;
pub mod refinement;
pub mod report;
pub mod romdp;
pub mod set;
pub mod shortcut;
pub mod solution;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A structural validation failure; every model invariant has its own
/// variant and error code.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown vertex id {id}")]
    UnknownVertexId { id: usize },
    #[error("unknown vertex `{name}`")]
    UnknownVertex { name: String },
    #[error("duplicate vertex `{name}`")]
    DuplicateVertex { name: String },
    #[error("vertex `{name}` declared in both partitions")]
    PartitionOverlap { name: String },
    #[error("edge `{from}` -> `{to}` stays within one partition")]
    AlternationViolation { from: String, to: String },
    #[error("Büchi vertex `{vertex}` is not probabilistic")]
    BuchiNotProbabilistic { vertex: String },
    #[error("open end `{vertex}` is not a player-1 vertex")]
    OpenEndNotPlayer1 { vertex: String },
    #[error("open end `{vertex}` listed twice")]
    OpenEndDuplicate { vertex: String },
    #[error("vertex `{vertex}` is both an entrance and an exit")]
    OpenEndOverlap { vertex: String },
    #[error("entrance `{vertex}` has a predecessor")]
    EntranceHasPredecessor { vertex: String },
    #[error("exit `{vertex}` has a successor")]
    ExitHasSuccessor { vertex: String },
    #[error("roMDP has {count} exits, more than the supported {max}")]
    TooManyExits { count: usize, max: usize },
    #[error("arity mismatch at `{path}`: {detail}")]
    ArityMismatch { path: String, detail: String },
    #[error("trace at `{path}` needs at least one entrance and one exit, got {m} -> {n}")]
    TraceOnClosed { path: String, m: usize, n: usize },
    #[error("unknown leaf `{name}` at `{path}`")]
    UnknownLeaf { name: String, path: String },
    #[error("strategy at `{vertex}` chooses `{chosen}`, which is not a successor")]
    ChoiceNotSuccessor { vertex: String, chosen: String },
    #[error("entrance index {index} out of range (roMDP has {count} entrances)")]
    EntranceOutOfRange { index: usize, count: usize },
    #[error("exit index {index} out of range (roMDP has {count} exits)")]
    ExitOutOfRange { index: usize, count: usize },
}

impl ModelError {
    /// Stable machine-readable code, one per invariant.
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::UnknownVertexId { .. } => "E_UNKNOWN_ID",
            ModelError::UnknownVertex { .. } => "E_UNKNOWN_VERTEX",
            ModelError::DuplicateVertex { .. } => "E_DUPLICATE_VERTEX",
            ModelError::PartitionOverlap { .. } => "E_PARTITION",
            ModelError::AlternationViolation { .. } => "E_ALTERNATION",
            ModelError::BuchiNotProbabilistic { .. } => "E_BUCHI_PARTITION",
            ModelError::OpenEndNotPlayer1 { .. } => "E_OPEN_END_PARTITION",
            ModelError::OpenEndDuplicate { .. } => "E_OPEN_END_DUP",
            ModelError::OpenEndOverlap { .. } => "E_OPEN_END_OVERLAP",
            ModelError::EntranceHasPredecessor { .. } => "E_ENTRANCE_PRE",
            ModelError::ExitHasSuccessor { .. } => "E_EXIT_POST",
            ModelError::TooManyExits { .. } => "E_EXIT_LIMIT",
            ModelError::ArityMismatch { .. } => "E_ARITY",
            ModelError::TraceOnClosed { .. } => "E_TRACE_CLOSED",
            ModelError::UnknownLeaf { .. } => "E_UNKNOWN_LEAF",
            ModelError::ChoiceNotSuccessor { .. } => "E_STRATEGY_CHOICE",
            ModelError::EntranceOutOfRange { .. } => "E_ENTRANCE_RANGE",
            ModelError::ExitOutOfRange { .. } => "E_EXIT_RANGE",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("validation error [{code}]: {inner}", code = .0.code(), inner = .0)]
    Model(#[from] ModelError),
    #[error("size guard exceeded: {what} is {actual}, limit {limit}")]
    SizeGuard {
        what: String,
        actual: u64,
        limit: u64,
    },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("internal invariant violation: {0}")]
    Internal(String),
    #[error("validation error [{code}] at {line}:{col}: {source}", code = .source.code())]
    ModelAt {
        line: usize,
        col: usize,
        source: ModelError,
    },
    #[error("unsatisfiable generator profile: {0}")]
    Profile(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }

    pub fn guard(what: impl Into<String>, actual: u64, limit: u64) -> Self {
        Error::SizeGuard {
            what: what.into(),
            actual,
            limit,
        }
    }

    /// Process exit code: 2 validation, 3 size guard, 4 internal invariant
    /// violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Model(_)
            | Error::ModelAt { .. }
            | Error::Profile(_)
            | Error::Usage(_)
            | Error::Io(_) => 2,
            Error::SizeGuard { .. } => 3,
            Error::Contract(_) | Error::Internal(_) => 4,
        }
    }
}
