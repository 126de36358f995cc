use std::fmt;
use std::sync::Arc;

use crate::model::LocaleId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("segment lives on locale {segment} but was accessed from {current:?}")]
    OffLocaleAccess {
        segment: LocaleId,
        current: Option<LocaleId>,
    },

    #[error("locale {locale} is out of range for a runtime with {count} locales")]
    InvalidLocale { locale: LocaleId, count: usize },

    #[error("index {index} out of bounds for length {len}")]
    IndexOutOfBounds { index: usize, len: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid trim bounds [{first}, {last}) over {len} elements")]
    InvalidTrim { first: usize, last: usize, len: usize },

    #[error("storage {0} accessed after it was freed")]
    UseAfterFree(usize),

    #[error("storage {0} freed twice")]
    DoubleFree(usize),

    #[error("allocation of {bytes} bytes failed")]
    OutOfMemory { bytes: usize },

    #[error("zip over non-aligned segmented ranges is rejected in strict mode")]
    NonAlignedZip,

    #[error("mutable access through a view that touches storage {0} more than once")]
    AliasedWrite(usize),

    #[error("invalid tiling: {0}")]
    InvalidTiling(String),

    #[error("tile ({row}, {col}) outside a {grid_rows}x{grid_cols} tile grid")]
    TileOutOfBounds {
        row: usize,
        col: usize,
        grid_rows: usize,
        grid_cols: usize,
    },

    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    EntryOutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("runtime initialisation failed: {0}")]
    RuntimeInit(String),

    #[error(transparent)]
    Task(#[from] TaskError),

    #[error(transparent)]
    Tasks(#[from] AggregateError),
}

/// Failure of a single submitted task.
#[derive(Debug, Clone, thiserror::Error)]
pub enum TaskError {
    #[error("task on locale {locale} panicked: {message}")]
    Panicked { locale: LocaleId, message: String },

    #[error("task on locale {locale} failed: {source}")]
    Failed {
        locale: LocaleId,
        #[source]
        source: Arc<Error>,
    },

    #[error("worker for locale {0} shut down before the task completed")]
    Lost(LocaleId),

    #[error("waiting on locale {0}'s queue from one of its own tasks would deadlock")]
    WouldDeadlock(LocaleId),
}

/// Every failure from a batch of tickets, keyed by ticket position.
#[derive(Debug, Clone)]
pub struct AggregateError {
    pub failures: Vec<(usize, TaskError)>,
}

impl fmt::Display for AggregateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} task(s) failed:", self.failures.len())?;
        for (index, err) in &self.failures {
            write!(f, " [#{index}: {err}]")?;
        }
        Ok(())
    }
}

impl std::error::Error for AggregateError {}
