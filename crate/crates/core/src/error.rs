//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown worker {0}")]
    UnknownWorker(usize),

    #[error("dangling data ref {0}")]
    DanglingRef(u64),

    #[error("task {task_id} ({kind}) failed: {cause}")]
    TaskFailed {
        task_id: u64,
        kind: String,
        cause: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Cascade training saw a group whose labels are all identical.
    #[error("training group {group} holds a single class; use larger blocks so every group sees both labels")]
    SingleClassGroup { group: String },

    #[error("runtime startup failed: {0}")]
    Startup(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
