use thiserror::Error;

use crate::bitbuf::{BufferId, Window};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("window at offset {offset} with width {width} does not fit in {len} bits")]
    Range {
        offset: usize,
        width: usize,
        len: usize,
    },

    #[error("buffer {0:?} is not allocated")]
    UnknownBuffer(BufferId),

    #[error("windows {0:?} and {1:?} overlap")]
    Aliasing(Window, Window),

    #[error("malformed piece structure: {0}")]
    Structure(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cannot free {requested} bits with only {allocated} allocated")]
    Accounting { requested: u64, allocated: u64 },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}
