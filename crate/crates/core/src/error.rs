use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("truncated stream: needed {needed} more bytes at offset {offset}")]
    Truncated { offset: usize, needed: usize },
    #[error("varint at offset {0} has no terminating byte")]
    MissingTerminator(usize),
    #[error("varint at offset {0} overflows 32 bits")]
    VarintOverflow(usize),
    #[error("stream length mismatch: {0}")]
    LengthMismatch(String),
    #[error("value {value} does not fit in {width} bits")]
    ValueTooWide { value: u32, width: u32 },
    #[error("block holds {got} values, expected {expected}")]
    WrongBlockSize { got: usize, expected: usize },
    #[error("invalid bit width {0}")]
    InvalidWidth(u32),
    #[error("unknown codec {0:?}")]
    UnknownCodec(String),
    #[error("unknown delta mode {0:?}")]
    UnknownDeltaMode(String),
    #[error("exception array for width {0} exhausted")]
    ExceptionsExhausted(u32),
    #[error("exception position {0} out of range")]
    ExceptionPosition(u32),
    #[error("input list is not strictly increasing at index {0}")]
    Unsorted(usize),
    #[error("document id {id} outside [0, {limit})")]
    IdOutOfRange { id: u32, limit: u64 },
    #[error("empty input")]
    EmptyInput,
    #[error("invalid generator parameters: {0}")]
    InvalidSpec(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("corrupt data: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
