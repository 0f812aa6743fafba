use thiserror::Error;

use crate::cards::StreamId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("value does not fit in {width} digits")]
    OverflowWidth { width: usize },

    #[error("invalid decimal {0:?}")]
    InvalidDecimal(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: {card} cannot be placed in stream {stream}")]
    Placement {
        line: usize,
        card: String,
        stream: StreamId,
    },

    #[error("pending column entry {value} at position {position} exceeds 18")]
    InvalidColumn { position: usize, value: u8 },

    #[error("hoarding carriage already holds {0} additions")]
    HoardOverflow(usize),

    #[error("addend width {got} does not match hoard width {expected}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("address {addr} is not a store cell (capacity {capacity})")]
    BadAddress { addr: usize, capacity: usize },

    #[error("division by zero")]
    DivisionByZero,

    #[error("card stream {0} is exhausted")]
    StreamExhausted(StreamId),

    #[error("seek by {offset} from card {cursor} leaves stream {stream} (length {len})")]
    SeekOutOfRange {
        stream: StreamId,
        cursor: usize,
        offset: i64,
        len: usize,
    },

    #[error("trace step {step}: {message}")]
    TraceMismatch { step: usize, message: String },

    #[error("run exceeded {0} steps")]
    RunawayGuard(u64),

    #[error("table overflow at row {row}")]
    TableOverflow { row: usize },

    #[error("calibration infeasible: {0}")]
    CalibrationInfeasible(String),

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
}
