//! A behavioral emulator of Babbage's Analytical Engine.
//!
//! The crate models the engine at the level a programmer of the machine would
//! see it: a store of signed decimal variables, a mill with ingress/egress
//! registers and a table of multiples, five punched-card streams, and a
//! sequencer that produces an execution trace. Each mill operation also
//! reports a ledger of micro-operations, which the [`timing`] module prices
//! against a cost model calibrated to Babbage's own throughput estimates.
//!
//! A small [`difference_engine`] tabulator is included for the method of
//! differences, including the "tail feedback" mode.

pub mod axis;
pub mod cards;
pub mod carriage;
pub mod difference_engine;
pub mod engine;
mod error;
pub mod mill;
pub mod store;
pub mod timing;

pub use axis::{AxisValue, Sign, WideValue};
pub use cards::{Card, CardDecks, Condition, Opcode, StreamId};
pub use carriage::CarriageMode;
pub use engine::{Engine, MachineConfig, RunOutcome, TraceRecord};
pub use error::{Error, Result};
pub use mill::{Mill, MultVariant};
pub use store::{ReadMode, Store};
pub use timing::{CostModel, MicroOps, TraceCost};
