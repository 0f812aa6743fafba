//! The sequencer: reads operation cards, fetches operands through the
//! variable and number cards, drives the mill and records a trace.
//!
//! Decoding of one operation card:
//!
//! | card            | operand cards consumed                               |
//! |-----------------|------------------------------------------------------|
//! | ADD SUB MUL DIV | V1 (first source), V2 (second source), V1 (destination) |
//! | LOAD            | N1 (literal), V1 (destination)                       |
//! | PRINT           | V1 (variable to print)                               |
//! | HALT            | none                                                 |
//! | JMP(s,k,c)      | none; moves stream `s` by `k` cards when `c` holds    |
//!
//! Address 0 as a source reuses the current A1/A2, as a destination leaves
//! the result in R only, and as a PRINT operand prints R.

use std::fmt;

use crate::axis::AxisValue;
use crate::cards::{Card, CardDecks, Condition, Opcode, StreamId};
use crate::carriage::CarriageMode;
use crate::error::{Error, Result};
use crate::mill::{ArithOp, Mill, MultVariant};
use crate::store::{ReadMode, Store, DEFAULT_CAPACITY};
use crate::timing::{CostModel, MicroOps, TraceCost};

pub const DEFAULT_DIGITS: usize = 50;
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct MachineConfig {
    /// Digits per store variable.
    pub digits: usize,
    pub store_size: usize,
    pub read_mode: ReadMode,
    pub mult_variant: MultVariant,
    pub carriage: CarriageMode,
    pub max_steps: u64,
    pub cost_model: CostModel,
}

impl Default for MachineConfig {
    fn default() -> Self {
        Self {
            digits: DEFAULT_DIGITS,
            store_size: DEFAULT_CAPACITY,
            read_mode: ReadMode::default(),
            mult_variant: MultVariant::default(),
            carriage: CarriageMode::default(),
            max_steps: DEFAULT_MAX_STEPS,
            cost_model: CostModel::default(),
        }
    }
}

impl MachineConfig {
    pub fn empty_store(&self) -> Store {
        Store::new(self.store_size, self.digits, self.read_mode)
    }
}

/// What one step did to the store and the printer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Effect {
    Arithmetic {
        sources: [usize; 2],
        operands: [AxisValue; 2],
        dest: usize,
        /// The low half of R, as written to `dest`.
        result: AxisValue,
    },
    Load {
        dest: usize,
        value: AxisValue,
    },
    Print {
        addr: usize,
        value: AxisValue,
    },
    Jump {
        target: StreamId,
        offset: i64,
        taken: bool,
    },
    Halt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub step: u64,
    /// The operation or combinatorial card that drove this step.
    pub card: Card,
    /// Cards read, as (stream, index) in reading order.
    pub consumed: Vec<(StreamId, usize)>,
    pub effect: Effect,
    /// The mill's run-up flag after the step.
    pub runup: bool,
    pub ops: MicroOps,
    pub cost: TraceCost,
}

impl TraceRecord {
    pub fn opcode(&self) -> &'static str {
        match &self.card {
            Card::Operation(op) => op.name(),
            _ => "JMP",
        }
    }
}

/// Tab-separated: step, opcode, cards, addresses, values, runup, cost.
impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cards = self
            .consumed
            .iter()
            .map(|(s, i)| format!("{s}:{i}"))
            .collect::<Vec<_>>()
            .join(",");
        let (addresses, values) = match &self.effect {
            Effect::Arithmetic {
                sources,
                operands,
                dest,
                result,
            } => (
                format!("{},{}>{}", sources[0], sources[1], dest),
                format!("{},{}>{}", operands[0], operands[1], result),
            ),
            Effect::Load { dest, value } => (format!(">{dest}"), format!(">{value}")),
            Effect::Print { addr, value } => (addr.to_string(), value.to_string()),
            Effect::Jump {
                target,
                offset,
                taken,
            } => (
                format!("{target}{offset:+}"),
                if *taken { "taken" } else { "not-taken" }.to_string(),
            ),
            Effect::Halt => ("-".to_string(), "-".to_string()),
        };
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.step,
            self.opcode(),
            if cards.is_empty() { "-" } else { &cards },
            addresses,
            values,
            u8::from(self.runup),
            self.cost.cycles
        )
    }
}

/// Serializes a trace, one line per record.
pub fn format_trace(trace: &[TraceRecord]) -> String {
    trace.iter().map(|r| format!("{r}\n")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub store: Store,
    pub trace: Vec<TraceRecord>,
    pub printer: Vec<String>,
    pub total: TraceCost,
}

/// Engine state for one run.
#[derive(Debug, Clone)]
pub struct Engine {
    config: MachineConfig,
    store: Store,
    mill: Mill,
    decks: CardDecks,
    trace: Vec<TraceRecord>,
    printer: Vec<String>,
    halted: bool,
}

impl Engine {
    /// Checks every card against the machine before anything runs: variable
    /// cards must address the store (or 0) and literals must fit an axis.
    pub fn new(mut decks: CardDecks, store: Store, config: MachineConfig) -> Result<Self> {
        if store.width() != config.digits {
            return Err(Error::OverflowWidth {
                width: config.digits,
            });
        }
        for id in StreamId::ALL {
            for card in decks.stream(id).cards() {
                match card {
                    Card::Variable(addr) if *addr > store.capacity() => {
                        return Err(Error::BadAddress {
                            addr: *addr,
                            capacity: store.capacity(),
                        })
                    }
                    Card::Number(v) if v.significant_digits() > config.digits => {
                        return Err(Error::OverflowWidth {
                            width: config.digits,
                        })
                    }
                    _ => {}
                }
            }
        }
        decks.rewind();
        Ok(Self {
            mill: Mill::new(config.digits),
            config,
            store,
            decks,
            trace: Vec::new(),
            printer: Vec::new(),
            halted: false,
        })
    }

    pub fn config(&self) -> &MachineConfig {
        &self.config
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn mill(&self) -> &Mill {
        &self.mill
    }

    pub fn decks(&self) -> &CardDecks {
        &self.decks
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn printer(&self) -> &[String] {
        &self.printer
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }

    pub fn step_count(&self) -> u64 {
        self.trace.len() as u64
    }

    pub fn total_cost(&self) -> TraceCost {
        let cycles = self.trace.iter().map(|r| r.cost.cycles).sum();
        TraceCost {
            cycles,
            seconds: cycles as f64 * self.config.cost_model.unit_seconds,
        }
    }

    fn take(&mut self, id: StreamId, consumed: &mut Vec<(StreamId, usize)>) -> Result<Card> {
        let index = self.decks.stream(id).cursor();
        let card = self.decks.advance(id)?;
        consumed.push((id, index));
        Ok(card)
    }

    fn take_variable(
        &mut self,
        id: StreamId,
        consumed: &mut Vec<(StreamId, usize)>,
    ) -> Result<usize> {
        match self.take(id, consumed)? {
            Card::Variable(addr) => Ok(addr),
            // stream placement rules keep other cards out of variable streams
            other => unreachable!("{other} in a variable stream"),
        }
    }

    /// Executes one operation card. Returns `None` once the engine has halted
    /// or the operation stream has run out.
    pub fn step(&mut self) -> Result<Option<&TraceRecord>> {
        if self.halted {
            return Ok(None);
        }
        let mut consumed = Vec::new();
        let card = match self.take(StreamId::Ops, &mut consumed) {
            Ok(card) => card,
            Err(Error::StreamExhausted(StreamId::Ops)) => {
                self.halted = true;
                return Ok(None);
            }
            Err(e) => return Err(e),
        };

        let width = self.config.digits;
        let mut ops = MicroOps::default();
        let effect = match &card {
            Card::Operation(op) if op.is_arithmetic() => {
                let src1 = self.take_variable(StreamId::Vars1, &mut consumed)?;
                let src2 = self.take_variable(StreamId::Vars2, &mut consumed)?;
                if src1 != 0 {
                    self.mill.a1 = self.store.read(src1)?;
                    ops.mill_transfers += 1;
                }
                if src2 != 0 {
                    self.mill.a2 = self.store.read(src2)?;
                    ops.mill_transfers += 1;
                }
                let operands = [self.mill.a1.clone(), self.mill.a2.clone()];
                let carriage = self.config.carriage;
                ops += match op {
                    Opcode::Add => self.mill.add_sub(ArithOp::Add, carriage),
                    Opcode::Sub => self.mill.add_sub(ArithOp::Sub, carriage),
                    Opcode::Mul => self.mill.multiply(self.config.mult_variant, carriage),
                    Opcode::Div => self.mill.divide(carriage)?,
                    _ => unreachable!(),
                };
                let dest = self.take_variable(StreamId::Vars1, &mut consumed)?;
                let (result, _) = self.mill.r.low_half();
                if dest != 0 {
                    self.store.write(dest, result.clone())?;
                    ops.store_transfers += 1;
                }
                Effect::Arithmetic {
                    sources: [src1, src2],
                    operands,
                    dest,
                    result,
                }
            }
            Card::Operation(Opcode::Load) => {
                let literal = match self.take(StreamId::Nums1, &mut consumed)? {
                    Card::Number(v) => v,
                    other => unreachable!("{other} in a number stream"),
                };
                let value = literal.resize(width)?;
                let dest = self.take_variable(StreamId::Vars1, &mut consumed)?;
                if dest == 0 {
                    return Err(Error::BadAddress {
                        addr: 0,
                        capacity: self.store.capacity(),
                    });
                }
                self.store.write(dest, value.clone())?;
                ops.store_transfers += 1;
                Effect::Load { dest, value }
            }
            Card::Operation(Opcode::Print) => {
                let addr = self.take_variable(StreamId::Vars1, &mut consumed)?;
                let value = if addr == 0 {
                    self.mill.r.low_half().0
                } else {
                    self.store.read(addr)?
                };
                ops.prints += 1;
                self.printer.push(value.to_string());
                Effect::Print { addr, value }
            }
            Card::Operation(Opcode::Halt) => {
                self.halted = true;
                Effect::Halt
            }
            Card::Combinatorial {
                target,
                offset,
                condition,
            } => {
                let taken = match condition {
                    Condition::Always => true,
                    Condition::OnRunup => self.mill.runup,
                };
                if taken {
                    self.decks.seek(*target, *offset)?;
                }
                Effect::Jump {
                    target: *target,
                    offset: *offset,
                    taken,
                }
            }
            other => unreachable!("{other} in the operation stream"),
        };
        ops.cards += consumed.len() as u64;

        let record = TraceRecord {
            step: self.trace.len() as u64,
            card,
            consumed,
            effect,
            runup: self.mill.runup,
            cost: self.config.cost_model.cost(&ops),
            ops,
        };
        self.trace.push(record);
        Ok(self.trace.last())
    }

    /// Steps until halted. Fails with [`Error::RunawayGuard`] once the trace
    /// reaches `max_steps` records without halting; the engine keeps its
    /// state for inspection.
    pub fn run_to_halt(&mut self) -> Result<()> {
        while !self.halted {
            if self.step_count() >= self.config.max_steps {
                return Err(Error::RunawayGuard(self.config.max_steps));
            }
            self.step()?;
        }
        Ok(())
    }

    pub fn into_outcome(self) -> RunOutcome {
        let total = self.total_cost();
        RunOutcome {
            store: self.store,
            trace: self.trace,
            printer: self.printer,
            total,
        }
    }
}

/// Runs a deck from its first cards to a halt.
pub fn run(decks: CardDecks, store: Store, config: MachineConfig) -> Result<RunOutcome> {
    let mut engine = Engine::new(decks, store, config)?;
    engine.run_to_halt()?;
    Ok(engine.into_outcome())
}

/// Re-applies the store effects recorded in a trace, without the mill.
/// Every recorded read is checked against the evolving store.
pub fn replay(trace: &[TraceRecord], initial: &Store) -> Result<Store> {
    let mut store = initial.clone();
    for record in trace {
        let mismatch = |message: String| Error::TraceMismatch {
            step: record.step as usize,
            message,
        };
        let read = |store: &mut Store, addr: usize, expected: &AxisValue| -> Result<()> {
            if addr == 0 {
                return Ok(());
            }
            let got = store.read(addr).map_err(|e| mismatch(e.to_string()))?;
            if &got != expected {
                return Err(mismatch(format!(
                    "V{addr} holds {got}, trace read {expected}"
                )));
            }
            Ok(())
        };
        match &record.effect {
            Effect::Arithmetic {
                sources,
                operands,
                dest,
                result,
            } => {
                read(&mut store, sources[0], &operands[0])?;
                read(&mut store, sources[1], &operands[1])?;
                if *dest != 0 {
                    store
                        .write(*dest, result.clone())
                        .map_err(|e| mismatch(e.to_string()))?;
                }
            }
            Effect::Load { dest, value } => store
                .write(*dest, value.clone())
                .map_err(|e| mismatch(e.to_string()))?,
            Effect::Print { addr, value } => read(&mut store, *addr, value)?,
            Effect::Jump { .. } | Effect::Halt => {}
        }
    }
    Ok(store)
}
