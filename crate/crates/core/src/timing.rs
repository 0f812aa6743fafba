//! Micro-operation ledger and cost model.
//!
//! The barrels of the engine sequence each operation as a series of
//! micro-operations. Here they are only counted: every mill operation returns
//! a [`MicroOps`] ledger and a [`CostModel`] prices it in engine cycles.
//!
//! The default model is fitted so that the emulator reproduces Babbage's
//! quoted throughput: sixty additions (or subtractions) completed and printed
//! per minute, and one minute each for a 50 by 50 digit multiplication and a
//! 100 by 50 digit division.

use std::fmt::Write as _;
use std::ops::{Add, AddAssign};

use nalgebra::{DMatrix, DVector};

use crate::axis::{AxisValue, Sign, WideValue};
use crate::cards::Opcode;
use crate::engine::MachineConfig;
use crate::error::{Error, Result};
use crate::mill::{self, ArithOp};

/// Counts of micro-operations performed by one or more engine operations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct MicroOps {
    /// Cards read from any stream.
    pub cards: u64,
    /// Variables moved from the store into the mill.
    pub mill_transfers: u64,
    /// Results moved from the mill back into the store.
    pub store_transfers: u64,
    pub add_passes: u64,
    /// Wheel positions swept by a ripple carriage.
    pub ripple_digits: u64,
    pub lookahead_resolutions: u64,
    pub hoard_flushes: u64,
    pub table_loads: u64,
    /// Wheel positions moved by shifting, summed over all shifted axes.
    pub shift_digits: u64,
    /// Table axes compared against a partial remainder.
    pub comparisons: u64,
    pub prints: u64,
}

/// Number of micro-operation kinds.
pub const KINDS: usize = 11;

/// Names of the micro-operation kinds, in the order used by [`MicroOps::counts`].
pub const KIND_NAMES: [&str; KINDS] = [
    "card",
    "mill_transfer",
    "store_transfer",
    "add_pass",
    "ripple_digit",
    "lookahead",
    "hoard_flush",
    "table_load",
    "shift_digit",
    "compare",
    "print",
];

impl MicroOps {
    pub fn counts(&self) -> [u64; KINDS] {
        [
            self.cards,
            self.mill_transfers,
            self.store_transfers,
            self.add_passes,
            self.ripple_digits,
            self.lookahead_resolutions,
            self.hoard_flushes,
            self.table_loads,
            self.shift_digits,
            self.comparisons,
            self.prints,
        ]
    }

    pub fn is_empty(&self) -> bool {
        self.counts().iter().all(|&c| c == 0)
    }
}

impl Add for MicroOps {
    type Output = MicroOps;

    fn add(self, rhs: MicroOps) -> MicroOps {
        MicroOps {
            cards: self.cards + rhs.cards,
            mill_transfers: self.mill_transfers + rhs.mill_transfers,
            store_transfers: self.store_transfers + rhs.store_transfers,
            add_passes: self.add_passes + rhs.add_passes,
            ripple_digits: self.ripple_digits + rhs.ripple_digits,
            lookahead_resolutions: self.lookahead_resolutions + rhs.lookahead_resolutions,
            hoard_flushes: self.hoard_flushes + rhs.hoard_flushes,
            table_loads: self.table_loads + rhs.table_loads,
            shift_digits: self.shift_digits + rhs.shift_digits,
            comparisons: self.comparisons + rhs.comparisons,
            prints: self.prints + rhs.prints,
        }
    }
}

impl AddAssign for MicroOps {
    fn add_assign(&mut self, rhs: MicroOps) {
        *self = *self + rhs;
    }
}

/// Cost of some work in engine cycles.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TraceCost {
    pub cycles: u64,
    pub seconds: f64,
}

/// Cycles per micro-operation kind and the duration of one cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    pub unit_seconds: f64,
    pub cycles: [u64; KINDS],
}

/// Length of one engine cycle in the default model.
pub const DEFAULT_UNIT_SECONDS: f64 = 1e-5;

// Produced by `calibrate(&CalibrationTargets::default(), &MachineConfig::default())`.
const DEFAULT_CYCLES: [u64; KINDS] = [
    1542, 5481, 7741, 38325, 1000, 25308, 30000, 425190, 469, 2225, 8415,
];

impl Default for CostModel {
    fn default() -> Self {
        Self {
            unit_seconds: DEFAULT_UNIT_SECONDS,
            cycles: DEFAULT_CYCLES,
        }
    }
}

impl CostModel {
    pub fn cost(&self, ops: &MicroOps) -> TraceCost {
        let cycles = ops
            .counts()
            .iter()
            .zip(&self.cycles)
            .map(|(n, c)| n * c)
            .sum();
        TraceCost {
            cycles,
            seconds: cycles as f64 * self.unit_seconds,
        }
    }

    /// Parses a flat `key = value` file. Keys are `unit_seconds` and the
    /// micro-operation kind names; omitted keys keep their default.
    pub fn parse(text: &str) -> Result<Self> {
        let mut model = CostModel::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config {
                line: n + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "unit_seconds" {
                let unit: f64 = value
                    .parse()
                    .map_err(|_| err(format!("bad number {value:?}")))?;
                if !(unit.is_finite() && unit > 0.0) {
                    return Err(err("unit_seconds must be positive".into()));
                }
                model.unit_seconds = unit;
                continue;
            }
            let kind = KIND_NAMES
                .iter()
                .position(|&k| k == key)
                .ok_or_else(|| err(format!("unknown key {key:?}")))?;
            let cycles: u64 = value
                .parse()
                .map_err(|_| err(format!("bad cycle count {value:?}")))?;
            if cycles == 0 {
                return Err(err(format!("{key} must cost at least one cycle")));
            }
            model.cycles[kind] = cycles;
        }
        Ok(model)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("unit_seconds = {}\n", self.unit_seconds);
        for (name, c) in KIND_NAMES.iter().zip(&self.cycles) {
            let _ = writeln!(out, "{name} = {c}");
        }
        out
    }
}

fn nines(digits: usize, width: usize) -> AxisValue {
    let mut d = vec![9; digits];
    d.resize(width, 0);
    AxisValue::from_digits(Sign::Positive, d)
}

fn power_of_ten(exponent: usize, width: usize) -> AxisValue {
    let mut d = vec![0; width];
    d[exponent] = 1;
    AxisValue::from_digits(Sign::Positive, d)
}

/// Micro-operations of one operation on representative operands.
///
/// Operands are all nines, so every multiplier digit needs an addition; the
/// divisor is a power of ten, which makes every quotient digit a nine. Both
/// are worst cases for the number of additions. `widths` are the significant
/// digits of the first and second operand; for `DIV` the first may be up to
/// twice the axis width.
pub fn canonical_micro_ops(
    opcode: Opcode,
    widths: (usize, usize),
    config: &MachineConfig,
) -> MicroOps {
    let d = config.digits;
    let mode = config.carriage;
    let operand_overhead = MicroOps {
        cards: 4,
        mill_transfers: 2,
        store_transfers: 1,
        ..MicroOps::default()
    };
    match opcode {
        Opcode::Add | Opcode::Sub => {
            let op = if opcode == Opcode::Add {
                ArithOp::Add
            } else {
                ArithOp::Sub
            };
            let (a, b) = (nines(widths.0.min(d), d), nines(widths.1.min(d), d));
            operand_overhead + mill::add_sub(&a, &b, op, mode).ops
        }
        Opcode::Mul => {
            let (a, b) = (nines(widths.0.min(d), d), nines(widths.1.min(d), d));
            operand_overhead + mill::multiply(&a, &b, config.mult_variant, mode).ops
        }
        Opcode::Div => {
            let num = WideValue::from_value(nines(widths.0.min(2 * d), 2 * d));
            let den = power_of_ten(widths.1.clamp(1, d) - 1, d);
            let ops = mill::divide(&num, &den, mode).expect("nonzero divisor").ops;
            operand_overhead + ops
        }
        Opcode::Load => MicroOps {
            cards: 3,
            store_transfers: 1,
            ..MicroOps::default()
        },
        Opcode::Print => MicroOps {
            cards: 2,
            prints: 1,
            ..MicroOps::default()
        },
        Opcode::Halt => MicroOps {
            cards: 1,
            ..MicroOps::default()
        },
    }
}

/// Modeled cost of one operation under `config.cost_model`.
pub fn cost_of_op(opcode: Opcode, widths: (usize, usize), config: &MachineConfig) -> TraceCost {
    config
        .cost_model
        .cost(&canonical_micro_ops(opcode, widths, config))
}

/// Throughput figures the cost model is fitted to.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTargets {
    /// Operand width of the three target operations.
    pub width: usize,
    /// Seconds for one addition whose result is also printed.
    pub add_with_print: f64,
    /// Seconds for a `width` by `width` multiplication.
    pub multiply: f64,
    /// Seconds for a `2 * width` by `width` division.
    pub divide: f64,
    /// Largest accepted relative error of each target.
    pub tolerance: f64,
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        Self {
            width: 50,
            // sixty a minute
            add_with_print: 1.0,
            multiply: 60.0,
            divide: 60.0,
            tolerance: 0.10,
        }
    }
}

// Starting guesses in seconds. The fit stays as close to these as it can in
// relative terms while meeting the targets exactly.
const PRIOR_SECONDS: [f64; KINDS] = [0.05, 0.1, 0.1, 0.2, 0.01, 0.15, 0.3, 3.0, 0.002, 0.02, 0.3];

/// Per-target micro-operation counts: add+print, multiply, divide.
pub fn target_micro_ops(targets: &CalibrationTargets, config: &MachineConfig) -> [MicroOps; 3] {
    let w = targets.width;
    let config = MachineConfig {
        digits: config.digits.max(w),
        ..config.clone()
    };
    [
        canonical_micro_ops(Opcode::Add, (w, w), &config)
            + canonical_micro_ops(Opcode::Print, (w, 0), &config),
        canonical_micro_ops(Opcode::Mul, (w, w), &config),
        canonical_micro_ops(Opcode::Div, (2 * w, w), &config),
    ]
}

/// Fits per-kind cycle costs to the throughput targets.
///
/// Among all positive cost vectors meeting the targets exactly, picks the one
/// with the smallest relative deviation from a fixed prior (a weighted
/// minimum-norm solution). Kinds whose cost would drop below a fifth of the
/// prior are pinned there and the rest re-fitted.
pub fn calibrate(targets: &CalibrationTargets, config: &MachineConfig) -> Result<CostModel> {
    let rows = target_micro_ops(targets, config);
    let goal = [targets.add_with_print, targets.multiply, targets.divide];
    if goal.iter().any(|&g| !(g.is_finite() && g > 0.0)) {
        return Err(Error::CalibrationInfeasible(
            "targets must be positive".into(),
        ));
    }

    let counts = DMatrix::from_fn(3, KINDS, |i, j| rows[i].counts()[j] as f64);
    let mut seconds: Vec<f64> = PRIOR_SECONDS.to_vec();
    let mut pinned = [false; KINDS];
    // Kinds that none of the target operations use keep their prior.
    for j in 0..KINDS {
        if (0..3).all(|i| counts[(i, j)] == 0.0) {
            pinned[j] = true;
        }
    }

    for _ in 0..=KINDS {
        let free: Vec<usize> = (0..KINDS).filter(|&j| !pinned[j]).collect();
        if free.is_empty() {
            return Err(Error::CalibrationInfeasible(
                "no free cost left to fit".into(),
            ));
        }
        let residual = DVector::from_fn(3, |i, _| {
            goal[i] - (0..KINDS).map(|j| counts[(i, j)] * seconds[j]).sum::<f64>()
        });
        // x_free = prior + W N^T (N W N^T)^-1 residual, W = diag(prior^2)
        let n = DMatrix::from_fn(3, free.len(), |i, k| counts[(i, free[k])]);
        let w = DMatrix::from_diagonal(&DVector::from_iterator(
            free.len(),
            free.iter().map(|&j| PRIOR_SECONDS[j].powi(2)),
        ));
        let gram = &n * &w * n.transpose();
        let multipliers = gram
            .lu()
            .solve(&residual)
            .ok_or_else(|| Error::CalibrationInfeasible("targets are not independent".into()))?;
        let step = &w * n.transpose() * multipliers;

        let mut violated = false;
        for (k, &j) in free.iter().enumerate() {
            let floor = PRIOR_SECONDS[j] / 5.0;
            if seconds[j] + step[k] < floor {
                seconds[j] = floor;
                pinned[j] = true;
                violated = true;
            }
        }
        if violated {
            continue;
        }
        for (k, &j) in free.iter().enumerate() {
            seconds[j] += step[k];
        }

        let unit = DEFAULT_UNIT_SECONDS;
        let mut cycles = [0u64; KINDS];
        for j in 0..KINDS {
            cycles[j] = ((seconds[j] / unit).round() as u64).max(1);
        }
        let model = CostModel {
            unit_seconds: unit,
            cycles,
        };
        for (ops, &target) in rows.iter().zip(&goal) {
            let got = model.cost(ops).seconds;
            if ((got - target) / target).abs() > targets.tolerance {
                return Err(Error::CalibrationInfeasible(format!(
                    "fitted cost {got:.3}s misses target {target}s"
                )));
            }
        }
        return Ok(model);
    }
    Err(Error::CalibrationInfeasible(
        "no positive assignment meets the targets".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn within(got: f64, want: f64, tol: f64) -> bool {
        ((got - want) / want).abs() <= tol
    }

    #[test]
    fn default_model_matches_calibration() {
        let fitted = calibrate(&CalibrationTargets::default(), &MachineConfig::default()).unwrap();
        assert_eq!(fitted, CostModel::default(), "{:?}", fitted.cycles);
    }

    #[test]
    fn quoted_throughput() {
        let config = MachineConfig::default();
        let add = cost_of_op(Opcode::Add, (50, 50), &config).seconds
            + cost_of_op(Opcode::Print, (50, 0), &config).seconds;
        let mul = cost_of_op(Opcode::Mul, (50, 50), &config).seconds;
        let div = cost_of_op(Opcode::Div, (100, 50), &config).seconds;
        assert!(within(add, 1.0, 0.10), "{add}");
        assert!(within(mul, 60.0, 0.10), "{mul}");
        assert!(within(div, 60.0, 0.10), "{div}");
        let ratio = mul / add;
        assert!((54.0..=66.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn all_costs_positive() {
        assert!(CostModel::default().cycles.iter().all(|&c| c > 0));
        let config = MachineConfig::default();
        for op in [
            Opcode::Add,
            Opcode::Sub,
            Opcode::Mul,
            Opcode::Div,
            Opcode::Load,
            Opcode::Print,
            Opcode::Halt,
        ] {
            assert!(cost_of_op(op, (10, 10), &config).cycles > 0);
        }
    }

    #[test]
    fn cost_grows_with_width() {
        let config = MachineConfig::default();
        for op in [Opcode::Add, Opcode::Sub, Opcode::Mul, Opcode::Div] {
            let mut last = 0;
            for w in 1..=50 {
                let first = if op == Opcode::Div { 2 * w } else { w };
                let c = cost_of_op(op, (first, w), &config).cycles;
                assert!(c >= last, "{op:?} at width {w}");
                last = c;
            }
        }
    }

    #[test]
    fn model_text_round_trip() {
        let model = CostModel::default();
        assert_eq!(CostModel::parse(&model.to_text()).unwrap(), model);
        let partial = CostModel::parse("# slower printer\nprint = 99999\n").unwrap();
        assert_eq!(partial.cycles[KINDS - 1], 99999);
        assert_eq!(partial.cycles[0], model.cycles[0]);
        assert!(matches!(
            CostModel::parse("print = 0"),
            Err(Error::Config { line: 1, .. })
        ));
        assert!(matches!(
            CostModel::parse("\nspeed = 3"),
            Err(Error::Config { line: 2, .. })
        ));
        assert!(CostModel::parse("unit_seconds = -1").is_err());
    }

    #[test]
    fn infeasible_targets_are_reported() {
        // a division ten thousand times slower than a multiplication cannot
        // be met while every addition stays near one second
        let targets = CalibrationTargets {
            divide: 600000.0,
            multiply: 0.5,
            ..CalibrationTargets::default()
        };
        assert!(matches!(
            calibrate(&targets, &MachineConfig::default()),
            Err(Error::CalibrationInfeasible(_))
        ));
    }
}
