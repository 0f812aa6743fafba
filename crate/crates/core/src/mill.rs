//! The mill: ingress registers A1/A2, the egress register R, the tandem
//! accumulators and the table of multiples T1..T9.
//!
//! Every operation is available as a pure function returning the result
//! together with the micro-operations it performed, and as a method on
//! [`Mill`] that updates the registers.

use crate::axis::{self, AxisValue, Sign, WideValue};
use crate::carriage::{self, CarriageMode, HoardState, PendingColumn};
use crate::error::{Error, Result};
use crate::timing::MicroOps;

/// Which part of the machine moves during multiplication: the table axes
/// (early designs) or the accumulators (later designs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MultVariant {
    ShiftTable,
    #[default]
    ShiftAccumulator,
}

impl MultVariant {
    pub fn name(self) -> &'static str {
        match self {
            MultVariant::ShiftTable => "shift-t",
            MultVariant::ShiftAccumulator => "shift-acc",
        }
    }
}

impl std::str::FromStr for MultVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "shift-t" => Ok(MultVariant::ShiftTable),
            "shift-acc" => Ok(MultVariant::ShiftAccumulator),
            other => Err(format!("unknown multiplication variant {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
}

/// Charges one addition pass through the named carriage.
pub(crate) fn charge_addition(ops: &mut MicroOps, mode: CarriageMode, width: usize) {
    ops.add_passes += 1;
    match mode {
        CarriageMode::Ripple => ops.ripple_digits += width as u64,
        CarriageMode::Anticipating => ops.lookahead_resolutions += 1,
        CarriageMode::Hoarding => ops.hoard_flushes += 1,
    }
}

/// T1..T9: the nine multiples of the current multiplicand or divisor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplesTable {
    entries: Vec<AxisValue>,
}

impl MultiplesTable {
    /// Fills the table by repeated addition, `T[i] = T[i-1] + m`.
    pub fn load(m: &AxisValue, mode: CarriageMode) -> Result<Self> {
        let mut entries = Vec::with_capacity(9);
        entries.push(m.clone());
        for _ in 1..9 {
            let (next, runup) = axis::add(entries.last().unwrap(), m, mode);
            if runup {
                return Err(Error::OverflowWidth { width: m.width() });
            }
            entries.push(next);
        }
        Ok(Self { entries })
    }

    /// `T[digit]` for `digit` in `1..=9`.
    pub fn get(&self, digit: u8) -> &AxisValue {
        &self.entries[usize::from(digit) - 1]
    }

    pub fn entries(&self) -> &[AxisValue] {
        &self.entries
    }

    /// Smallest `j` with `T[j] >= |r|`, or 9 when none is; 0 for `r == 0`.
    /// Also returns the number of table axes compared.
    fn select(&self, r: &AxisValue) -> (u8, u64) {
        if r.is_zero() {
            return (0, 0);
        }
        for (i, t) in self.entries.iter().enumerate() {
            if t.cmp_magnitude(r).is_ge() {
                return (i as u8 + 1, i as u64 + 1);
            }
        }
        (9, 9)
    }
}

/// One addition of a table axis during multiplication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialAddition {
    /// Place of the multiplier digit (0 = units).
    pub position: usize,
    pub digit: u8,
    /// `T[digit] * 10^position`: what this addition contributes to the product.
    pub contribution: AxisValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Product {
    pub value: WideValue,
    pub partials: Vec<PartialAddition>,
    pub ops: MicroOps,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Division {
    pub quotient: WideValue,
    pub remainder: AxisValue,
    pub ops: MicroOps,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sum {
    pub value: AxisValue,
    pub runup: bool,
    pub ops: MicroOps,
}

/// The working accumulator of a multiplication, either resolving carries
/// after every addition or hoarding them.
enum Accumulator {
    Resolved(Vec<u8>, CarriageMode),
    Hoarded(HoardState),
}

impl Accumulator {
    fn new(width: usize, mode: CarriageMode) -> Self {
        match mode {
            CarriageMode::Hoarding => Accumulator::Hoarded(HoardState::new(width)),
            other => Accumulator::Resolved(vec![0; width], other),
        }
    }

    fn add(&mut self, addend: &[u8], ops: &mut MicroOps) {
        ops.add_passes += 1;
        match self {
            Accumulator::Resolved(digits, mode) => {
                let col = PendingColumn::from_addition(digits, addend, false);
                let r = carriage::resolve(&col, *mode);
                debug_assert!(!r.carry_out);
                match mode {
                    CarriageMode::Ripple => ops.ripple_digits += digits.len() as u64,
                    _ => ops.lookahead_resolutions += 1,
                }
                *digits = r.digits;
            }
            Accumulator::Hoarded(hoard) => {
                if hoard.is_full() {
                    let r = hoard.flush();
                    ops.hoard_flushes += 1;
                    hoard.add(&r.digits).expect("empty hoard");
                }
                hoard.add(addend).expect("hoard has room");
            }
        }
    }

    fn shift_down(&mut self, ops: &mut MicroOps) {
        match self {
            Accumulator::Resolved(digits, _) => {
                ops.shift_digits += digits.len() as u64;
                let dropped = digits.remove(0);
                debug_assert_eq!(dropped, 0);
                digits.push(0);
            }
            Accumulator::Hoarded(hoard) => {
                ops.shift_digits += hoard.width() as u64;
                let dropped = hoard.shift_down();
                debug_assert_eq!(dropped, 0);
            }
        }
    }

    fn finish(self, ops: &mut MicroOps) -> Vec<u8> {
        match self {
            Accumulator::Resolved(digits, _) => digits,
            Accumulator::Hoarded(mut hoard) => {
                if hoard.count() == 0 {
                    return hoard.flush().digits;
                }
                ops.hoard_flushes += 1;
                let r = hoard.flush();
                debug_assert!(!r.carry_out);
                r.digits
            }
        }
    }
}

fn product_sign(a: &AxisValue, b: &AxisValue) -> Sign {
    if a.sign() == b.sign() {
        Sign::Positive
    } else {
        Sign::Negative
    }
}

/// Multiplication with a table of multiples.
///
/// The nine multiples of `|a|` are formed first. The digits of `b` are then
/// walked from the units upward. With [`MultVariant::ShiftTable`] each
/// multiple is shifted up to the place of its multiplier digit before it is
/// added; with [`MultVariant::ShiftAccumulator`] the multiple is always added
/// at the top of the tandem accumulators, which then shift down one place.
pub fn multiply(a: &AxisValue, b: &AxisValue, variant: MultVariant, mode: CarriageMode) -> Product {
    assert_eq!(a.width(), b.width(), "operand widths differ");
    let width = a.width();
    // One extra wheel above the double width holds the carry of the top addition.
    let register = 2 * width + 1;
    let mut ops = MicroOps::default();

    let multiplicand = a.abs().resize(width + 1).expect("widening");
    let table =
        MultiplesTable::load(&multiplicand, mode).expect("nine multiples fit in D+1 digits");
    ops.table_loads += 1;

    let mut acc = Accumulator::new(register, mode);
    let mut partials = Vec::new();

    for (position, &digit) in b.digits().iter().enumerate() {
        if variant == MultVariant::ShiftTable && position > 0 {
            // all nine table axes move up one place
            ops.shift_digits += 9 * (width as u64 + 1);
        }
        if digit != 0 {
            let t = table.get(digit);
            let offset = match variant {
                MultVariant::ShiftTable => position,
                MultVariant::ShiftAccumulator => width,
            };
            let mut addend = vec![0; register];
            addend[offset..offset + width + 1].copy_from_slice(t.digits());
            acc.add(&addend, &mut ops);

            let mut placed = vec![0; 2 * width];
            for (i, &d) in t.digits().iter().enumerate() {
                if let Some(slot) = placed.get_mut(position + i) {
                    *slot = d;
                }
            }
            partials.push(PartialAddition {
                position,
                digit,
                contribution: AxisValue::from_digits(Sign::Positive, placed),
            });
        }
        if variant == MultVariant::ShiftAccumulator {
            acc.shift_down(&mut ops);
        }
    }

    let mut digits = acc.finish(&mut ops);
    debug_assert_eq!(digits.last(), Some(&0));
    digits.truncate(2 * width);
    Product {
        value: WideValue::from_value(AxisValue::from_digits(product_sign(a, b), digits)),
        partials,
        ops,
    }
}

/// Digit-serial non-restoring division of a double-width dividend.
///
/// The partial remainder is allowed to go negative. At each place the table
/// of divisor multiples is searched for the smallest multiple at least as
/// large as the remainder's magnitude; it is subtracted from a positive
/// remainder or added to a negative one, producing a signed quotient digit.
/// Positive and negative quotient digits are collected separately and
/// combined at the end, followed by a single correction when the final
/// remainder is negative.
///
/// The quotient is truncated toward zero and the remainder takes the sign of
/// the dividend.
pub fn divide(num: &WideValue, den: &AxisValue, mode: CarriageMode) -> Result<Division> {
    let width = den.width();
    assert_eq!(
        num.value().width(),
        2 * width,
        "dividend must be double width"
    );
    let divisor_len = den.significant_digits();
    if divisor_len == 0 {
        return Err(Error::DivisionByZero);
    }
    let rem_width = width + 1;
    let mut ops = MicroOps::default();

    let divisor = den.abs().resize(rem_width)?;
    let table = MultiplesTable::load(&divisor, mode)?;
    ops.table_loads += 1;

    let n = num.value().digits();
    // The divisor is set against the leading digits of the dividend: the top
    // divisor_len - 1 significant digits are smaller than it and seed the
    // partial remainder directly.
    let dividend_len = num.value().significant_digits();
    let start = dividend_len.saturating_sub(divisor_len - 1);
    let mut seed = n[start..dividend_len].to_vec();
    seed.resize(rem_width, 0);
    let mut r = AxisValue::from_digits(Sign::Positive, seed);

    let mut q_pos = vec![0u8; 2 * width];
    let mut q_neg = vec![0u8; 2 * width];

    for pos in (0..start).rev() {
        r = axis::shift_up(&r, 1).expect("|r| < divisor leaves room for one place");
        ops.shift_digits += rem_width as u64;
        if n[pos] != 0 {
            let was_negative = r.is_negative();
            let mut digit = vec![0; rem_width];
            digit[0] = n[pos];
            let (next, _) = axis::add(&r, &AxisValue::from_digits(Sign::Positive, digit), mode);
            if was_negative {
                charge_addition(&mut ops, mode, rem_width);
            }
            r = next;
        }

        let (j, compared) = table.select(&r);
        ops.comparisons += compared;
        if j == 0 {
            continue;
        }
        let t = table.get(j);
        if r.is_negative() {
            r = axis::add(&r, t, mode).0;
            q_neg[pos] = j;
        } else {
            r = axis::sub(&r, t, mode).0;
            q_pos[pos] = j;
        }
        charge_addition(&mut ops, mode, rem_width);
    }

    let mut quotient = axis::sub(
        &AxisValue::from_digits(Sign::Positive, q_pos),
        &AxisValue::from_digits(Sign::Positive, q_neg),
        mode,
    )
    .0;
    charge_addition(&mut ops, mode, 2 * width);

    if r.is_negative() {
        r = axis::add(&r, &divisor, mode).0;
        let one = AxisValue::from_digits(Sign::Positive, {
            let mut d = vec![0; 2 * width];
            d[0] = 1;
            d
        });
        quotient = axis::sub(&quotient, &one, mode).0;
        charge_addition(&mut ops, mode, rem_width);
        charge_addition(&mut ops, mode, 2 * width);
    }
    debug_assert!(!quotient.is_negative());
    debug_assert!(r.cmp_magnitude(&divisor).is_lt());

    let remainder = r.resize(width)?.with_sign(num.value().sign());
    let quotient = quotient.with_sign(product_sign(num.value(), den));
    Ok(Division {
        quotient: WideValue::from_value(quotient),
        remainder,
        ops,
    })
}

/// Addition or subtraction on the mill's adding axes.
pub fn add_sub(a: &AxisValue, b: &AxisValue, op: ArithOp, mode: CarriageMode) -> Sum {
    let (value, runup) = match op {
        ArithOp::Add => axis::add(a, b, mode),
        ArithOp::Sub => axis::sub(a, b, mode),
    };
    let mut ops = MicroOps::default();
    charge_addition(&mut ops, mode, a.width());
    Sum { value, runup, ops }
}

/// Programmer-visible and internal state of the mill.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mill {
    width: usize,
    pub a1: AxisValue,
    pub a2: AxisValue,
    pub r: WideValue,
    pub acc: WideValue,
    pub table: Option<MultiplesTable>,
    /// Remainder of the last division.
    pub remainder: AxisValue,
    pub runup: bool,
}

impl Mill {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            a1: AxisValue::zero(width),
            a2: AxisValue::zero(width),
            r: WideValue::zero(width),
            acc: WideValue::zero(width),
            table: None,
            remainder: AxisValue::zero(width),
            runup: false,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Forms the nine multiples of `m` on the table axes.
    pub fn load_multiples(&mut self, m: &AxisValue, mode: CarriageMode) -> Result<MicroOps> {
        self.table = Some(MultiplesTable::load(m, mode)?);
        Ok(MicroOps {
            table_loads: 1,
            ..MicroOps::default()
        })
    }

    /// `R = A1 op A2`.
    pub fn add_sub(&mut self, op: ArithOp, mode: CarriageMode) -> MicroOps {
        let sum = add_sub(&self.a1, &self.a2, op, mode);
        self.runup = sum.runup;
        self.r = WideValue::from_axis(&sum.value);
        sum.ops
    }

    /// `R = A1 * A2`. Run-up is set when the product does not fit one axis.
    pub fn multiply(&mut self, variant: MultVariant, mode: CarriageMode) -> MicroOps {
        let product = multiply(&self.a1, &self.a2, variant, mode);
        let multiplicand = self.a1.abs().resize(self.width + 1).expect("widening");
        self.table = MultiplesTable::load(&multiplicand, mode).ok();
        self.runup = product.value.low_half().1;
        self.acc = product.value.clone();
        self.r = product.value;
        product.ops
    }

    /// `R = A1 / A2`, remainder kept in the mill.
    pub fn divide(&mut self, mode: CarriageMode) -> Result<MicroOps> {
        let division = divide(&WideValue::from_axis(&self.a1), &self.a2, mode)?;
        let divisor = self.a2.abs().resize(self.width + 1)?;
        self.table = MultiplesTable::load(&divisor, mode).ok();
        self.runup = division.quotient.low_half().1;
        self.acc = division.quotient.clone();
        self.r = division.quotient;
        self.remainder = division.remainder;
        Ok(division.ops)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: i64, width: usize) -> AxisValue {
        AxisValue::from_i64(n, width).unwrap()
    }

    const VARIANTS: [MultVariant; 2] = [MultVariant::ShiftTable, MultVariant::ShiftAccumulator];
    const MODES: [CarriageMode; 3] = [
        CarriageMode::Ripple,
        CarriageMode::Anticipating,
        CarriageMode::Hoarding,
    ];

    #[test]
    fn multiples_of_32() {
        let t = MultiplesTable::load(&v(32, 6), CarriageMode::Anticipating).unwrap();
        let values: Vec<String> = t.entries().iter().map(|e| e.to_string()).collect();
        assert_eq!(
            values,
            ["32", "64", "96", "128", "160", "192", "224", "256", "288"]
        );
        assert_eq!(t.get(6), &v(192, 6));
    }

    #[test]
    fn multiples_of_zero_and_bounds() {
        let t = MultiplesTable::load(&v(0, 6), CarriageMode::Ripple).unwrap();
        assert!(t.entries().iter().all(AxisValue::is_zero));
        assert!(MultiplesTable::load(&v(100000, 6), CarriageMode::Ripple).is_ok());
        assert_eq!(
            MultiplesTable::load(&v(200000, 6), CarriageMode::Ripple),
            Err(Error::OverflowWidth { width: 6 })
        );
        let mut mill = Mill::new(6);
        assert!(mill
            .load_multiples(&v(200000, 6), CarriageMode::Ripple)
            .is_err());
    }

    #[test]
    fn sixteen_times_thirty_two() {
        for variant in VARIANTS {
            for mode in MODES {
                let p = multiply(&v(32, 6), &v(16, 6), variant, mode);
                assert_eq!(p.value.to_string(), "512");
                let added: Vec<String> = p
                    .partials
                    .iter()
                    .map(|s| s.contribution.to_string())
                    .collect();
                assert_eq!(added, ["192", "320"]);
                assert_eq!(p.partials[0].digit, 6);
            }
        }
    }

    #[test]
    fn identity_and_zero() {
        for variant in VARIANTS {
            let x = v(-987654, 6);
            assert!(multiply(&x, &v(0, 6), variant, CarriageMode::Ripple)
                .value
                .value()
                .is_zero());
            assert_eq!(
                multiply(&x, &v(1, 6), variant, CarriageMode::Ripple).value,
                WideValue::from_axis(&x)
            );
            let p = multiply(
                &v(-999999, 6),
                &v(-999999, 6),
                variant,
                CarriageMode::Hoarding,
            );
            assert_eq!(p.value.to_string(), "999998000001");
        }
    }

    #[test]
    fn hoarding_flushes_every_nine_additions() {
        let nines = v(999999, 6);
        let p = multiply(
            &nines,
            &nines,
            MultVariant::ShiftAccumulator,
            CarriageMode::Hoarding,
        );
        // six additions, one final flush
        assert_eq!(p.ops.add_passes, 6);
        assert_eq!(p.ops.hoard_flushes, 1);
        let wide = AxisValue::parse(&"9".repeat(20), 20).unwrap();
        let p = multiply(
            &wide,
            &wide,
            MultVariant::ShiftAccumulator,
            CarriageMode::Hoarding,
        );
        assert_eq!(p.ops.add_passes, 20);
        // flushes when the hoard is full at additions 10 and 18, then at the end
        assert_eq!(p.ops.hoard_flushes, 3);
    }

    #[test]
    fn divide_examples() {
        for mode in MODES {
            let d = divide(&WideValue::from_axis(&v(512, 6)), &v(16, 6), mode).unwrap();
            assert_eq!(
                (d.quotient.to_string(), d.remainder.to_string()),
                ("32".into(), "0".into())
            );
            let d = divide(&WideValue::from_axis(&v(0, 6)), &v(7, 6), mode).unwrap();
            assert!(d.quotient.value().is_zero() && d.remainder.is_zero());
            let d = divide(&WideValue::from_axis(&v(-100, 6)), &v(7, 6), mode).unwrap();
            assert_eq!(
                (d.quotient.to_string(), d.remainder.to_string()),
                ("-14".into(), "-2".into())
            );
            let d = divide(&WideValue::from_axis(&v(100, 6)), &v(-7, 6), mode).unwrap();
            assert_eq!(
                (d.quotient.to_string(), d.remainder.to_string()),
                ("-14".into(), "2".into())
            );
        }
        assert_eq!(
            divide(
                &WideValue::from_axis(&v(5, 6)),
                &v(0, 6),
                CarriageMode::Ripple
            ),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn divide_needs_negative_correction() {
        // 10 / 3: the remainder overshoots negative and is corrected once
        let d = divide(
            &WideValue::from_axis(&v(10, 6)),
            &v(3, 6),
            CarriageMode::Ripple,
        )
        .unwrap();
        assert_eq!(
            (d.quotient.to_string(), d.remainder.to_string()),
            ("3".into(), "1".into())
        );
        let d = divide(
            &WideValue::from_axis(&v(999999, 6)),
            &v(1, 6),
            CarriageMode::Ripple,
        )
        .unwrap();
        assert_eq!(d.quotient.to_string(), "999999");
    }

    #[test]
    fn mill_registers() {
        let mut mill = Mill::new(6);
        mill.a1 = v(3, 6);
        mill.a2 = v(5, 6);
        mill.add_sub(ArithOp::Sub, CarriageMode::Anticipating);
        assert!(mill.runup);
        assert_eq!(mill.r.to_string(), "-2");
        mill.add_sub(ArithOp::Add, CarriageMode::Anticipating);
        assert!(!mill.runup);

        mill.a1 = v(1000, 6);
        mill.a2 = v(1000, 6);
        mill.multiply(MultVariant::ShiftTable, CarriageMode::Ripple);
        assert!(mill.runup);
        assert_eq!(mill.r.low_half().0.to_string(), "0");
        assert_eq!(mill.table.as_ref().unwrap().get(2).to_string(), "2000");

        mill.a1 = v(100, 6);
        mill.a2 = v(7, 6);
        mill.divide(CarriageMode::Ripple).unwrap();
        assert_eq!(mill.r.to_string(), "14");
        assert_eq!(mill.remainder.to_string(), "2");
        assert!(!mill.runup);
    }
}
