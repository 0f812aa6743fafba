//! Signed fixed-width decimal numbers, one per column of digit wheels.
//!
//! Values are sign-magnitude. Every wheel holds a digit `0..=9`; the digit
//! vector is little-endian and always exactly as long as the configured
//! width. Zero is always positive.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_traits::Zero;

use crate::carriage::{self, CarriageMode, HoardState, PendingColumn, Resolved};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

/// The content of one axis: a sign and exactly `width` decimal digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AxisValue {
    sign: Sign,
    digits: Vec<u8>,
}

impl AxisValue {
    pub fn zero(width: usize) -> Self {
        Self {
            sign: Sign::Positive,
            digits: vec![0; width],
        }
    }

    /// Builds a value from little-endian digits. Panics if a digit exceeds 9.
    pub fn from_digits(sign: Sign, digits: Vec<u8>) -> Self {
        assert!(digits.iter().all(|&d| d <= 9), "digit out of range");
        let mut v = Self { sign, digits };
        v.normalize();
        v
    }

    /// Parses an optionally signed decimal string into a `width`-digit axis.
    pub fn parse(text: &str, width: usize) -> Result<Self> {
        let (sign, body) = match text.strip_prefix('-') {
            Some(rest) => (Sign::Negative, rest),
            None => (Sign::Positive, text.strip_prefix('+').unwrap_or(text)),
        };
        if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::InvalidDecimal(text.to_string()));
        }
        let significant = body.trim_start_matches('0');
        if significant.len() > width {
            return Err(Error::OverflowWidth { width });
        }
        let mut digits: Vec<u8> = significant.bytes().rev().map(|b| b - b'0').collect();
        digits.resize(width, 0);
        Ok(Self::from_digits(sign, digits))
    }

    /// Parses a decimal literal at its natural width (at least one digit).
    pub fn parse_literal(text: &str) -> Result<Self> {
        let body = text.trim_start_matches(['-', '+']);
        let width = body.trim_start_matches('0').len().max(1);
        Self::parse(text, width)
    }

    pub fn from_i64(value: i64, width: usize) -> Result<Self> {
        Self::from_bigint(&BigInt::from(value), width)
    }

    pub fn from_bigint(value: &BigInt, width: usize) -> Result<Self> {
        let (sign, magnitude) = value.to_radix_le(10);
        let mut digits: Vec<u8> = magnitude;
        while digits.len() > 1 && digits.last() == Some(&0) {
            digits.pop();
        }
        if digits.len() > width && !(digits.len() == 1 && digits[0] == 0) {
            return Err(Error::OverflowWidth { width });
        }
        digits.resize(width, 0);
        let sign = if sign == BigSign::Minus {
            Sign::Negative
        } else {
            Sign::Positive
        };
        Ok(Self::from_digits(sign, digits))
    }

    pub fn to_bigint(&self) -> BigInt {
        let magnitude = BigUint::from_radix_le(&self.digits, 10).unwrap_or_default();
        let sign = match (self.sign, magnitude.is_zero()) {
            (_, true) => BigSign::NoSign,
            (Sign::Positive, false) => BigSign::Plus,
            (Sign::Negative, false) => BigSign::Minus,
        };
        BigInt::from_biguint(sign, magnitude)
    }

    pub fn width(&self) -> usize {
        self.digits.len()
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    pub fn is_negative(&self) -> bool {
        self.sign == Sign::Negative
    }

    /// Number of digits up to and including the most significant nonzero one.
    pub fn significant_digits(&self) -> usize {
        self.digits
            .iter()
            .rposition(|&d| d != 0)
            .map_or(0, |i| i + 1)
    }

    pub fn negate(&self) -> Self {
        Self::from_digits(self.sign.flip(), self.digits.clone())
    }

    pub fn abs(&self) -> Self {
        Self::from_digits(Sign::Positive, self.digits.clone())
    }

    pub fn with_sign(&self, sign: Sign) -> Self {
        Self::from_digits(sign, self.digits.clone())
    }

    /// Re-expresses the value at another width.
    pub fn resize(&self, width: usize) -> Result<Self> {
        if self.significant_digits() > width {
            return Err(Error::OverflowWidth { width });
        }
        let mut digits = self.digits.clone();
        digits.resize(width, 0);
        Ok(Self::from_digits(self.sign, digits))
    }

    /// Keeps the low `width` digits, reporting whether anything was lost.
    pub fn truncate(&self, width: usize) -> (Self, bool) {
        let lost = self.significant_digits() > width;
        let mut digits: Vec<u8> = self.digits.iter().copied().take(width).collect();
        digits.resize(width, 0);
        (Self::from_digits(self.sign, digits), lost)
    }

    /// Compares magnitudes, ignoring signs. Widths may differ.
    pub fn cmp_magnitude(&self, other: &Self) -> Ordering {
        let n = self.width().max(other.width());
        (0..n)
            .rev()
            .map(|i| {
                let a = self.digits.get(i).copied().unwrap_or(0);
                let b = other.digits.get(i).copied().unwrap_or(0);
                a.cmp(&b)
            })
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }

    fn normalize(&mut self) {
        if self.is_zero() {
            self.sign = Sign::Positive;
        }
    }
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.significant_digits();
        if n == 0 {
            return f.write_str("0");
        }
        if self.is_negative() {
            f.write_str("-")?;
        }
        for &d in self.digits[..n].iter().rev() {
            write!(f, "{}", d)?;
        }
        Ok(())
    }
}

/// A double-width value held by the tandem accumulators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WideValue(AxisValue);

impl WideValue {
    pub fn zero(axis_width: usize) -> Self {
        Self(AxisValue::zero(2 * axis_width))
    }

    /// Widens an axis value of width D to 2·D digits.
    pub fn from_axis(value: &AxisValue) -> Self {
        let width = value.width();
        Self(value.resize(2 * width).expect("widening never overflows"))
    }

    /// Wraps a value whose width is already the double width.
    pub fn from_value(value: AxisValue) -> Self {
        Self(value)
    }

    pub fn axis_width(&self) -> usize {
        self.0.width() / 2
    }

    pub fn value(&self) -> &AxisValue {
        &self.0
    }

    pub fn into_value(self) -> AxisValue {
        self.0
    }

    /// The low half as an axis value, plus whether the high half was nonzero.
    pub fn low_half(&self) -> (AxisValue, bool) {
        self.0.truncate(self.axis_width())
    }

    pub fn to_bigint(&self) -> BigInt {
        self.0.to_bigint()
    }
}

impl fmt::Display for WideValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn nines_complement(digits: &[u8]) -> Vec<u8> {
    digits.iter().map(|d| 9 - d).collect()
}

/// Adds two digit vectors of equal width through the named carriage.
pub(crate) fn combine(a: &[u8], b: &[u8], carry_in: bool, mode: CarriageMode) -> Resolved {
    match mode {
        CarriageMode::Hoarding => {
            let mut hoard = HoardState::new(a.len());
            hoard.add(a).expect("fresh hoard");
            hoard.add(b).expect("fresh hoard");
            if carry_in && !a.is_empty() {
                let mut unit = vec![0; a.len()];
                unit[0] = 1;
                hoard.add(&unit).expect("fresh hoard");
            }
            hoard.flush()
        }
        _ => carriage::resolve(&PendingColumn::from_addition(a, b, carry_in), mode),
    }
}

/// Adds magnitudes of `a` and `b` with sign `sign`; runup on overflow.
fn signed_sum(a: &AxisValue, b: &AxisValue, b_sign: Sign, mode: CarriageMode) -> (AxisValue, bool) {
    assert_eq!(a.width(), b.width(), "axis widths differ");
    if a.is_zero() {
        return (b.with_sign(b_sign), false);
    }
    if b.is_zero() {
        return (a.clone(), false);
    }
    if a.sign == b_sign {
        let r = combine(&a.digits, &b.digits, false, mode);
        (AxisValue::from_digits(a.sign, r.digits), r.carry_out)
    } else {
        let (big, small, sign) = match a.cmp_magnitude(b) {
            Ordering::Less => (b, a, b_sign),
            _ => (a, b, a.sign),
        };
        // big - small = big + (10^D - 1 - small) + 1 - 10^D
        let r = combine(&big.digits, &nines_complement(&small.digits), true, mode);
        debug_assert!(r.carry_out);
        (AxisValue::from_digits(sign, r.digits), false)
    }
}

/// `a + b`. The run-up flag reports overflow past the axis width; the result
/// then holds the low digits.
pub fn add(a: &AxisValue, b: &AxisValue, mode: CarriageMode) -> (AxisValue, bool) {
    signed_sum(a, b, b.sign, mode)
}

/// `a - b`. The run-up flag reports overflow, or a nonzero minuend whose
/// sign the result reverses.
pub fn sub(a: &AxisValue, b: &AxisValue, mode: CarriageMode) -> (AxisValue, bool) {
    let (value, overflow) = signed_sum(a, b, b.sign.flip(), mode);
    let flipped = !a.is_zero() && !value.is_zero() && value.sign != a.sign;
    (value, overflow || flipped)
}

/// Multiplies by `10^k`, failing if a nonzero digit would leave the axis.
pub fn shift_up(a: &AxisValue, k: usize) -> Result<AxisValue> {
    let width = a.width();
    if a.significant_digits() + k > width && !a.is_zero() {
        return Err(Error::OverflowWidth { width });
    }
    let mut digits = vec![0; k.min(width)];
    digits.extend(a.digits.iter().take(width.saturating_sub(k)));
    Ok(AxisValue::from_digits(a.sign, digits))
}

/// Divides the magnitude by `10^k`, returning the dropped low digits
/// (units first).
pub fn shift_down(a: &AxisValue, k: usize) -> (AxisValue, Vec<u8>) {
    let width = a.width();
    let mut dropped: Vec<u8> = a.digits.iter().copied().take(k).collect();
    dropped.resize(k, 0);
    let mut digits: Vec<u8> = a.digits.iter().copied().skip(k).collect();
    digits.resize(width, 0);
    (AxisValue::from_digits(a.sign, digits), dropped)
}
