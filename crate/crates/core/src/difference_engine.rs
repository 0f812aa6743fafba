//! Tabulation by the method of differences.
//!
//! A row of accumulators holds a function value and its forward differences,
//! `[f(x), Δf(x), Δ²f(x), ..., Δᵏf(x)]`. One step adds each difference into
//! the column to its left, moving every column to the next argument using
//! nothing but addition. For a polynomial of degree ≤ k the last column
//! never changes.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::axis::{self, AxisValue};
use crate::carriage::CarriageMode;
use crate::error::{Error, Result};
use crate::mill::{self, MultVariant};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceState {
    columns: Vec<AxisValue>,
    row: usize,
    carriage: CarriageMode,
}

impl DifferenceState {
    /// Starts from explicit column values, function column first.
    pub fn new(columns: Vec<AxisValue>) -> Self {
        assert!(
            !columns.is_empty(),
            "at least the function column is needed"
        );
        let width = columns[0].width();
        assert!(
            columns.iter().all(|c| c.width() == width),
            "column widths differ"
        );
        Self {
            columns,
            row: 0,
            carriage: CarriageMode::default(),
        }
    }

    pub fn from_integers(values: &[i64], width: usize) -> Result<Self> {
        let columns = values
            .iter()
            .map(|&v| AxisValue::from_i64(v, width))
            .collect::<Result<_>>()?;
        Ok(Self::new(columns))
    }

    pub fn columns(&self) -> &[AxisValue] {
        &self.columns
    }

    pub fn value(&self) -> &AxisValue {
        &self.columns[0]
    }

    pub fn order(&self) -> usize {
        self.columns.len() - 1
    }

    pub fn row(&self) -> usize {
        self.row
    }

    pub fn width(&self) -> usize {
        self.columns[0].width()
    }

    /// Advances one row: `c[j] += c[j+1]` for `j = 0..k`, each addition
    /// using the column to its right before that column is itself updated.
    pub fn step(&mut self) -> Result<()> {
        for j in 0..self.order() {
            let (sum, runup) = axis::add(&self.columns[j], &self.columns[j + 1], self.carriage);
            if runup {
                return Err(Error::TableOverflow { row: self.row + 1 });
            }
            self.columns[j] = sum;
        }
        self.row += 1;
        Ok(())
    }

    /// Feeds `scale * c0 + offset` into the highest difference, then steps.
    pub fn tail_feedback_step(&mut self, feed: &AffineFeed) -> Result<()> {
        let width = self.width();
        let overflow = Error::TableOverflow { row: self.row + 1 };
        let scale = AxisValue::from_bigint(&feed.scale, width).map_err(|_| overflow.clone())?;
        let offset = AxisValue::from_bigint(&feed.offset, width).map_err(|_| overflow.clone())?;
        let product = mill::multiply(
            &scale,
            &self.columns[0],
            MultVariant::default(),
            self.carriage,
        );
        let (low, lost) = product.value.low_half();
        if lost {
            return Err(overflow);
        }
        let (fed, runup) = axis::add(&low, &offset, self.carriage);
        if runup {
            return Err(overflow);
        }
        let k = self.order();
        self.columns[k] = fed;
        self.step()
    }
}

/// The affine map `c0 ↦ scale * c0 + offset` used for tail feedback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineFeed {
    pub scale: BigInt,
    pub offset: BigInt,
}

impl AffineFeed {
    pub fn identity() -> Self {
        Self {
            scale: BigInt::one(),
            offset: BigInt::zero(),
        }
    }
}

/// A polynomial table to compute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSpec {
    /// Integer coefficients, constant term first. Fractional polynomials are
    /// tabulated by pre-multiplying every coefficient by `10^scale`.
    pub coefficients: Vec<BigInt>,
    /// Decimal places implied by the coefficients.
    pub scale: u32,
    pub start: BigInt,
    pub step: BigInt,
    pub rows: usize,
    /// Number of difference columns; at least the polynomial degree.
    pub order: usize,
    /// Start again from the polynomial every this many rows.
    pub reseed_every: Option<usize>,
    pub digits: usize,
}

impl TableSpec {
    pub fn new(coefficients: Vec<BigInt>, start: i64, rows: usize) -> Self {
        let order = coefficients.len().saturating_sub(1);
        Self {
            coefficients,
            scale: 0,
            start: BigInt::from(start),
            step: BigInt::one(),
            rows,
            order,
            reseed_every: None,
            digits: crate::engine::DEFAULT_DIGITS,
        }
    }

    pub fn degree(&self) -> usize {
        self.coefficients
            .iter()
            .rposition(|c| !c.is_zero())
            .unwrap_or(0)
    }

    /// `f(x)` by Horner's rule, exactly.
    pub fn evaluate(&self, x: &BigInt) -> BigInt {
        self.coefficients
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn argument(&self, row: usize) -> BigInt {
        &self.start + &self.step * BigInt::from(row)
    }
}

/// Computes the initial row by hand, as it were: `f` at `x, x+h, ..., x+k·h`
/// and the forward differences of those values.
pub fn seed_from_polynomial(spec: &TableSpec, at: &BigInt) -> Result<DifferenceState> {
    let k = spec.order;
    if spec.degree() > k {
        return Err(Error::Config {
            line: 0,
            message: format!("order {k} is below the polynomial degree {}", spec.degree()),
        });
    }
    let mut values: Vec<BigInt> = (0..=k)
        .map(|i| spec.evaluate(&(at + &spec.step * BigInt::from(i))))
        .collect();
    let mut columns = Vec::with_capacity(k + 1);
    for _ in 0..=k {
        columns.push(AxisValue::from_bigint(&values[0], spec.digits)?);
        values = values.windows(2).map(|w| &w[1] - &w[0]).collect();
    }
    Ok(DifferenceState::new(columns))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub argument: BigInt,
    pub value: AxisValue,
    /// Δf, Δ²f, ... at this argument.
    pub differences: Vec<AxisValue>,
}

/// Produces `spec.rows` rows of the table.
pub fn tabulate(spec: &TableSpec) -> Result<Vec<TableRow>> {
    let mut rows = Vec::with_capacity(spec.rows);
    if spec.rows == 0 {
        return Ok(rows);
    }
    let mut state = seed_from_polynomial(spec, &spec.start)?;
    for i in 0..spec.rows {
        if i > 0 {
            match spec.reseed_every {
                Some(every) if every > 0 && i % every == 0 => {
                    state = seed_from_polynomial(spec, &spec.argument(i))
                        .map_err(|_| Error::TableOverflow { row: i })?;
                }
                _ => state.step().map_err(|_| Error::TableOverflow { row: i })?,
            }
        }
        rows.push(TableRow {
            argument: spec.argument(i),
            value: state.value().clone(),
            differences: state.columns()[1..].to_vec(),
        });
    }
    Ok(rows)
}

/// Formats a value carrying `scale` implied decimal places.
pub fn format_scaled(value: &AxisValue, scale: u32) -> String {
    if scale == 0 {
        return value.to_string();
    }
    let magnitude = value.abs().to_string();
    let scale = scale as usize;
    let padded = format!("{magnitude:0>width$}", width = scale + 1);
    let (int, frac) = padded.split_at(padded.len() - scale);
    let sign = if value.is_negative() { "-" } else { "" };
    format!("{sign}{int}.{frac}")
}
