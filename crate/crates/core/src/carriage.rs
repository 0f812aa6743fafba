//! Carry propagation over columns of digit wheels.
//!
//! An addition first turns every wheel by the digit of the addend, leaving a
//! column of partial sums in `0..=18`. The carriage then resolves the
//! pending carries. Three carriages are modelled: the ripple carriage, the
//! anticipating (look-ahead) carriage and the hoarding carriage, which
//! absorbs several additions before resolving anything.
//!
//! Digit vectors are little-endian throughout: index 0 is the units wheel.

use crate::error::{Error, Result};

/// The carry mechanism used by additions in the mill.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CarriageMode {
    Ripple,
    #[default]
    Anticipating,
    Hoarding,
}

impl CarriageMode {
    pub fn name(self) -> &'static str {
        match self {
            CarriageMode::Ripple => "ripple",
            CarriageMode::Anticipating => "anticipating",
            CarriageMode::Hoarding => "hoarding",
        }
    }
}

impl std::str::FromStr for CarriageMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ripple" => Ok(CarriageMode::Ripple),
            "anticipating" => Ok(CarriageMode::Anticipating),
            "hoarding" => Ok(CarriageMode::Hoarding),
            other => Err(format!("unknown carriage {other:?}")),
        }
    }
}

/// Partial sums left on the wheels after one addition, before carriage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingColumn {
    sums: Vec<u8>,
    carry_in: bool,
}

impl PendingColumn {
    pub fn new(sums: Vec<u8>, carry_in: bool) -> Result<Self> {
        if let Some((position, &value)) = sums.iter().enumerate().find(|(_, &s)| s > 18) {
            return Err(Error::InvalidColumn { position, value });
        }
        Ok(Self { sums, carry_in })
    }

    /// Wheel-by-wheel sum of two digit vectors of equal length.
    pub fn from_addition(a: &[u8], b: &[u8], carry_in: bool) -> Self {
        assert_eq!(a.len(), b.len(), "addend widths differ");
        let sums = a.iter().zip(b).map(|(x, y)| x + y).collect();
        Self { sums, carry_in }
    }

    pub fn sums(&self) -> &[u8] {
        &self.sums
    }

    pub fn carry_in(&self) -> bool {
        self.carry_in
    }

    pub fn width(&self) -> usize {
        self.sums.len()
    }
}

/// Digits after all carries have been resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolved {
    pub digits: Vec<u8>,
    pub carry_out: bool,
}

/// Resolves carries one wheel at a time, starting from the units.
pub fn resolve_ripple(col: &PendingColumn) -> Resolved {
    let mut carry = u8::from(col.carry_in);
    let digits = col
        .sums
        .iter()
        .map(|&s| {
            let t = s + carry;
            carry = t / 10;
            t % 10
        })
        .collect();
    Resolved {
        digits,
        carry_out: carry != 0,
    }
}

/// Resolves carries with a look-ahead over generate/propagate signals.
///
/// A wheel generates a carry when its sum is at least ten and propagates an
/// incoming carry when it stands at nine. The group signals are combined by a
/// parallel prefix (doubling) scan, so every carry is known before any digit
/// is written.
pub fn resolve_anticipating(col: &PendingColumn) -> Resolved {
    let n = col.sums.len();
    let mut generate: Vec<bool> = col.sums.iter().map(|&s| s >= 10).collect();
    let mut propagate: Vec<bool> = col.sums.iter().map(|&s| s == 9).collect();

    // After the scan, (generate[i], propagate[i]) describe the span 0..=i.
    let mut span = 1;
    while span < n {
        let (g_prev, p_prev) = (generate.clone(), propagate.clone());
        for i in span..n {
            generate[i] = g_prev[i] || (p_prev[i] && g_prev[i - span]);
            propagate[i] = p_prev[i] && p_prev[i - span];
        }
        span *= 2;
    }

    let carry_into = |i: usize| -> bool {
        if i == 0 {
            col.carry_in
        } else {
            generate[i - 1] || (propagate[i - 1] && col.carry_in)
        }
    };
    let digits = (0..n)
        .map(|i| (col.sums[i] + u8::from(carry_into(i))) % 10)
        .collect();
    Resolved {
        digits,
        carry_out: carry_into(n),
    }
}

/// Resolves a pending column with the named carriage. The hoarding carriage
/// resolves a single addition like the ripple carriage.
pub fn resolve(col: &PendingColumn, mode: CarriageMode) -> Resolved {
    match mode {
        CarriageMode::Anticipating => resolve_anticipating(col),
        CarriageMode::Ripple | CarriageMode::Hoarding => resolve_ripple(col),
    }
}

/// Maximum number of additions a hoarding carriage absorbs between flushes.
pub const HOARD_CAPACITY: usize = 9;

/// Running wheel sums of a hoarding carriage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoardState {
    sums: Vec<u16>,
    count: usize,
}

impl HoardState {
    pub fn new(width: usize) -> Self {
        Self {
            sums: vec![0; width],
            count: 0,
        }
    }

    pub fn width(&self) -> usize {
        self.sums.len()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_full(&self) -> bool {
        self.count >= HOARD_CAPACITY
    }

    pub fn sums(&self) -> &[u16] {
        &self.sums
    }

    /// Adds a digit vector without resolving any carries.
    pub fn add(&mut self, addend: &[u8]) -> Result<()> {
        if self.count >= HOARD_CAPACITY {
            return Err(Error::HoardOverflow(self.count));
        }
        if addend.len() != self.sums.len() {
            return Err(Error::WidthMismatch {
                expected: self.sums.len(),
                got: addend.len(),
            });
        }
        for (s, &d) in self.sums.iter_mut().zip(addend) {
            debug_assert!(d <= 9);
            *s += u16::from(d);
        }
        self.count += 1;
        Ok(())
    }

    /// Resolves every deferred carry and empties the carriage.
    pub fn flush(&mut self) -> Resolved {
        let mut carry = 0u16;
        let digits = self
            .sums
            .iter()
            .map(|&s| {
                let t = s + carry;
                carry = t / 10;
                (t % 10) as u8
            })
            .collect();
        self.sums.iter_mut().for_each(|s| *s = 0);
        self.count = 0;
        Resolved {
            digits,
            carry_out: carry != 0,
        }
    }

    /// Shifts the wheel sums down one place. The carry of the dropped units
    /// sum moves into the next wheel; its units digit is returned.
    pub fn shift_down(&mut self) -> u8 {
        if self.sums.is_empty() {
            return 0;
        }
        let low = self.sums.remove(0);
        self.sums.push(0);
        if let Some(next) = self.sums.first_mut() {
            *next += low / 10;
        }
        (low % 10) as u8
    }
}
