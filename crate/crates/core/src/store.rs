//! The store: addressable variables `V1..=Vn`.
//!
//! Address 0 never names a store cell; the sequencer reserves it for the
//! mill registers.

use std::fmt::Write as _;

use crate::axis::AxisValue;
use crate::error::{Error, Result};

/// Whether reading a variable leaves it in place or clears it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ReadMode {
    #[default]
    Restoring,
    Zeroing,
}

impl ReadMode {
    pub fn name(self) -> &'static str {
        match self {
            ReadMode::Restoring => "restoring",
            ReadMode::Zeroing => "zeroing",
        }
    }
}

impl std::str::FromStr for ReadMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "restoring" => Ok(ReadMode::Restoring),
            "zeroing" => Ok(ReadMode::Zeroing),
            other => Err(format!("unknown read mode {other:?}")),
        }
    }
}

pub const DEFAULT_CAPACITY: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Store {
    cells: Vec<AxisValue>,
    width: usize,
    read_mode: ReadMode,
}

impl Store {
    pub fn new(capacity: usize, width: usize, read_mode: ReadMode) -> Self {
        Self {
            cells: vec![AxisValue::zero(width); capacity],
            width,
            read_mode,
        }
    }

    pub fn capacity(&self) -> usize {
        self.cells.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn read_mode(&self) -> ReadMode {
        self.read_mode
    }

    fn index(&self, addr: usize) -> Result<usize> {
        if addr == 0 || addr > self.cells.len() {
            return Err(Error::BadAddress {
                addr,
                capacity: self.cells.len(),
            });
        }
        Ok(addr - 1)
    }

    /// Gives off a variable to the mill. In zeroing mode the cell is cleared.
    pub fn read(&mut self, addr: usize) -> Result<AxisValue> {
        let i = self.index(addr)?;
        Ok(match self.read_mode {
            ReadMode::Restoring => self.cells[i].clone(),
            ReadMode::Zeroing => std::mem::replace(&mut self.cells[i], AxisValue::zero(self.width)),
        })
    }

    /// Looks at a cell without the side effects of a read.
    pub fn peek(&self, addr: usize) -> Result<&AxisValue> {
        let i = self.index(addr)?;
        Ok(&self.cells[i])
    }

    pub fn write(&mut self, addr: usize, value: AxisValue) -> Result<()> {
        let i = self.index(addr)?;
        if value.width() != self.width {
            return Err(Error::OverflowWidth { width: self.width });
        }
        self.cells[i] = value;
        Ok(())
    }

    /// Iterates over `(address, value)` for every cell.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &AxisValue)> {
        self.cells.iter().enumerate().map(|(i, v)| (i + 1, v))
    }

    /// Parses a store image: one `V<addr> = <decimal>` per line, `#` comments.
    /// Unlisted cells are zero.
    pub fn parse_image(
        text: &str,
        capacity: usize,
        width: usize,
        read_mode: ReadMode,
    ) -> Result<Self> {
        let mut store = Store::new(capacity, width, read_mode);
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let (lhs, rhs) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected `V<addr> = <value>`, got {line:?}")))?;
            let addr: usize = lhs
                .trim()
                .strip_prefix('V')
                .and_then(|a| a.parse().ok())
                .ok_or_else(|| parse_err(format!("bad variable name {:?}", lhs.trim())))?;
            let value =
                AxisValue::parse(rhs.trim(), width).map_err(|e| parse_err(e.to_string()))?;
            store
                .write(addr, value)
                .map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(store)
    }

    /// Writes the nonzero cells in store-image format.
    pub fn to_image(&self) -> String {
        let mut out = String::new();
        for (addr, v) in self.iter().filter(|(_, v)| !v.is_zero()) {
            let _ = writeln!(out, "V{addr} = {v}");
        }
        out
    }
}
