//! Punched cards, the five card streams and the textual deck format.
//!
//! A deck is written one stream at a time. A header (`OPS:`, `V1:`, `V2:`,
//! `N1:` or `N2:`) selects the stream that the following tokens are appended
//! to, on the same line or on later lines. `#` starts a comment.
//!
//! ```text
//! OPS: ADD HALT
//! V1: 3 5        # first source, then destination
//! V2: 4
//! ```

use std::fmt;

use crate::axis::AxisValue;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StreamId {
    Ops,
    Vars1,
    Vars2,
    Nums1,
    Nums2,
}

impl StreamId {
    pub const ALL: [StreamId; 5] = [
        StreamId::Ops,
        StreamId::Vars1,
        StreamId::Vars2,
        StreamId::Nums1,
        StreamId::Nums2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StreamId::Ops => "OPS",
            StreamId::Vars1 => "V1",
            StreamId::Vars2 => "V2",
            StreamId::Nums1 => "N1",
            StreamId::Nums2 => "N2",
        }
    }

    pub fn from_name(name: &str) -> Option<StreamId> {
        StreamId::ALL.into_iter().find(|s| s.name() == name)
    }

    fn index(self) -> usize {
        self as usize
    }

    fn accepts(self, card: &Card) -> bool {
        matches!(
            (self, card),
            (
                StreamId::Ops,
                Card::Operation(_) | Card::Combinatorial { .. }
            ) | (StreamId::Vars1 | StreamId::Vars2, Card::Variable(_))
                | (StreamId::Nums1 | StreamId::Nums2, Card::Number(_))
        )
    }
}

impl fmt::Display for StreamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Opcode {
    Add,
    Sub,
    Mul,
    Div,
    Load,
    Print,
    Halt,
}

impl Opcode {
    pub const ALL: [Opcode; 7] = [
        Opcode::Add,
        Opcode::Sub,
        Opcode::Mul,
        Opcode::Div,
        Opcode::Load,
        Opcode::Print,
        Opcode::Halt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Opcode::Add => "ADD",
            Opcode::Sub => "SUB",
            Opcode::Mul => "MUL",
            Opcode::Div => "DIV",
            Opcode::Load => "LOAD",
            Opcode::Print => "PRINT",
            Opcode::Halt => "HALT",
        }
    }

    pub fn from_name(name: &str) -> Option<Opcode> {
        Opcode::ALL.into_iter().find(|o| o.name() == name)
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, Opcode::Add | Opcode::Sub | Opcode::Mul | Opcode::Div)
    }
}

/// When a combinatorial card moves its stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    Always,
    OnRunup,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Always => "ALWAYS",
            Condition::OnRunup => "RUNUP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Card {
    Operation(Opcode),
    /// A store address; 0 designates the mill.
    Variable(usize),
    /// A literal at its natural width.
    Number(AxisValue),
    Combinatorial {
        target: StreamId,
        offset: i64,
        condition: Condition,
    },
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Card::Operation(op) => f.write_str(op.name()),
            Card::Variable(addr) => write!(f, "{addr}"),
            Card::Number(v) => write!(f, "{v}"),
            Card::Combinatorial {
                target,
                offset,
                condition,
            } => write!(f, "JMP({target},{offset},{})", condition.name()),
        }
    }
}

/// An ordered card stream with a cursor pointing at the next card.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CardStream {
    cards: Vec<Card>,
    cursor: usize,
}

impl CardStream {
    pub fn cards(&self) -> &[Card] {
        &self.cards
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    pub fn is_exhausted(&self) -> bool {
        self.cursor >= self.cards.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CardDecks {
    streams: [CardStream; 5],
}

impl CardDecks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stream(&self, id: StreamId) -> &CardStream {
        &self.streams[id.index()]
    }

    /// Appends a card, enforcing which card kinds a stream may hold.
    pub fn push(&mut self, id: StreamId, card: Card) -> Result<()> {
        if !id.accepts(&card) {
            return Err(Error::Placement {
                line: 0,
                card: card.to_string(),
                stream: id,
            });
        }
        self.streams[id.index()].cards.push(card);
        Ok(())
    }

    /// Reads the card under the cursor and moves past it.
    pub fn advance(&mut self, id: StreamId) -> Result<Card> {
        let stream = &mut self.streams[id.index()];
        let card = stream
            .cards
            .get(stream.cursor)
            .cloned()
            .ok_or(Error::StreamExhausted(id))?;
        stream.cursor += 1;
        Ok(card)
    }

    /// Moves a cursor forward or backward. Landing just past the last card
    /// is allowed.
    pub fn seek(&mut self, id: StreamId, offset: i64) -> Result<()> {
        let stream = &mut self.streams[id.index()];
        let target = stream.cursor as i64 + offset;
        if target < 0 || target > stream.cards.len() as i64 {
            return Err(Error::SeekOutOfRange {
                stream: id,
                cursor: stream.cursor,
                offset,
                len: stream.cards.len(),
            });
        }
        stream.cursor = target as usize;
        Ok(())
    }

    pub fn cursors(&self) -> [usize; 5] {
        std::array::from_fn(|i| self.streams[i].cursor)
    }

    pub fn rewind(&mut self) {
        for s in &mut self.streams {
            s.cursor = 0;
        }
    }

    /// Writes the deck in canonical text form, one line per nonempty stream.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        for id in StreamId::ALL {
            let stream = self.stream(id);
            if stream.is_empty() {
                continue;
            }
            out.push_str(id.name());
            out.push(':');
            for card in &stream.cards {
                out.push(' ');
                out.push_str(&card.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut decks = CardDecks::new();
        let mut current: Option<StreamId> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.split('#').next().unwrap_or("");
            for token in tokenize(body, line)? {
                if let Some(name) = token.strip_suffix(':') {
                    current = Some(StreamId::from_name(name).ok_or_else(|| Error::Parse {
                        line,
                        message: format!("unknown stream header {token:?}"),
                    })?);
                    continue;
                }
                let stream = current.ok_or_else(|| Error::Parse {
                    line,
                    message: format!("card {token:?} appears before any stream header"),
                })?;
                let card = parse_card(&token, stream, line)?;
                decks.push(stream, card).map_err(|e| match e {
                    Error::Placement { card, stream, .. } => {
                        Error::Placement { line, card, stream }
                    }
                    other => other,
                })?;
            }
        }
        Ok(decks)
    }
}

/// Splits a line on whitespace, keeping `JMP( ... )` together.
fn tokenize(body: &str, line: usize) -> Result<Vec<String>> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut depth = 0usize;
    for ch in body.chars() {
        match ch {
            '(' => {
                depth += 1;
                current.push(ch);
            }
            ')' => {
                depth = depth.checked_sub(1).ok_or_else(|| Error::Parse {
                    line,
                    message: "unbalanced ')'".into(),
                })?;
                current.push(ch);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            c if c.is_whitespace() => {}
            c => {
                current.push(c);
                // a header glued to its first card, as in `OPS:ADD`
                if c == ':' && depth == 0 {
                    tokens.push(std::mem::take(&mut current));
                }
            }
        }
    }
    if depth != 0 {
        return Err(Error::Parse {
            line,
            message: "unbalanced '('".into(),
        });
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    Ok(tokens)
}

/// Parses a token in the context of the stream it appears in. Tokens that
/// are well formed but belong to another kind of stream are placement
/// errors.
fn parse_card(token: &str, stream: StreamId, line: usize) -> Result<Card> {
    let parse_err = |message: String| Error::Parse { line, message };
    let placement = |card: Card| Error::Placement {
        line,
        card: card.to_string(),
        stream,
    };

    if let Some(op) = Opcode::from_name(token) {
        let card = Card::Operation(op);
        return if stream == StreamId::Ops {
            Ok(card)
        } else {
            Err(placement(card))
        };
    }
    if let Some(args) = token.strip_prefix("JMP(").and_then(|t| t.strip_suffix(')')) {
        let card = parse_jump(args).map_err(parse_err)?;
        return if stream == StreamId::Ops {
            Ok(card)
        } else {
            Err(placement(card))
        };
    }
    if let Some(addr) = token.strip_prefix('V') {
        let addr: usize = addr
            .parse()
            .map_err(|_| parse_err(format!("bad variable card {token:?}")))?;
        let card = Card::Variable(addr);
        return if matches!(stream, StreamId::Vars1 | StreamId::Vars2) {
            Ok(card)
        } else {
            Err(placement(card))
        };
    }
    match stream {
        StreamId::Vars1 | StreamId::Vars2 => token
            .parse::<usize>()
            .map(Card::Variable)
            .map_err(|_| parse_err(format!("bad variable card {token:?}"))),
        StreamId::Nums1 | StreamId::Nums2 => AxisValue::parse_literal(token)
            .map(Card::Number)
            .map_err(|_| parse_err(format!("bad number card {token:?}"))),
        StreamId::Ops => match AxisValue::parse_literal(token) {
            Ok(v) => Err(placement(Card::Number(v))),
            Err(_) => Err(parse_err(format!("unknown operation {token:?}"))),
        },
    }
}

fn parse_jump(args: &str) -> std::result::Result<Card, String> {
    let parts: Vec<&str> = args.split(',').map(str::trim).collect();
    let [target, offset, condition] = parts[..] else {
        return Err(format!("JMP takes three arguments, got {args:?}"));
    };
    let target = StreamId::from_name(target).ok_or_else(|| format!("unknown stream {target:?}"))?;
    let offset: i64 = offset
        .strip_prefix('+')
        .unwrap_or(offset)
        .parse()
        .map_err(|_| format!("bad offset {offset:?}"))?;
    if offset == 0 {
        return Err("JMP offset must be nonzero".into());
    }
    let condition = match condition {
        "ALWAYS" => Condition::Always,
        "RUNUP" => Condition::OnRunup,
        other => return Err(format!("unknown condition {other:?}")),
    };
    Ok(Card::Combinatorial {
        target,
        offset,
        condition,
    })
}
