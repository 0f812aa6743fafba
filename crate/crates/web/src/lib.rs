//! Browser bindings for the emulator. Each export takes plain strings and
//! numbers and returns a JSON document for the page to render.

use analytical_engine::difference_engine::{tabulate, TableSpec};
use analytical_engine::mill::{self, MultVariant, MultiplesTable};
use analytical_engine::timing::KIND_NAMES;
use analytical_engine::{AxisValue, CardDecks, CarriageMode, Engine, MachineConfig, MicroOps};
use num_bigint::BigInt;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct OpCount {
    pub kind: &'static str,
    pub count: u64,
}

#[derive(Debug, Serialize)]
pub struct Partial {
    pub position: usize,
    pub digit: u8,
    pub multiple: String,
    pub contribution: String,
}

#[derive(Debug, Serialize)]
pub struct Walkthrough {
    pub product: String,
    /// The table of multiples T1..T9 of the multiplicand.
    pub table: Vec<String>,
    pub partials: Vec<Partial>,
    pub ops: Vec<OpCount>,
    pub cycles: u64,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct Row {
    pub argument: String,
    pub value: String,
    pub differences: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct DeckRun {
    pub printer: Vec<String>,
    pub trace: Vec<String>,
    /// Nonzero store cells as `(address, value)`.
    pub store: Vec<(usize, String)>,
    pub halted: bool,
    pub error: Option<String>,
    pub steps: u64,
    pub cycles: u64,
    pub seconds: f64,
}

fn op_counts(ops: &MicroOps) -> Vec<OpCount> {
    KIND_NAMES
        .iter()
        .zip(ops.counts())
        .filter(|(_, n)| *n > 0)
        .map(|(&kind, count)| OpCount { kind, count })
        .collect()
}

fn config(digits: usize) -> Result<MachineConfig, String> {
    if !(1..=50).contains(&digits) {
        return Err(format!("digits must be between 1 and 50, got {digits}"));
    }
    Ok(MachineConfig {
        digits,
        ..MachineConfig::default()
    })
}

/// Multiplies two decimals on the mill and records every table addition.
pub fn multiply_walkthrough(
    a: &str,
    b: &str,
    variant: &str,
    carriage: &str,
    digits: usize,
) -> Result<Walkthrough, String> {
    let config = config(digits)?;
    let variant: MultVariant = variant.parse()?;
    let carriage: CarriageMode = carriage.parse()?;
    let parse = |s: &str| AxisValue::parse(s.trim(), digits).map_err(|e| e.to_string());
    let (a, b) = (parse(a)?, parse(b)?);

    let product = mill::multiply(&a, &b, variant, carriage);
    let table = MultiplesTable::load(
        &a.abs().resize(digits + 1).map_err(|e| e.to_string())?,
        carriage,
    )
    .map_err(|e| e.to_string())?;
    let cost = config.cost_model.cost(&product.ops);
    Ok(Walkthrough {
        product: product.value.to_string(),
        table: table.entries().iter().map(ToString::to_string).collect(),
        partials: product
            .partials
            .iter()
            .map(|p| Partial {
                position: p.position,
                digit: p.digit,
                multiple: table.get(p.digit).to_string(),
                contribution: p.contribution.to_string(),
            })
            .collect(),
        ops: op_counts(&product.ops),
        cycles: cost.cycles,
        seconds: cost.seconds,
    })
}

/// Tabulates a polynomial given as comma-separated integer coefficients,
/// constant term first.
pub fn difference_table(
    poly: &str,
    from: i64,
    rows: usize,
    digits: usize,
) -> Result<Vec<Row>, String> {
    config(digits)?;
    if rows > 1000 {
        return Err("at most 1000 rows".into());
    }
    let coefficients = poly
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<BigInt>()
                .map_err(|_| format!("invalid coefficient {c:?}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut spec = TableSpec::new(coefficients, from, rows);
    spec.digits = digits;
    let rows = tabulate(&spec).map_err(|e| e.to_string())?;
    Ok(rows
        .into_iter()
        .map(|r| Row {
            argument: r.argument.to_string(),
            value: r.value.to_string(),
            differences: r.differences.iter().map(ToString::to_string).collect(),
        })
        .collect())
}

/// Runs a deck on an empty store. A failed run still reports the trace up
/// to the failure.
pub fn run_deck(deck: &str, digits: usize, max_steps: u64) -> Result<DeckRun, String> {
    let config = MachineConfig {
        max_steps,
        ..config(digits)?
    };
    let decks = CardDecks::parse(deck).map_err(|e| e.to_string())?;
    let store = config.empty_store();
    let mut engine = Engine::new(decks, store, config).map_err(|e| e.to_string())?;
    let error = engine.run_to_halt().err().map(|e| e.to_string());
    let cost = engine.total_cost();
    Ok(DeckRun {
        printer: engine.printer().to_vec(),
        trace: engine.trace().iter().map(ToString::to_string).collect(),
        store: engine
            .store()
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(a, v)| (a, v.to_string()))
            .collect(),
        halted: engine.is_halted(),
        error,
        steps: engine.step_count(),
        cycles: cost.cycles,
        seconds: cost.seconds,
    })
}

fn to_js<T: Serialize>(result: Result<T, String>) -> Result<String, JsValue> {
    result
        .and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = multiplyWalkthrough)]
pub fn multiply_walkthrough_js(
    a: &str,
    b: &str,
    variant: &str,
    carriage: &str,
    digits: usize,
) -> Result<String, JsValue> {
    to_js(multiply_walkthrough(a, b, variant, carriage, digits))
}

#[wasm_bindgen(js_name = differenceTable)]
pub fn difference_table_js(
    poly: &str,
    from: i64,
    rows: usize,
    digits: usize,
) -> Result<String, JsValue> {
    to_js(difference_table(poly, from, rows, digits))
}

#[wasm_bindgen(js_name = runDeck)]
pub fn run_deck_js(deck: &str, digits: usize, max_steps: u64) -> Result<String, JsValue> {
    to_js(run_deck(deck, digits, max_steps))
}
