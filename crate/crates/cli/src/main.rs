use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use analytical_engine::difference_engine::{format_scaled, tabulate, TableSpec};
use analytical_engine::engine::{format_trace, DEFAULT_DIGITS, DEFAULT_MAX_STEPS};
use analytical_engine::store::DEFAULT_CAPACITY;
use analytical_engine::timing::{calibrate, CalibrationTargets};
use analytical_engine::{
    CardDecks, CarriageMode, CostModel, Engine, Error, MachineConfig, MultVariant, ReadMode, Store,
};
use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;

const EXIT_INPUT: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_RUNAWAY: u8 = 3;

/// Analytical Engine emulator.
///
/// Exit status: 0 success, 1 parse or configuration error, 2 runtime error,
/// 3 step limit reached.
#[derive(Parser, Debug)]
#[command(name = "aengine", version)]
struct Cli {
    #[command(flatten)]
    machine: MachineArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct MachineArgs {
    /// Digits per store variable.
    #[arg(long, global = true, default_value_t = DEFAULT_DIGITS, value_parser = parse_digits)]
    digits: usize,

    /// Number of store variables, V1 upward.
    #[arg(long, global = true, default_value_t = DEFAULT_CAPACITY)]
    store_size: usize,

    #[arg(long, global = true, value_enum, default_value_t = ReadModeArg::Restoring)]
    read_mode: ReadModeArg,

    /// Multiplication variant.
    #[arg(long = "mult", global = true, value_enum, default_value_t = MultArg::ShiftAcc)]
    mult: MultArg,

    #[arg(long, global = true, value_enum, default_value_t = CarriageArg::Anticipating)]
    carriage: CarriageArg,

    /// Cost model file of `key = value` lines.
    #[arg(long, global = true)]
    cost_model: Option<PathBuf>,

    /// Stop with status 3 after this many steps.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: u64,

    /// Write the execution trace here.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReadModeArg {
    Restoring,
    Zeroing,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MultArg {
    ShiftT,
    ShiftAcc,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CarriageArg {
    Ripple,
    Anticipating,
    Hoarding,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a deck and print what the printer prints.
    Run {
        deck: PathBuf,
        /// Initial store image.
        #[arg(long)]
        store: Option<PathBuf>,
        /// Write the final store image here.
        #[arg(long)]
        final_store: Option<PathBuf>,
    },
    /// Parse a deck and print it in canonical form.
    Assemble { deck: PathBuf },
    /// Tabulate a polynomial by the method of differences.
    Table(TableArgs),
    /// Run a deck and report its modeled cost per operation.
    Timing {
        deck: PathBuf,
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Fit a cost model to the quoted throughput and print it.
    Calibrate,
}

#[derive(Args, Debug)]
struct TableArgs {
    /// Coefficients, constant term first, e.g. `0,0,1` for n².
    #[arg(long, allow_hyphen_values = true)]
    poly: String,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    from: i64,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    step: i64,
    #[arg(long)]
    rows: usize,
    /// Difference columns; defaults to the polynomial degree.
    #[arg(long)]
    order: Option<usize>,
    /// Re-seed from the polynomial every this many rows.
    #[arg(long)]
    reseed: Option<usize>,
    /// Decimal places carried by the coefficients.
    #[arg(long, default_value_t = 0)]
    scale: u32,
    /// Also print the difference columns.
    #[arg(long)]
    diffs: bool,
}

fn parse_digits(s: &str) -> Result<usize, String> {
    match s.parse() {
        Ok(d @ (25 | 40 | 50)) => Ok(d),
        _ => Err("must be one of 25, 40, 50".into()),
    }
}

/// An error together with the exit status it maps to.
struct Failure {
    status: u8,
    error: anyhow::Error,
}

fn input(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        status: EXIT_INPUT,
        error: error.into(),
    }
}

fn runtime(error: Error) -> Failure {
    let status = match error {
        Error::RunawayGuard(_) => EXIT_RUNAWAY,
        _ => EXIT_RUNTIME,
    };
    Failure {
        status,
        error: error.into(),
    }
}

fn main() -> ExitCode {
    // usage errors are input errors too; clap's own status would read as a
    // runtime failure
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(status);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("aengine: {:#}", f.error);
            ExitCode::from(f.status)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Run {
            deck,
            store,
            final_store,
        } => cmd_run(&cli.machine, deck, store.as_deref(), final_store.as_deref()),
        Command::Assemble { deck } => {
            let decks = read_deck(deck)?;
            print!("{}", decks.emit());
            Ok(())
        }
        Command::Table(args) => cmd_table(&cli.machine, args),
        Command::Timing { deck, store } => cmd_timing(&cli.machine, deck, store.as_deref()),
        Command::Calibrate => {
            let config = machine_config(&cli.machine)?;
            let model = calibrate(&CalibrationTargets::default(), &config).map_err(input)?;
            print!("{}", model.to_text());
            Ok(())
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(input)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(|error| Failure {
            status: EXIT_RUNTIME,
            error,
        })
}

fn read_deck(path: &Path) -> Result<CardDecks, Failure> {
    CardDecks::parse(&read_text(path)?)
        .with_context(|| format!("{}", path.display()))
        .map_err(input)
}

fn machine_config(args: &MachineArgs) -> Result<MachineConfig, Failure> {
    let cost_model = match &args.cost_model {
        Some(path) => CostModel::parse(&read_text(path)?)
            .with_context(|| format!("{}", path.display()))
            .map_err(input)?,
        None => CostModel::default(),
    };
    Ok(MachineConfig {
        digits: args.digits,
        store_size: args.store_size,
        read_mode: match args.read_mode {
            ReadModeArg::Restoring => ReadMode::Restoring,
            ReadModeArg::Zeroing => ReadMode::Zeroing,
        },
        mult_variant: match args.mult {
            MultArg::ShiftT => MultVariant::ShiftTable,
            MultArg::ShiftAcc => MultVariant::ShiftAccumulator,
        },
        carriage: match args.carriage {
            CarriageArg::Ripple => CarriageMode::Ripple,
            CarriageArg::Anticipating => CarriageMode::Anticipating,
            CarriageArg::Hoarding => CarriageMode::Hoarding,
        },
        max_steps: args.max_steps,
        cost_model,
    })
}

/// Builds an engine ready to run; every failure here is an input error.
fn load_engine(args: &MachineArgs, deck: &Path, store: Option<&Path>) -> Result<Engine, Failure> {
    let config = machine_config(args)?;
    let decks = read_deck(deck)?;
    let store = match store {
        Some(path) => Store::parse_image(
            &read_text(path)?,
            config.store_size,
            config.digits,
            config.read_mode,
        )
        .with_context(|| format!("{}", path.display()))
        .map_err(input)?,
        None => config.empty_store(),
    };
    Engine::new(decks, store, config)
        .with_context(|| format!("{}", deck.display()))
        .map_err(input)
}

/// Runs to a halt, then writes the trace whether or not the run completed.
fn run_engine(engine: &mut Engine, trace: Option<&Path>) -> Result<Result<(), Error>, Failure> {
    let outcome = engine.run_to_halt();
    if let Some(path) = trace {
        write_text(path, &format_trace(engine.trace()))?;
    }
    Ok(outcome)
}

fn cmd_run(
    args: &MachineArgs,
    deck: &Path,
    store: Option<&Path>,
    final_store: Option<&Path>,
) -> Result<(), Failure> {
    let mut engine = load_engine(args, deck, store)?;
    let outcome = run_engine(&mut engine, args.trace.as_deref())?;
    // a runaway still reports what was printed and the store it reached
    match outcome {
        Ok(()) | Err(Error::RunawayGuard(_)) => {}
        Err(e) => return Err(runtime(e)),
    }
    for line in engine.printer() {
        println!("{line}");
    }
    if let Some(path) = final_store {
        write_text(path, &engine.store().to_image())?;
    }
    let cost = engine.total_cost();
    eprintln!(
        "{} after {} steps, {} cycles ({:.3} s)",
        if engine.is_halted() {
            "halted"
        } else {
            "stopped"
        },
        engine.step_count(),
        cost.cycles,
        cost.seconds
    );
    if !engine.is_halted() {
        return Err(runtime(Error::RunawayGuard(args.max_steps)));
    }
    Ok(())
}

fn cmd_timing(args: &MachineArgs, deck: &Path, store: Option<&Path>) -> Result<(), Failure> {
    let mut engine = load_engine(args, deck, store)?;
    let outcome = run_engine(&mut engine, args.trace.as_deref())?;

    let mut per_op: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for record in engine.trace() {
        let entry = per_op.entry(record.opcode()).or_default();
        entry.0 += 1;
        entry.1 += record.cost.cycles;
    }
    let unit = engine.config().cost_model.unit_seconds;
    println!(
        "{:<6} {:>8} {:>14} {:>12}",
        "op", "count", "cycles", "seconds"
    );
    for (op, (count, cycles)) in &per_op {
        println!(
            "{op:<6} {count:>8} {cycles:>14} {:>12.3}",
            *cycles as f64 * unit
        );
    }
    let total = engine.total_cost();
    println!(
        "{:<6} {:>8} {:>14} {:>12.3}",
        "total",
        engine.step_count(),
        total.cycles,
        total.seconds
    );
    outcome.map_err(runtime)
}

/// Parses a decimal coefficient into an integer scaled by `10^scale`.
fn scaled_coefficient(text: &str, scale: u32) -> anyhow::Result<BigInt> {
    let text = text.trim();
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if frac.len() > scale as usize {
        bail!("coefficient {text:?} has more than {scale} decimal places");
    }
    if !frac.chars().all(|c| c.is_ascii_digit()) {
        bail!("invalid coefficient {text:?}");
    }
    let padded = format!("{int}{frac:0<width$}", width = scale as usize);
    padded
        .parse::<BigInt>()
        .map_err(|_| anyhow!("invalid coefficient {text:?}"))
}

fn cmd_table(args: &MachineArgs, table: &TableArgs) -> Result<(), Failure> {
    let coefficients = table
        .poly
        .split(',')
        .map(|c| scaled_coefficient(c, table.scale))
        .collect::<anyhow::Result<Vec<_>>>()
        .map_err(input)?;
    let mut spec = TableSpec::new(coefficients, table.from, table.rows);
    spec.step = BigInt::from(table.step);
    spec.scale = table.scale;
    spec.digits = args.digits;
    spec.reseed_every = table.reseed;
    spec.order = table.order.unwrap_or_else(|| spec.degree());
    if spec.order < spec.degree() {
        return Err(input(anyhow!(
            "order {} is below the polynomial degree {}",
            spec.order,
            spec.degree()
        )));
    }

    let rows = tabulate(&spec).map_err(runtime)?;
    let mut out = String::new();
    for row in &rows {
        out.push_str(&row.argument.to_string());
        out.push(' ');
        out.push_str(&format_scaled(&row.value, table.scale));
        if table.diffs {
            for d in &row.differences {
                out.push(' ');
                out.push_str(&format_scaled(d, table.scale));
            }
        }
        out.push('\n');
    }
    print!("{out}");
    Ok(())
}
