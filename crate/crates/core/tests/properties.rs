mod common;

use std::str::FromStr;

use analytical_engine::axis::{self, AxisValue, WideValue};
use analytical_engine::carriage::{self, HoardState, PendingColumn};
use analytical_engine::difference_engine::{tabulate, AffineFeed, DifferenceState, TableSpec};
use analytical_engine::engine::{self, format_trace};
use analytical_engine::mill::{self, MultVariant, MultiplesTable};
use analytical_engine::{
    Card, CardDecks, CarriageMode, MachineConfig, Opcode, ReadMode, Store, StreamId,
};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

const MODES: [CarriageMode; 3] = [
    CarriageMode::Ripple,
    CarriageMode::Anticipating,
    CarriageMode::Hoarding,
];

fn big(text: &str) -> BigInt {
    BigInt::from_str(text).unwrap()
}

fn pow10(k: usize) -> BigInt {
    BigInt::from(10).pow(k as u32)
}

fn regex(pattern: &str) -> proptest::string::RegexGeneratorStrategy<String> {
    proptest::string::string_regex(pattern).unwrap()
}

/// A width from the machine's candidate capacities and two signed operands
/// that fit it.
fn operands() -> impl Strategy<Value = (usize, String, String)> {
    prop::sample::select(vec![25usize, 40, 50]).prop_flat_map(|w| {
        let num = format!("0|-?[1-9][0-9]{{0,{}}}", w - 1);
        (Just(w), regex(&num), regex(&num))
    })
}

fn mode() -> impl Strategy<Value = CarriageMode> {
    prop::sample::select(MODES.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn add_matches_oracle((w, x, y) in operands(), mode in mode()) {
        let (a, b) = (AxisValue::parse(&x, w).unwrap(), AxisValue::parse(&y, w).unwrap());
        let want = big(&x) + big(&y);
        let (got, runup) = axis::add(&a, &b, mode);
        prop_assert_eq!(runup, want.abs() >= pow10(w));
        if !runup {
            prop_assert_eq!(got.to_bigint(), want);
        } else {
            prop_assert_eq!(got.to_bigint(), big(&x).signum() * (want.abs() % pow10(w)));
        }
    }

    #[test]
    fn sub_matches_oracle((w, x, y) in operands(), mode in mode()) {
        let (a, b) = (AxisValue::parse(&x, w).unwrap(), AxisValue::parse(&y, w).unwrap());
        let want = big(&x) - big(&y);
        let (got, runup) = axis::sub(&a, &b, mode);
        let overflow = want.abs() >= pow10(w);
        if !overflow {
            prop_assert_eq!(got.to_bigint(), want.clone());
        }
        let flipped = !a.is_zero() && !want.is_zero() && want.signum() != big(&x).signum();
        prop_assert_eq!(runup, overflow || flipped);
    }

    #[test]
    fn add_commutes_in_every_carriage((w, x, y) in operands()) {
        let (a, b) = (AxisValue::parse(&x, w).unwrap(), AxisValue::parse(&y, w).unwrap());
        let reference = axis::add(&a, &b, CarriageMode::Ripple);
        for mode in MODES {
            prop_assert_eq!(&axis::add(&b, &a, mode), &reference);
            prop_assert_eq!(&axis::add(&a, &b, mode), &reference);
        }
    }

    #[test]
    fn zero_is_never_negative((w, x, _y) in operands(), mode in mode()) {
        let a = AxisValue::parse(&x, w).unwrap();
        let (diff, _) = axis::sub(&a, &a, mode);
        prop_assert!(diff.is_zero() && !diff.is_negative());
        let (sum, _) = axis::add(&a, &a.negate(), mode);
        prop_assert!(sum.is_zero() && !sum.is_negative());
        prop_assert!(!AxisValue::parse("-0", w).unwrap().is_negative());
    }

    #[test]
    fn shifts_round_trip((w, x, _y) in operands(), k in 0usize..60) {
        let a = AxisValue::parse(&x, w).unwrap();
        let (down, dropped) = axis::shift_down(&a, k);
        prop_assert_eq!(dropped.len(), k);
        let low: BigInt = dropped.iter().rev().fold(BigInt::zero(), |acc, &d| acc * 10 + d);
        // |a| = |down| * 10^k + dropped
        prop_assert_eq!(a.to_bigint().abs(), down.to_bigint().abs() * pow10(k) + low);
        match axis::shift_up(&a, k) {
            Ok(up) => {
                prop_assert_eq!(up.to_bigint(), a.to_bigint() * pow10(k));
                prop_assert_eq!(axis::shift_down(&up, k).0, a);
            }
            Err(_) => prop_assert!(a.significant_digits() + k > w),
        }
    }

    #[test]
    fn anticipating_equals_ripple(sums in prop::collection::vec(0u8..=18, 0..120), carry_in: bool) {
        let col = PendingColumn::new(sums, carry_in).unwrap();
        prop_assert_eq!(carriage::resolve_ripple(&col), carriage::resolve_anticipating(&col));
    }

    #[test]
    fn hoard_equals_stepwise_ripple(addends in prop::collection::vec(prop::collection::vec(0u8..=9, 12), 0..=9)) {
        let mut hoard = HoardState::new(12);
        let mut acc = vec![0u8; 12];
        for a in &addends {
            hoard.add(a).unwrap();
            acc = carriage::resolve_ripple(&PendingColumn::from_addition(&acc, a, false)).digits;
        }
        prop_assert_eq!(hoard.flush().digits, acc);
    }

    #[test]
    fn products_agree_with_oracle((w, x, y) in operands(), mode in mode()) {
        let (a, b) = (AxisValue::parse(&x, w).unwrap(), AxisValue::parse(&y, w).unwrap());
        let want = big(&x) * big(&y);
        for variant in [MultVariant::ShiftTable, MultVariant::ShiftAccumulator] {
            let p = mill::multiply(&a, &b, variant, mode);
            prop_assert_eq!(p.value.to_bigint(), want.clone());
            // the recorded partial additions sum to the magnitude of the product
            let total: BigInt = p.partials.iter().map(|s| s.contribution.to_bigint()).sum();
            prop_assert_eq!(total, want.abs());
        }
    }

    #[test]
    fn division_reconstructs_dividend(
        (w, x, y) in prop::sample::select(vec![25usize, 40, 50]).prop_flat_map(|w| {
            let num = format!("0|-?[1-9][0-9]{{0,{}}}", 2 * w - 1);
            let den = format!("-?[1-9][0-9]{{0,{}}}", w - 1);
            (Just(w), regex(&num), regex(&den))
        }),
        mode in mode(),
    ) {
        let (n, d) = (big(&x), big(&y));
        let num = WideValue::from_value(AxisValue::parse(&x, 2 * w).unwrap());
        let r = mill::divide(&num, &AxisValue::parse(&y, w).unwrap(), mode).unwrap();
        let (q, rem) = (r.quotient.to_bigint(), r.remainder.to_bigint());
        prop_assert_eq!(&q * &d + &rem, n.clone());
        prop_assert!(rem.abs() < d.abs());
        prop_assert_eq!(q, &n / &d);
    }

    #[test]
    fn multiples_table_is_sound(x in "0|[1-9][0-9]{0,24}", mode in mode()) {
        let m = AxisValue::parse(&x, 26).unwrap();
        let table = MultiplesTable::load(&m, mode).unwrap();
        for j in 1..=9u8 {
            prop_assert_eq!(table.get(j).to_bigint(), big(&x) * j);
        }
    }

    #[test]
    fn restoring_reads_are_idempotent(addr in 1usize..=20, x in "0|-?[1-9][0-9]{0,24}", other in 1usize..=20) {
        let mut store = Store::new(20, 25, ReadMode::Restoring);
        let before = store.clone();
        store.write(addr, AxisValue::parse(&x, 25).unwrap()).unwrap();
        let first = store.read(addr).unwrap();
        prop_assert_eq!(store.read(addr).unwrap(), first.clone());
        prop_assert_eq!(first.to_bigint(), big(&x));
        if other != addr {
            // a write touches only its own cell
            prop_assert_eq!(store.peek(other).unwrap(), before.peek(other).unwrap());
        }
    }

    #[test]
    fn zeroing_reads_clear_the_cell(addr in 1usize..=20, x in "-?[1-9][0-9]{0,24}") {
        let mut store = Store::new(20, 25, ReadMode::Zeroing);
        store.write(addr, AxisValue::parse(&x, 25).unwrap()).unwrap();
        prop_assert_eq!(store.read(addr).unwrap().to_bigint(), big(&x));
        prop_assert!(store.read(addr).unwrap().is_zero());
    }

    #[test]
    fn store_image_round_trips(cells in prop::collection::btree_map(1usize..=30, "-?[1-9][0-9]{0,24}", 0..10)) {
        let mut store = Store::new(30, 25, ReadMode::Restoring);
        for (addr, x) in &cells {
            store.write(*addr, AxisValue::parse(x, 25).unwrap()).unwrap();
        }
        let back = Store::parse_image(&store.to_image(), 30, 25, ReadMode::Restoring).unwrap();
        prop_assert_eq!(back, store);
    }

    #[test]
    fn seek_has_an_inverse(len in 0usize..20, start in 0usize..20, offset in -25i64..25) {
        let mut decks = CardDecks::new();
        for _ in 0..len {
            decks.push(StreamId::Vars1, Card::Variable(1)).unwrap();
        }
        for _ in 0..start.min(len) {
            decks.advance(StreamId::Vars1).unwrap();
        }
        let before = decks.cursors();
        if decks.seek(StreamId::Vars1, offset).is_ok() {
            decks.seek(StreamId::Vars1, -offset).unwrap();
            prop_assert_eq!(decks.cursors(), before);
        } else {
            prop_assert_eq!(decks.cursors(), before);
        }
    }

    #[test]
    fn decks_round_trip_through_text(deck in random_deck()) {
        let text = deck.emit();
        let parsed = CardDecks::parse(&text).unwrap();
        prop_assert_eq!(parsed.emit(), text);
        prop_assert_eq!(parsed, deck);
    }

    #[test]
    fn tabulation_matches_direct_evaluation(
        coefficients in prop::collection::vec(-50i64..50, 1..5),
        start in -20i64..20,
        step in 1i64..4,
        extra_order in 0usize..2,
        reseed in prop::option::of(1usize..10),
    ) {
        let mut spec = TableSpec::new(coefficients.iter().map(|&c| BigInt::from(c)).collect(), start, 40);
        spec.step = BigInt::from(step);
        spec.order = spec.degree() + extra_order;
        spec.digits = 25;
        let plain = tabulate(&spec).unwrap();
        for (i, row) in plain.iter().enumerate() {
            let x = BigInt::from(start + step * i as i64);
            let want = coefficients.iter().rev().fold(BigInt::zero(), |acc, &c| acc * &x + c);
            prop_assert_eq!(&row.argument, &x);
            prop_assert_eq!(row.value.to_bigint(), want);
        }
        // re-seeding exact integer tables changes nothing
        spec.reseed_every = reseed;
        prop_assert_eq!(tabulate(&spec).unwrap(), plain);
    }

    #[test]
    fn highest_difference_is_invariant(values in prop::collection::vec(-1000i64..1000, 1..6), steps in 0usize..30) {
        let mut state = DifferenceState::from_integers(&values, 25).unwrap();
        let top = state.columns().last().unwrap().clone();
        for _ in 0..steps {
            state.step().unwrap();
            prop_assert_eq!(state.columns().last().unwrap(), &top);
        }
    }

    #[test]
    fn straight_line_decks_are_deterministic_and_replayable(program in straight_line_program()) {
        let (deck, image) = program;
        let config = MachineConfig { digits: 25, store_size: 12, ..MachineConfig::default() };
        let store = Store::parse_image(&image, 12, 25, config.read_mode).unwrap();
        let first = engine::run(deck.clone(), store.clone(), config.clone());
        let second = engine::run(deck, store.clone(), config);
        prop_assert_eq!(&first, &second);
        if let Ok(out) = first {
            prop_assert_eq!(format_trace(&out.trace), format_trace(&second.unwrap().trace));
            prop_assert_eq!(engine::replay(&out.trace, &store).unwrap(), out.store);
        }
    }
}

#[test]
fn feedback_follows_linear_recurrence() {
    // c1 <- 3 c0 + 1, then c0 <- c0 + c1: x' = 4x + 1
    let feed = AffineFeed {
        scale: BigInt::from(3),
        offset: BigInt::from(1),
    };
    let mut state = DifferenceState::from_integers(&[1, 0], 50).unwrap();
    let mut x = BigInt::from(1);
    for _ in 0..50 {
        state.tail_feedback_step(&feed).unwrap();
        x = 4 * x + 1;
        assert_eq!(state.value().to_bigint(), x);
    }
}

fn random_deck() -> impl Strategy<Value = CardDecks> {
    let card = prop_oneof![
        prop::sample::select(Opcode::ALL.to_vec())
            .prop_map(|op| (StreamId::Ops, Card::Operation(op))),
        (0usize..200).prop_map(|a| (StreamId::Vars1, Card::Variable(a))),
        (0usize..200).prop_map(|a| (StreamId::Vars2, Card::Variable(a))),
        "0|-?[1-9][0-9]{0,30}".prop_map(|x| (
            StreamId::Nums1,
            Card::Number(AxisValue::parse_literal(&x).unwrap())
        )),
        (
            prop::sample::select(StreamId::ALL.to_vec()),
            prop_oneof![-9i64..0, 1i64..10],
            prop::bool::ANY
        )
            .prop_map(|(target, offset, always)| {
                let condition = if always {
                    analytical_engine::Condition::Always
                } else {
                    analytical_engine::Condition::OnRunup
                };
                (
                    StreamId::Ops,
                    Card::Combinatorial {
                        target,
                        offset,
                        condition,
                    },
                )
            }),
    ];
    prop::collection::vec(card, 0..40).prop_map(|cards| {
        let mut decks = CardDecks::new();
        for (stream, card) in cards {
            decks.push(stream, card).unwrap();
        }
        decks
    })
}

/// A deck of arithmetic on V1..V10 with no jumps, and an initial store.
fn straight_line_program() -> impl Strategy<Value = (CardDecks, String)> {
    let op = (
        prop::sample::select(vec![
            Opcode::Add,
            Opcode::Sub,
            Opcode::Mul,
            Opcode::Div,
            Opcode::Print,
        ]),
        0usize..=10,
        0usize..=10,
        0usize..=10,
    );
    (
        prop::collection::vec(op, 0..25),
        prop::collection::vec("0|-?[1-9][0-9]{0,11}", 10),
    )
        .prop_map(|(ops, values)| {
            let mut decks = CardDecks::new();
            for (opcode, s1, s2, dest) in ops {
                decks.push(StreamId::Ops, Card::Operation(opcode)).unwrap();
                decks.push(StreamId::Vars1, Card::Variable(s1)).unwrap();
                if opcode != Opcode::Print {
                    decks.push(StreamId::Vars2, Card::Variable(s2)).unwrap();
                    decks.push(StreamId::Vars1, Card::Variable(dest)).unwrap();
                }
            }
            decks
                .push(StreamId::Ops, Card::Operation(Opcode::Halt))
                .unwrap();
            let image = values
                .iter()
                .enumerate()
                .map(|(i, v)| format!("V{} = {v}\n", i + 1))
                .collect();
            (decks, image)
        })
}
