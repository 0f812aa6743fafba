//! Random operands shared by the integration tests. Values are produced as
//! decimal text so the big-integer oracle never sees the emulator's digits.

#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;

/// A signed decimal of exactly `digits` significant digits.
pub fn decimal_of_len<R: Rng>(rng: &mut R, digits: usize) -> String {
    if digits == 0 {
        return "0".into();
    }
    let mut s = String::with_capacity(digits + 1);
    if rng.gen_bool(0.5) {
        s.push('-');
    }
    s.push(char::from(b'0' + rng.gen_range(1..=9)));
    for _ in 1..digits {
        s.push(char::from(b'0' + rng.gen_range(0..=9)));
    }
    s
}

/// A signed decimal of up to `max_digits` digits, length uniform.
pub fn decimal<R: Rng>(rng: &mut R, max_digits: usize) -> String {
    let len = rng.gen_range(0..=max_digits);
    decimal_of_len(rng, len)
}

/// Random digits of a column, little-endian.
pub fn digits<R: Rng>(rng: &mut R, width: usize) -> Vec<u8> {
    (0..width).map(|_| rng.gen_range(0..=9)).collect()
}

pub fn decks_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../decks")
}

/// Every shipped deck, sorted by file name.
pub fn shipped_decks() -> Vec<(String, String)> {
    let mut decks: Vec<(String, String)> = std::fs::read_dir(decks_dir())
        .expect("decks directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "deck"))
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    decks.sort();
    decks
}
