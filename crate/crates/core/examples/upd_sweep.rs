//! Exhaustive unique-decomposition check over a small universe.
//!
//! `cargo run --release --example upd_sweep -- 5 weak fresh-only`

use picalc::decompose::sweep_upd_with;
use picalc::{InputMode, Mode, TermUniverse};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let size: usize = args.first().map_or(5, |s| s.parse().expect("max size"));
    let mode: Mode = args
        .get(1)
        .map_or(Ok(Mode::Strong), |s| s.parse())
        .expect("mode");
    let inputs: InputMode = args
        .get(2)
        .map_or(Ok(InputMode::Early), |s| s.parse())
        .expect("input mode");
    let tu = TermUniverse::new(&["a", "b"], size);
    let report = sweep_upd_with(&tu, mode, inputs, |done, total| {
        if done % 50_000 == 0 {
            eprintln!("{done}/{total}");
        }
    })
    .expect("sweep");
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
}
