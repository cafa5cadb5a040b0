#![allow(dead_code)]

use picalc::{expand_hnf, scope_narrow, GenConfig, Process, TermGenerator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn config() -> GenConfig {
    GenConfig::default()
}

pub fn term(seed: u64) -> Process {
    TermGenerator::new(seed, config()).process()
}

/// Two terms with disjoint binders.
pub fn pair(seed: u64) -> (Process, Process) {
    TermGenerator::new(seed, config()).pair()
}

/// Randomly commutes sums and parallel compositions.
pub fn shuffle(p: &Process, rng: &mut ChaCha8Rng) -> Process {
    match p {
        Process::Nil => Process::Nil,
        Process::Prefixed(pre, c) => Process::prefixed(pre.clone(), shuffle(c, rng)),
        Process::Sum(l, r) => {
            let (l, r) = (shuffle(l, rng), shuffle(r, rng));
            if rng.gen_bool(0.5) {
                Process::sum(r, l)
            } else {
                Process::sum(l, r)
            }
        }
        Process::Par(l, r) => {
            let (l, r) = (shuffle(l, rng), shuffle(r, rng));
            if rng.gen_bool(0.5) {
                Process::par(r, l)
            } else {
                Process::par(l, r)
            }
        }
        Process::Restrict(z, b) => Process::restrict(z.clone(), shuffle(b, rng)),
        Process::Repl(b) => Process::repl(shuffle(b, rng)),
    }
}

/// A strongly bisimilar variant of `p`: commuted, narrowed, or expanded.
pub fn transform(p: &Process, seed: u64) -> Process {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match rng.gen_range(0..4) {
        0 => shuffle(p, &mut rng),
        1 => shuffle(&scope_narrow(p), &mut rng),
        2 => expand_hnf(p).expect("finite term").to_process(),
        _ => Process::par(shuffle(p, &mut rng), Process::Nil),
    }
}
