//! Seeded generator of replication-free terms.
//!
//! Free names are drawn from `a, b, c, ...`; every binder is a distinct
//! `x0, x1, ...`, so generated terms (and any two terms drawn from the same
//! generator) never reuse a bound name or bind a free one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{Name, Prefix, Process};

#[derive(Debug, Clone)]
pub struct GenConfig {
    /// Number of free names available.
    pub names: usize,
    /// Maximum prefix nesting.
    pub max_depth: u32,
    /// Maximum number of parallel components or summands at one level.
    pub max_width: usize,
    pub restriction: bool,
    pub matches: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            names: 3,
            max_depth: 3,
            max_width: 2,
            restriction: true,
            matches: true,
        }
    }
}

pub struct TermGenerator {
    rng: ChaCha8Rng,
    config: GenConfig,
    free: Vec<Name>,
    binders: usize,
}

impl TermGenerator {
    pub fn new(seed: u64, config: GenConfig) -> TermGenerator {
        let free = (0..config.names.max(1))
            .map(|i| Name::user(&((b'a' + (i % 26) as u8) as char).to_string()))
            .collect();
        TermGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            config,
            free,
            binders: 0,
        }
    }

    pub fn process(&mut self) -> Process {
        let depth = self.config.max_depth;
        self.gen_proc(depth, &mut Vec::new())
    }

    /// Two terms with disjoint binders.
    pub fn pair(&mut self) -> (Process, Process) {
        (self.process(), self.process())
    }

    fn binder(&mut self) -> Name {
        let n = Name::user(&format!("x{}", self.binders));
        self.binders += 1;
        n
    }

    fn name(&mut self, scope: &[Name]) -> Name {
        let total = self.free.len() + scope.len();
        let i = self.rng.gen_range(0..total);
        if i < self.free.len() {
            self.free[i].clone()
        } else {
            scope[i - self.free.len()].clone()
        }
    }

    fn gen_proc(&mut self, depth: u32, scope: &mut Vec<Name>) -> Process {
        if depth == 0 {
            return Process::Nil;
        }
        match self.rng.gen_range(0..10) {
            0 => Process::Nil,
            1..=2 if self.config.max_width > 1 => {
                let width = self.rng.gen_range(2..=self.config.max_width);
                let parts: Vec<Process> = (0..width)
                    .map(|_| self.gen_proc(depth - 1, scope))
                    .collect();
                Process::par_all(parts)
            }
            3 if self.config.restriction => {
                let z = self.binder();
                scope.push(z.clone());
                let body = self.gen_proc(depth, scope);
                scope.pop();
                Process::restrict(z, body)
            }
            _ => self.gen_sum(depth, scope),
        }
    }

    fn gen_sum(&mut self, depth: u32, scope: &mut Vec<Name>) -> Process {
        let width = if self.config.max_width > 1 && self.rng.gen_bool(0.3) {
            self.rng.gen_range(2..=self.config.max_width)
        } else {
            1
        };
        let parts: Vec<Process> = (0..width)
            .map(|_| self.gen_prefixed(depth, scope))
            .collect();
        Process::sum_all(parts)
    }

    fn gen_prefixed(&mut self, depth: u32, scope: &mut Vec<Name>) -> Process {
        let (prefix, bound) = match self.rng.gen_range(0..7) {
            0..=2 => (Prefix::output(self.name(scope), self.name(scope)), None),
            3..=4 => {
                let b = self.binder();
                (Prefix::input(self.name(scope), b.clone()), Some(b))
            }
            _ => (Prefix::Tau, None),
        };
        let prefix = if self.config.matches && self.rng.gen_bool(0.1) {
            let (l, r) = (self.name(scope), self.name(scope));
            Prefix::guarded(l, r, prefix)
        } else {
            prefix
        };
        if let Some(b) = &bound {
            scope.push(b.clone());
        }
        let cont = self.gen_proc(depth - 1, scope);
        if bound.is_some() {
            scope.pop();
        }
        Process::prefixed(prefix, cont)
    }
}
