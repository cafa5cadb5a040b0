//! Exhaustive enumeration of small terms.
//!
//! Terms are produced once per structural-congruence class representative:
//! sums and parallel compositions are n-ary with sorted operands, `0` never
//! appears as an operand, restrictions are never vacuous and are pushed as far
//! inward as they go, and match guards are only generated where they can
//! both succeed and fail. Binders are named by de Bruijn level. Every term
//! left out is structurally congruent to a listed term that is no larger.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::syntax::{Name, Prefix, Process};

/// Bounds of an enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TermUniverse {
    pub names: Vec<Name>,
    pub max_size: usize,
    pub allow_restriction: bool,
}

impl TermUniverse {
    pub fn new(names: &[&str], max_size: usize) -> TermUniverse {
        TermUniverse {
            names: names.iter().map(|n| Name::user(n)).collect(),
            max_size,
            allow_restriction: true,
        }
    }

    pub fn without_restriction(mut self) -> TermUniverse {
        self.allow_restriction = false;
        self
    }

    /// All representatives of size at most `max_size`, smallest first.
    pub fn terms(&self) -> Vec<Process> {
        let mut e = Enumerator::new(self);
        let mut out = Vec::new();
        for s in 1..=self.max_size {
            out.extend(e.proc(s, Scope::default()).iter().cloned());
        }
        out
    }

    /// Representatives of exactly size `s`.
    pub fn terms_of_size(&self, s: usize) -> Vec<Process> {
        Enumerator::new(self).proc(s, Scope::default()).to_vec()
    }
}

/// Binders in scope: bit `i` set means level `i` is an input binder, clear
/// means a restriction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
struct Scope {
    depth: u32,
    inputs: u32,
}

impl Scope {
    fn push(self, input: bool) -> Scope {
        Scope {
            depth: self.depth + 1,
            inputs: self.inputs | (u32::from(input) << self.depth),
        }
    }

    fn is_input(&self, n: &Name) -> bool {
        matches!(n, Name::Bound(i) if self.inputs & (1 << i) != 0)
    }

    fn binder(&self) -> Name {
        Name::Bound(self.depth)
    }
}

type Terms = Arc<Vec<Process>>;

struct Enumerator<'a> {
    tu: &'a TermUniverse,
    procs: HashMap<(usize, Scope), Terms>,
    prefixed: HashMap<(usize, Scope), Terms>,
    sums: HashMap<(usize, Scope), Terms>,
    restricts: HashMap<(usize, Scope), Terms>,
}

impl<'a> Enumerator<'a> {
    fn new(tu: &'a TermUniverse) -> Enumerator<'a> {
        Enumerator {
            tu,
            procs: HashMap::new(),
            prefixed: HashMap::new(),
            sums: HashMap::new(),
            restricts: HashMap::new(),
        }
    }

    fn names(&self, sc: Scope) -> Vec<Name> {
        self.tu
            .names
            .iter()
            .cloned()
            .chain((0..sc.depth).map(Name::Bound))
            .collect()
    }

    fn proc(&mut self, s: usize, sc: Scope) -> Terms {
        if let Some(t) = self.procs.get(&(s, sc)) {
            return t.clone();
        }
        let mut out = Vec::new();
        if s == 1 {
            out.push(Process::Nil);
        }
        out.extend(self.summation(s, sc).iter().cloned());
        out.extend(self.restrict(s, sc).iter().cloned());
        out.extend(self.par(s, sc));
        let t = Arc::new(out);
        self.procs.insert((s, sc), t.clone());
        t
    }

    /// Terms allowed as parallel components: anything but `0` and `|`.
    fn component(&mut self, s: usize, sc: Scope) -> Vec<Process> {
        let mut out = self.summation(s, sc).to_vec();
        out.extend(self.restrict(s, sc).iter().cloned());
        out
    }

    fn prefixes(&self, sc: Scope) -> Vec<Prefix> {
        let names = self.names(sc);
        let mut plain = vec![Prefix::Tau];
        for x in &names {
            plain.push(Prefix::input(x.clone(), sc.binder()));
            for y in &names {
                plain.push(Prefix::output(x.clone(), y.clone()));
            }
        }
        plain
    }

    fn guards(&self, sc: Scope) -> Vec<(Name, Name)> {
        let names = self.names(sc);
        let mut out = Vec::new();
        for (i, x) in names.iter().enumerate() {
            for y in &names[i + 1..] {
                if sc.is_input(x) || sc.is_input(y) {
                    out.push((x.clone(), y.clone()));
                }
            }
        }
        out
    }

    fn prefixed(&mut self, s: usize, sc: Scope) -> Terms {
        if let Some(t) = self.prefixed.get(&(s, sc)) {
            return t.clone();
        }
        let mut out = Vec::new();
        let guards = self.guards(sc);
        for pre in self.prefixes(sc) {
            let inner = if pre.binder().is_some() {
                sc.push(true)
            } else {
                sc
            };
            for (g, cost) in std::iter::once((None, 1)).chain(guards.iter().map(|g| (Some(g), 2))) {
                if s <= cost {
                    continue;
                }
                for cont in self.proc(s - cost, inner).iter() {
                    let head = match g {
                        None => pre.clone(),
                        Some((x, y)) => Prefix::guarded(x.clone(), y.clone(), pre.clone()),
                    };
                    out.push(Process::prefixed(head, cont.clone()));
                }
            }
        }
        out.sort();
        let t = Arc::new(out);
        self.prefixed.insert((s, sc), t.clone());
        t
    }

    /// Prefixed terms and sums of at least two distinct prefixed terms.
    fn summation(&mut self, s: usize, sc: Scope) -> Terms {
        if let Some(t) = self.sums.get(&(s, sc)) {
            return t.clone();
        }
        let mut out = self.prefixed(s, sc).to_vec();
        let mut parts = Vec::new();
        self.sum_parts(s, sc, None, &mut parts, &mut out);
        let t = Arc::new(out);
        self.sums.insert((s, sc), t.clone());
        t
    }

    /// Extends `parts` (strictly increasing) with summands of total size `left`.
    fn sum_parts(
        &mut self,
        left: usize,
        sc: Scope,
        min: Option<&Process>,
        parts: &mut Vec<Process>,
        out: &mut Vec<Process>,
    ) {
        // closing: the sum so far plus one last summand of size `left`
        if !parts.is_empty() {
            for last in self.prefixed(left, sc).iter() {
                if min.is_some_and(|m| last <= m) {
                    continue;
                }
                let mut all = parts.clone();
                all.push(last.clone());
                out.push(Process::sum_all(all));
            }
        }
        // one more summand followed by at least one further summand (+1 for the `+`)
        for size in 2..left {
            let rest = left - size;
            if rest < 3 {
                break;
            }
            for next in self.prefixed(size, sc).iter() {
                if min.is_some_and(|m| next <= m) {
                    continue;
                }
                parts.push(next.clone());
                let next = next.clone();
                self.sum_parts(rest - 1, sc, Some(&next), parts, out);
                parts.pop();
            }
        }
    }

    fn restrict(&mut self, s: usize, sc: Scope) -> Terms {
        if let Some(t) = self.restricts.get(&(s, sc)) {
            return t.clone();
        }
        let mut out = Vec::new();
        if self.tu.allow_restriction && s >= 3 {
            let z = sc.binder();
            for body in self.proc(s - 1, sc.push(false)).iter() {
                if !body.has_free(&z) || !narrowed(body, &z) || blocked(body, &z) {
                    continue;
                }
                out.push(Process::restrict(z.clone(), body.clone()));
            }
        }
        let t = Arc::new(out);
        self.restricts.insert((s, sc), t.clone());
        t
    }

    fn par(&mut self, s: usize, sc: Scope) -> Vec<Process> {
        let mut out = Vec::new();
        let mut parts = Vec::new();
        self.par_parts(s, sc, None, &mut parts, &mut out);
        out
    }

    /// Non-decreasing components of total size `left` after `parts`.
    fn par_parts(
        &mut self,
        left: usize,
        sc: Scope,
        min: Option<&Process>,
        parts: &mut Vec<Process>,
        out: &mut Vec<Process>,
    ) {
        if !parts.is_empty() {
            for last in self.component(left, sc) {
                if min.is_some_and(|m| &last < m) {
                    continue;
                }
                let mut all = parts.clone();
                all.push(last);
                out.push(Process::par_all(all));
            }
        }
        for size in 2..left {
            let rest = left - size;
            if rest < 3 {
                break;
            }
            for next in self.component(size, sc) {
                if min.is_some_and(|m| &next < m) {
                    continue;
                }
                parts.push(next.clone());
                self.par_parts(rest - 1, sc, Some(&next), parts, out);
                parts.pop();
            }
        }
    }
}

/// `new z.body` cannot be narrowed further: a `|` body has `z` in every
/// component.
fn narrowed(body: &Process, z: &Name) -> bool {
    match body {
        Process::Par(..) => par_components(body).iter().all(|c| c.has_free(z)),
        _ => true,
    }
}

/// A summation whose every summand waits on the private channel `z` can
/// never move.
fn blocked(body: &Process, z: &Name) -> bool {
    fn summands<'p>(p: &'p Process, out: &mut Vec<&'p Prefix>) -> bool {
        match p {
            Process::Prefixed(pre, _) => {
                out.push(pre);
                true
            }
            Process::Sum(l, r) => summands(l, out) && summands(r, out),
            _ => false,
        }
    }
    let mut pres = Vec::new();
    if !summands(body, &mut pres) {
        return false;
    }
    pres.iter().all(|pre| {
        let mut p = *pre;
        while let Prefix::Match { inner, .. } = p {
            p = inner;
        }
        match p {
            Prefix::Output { chan, .. } | Prefix::Input { chan, .. } => chan == z,
            _ => false,
        }
    })
}

pub(crate) fn par_components(p: &Process) -> Vec<&Process> {
    match p {
        Process::Par(l, r) => {
            let mut out = par_components(l);
            out.extend(par_components(r));
            out
        }
        other => vec![other],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    #[test]
    fn smallest_terms() {
        let tu = TermUniverse::new(&["a"], 2);
        let mut terms: Vec<String> = tu.terms().iter().map(|p| p.to_string()).collect();
        terms.sort();
        assert_eq!(terms, vec!["0", "a!a.0", "a?(v0).0", "tau.0"]);
    }

    #[test]
    fn sizes_match_and_terms_are_distinct() {
        let tu = TermUniverse::new(&["a", "b"], 5);
        let terms = tu.terms();
        let mut seen = std::collections::HashSet::new();
        for t in &terms {
            assert!(t.size() <= 5, "{t}");
            t.validate().unwrap();
            assert!(seen.insert(t.alpha_canonical()), "duplicate {t}");
        }
        for s in 1..=5 {
            assert!(tu.terms_of_size(s).iter().all(|t| t.size() == s));
        }
    }

    #[test]
    fn restriction_shapes() {
        let tu = TermUniverse::new(&["a"], 4);
        let terms = tu.terms();
        let ok = parse("new z.a!z.0").unwrap().alpha_canonical();
        assert!(terms.iter().any(|t| t.alpha_canonical() == ok));
        // vacuous or blocked restrictions are left out
        assert!(!terms
            .iter()
            .any(|t| t.alpha_canonical() == parse("new z.a!a.0").unwrap().alpha_canonical()));
        assert!(!terms
            .iter()
            .any(|t| t.alpha_canonical() == parse("new z.z!a.0").unwrap().alpha_canonical()));
    }
}
