//! Decomposition into parallel primes.
//!
//! A process is prime when it is not equivalent to `0` and is not equivalent
//! to `q | r` with both `q` and `r` inequivalent to `0`. Splits are searched
//! among the derivatives of the process: if `p ~ q | r`, letting `q` run to a
//! deadlock leaves a derivative of `p` equivalent to `r`, and symmetrically
//! for `q`. Equivalence classes are hash-consed, so a sweep over many terms
//! shares every class it has already seen.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::enumerate::{par_components, TermUniverse};
use crate::equivalence::Mode;
use crate::error::{Error, Result};
use crate::lts::{start_allocation, Lts};
use crate::normalize::stutter_free;
use crate::parser::pretty;
use crate::semantics::{transitions_at, InputMode, NameUniverse};
use crate::syntax::{Action, Name, Process};

/// Pushes every restriction as far inward as it goes. The result is
/// structurally congruent to the input.
pub fn scope_narrow(p: &Process) -> Process {
    match p {
        Process::Nil => Process::Nil,
        Process::Prefixed(pre, c) => Process::prefixed(pre.clone(), scope_narrow(c)),
        Process::Sum(l, r) => Process::sum(scope_narrow(l), scope_narrow(r)),
        Process::Par(l, r) => Process::par(scope_narrow(l), scope_narrow(r)),
        Process::Repl(b) => Process::repl(scope_narrow(b)),
        Process::Restrict(z, body) => push_restriction(z, scope_narrow(body)),
    }
}

fn push_restriction(z: &Name, body: Process) -> Process {
    if !body.has_free(z) {
        return body;
    }
    match &body {
        Process::Par(..) => {
            let comps = par_components(&body);
            let users: Vec<usize> = (0..comps.len()).filter(|&i| comps[i].has_free(z)).collect();
            if users.len() == comps.len() {
                return Process::restrict(z.clone(), body.clone());
            }
            let inner = match users.as_slice() {
                [only] => push_restriction(z, comps[*only].clone()),
                _ => Process::restrict(
                    z.clone(),
                    Process::par_all(users.iter().map(|&i| comps[i].clone())),
                ),
            };
            let mut inner = Some(inner);
            let rebuilt = comps.iter().enumerate().filter_map(|(i, c)| {
                if !users.contains(&i) {
                    Some((*c).clone())
                } else {
                    inner.take()
                }
            });
            Process::par_all(rebuilt.collect::<Vec<_>>())
        }
        Process::Restrict(y, inner) => {
            let pushed = push_restriction(z, (**inner).clone());
            let stuck = matches!(&pushed, Process::Restrict(n, b) if n == z && **b == **inner);
            if stuck {
                Process::restrict(z.clone(), body.clone())
            } else {
                push_restriction(y, pushed)
            }
        }
        _ => Process::restrict(z.clone(), body),
    }
}

/// Identifier of an equivalence class within one [`Classifier`].
pub type ClassId = u32;

/// The class of `0`.
pub const ZERO_CLASS: ClassId = 0;

type Saturated = Option<Arc<[(Action, ClassId)]>>;

type Signature = Vec<(Action, ClassId)>;

#[derive(Debug, Clone)]
struct ClassInfo {
    /// Weighted depth of the first member; a class invariant only for `~`.
    depth: u64,
    /// Longest number of visible actions on any path.
    visible_depth: u64,
    /// Subjects of reachable visible actions, pool names collapsed to one.
    channels: Arc<BTreeSet<Name>>,
}

/// Assigns class identifiers to processes so that two processes (at the
/// same allocation) share an identifier exactly when they are equivalent.
///
/// Strong classes are keyed by the set of `(action, class of target)` pairs.
/// Weak classes are keyed by the saturated set `{(α, class) : p ⇒α q}`
/// (with `τ` meaning one or more steps); a state with a τ-path to an
/// equivalent state is recognised by the key of that state's class.
pub struct Classifier {
    mode: Mode,
    universe: NameUniverse,
    states: HashMap<(Process, usize), (ClassId, Saturated)>,
    table: HashMap<Signature, ClassId>,
    info: Vec<ClassInfo>,
}

impl Classifier {
    pub fn new(mode: Mode, universe: NameUniverse) -> Classifier {
        let zero = ClassInfo {
            depth: 0,
            visible_depth: 0,
            channels: Arc::new(BTreeSet::new()),
        };
        Classifier {
            mode,
            universe,
            states: HashMap::new(),
            table: HashMap::from([(Vec::new(), ZERO_CLASS)]),
            info: vec![zero],
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn universe(&self) -> &NameUniverse {
        &self.universe
    }

    pub fn class_count(&self) -> usize {
        self.info.len()
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// Class of `p` started at its own allocation.
    pub fn class_of(&mut self, p: &Process) -> Result<ClassId> {
        p.require_finite()?;
        let p = p.alpha_canonical();
        let a = start_allocation(std::slice::from_ref(&p), &self.universe);
        self.visit(p, a).map(|v| v.0)
    }

    /// Class of `p` with `allocated` pool names already used.
    pub fn class_at(&mut self, p: &Process, allocated: usize) -> Result<ClassId> {
        p.require_finite()?;
        self.visit(p.alpha_canonical(), allocated).map(|v| v.0)
    }

    pub fn equivalent(&mut self, p: &Process, q: &Process) -> Result<bool> {
        let a = start_allocation(&[p.clone(), q.clone()], &self.universe);
        Ok(self.class_at(p, a)? == self.class_at(q, a)?)
    }

    pub fn is_zero(&mut self, p: &Process) -> Result<bool> {
        Ok(self.class_of(p)? == ZERO_CLASS)
    }

    pub fn depth(&self, k: ClassId) -> u64 {
        self.info[k as usize].depth
    }

    pub fn visible_depth(&self, k: ClassId) -> u64 {
        self.info[k as usize].visible_depth
    }

    fn channels(&self, k: ClassId) -> &BTreeSet<Name> {
        &self.info[k as usize].channels
    }

    fn visit(&mut self, p: Process, allocated: usize) -> Result<(ClassId, Saturated)> {
        let key = (p, allocated);
        if let Some(v) = self.states.get(&key) {
            return Ok(v.clone());
        }
        let ts = transitions_at(&key.0, &self.universe, allocated)?;
        let (mut depth, mut visible_depth) = (0, 0);
        let mut channels = BTreeSet::new();
        let mut sig: Signature = Vec::new();
        for t in ts {
            let (k, sat) = self.visit(t.target, t.allocated)?;
            let info = &self.info[k as usize];
            depth = depth.max(t.action.weight() + info.depth);
            visible_depth = visible_depth.max(u64::from(!t.action.is_tau()) + info.visible_depth);
            channels.extend(info.channels.iter().cloned());
            if let Some(c) = subject(&t.action) {
                channels.insert(c);
            }
            match (self.mode, sat) {
                (Mode::Weak, Some(sat)) if t.action.is_tau() => {
                    sig.push((Action::Tau, k));
                    sig.extend(sat.iter().cloned());
                }
                (Mode::Weak, Some(sat)) => {
                    sig.push((t.action.clone(), k));
                    sig.extend(
                        sat.iter()
                            .filter(|(a, _)| a.is_tau())
                            .map(|(_, k2)| (t.action.clone(), *k2)),
                    );
                }
                _ => sig.push((t.action, k)),
            }
        }
        sig.sort();
        sig.dedup();
        let stutter = match self.mode {
            Mode::Strong => None,
            Mode::Weak => self.stutter_class(&sig),
        };
        let k = match stutter {
            Some(k) => k,
            None => {
                let info = ClassInfo {
                    depth,
                    visible_depth,
                    channels: Arc::new(channels),
                };
                self.intern(sig.clone(), info)
            }
        };
        let sat = (self.mode == Mode::Weak).then(|| Arc::from(sig));
        self.states.insert(key, (k, sat.clone()));
        Ok((k, sat))
    }

    /// A class `K` with `(τ, K)` in `sig` whose key is `sig` without it.
    fn stutter_class(&self, sig: &Signature) -> Option<ClassId> {
        for (i, (a, k)) in sig.iter().enumerate() {
            if !a.is_tau() {
                continue;
            }
            let mut rest = sig.clone();
            rest.remove(i);
            if self.table.get(&rest) == Some(k) {
                return Some(*k);
            }
        }
        None
    }

    fn intern(&mut self, sig: Signature, info: ClassInfo) -> ClassId {
        if let Some(&k) = self.table.get(&sig) {
            return k;
        }
        let k = self.info.len() as ClassId;
        self.info.push(info);
        self.table.insert(sig, k);
        k
    }
}

fn subject(a: &Action) -> Option<Name> {
    match a {
        Action::FreeOut(x, _) | Action::BoundOut(x, _) | Action::In(x, _) => {
            Some(if x.is_fresh() {
                Name::Fresh(u32::MAX)
            } else {
                x.clone()
            })
        }
        Action::Tau => None,
    }
}

/// Default number of candidate pairs tried by one split search.
pub const DEFAULT_SPLIT_BUDGET: u64 = 1 << 22;

/// Outcome of a split search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Split {
    Found(Process, Process),
    NoSplitWithinUniverse,
}

/// Split search and recursive decomposition over a shared classifier.
pub struct Decomposer {
    classes: Classifier,
    budget: u64,
    splits: HashMap<Process, Option<(Process, Process)>>,
}

impl Decomposer {
    pub fn new(mode: Mode, universe: NameUniverse) -> Decomposer {
        Decomposer {
            classes: Classifier::new(mode, universe),
            budget: DEFAULT_SPLIT_BUDGET,
            splits: HashMap::new(),
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Decomposer {
        self.budget = budget;
        self
    }

    pub fn classifier(&mut self) -> &mut Classifier {
        &mut self.classes
    }

    /// `q` and `r`, both inequivalent to `0`, with `p` equivalent to `q | r`.
    pub fn find_split(&mut self, p: &Process) -> Result<Split> {
        p.require_finite()?;
        let f = p.alpha_canonical();
        if let Some(s) = self.splits.get(&f) {
            return Ok(match s {
                Some((q, r)) => Split::Found(q.clone(), r.clone()),
                None => Split::NoSplitWithinUniverse,
            });
        }
        let found = self.search(&f)?;
        self.splits.insert(f, found.clone());
        Ok(match found {
            Some((q, r)) => Split::Found(q, r),
            None => Split::NoSplitWithinUniverse,
        })
    }

    fn search(&mut self, f: &Process) -> Result<Option<(Process, Process)>> {
        let alloc = start_allocation(std::slice::from_ref(f), &self.classes.universe);
        let kf = self.classes.class_at(f, alloc)?;
        let (vf, df) = (self.classes.visible_depth(kf), self.classes.depth(kf));
        let strong = self.classes.mode == Mode::Strong;
        // each factor has depth at least 1 (strong) or a visible action (weak)
        if (strong && df < 2) || (!strong && vf < 2) {
            return Ok(None);
        }
        let open: BTreeSet<Name> = f.free_names().into_iter().filter(Name::is_fresh).collect();
        let lts = Lts::build(f, &self.classes.universe)?;

        let mut by_class: HashMap<ClassId, (usize, String, Process)> = HashMap::new();
        for s in 0..lts.len() {
            if lts.roots().contains(&s) {
                continue;
            }
            let c = self.clean(lts.process(s), &open)?;
            let k = self.classes.class_of(&c)?;
            let v = self.classes.visible_depth(k);
            let too_deep = if strong {
                self.classes.depth(k) >= df || v > vf
            } else {
                v >= vf
            };
            if k == ZERO_CLASS || too_deep {
                continue;
            }
            if !self
                .classes
                .channels(k)
                .is_subset(self.classes.channels(kf))
            {
                continue;
            }
            let rank = (c.size(), pretty(&c));
            match by_class.get(&k) {
                Some((size, text, _)) if (*size, text) <= (rank.0, &rank.1) => {}
                _ => {
                    by_class.insert(k, (rank.0, rank.1, c));
                }
            }
        }
        let mut cands: Vec<(u64, usize, String, ClassId, Process)> = by_class
            .into_iter()
            .map(|(k, (size, text, c))| (self.classes.depth(k), size, text, k, c))
            .collect();
        cands.sort_by(|a, b| (a.0, a.1, &a.2).cmp(&(b.0, b.1, &b.2)));

        let mut explored = 0u64;
        for i in 0..cands.len() {
            for j in i..cands.len() {
                let (ki, kj) = (cands[i].3, cands[j].3);
                if self.classes.visible_depth(ki) + self.classes.visible_depth(kj) != vf {
                    continue;
                }
                if strong && self.classes.depth(ki) + self.classes.depth(kj) != df {
                    continue;
                }
                let union: BTreeSet<&Name> = self
                    .classes
                    .channels(ki)
                    .iter()
                    .chain(self.classes.channels(kj))
                    .collect();
                if union.len() != self.classes.channels(kf).len() {
                    continue;
                }
                explored += 1;
                if explored > self.budget {
                    return Err(Error::Aborted { explored });
                }
                let composite = Process::par(cands[i].4.clone(), cands[j].4.clone());
                if self.classes.class_at(&composite, alloc)? == kf {
                    return Ok(Some((cands[i].4.clone(), cands[j].4.clone())));
                }
            }
        }
        Ok(None)
    }

    /// Closes pool names extruded along the way, narrows, and drops
    /// components equivalent to `0`.
    fn clean(&mut self, p: &Process, open: &BTreeSet<Name>) -> Result<Process> {
        let mut q = p.clone();
        let mut next = q.max_bound_index().map_or(0, |i| i + 1);
        for w in p.free_names() {
            if w.is_fresh() && !open.contains(&w) {
                let b = Name::Bound(next);
                next += 1;
                q = Process::restrict(b.clone(), q.substitute(&b, &w));
            }
        }
        let narrowed = scope_narrow(&q);
        let mut kept = Vec::new();
        for c in par_components(&narrowed) {
            if !self.classes.is_zero(c)? {
                kept.push(c.clone());
            }
        }
        Ok(Process::par_all(kept).alpha_canonical())
    }

    /// Prime factors of `p`, smallest first.
    pub fn factors(&mut self, p: &Process) -> Result<Vec<Process>> {
        p.require_finite()?;
        let mut out = Vec::new();
        self.refine(p, &mut out)?;
        let mut keyed: Vec<(u64, usize, String, Process)> = Vec::with_capacity(out.len());
        for f in out {
            let k = self.classes.class_of(&f)?;
            keyed.push((self.classes.depth(k), f.size(), pretty(&f), f));
        }
        keyed.sort_by(|a, b| (a.0, a.1, &a.2).cmp(&(b.0, b.1, &b.2)));
        Ok(keyed.into_iter().map(|k| k.3).collect())
    }

    fn refine(&mut self, p: &Process, out: &mut Vec<Process>) -> Result<()> {
        let narrowed = scope_narrow(&p.alpha_canonical());
        for c in par_components(&narrowed) {
            if self.classes.is_zero(c)? {
                continue;
            }
            match self.find_split(c)? {
                Split::Found(q, r) => {
                    self.refine(&q, out)?;
                    self.refine(&r, out)?;
                }
                Split::NoSplitWithinUniverse => out.push(c.alpha_canonical()),
            }
        }
        Ok(())
    }
}

/// Universe used for decomposing `p`: its own names plus `extra`, with a
/// pool large enough for every candidate composition.
pub fn decomposition_universe<'a>(
    procs: impl IntoIterator<Item = &'a Process>,
    extra: &[Name],
    inputs: InputMode,
) -> NameUniverse {
    let procs: Vec<&Process> = procs.into_iter().collect();
    let base = NameUniverse::for_processes(procs.iter().copied());
    let size = procs.iter().map(|p| p.size()).max().unwrap_or(0);
    let pool = base.pool_size().max(size + 2);
    base.with_known(extra.iter().cloned())
        .with_inputs(inputs)
        .with_pool_size(pool)
}

/// A prime decomposition together with its check.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub input: Process,
    pub mode: Mode,
    pub inputs: InputMode,
    pub factors: Vec<Process>,
    /// The composition of the factors is equivalent to the input.
    pub verified_equivalent: bool,
    pub names: Vec<Name>,
    pub max_size: usize,
}

impl Decomposition {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "input": pretty(&self.input),
            "mode": self.mode,
            "inputs": self.inputs,
            "factors": self.factors.iter().map(pretty).collect::<Vec<_>>(),
            "verified_equivalent": self.verified_equivalent,
            "oracle_universe": { "names": self.names, "max_size": self.max_size },
        })
    }
}

/// Decomposes `p` into primes. In weak mode `p` is first brought to its
/// stutter-free form.
pub fn decomposition(
    p: &Process,
    mode: Mode,
    inputs: InputMode,
    tu: &TermUniverse,
) -> Result<Decomposition> {
    p.require_finite()?;
    let u = decomposition_universe([p], &tu.names, inputs);
    let base = match mode {
        Mode::Strong => p.alpha_canonical(),
        Mode::Weak => stutter_free(p, &u)?.process,
    };
    let mut d = Decomposer::new(mode, u);
    let factors = d.factors(&base)?;
    let verified_equivalent = d
        .classes
        .equivalent(&Process::par_all(factors.clone()), p)?;
    Ok(Decomposition {
        input: p.clone(),
        mode,
        inputs,
        factors,
        verified_equivalent,
        names: tu.names.clone(),
        max_size: tu.max_size,
    })
}

/// Convenience wrapper around [`Decomposer::find_split`] in the universe of `p`.
pub fn find_split(p: &Process, mode: Mode, inputs: InputMode, tu: &TermUniverse) -> Result<Split> {
    let u = decomposition_universe([p], &tu.names, inputs);
    Decomposer::new(mode, u).find_split(p)
}

/// A pairing of `left[i]` with `right[j]` such that paired factors are
/// equivalent, if the two lists are equal as multisets up to equivalence.
pub fn multiset_eq_mod_bisim(
    left: &[Process],
    right: &[Process],
    classes: &mut Classifier,
) -> Result<Option<Vec<(usize, usize)>>> {
    if left.len() != right.len() {
        return Ok(None);
    }
    let mut adj = vec![Vec::new(); left.len()];
    for (i, l) in left.iter().enumerate() {
        for (j, r) in right.iter().enumerate() {
            if classes.equivalent(l, r)? {
                adj[i].push(j);
            }
        }
    }
    fn augment(
        i: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|o| augment(o, adj, seen, owner)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; right.len()];
    for i in 0..left.len() {
        let mut seen = vec![false; right.len()];
        if !augment(i, &adj, &mut seen, &mut owner) {
            return Ok(None);
        }
    }
    let mut pairs: Vec<(usize, usize)> = owner
        .iter()
        .enumerate()
        .map(|(j, o)| (o.expect("perfect matching"), j))
        .collect();
    pairs.sort();
    Ok(Some(pairs))
}

/// Result of checking unique decomposition on one pair of processes.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub equivalent: bool,
    pub left: Decomposition,
    pub right: Decomposition,
    /// Pairing of equivalent factors, when the factor multisets agree.
    pub matching: Option<Vec<(usize, usize)>>,
}

impl Verdict {
    /// Equivalent inputs have matching factors, and both decompositions
    /// recompose to their inputs.
    pub fn holds(&self) -> bool {
        self.left.verified_equivalent
            && self.right.verified_equivalent
            && (!self.equivalent || self.matching.is_some())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "equivalent": self.equivalent,
            "holds": self.holds(),
            "left": self.left.to_json(),
            "right": self.right.to_json(),
            "matching": self.matching,
        })
    }
}

pub fn verify_upd(
    p: &Process,
    q: &Process,
    mode: Mode,
    inputs: InputMode,
    tu: &TermUniverse,
) -> Result<Verdict> {
    let left = decomposition(p, mode, inputs, tu)?;
    let right = decomposition(q, mode, inputs, tu)?;
    let u = decomposition_universe([p, q], &tu.names, inputs);
    let mut classes = Classifier::new(mode, u);
    let equivalent = classes.equivalent(p, q)?;
    let matching = multiset_eq_mod_bisim(&left.factors, &right.factors, &mut classes)?;
    Ok(Verdict {
        equivalent,
        left,
        right,
        matching,
    })
}

/// Two equivalent terms with different prime factors.
#[derive(Debug, Clone, Serialize)]
pub struct UpdViolation {
    pub left: String,
    pub right: String,
    pub left_factors: Vec<String>,
    pub right_factors: Vec<String>,
}

/// Summary of an exhaustive unique-decomposition check.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub names: Vec<Name>,
    pub max_size: usize,
    pub mode: Mode,
    pub inputs: InputMode,
    pub terms: usize,
    pub classes: usize,
    /// Pairs of equivalent terms whose factors were compared.
    pub equivalent_pairs: u64,
    /// Terms with at least two prime factors.
    pub composite_terms: usize,
    pub violation_count: usize,
    /// The first few violations.
    pub violations: Vec<UpdViolation>,
    /// Terms whose factors do not recompose to them.
    pub unsound: Vec<String>,
    pub elapsed_ms: u128,
}

impl SweepReport {
    pub fn holds(&self) -> bool {
        self.violation_count == 0 && self.unsound.is_empty()
    }
}

const REPORTED_VIOLATIONS: usize = 20;

/// Decomposes every term of `tu` and compares the factor classes of all
/// equivalent terms.
pub fn sweep_upd(tu: &TermUniverse, mode: Mode, inputs: InputMode) -> Result<SweepReport> {
    sweep_upd_with(tu, mode, inputs, |_, _| {})
}

/// As [`sweep_upd`], calling `progress(done, total)` every thousand terms.
pub fn sweep_upd_with(
    tu: &TermUniverse,
    mode: Mode,
    inputs: InputMode,
    mut progress: impl FnMut(usize, usize),
) -> Result<SweepReport> {
    let start = Instant::now();
    let terms = tu.terms();
    let pool = 2 * tu.max_size + 2;
    let u = NameUniverse::new(tu.names.iter().cloned(), pool).with_inputs(inputs);
    let mut d = Decomposer::new(mode, u.clone());

    struct Group {
        first: usize,
        factors: Vec<Process>,
        classes: Vec<ClassId>,
        members: u64,
    }
    let mut groups: HashMap<ClassId, Group> = HashMap::new();
    let mut report = SweepReport {
        names: tu.names.clone(),
        max_size: tu.max_size,
        mode,
        inputs,
        terms: terms.len(),
        classes: 0,
        equivalent_pairs: 0,
        composite_terms: 0,
        violation_count: 0,
        violations: Vec::new(),
        unsound: Vec::new(),
        elapsed_ms: 0,
    };
    for (i, t) in terms.iter().enumerate() {
        if i % 1000 == 0 {
            progress(i, terms.len());
        }
        let k = d.classes.class_of(t)?;
        let base = match mode {
            Mode::Strong => t.clone(),
            Mode::Weak => stutter_free(t, &u)?.process,
        };
        let factors = d.factors(&base)?;
        if factors.len() > 1 {
            report.composite_terms += 1;
        }
        if d.classes.class_of(&Process::par_all(factors.clone()))? != k {
            report.unsound.push(pretty(t));
        }
        let mut fk = Vec::with_capacity(factors.len());
        for f in &factors {
            fk.push(d.classes.class_of(f)?);
        }
        fk.sort_unstable();
        match groups.get_mut(&k) {
            None => {
                groups.insert(
                    k,
                    Group {
                        first: i,
                        factors,
                        classes: fk,
                        members: 1,
                    },
                );
            }
            Some(g) => {
                report.equivalent_pairs += g.members;
                g.members += 1;
                if g.classes != fk {
                    report.violation_count += 1;
                    if report.violations.len() < REPORTED_VIOLATIONS {
                        report.violations.push(UpdViolation {
                            left: pretty(&terms[g.first]),
                            right: pretty(t),
                            left_factors: g.factors.iter().map(pretty).collect(),
                            right_factors: factors.iter().map(pretty).collect(),
                        });
                    }
                }
            }
        }
    }
    progress(terms.len(), terms.len());
    report.classes = groups.len();
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::bisimilar_in;
    use crate::parser::parse;

    fn p(s: &str) -> Process {
        parse(s).unwrap()
    }

    fn tu() -> TermUniverse {
        TermUniverse::new(&["a", "b", "c"], 8)
    }

    #[test]
    fn narrowing() {
        let cases = [
            ("new z.(a!b.0 | z!a.0)", "a!b.0 | new z.z!a.0"),
            ("new z.(0 | a!z.0)", "0 | new z.a!z.0"),
            ("new z.a!b.0", "a!b.0"),
            ("new z.new y.(a!z.0 | b!y.0)", "new z.a!z.0 | new y.b!y.0"),
            (
                "new z.(a!z.0 | z!b.0 | c!c.0)",
                "new z.(a!z.0 | z!b.0) | c!c.0",
            ),
        ];
        for (input, expect) in cases {
            assert_eq!(
                scope_narrow(&p(input)).alpha_canonical(),
                p(expect).alpha_canonical(),
                "{input}"
            );
        }
    }

    #[test]
    fn classifier_agrees_with_refinement() {
        let pairs = [
            ("a!b.0 | c!c.0", "a!b.c!c.0 + c!c.a!b.0", Mode::Strong, true),
            ("tau.a!b.0", "a!b.0", Mode::Weak, true),
            ("tau.a!b.0", "a!b.0", Mode::Strong, false),
            (
                "tau.tau.a!b.0 + b!b.0",
                "tau.a!b.0 + b!b.0",
                Mode::Weak,
                true,
            ),
            ("a!b.0 + tau.b!b.0", "a!b.0 + b!b.0", Mode::Weak, false),
            (
                "new z.(z!a.0 | z?(x).x!b.0)",
                "tau.a!b.0",
                Mode::Strong,
                true,
            ),
        ];
        for (l, r, mode, expect) in pairs {
            let (l, r) = (p(l), p(r));
            let u = decomposition_universe([&l, &r], &[], InputMode::Early);
            let mut c = Classifier::new(mode, u.clone());
            assert_eq!(c.equivalent(&l, &r).unwrap(), expect, "{l} {r} {mode}");
            assert_eq!(bisimilar_in(&l, &r, mode, &u).unwrap().equivalent, expect);
        }
    }

    #[test]
    fn weak_zero() {
        let u = decomposition_universe([], &[], InputMode::Early);
        let mut c = Classifier::new(Mode::Weak, u);
        assert!(c.is_zero(&p("tau.tau.0 + tau.0")).unwrap());
        assert!(!c.is_zero(&p("tau.a!a.0")).unwrap());
    }

    #[test]
    fn interleaving_splits() {
        let s = find_split(
            &p("a!b.c!c.0 + c!c.a!b.0"),
            Mode::Strong,
            InputMode::Early,
            &tu(),
        )
        .unwrap();
        match s {
            Split::Found(q, r) => {
                let mut got = vec![pretty(&q), pretty(&r)];
                got.sort();
                assert_eq!(got, vec!["a!b.0", "c!c.0"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn private_exchange_is_prime() {
        let r = p("new z.(z!c.c!a.0 | z?(y).y!b.0)");
        for inputs in [InputMode::Early, InputMode::FreshOnly] {
            assert_eq!(
                find_split(&r, Mode::Strong, inputs, &tu()).unwrap(),
                Split::NoSplitWithinUniverse
            );
        }
        // the internal exchange is invisible to weak bisimilarity
        let w = find_split(&r, Mode::Weak, InputMode::FreshOnly, &tu()).unwrap();
        assert_eq!(w, Split::Found(p("c!a.0"), p("c!b.0")));
    }

    #[test]
    fn decomposition_recomposes() {
        let d = decomposition(
            &p("a!b.0 | (b!b.0 | new z.a!z.0) | 0"),
            Mode::Strong,
            InputMode::Early,
            &tu(),
        )
        .unwrap();
        assert_eq!(d.factors.len(), 3);
        assert!(d.verified_equivalent);
        let w = decomposition(
            &p("tau.(a!a.0 | b!b.0)"),
            Mode::Weak,
            InputMode::FreshOnly,
            &tu(),
        )
        .unwrap();
        assert_eq!(w.factors.len(), 2);
        assert!(w.verified_equivalent);
    }

    #[test]
    fn verdicts() {
        let v = verify_upd(
            &p("a!b.0 | c!c.0"),
            &p("c!c.a!b.0 + a!b.c!c.0"),
            Mode::Strong,
            InputMode::Early,
            &tu(),
        )
        .unwrap();
        assert!(v.equivalent && v.holds());
        assert_eq!(v.matching.as_ref().map(Vec::len), Some(2));
        let v = verify_upd(
            &p("a!b.0"),
            &p("b!b.0"),
            Mode::Strong,
            InputMode::Early,
            &tu(),
        )
        .unwrap();
        assert!(!v.equivalent && v.holds());
    }

    #[test]
    fn small_sweep() {
        for (mode, inputs) in [
            (Mode::Strong, InputMode::Early),
            (Mode::Weak, InputMode::FreshOnly),
        ] {
            let r = sweep_upd(&TermUniverse::new(&["a"], 5), mode, inputs).unwrap();
            assert!(r.holds(), "{r:?}");
            assert!(r.composite_terms > 0);
        }
    }
}
