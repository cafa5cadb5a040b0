//! Process terms, name binding and substitution.
//!
//! Binders introduced by canonicalisation and by the transition rules live in
//! a reserved namespace ([`Name::Bound`]) and fresh names handed out to inputs
//! and extruded restrictions live in another ([`Name::Fresh`]). Neither can be
//! written in the concrete syntax, so they never collide with user names.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A channel name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Name {
    /// A name written by the user.
    User(Arc<str>),
    /// The `i`-th name of the fresh pool.
    Fresh(u32),
    /// A canonical binder.
    Bound(u32),
}

impl Name {
    pub fn user(s: &str) -> Name {
        Name::User(Arc::from(s))
    }

    pub fn is_user(&self) -> bool {
        matches!(self, Name::User(_))
    }

    pub fn is_fresh(&self) -> bool {
        matches!(self, Name::Fresh(_))
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Name {
        Name::user(s)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Name::User(s) => f.write_str(s),
            Name::Fresh(i) => write!(f, "w'{i}"),
            Name::Bound(i) => write!(f, "v'{i}"),
        }
    }
}

impl serde::Serialize for Name {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Action prefixes `x!y`, `x?(z)`, `tau` and guarded `[x=y]pi`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Prefix {
    Output {
        chan: Name,
        datum: Name,
    },
    Input {
        chan: Name,
        binder: Name,
    },
    Tau,
    Match {
        lhs: Name,
        rhs: Name,
        inner: Box<Prefix>,
    },
}

impl Prefix {
    pub fn output(chan: impl Into<Name>, datum: impl Into<Name>) -> Prefix {
        Prefix::Output {
            chan: chan.into(),
            datum: datum.into(),
        }
    }

    pub fn input(chan: impl Into<Name>, binder: impl Into<Name>) -> Prefix {
        Prefix::Input {
            chan: chan.into(),
            binder: binder.into(),
        }
    }

    pub fn guarded(lhs: impl Into<Name>, rhs: impl Into<Name>, inner: Prefix) -> Prefix {
        Prefix::Match {
            lhs: lhs.into(),
            rhs: rhs.into(),
            inner: Box::new(inner),
        }
    }

    /// The input binder of this prefix, if it ends in an input.
    pub fn binder(&self) -> Option<&Name> {
        match self {
            Prefix::Input { binder, .. } => Some(binder),
            Prefix::Match { inner, .. } => inner.binder(),
            _ => None,
        }
    }

    /// Strips match guards. `None` when some guard compares distinct names.
    pub fn resolve(&self) -> Option<&Prefix> {
        match self {
            Prefix::Match { lhs, rhs, inner } => {
                if lhs == rhs {
                    inner.resolve()
                } else {
                    None
                }
            }
            other => Some(other),
        }
    }

    /// Free names of the prefix (the binder is not free).
    pub fn free_names_into(&self, out: &mut BTreeSet<Name>) {
        match self {
            Prefix::Output { chan, datum } => {
                out.insert(chan.clone());
                out.insert(datum.clone());
            }
            Prefix::Input { chan, .. } => {
                out.insert(chan.clone());
            }
            Prefix::Tau => {}
            Prefix::Match { lhs, rhs, inner } => {
                out.insert(lhs.clone());
                out.insert(rhs.clone());
                inner.free_names_into(out);
            }
        }
    }

    fn rename_free(&self, from: &Name, to: &Name) -> Prefix {
        let r = |n: &Name| if n == from { to.clone() } else { n.clone() };
        match self {
            Prefix::Output { chan, datum } => Prefix::Output {
                chan: r(chan),
                datum: r(datum),
            },
            Prefix::Input { chan, binder } => Prefix::Input {
                chan: r(chan),
                binder: binder.clone(),
            },
            Prefix::Tau => Prefix::Tau,
            Prefix::Match { lhs, rhs, inner } => Prefix::Match {
                lhs: r(lhs),
                rhs: r(rhs),
                inner: Box::new(inner.rename_free(from, to)),
            },
        }
    }

    fn with_binder(&self, new: Name) -> Prefix {
        match self {
            Prefix::Input { chan, .. } => Prefix::Input {
                chan: chan.clone(),
                binder: new,
            },
            Prefix::Match { lhs, rhs, inner } => Prefix::Match {
                lhs: lhs.clone(),
                rhs: rhs.clone(),
                inner: Box::new(inner.with_binder(new)),
            },
            other => other.clone(),
        }
    }

    fn size(&self) -> usize {
        match self {
            Prefix::Match { inner, .. } => 1 + inner.size(),
            _ => 1,
        }
    }
}

/// A process term.
///
/// Children of `Sum` are expected to be summations (`Nil`, `Prefixed` or
/// `Sum`); [`Process::validate`] checks this.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub enum Process {
    #[default]
    Nil,
    Prefixed(Prefix, Arc<Process>),
    Sum(Arc<Process>, Arc<Process>),
    Par(Arc<Process>, Arc<Process>),
    Restrict(Name, Arc<Process>),
    Repl(Arc<Process>),
}

impl Process {
    pub fn nil() -> Process {
        Process::Nil
    }

    pub fn prefixed(prefix: Prefix, cont: Process) -> Process {
        Process::Prefixed(prefix, Arc::new(cont))
    }

    pub fn output(chan: impl Into<Name>, datum: impl Into<Name>, cont: Process) -> Process {
        Process::prefixed(Prefix::output(chan, datum), cont)
    }

    pub fn input(chan: impl Into<Name>, binder: impl Into<Name>, cont: Process) -> Process {
        Process::prefixed(Prefix::input(chan, binder), cont)
    }

    pub fn tau(cont: Process) -> Process {
        Process::prefixed(Prefix::Tau, cont)
    }

    pub fn sum(l: Process, r: Process) -> Process {
        Process::Sum(Arc::new(l), Arc::new(r))
    }

    pub fn par(l: Process, r: Process) -> Process {
        Process::Par(Arc::new(l), Arc::new(r))
    }

    pub fn restrict(binder: impl Into<Name>, body: Process) -> Process {
        Process::Restrict(binder.into(), Arc::new(body))
    }

    pub fn repl(body: Process) -> Process {
        Process::Repl(Arc::new(body))
    }

    /// Left-nested parallel composition; `Nil` for an empty list.
    pub fn par_all(parts: impl IntoIterator<Item = Process>) -> Process {
        let mut it = parts.into_iter();
        match it.next() {
            None => Process::Nil,
            Some(first) => it.fold(first, Process::par),
        }
    }

    /// Left-nested summation; `Nil` for an empty list.
    pub fn sum_all(parts: impl IntoIterator<Item = Process>) -> Process {
        let mut it = parts.into_iter();
        match it.next() {
            None => Process::Nil,
            Some(first) => it.fold(first, Process::sum),
        }
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Process::Nil)
    }

    pub fn is_summation(&self) -> bool {
        matches!(
            self,
            Process::Nil | Process::Prefixed(..) | Process::Sum(..)
        )
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.free_names_into(&mut out);
        out
    }

    fn free_names_into(&self, out: &mut BTreeSet<Name>) {
        match self {
            Process::Nil => {}
            Process::Prefixed(pre, cont) => {
                pre.free_names_into(out);
                match pre.binder() {
                    Some(b) => {
                        let mut inner = cont.free_names();
                        inner.remove(b);
                        out.extend(inner);
                    }
                    None => cont.free_names_into(out),
                }
            }
            Process::Sum(l, r) | Process::Par(l, r) => {
                l.free_names_into(out);
                r.free_names_into(out);
            }
            Process::Restrict(z, body) => {
                let mut inner = body.free_names();
                inner.remove(z);
                out.extend(inner);
            }
            Process::Repl(body) => body.free_names_into(out),
        }
    }

    pub fn has_free(&self, name: &Name) -> bool {
        match self {
            Process::Nil => false,
            Process::Prefixed(pre, cont) => {
                let mut here = BTreeSet::new();
                pre.free_names_into(&mut here);
                here.contains(name) || (pre.binder() != Some(name) && cont.has_free(name))
            }
            Process::Sum(l, r) | Process::Par(l, r) => l.has_free(name) || r.has_free(name),
            Process::Restrict(z, body) => z != name && body.has_free(name),
            Process::Repl(body) => body.has_free(name),
        }
    }

    /// Names occurring as binders (restriction or input).
    pub fn bound_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |p| match p {
            Process::Prefixed(pre, _) => {
                if let Some(b) = pre.binder() {
                    out.insert(b.clone());
                }
            }
            Process::Restrict(z, _) => {
                out.insert(z.clone());
            }
            _ => {}
        });
        out
    }

    /// All names mentioned anywhere in the term.
    pub fn names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |p| match p {
            Process::Prefixed(pre, _) => {
                pre.free_names_into(&mut out);
                if let Some(b) = pre.binder() {
                    out.insert(b.clone());
                }
            }
            Process::Restrict(z, _) => {
                out.insert(z.clone());
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Process)) {
        f(self);
        match self {
            Process::Nil => {}
            Process::Prefixed(_, c) | Process::Restrict(_, c) | Process::Repl(c) => c.visit(f),
            Process::Sum(l, r) | Process::Par(l, r) => {
                l.visit(f);
                r.visit(f);
            }
        }
    }

    pub fn is_replication_free(&self) -> bool {
        let mut free = true;
        self.visit(&mut |p| {
            if matches!(p, Process::Repl(_)) {
                free = false;
            }
        });
        free
    }

    pub fn require_finite(&self) -> Result<()> {
        if self.is_replication_free() {
            Ok(())
        } else {
            Err(Error::NotFinite {
                process: self.to_string(),
            })
        }
    }

    /// Operator count: every constructor, guard and prefix counts one.
    pub fn size(&self) -> usize {
        match self {
            Process::Nil => 1,
            Process::Prefixed(pre, c) => pre.size() + c.size(),
            Process::Sum(l, r) | Process::Par(l, r) => 1 + l.size() + r.size(),
            Process::Restrict(_, c) | Process::Repl(c) => 1 + c.size(),
        }
    }

    /// Number of prefixes (each transition consumes at least one).
    pub fn prefix_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |p| {
            if matches!(p, Process::Prefixed(..)) {
                n += 1;
            }
        });
        n
    }

    /// Upper bound on the number of fresh names one execution can consume:
    /// every input and every extruded restriction takes one.
    pub fn fresh_demand(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |p| match p {
            Process::Prefixed(pre, _) if pre.binder().is_some() => n += 1,
            Process::Restrict(..) => n += 1,
            _ => {}
        });
        n
    }

    /// Checks the summation discipline and binder well-formedness.
    pub fn validate(&self) -> Result<()> {
        match self {
            Process::Nil => Ok(()),
            Process::Prefixed(pre, c) => {
                if let Some(b) = pre.binder() {
                    check_binder(b)?;
                }
                c.validate()
            }
            Process::Sum(l, r) => {
                for child in [l, r] {
                    if !child.is_summation() {
                        return Err(Error::MalformedSum {
                            subterm: child.to_string(),
                        });
                    }
                    child.validate()?;
                }
                Ok(())
            }
            Process::Par(l, r) => {
                l.validate()?;
                r.validate()
            }
            Process::Restrict(z, c) => {
                check_binder(z)?;
                c.validate()
            }
            Process::Repl(c) => c.validate(),
        }
    }

    /// Largest `Bound` index mentioned in the term, if any.
    pub(crate) fn max_bound_index(&self) -> Option<u32> {
        self.names()
            .into_iter()
            .filter_map(|n| match n {
                Name::Bound(i) => Some(i),
                _ => None,
            })
            .max()
    }

    /// Capture-avoiding substitution `self{replacement/target}`.
    pub fn substitute(&self, replacement: &Name, target: &Name) -> Process {
        let start = match (self.max_bound_index(), replacement) {
            (Some(i), Name::Bound(j)) => i.max(*j) + 1,
            (Some(i), _) => i + 1,
            (None, Name::Bound(j)) => j + 1,
            (None, _) => 0,
        };
        let mut supply = Supply::new(start);
        self.subst(target, replacement, &mut supply)
    }

    /// Capture-avoiding substitution drawing renamed binders from `supply`.
    pub(crate) fn subst(&self, from: &Name, to: &Name, supply: &mut Supply) -> Process {
        if from == to {
            return self.clone();
        }
        match self {
            Process::Nil => Process::Nil,
            Process::Prefixed(pre, cont) => {
                let head = pre.rename_free(from, to);
                match pre.binder() {
                    Some(b) if b == from => Process::Prefixed(head, cont.clone()),
                    Some(b) if b == to => {
                        let fresh = supply.next();
                        let renamed = cont.subst(b, &fresh, supply);
                        Process::prefixed(head.with_binder(fresh), renamed.subst(from, to, supply))
                    }
                    _ => Process::prefixed(head, cont.subst(from, to, supply)),
                }
            }
            Process::Sum(l, r) => {
                Process::sum(l.subst(from, to, supply), r.subst(from, to, supply))
            }
            Process::Par(l, r) => {
                Process::par(l.subst(from, to, supply), r.subst(from, to, supply))
            }
            Process::Restrict(z, body) => {
                if z == from {
                    self.clone()
                } else if z == to {
                    let fresh = supply.next();
                    let renamed = body.subst(z, &fresh, supply);
                    Process::restrict(fresh, renamed.subst(from, to, supply))
                } else {
                    Process::restrict(z.clone(), body.subst(from, to, supply))
                }
            }
            Process::Repl(body) => Process::repl(body.subst(from, to, supply)),
        }
    }

    /// Deterministic α-renaming: binders become `Bound(0)`, `Bound(1)`, ... in
    /// pre-order. Indices that occur free in the term are skipped.
    pub fn alpha_canonical(&self) -> Process {
        let taken: BTreeSet<u32> = self
            .free_names()
            .into_iter()
            .filter_map(|n| match n {
                Name::Bound(i) => Some(i),
                _ => None,
            })
            .collect();
        let mut canon = Canonicalizer {
            next: 0,
            taken,
            env: Vec::new(),
        };
        canon.run(self)
    }

    pub fn alpha_eq(&self, other: &Process) -> bool {
        self.alpha_canonical() == other.alpha_canonical()
    }
}

fn check_binder(b: &Name) -> Result<()> {
    match b {
        Name::Fresh(_) => Err(Error::MalformedBinder {
            binder: b.to_string(),
        }),
        _ => Ok(()),
    }
}

/// Source of binder names not yet used in a term.
#[derive(Debug, Clone)]
pub(crate) struct Supply {
    next: u32,
}

impl Supply {
    pub(crate) fn new(start: u32) -> Supply {
        Supply { next: start }
    }

    pub(crate) fn for_process(p: &Process) -> Supply {
        Supply::new(p.max_bound_index().map_or(0, |i| i + 1))
    }

    pub(crate) fn next(&mut self) -> Name {
        let n = Name::Bound(self.next);
        self.next += 1;
        n
    }
}

struct Canonicalizer {
    next: u32,
    taken: BTreeSet<u32>,
    env: Vec<(Name, Name)>,
}

impl Canonicalizer {
    fn fresh(&mut self) -> Name {
        while self.taken.contains(&self.next) {
            self.next += 1;
        }
        let n = Name::Bound(self.next);
        self.next += 1;
        n
    }

    fn lookup(&self, n: &Name) -> Name {
        self.env
            .iter()
            .rev()
            .find(|(old, _)| old == n)
            .map_or_else(|| n.clone(), |(_, new)| new.clone())
    }

    fn prefix(&mut self, pre: &Prefix) -> Prefix {
        match pre {
            Prefix::Output { chan, datum } => Prefix::Output {
                chan: self.lookup(chan),
                datum: self.lookup(datum),
            },
            Prefix::Input { chan, binder } => Prefix::Input {
                chan: self.lookup(chan),
                binder: binder.clone(),
            },
            Prefix::Tau => Prefix::Tau,
            Prefix::Match { lhs, rhs, inner } => Prefix::Match {
                lhs: self.lookup(lhs),
                rhs: self.lookup(rhs),
                inner: Box::new(self.prefix(inner)),
            },
        }
    }

    fn run(&mut self, p: &Process) -> Process {
        match p {
            Process::Nil => Process::Nil,
            Process::Prefixed(pre, cont) => {
                let head = self.prefix(pre);
                match pre.binder() {
                    Some(b) => {
                        let fresh = self.fresh();
                        self.env.push((b.clone(), fresh.clone()));
                        let body = self.run(cont);
                        self.env.pop();
                        Process::prefixed(head.with_binder(fresh), body)
                    }
                    None => Process::prefixed(head, self.run(cont)),
                }
            }
            Process::Sum(l, r) => {
                let l = self.run(l);
                Process::sum(l, self.run(r))
            }
            Process::Par(l, r) => {
                let l = self.run(l);
                Process::par(l, self.run(r))
            }
            Process::Restrict(z, body) => {
                let fresh = self.fresh();
                self.env.push((z.clone(), fresh.clone()));
                let body = self.run(body);
                self.env.pop();
                Process::restrict(fresh, body)
            }
            Process::Repl(body) => Process::repl(self.run(body)),
        }
    }
}

/// Transition labels.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Action {
    FreeOut(Name, Name),
    BoundOut(Name, Name),
    In(Name, Name),
    Tau,
}

impl Action {
    pub fn is_tau(&self) -> bool {
        matches!(self, Action::Tau)
    }

    /// Weight used by length, depth and norm: one for visible actions, two for τ.
    pub fn weight(&self) -> u64 {
        if self.is_tau() {
            2
        } else {
            1
        }
    }

    pub fn bound_names(&self) -> BTreeSet<Name> {
        match self {
            Action::BoundOut(_, z) => BTreeSet::from([z.clone()]),
            _ => BTreeSet::new(),
        }
    }

    pub fn names(&self) -> BTreeSet<Name> {
        match self {
            Action::FreeOut(x, y) | Action::BoundOut(x, y) | Action::In(x, y) => {
                BTreeSet::from([x.clone(), y.clone()])
            }
            Action::Tau => BTreeSet::new(),
        }
    }

    pub fn mentions(&self, n: &Name) -> bool {
        match self {
            Action::FreeOut(x, y) | Action::BoundOut(x, y) | Action::In(x, y) => x == n || y == n,
            Action::Tau => false,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::FreeOut(x, y) => write!(f, "{x}!{y}"),
            Action::BoundOut(x, z) => write!(f, "{x}!({z})"),
            Action::In(x, y) => write!(f, "{x}?{y}"),
            Action::Tau => f.write_str("tau"),
        }
    }
}
