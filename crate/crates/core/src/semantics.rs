//! Early transition relation.
//!
//! Transitions are first computed in a "late" form ([`Commit`]): an input
//! commitment keeps its binder abstract so that communication can plug in the
//! transmitted name directly. Only at the top level are inputs instantiated,
//! with the names of the [`NameUniverse`].
//!
//! Fresh names are allocated positionally: a state that has already consumed
//! `k` pool names receives `w'k` as its next fresh name. The count is part of
//! the state, so two processes compared in one analysis receive the same fresh
//! names along matching paths.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::syntax::{Action, Name, Prefix, Process, Supply};

/// Environment variable overriding the default fresh-pool size used for
/// terms with replication.
pub const FRESH_POOL_ENV: &str = "PICALC_FRESH_POOL";

const DEFAULT_POOL: usize = 16;

pub fn default_pool_size() -> usize {
    std::env::var(FRESH_POOL_ENV)
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_POOL)
}

/// Which names an input may receive at the top level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputMode {
    /// Every known name, every pool name allocated so far, and the next fresh one.
    #[default]
    Early,
    /// Only the next fresh pool name.
    FreshOnly,
}

impl std::str::FromStr for InputMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "early" => Ok(InputMode::Early),
            "fresh-only" => Ok(InputMode::FreshOnly),
            other => Err(format!(
                "unknown input mode `{other}` (expected early or fresh-only)"
            )),
        }
    }
}

/// The names an analysis may use.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NameUniverse {
    known: BTreeSet<Name>,
    pool_size: usize,
    allocated: usize,
    inputs: InputMode,
}

impl NameUniverse {
    pub fn new(known: impl IntoIterator<Item = Name>, pool_size: usize) -> NameUniverse {
        NameUniverse {
            known: known.into_iter().filter(|n| n.is_user()).collect(),
            pool_size,
            allocated: 0,
            inputs: InputMode::Early,
        }
    }

    /// Universe covering the free names of all `procs`, with a pool large
    /// enough for any execution of the replication-free ones.
    pub fn for_processes<'a>(procs: impl IntoIterator<Item = &'a Process>) -> NameUniverse {
        let mut known = BTreeSet::new();
        let mut pool = 0;
        let mut replicated = false;
        for p in procs {
            let fns = p.free_names();
            let used = fns
                .iter()
                .filter_map(|n| match n {
                    Name::Fresh(i) => Some(*i as usize + 1),
                    _ => None,
                })
                .max()
                .unwrap_or(0);
            known.extend(fns.into_iter().filter(Name::is_user));
            pool = pool.max(used + p.fresh_demand());
            replicated |= !p.is_replication_free();
        }
        if replicated {
            pool = pool.max(default_pool_size());
        }
        NameUniverse {
            known,
            pool_size: pool.max(1),
            allocated: 0,
            inputs: InputMode::Early,
        }
    }

    pub fn with_inputs(mut self, inputs: InputMode) -> NameUniverse {
        self.inputs = inputs;
        self
    }

    pub fn with_pool_size(mut self, pool_size: usize) -> NameUniverse {
        self.pool_size = pool_size;
        self
    }

    pub fn with_allocated(mut self, allocated: usize) -> NameUniverse {
        self.allocated = allocated;
        self
    }

    pub fn with_known(mut self, extra: impl IntoIterator<Item = Name>) -> NameUniverse {
        self.known.extend(extra.into_iter().filter(Name::is_user));
        self
    }

    pub fn known(&self) -> &BTreeSet<Name> {
        &self.known
    }

    pub fn pool_size(&self) -> usize {
        self.pool_size
    }

    pub fn allocated(&self) -> usize {
        self.allocated
    }

    pub fn inputs(&self) -> InputMode {
        self.inputs
    }

    pub fn fresh_pool(&self) -> Vec<Name> {
        (0..self.pool_size as u32).map(Name::Fresh).collect()
    }
}

/// A single early transition. `allocated` is the number of pool names the
/// target has consumed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub action: Action,
    pub target: Process,
    pub allocated: usize,
}

/// Late-style commitment of a (possibly non-canonical) term.
#[derive(Debug, Clone)]
pub(crate) enum Commit {
    Out {
        chan: Name,
        datum: Name,
        cont: Process,
    },
    BoundOut {
        chan: Name,
        binder: Name,
        cont: Process,
    },
    In {
        chan: Name,
        binder: Name,
        body: Process,
    },
    Tau(Process),
}

impl Commit {
    /// Wraps the continuation in a parallel context `cont | other`, renaming a
    /// bound name that would clash with `other`.
    fn par_left(self, other: &Process, supply: &mut Supply) -> Commit {
        self.wrap(other, supply, |c, o| Process::par(c, o.clone()))
    }

    fn par_right(self, other: &Process, supply: &mut Supply) -> Commit {
        self.wrap(other, supply, |c, o| Process::par(o.clone(), c))
    }

    fn wrap(
        self,
        other: &Process,
        supply: &mut Supply,
        f: impl Fn(Process, &Process) -> Process,
    ) -> Commit {
        match self {
            Commit::Out { chan, datum, cont } => Commit::Out {
                chan,
                datum,
                cont: f(cont, other),
            },
            Commit::Tau(cont) => Commit::Tau(f(cont, other)),
            Commit::BoundOut { chan, binder, cont } => {
                let (binder, cont) = freshen(binder, cont, other, supply);
                Commit::BoundOut {
                    chan,
                    binder,
                    cont: f(cont, other),
                }
            }
            Commit::In { chan, binder, body } => {
                let (binder, body) = freshen(binder, body, other, supply);
                Commit::In {
                    chan,
                    binder,
                    body: f(body, other),
                }
            }
        }
    }
}

fn freshen(binder: Name, cont: Process, avoid: &Process, supply: &mut Supply) -> (Name, Process) {
    if avoid.has_free(&binder) {
        let fresh = supply.next();
        let cont = cont.subst(&binder, &fresh, supply);
        (fresh, cont)
    } else {
        (binder, cont)
    }
}

/// All commitments of `p` (rules of the late presentation; the early rules
/// are recovered by [`transitions`]).
pub(crate) fn commitments(p: &Process, supply: &mut Supply) -> Vec<Commit> {
    match p {
        Process::Nil => Vec::new(),
        Process::Prefixed(pre, cont) => match pre.resolve() {
            None => Vec::new(),
            Some(Prefix::Output { chan, datum }) => {
                vec![Commit::Out {
                    chan: chan.clone(),
                    datum: datum.clone(),
                    cont: (**cont).clone(),
                }]
            }
            Some(Prefix::Input { chan, binder }) => {
                vec![Commit::In {
                    chan: chan.clone(),
                    binder: binder.clone(),
                    body: (**cont).clone(),
                }]
            }
            Some(Prefix::Tau) => vec![Commit::Tau((**cont).clone())],
            Some(Prefix::Match { .. }) => unreachable!("resolve strips guards"),
        },
        Process::Sum(l, r) => {
            let mut out = commitments(l, supply);
            out.extend(commitments(r, supply));
            out
        }
        Process::Par(l, r) => {
            let left = commitments(l, supply);
            let right = commitments(r, supply);
            let mut out = Vec::new();
            // Comm-L / Close-L
            for lc in &left {
                for rc in &right {
                    if let Some(c) = communicate(lc, rc, r, supply, false) {
                        out.push(c);
                    }
                }
            }
            // Comm-R / Close-R
            for rc in &right {
                for lc in &left {
                    if let Some(c) = communicate(rc, lc, l, supply, true) {
                        out.push(c);
                    }
                }
            }
            for lc in left {
                out.push(lc.par_left(r, supply));
            }
            for rc in right {
                out.push(rc.par_right(l, supply));
            }
            out
        }
        Process::Restrict(z, body) => {
            let mut out = Vec::new();
            for c in commitments(body, supply) {
                match c {
                    Commit::Out { chan, datum, cont } => {
                        if &chan == z {
                            continue;
                        }
                        if &datum == z {
                            // Open
                            out.push(Commit::BoundOut {
                                chan,
                                binder: datum,
                                cont,
                            });
                        } else {
                            out.push(Commit::Out {
                                chan,
                                datum,
                                cont: Process::restrict(z.clone(), cont),
                            });
                        }
                    }
                    Commit::BoundOut { chan, binder, cont } => {
                        if &chan == z {
                            continue;
                        }
                        let (binder, cont) = if &binder == z {
                            let fresh = supply.next();
                            let cont = cont.subst(&binder, &fresh, supply);
                            (fresh, cont)
                        } else {
                            (binder, cont)
                        };
                        out.push(Commit::BoundOut {
                            chan,
                            binder,
                            cont: Process::restrict(z.clone(), cont),
                        });
                    }
                    Commit::In { chan, binder, body } => {
                        if &chan == z {
                            continue;
                        }
                        let (binder, body) = if &binder == z {
                            let fresh = supply.next();
                            let body = body.subst(&binder, &fresh, supply);
                            (fresh, body)
                        } else {
                            (binder, body)
                        };
                        out.push(Commit::In {
                            chan,
                            binder,
                            body: Process::restrict(z.clone(), body),
                        });
                    }
                    Commit::Tau(cont) => out.push(Commit::Tau(Process::restrict(z.clone(), cont))),
                }
            }
            out
        }
        Process::Repl(body) => {
            let copy = commitments(body, supply);
            let mut out = Vec::new();
            // Rep-Comm and Rep-Close-L: two copies of the body interact.
            for a in &copy {
                for b in &copy {
                    if let Some(c) = communicate(a, b, body, supply, false) {
                        out.push(match c {
                            Commit::Tau(inner) => Commit::Tau(Process::par(inner, p.clone())),
                            _ => unreachable!("communication yields tau"),
                        });
                    }
                }
            }
            // Rep-Act
            for c in copy {
                out.push(c.par_left(p, supply));
            }
            out
        }
    }
}

/// Output `sender` meets input `receiver`. `receiver_term` is the term the
/// receiver was drawn from (its free names must avoid an extruded binder).
/// With `swapped`, the receiver sits on the left of the resulting `|`.
fn communicate(
    sender: &Commit,
    receiver: &Commit,
    receiver_term: &Process,
    supply: &mut Supply,
    swapped: bool,
) -> Option<Commit> {
    let Commit::In {
        chan: in_chan,
        binder,
        body,
    } = receiver
    else {
        return None;
    };
    let join = |a: Process, b: Process| {
        if swapped {
            Process::par(b, a)
        } else {
            Process::par(a, b)
        }
    };
    match sender {
        Commit::Out { chan, datum, cont } if chan == in_chan => {
            let received = body.subst(binder, datum, supply);
            Some(Commit::Tau(join(cont.clone(), received)))
        }
        Commit::BoundOut {
            chan,
            binder: z,
            cont,
        } if chan == in_chan => {
            let (z, cont) = if receiver_term.has_free(z) || body.has_free(z) {
                let fresh = supply.next();
                let cont = cont.subst(z, &fresh, supply);
                (fresh, cont)
            } else {
                (z.clone(), cont.clone())
            };
            let received = body.subst(binder, &z, supply);
            Some(Commit::Tau(Process::restrict(z, join(cont, received))))
        }
        _ => None,
    }
}

fn max_fresh_index(p: &Process) -> Option<usize> {
    p.free_names()
        .into_iter()
        .filter_map(|n| match n {
            Name::Fresh(i) => Some(i as usize),
            _ => None,
        })
        .max()
}

/// All early transitions of `p` with their allocation counts. Targets are
/// α-canonical.
pub fn transitions_from(p: &Process, u: &NameUniverse) -> Result<Vec<Transition>> {
    transitions_at(p, u, u.allocated)
}

/// As [`transitions_from`], with `allocated` in place of the universe's count.
pub(crate) fn transitions_at(
    p: &Process,
    u: &NameUniverse,
    allocated: usize,
) -> Result<Vec<Transition>> {
    let p = p.alpha_canonical();
    let mut supply = Supply::for_process(&p);
    let commits = commitments(&p, &mut supply);

    let base = max_fresh_index(&p).map_or(allocated, |i| allocated.max(i + 1));
    let needs_fresh = commits
        .iter()
        .any(|c| matches!(c, Commit::In { .. } | Commit::BoundOut { .. }));
    if needs_fresh && base >= u.pool_size {
        return Err(Error::UniverseTooSmall {
            pool_size: u.pool_size,
        });
    }
    let next = Name::Fresh(base as u32);

    let receivable: Vec<Name> = match u.inputs {
        InputMode::Early => {
            let mut set: BTreeSet<Name> = u.known.clone();
            set.extend(p.free_names().into_iter().filter(Name::is_user));
            set.extend((0..base as u32).map(Name::Fresh));
            set.insert(next.clone());
            set.into_iter().collect()
        }
        InputMode::FreshOnly => vec![next.clone()],
    };

    let mut out = BTreeSet::new();
    for c in commits {
        match c {
            Commit::Out { chan, datum, cont } => {
                out.insert(Transition {
                    action: Action::FreeOut(chan, datum),
                    target: cont.alpha_canonical(),
                    allocated: base,
                });
            }
            Commit::BoundOut { chan, binder, cont } => {
                let target = cont.subst(&binder, &next, &mut supply).alpha_canonical();
                out.insert(Transition {
                    action: Action::BoundOut(chan, next.clone()),
                    target,
                    allocated: base + 1,
                });
            }
            Commit::In { chan, binder, body } => {
                for y in &receivable {
                    let target = body.subst(&binder, y, &mut supply).alpha_canonical();
                    let allocated = if *y == next { base + 1 } else { base };
                    out.insert(Transition {
                        action: Action::In(chan.clone(), y.clone()),
                        target,
                        allocated,
                    });
                }
            }
            Commit::Tau(cont) => {
                out.insert(Transition {
                    action: Action::Tau,
                    target: cont.alpha_canonical(),
                    allocated: base,
                });
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Early transitions of `p` as (action, successor) pairs.
pub fn transitions(p: &Process, u: &NameUniverse) -> Result<Vec<(Action, Process)>> {
    let mut pairs: Vec<(Action, Process)> = transitions_from(p, u)?
        .into_iter()
        .map(|t| (t.action, t.target))
        .collect();
    pairs.dedup();
    Ok(pairs)
}

/// Weak moves `p ⇒α q` together with the reflexive τ-closure of `p`.
#[derive(Debug, Clone, Default)]
pub struct WeakTransitions {
    pub moves: BTreeSet<(Action, Process)>,
    pub tau_closure: BTreeSet<Process>,
}

pub fn weak_transitions(p: &Process, u: &NameUniverse) -> Result<WeakTransitions> {
    p.require_finite()?;
    type State = (Process, usize);
    let mut cache: BTreeMap<State, Vec<Transition>> = BTreeMap::new();
    let mut succ = |s: &State| -> Result<Vec<Transition>> {
        if let Some(ts) = cache.get(s) {
            return Ok(ts.clone());
        }
        let ts = transitions_at(&s.0, u, s.1)?;
        cache.insert(s.clone(), ts.clone());
        Ok(ts)
    };
    let closure = |start: State,
                   succ: &mut dyn FnMut(&State) -> Result<Vec<Transition>>|
     -> Result<BTreeSet<State>> {
        let mut seen = BTreeSet::from([start.clone()]);
        let mut stack = vec![start];
        while let Some(s) = stack.pop() {
            for t in succ(&s)? {
                if t.action.is_tau() {
                    let next = (t.target, t.allocated);
                    if seen.insert(next.clone()) {
                        stack.push(next);
                    }
                }
            }
        }
        Ok(seen)
    };

    let root = (p.alpha_canonical(), u.allocated);
    let pre = closure(root, &mut succ)?;
    let mut result = WeakTransitions {
        moves: BTreeSet::new(),
        tau_closure: pre.iter().map(|(q, _)| q.clone()).collect(),
    };
    for s in &pre {
        for t in succ(s)? {
            let post = closure((t.target.clone(), t.allocated), &mut succ)?;
            for (q, _) in post {
                result.moves.insert((t.action.clone(), q));
            }
        }
    }
    Ok(result)
}
