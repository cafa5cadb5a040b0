//! Strong and weak bisimilarity.
//!
//! Both checks work on a single LTS holding the two roots, built under one
//! [`NameUniverse`] so that input instantiations line up. Weak bisimilarity is
//! decided as strong bisimilarity of the saturated graph, in which a τ
//! challenge may also be answered by staying put.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lts::{Lts, StateId};
use crate::parser::pretty;
use crate::semantics::{transitions, InputMode, NameUniverse};
use crate::syntax::{Action, Process};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strong,
    Weak,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "strong" => Ok(Mode::Strong),
            "weak" => Ok(Mode::Weak),
            other => Err(format!("unknown mode `{other}` (expected strong or weak)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Strong => "strong",
            Mode::Weak => "weak",
        })
    }
}

/// Coarsest bisimulation partition of an LTS.
#[derive(Debug, Clone)]
pub struct Partition {
    mode: Mode,
    block_of: Vec<usize>,
    labels: Vec<String>,
}

impl Partition {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn block_of(&self, s: StateId) -> usize {
        self.block_of[s]
    }

    pub fn same_block(&self, a: StateId, b: StateId) -> bool {
        self.block_of[a] == self.block_of[b]
    }

    pub fn block_count(&self) -> usize {
        self.block_of.iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn blocks(&self) -> Vec<Vec<StateId>> {
        let mut blocks = vec![Vec::new(); self.block_count()];
        for (s, &b) in self.block_of.iter().enumerate() {
            blocks[b].push(s);
        }
        blocks
    }

    /// `{"mode": .., "blocks": [[state, ..], ..]}` with pretty-printed states.
    pub fn to_json(&self) -> serde_json::Value {
        let blocks: Vec<Vec<&str>> = self
            .blocks()
            .into_iter()
            .map(|b| b.into_iter().map(|s| self.labels[s].as_str()).collect())
            .collect();
        serde_json::json!({ "mode": self.mode, "blocks": blocks })
    }
}

/// Edges of `l` with actions interned to small integers.
fn interned_edges(l: &Lts) -> (Vec<Vec<(u32, StateId)>>, Option<u32>) {
    let mut ids: HashMap<&Action, u32> = HashMap::new();
    let mut tau = None;
    let edges = (0..l.len())
        .map(|s| {
            l.edges(s)
                .iter()
                .map(|(a, t)| {
                    let next = ids.len() as u32;
                    let id = *ids.entry(a).or_insert(next);
                    if a.is_tau() {
                        tau = Some(id);
                    }
                    (id, *t)
                })
                .collect()
        })
        .collect();
    (edges, tau)
}

/// Reflexive τ-closure of every state.
pub(crate) fn tau_closures(l: &Lts) -> Vec<Vec<StateId>> {
    (0..l.len())
        .map(|s| {
            let mut seen = BTreeSet::from([s]);
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for (a, t) in l.edges(x) {
                    if a.is_tau() && seen.insert(*t) {
                        stack.push(*t);
                    }
                }
            }
            seen.into_iter().collect()
        })
        .collect()
}

/// Saturated transition relation: `s ⇒α t` for visible α and `s ⇒ t`
/// (reflexive) tagged with the τ id.
fn saturate(l: &Lts, edges: &[Vec<(u32, StateId)>], tau: u32) -> Vec<Vec<(u32, StateId)>> {
    let closure = tau_closures(l);
    (0..l.len())
        .map(|s| {
            let mut out: BTreeSet<(u32, StateId)> = closure[s].iter().map(|&t| (tau, t)).collect();
            for &m in &closure[s] {
                for &(a, t) in &edges[m] {
                    if a != tau {
                        out.extend(closure[t].iter().map(|&u| (a, u)));
                    }
                }
            }
            out.into_iter().collect()
        })
        .collect()
}

fn refine_edges(edges: &[Vec<(u32, StateId)>]) -> Vec<usize> {
    let n = edges.len();
    let mut block_of = vec![0usize; n];
    let mut count = 1;
    loop {
        let mut ids: HashMap<(usize, Vec<(u32, usize)>), usize> = HashMap::new();
        let mut next = vec![0usize; n];
        for s in 0..n {
            let mut sig: Vec<(u32, usize)> =
                edges[s].iter().map(|&(a, t)| (a, block_of[t])).collect();
            sig.sort_unstable();
            sig.dedup();
            let fresh = ids.len();
            next[s] = *ids.entry((block_of[s], sig)).or_insert(fresh);
        }
        let new_count = ids.len();
        block_of = next;
        if new_count == count {
            return block_of;
        }
        count = new_count;
    }
}

/// Coarsest partition of `l` compatible with the given bisimilarity.
pub fn refine(l: &Lts, mode: Mode) -> Partition {
    let (edges, tau) = interned_edges(l);
    let block_of = match (mode, tau) {
        (Mode::Weak, Some(tau)) => refine_edges(&saturate(l, &edges, tau)),
        (Mode::Weak, None) => {
            // without τ edges, saturation only adds reflexive stays
            refine_edges(&edges)
        }
        (Mode::Strong, _) => refine_edges(&edges),
    };
    Partition {
        mode,
        block_of,
        labels: l.states().iter().map(|s| pretty(&s.process)).collect(),
    }
}

/// Result of comparing two processes.
#[derive(Debug, Clone)]
pub struct Bisimulation {
    pub equivalent: bool,
    pub partition: Partition,
    pub lts: Lts,
}

/// Compares `p` and `q` in the universe `u`, which must cover both.
pub fn bisimilar_in(
    p: &Process,
    q: &Process,
    mode: Mode,
    u: &NameUniverse,
) -> Result<Bisimulation> {
    let lts = Lts::build_many(&[p.clone(), q.clone()], u)?;
    let partition = refine(&lts, mode);
    let equivalent = partition.same_block(lts.roots()[0], lts.roots()[1]);
    Ok(Bisimulation {
        equivalent,
        partition,
        lts,
    })
}

/// Universe shared by a pair of processes.
pub fn pair_universe(p: &Process, q: &Process, inputs: InputMode) -> NameUniverse {
    NameUniverse::for_processes([p, q]).with_inputs(inputs)
}

pub fn bisimilar(p: &Process, q: &Process, mode: Mode) -> Result<bool> {
    Ok(bisimilar_in(p, q, mode, &pair_universe(p, q, InputMode::Early))?.equivalent)
}

pub fn strong_bisim(p: &Process, q: &Process) -> Result<(bool, Partition)> {
    let b = bisimilar_in(p, q, Mode::Strong, &pair_universe(p, q, InputMode::Early))?;
    Ok((b.equivalent, b.partition))
}

pub fn weak_bisim(p: &Process, q: &Process) -> Result<(bool, Partition)> {
    let b = bisimilar_in(p, q, Mode::Weak, &pair_universe(p, q, InputMode::Early))?;
    Ok((b.equivalent, b.partition))
}

/// `p ∼ 0` (no transitions at all) or `p ≈ 0` (no visible action ever
/// weakly enabled).
pub fn bisimilar_to_nil(p: &Process, mode: Mode) -> Result<bool> {
    bisimilar_to_nil_in(p, mode, &NameUniverse::for_processes([p]))
}

pub fn bisimilar_to_nil_in(p: &Process, mode: Mode, u: &NameUniverse) -> Result<bool> {
    p.require_finite()?;
    match mode {
        Mode::Strong => Ok(transitions(p, u)?.is_empty()),
        Mode::Weak => {
            let l = Lts::build(p, u)?;
            Ok((0..l.len()).all(|s| l.edges(s).iter().all(|(a, _)| a.is_tau())))
        }
    }
}

/// Default bound on the number of state pairs the naive oracle will examine.
pub const ORACLE_PAIR_BOUND: usize = 1 << 20;

/// Independent check by shrinking the full state-pair relation to its
/// greatest fixpoint.
pub fn naive_bisim_oracle(p: &Process, q: &Process, mode: Mode) -> Result<bool> {
    naive_bisim_oracle_in(
        p,
        q,
        mode,
        &pair_universe(p, q, InputMode::Early),
        ORACLE_PAIR_BOUND,
    )
}

pub fn naive_bisim_oracle_in(
    p: &Process,
    q: &Process,
    mode: Mode,
    u: &NameUniverse,
    bound: usize,
) -> Result<bool> {
    let l = Lts::build_many(&[p.clone(), q.clone()], u)?;
    let n = l.len();
    if n.saturating_mul(n) > bound {
        return Err(Error::TooLarge {
            pairs: n.saturating_mul(n),
            bound,
        });
    }
    // τ-reachability: grow each row until nothing changes
    let mut reach: Vec<Vec<bool>> = (0..n).map(|s| (0..n).map(|t| s == t).collect()).collect();
    if mode == Mode::Weak {
        let mut changed = true;
        while changed {
            changed = false;
            for row in reach.iter_mut() {
                for t in 0..n {
                    if !row[t] {
                        continue;
                    }
                    for (a, u2) in l.edges(t) {
                        if a.is_tau() && !row[*u2] {
                            row[*u2] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
    }
    let answers = |t: StateId, a: &Action| -> Vec<StateId> {
        match mode {
            Mode::Strong => l
                .edges(t)
                .iter()
                .filter(|(b, _)| b == a)
                .map(|(_, x)| *x)
                .collect(),
            Mode::Weak if a.is_tau() => (0..n).filter(|&x| reach[t][x]).collect(),
            Mode::Weak => {
                let mut out = BTreeSet::new();
                for m in (0..n).filter(|&m| reach[t][m]) {
                    for (b, x) in l.edges(m) {
                        if b == a {
                            out.extend((0..n).filter(|&y| reach[*x][y]));
                        }
                    }
                }
                out.into_iter().collect()
            }
        }
    };
    let mut rel = vec![vec![true; n]; n];
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..n {
            for t in 0..n {
                if !rel[s][t] {
                    continue;
                }
                let forth = l
                    .edges(s)
                    .iter()
                    .all(|(a, s2)| answers(t, a).iter().any(|&t2| rel[*s2][t2]));
                let back = l
                    .edges(t)
                    .iter()
                    .all(|(a, t2)| answers(s, a).iter().any(|&s2| rel[s2][*t2]));
                if !(forth && back) {
                    rel[s][t] = false;
                    changed = true;
                }
            }
        }
    }
    Ok(rel[l.roots()[0]][l.roots()[1]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn p(s: &str) -> Process {
        parse(s).unwrap()
    }

    #[test]
    fn interleaving_versus_sum() {
        let par = p("z!x.0 | a?(y).0");
        let sum = p("z!x.a?(y).0 + a?(y).z!x.0");
        assert!(strong_bisim(&par, &sum).unwrap().0);
        assert!(naive_bisim_oracle(&par, &sum, Mode::Strong).unwrap());

        let par = p("a!x.0 | a?(y).0");
        let sum = p("a!x.a?(y).0 + a?(y).a!x.0");
        assert!(!strong_bisim(&par, &sum).unwrap().0);
        assert!(!naive_bisim_oracle(&par, &sum, Mode::Strong).unwrap());
    }

    #[test]
    fn reflexive() {
        let q = p("new z.a!z.0 | a?(x).x!a.0");
        assert!(strong_bisim(&q, &q).unwrap().0);
        assert!(naive_bisim_oracle(&Process::Nil, &Process::Nil, Mode::Weak).unwrap());
    }

    #[test]
    fn weak_examples() {
        assert!(weak_bisim(&p("x!y.0"), &p("tau.tau.x!y.0")).unwrap().0);
        assert!(!strong_bisim(&p("x!y.0"), &p("tau.tau.x!y.0")).unwrap().0);
        assert!(weak_bisim(&p("tau.0"), &Process::Nil).unwrap().0);
        assert!(!weak_bisim(&p("x!y.0"), &Process::Nil).unwrap().0);
        // τ-preemption is observable
        assert!(!weak_bisim(&p("a!b.0 + tau.0"), &p("a!b.0")).unwrap().0);
        assert!(!naive_bisim_oracle(&p("a!b.0 + tau.0"), &p("a!b.0"), Mode::Weak).unwrap());
    }

    #[test]
    fn against_nil() {
        assert!(bisimilar_to_nil(&p("new z.z!a.0"), Mode::Strong).unwrap());
        assert!(!bisimilar_to_nil(&p("tau.0"), Mode::Strong).unwrap());
        assert!(bisimilar_to_nil(&p("tau.0"), Mode::Weak).unwrap());
        for m in [Mode::Strong, Mode::Weak] {
            assert!(bisimilar_to_nil(&p("[a=b]tau.0"), m).unwrap());
        }
    }

    #[test]
    fn partition_json() {
        let (_, part) = strong_bisim(&p("tau.0"), &p("tau.0 + tau.0")).unwrap();
        let v = part.to_json();
        assert_eq!(v["mode"], "strong");
        assert_eq!(v["blocks"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn oracle_bound() {
        let q = p("a!b.0 | c!d.0 | e!f.0");
        let u = pair_universe(&q, &q, InputMode::Early);
        assert!(matches!(
            naive_bisim_oracle_in(&q, &q, Mode::Strong, &u, 4),
            Err(Error::TooLarge { .. })
        ));
    }
}
