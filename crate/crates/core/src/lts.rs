//! Reachable transition graphs, weighted depth and norm.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::parser::pretty;
use crate::semantics::{transitions_at, NameUniverse};
use crate::syntax::{Action, Name, Process};

pub type StateId = usize;

/// A process together with the number of pool names consumed to reach it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    pub process: Process,
    pub allocated: usize,
}

#[derive(Debug, Clone)]
pub struct Lts {
    universe: NameUniverse,
    states: Vec<State>,
    index: HashMap<State, StateId>,
    edges: Vec<Vec<(Action, StateId)>>,
    cut: Vec<bool>,
    roots: Vec<StateId>,
}

impl Lts {
    fn empty(universe: &NameUniverse) -> Lts {
        Lts {
            universe: universe.clone(),
            states: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            cut: Vec::new(),
            roots: Vec::new(),
        }
    }

    fn intern(&mut self, s: State) -> (StateId, bool) {
        if let Some(&id) = self.index.get(&s) {
            return (id, false);
        }
        let id = self.states.len();
        self.index.insert(s.clone(), id);
        self.states.push(s);
        self.edges.push(Vec::new());
        self.cut.push(false);
        (id, true)
    }

    /// Complete reachable graph of a replication-free process.
    pub fn build(p: &Process, u: &NameUniverse) -> Result<Lts> {
        Lts::build_many(std::slice::from_ref(p), u)
    }

    /// Disjoint-union style graph with one root per process. States reachable
    /// from several roots are shared.
    pub fn build_many(ps: &[Process], u: &NameUniverse) -> Result<Lts> {
        let mut l = Lts::empty(u);
        let mut stack = Vec::new();
        let start = start_allocation(ps, u);
        for p in ps {
            p.require_finite()?;
            let (id, new) = l.intern(State {
                process: p.alpha_canonical(),
                allocated: start,
            });
            l.roots.push(id);
            if new {
                stack.push(id);
            }
        }
        while let Some(id) = stack.pop() {
            let s = &l.states[id];
            let ts = transitions_at(&s.process, u, s.allocated)?;
            let mut out = Vec::with_capacity(ts.len());
            for t in ts {
                let (tid, new) = l.intern(State {
                    process: t.target,
                    allocated: t.allocated,
                });
                if new {
                    stack.push(tid);
                }
                out.push((t.action, tid));
            }
            l.edges[id] = out;
        }
        Ok(l)
    }

    /// Explores paths of cumulative weight at most `max_weight`. Replication is
    /// allowed. States whose outgoing edges were not all explored are marked
    /// truncated.
    pub fn build_bounded(p: &Process, u: &NameUniverse, max_weight: u64) -> Result<Lts> {
        let mut l = Lts::empty(u);
        let start = start_allocation(std::slice::from_ref(p), u);
        let (root, _) = l.intern(State {
            process: p.alpha_canonical(),
            allocated: start,
        });
        l.roots.push(root);
        let mut dist: Vec<u64> = vec![0];
        let mut done: Vec<bool> = vec![false];
        let mut heap = BinaryHeap::from([Reverse((0u64, root))]);
        while let Some(Reverse((d, id))) = heap.pop() {
            if done[id] {
                continue;
            }
            done[id] = true;
            let s = &l.states[id];
            let ts = transitions_at(&s.process, u, s.allocated)?;
            let mut out = Vec::new();
            for t in ts {
                let w = t.action.weight();
                if d + w > max_weight {
                    l.cut[id] = true;
                    continue;
                }
                let (tid, new) = l.intern(State {
                    process: t.target,
                    allocated: t.allocated,
                });
                if new {
                    dist.push(u64::MAX);
                    done.push(false);
                }
                if d + w < dist[tid] {
                    dist[tid] = d + w;
                    heap.push(Reverse((d + w, tid)));
                }
                out.push((t.action, tid));
            }
            l.edges[id] = out;
        }
        Ok(l)
    }

    pub fn universe(&self) -> &NameUniverse {
        &self.universe
    }

    pub fn root(&self) -> StateId {
        self.roots[0]
    }

    pub fn roots(&self) -> &[StateId] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn state(&self, id: StateId) -> &State {
        &self.states[id]
    }

    pub fn process(&self, id: StateId) -> &Process {
        &self.states[id].process
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn edges(&self, id: StateId) -> &[(Action, StateId)] {
        &self.edges[id]
    }

    pub fn lookup(&self, p: &Process, allocated: usize) -> Option<StateId> {
        self.index
            .get(&State {
                process: p.alpha_canonical(),
                allocated,
            })
            .copied()
    }

    /// Some state holding `p`, whatever its allocation count.
    pub fn find(&self, p: &Process) -> Option<StateId> {
        let p = p.alpha_canonical();
        self.states.iter().position(|s| s.process == p)
    }

    /// True iff some state had outgoing transitions left unexplored.
    pub fn truncated(&self) -> bool {
        self.cut.iter().any(|&c| c)
    }

    pub fn is_truncated(&self, id: StateId) -> bool {
        self.cut[id]
    }

    /// No outgoing transitions at all (a truncated state is never deadlocked).
    pub fn is_deadlocked(&self, id: StateId) -> bool {
        self.edges[id].is_empty() && !self.cut[id]
    }

    /// Longest weighted path from `id` to a deadlocked state.
    pub fn depth_from(&self, id: StateId) -> Result<u64> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done(u64),
        }
        let mut mark = vec![Mark::New; self.len()];
        // iterative post-order to keep deep graphs off the call stack
        let mut stack: Vec<(StateId, usize)> = vec![(id, 0)];
        mark[id] = Mark::Active;
        while let Some(top) = stack.last_mut() {
            let (s, next) = *top;
            if self.cut[s] {
                return Err(Error::Inconclusive);
            }
            if let Some(&(_, t)) = self.edges[s].get(next) {
                top.1 += 1;
                match mark[t] {
                    Mark::Active => return Err(Error::CyclicLts),
                    Mark::New => {
                        mark[t] = Mark::Active;
                        stack.push((t, 0));
                    }
                    Mark::Done(_) => {}
                }
            } else {
                let best = self.edges[s]
                    .iter()
                    .map(|(a, t)| match mark[*t] {
                        Mark::Done(d) => a.weight() + d,
                        _ => unreachable!(),
                    })
                    .max()
                    .unwrap_or(0);
                mark[s] = Mark::Done(best);
                stack.pop();
            }
        }
        match mark[id] {
            Mark::Done(d) => Ok(d),
            _ => unreachable!(),
        }
    }

    pub fn depth(&self) -> Result<u64> {
        self.depth_from(self.root())
    }

    /// Shortest weighted path from `id` to a deadlocked state; `None` when no
    /// deadlocked state is reachable.
    pub fn norm_from(&self, id: StateId) -> Result<Option<u64>> {
        let mut dist = vec![u64::MAX; self.len()];
        dist[id] = 0;
        let mut heap = BinaryHeap::from([Reverse((0u64, id))]);
        let mut first_cut: Option<u64> = None;
        while let Some(Reverse((d, s))) = heap.pop() {
            if d > dist[s] {
                continue;
            }
            if self.is_deadlocked(s) {
                // an unexplored path leaving a cut state has length > its distance
                return match first_cut {
                    Some(c) if d > c + 1 => Err(Error::Inconclusive),
                    _ => Ok(Some(d)),
                };
            }
            if self.cut[s] && first_cut.is_none() {
                first_cut = Some(d);
            }
            for (a, t) in &self.edges[s] {
                let nd = d + a.weight();
                if nd < dist[*t] {
                    dist[*t] = nd;
                    heap.push(Reverse((nd, *t)));
                }
            }
        }
        if first_cut.is_some() {
            Err(Error::Inconclusive)
        } else {
            Ok(None)
        }
    }

    pub fn norm(&self) -> Result<Option<u64>> {
        self.norm_from(self.root())
    }

    /// States reachable from `id`, in discovery order.
    pub fn reachable(&self, id: StateId) -> Vec<StateId> {
        let mut seen = vec![false; self.len()];
        let mut order = vec![id];
        seen[id] = true;
        let mut i = 0;
        while i < order.len() {
            for (_, t) in &self.edges[order[i]] {
                if !seen[*t] {
                    seen[*t] = true;
                    order.push(*t);
                }
            }
            i += 1;
        }
        order
    }

    pub fn to_dot(&self) -> String {
        let mut out =
            String::from("digraph lts {\n  rankdir=LR;\n  node [fontname=\"monospace\"];\n");
        for (id, s) in self.states.iter().enumerate() {
            let shape = if self.roots.contains(&id) {
                "doublecircle"
            } else if self.is_deadlocked(id) {
                "box"
            } else if self.cut[id] {
                "diamond"
            } else {
                "ellipse"
            };
            let _ = writeln!(
                out,
                "  s{id} [label=\"{}\", shape={shape}];",
                escape(&pretty(&s.process))
            );
        }
        for (id, es) in self.edges.iter().enumerate() {
            for (a, t) in es {
                let _ = writeln!(
                    out,
                    "  s{id} -> s{t} [label=\"{}\"];",
                    escape(&a.to_string())
                );
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let states: Vec<JsonState> = self
            .states
            .iter()
            .enumerate()
            .map(|(id, s)| JsonState {
                id,
                process: pretty(&s.process),
                allocated: s.allocated,
                deadlocked: self.is_deadlocked(id),
                truncated: self.cut[id],
            })
            .collect();
        let edges: Vec<JsonEdge> = self
            .edges
            .iter()
            .enumerate()
            .flat_map(|(id, es)| {
                es.iter().map(move |(a, t)| JsonEdge {
                    from: id,
                    action: a.to_string(),
                    weight: a.weight(),
                    to: *t,
                })
            })
            .collect();
        serde_json::json!({
            "roots": self.roots,
            "truncated": self.truncated(),
            "states": states,
            "edges": edges,
        })
    }
}

/// Pool names free in any root count as already allocated for all of them,
/// so that every root draws the same next fresh name.
pub(crate) fn start_allocation(ps: &[Process], u: &NameUniverse) -> usize {
    ps.iter()
        .flat_map(|p| p.free_names())
        .filter_map(|n| match n {
            Name::Fresh(i) => Some(i as usize + 1),
            _ => None,
        })
        .fold(u.allocated(), usize::max)
}

#[derive(Serialize)]
struct JsonState {
    id: StateId,
    process: String,
    allocated: usize,
    deadlocked: bool,
    truncated: bool,
}

#[derive(Serialize)]
struct JsonEdge {
    from: StateId,
    action: String,
    weight: u64,
    to: StateId,
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Depth of a replication-free process in its own universe.
pub fn depth_of(p: &Process) -> Result<u64> {
    Lts::build(p, &NameUniverse::for_processes([p]))?.depth()
}

/// Norm of a replication-free process in its own universe.
pub fn norm_of(p: &Process) -> Result<Option<u64>> {
    Lts::build(p, &NameUniverse::for_processes([p]))?.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn build(s: &str) -> Lts {
        let p = parse(s).unwrap();
        Lts::build(&p, &NameUniverse::for_processes([&p])).unwrap()
    }

    const Q: &str = "new z.a!z.0 | a?(x).x!a.0";

    #[test]
    fn nil_graph() {
        let l = build("0");
        assert_eq!((l.len(), l.edge_count()), (1, 0));
        assert!(l.is_deadlocked(l.root()));
        assert_eq!(l.depth().unwrap(), 0);
        assert_eq!(l.norm().unwrap(), Some(0));
    }

    #[test]
    fn extrusion_example() {
        let l = build(Q);
        let target = parse("new z.(0 | z!a.0)").unwrap();
        let t = l.lookup(&target, 0).expect("tau target present");
        assert!(l.edges(l.root()).iter().any(|(a, s)| a.is_tau() && *s == t));
        assert!(l.is_deadlocked(t));
        assert_eq!(l.depth().unwrap(), 3);
        assert_eq!(l.norm().unwrap(), Some(2));
    }

    #[test]
    fn norms_of_components() {
        assert_eq!(build("new z.a!z.0").norm().unwrap(), Some(1));
        assert_eq!(build("a?(x).x!a.0").norm().unwrap(), Some(2));
    }

    #[test]
    fn two_step_extrusion_chain() {
        let l = build("new z.a!z.z!c.c!a.0 | a?(x).x?(y).y!b.0");
        let end = parse("new z.(c!a.0 | c!b.0)").unwrap();
        let end = l.lookup(&end, 0).expect("chain end present");
        let mid: Vec<_> = l
            .edges(l.root())
            .iter()
            .filter(|(a, _)| a.is_tau())
            .map(|(_, s)| *s)
            .collect();
        assert_eq!(mid.len(), 1);
        assert!(l.edges(mid[0]).iter().any(|(a, s)| a.is_tau() && *s == end));
    }

    #[test]
    fn weighted_depth() {
        assert_eq!(build("tau.x!y.0").depth().unwrap(), 3);
        assert_eq!(build("tau.tau.x!y.0").depth().unwrap(), 5);
        assert_eq!(build("x!y.0 + tau.tau.0").norm().unwrap(), Some(1));
    }

    #[test]
    fn replication_requires_bound() {
        let p = parse("!a!b.0").unwrap();
        assert!(matches!(
            Lts::build(&p, &NameUniverse::for_processes([&p])),
            Err(Error::NotFinite { .. })
        ));
    }

    #[test]
    fn bounded_exploration() {
        let p = parse("new z.a!z.0 | a?(x).!x!a.0").unwrap();
        let u = NameUniverse::for_processes([&p]);
        let l = Lts::build_bounded(&p, &u, 10).unwrap();
        assert!(l.truncated());
        assert_eq!(l.norm().unwrap(), Some(2));

        let zero = Lts::build_bounded(&p, &u, 0).unwrap();
        assert_eq!(zero.len(), 1);
        assert!(zero.truncated());

        let nil = Lts::build_bounded(&Process::Nil, &u, 5).unwrap();
        assert_eq!(nil.len(), 1);
        assert!(!nil.truncated());
        let nil0 = Lts::build_bounded(&Process::Nil, &u, 0).unwrap();
        assert!(!nil0.truncated());
    }

    #[test]
    fn bounded_norm_is_exact_when_reached() {
        let p = parse("a!b.0 + tau.!c!d.0").unwrap();
        let l = Lts::build_bounded(&p, &NameUniverse::for_processes([&p]), 4).unwrap();
        assert!(l.truncated());
        assert_eq!(l.norm().unwrap(), Some(1));
    }

    #[test]
    fn infinite_norm_without_deadlock() {
        // a finite graph with a self-loop and no deadlock
        let p = parse("!tau.0").unwrap();
        let l = Lts::build_bounded(&p, &NameUniverse::for_processes([&p]), 6).unwrap();
        assert!(matches!(l.norm(), Err(Error::Inconclusive)));
        assert!(matches!(
            l.depth(),
            Err(Error::Inconclusive) | Err(Error::CyclicLts)
        ));
    }

    #[test]
    fn dot_is_deterministic() {
        let a = build(Q).to_dot();
        let b = build(Q).to_dot();
        assert_eq!(a, b);
        assert!(a.contains("tau"));
        assert!(a.starts_with("digraph lts {"));
    }

    #[test]
    fn json_export() {
        let v = build("tau.0").to_json();
        assert_eq!(v["edges"][0]["weight"], 2);
        assert_eq!(v["states"].as_array().unwrap().len(), 2);
    }
}
