//! Worked examples, each checked against its documented facts.

use serde::Serialize;

use crate::decompose::{find_split, scope_narrow, Split};
use crate::enumerate::TermUniverse;
use crate::equivalence::{bisimilar, Mode};
use crate::error::{Error, Result};
use crate::lts::{depth_of, norm_of, Lts};
use crate::normalize::{has_stuttering, normalize_with_report};
use crate::parser::{parse, pretty};
use crate::semantics::{transitions, InputMode, NameUniverse};
use crate::syntax::{Action, Name, Process};

pub const DEMOS: &[&str] = &[
    "non-congruence",
    "norm-gap",
    "tau-chain",
    "stutter-par",
    "scope-extrusion",
    "weak-normed-counterexample",
];

/// Default weight bound for the replicated example.
pub const DEFAULT_DEMO_WEIGHT: u64 = 8;

#[derive(Debug, Clone, Serialize)]
pub struct Fact {
    pub claim: String,
    pub observed: String,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub name: String,
    pub terms: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<String>,
    pub facts: Vec<Fact>,
}

impl DemoReport {
    fn new(name: &str, terms: &[&Process]) -> DemoReport {
        DemoReport {
            name: name.into(),
            terms: terms.iter().map(|p| pretty(p)).collect(),
            trace: Vec::new(),
            facts: Vec::new(),
        }
    }

    fn check<T: std::fmt::Debug + PartialEq>(&mut self, claim: &str, observed: T, expected: T) {
        self.facts.push(Fact {
            claim: claim.into(),
            holds: observed == expected,
            observed: format!("{observed:?}"),
        });
    }

    pub fn holds(&self) -> bool {
        self.facts.iter().all(|f| f.holds)
    }
}

fn term(s: &str) -> Process {
    parse(s).expect("demo terms parse")
}

pub fn run_demo(name: &str) -> Result<DemoReport> {
    run_demo_with(name, DEFAULT_DEMO_WEIGHT)
}

/// As [`run_demo`], with the weight bound used for bounded exploration.
pub fn run_demo_with(name: &str, max_weight: u64) -> Result<DemoReport> {
    match name {
        "non-congruence" => non_congruence(),
        "norm-gap" => norm_gap(),
        "tau-chain" => tau_chain(),
        "stutter-par" => stutter_par(),
        "scope-extrusion" => scope_extrusion(),
        "weak-normed-counterexample" => weak_normed(max_weight),
        other => Err(Error::UnknownDemo(other.into())),
    }
}

fn non_congruence() -> Result<DemoReport> {
    let p = term("z!x.0 | a?(y).0");
    let q = term("z!x.a?(y).0 + a?(y).z!x.0");
    let (a, z) = (Name::user("a"), Name::user("z"));
    let (p2, q2) = (p.substitute(&a, &z), q.substitute(&a, &z));
    let mut r = DemoReport::new("non-congruence", &[&p, &q, &p2, &q2]);
    r.check(
        "strongly bisimilar before {a/z}",
        bisimilar(&p, &q, Mode::Strong)?,
        true,
    );
    r.check(
        "not strongly bisimilar after {a/z}",
        bisimilar(&p2, &q2, Mode::Strong)?,
        false,
    );
    r.check(
        "not weakly bisimilar after {a/z}",
        bisimilar(&p2, &q2, Mode::Weak)?,
        false,
    );
    Ok(r)
}

fn norm_gap() -> Result<DemoReport> {
    let q0 = term("new z.a!z.0");
    let q1 = term("a?(x).x!a.0");
    let q = Process::par(q0.clone(), q1.clone());
    let mut r = DemoReport::new("norm-gap", &[&q, &q0, &q1]);
    r.check("norm of the composition", norm_of(&q)?, Some(2));
    r.check("norm of the left component", norm_of(&q0)?, Some(1));
    r.check("norm of the right component", norm_of(&q1)?, Some(2));
    let (d, d0, d1) = (depth_of(&q)?, depth_of(&q0)?, depth_of(&q1)?);
    r.check("depth of the composition", d, 3);
    r.check("depths add up", (d0, d1, d0 + d1 == d), (1, 2, true));
    Ok(r)
}

fn tau_chain() -> Result<DemoReport> {
    let chain = [term("x!y.0"), term("tau.x!y.0"), term("tau.tau.x!y.0")];
    let mut r = DemoReport::new("tau-chain", &[&chain[0], &chain[1], &chain[2]]);
    let depths = chain.iter().map(depth_of).collect::<Result<Vec<_>>>()?;
    r.check("depths", depths, vec![1, 3, 5]);
    for i in 0..chain.len() {
        for j in i + 1..chain.len() {
            let (p, q) = (&chain[i], &chain[j]);
            r.check(
                &format!("{} and {} weakly bisimilar", pretty(p), pretty(q)),
                bisimilar(p, q, Mode::Weak)?,
                true,
            );
            r.check(
                &format!("{} and {} not strongly bisimilar", pretty(p), pretty(q)),
                bisimilar(p, q, Mode::Strong)?,
                false,
            );
        }
    }
    Ok(r)
}

fn stutter_par() -> Result<DemoReport> {
    let p0 = term("new z.a!z.0");
    let p1 = term("a?(x).(x!b.0 + tau.c!b.0)");
    let p = Process::par(p0.clone(), p1.clone());
    let u = NameUniverse::for_processes([&p]).with_inputs(InputMode::FreshOnly);
    let mut r = DemoReport::new("stutter-par", &[&p0, &p1, &p]);
    r.check(
        "left component has no stuttering step",
        has_stuttering(&p0, &u)?.is_none(),
        true,
    );
    r.check(
        "right component has no stuttering step",
        has_stuttering(&p1, &u)?.is_none(),
        true,
    );
    let witness = has_stuttering(&p, &u)?;
    if let Some((s, t)) = &witness {
        r.trace = vec![pretty(s), pretty(t)];
    }
    r.check("composition has a stuttering step", witness.is_some(), true);
    let n = normalize_with_report(&p, &u)?;
    r.check(
        "normal form is weakly bisimilar and stutter-free",
        (n.report.equivalent_to_input, n.report.stutter_free),
        (true, true),
    );
    Ok(r)
}

fn scope_extrusion() -> Result<DemoReport> {
    let start = term("new z.a!z.z!c.c!a.0 | a?(x).x?(y).y!b.0");
    let mid = term("new z.(z!c.c!a.0 | z?(y).y!b.0)");
    let end = term("c!a.0 | c!b.0");
    let mut r = DemoReport::new("scope-extrusion", &[&start, &mid, &end]);
    let same = |p: &Process, q: &Process| {
        scope_narrow(p).alpha_canonical() == scope_narrow(q).alpha_canonical()
    };
    let u = NameUniverse::for_processes([&start]);

    let first = transitions(&start, &u)?;
    let step1 = first.iter().find(|(a, t)| a.is_tau() && same(t, &mid));
    r.check(
        "first τ step reaches the private exchange",
        step1.is_some(),
        true,
    );
    let after = transitions(&mid, &u)?;
    r.check("the private exchange has one transition", after.len(), 1);
    let step2 = after
        .iter()
        .find(|(a, t)| *a == Action::Tau && same(t, &end));
    r.check("second τ step fuses the outputs", step2.is_some(), true);
    r.trace = [step1.map(|s| &s.1), step2.map(|s| &s.1)]
        .into_iter()
        .flatten()
        .fold(vec![pretty(&start)], |mut acc, p| {
            acc.push(pretty(p));
            acc
        });

    let tu = TermUniverse::new(&["a", "b", "c"], 8);
    let split = find_split(&mid, Mode::Strong, InputMode::Early, &tu)?;
    r.check(
        "no strong split of the private exchange",
        split,
        Split::NoSplitWithinUniverse,
    );
    Ok(r)
}

fn weak_normed(max_weight: u64) -> Result<DemoReport> {
    let p = term("new z.(z!c.0 | z?(x).!a!b.0 | z?(y).0)");
    let u = NameUniverse::for_processes([&p]);
    let l = Lts::build_bounded(&p, &u, max_weight)?;
    let mut r = DemoReport::new("weak-normed-counterexample", &[&p]);
    r.check("replicated", !p.is_replication_free(), true);
    r.check("exploration truncated", l.truncated(), true);
    let norm = l.norm()?;
    r.check(
        "norm of the explored graph (τ to a deadlock)",
        norm,
        Some(2),
    );
    if let Some(dead) = (0..l.len()).find(|&s| l.is_deadlocked(s)) {
        r.trace = vec![pretty(&p), pretty(l.process(dead))];
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_demo_holds() {
        for name in DEMOS {
            let r = run_demo(name).unwrap();
            assert!(r.holds(), "{}", serde_json::to_string_pretty(&r).unwrap());
        }
    }

    #[test]
    fn unknown_demo() {
        assert!(matches!(run_demo("nope"), Err(Error::UnknownDemo(_))));
    }
}
