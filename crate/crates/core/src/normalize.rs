//! Head normal forms, stuttering, and stutter-free representatives.

use std::fmt;

use serde::Serialize;

use crate::equivalence::{bisimilar_in, refine, Mode};
use crate::error::{Error, Result};
use crate::lts::Lts;
use crate::parser::pretty;
use crate::semantics::NameUniverse;
use crate::syntax::{Name, Prefix, Process, Supply};

/// Prefix of a head-normal-form summand. `BoundOutput(x, z)` stands for
/// `new z.x!z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GuardedPrefix {
    Output { chan: Name, datum: Name },
    BoundOutput { chan: Name, binder: Name },
    Input { chan: Name, binder: Name },
    Tau,
}

impl GuardedPrefix {
    fn binder(&self) -> Option<&Name> {
        match self {
            GuardedPrefix::BoundOutput { binder, .. } | GuardedPrefix::Input { binder, .. } => {
                Some(binder)
            }
            _ => None,
        }
    }

    fn with_binder(&self, b: Name) -> GuardedPrefix {
        match self {
            GuardedPrefix::BoundOutput { chan, .. } => GuardedPrefix::BoundOutput {
                chan: chan.clone(),
                binder: b,
            },
            GuardedPrefix::Input { chan, .. } => GuardedPrefix::Input {
                chan: chan.clone(),
                binder: b,
            },
            other => other.clone(),
        }
    }

    fn channel(&self) -> Option<&Name> {
        match self {
            GuardedPrefix::Output { chan, .. }
            | GuardedPrefix::BoundOutput { chan, .. }
            | GuardedPrefix::Input { chan, .. } => Some(chan),
            GuardedPrefix::Tau => None,
        }
    }
}

impl fmt::Display for GuardedPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuardedPrefix::Output { chan, datum } => write!(f, "{chan}!{datum}"),
            GuardedPrefix::BoundOutput { chan, binder } => write!(f, "{chan}!({binder})"),
            GuardedPrefix::Input { chan, binder } => write!(f, "{chan}?({binder})"),
            GuardedPrefix::Tau => f.write_str("tau"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HeadNormalForm {
    pub summands: Vec<(GuardedPrefix, Process)>,
}

impl HeadNormalForm {
    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    pub fn len(&self) -> usize {
        self.summands.len()
    }

    /// The sum as a process. Bound outputs are written `new z.x!z.P`, with
    /// every such restriction hoisted in front of the whole sum.
    pub fn to_process(&self) -> Process {
        let mut supply = Supply::new(self.max_bound_index().map_or(0, |i| i + 1));
        let mut hoisted = Vec::new();
        let mut parts = Vec::new();
        for (pre, cont) in &self.summands {
            let part = match pre {
                GuardedPrefix::Output { chan, datum } => {
                    Process::output(chan.clone(), datum.clone(), cont.clone())
                }
                GuardedPrefix::Input { chan, binder } => {
                    Process::input(chan.clone(), binder.clone(), cont.clone())
                }
                GuardedPrefix::Tau => Process::tau(cont.clone()),
                GuardedPrefix::BoundOutput { chan, binder } => {
                    let z = supply.next();
                    let cont = cont.subst(binder, &z, &mut supply);
                    hoisted.push(z.clone());
                    Process::output(chan.clone(), z, cont)
                }
            };
            parts.push(part);
        }
        let body = Process::sum_all(parts);
        hoisted
            .into_iter()
            .rev()
            .fold(body, |acc, z| Process::restrict(z, acc))
    }

    fn max_bound_index(&self) -> Option<u32> {
        self.summands
            .iter()
            .flat_map(|(pre, cont)| {
                let head = pre
                    .binder()
                    .into_iter()
                    .chain(pre.channel())
                    .filter_map(|n| match n {
                        Name::Bound(i) => Some(*i),
                        _ => None,
                    });
                let datum = match pre {
                    GuardedPrefix::Output {
                        datum: Name::Bound(i),
                        ..
                    } => Some(*i),
                    _ => None,
                };
                head.chain(datum).chain(cont.max_bound_index())
            })
            .max()
    }
}

impl fmt::Display for HeadNormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.summands.is_empty() {
            return f.write_str("0");
        }
        for (i, (pre, cont)) in self.summands.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{pre}.({})", pretty(cont))?;
        }
        Ok(())
    }
}

/// Expansion of `p` into a sum of prefixed terms, strongly bisimilar to `p`.
pub fn expand_hnf(p: &Process) -> Result<HeadNormalForm> {
    p.require_finite()?;
    let p = p.alpha_canonical();
    let mut supply = Supply::for_process(&p);
    Ok(HeadNormalForm {
        summands: expand(&p, &mut supply),
    })
}

type Summands = Vec<(GuardedPrefix, Process)>;

fn expand(p: &Process, supply: &mut Supply) -> Summands {
    match p {
        Process::Nil => Vec::new(),
        Process::Prefixed(pre, cont) => {
            let head = match pre.resolve() {
                None => return Vec::new(),
                Some(Prefix::Output { chan, datum }) => GuardedPrefix::Output {
                    chan: chan.clone(),
                    datum: datum.clone(),
                },
                Some(Prefix::Input { chan, binder }) => GuardedPrefix::Input {
                    chan: chan.clone(),
                    binder: binder.clone(),
                },
                Some(Prefix::Tau) => GuardedPrefix::Tau,
                Some(Prefix::Match { .. }) => unreachable!("resolve strips guards"),
            };
            vec![(head, (**cont).clone())]
        }
        Process::Sum(l, r) => {
            let mut out = expand(l, supply);
            out.extend(expand(r, supply));
            out
        }
        Process::Par(l, r) => {
            let hl = expand(l, supply);
            let hr = expand(r, supply);
            let mut out = Vec::new();
            for (pre, cont) in &hl {
                let (pre, cont) = avoid(pre, cont, r, supply);
                out.push((pre, Process::par(cont, (**r).clone())));
            }
            for (pre, cont) in &hr {
                let (pre, cont) = avoid(pre, cont, l, supply);
                out.push((pre, Process::par((**l).clone(), cont)));
            }
            for (lp, lc) in &hl {
                for (rp, rc) in &hr {
                    if let Some(c) = synchronise(lp, lc, rp, rc, r, supply, false) {
                        out.push((GuardedPrefix::Tau, c));
                    }
                    if let Some(c) = synchronise(rp, rc, lp, lc, l, supply, true) {
                        out.push((GuardedPrefix::Tau, c));
                    }
                }
            }
            out
        }
        Process::Restrict(z, body) => {
            let mut out = Vec::new();
            for (pre, cont) in expand(body, supply) {
                if pre.channel() == Some(z) {
                    // the summand can never fire
                    continue;
                }
                match pre {
                    GuardedPrefix::Output { chan, datum } if &datum == z => {
                        out.push((
                            GuardedPrefix::BoundOutput {
                                chan,
                                binder: datum,
                            },
                            cont,
                        ));
                    }
                    pre => {
                        let (pre, cont) = match pre.binder() {
                            Some(b) if b == z => {
                                let fresh = supply.next();
                                let cont = cont.subst(b, &fresh, supply);
                                (pre.with_binder(fresh), cont)
                            }
                            _ => (pre, cont),
                        };
                        out.push((pre, Process::restrict(z.clone(), cont)));
                    }
                }
            }
            out
        }
        Process::Repl(_) => unreachable!("checked by require_finite"),
    }
}

/// Renames the binder of `pre` when it occurs free in the sibling `other`.
fn avoid(
    pre: &GuardedPrefix,
    cont: &Process,
    other: &Process,
    supply: &mut Supply,
) -> (GuardedPrefix, Process) {
    match pre.binder() {
        Some(b) if other.has_free(b) => {
            let fresh = supply.next();
            (
                pre.with_binder(fresh.clone()),
                cont.subst(b, &fresh, supply),
            )
        }
        _ => (pre.clone(), cont.clone()),
    }
}

/// Communication of an output summand with an input summand.
#[allow(clippy::too_many_arguments)]
fn synchronise(
    out_pre: &GuardedPrefix,
    out_cont: &Process,
    in_pre: &GuardedPrefix,
    in_cont: &Process,
    in_term: &Process,
    supply: &mut Supply,
    swapped: bool,
) -> Option<Process> {
    let GuardedPrefix::Input { chan: ic, binder } = in_pre else {
        return None;
    };
    let join = |a: Process, b: Process| {
        if swapped {
            Process::par(b, a)
        } else {
            Process::par(a, b)
        }
    };
    match out_pre {
        GuardedPrefix::Output { chan, datum } if chan == ic => {
            Some(join(out_cont.clone(), in_cont.subst(binder, datum, supply)))
        }
        GuardedPrefix::BoundOutput { chan, binder: z } if chan == ic => {
            let (z, out_cont) = if in_term.has_free(z) || in_cont.has_free(z) {
                let fresh = supply.next();
                (fresh.clone(), out_cont.subst(z, &fresh, supply))
            } else {
                (z.clone(), out_cont.clone())
            };
            let received = in_cont.subst(binder, &z, supply);
            Some(Process::restrict(z, join(out_cont, received)))
        }
        _ => None,
    }
}

fn universe_for(terms: &[&Process], base: &NameUniverse) -> NameUniverse {
    let fitted = NameUniverse::for_processes(terms.iter().copied());
    let pool = fitted.pool_size().max(base.pool_size());
    fitted
        .with_known(base.known().iter().cloned())
        .with_inputs(base.inputs())
        .with_pool_size(pool)
}

fn weakly_equal(a: &Process, b: &Process, u: &NameUniverse) -> Result<bool> {
    Ok(bisimilar_in(a, b, Mode::Weak, &universe_for(&[a, b], u))?.equivalent)
}

/// A reachable τ step between weakly bisimilar states, as `(source, target)`.
pub fn has_stuttering(p: &Process, u: &NameUniverse) -> Result<Option<(Process, Process)>> {
    let u = universe_for(&[p], u);
    let l = Lts::build(p, &u)?;
    let part = refine(&l, Mode::Weak);
    for s in 0..l.len() {
        for (a, t) in l.edges(s) {
            if a.is_tau() && part.same_block(s, *t) {
                return Ok(Some((l.process(s).clone(), l.process(*t).clone())));
            }
        }
    }
    Ok(None)
}

/// Outcome of stutter-free normalisation.
#[derive(Debug, Clone, Serialize)]
pub struct StutterReport {
    #[serde(rename = "equivalent-to-input")]
    pub equivalent_to_input: bool,
    #[serde(rename = "stutter-free")]
    pub stutter_free: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(String, String)>,
}

#[derive(Debug, Clone)]
pub struct Normalized {
    pub process: Process,
    pub report: StutterReport,
}

/// Runs the normalisation and verifies the result, without turning a
/// failed verification into an error.
pub fn normalize_with_report(p: &Process, u: &NameUniverse) -> Result<Normalized> {
    p.require_finite()?;
    let u = universe_for(&[p], u);
    let process = sf(p, &u)?.alpha_canonical();
    let equivalent_to_input = weakly_equal(p, &process, &u)?;
    let witness = has_stuttering(&process, &u)?;
    Ok(Normalized {
        report: StutterReport {
            equivalent_to_input,
            stutter_free: witness.is_none(),
            witness: witness.map(|(a, b)| (pretty(&a), pretty(&b))),
        },
        process,
    })
}

/// A stutter-free process weakly bisimilar to `p`.
pub fn stutter_free(p: &Process, u: &NameUniverse) -> Result<Normalized> {
    let n = normalize_with_report(p, u)?;
    if !n.report.equivalent_to_input {
        return Err(Error::NormalizationIncomplete {
            reason: "result is not weakly bisimilar to the input".into(),
            witness: None,
        });
    }
    if !n.report.stutter_free {
        return Err(Error::NormalizationIncomplete {
            reason: "result still has a stuttering transition".into(),
            witness: n.report.witness.clone(),
        });
    }
    Ok(n)
}

/// Depth of the stutter-free representative.
pub fn weak_depth(p: &Process, u: &NameUniverse) -> Result<u64> {
    let n = stutter_free(p, u)?;
    Lts::build(&n.process, &universe_for(&[&n.process], u))?.depth()
}

fn next_fresh(p: &Process) -> Name {
    let next = p
        .free_names()
        .into_iter()
        .filter_map(|n| match n {
            Name::Fresh(i) => Some(i + 1),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    Name::Fresh(next)
}

fn sf(p: &Process, u: &NameUniverse) -> Result<Process> {
    let h = expand_hnf(p)?;
    for (pre, cont) in &h.summands {
        if *pre == GuardedPrefix::Tau && weakly_equal(cont, p, u)? {
            return sf(cont, u);
        }
    }
    let mut summands = Vec::with_capacity(h.len());
    for (pre, cont) in &h.summands {
        let cont = match pre.binder() {
            None => sf(cont, u)?,
            Some(b) => {
                let w = next_fresh(&Process::par(p.clone(), cont.clone()));
                let opened = cont.substitute(&w, b);
                let normal = sf(&opened, u)?.substitute(b, &w);
                if matches!(pre, GuardedPrefix::Input { .. })
                    && !instances_agree(cont, &normal, b, u)?
                {
                    cont.clone()
                } else {
                    normal
                }
            }
        };
        summands.push((pre.clone(), cont));
    }
    Ok(HeadNormalForm { summands }.to_process())
}

/// Checks `a{y/b} ≈ c{y/b}` for every name `y` an input could receive.
fn instances_agree(a: &Process, c: &Process, b: &Name, u: &NameUniverse) -> Result<bool> {
    let mut names: Vec<Name> = match u.inputs() {
        crate::semantics::InputMode::Early => {
            let mut ns: std::collections::BTreeSet<Name> = u.known().clone();
            ns.extend(
                a.free_names()
                    .into_iter()
                    .chain(c.free_names())
                    .filter(|n| n != b),
            );
            ns.into_iter().collect()
        }
        crate::semantics::InputMode::FreshOnly => Vec::new(),
    };
    names.push(next_fresh(&Process::par(a.clone(), c.clone())));
    for y in names {
        if !weakly_equal(&a.substitute(&y, b), &c.substitute(&y, b), u)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::{strong_bisim, weak_bisim};
    use crate::parser::parse;
    use crate::semantics::InputMode;

    fn p(s: &str) -> Process {
        parse(s).unwrap()
    }

    fn u(ps: &[&Process]) -> NameUniverse {
        NameUniverse::for_processes(ps.iter().copied())
    }

    #[test]
    fn expansion_of_interleaving() {
        let par = p("z!x.0 | a?(y).0");
        let h = expand_hnf(&par).unwrap();
        assert_eq!(h.len(), 2);
        let sum = p("z!x.a?(y).0 + a?(y).z!x.0");
        assert!(strong_bisim(&h.to_process(), &sum).unwrap().0);
        assert!(strong_bisim(&h.to_process(), &par).unwrap().0);
    }

    #[test]
    fn restriction_cases() {
        // z not in the prefix
        let h = expand_hnf(&p("new z.a!b.z!c.0")).unwrap();
        assert!(matches!(h.summands[0].0, GuardedPrefix::Output { .. }));
        // bound output
        let h = expand_hnf(&p("new z.a!z.0")).unwrap();
        assert_eq!(h.len(), 1);
        assert!(
            matches!(&h.summands[0].0, GuardedPrefix::BoundOutput { chan, .. } if *chan == Name::user("a"))
        );
        assert_eq!(h.summands[0].1, Process::Nil);
        // blocked channel
        assert!(expand_hnf(&p("new z.z!c.0")).unwrap().is_empty());
    }

    #[test]
    fn close_in_expansion() {
        let q = p("new z.a!z.0 | a?(x).x!a.0");
        let h = expand_hnf(&q).unwrap();
        assert!(h.summands.iter().any(|(g, _)| *g == GuardedPrefix::Tau));
        let back = h.to_process();
        back.validate().unwrap();
        assert!(strong_bisim(&back, &q).unwrap().0);
    }

    #[test]
    fn hoisted_bound_outputs_stay_separate() {
        let q = p("new z.(a!z.0 + b!z.0) | c!d.0");
        let back = expand_hnf(&q).unwrap().to_process();
        back.validate().unwrap();
        assert!(strong_bisim(&back, &q).unwrap().0);
    }

    #[test]
    fn stuttering_detection() {
        let t = p("tau.0");
        assert_eq!(
            has_stuttering(&t, &u(&[&t])).unwrap(),
            Some((t.clone(), Process::Nil))
        );
        let x = p("x!y.0");
        assert_eq!(has_stuttering(&x, &u(&[&x])).unwrap(), None);
        let q = p("new z.a!z.0 | a?(x).(x!b.0 + tau.c!b.0)");
        assert!(has_stuttering(&q, &u(&[&q])).unwrap().is_some());
    }

    #[test]
    fn normal_forms() {
        let t = p("tau.0");
        assert_eq!(stutter_free(&t, &u(&[&t])).unwrap().process, Process::Nil);

        let chain = p("tau.tau.x!y.0");
        let n = stutter_free(&chain, &u(&[&chain])).unwrap();
        assert_eq!(n.process, p("x!y.0"));
        assert!(weak_bisim(&n.process, &chain).unwrap().0);

        let s = p("x!b.0 + tau.c!b.0");
        assert_eq!(stutter_free(&s, &u(&[&s])).unwrap().process, s);
    }

    #[test]
    fn weak_depths() {
        let chain = p("tau.tau.x!y.0");
        assert_eq!(weak_depth(&chain, &u(&[&chain])).unwrap(), 1);
        assert_eq!(weak_depth(&Process::Nil, &u(&[])).unwrap(), 0);
        let t = p("tau.0");
        assert_eq!(weak_depth(&t, &u(&[&t])).unwrap(), 0);
    }

    #[test]
    fn early_inputs_can_leave_stuttering() {
        let q = p("a?(x).(x!b.0 + tau.c!b.0)");
        let early = u(&[&q]);
        match stutter_free(&q, &early) {
            Err(Error::NormalizationIncomplete {
                witness: Some(_), ..
            }) => {}
            other => panic!("expected incomplete normalisation, got {other:?}"),
        }
        let fresh = early.with_inputs(InputMode::FreshOnly);
        let n = stutter_free(&q, &fresh).unwrap();
        assert!(n.report.stutter_free && n.report.equivalent_to_input);
    }

    #[test]
    fn report_json() {
        let t = p("tau.a!b.0");
        let n = stutter_free(&t, &u(&[&t])).unwrap();
        let v = serde_json::to_value(&n.report).unwrap();
        assert_eq!(v["stutter-free"], true);
        assert_eq!(v["equivalent-to-input"], true);
        assert!(v.get("witness").is_none());
    }
}
