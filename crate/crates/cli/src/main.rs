use std::io::Read;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use picalc::decompose::{decomposition, sweep_upd_with, verify_upd};
use picalc::demo::{run_demo_with, DEFAULT_DEMO_WEIGHT, DEMOS};
use picalc::equivalence::{naive_bisim_oracle_in, pair_universe, ORACLE_PAIR_BOUND};
use picalc::{
    bisimilar_in, has_stuttering, normalize_with_report, parse, pretty, Error, GenConfig,
    InputMode, Lts, Mode, NameUniverse, Process, TermGenerator, TermUniverse,
};

#[derive(Parser)]
#[command(
    name = "picalc",
    version,
    about = "Workbench for the finite pi-calculus"
)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Opts {
    /// Size of the pool of fresh names used for inputs and extrusions.
    #[arg(long, global = true, env = "PICALC_FRESH_POOL")]
    fresh_pool: Option<usize>,
    /// Input instantiation: `early` or `fresh-only`.
    #[arg(long, global = true, default_value = "early")]
    inputs: InputMode,
    /// Explore only states within this weighted distance of the root.
    #[arg(long, global = true)]
    max_weight: Option<u64>,
    /// Seed for the random term generator.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print a JSON report instead of plain text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a term and print its canonical form.
    Parse { term: Option<String> },
    /// Print the transition system of a term.
    Lts {
        term: Option<String>,
        /// Graphviz output.
        #[arg(long)]
        dot: bool,
    },
    /// Longest weighted path to a deadlock.
    Depth { term: Option<String> },
    /// Shortest weighted path to a deadlock.
    Norm { term: Option<String> },
    /// Decide strong or weak bisimilarity.
    Bisim {
        #[arg(long, default_value = "strong")]
        mode: Mode,
        p: String,
        q: String,
        /// Cross-check with the naive fixpoint.
        #[arg(long)]
        oracle: bool,
    },
    /// Look for a reachable τ step between weakly bisimilar states.
    StutterCheck { term: Option<String> },
    /// Compute a stutter-free weakly bisimilar process.
    Normalize { term: Option<String> },
    /// Decompose a term into parallel primes.
    Decompose {
        #[arg(long, default_value = "strong")]
        mode: Mode,
        term: Option<String>,
        /// Names of the oracle universe (defaults to the free names of the term).
        #[arg(long, value_delimiter = ',')]
        names: Vec<String>,
        #[arg(long, default_value_t = 8)]
        max_size: usize,
    },
    /// Check unique decomposition for two terms, or sweep a universe with
    /// `--sweep names=a,b max-size=6`.
    VerifyUpd {
        #[arg(long, default_value = "strong")]
        mode: Mode,
        #[arg(long)]
        sweep: bool,
        args: Vec<String>,
    },
    /// Run a worked example.
    Demo {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(DEMOS))]
        name: String,
    },
    /// Print random replication-free terms.
    Random {
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long, default_value_t = 3)]
        names: usize,
    },
}

/// Result of one command: plain text, a JSON payload, and whether the
/// checked property held.
struct Outcome {
    text: String,
    result: Value,
    inputs: Vec<String>,
    universe: Option<Value>,
    ok: bool,
}

impl Outcome {
    fn new(text: String, result: Value) -> Outcome {
        Outcome {
            text,
            result,
            inputs: Vec::new(),
            universe: None,
            ok: true,
        }
    }

    fn inputs(mut self, ps: &[&Process]) -> Outcome {
        self.inputs = ps.iter().map(|p| pretty(p)).collect();
        self
    }

    fn universe(mut self, u: &NameUniverse) -> Outcome {
        self.universe =
            Some(json!({ "known": u.known(), "pool_size": u.pool_size(), "inputs": u.inputs() }));
        self
    }
}

fn read_term(arg: Option<&str>) -> Result<Process, Failure> {
    let text = match arg {
        Some(t) if t != "-" => t.to_string(),
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::Usage(format!("reading stdin: {e}")))?;
            s
        }
    };
    Ok(parse(text.trim())?)
}

enum Failure {
    Usage(String),
    Analysis(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Analysis(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Analysis(e) => match e {
                Error::Syntax(_)
                | Error::MalformedSum { .. }
                | Error::MalformedBinder { .. }
                | Error::NotFinite { .. }
                | Error::UnknownDemo(_) => 2,
                _ => 3,
            },
        }
    }
}

fn universe(opts: &Opts, ps: &[&Process]) -> NameUniverse {
    let u = NameUniverse::for_processes(ps.iter().copied()).with_inputs(opts.inputs);
    match opts.fresh_pool {
        Some(n) => u.with_pool_size(n),
        None => u,
    }
}

fn build(opts: &Opts, p: &Process, u: &NameUniverse) -> picalc::Result<Lts> {
    match opts.max_weight {
        Some(w) => Lts::build_bounded(p, u, w),
        None => Lts::build(p, u),
    }
}

fn run(command: &Command, opts: &Opts) -> Result<Outcome, Failure> {
    Ok(match command {
        Command::Parse { term } => {
            let p = read_term(term.as_deref())?;
            let canonical = p.alpha_canonical();
            let result = json!({
                "pretty": pretty(&p),
                "canonical": pretty(&canonical),
                "size": p.size(),
                "free_names": p.free_names(),
                "replication_free": p.is_replication_free(),
            });
            Outcome::new(pretty(&p), result).inputs(&[&p])
        }
        Command::Lts { term, dot } => {
            let p = read_term(term.as_deref())?;
            let u = universe(opts, &[&p]);
            let l = build(opts, &p, &u)?;
            let text = if *dot {
                l.to_dot()
            } else {
                let mut s = String::new();
                for id in 0..l.len() {
                    let mark = if l.is_truncated(id) {
                        " (truncated)"
                    } else {
                        ""
                    };
                    s.push_str(&format!("s{id}: {}{mark}\n", pretty(l.process(id))));
                }
                for id in 0..l.len() {
                    for (a, t) in l.edges(id) {
                        s.push_str(&format!("s{id} --{a}--> s{t}\n"));
                    }
                }
                s.trim_end().to_string()
            };
            Outcome::new(text, l.to_json()).inputs(&[&p]).universe(&u)
        }
        Command::Depth { term } => {
            let p = read_term(term.as_deref())?;
            let u = universe(opts, &[&p]);
            let d = build(opts, &p, &u)?.depth()?;
            Outcome::new(d.to_string(), json!({ "depth": d }))
                .inputs(&[&p])
                .universe(&u)
        }
        Command::Norm { term } => {
            let p = read_term(term.as_deref())?;
            let u = universe(opts, &[&p]);
            let n = build(opts, &p, &u)?.norm()?;
            let text = n.map_or("infinite".to_string(), |n| n.to_string());
            Outcome::new(text, json!({ "norm": n }))
                .inputs(&[&p])
                .universe(&u)
        }
        Command::Bisim { mode, p, q, oracle } => {
            let (p, q) = (parse(p)?, parse(q)?);
            let mut u = pair_universe(&p, &q, opts.inputs);
            if let Some(n) = opts.fresh_pool {
                u = u.with_pool_size(n);
            }
            let b = bisimilar_in(&p, &q, *mode, &u)?;
            let mut result = json!({ "mode": mode, "equivalent": b.equivalent, "partition": b.partition.to_json() });
            let mut ok = true;
            if *oracle {
                let naive = naive_bisim_oracle_in(&p, &q, *mode, &u, ORACLE_PAIR_BOUND)?;
                result["oracle"] = json!(naive);
                ok = naive == b.equivalent;
            }
            let mut out = Outcome::new(b.equivalent.to_string(), result)
                .inputs(&[&p, &q])
                .universe(&u);
            out.ok = ok;
            out
        }
        Command::StutterCheck { term } => {
            let p = read_term(term.as_deref())?;
            let u = universe(opts, &[&p]);
            let w = has_stuttering(&p, &u)?;
            let text = match &w {
                None => "stutter-free".to_string(),
                Some((s, t)) => format!("stuttering: {} --tau--> {}", pretty(s), pretty(t)),
            };
            let witness = w.as_ref().map(|(s, t)| [pretty(s), pretty(t)]);
            Outcome::new(
                text,
                json!({ "stutter-free": w.is_none(), "witness": witness }),
            )
            .inputs(&[&p])
            .universe(&u)
        }
        Command::Normalize { term } => {
            let p = read_term(term.as_deref())?;
            let u = universe(opts, &[&p]);
            let n = normalize_with_report(&p, &u)?;
            let r = &n.report;
            if !(r.equivalent_to_input && r.stutter_free) {
                let reason = if r.equivalent_to_input {
                    "result still has a stuttering transition"
                } else {
                    "result is not weakly bisimilar to the input"
                };
                eprintln!(
                    "{}",
                    serde_json::to_string_pretty(
                        &json!({ "process": pretty(&n.process), "report": r })
                    )
                    .unwrap()
                );
                return Err(Error::NormalizationIncomplete {
                    reason: reason.into(),
                    witness: r.witness.clone(),
                }
                .into());
            }
            Outcome::new(
                pretty(&n.process),
                json!({ "process": pretty(&n.process), "report": r }),
            )
            .inputs(&[&p])
            .universe(&u)
        }
        Command::Decompose {
            mode,
            term,
            names,
            max_size,
        } => {
            let p = read_term(term.as_deref())?;
            let names: Vec<String> = if names.is_empty() {
                p.free_names()
                    .iter()
                    .filter(|n| n.is_user())
                    .map(|n| n.to_string())
                    .collect()
            } else {
                names.clone()
            };
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            let tu = TermUniverse::new(&names, *max_size);
            let d = decomposition(&p, *mode, opts.inputs, &tu)?;
            let text = if d.factors.is_empty() {
                "(no factors)".to_string()
            } else {
                d.factors.iter().map(pretty).collect::<Vec<_>>().join("\n")
            };
            let mut out = Outcome::new(text, d.to_json()).inputs(&[&p]);
            out.ok = d.verified_equivalent;
            out
        }
        Command::VerifyUpd { mode, sweep, args } => {
            if *sweep {
                let (names, max_size) = sweep_params(args)?;
                let names: Vec<&str> = names.iter().map(String::as_str).collect();
                let tu = TermUniverse::new(&names, max_size);
                let quiet = opts.json;
                let r = sweep_upd_with(&tu, *mode, opts.inputs, |done, total| {
                    if !quiet && done % 50_000 == 0 {
                        eprintln!("{done}/{total} terms");
                    }
                })?;
                let text = format!(
                    "{} terms, {} classes, {} equivalent pairs, {} violations, {} unsound",
                    r.terms,
                    r.classes,
                    r.equivalent_pairs,
                    r.violation_count,
                    r.unsound.len()
                );
                let mut out = Outcome::new(text, serde_json::to_value(&r).unwrap());
                out.ok = r.holds();
                out
            } else {
                let [p, q] = args.as_slice() else {
                    return Err(Failure::Usage(
                        "verify-upd expects two terms, or --sweep names=.. max-size=..".into(),
                    ));
                };
                let (p, q) = (parse(p)?, parse(q)?);
                let mut names: Vec<String> = Process::par(p.clone(), q.clone())
                    .free_names()
                    .iter()
                    .filter(|n| n.is_user())
                    .map(|n| n.to_string())
                    .collect();
                names.sort();
                let names: Vec<&str> = names.iter().map(String::as_str).collect();
                let tu = TermUniverse::new(&names, p.size().max(q.size()));
                let v = verify_upd(&p, &q, *mode, opts.inputs, &tu)?;
                let text = match (v.equivalent, v.holds()) {
                    (false, _) => "not equivalent".to_string(),
                    (true, true) => "unique: factors match".to_string(),
                    (true, false) => "violation: factors differ".to_string(),
                };
                let mut out = Outcome::new(text, v.to_json()).inputs(&[&p, &q]);
                out.ok = v.holds();
                out
            }
        }
        Command::Demo { name } => {
            let r = run_demo_with(name, opts.max_weight.unwrap_or(DEFAULT_DEMO_WEIGHT))?;
            let mut text = format!("{}\n", r.name);
            if !r.trace.is_empty() {
                text.push_str(&format!("  trace: {}\n", r.trace.join("  ->  ")));
            }
            for f in &r.facts {
                text.push_str(&format!(
                    "  [{}] {}: {}\n",
                    if f.holds { "ok" } else { "FAIL" },
                    f.claim,
                    f.observed
                ));
            }
            let mut out = Outcome::new(
                text.trim_end().to_string(),
                serde_json::to_value(&r).unwrap(),
            );
            out.ok = r.holds();
            out
        }
        Command::Random {
            count,
            depth,
            names,
        } => {
            let config = GenConfig {
                names: *names,
                max_depth: *depth,
                ..GenConfig::default()
            };
            let mut g = TermGenerator::new(opts.seed, config);
            let terms: Vec<String> = (0..*count).map(|_| pretty(&g.process())).collect();
            Outcome::new(
                terms.join("\n"),
                json!({ "seed": opts.seed, "terms": terms }),
            )
        }
    })
}

fn sweep_params(args: &[String]) -> Result<(Vec<String>, usize), Failure> {
    let mut names = None;
    let mut max_size = None;
    for a in args {
        match a.split_once('=') {
            Some(("names", v)) => {
                names = Some(
                    v.split(',')
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect(),
                )
            }
            Some(("max-size", v)) => {
                max_size = Some(
                    v.parse()
                        .map_err(|_| Failure::Usage(format!("bad max-size `{v}`")))?,
                );
            }
            _ => return Err(Failure::Usage(format!("unexpected sweep argument `{a}`"))),
        }
    }
    match (names, max_size) {
        (Some(n), Some(s)) => Ok((n, s)),
        _ => Err(Failure::Usage(
            "--sweep needs names=.. and max-size=..".into(),
        )),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Parse { .. } => "parse",
        Command::Lts { .. } => "lts",
        Command::Depth { .. } => "depth",
        Command::Norm { .. } => "norm",
        Command::Bisim { .. } => "bisim",
        Command::StutterCheck { .. } => "stutter-check",
        Command::Normalize { .. } => "normalize",
        Command::Decompose { .. } => "decompose",
        Command::VerifyUpd { .. } => "verify-upd",
        Command::Demo { .. } => "demo",
        Command::Random { .. } => "random",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli.command, &cli.opts) {
        Ok(out) => {
            let raw_dot = matches!(cli.command, Command::Lts { dot: true, .. });
            if cli.opts.json && !raw_dot {
                let report = json!({
                    "command": command_name(&cli.command),
                    "inputs": out.inputs,
                    "universe": out.universe,
                    "result": out.result,
                    "holds": out.ok,
                    "elapsed_ms": start.elapsed().as_millis() as u64,
                });
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                println!("{}", out.text);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Analysis(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
