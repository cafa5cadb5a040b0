//! Python bindings for the picalc workbench.
//!
//! Reports are returned as plain dictionaries; terms are wrapped in
//! [`Process`].

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

use picalc::decompose::{self as dec, Split};
use picalc::{
    Error, GenConfig, InputMode, Lts, Mode, Name, NameUniverse, TermGenerator, TermUniverse,
};

create_exception!(picalc_py, PicalcError, PyException);
create_exception!(picalc_py, ParseError, PicalcError);
create_exception!(picalc_py, InconclusiveError, PicalcError);
create_exception!(picalc_py, NormalizationIncompleteError, PicalcError);

fn err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Syntax(_) | Error::MalformedSum { .. } | Error::MalformedBinder { .. } => {
            ParseError::new_err(msg)
        }
        Error::Inconclusive => InconclusiveError::new_err(msg),
        Error::NormalizationIncomplete { .. } => NormalizationIncompleteError::new_err(msg),
        _ => PicalcError::new_err(msg),
    }
}

fn mode(s: &str) -> PyResult<Mode> {
    s.parse().map_err(PyValueError::new_err)
}

fn inputs(s: &str) -> PyResult<InputMode> {
    s.parse().map_err(PyValueError::new_err)
}

fn json<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn universe(
    ps: &[&picalc::Process],
    input_mode: &str,
    fresh_pool: Option<usize>,
) -> PyResult<NameUniverse> {
    let u = NameUniverse::for_processes(ps.iter().copied()).with_inputs(inputs(input_mode)?);
    Ok(match fresh_pool {
        Some(n) => u.with_pool_size(n),
        None => u,
    })
}

fn term_universe(p: &picalc::Process, names: Option<Vec<String>>, max_size: usize) -> TermUniverse {
    let names = names.unwrap_or_else(|| {
        p.free_names()
            .iter()
            .filter(|n| n.is_user())
            .map(Name::to_string)
            .collect()
    });
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    TermUniverse::new(&names, max_size)
}

/// A π-calculus term.
#[pyclass(frozen, eq, hash, skip_from_py_object, module = "picalc_py")]
#[derive(Clone, PartialEq, Eq, Hash)]
struct Process {
    inner: picalc::Process,
}

impl From<picalc::Process> for Process {
    fn from(inner: picalc::Process) -> Self {
        Process { inner }
    }
}

#[pymethods]
impl Process {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        picalc::parse(text).map(Process::from).map_err(err)
    }

    fn __str__(&self) -> String {
        picalc::pretty(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Process({:?})", picalc::pretty(&self.inner))
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    fn free_names(&self) -> Vec<String> {
        self.inner
            .free_names()
            .iter()
            .map(Name::to_string)
            .collect()
    }

    fn is_replication_free(&self) -> bool {
        self.inner.is_replication_free()
    }

    /// The α-canonical representative.
    fn canonical(&self) -> Process {
        self.inner.alpha_canonical().into()
    }

    /// Replaces free occurrences of `target` by `replacement`.
    fn substitute(&self, replacement: &str, target: &str) -> Process {
        self.inner
            .substitute(&Name::user(replacement), &Name::user(target))
            .into()
    }

    fn alpha_eq(&self, other: &Process) -> bool {
        self.inner.alpha_eq(&other.inner)
    }

    /// Parallel composition.
    fn __or__(&self, other: &Process) -> Process {
        picalc::Process::par(self.inner.clone(), other.inner.clone()).into()
    }
}

#[pyfunction]
fn parse(text: &str) -> PyResult<Process> {
    Process::new(text)
}

#[pyfunction]
#[pyo3(signature = (p, inputs="early", fresh_pool=None))]
fn transitions(
    p: &Process,
    inputs: &str,
    fresh_pool: Option<usize>,
) -> PyResult<Vec<(String, Process)>> {
    let u = universe(&[&p.inner], inputs, fresh_pool)?;
    let ts = picalc::transitions(&p.inner, &u).map_err(err)?;
    Ok(ts
        .into_iter()
        .map(|(a, t)| (a.to_string(), t.into()))
        .collect())
}

fn build(
    p: &Process,
    inputs: &str,
    fresh_pool: Option<usize>,
    max_weight: Option<u64>,
) -> PyResult<Lts> {
    let u = universe(&[&p.inner], inputs, fresh_pool)?;
    match max_weight {
        Some(w) => Lts::build_bounded(&p.inner, &u, w),
        None => Lts::build(&p.inner, &u),
    }
    .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (p, inputs="early", fresh_pool=None, max_weight=None))]
fn depth(
    p: &Process,
    inputs: &str,
    fresh_pool: Option<usize>,
    max_weight: Option<u64>,
) -> PyResult<u64> {
    build(p, inputs, fresh_pool, max_weight)?
        .depth()
        .map_err(err)
}

/// `None` when no deadlock is reachable.
#[pyfunction]
#[pyo3(signature = (p, inputs="early", fresh_pool=None, max_weight=None))]
fn norm(
    p: &Process,
    inputs: &str,
    fresh_pool: Option<usize>,
    max_weight: Option<u64>,
) -> PyResult<Option<u64>> {
    build(p, inputs, fresh_pool, max_weight)?
        .norm()
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (p, inputs="early", fresh_pool=None, max_weight=None))]
fn lts<'py>(
    py: Python<'py>,
    p: &Process,
    inputs: &str,
    fresh_pool: Option<usize>,
    max_weight: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    json(py, &build(p, inputs, fresh_pool, max_weight)?.to_json())
}

#[pyfunction]
#[pyo3(signature = (p, inputs="early", fresh_pool=None, max_weight=None))]
fn lts_dot(
    p: &Process,
    inputs: &str,
    fresh_pool: Option<usize>,
    max_weight: Option<u64>,
) -> PyResult<String> {
    Ok(build(p, inputs, fresh_pool, max_weight)?.to_dot())
}

#[pyfunction]
#[pyo3(signature = (p, q, mode="strong", inputs="early"))]
fn bisimilar(p: &Process, q: &Process, mode: &str, inputs: &str) -> PyResult<bool> {
    let u = picalc::equivalence::pair_universe(&p.inner, &q.inner, self::inputs(inputs)?);
    Ok(
        picalc::bisimilar_in(&p.inner, &q.inner, self::mode(mode)?, &u)
            .map_err(err)?
            .equivalent,
    )
}

/// Bisimilarity by the naive greatest-fixpoint computation.
#[pyfunction]
#[pyo3(signature = (p, q, mode="strong", inputs="early"))]
fn bisimilar_naive(p: &Process, q: &Process, mode: &str, inputs: &str) -> PyResult<bool> {
    let u = picalc::equivalence::pair_universe(&p.inner, &q.inner, self::inputs(inputs)?);
    picalc::equivalence::naive_bisim_oracle_in(
        &p.inner,
        &q.inner,
        self::mode(mode)?,
        &u,
        picalc::equivalence::ORACLE_PAIR_BOUND,
    )
    .map_err(err)
}

#[pyfunction]
fn expand_hnf(p: &Process) -> PyResult<Process> {
    Ok(picalc::expand_hnf(&p.inner)
        .map_err(err)?
        .to_process()
        .into())
}

/// A reachable stuttering step `(source, target)`, if any.
#[pyfunction]
#[pyo3(signature = (p, inputs="early"))]
fn has_stuttering(p: &Process, inputs: &str) -> PyResult<Option<(Process, Process)>> {
    let u = universe(&[&p.inner], inputs, None)?;
    Ok(picalc::has_stuttering(&p.inner, &u)
        .map_err(err)?
        .map(|(s, t)| (s.into(), t.into())))
}

/// Stutter-free form; raises `NormalizationIncompleteError` when the result
/// fails its check.
#[pyfunction]
#[pyo3(signature = (p, inputs="early"))]
fn stutter_free(p: &Process, inputs: &str) -> PyResult<Process> {
    let u = universe(&[&p.inner], inputs, None)?;
    Ok(picalc::stutter_free(&p.inner, &u)
        .map_err(err)?
        .process
        .into())
}

/// Normal form and its verification report, without raising on failure.
#[pyfunction]
#[pyo3(signature = (p, inputs="early"))]
fn normalize<'py>(
    py: Python<'py>,
    p: &Process,
    inputs: &str,
) -> PyResult<(Process, Bound<'py, PyAny>)> {
    let u = universe(&[&p.inner], inputs, None)?;
    let n = picalc::normalize_with_report(&p.inner, &u).map_err(err)?;
    let report = serde_json::to_value(&n.report).expect("report serializes");
    Ok((n.process.into(), json(py, &report)?))
}

#[pyfunction]
#[pyo3(signature = (p, mode="strong", inputs="early", names=None, max_size=8))]
fn decompose<'py>(
    py: Python<'py>,
    p: &Process,
    mode: &str,
    inputs: &str,
    names: Option<Vec<String>>,
    max_size: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let tu = term_universe(&p.inner, names, max_size);
    let d =
        dec::decomposition(&p.inner, self::mode(mode)?, self::inputs(inputs)?, &tu).map_err(err)?;
    json(py, &d.to_json())
}

/// `(q, r)` with `p` equivalent to `q | r`, or `None`.
#[pyfunction]
#[pyo3(signature = (p, mode="strong", inputs="early", names=None, max_size=8))]
fn find_split(
    p: &Process,
    mode: &str,
    inputs: &str,
    names: Option<Vec<String>>,
    max_size: usize,
) -> PyResult<Option<(Process, Process)>> {
    let tu = term_universe(&p.inner, names, max_size);
    Ok(
        match dec::find_split(&p.inner, self::mode(mode)?, self::inputs(inputs)?, &tu)
            .map_err(err)?
        {
            Split::Found(q, r) => Some((q.into(), r.into())),
            Split::NoSplitWithinUniverse => None,
        },
    )
}

#[pyfunction]
#[pyo3(signature = (p, q, mode="strong", inputs="early"))]
fn verify_upd<'py>(
    py: Python<'py>,
    p: &Process,
    q: &Process,
    mode: &str,
    inputs: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let both = picalc::Process::par(p.inner.clone(), q.inner.clone());
    let tu = term_universe(&both, None, p.inner.size().max(q.inner.size()));
    let v = dec::verify_upd(
        &p.inner,
        &q.inner,
        self::mode(mode)?,
        self::inputs(inputs)?,
        &tu,
    )
    .map_err(err)?;
    json(py, &v.to_json())
}

/// Exhaustive unique-decomposition check over all terms up to `max_size`.
#[pyfunction]
#[pyo3(signature = (names, max_size, mode="strong", inputs="early"))]
fn sweep_upd<'py>(
    py: Python<'py>,
    names: Vec<String>,
    max_size: usize,
    mode: &str,
    inputs: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let tu = TermUniverse::new(&names, max_size);
    let (mode, inputs) = (self::mode(mode)?, self::inputs(inputs)?);
    let r = py
        .detach(|| dec::sweep_upd(&tu, mode, inputs))
        .map_err(err)?;
    json(py, &serde_json::to_value(&r).expect("report serializes"))
}

#[pyfunction]
fn demo<'py>(py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyAny>> {
    let r = picalc::run_demo(name).map_err(err)?;
    let mut v = serde_json::to_value(&r).expect("report serializes");
    v["holds"] = r.holds().into();
    json(py, &v)
}

#[pyfunction]
fn demos() -> Vec<&'static str> {
    picalc::DEMOS.to_vec()
}

#[pyfunction]
#[pyo3(signature = (seed, count, max_depth=3, names=3))]
fn random_terms(seed: u64, count: usize, max_depth: u32, names: usize) -> Vec<Process> {
    let mut g = TermGenerator::new(
        seed,
        GenConfig {
            names,
            max_depth,
            ..GenConfig::default()
        },
    );
    (0..count).map(|_| g.process().into()).collect()
}

#[pymodule]
fn picalc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("PicalcError", py.get_type::<PicalcError>())?;
    m.add("ParseError", py.get_type::<ParseError>())?;
    m.add("InconclusiveError", py.get_type::<InconclusiveError>())?;
    m.add(
        "NormalizationIncompleteError",
        py.get_type::<NormalizationIncompleteError>(),
    )?;
    m.add_class::<Process>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(transitions, m)?)?;
    m.add_function(wrap_pyfunction!(depth, m)?)?;
    m.add_function(wrap_pyfunction!(norm, m)?)?;
    m.add_function(wrap_pyfunction!(lts, m)?)?;
    m.add_function(wrap_pyfunction!(lts_dot, m)?)?;
    m.add_function(wrap_pyfunction!(bisimilar, m)?)?;
    m.add_function(wrap_pyfunction!(bisimilar_naive, m)?)?;
    m.add_function(wrap_pyfunction!(expand_hnf, m)?)?;
    m.add_function(wrap_pyfunction!(has_stuttering, m)?)?;
    m.add_function(wrap_pyfunction!(stutter_free, m)?)?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(find_split, m)?)?;
    m.add_function(wrap_pyfunction!(verify_upd, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_upd, m)?)?;
    m.add_function(wrap_pyfunction!(demo, m)?)?;
    m.add_function(wrap_pyfunction!(demos, m)?)?;
    m.add_function(wrap_pyfunction!(random_terms, m)?)?;
    Ok(())
}
