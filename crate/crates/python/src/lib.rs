//! Python module `pgg`. Profiles cross the boundary as bit strings such as
//! `"0110"`, vertices are 0-based, and structured reports come back as plain
//! dicts and lists.

use num_rational::Ratio;
use pgg_core::congestion::{parse_threshold, verify_isomorphism, KRule};
use pgg_core::dynamics::{potential, run_dynamics, Schedule};
use pgg_core::gadgets::{build_gadget, verify_contract, Gadget, GadgetContract, GadgetKind, VerifyMode};
use pgg_core::generate::{generate_instance, GraphModel, PatternSpec};
use pgg_core::reduction::{
    assignment_to_profile, compile_reduction, parse_1in3, profile_to_assignment, ReductionCertificate,
    ReductionOptions,
};
use pgg_core::solver::{decide_pne, export_cnf, Decision, DEFAULT_BUDGET};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(pgg, CapacityError, PyException, "A size or search limit was exceeded.");

fn err(e: pgg_core::Error) -> PyErr {
    match e {
        pgg_core::Error::Capacity(_) => CapacityError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn profile(text: &str) -> PyResult<pgg_core::Profile> {
    text.parse().map_err(err)
}

/// Converts through JSON so reports keep the field names used by the CLI.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// A best-response pattern such as `"110*"` or `"1(01)*"`.
#[pyclass(name = "Pattern", module = "pgg", frozen, eq, hash)]
#[derive(PartialEq, Eq, Hash)]
struct PyPattern(pgg_core::Pattern);

#[pymethods]
impl PyPattern {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        text.parse().map(PyPattern).map_err(err)
    }

    /// `1^k 0*`
    #[staticmethod]
    fn decreasing(k: u64) -> Self {
        PyPattern(pgg_core::Pattern::decreasing(k))
    }

    /// `1 0^k 1 0*`
    #[staticmethod]
    fn picky(k: u64) -> Self {
        PyPattern(pgg_core::Pattern::picky(k))
    }

    fn eval(&self, degree: u64) -> bool {
        self.0.eval(degree)
    }

    /// List of `(class, verdict)` pairs; empty when the pattern is unclassified.
    fn classify(&self) -> Vec<(&'static str, &'static str)> {
        self.0.classify().into_iter().map(|c| (c.class.notation(), c.verdict.as_str())).collect()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Pattern({:?})", self.0.to_string())
    }
}

/// A game on vertices `0..n` with one pattern per vertex.
#[pyclass(name = "Game", module = "pgg", frozen, eq)]
#[derive(PartialEq, Eq)]
struct PyGame(pgg_core::Game);

#[pymethods]
impl PyGame {
    /// `patterns` is one pattern string for every vertex or a list with one
    /// per vertex. Edges are `(u, v)` or `(u, v, weight)` tuples.
    #[new]
    #[pyo3(signature = (n, patterns, edges = Vec::new()))]
    fn new(n: usize, patterns: &Bound<'_, PyAny>, edges: Vec<Bound<'_, PyAny>>) -> PyResult<Self> {
        let patterns: Vec<pgg_core::Pattern> = match patterns.extract::<String>() {
            Ok(p) => vec![p.parse().map_err(err)?; n],
            Err(_) => patterns
                .extract::<Vec<String>>()?
                .iter()
                .map(|p| p.parse().map_err(err))
                .collect::<PyResult<_>>()?,
        };
        if patterns.len() != n {
            return Err(PyValueError::new_err(format!("expected {n} patterns, got {}", patterns.len())));
        }
        let edges = edges
            .iter()
            .map(|e| match e.extract::<(usize, usize, u64)>() {
                Ok((u, v, w)) => Ok(pgg_core::Edge::weighted(u, v, w)),
                Err(_) => e.extract::<(usize, usize)>().map(|(u, v)| pgg_core::Edge::new(u, v)),
            })
            .collect::<PyResult<_>>()?;
        pgg_core::Game::new(patterns, edges).map(PyGame).map_err(err)
    }

    /// Parses the `pgg <n>` text format.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        pgg_core::parse_game(text).map(PyGame).map_err(err)
    }

    fn to_text(&self) -> String {
        pgg_core::write_game(&self.0)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize, u64)> {
        self.0.edges().iter().map(|e| (e.u, e.v, e.weight)).collect()
    }

    #[getter]
    fn patterns(&self) -> Vec<String> {
        self.0.patterns().iter().map(ToString::to_string).collect()
    }

    fn best_response(&self, profile_bits: &str, v: usize) -> PyResult<bool> {
        let s = profile(profile_bits)?;
        if s.len() != self.0.n() || v >= self.0.n() {
            return Err(PyValueError::new_err("profile length or vertex out of range"));
        }
        Ok(self.0.best_response(&s, v).response)
    }

    /// `(is_pne, violators)`
    fn is_pne(&self, profile_bits: &str) -> PyResult<(bool, Vec<usize>)> {
        let r = self.0.is_pne(&profile(profile_bits)?).map_err(err)?;
        Ok((r.is_pne, r.violators))
    }

    /// Every equilibrium in lexicographic order; at most 30 vertices.
    #[pyo3(signature = (max_count = None))]
    fn enumerate_pne(&self, py: Python<'_>, max_count: Option<usize>) -> PyResult<Vec<String>> {
        let found = py.detach(|| self.0.enumerate_pne(max_count)).map_err(err)?;
        Ok(found.iter().map(ToString::to_string).collect())
    }

    /// `(exists, profile, nodes)`; raises `CapacityError` when the budget runs out.
    #[pyo3(signature = (budget = DEFAULT_BUDGET))]
    fn decide_pne(&self, py: Python<'_>, budget: u64) -> PyResult<(bool, Option<String>, u64)> {
        let outcome = py.detach(|| decide_pne(&self.0, budget));
        match outcome.decision {
            Decision::Exists(s) => Ok((true, Some(s.to_string()), outcome.nodes)),
            Decision::NotExists => Ok((false, None, outcome.nodes)),
            Decision::BudgetExceeded => Err(CapacityError::new_err(format!("budget of {budget} nodes exhausted"))),
        }
    }

    /// DIMACS text whose vertex variables are `1..=n`.
    fn export_cnf(&self) -> String {
        export_cnf(&self.0).to_dimacs()
    }

    /// Doubled potential; decreasing patterns only.
    fn potential(&self, profile_bits: &str) -> PyResult<i128> {
        potential(&self.0, &profile(profile_bits)?).map_err(err)
    }

    /// `schedule` is `"round-robin"`, `"first"` or `"random"`.
    #[pyo3(signature = (start, schedule = "round-robin", seed = 0, max_steps = 1_000_000))]
    fn run_dynamics<'py>(
        &self,
        py: Python<'py>,
        start: &str,
        schedule: &str,
        seed: u64,
        max_steps: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let schedule = match schedule {
            "round-robin" => Schedule::round_robin(),
            "first" => Schedule::first_violator(),
            "random" => Schedule::random(seed),
            other => return Err(PyValueError::new_err(format!("unknown schedule {other:?}"))),
        };
        let trace = run_dynamics(&self.0, &profile(start)?, schedule, max_steps).map_err(err)?;
        to_py(py, &trace)
    }

    #[pyo3(signature = (samples = 1000, seed = 0, exhaustive_n = 16))]
    fn verify_isomorphism<'py>(
        &self,
        py: Python<'py>,
        samples: u64,
        seed: u64,
        exhaustive_n: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let report = py.detach(|| verify_isomorphism(&self.0, samples, seed, exhaustive_n)).map_err(err)?;
        to_py(py, &report)
    }

    fn __repr__(&self) -> String {
        format!("Game(n={}, edges={})", self.0.n(), self.0.edges().len())
    }
}

#[pyclass(name = "Gadget", module = "pgg", frozen)]
struct PyGadget(Gadget);

#[pymethods]
impl PyGadget {
    #[new]
    #[pyo3(signature = (kind, k, arity = None))]
    fn new(kind: &str, k: u64, arity: Option<usize>) -> PyResult<Self> {
        let kind: GadgetKind = kind.parse().map_err(err)?;
        build_gadget(kind, k, arity).map(PyGadget).map_err(err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind().name()
    }

    #[getter]
    fn k(&self) -> u64 {
        self.0.k()
    }

    #[getter]
    fn arity(&self) -> usize {
        self.0.arity()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn membrane(&self) -> Vec<usize> {
        self.0.membrane()
    }

    fn to_game(&self) -> PyGame {
        PyGame(self.0.to_game())
    }

    /// Game text with a comment per vertex naming its role.
    fn emit(&self) -> String {
        self.0.emit()
    }

    /// Contract report as a dict; `mode` is `"exact"` or `"compositional"`.
    #[pyo3(signature = (mode = "exact"))]
    fn verify<'py>(&self, py: Python<'py>, mode: &str) -> PyResult<Bound<'py, PyAny>> {
        let mode: VerifyMode = mode.parse().map_err(err)?;
        let contract = GadgetContract::standard(&self.0);
        let report = py.detach(|| verify_contract(&self.0, &contract, mode)).map_err(err)?;
        to_py(py, &report)
    }
}

/// `(class, verdict)` pairs for a pattern string.
#[pyfunction]
fn classify(pattern: &str) -> PyResult<Vec<(&'static str, &'static str)>> {
    PyPattern::new(pattern).map(|p| p.classify())
}

/// Compiles a POSITIVE-1IN3-SAT instance. Returns the game and the
/// certificate as a JSON string.
#[pyfunction]
#[pyo3(signature = (sat_text, k, equiv_chain = false))]
fn reduce(sat_text: &str, k: u64, equiv_chain: bool) -> PyResult<(PyGame, String)> {
    let inst = parse_1in3(sat_text).map_err(err)?;
    let (g, cert) = compile_reduction(&inst, k, ReductionOptions { equiv_chain }).map_err(err)?;
    let cert = serde_json::to_string(&cert).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((PyGame(g), cert))
}

fn certificate(cert_json: &str) -> PyResult<ReductionCertificate> {
    serde_json::from_str(cert_json).map_err(|e| PyValueError::new_err(format!("invalid certificate: {e}")))
}

/// Lifts a satisfying assignment (bit string, one bit per variable) to an
/// equilibrium of the compiled game.
#[pyfunction]
fn assignment_to_pne(cert_json: &str, assignment: &str) -> PyResult<String> {
    let cert = certificate(cert_json)?;
    let inst = cert.instance().map_err(err)?;
    let sigma = profile(assignment)?;
    let w = assignment_to_profile(&inst, &cert, sigma.bits()).map_err(err)?;
    Ok(w.profile.to_string())
}

/// Reads the assignment back off an equilibrium of the compiled game.
#[pyfunction]
fn pne_to_assignment(cert_json: &str, profile_bits: &str) -> PyResult<String> {
    let cert = certificate(cert_json)?;
    let inst = cert.instance().map_err(err)?;
    let sigma = profile_to_assignment(&inst, &cert, &profile(profile_bits)?).map_err(err)?;
    Ok(bits(&sigma))
}

/// Threshold game text to a weighted game; `rule` is `"floor-plus-one"` or `"floor"`.
#[pyfunction]
#[pyo3(signature = (text, rule = "floor-plus-one"))]
fn threshold_to_pgg(text: &str, rule: &str) -> PyResult<PyGame> {
    let rule = match rule {
        "floor-plus-one" => KRule::FloorPlusOne,
        "floor" => KRule::Floor,
        other => return Err(PyValueError::new_err(format!("unknown rule {other:?}"))),
    };
    let t = parse_threshold(text).map_err(err)?;
    t.to_pgg(rule).map(|(g, _)| PyGame(g)).map_err(err)
}

/// Seeded random game. `model` is `"gnp"` (uses `p`, e.g. `"1/3"`) or
/// `"complete-weighted"` (uses `wmax`). Several patterns are drawn per vertex.
#[pyfunction]
#[pyo3(signature = (model, n, p = "1/2", wmax = 1, patterns = vec!["10*".to_string()], seed = 0))]
fn generate(model: &str, n: usize, p: &str, wmax: u64, patterns: Vec<String>, seed: u64) -> PyResult<PyGame> {
    let model = match model {
        "gnp" => {
            let p: Ratio<u64> = p.parse().map_err(|_| PyValueError::new_err(format!("invalid probability {p:?}")))?;
            GraphModel::Gnp { n, p }
        }
        "complete-weighted" => GraphModel::CompleteWeighted { n, wmax },
        other => return Err(PyValueError::new_err(format!("unknown model {other:?}"))),
    };
    let patterns: Vec<pgg_core::Pattern> = patterns.iter().map(|p| p.parse().map_err(err)).collect::<PyResult<_>>()?;
    let spec = match patterns.as_slice() {
        [p] => PatternSpec::Homogeneous(p.clone()),
        _ => PatternSpec::RandomFrom(patterns),
    };
    generate_instance(&model, &spec, seed).map(PyGame).map_err(err)
}

#[pymodule]
fn pgg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CapacityError", m.py().get_type::<CapacityError>())?;
    m.add_class::<PyPattern>()?;
    m.add_class::<PyGame>()?;
    m.add_class::<PyGadget>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(assignment_to_pne, m)?)?;
    m.add_function(wrap_pyfunction!(pne_to_assignment, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_to_pgg, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    Ok(())
}
