//! Python bindings for the `joulebits` core crate.
//!
//! Structured results come back as plain dicts and lists built from the
//! same JSON the command-line tool writes.

use joulebits as core;
use core::channel::{self, CostConvention};
use core::epiplexity::{self, EpisodeSpec, QuantizerSet};
use core::mdlproxy::{self, ModelBudget, TokenStream};
use core::probcore::{self, FiniteDistribution, JointTable};
use core::report::{self, ReportingChecklist};
use core::thermo;
use core::thermosim::{self, BipartiteProcess, Boundary, RegisterProtocol};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::IterationLimit { .. } | core::Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    PyModule::import(py, "json")?.call_method1("loads", (text,))
}

fn convention(name: &str) -> PyResult<CostConvention> {
    name.parse().map_err(err)
}

fn distribution(probs: Vec<f64>) -> PyResult<FiniteDistribution> {
    FiniteDistribution::from_probs(probs).map_err(err)
}

/// Row-stochastic channel p(o|a).
#[pyclass(name = "DiscreteChannel", frozen)]
struct PyDiscreteChannel(channel::DiscreteChannel);

#[pymethods]
impl PyDiscreteChannel {
    #[new]
    fn new(matrix: Vec<Vec<f64>>) -> PyResult<Self> {
        channel::DiscreteChannel::from_matrix(matrix).map(Self).map_err(err)
    }

    #[getter]
    fn matrix(&self) -> Vec<Vec<f64>> {
        self.0.matrix().to_vec()
    }

    fn mutual_information(&self, input: Vec<f64>) -> PyResult<f64> {
        distribution(input.clone())?;
        if input.len() != self.0.num_inputs() {
            return Err(PyValueError::new_err("input length does not match the channel"));
        }
        Ok(self.0.mutual_information(&input))
    }

    /// Blahut–Arimoto capacity in bits, returned as a dict.
    #[pyo3(signature = (tol = 1e-10, max_iter = 100_000))]
    fn capacity<'py>(&self, py: Python<'py>, tol: f64, max_iter: usize) -> PyResult<Bound<'py, PyAny>> {
        let r = channel::ba_capacity(&self.0, tol, max_iter).map_err(err)?;
        to_py(py, &r)
    }

    fn __repr__(&self) -> String {
        format!("DiscreteChannel({} inputs, {} outputs)", self.0.num_inputs(), self.0.num_outputs())
    }
}

/// Channel with a per-input energy cost in joules.
#[pyclass(name = "CostedChannel", frozen)]
struct PyCostedChannel(channel::CostedChannel);

#[pymethods]
impl PyCostedChannel {
    #[new]
    #[pyo3(signature = (matrix, cost, null_input = None, baseline_energy = 0.0, convention = "total"))]
    fn new(
        matrix: Vec<Vec<f64>>,
        cost: Vec<f64>,
        null_input: Option<usize>,
        baseline_energy: f64,
        convention: &str,
    ) -> PyResult<Self> {
        let ch = channel::DiscreteChannel::from_matrix(matrix).map_err(err)?;
        channel::CostedChannel::new(ch, cost, null_input, baseline_energy, self::convention(convention)?)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(Self)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[pyo3(signature = (budget, tol = 1e-10))]
    fn constrained_capacity<'py>(&self, py: Python<'py>, budget: f64, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &channel::cost_constrained_capacity(&self.0, budget, tol).map_err(err)?)
    }

    #[pyo3(signature = (convention = "total"))]
    fn capacity_per_unit_cost<'py>(&self, py: Python<'py>, convention: &str) -> PyResult<Bound<'py, PyAny>> {
        let c = self::convention(convention)?;
        to_py(py, &channel::capacity_per_unit_cost(&self.0, c).map_err(err)?)
    }

    #[pyo3(signature = (budgets, tol = 1e-10))]
    fn empowerment_curve<'py>(&self, py: Python<'py>, budgets: Vec<f64>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &channel::empowerment_curve(&self.0, &budgets, tol).map_err(err)?)
    }
}

/// Shannon entropy in bits.
#[pyfunction]
fn entropy(probs: Vec<f64>) -> PyResult<f64> {
    Ok(probcore::entropy(&distribution(probs)?))
}

/// D(p‖q) in bits; infinite when p is not absolutely continuous wrt q.
#[pyfunction]
fn kl_divergence(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    probcore::kl_divergence(&distribution(p)?, &distribution(q)?).map_err(err)
}

/// I(A;B) in bits for a joint table given as JSON.
#[pyfunction]
#[pyo3(signature = (table_json, a, b, given = None))]
fn mutual_information(table_json: &str, a: &str, b: &str, given: Option<&str>) -> PyResult<f64> {
    let t = JointTable::from_json(table_json).map_err(err)?;
    match given {
        None => probcore::mutual_information(&t, a, b),
        Some(c) => probcore::conditional_mi(&t, a, b, c),
    }
    .map_err(err)
}

/// Acquired epiplexity summary for an episode spec given as JSON.
#[pyfunction]
#[pyo3(signature = (spec_json, quantizers_json = None))]
fn epiplexity_summary<'py>(py: Python<'py>, spec_json: &str, quantizers_json: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let spec = EpisodeSpec::from_json(spec_json).map_err(err)?;
    let q: QuantizerSet = match quantizers_json {
        Some(s) => serde_json::from_str(s).map_err(|e| PyValueError::new_err(e.to_string()))?,
        None => QuantizerSet::default(),
    };
    to_py(py, &epiplexity::summarize(&spec, &q).map_err(err)?)
}

/// Two-part MDL over Markov orders 0..=max_order.
#[pyfunction]
#[pyo3(signature = (tokens, alphabet_size, max_order = 2))]
fn two_part_mdl<'py>(py: Python<'py>, tokens: Vec<usize>, alphabet_size: usize, max_order: usize) -> PyResult<Bound<'py, PyAny>> {
    let alphabet = (0..alphabet_size).map(|i| i.to_string()).collect();
    let s = TokenStream::new(alphabet, tokens).map_err(err)?;
    to_py(py, &mdlproxy::two_part_mdl(&s, &ModelBudget::new(max_order)).map_err(err)?)
}

/// Sequential KT code length in bits.
#[pyfunction]
#[pyo3(signature = (tokens, alphabet_size, order = 0))]
fn prequential_code_length(tokens: Vec<usize>, alphabet_size: usize, order: usize) -> PyResult<f64> {
    let alphabet = (0..alphabet_size).map(|i| i.to_string()).collect();
    let s = TokenStream::new(alphabet, tokens).map_err(err)?;
    mdlproxy::prequential_code_length(&s, order).map_err(err)
}

/// Fits ℓ(C) = ℓ∞ + a·C^(−α) to (compute, loss) pairs.
#[pyfunction]
fn fit_scaling<'py>(py: Python<'py>, points: Vec<(f64, f64)>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &mdlproxy::fit_scaling(&points).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (temperature = thermo::ROOM_TEMPERATURE))]
fn landauer_scale<'py>(py: Python<'py>, temperature: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &thermo::landauer_scale(temperature).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (delta_i, ds_sys, q_diss, temperature = thermo::ROOM_TEMPERATURE))]
fn corollary_check<'py>(py: Python<'py>, delta_i: f64, ds_sys: f64, q_diss: f64, temperature: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &thermo::corollary_check(delta_i, ds_sys, q_diss, temperature).map_err(err)?)
}

/// Relaxes the symmetric two-state learner and checks the learning inequality.
#[pyfunction]
#[pyo3(signature = (gap_kt, rate, duration, temperature = thermo::ROOM_TEMPERATURE))]
fn two_state_episode<'py>(py: Python<'py>, gap_kt: f64, rate: f64, duration: f64, temperature: f64) -> PyResult<Bound<'py, PyAny>> {
    let p = BipartiteProcess::two_state(gap_kt, rate, temperature).map_err(err)?;
    let trace = thermosim::propagate_episode(&p, duration).map_err(err)?;
    let check = thermosim::verify_learning_inequality(&trace, temperature).map_err(err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("trace", to_py(py, &trace)?)?;
    d.set_item("check", to_py(py, &check)?)?;
    Ok(d.into_any())
}

/// XOR copy of a uniform or given n-bit word into a register.
#[pyfunction]
#[pyo3(signature = (n, boundary = "open", z_dist = None, temperature = thermo::ROOM_TEMPERATURE))]
fn register_protocol<'py>(
    py: Python<'py>,
    n: usize,
    boundary: &str,
    z_dist: Option<Vec<f64>>,
    temperature: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let b: Boundary = boundary.parse().map_err(err)?;
    let z = match z_dist {
        Some(z) => z,
        None if n <= thermosim::MAX_REGISTER_BITS => vec![1.0 / (1u64 << n) as f64; 1 << n],
        None => return Err(PyValueError::new_err(format!("n = {n} exceeds {} bits", thermosim::MAX_REGISTER_BITS))),
    };
    let r = RegisterProtocol::new(n, z, b, temperature).map_err(err)?;
    to_py(py, &thermosim::run_register_protocol(&r).map_err(err)?)
}

/// Missing or empty checklist sections, as "section: reason" strings.
#[pyfunction]
fn validate_checklist(checklist_json: &str) -> PyResult<Vec<String>> {
    let c: ReportingChecklist =
        serde_json::from_str(checklist_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(report::validate(&c).iter().map(ToString::to_string).collect())
}

#[pymodule]
#[pyo3(name = "joulebits")]
fn joulebits_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDiscreteChannel>()?;
    m.add_class::<PyCostedChannel>()?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(kl_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(epiplexity_summary, m)?)?;
    m.add_function(wrap_pyfunction!(two_part_mdl, m)?)?;
    m.add_function(wrap_pyfunction!(prequential_code_length, m)?)?;
    m.add_function(wrap_pyfunction!(fit_scaling, m)?)?;
    m.add_function(wrap_pyfunction!(landauer_scale, m)?)?;
    m.add_function(wrap_pyfunction!(corollary_check, m)?)?;
    m.add_function(wrap_pyfunction!(two_state_episode, m)?)?;
    m.add_function(wrap_pyfunction!(register_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(validate_checklist, m)?)?;
    m.add("K_B", thermo::K_B)?;
    Ok(())
}
