//! Python bindings for `selstab-core`.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict, PyList};

use selstab_core::bitstream::{self, BitFormat, SourceSpec};
use selstab_core::complexity::{self, Estimator};
use selstab_core::experiment::{self, ExperimentConfig, ExperimentRecord};
use selstab_core::metrics;
use selstab_core::rulevm;
use selstab_core::Error;

fn to_py(err: Error) -> PyErr {
    if err.is_io() {
        PyIOError::new_err(err.to_string())
    } else {
        PyValueError::new_err(err.to_string())
    }
}

fn estimator(name: &str) -> PyResult<Estimator> {
    name.parse().map_err(to_py)
}

/// A finite binary sequence. Indexing is 1-based, as in `x_1 .. x_n`.
#[pyclass(name = "BitSequence", frozen, eq, from_py_object, module = "selstab")]
#[derive(Clone, PartialEq)]
struct PyBitSequence {
    inner: bitstream::BitSequence,
}

#[pymethods]
impl PyBitSequence {
    #[new]
    #[pyo3(signature = (bits = ""))]
    fn new(bits: &str) -> PyResult<Self> {
        Ok(Self {
            inner: bits.parse().map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn uniform(seed: u64, n: usize) -> PyResult<Self> {
        Self::generated(SourceSpec::Uniform { seed }, n)
    }

    /// `p` is exact: `"1/4"` or `"0.25"`.
    #[staticmethod]
    fn bernoulli(seed: u64, p: &str, n: usize) -> PyResult<Self> {
        let p = bitstream::parse_probability(p).map_err(to_py)?;
        Self::generated(SourceSpec::Bernoulli { seed, p }, n)
    }

    #[staticmethod]
    fn periodic(pattern: &str, n: usize) -> PyResult<Self> {
        let pattern = pattern.parse().map_err(to_py)?;
        Self::generated(SourceSpec::Periodic { pattern }, n)
    }

    /// Reads an ascii01 or packed file (detected by magic).
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        let bytes = std::fs::read(&path)
            .map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))?;
        Ok(Self {
            inner: BitFormat::detect(&bytes).decode(&bytes).map_err(to_py)?,
        })
    }

    #[pyo3(signature = (path, format = "packed"))]
    fn write(&self, path: PathBuf, format: &str) -> PyResult<()> {
        let format: BitFormat = format.parse().map_err(to_py)?;
        bitstream::write_bits(&self.inner, path, format).map_err(to_py)
    }

    fn to_packed<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &bitstream::encode_packed(&self.inner))
    }

    /// Bit `x_index`, 1-based.
    fn get(&self, index: usize) -> PyResult<bool> {
        self.inner.get(index).ok_or_else(|| {
            PyIndexError::new_err(format!("index {index} outside 1..={}", self.inner.len()))
        })
    }

    fn count_ones(&self) -> u64 {
        self.inner.count_ones()
    }

    /// Exact frequency of ones as `(numerator, denominator)`.
    fn frequency(&self) -> PyResult<(u64, u64)> {
        let f = bitstream::frequency(&self.inner).map_err(to_py)?;
        Ok((*f.numer(), *f.denom()))
    }

    fn prefix(&self, n: usize) -> Self {
        Self {
            inner: self.inner.prefix(n),
        }
    }

    fn to_list(&self) -> Vec<bool> {
        self.inner.to_bools()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

impl PyBitSequence {
    fn generated(spec: SourceSpec, n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: bitstream::generate(&spec, n).map_err(to_py)?,
        })
    }
}

#[pyclass(name = "SelectionResult", frozen, module = "selstab")]
struct PySelectionResult {
    inner: rulevm::SelectionResult,
}

#[pymethods]
impl PySelectionResult {
    #[getter]
    fn selected(&self) -> PyBitSequence {
        PyBitSequence {
            inner: self.inner.selected.clone(),
        }
    }

    #[getter]
    fn selected_indices(&self) -> Vec<u32> {
        self.inner.selected_indices.clone()
    }

    #[getter]
    fn examined_count(&self) -> u64 {
        self.inner.examined_count
    }

    #[getter]
    fn halt_reason(&self) -> &'static str {
        self.inner.halt_reason.as_str()
    }

    #[getter]
    fn sub_len(&self) -> usize {
        self.inner.sub_len()
    }

    fn __repr__(&self) -> String {
        format!(
            "SelectionResult(sub_len={}, examined={}, halt_reason={})",
            self.inner.sub_len(),
            self.inner.examined_count,
            self.inner.halt_reason
        )
    }
}

#[pyclass(name = "SelectionRule", frozen, eq, from_py_object, module = "selstab")]
#[derive(Clone, PartialEq)]
struct PySelectionRule {
    inner: rulevm::SelectionRule,
}

#[pymethods]
impl PySelectionRule {
    /// Parses the rule text format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: rulevm::parse_rule(text).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        Ok(Self {
            inner: rulevm::deserialize_rule(data).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn identity() -> Self {
        Self {
            inner: rulevm::identity_rule(),
        }
    }

    #[staticmethod]
    fn crystal() -> Self {
        Self {
            inner: rulevm::crystal_rule(),
        }
    }

    #[staticmethod]
    fn every_k(k: u32) -> PyResult<Self> {
        Ok(Self {
            inner: rulevm::every_k_rule(k).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn constant_skip(k: u32) -> PyResult<Self> {
        Ok(Self {
            inner: rulevm::constant_skip_rule(k).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn transient_response(dead_time: u32) -> PyResult<Self> {
        Ok(Self {
            inner: rulevm::transient_response_rule(dead_time).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn random(seed: u64, num_states: usize) -> PyResult<Self> {
        Ok(Self {
            inner: rulevm::random_rule(seed, num_states).map_err(to_py)?,
        })
    }

    fn to_text(&self) -> String {
        rulevm::serialize_text(&self.inner)
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &rulevm::serialize_rule(&self.inner))
    }

    /// Bit length of the canonical encoding.
    #[getter]
    fn complexity(&self) -> u64 {
        rulevm::rule_complexity(&self.inner)
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    #[getter]
    fn name(&self) -> Option<String> {
        self.inner.name().map(str::to_owned)
    }

    fn run(&self, x: &PyBitSequence) -> PySelectionResult {
        PySelectionResult {
            inner: rulevm::run_rule(&self.inner, &x.inner),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "SelectionRule(name={:?}, states={})",
            self.inner.name().unwrap_or(""),
            self.inner.num_states()
        )
    }
}

#[pyclass(name = "ComplexityEstimate", frozen, get_all, module = "selstab")]
struct PyComplexityEstimate {
    estimator: String,
    k_hat: f64,
    deficiency: f64,
    n: usize,
}

impl From<complexity::ComplexityEstimate> for PyComplexityEstimate {
    fn from(e: complexity::ComplexityEstimate) -> Self {
        Self {
            estimator: e.estimator.to_string(),
            k_hat: e.k_hat,
            deficiency: e.deficiency,
            n: e.n,
        }
    }
}

#[pymethods]
impl PyComplexityEstimate {
    fn __repr__(&self) -> String {
        format!(
            "ComplexityEstimate(estimator={}, k_hat={}, deficiency={}, n={})",
            self.estimator, self.k_hat, self.deficiency, self.n
        )
    }
}

#[pyfunction]
fn lz78_estimate(x: &PyBitSequence) -> PyResult<PyComplexityEstimate> {
    Ok(complexity::lz78_estimate(&x.inner).map_err(to_py)?.into())
}

#[pyfunction]
#[pyo3(signature = (x, block = 8))]
fn block_entropy_estimate(x: &PyBitSequence, block: u32) -> PyResult<PyComplexityEstimate> {
    Ok(complexity::block_entropy_estimate(&x.inner, block)
        .map_err(to_py)?
        .into())
}

#[pyfunction]
#[pyo3(signature = (x, estimator = "lz78"))]
fn deficiency(x: &PyBitSequence, estimator: &str) -> PyResult<f64> {
    complexity::deficiency(&x.inner, self::estimator(estimator)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (x, stride, estimator = "lz78"))]
fn ml_prefix_curve(
    x: &PyBitSequence,
    stride: usize,
    estimator: &str,
) -> PyResult<Vec<(usize, f64)>> {
    complexity::ml_prefix_curve(&x.inner, self::estimator(estimator)?, stride).map_err(to_py)
}

#[pyfunction]
fn bias(sub: &PyBitSequence) -> PyResult<f64> {
    metrics::bias(&sub.inner).map_err(to_py)
}

#[pyfunction]
fn eq2_bound(delta_hat: f64, k_rule: f64, sub_len: usize, c: f64) -> PyResult<f64> {
    metrics::eq2_bound(delta_hat, k_rule, sub_len, c).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (x, rule, estimator = "lz78", c = metrics::CALIBRATED_C))]
fn bound_report<'py>(
    py: Python<'py>,
    x: &PyBitSequence,
    rule: &PySelectionRule,
    estimator: &str,
    c: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = metrics::bound_report(&x.inner, &rule.inner, self::estimator(estimator)?, c)
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("bias", r.bias)?;
    d.set_item("bound", r.bound)?;
    d.set_item("c_used", r.c_used)?;
    d.set_item("delta_hat", r.delta_hat)?;
    d.set_item("k_rule", r.k_rule)?;
    d.set_item("sub_len", r.sub_len)?;
    d.set_item("satisfied", r.satisfied)?;
    Ok(d)
}

fn record_dict<'py>(py: Python<'py>, r: &ExperimentRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("rule_id", &r.rule_id)?;
    d.set_item("k_rule_bits", r.k_rule_bits)?;
    d.set_item("seed", r.seed)?;
    d.set_item("sub_len", r.sub_len)?;
    d.set_item("bias", r.bias)?;
    d.set_item("delta_hat_bits", r.delta_hat_bits)?;
    d.set_item("bound", r.bound)?;
    d.set_item("satisfied", r.satisfied)?;
    d.set_item("halt_reason", r.halt_reason.as_str())?;
    Ok(d)
}

/// Runs an experiment config file and returns its records as dicts.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config: PathBuf) -> PyResult<Bound<'py, PyList>> {
    let cfg = ExperimentConfig::from_file(config).map_err(to_py)?;
    let records = py
        .detach(|| experiment::run_experiment(&cfg))
        .map_err(to_py)?;
    let list = PyList::empty(py);
    for r in &records {
        list.append(record_dict(py, r)?)?;
    }
    Ok(list)
}

#[pyfunction]
fn calibrate_c(py: Python<'_>, config: PathBuf) -> PyResult<f64> {
    let cfg = ExperimentConfig::from_file(config).map_err(to_py)?;
    py.detach(|| experiment::calibrate_c(&cfg)).map_err(to_py)
}

/// Crystal rule versus the fixed random 16-state ensemble; returns the
/// summary as a JSON string.
#[pyfunction]
fn crystal_stability_check(py: Python<'_>, n: usize, replicates: u32) -> PyResult<String> {
    let summary = py
        .detach(|| experiment::crystal_stability_check(n, replicates))
        .map_err(to_py)?;
    serde_json::to_string(&summary).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn selstab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBitSequence>()?;
    m.add_class::<PySelectionRule>()?;
    m.add_class::<PySelectionResult>()?;
    m.add_class::<PyComplexityEstimate>()?;
    m.add_function(wrap_pyfunction!(lz78_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(block_entropy_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(deficiency, m)?)?;
    m.add_function(wrap_pyfunction!(ml_prefix_curve, m)?)?;
    m.add_function(wrap_pyfunction!(bias, m)?)?;
    m.add_function(wrap_pyfunction!(eq2_bound, m)?)?;
    m.add_function(wrap_pyfunction!(bound_report, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_c, m)?)?;
    m.add_function(wrap_pyfunction!(crystal_stability_check, m)?)?;
    m.add("CALIBRATED_C", metrics::CALIBRATED_C)?;
    Ok(())
}
