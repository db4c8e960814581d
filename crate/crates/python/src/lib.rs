//! Python bindings for `ndtv`.
//!
//! Signals cross the boundary as flat lists of complex numbers in storage
//! order (last axis fastest). Reports, results and certificates come back
//! as plain dictionaries.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use serde::Serialize;

use ndtv::experiment::{build_operator, measure as measure_signal, Ensemble, Measurements};
use ndtv::gradient::{gradient as gradient_field, tv_seminorm, TvVariant};
use ndtv::haar::{haar_forward, haar_inverse, HaarCoefficients};
use ndtv::ndcs::{decode_signal, encode_signal};
use ndtv::operators::{
    rip_constant_exhaustive, rip_constant_montecarlo, rip_constant_spectral_bound, LinearMeasurementOp,
    OperatorDescriptor, DEFAULT_SUBMATRIX_BUDGET,
};
use ndtv::phantom::{PhantomKind, PhantomSpec};
use ndtv::solver::{solve_l1_haar, solve_tv, SolveOptions, SolveVariant};
use ndtv::tensor::{NdSignal, Shape};
use ndtv::verify;

fn py_err(e: ndtv::Error) -> PyErr {
    match e {
        ndtv::Error::Io(_) | ndtv::Error::Json(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn variant(name: &str) -> PyResult<SolveVariant> {
    name.parse().map_err(py_err)
}

fn tv_variant(name: &str) -> PyResult<TvVariant> {
    variant(name)?.tv().ok_or_else(|| PyValueError::new_err(format!("{name:?} is not a TV variant")))
}

/// A complex signal on the grid `{0, …, N-1}^d`.
#[pyclass(name = "Signal", module = "ndtv_py", from_py_object)]
#[derive(Clone)]
struct PySignal {
    inner: NdSignal,
}

#[pymethods]
impl PySignal {
    #[new]
    fn new(d: usize, n: usize, values: Vec<Complex64>) -> PyResult<Self> {
        Ok(PySignal { inner: NdSignal::from_vec(d, n, values).map_err(py_err)? })
    }

    /// Deterministic phantom: `gradient-sparse` (exactly `sparsity` nonzero
    /// gradient blocks), `cubes` or `step-edge`.
    #[staticmethod]
    #[pyo3(signature = (kind, d, n, seed=0, sparsity=5, count=3))]
    fn phantom(kind: &str, d: usize, n: usize, seed: u64, sparsity: usize, count: usize) -> PyResult<Self> {
        let kind = match kind {
            "gradient-sparse" => PhantomKind::GradientSparseRandom { s: sparsity },
            "cubes" => PhantomKind::PiecewiseConstantCubes { count },
            "step-edge" => PhantomKind::StepEdge,
            other => return Err(PyValueError::new_err(format!("unknown phantom kind {other:?}"))),
        };
        Ok(PySignal { inner: PhantomSpec::new(kind, d, n, seed).generate().map_err(py_err)? })
    }

    /// Decodes an NDCS signal container.
    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        Ok(PySignal { inner: decode_signal(data).map_err(py_err)? })
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &encode_signal(&self.inner))
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.side()
    }

    fn values(&self) -> Vec<Complex64> {
        self.inner.data().to_vec()
    }

    fn norm(&self) -> f64 {
        self.inner.norm2()
    }

    #[pyo3(signature = (variant="iso"))]
    fn tv(&self, variant: &str) -> PyResult<f64> {
        tv_seminorm(&self.inner, tv_variant(variant)?).map_err(py_err)
    }

    /// Zero-padded forward-difference gradient, pixel-major (`d` values per pixel).
    fn gradient(&self) -> PyResult<Vec<Complex64>> {
        Ok(gradient_field(&self.inner).map_err(py_err)?.into_field().into_data())
    }

    /// Orthonormal Haar coefficients in flat storage order.
    fn haar(&self) -> PyResult<Vec<Complex64>> {
        Ok(haar_forward(&self.inner).map_err(py_err)?.into_data())
    }

    #[staticmethod]
    fn from_haar(d: usize, n: usize, coefficients: Vec<Complex64>) -> PyResult<Self> {
        let c = HaarCoefficients::from_vec(d, n, coefficients).map_err(py_err)?;
        Ok(PySignal { inner: haar_inverse(&c).map_err(py_err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Signal(d={}, n={})", self.inner.d(), self.inner.side())
    }
}

/// A linear measurement operator.
#[pyclass(name = "Operator", module = "ndtv_py", from_py_object)]
#[derive(Clone)]
struct PyOperator {
    inner: LinearMeasurementOp,
}

#[pymethods]
impl PyOperator {
    /// `rows` i.i.d. Gaussian (or `±1`) components over `{0, …, N-1}^d`, scaled by `1/√rows`.
    #[staticmethod]
    #[pyo3(signature = (rows, d, n, seed=0, ensemble="gaussian"))]
    fn random(rows: usize, d: usize, n: usize, seed: u64, ensemble: &str) -> PyResult<Self> {
        let ens: Ensemble = ensemble.parse().map_err(py_err)?;
        let shape = Shape::cube(d, n).map_err(py_err)?;
        Ok(PyOperator { inner: ens.build(rows, shape, seed).map_err(py_err)? })
    }

    /// The composite `A ⊕ [B₁]^0 ⊕ [B₁]_0 ⊕ …` with `2dq + p` outputs.
    #[staticmethod]
    #[pyo3(signature = (d, n, p, q, seed=0, ensemble="gaussian"))]
    fn composite(d: usize, n: usize, p: usize, q: usize, seed: u64, ensemble: &str) -> PyResult<Self> {
        let ens: Ensemble = ensemble.parse().map_err(py_err)?;
        Ok(PyOperator { inner: build_operator(d, n, Measurements::Composite { p, q }, ens, seed).map_err(py_err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let desc = OperatorDescriptor::from_json(text).map_err(py_err)?;
        Ok(PyOperator { inner: LinearMeasurementOp::from_descriptor(&desc).map_err(py_err)? })
    }

    fn to_json(&self) -> String {
        self.inner.descriptor().to_json()
    }

    #[getter]
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    #[getter]
    fn input_len(&self) -> usize {
        self.inner.input().len()
    }

    fn apply(&self, x: &PySignal) -> PyResult<Vec<Complex64>> {
        self.inner.apply_signal(&x.inner).map_err(py_err)
    }

    fn adjoint(&self, y: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        self.inner.adjoint(&y).map_err(py_err)
    }

    /// Restricted isometry level at `order`; `method` is `exhaustive`,
    /// `monte-carlo` or `spectral-bound`.
    #[pyo3(signature = (order, method="exhaustive", trials=1000, seed=0))]
    fn rip<'py>(&self, py: Python<'py>, order: usize, method: &str, trials: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let cert = match method {
            "exhaustive" => rip_constant_exhaustive(&self.inner, order, DEFAULT_SUBMATRIX_BUDGET),
            "monte-carlo" => rip_constant_montecarlo(&self.inner, order, trials, seed),
            "spectral-bound" => rip_constant_spectral_bound(&self.inner, order),
            other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
        }
        .map_err(py_err)?;
        to_dict(py, &cert)
    }

    fn __repr__(&self) -> String {
        format!("Operator(rows={}, input_len={})", self.inner.rows(), self.inner.input().len())
    }
}

/// `M(x)` plus Gaussian noise scaled to norm exactly `epsilon`.
#[pyfunction]
#[pyo3(signature = (op, x, epsilon=0.0, seed=0))]
fn measure(op: &PyOperator, x: &PySignal, epsilon: f64, seed: u64) -> PyResult<Vec<Complex64>> {
    measure_signal(&op.inner, &x.inner, epsilon, seed).map_err(py_err)
}

/// Solves the constrained recovery program. Returns the estimate and a
/// dictionary with iterations, feasibility gap, objective and convergence.
#[pyfunction]
#[pyo3(signature = (op, y, epsilon=0.0, variant="iso", tol=None, max_iters=None))]
fn solve<'py>(
    py: Python<'py>,
    op: &PyOperator,
    y: Vec<Complex64>,
    epsilon: f64,
    variant: &str,
    tol: Option<f64>,
    max_iters: Option<usize>,
) -> PyResult<(PySignal, Bound<'py, PyAny>)> {
    let mut opts = SolveOptions::new(self::variant(variant)?);
    if let Some(t) = tol {
        opts.tol = t;
    }
    if let Some(m) = max_iters {
        opts.max_iters = m;
    }
    let result = py
        .detach(|| match opts.variant {
            SolveVariant::L1Haar => solve_l1_haar(&op.inner, &y, epsilon, &opts),
            _ => solve_tv(&op.inner, &y, epsilon, &opts),
        })
        .map_err(py_err)?;
    let x_hat = PySignal { inner: result.signal().clone() };
    Ok((x_hat, to_dict(py, &result)?))
}

/// Gradient, TV and signal error bounds for an estimate `x_hat` of `x`.
#[pyfunction]
#[pyo3(signature = (x, x_hat, s, epsilon, variant="iso"))]
fn check_main_bounds<'py>(
    py: Python<'py>,
    x: &PySignal,
    x_hat: &PySignal,
    s: usize,
    epsilon: f64,
    variant: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let reports = verify::check_main_bounds(&x.inner, &x_hat.inner, s, epsilon, tv_variant(variant)?).map_err(py_err)?;
    to_dict(py, &reports)
}

#[pyfunction]
fn check_bv_embedding<'py>(py: Python<'py>, x: &PySignal) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &verify::check_bv_embedding(&x.inner).map_err(py_err)?)
}

#[pyfunction]
#[pyo3(signature = (x, variant="iso"))]
fn check_cddd_decay<'py>(py: Python<'py>, x: &PySignal, variant: &str) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &verify::check_cddd_decay(&x.inner, tv_variant(variant)?).map_err(py_err)?)
}

#[pymodule]
fn ndtv_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySignal>()?;
    m.add_class::<PyOperator>()?;
    m.add_function(wrap_pyfunction!(measure, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(check_main_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(check_bv_embedding, m)?)?;
    m.add_function(wrap_pyfunction!(check_cddd_decay, m)?)?;
    Ok(())
}
