//! Python bindings: one-shot multiply helpers, metered traces, predictors
//! and a register-level `Context` for stepping through operations by hand.

use num_bigint::BigUint;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use revkara::{Algorithm, CostModel, Sign};

fn py_err(e: revkara::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn sign_of(sign: i32) -> PyResult<Sign> {
    match sign {
        1 => Ok(Sign::Plus),
        -1 => Ok(Sign::Minus),
        s => Err(PyValueError::new_err(format!(
            "sign must be +1 or -1, got {s}"
        ))),
    }
}

fn algorithm_of(name: &str) -> PyResult<Algorithm> {
    name.parse().map_err(py_err)
}

/// Word width, piece count and padded widths chosen for an n-bit multiply.
#[pyclass(name = "MultiplierConfig", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyConfig(revkara::MultiplierConfig);

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (n, word_bits, pieces, base_case_pieces = 1))]
    fn new(n: usize, word_bits: usize, pieces: usize, base_case_pieces: usize) -> PyResult<Self> {
        let cfg = revkara::MultiplierConfig::new(n, word_bits, pieces)
            .and_then(|c| c.with_base_case_pieces(base_case_pieces))
            .map_err(py_err)?;
        Ok(PyConfig(cfg))
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }
    #[getter]
    fn word_bits(&self) -> usize {
        self.0.word_bits()
    }
    #[getter]
    fn pieces(&self) -> usize {
        self.0.pieces()
    }
    #[getter]
    fn base_case_pieces(&self) -> usize {
        self.0.base_case_pieces()
    }
    #[getter]
    fn input_piece_width(&self) -> usize {
        self.0.input_piece_width()
    }
    #[getter]
    fn output_piece_width(&self) -> usize {
        self.0.output_piece_width()
    }
    #[getter]
    fn output_piece_count(&self) -> usize {
        self.0.output_piece_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "MultiplierConfig(n={}, word_bits={}, pieces={}, base_case_pieces={})",
            self.0.n(),
            self.0.word_bits(),
            self.0.pieces(),
            self.0.base_case_pieces()
        )
    }
}

/// A bit range inside one register of a [`PyContext`].
#[pyclass(name = "Window", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyWindow(revkara::Window);

#[pymethods]
impl PyWindow {
    #[getter]
    fn offset(&self) -> usize {
        self.0.offset()
    }
    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }
    #[getter]
    fn buffer(&self) -> usize {
        self.0.buffer().index()
    }
    fn sub(&self, offset: usize, width: usize) -> PyResult<PyWindow> {
        self.0.sub(offset, width).map(PyWindow).map_err(py_err)
    }
    fn __repr__(&self) -> String {
        format!(
            "Window(buffer={}, offset={}, width={})",
            self.buffer(),
            self.offset(),
            self.width()
        )
    }
}

fn summary_dict<'py>(py: Python<'py>, log: &revkara::ResourceLog) -> PyResult<Bound<'py, PyDict>> {
    let s = log.report();
    let d = PyDict::new(py);
    d.set_item("toffoli", s.toffoli)?;
    d.set_item("allocated_bits", s.allocated_bits)?;
    d.set_item("high_water_bits", s.high_water_bits)?;
    let phases = PyDict::new(py);
    for (phase, count) in &s.breakdown {
        phases.set_item(phase.name(), *count)?;
    }
    d.set_item("breakdown", phases)?;
    Ok(d)
}

/// Registers plus a resource log under the default cost model.
#[pyclass(name = "Context")]
pub struct PyContext(revkara::Context);

#[pymethods]
impl PyContext {
    #[new]
    fn new() -> Self {
        PyContext(revkara::Context::default())
    }

    /// Allocates a zeroed register of `bits` bits.
    fn alloc(&mut self, bits: usize) -> PyResult<PyWindow> {
        self.0.alloc(bits).map(PyWindow).map_err(py_err)
    }

    /// Releases a register; it must hold zero.
    fn release(&mut self, window: PyWindow) -> PyResult<()> {
        self.0.release(window.0.buffer()).map_err(py_err)
    }

    fn load(&mut self, window: PyWindow, value: BigUint) -> PyResult<()> {
        self.0.load(window.0, &value).map_err(py_err)
    }

    fn read(&self, window: PyWindow) -> PyResult<BigUint> {
        self.0.read(window.0).map_err(py_err)
    }

    #[pyo3(signature = (target, source, sign = 1))]
    fn plus_equal(&mut self, target: PyWindow, source: PyWindow, sign: i32) -> PyResult<()> {
        revkara::plus_equal(&mut self.0, target.0, source.0, sign_of(sign)?).map_err(py_err)
    }

    #[pyo3(signature = (target, u, v, sign = 1, algorithm = "karatsuba"))]
    fn multiply_add(
        &mut self,
        target: PyWindow,
        u: PyWindow,
        v: PyWindow,
        sign: i32,
        algorithm: &str,
    ) -> PyResult<()> {
        let sign = sign_of(sign)?;
        let r = match algorithm_of(algorithm)? {
            Algorithm::Karatsuba => revkara::multiply_add(&mut self.0, target.0, u.0, v.0, sign),
            Algorithm::Schoolbook => {
                revkara::multiply_add_schoolbook(&mut self.0, target.0, u.0, v.0, sign)
            }
        };
        r.map_err(py_err)
    }

    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        summary_dict(py, self.0.log())
    }
}

fn run_once(
    n: usize,
    t0: &BigUint,
    u: &BigUint,
    v: &BigUint,
    sign: Sign,
    karatsuba: Option<&revkara::MultiplierConfig>,
) -> revkara::Result<BigUint> {
    let mut ctx = revkara::Context::default();
    let t = ctx.alloc(2 * n)?;
    let a = ctx.alloc(n)?;
    let b = ctx.alloc(n)?;
    ctx.load(t, t0)?;
    ctx.load(a, u)?;
    ctx.load(b, v)?;
    match karatsuba {
        Some(c) => revkara::multiply_add_with(&mut ctx, c, t, a, b, sign, &mut revkara::NoProbe)?,
        None => revkara::multiply_add_schoolbook(&mut ctx, t, a, b, sign)?,
    }
    ctx.read(t)
}

/// Returns `(t0 + sign*u*v) mod 2^(2n)` computed by the reversible Karatsuba
/// circuit. Operands wider than their registers are reduced modulo them.
#[pyfunction]
#[pyo3(signature = (n, t0, u, v, sign = 1, base_case_pieces = 1))]
fn multiply_add(
    n: usize,
    t0: BigUint,
    u: BigUint,
    v: BigUint,
    sign: i32,
    base_case_pieces: usize,
) -> PyResult<BigUint> {
    let cfg = revkara::choose_parameters(n)
        .and_then(|c| c.with_base_case_pieces(base_case_pieces))
        .map_err(py_err)?;
    run_once(n, &t0, &u, &v, sign_of(sign)?, Some(&cfg)).map_err(py_err)
}

/// Same contract as `multiply_add`, using the schoolbook circuit.
#[pyfunction]
#[pyo3(signature = (n, t0, u, v, sign = 1))]
fn multiply_add_schoolbook(
    n: usize,
    t0: BigUint,
    u: BigUint,
    v: BigUint,
    sign: i32,
) -> PyResult<BigUint> {
    if n == 0 {
        return Err(PyValueError::new_err("n must be at least 1"));
    }
    run_once(n, &t0, &u, &v, sign_of(sign)?, None).map_err(py_err)
}

#[pyfunction]
fn choose_parameters(n: usize) -> PyResult<PyConfig> {
    revkara::choose_parameters(n).map(PyConfig).map_err(py_err)
}

/// Meters one multiply and returns the CSV fields plus the product.
#[pyfunction]
#[pyo3(signature = (n, algorithm = "karatsuba", t0 = None, u = None, v = None))]
fn trace<'py>(
    py: Python<'py>,
    n: usize,
    algorithm: &str,
    t0: Option<BigUint>,
    u: Option<BigUint>,
    v: Option<BigUint>,
) -> PyResult<Bound<'py, PyDict>> {
    let zero = BigUint::default();
    let t = revkara::trace_multiply(
        algorithm_of(algorithm)?,
        n,
        t0.as_ref().unwrap_or(&zero),
        u.as_ref().unwrap_or(&zero),
        v.as_ref().unwrap_or(&zero),
        CostModel::default(),
    )
    .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("algorithm", t.point.algorithm.name())?;
    d.set_item("n", t.point.n)?;
    d.set_item("w", t.point.w)?;
    d.set_item("m", t.point.m)?;
    d.set_item("toffoli", t.point.toffoli)?;
    d.set_item("bits_high_water", t.point.high_water_bits)?;
    d.set_item("result", t.result)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (n, algorithm = "karatsuba"))]
fn predicted_toffoli_count(n: usize, algorithm: &str) -> PyResult<u64> {
    let cost = CostModel::default();
    match algorithm_of(algorithm)? {
        Algorithm::Karatsuba => revkara::predicted_toffoli_count(n, &cost),
        Algorithm::Schoolbook => revkara::predicted_schoolbook_toffoli(n, &cost),
    }
    .map_err(py_err)
}

#[pyfunction]
fn predicted_space_bits(py: Python<'_>, n: usize) -> PyResult<Bound<'_, PyDict>> {
    let p = revkara::predicted_space_bits(n, &CostModel::default()).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("input_bits", p.input_bits)?;
    d.set_item("output_bits", p.output_bits)?;
    d.set_item("adder_ancilla_bits", p.adder_ancilla_bits)?;
    d.set_item("total_high_water", p.total_high_water)?;
    Ok(d)
}

#[pyfunction]
fn fit_loglog_slope(points: Vec<(f64, f64)>) -> PyResult<f64> {
    revkara::fit_loglog_slope(&points).map_err(py_err)
}

#[pyfunction]
fn classical_karatsuba_multiply(u: BigUint, v: BigUint) -> BigUint {
    revkara::classical_karatsuba_multiply(&u, &v)
}

#[pymodule]
fn revkara_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyWindow>()?;
    m.add_class::<PyContext>()?;
    m.add_function(wrap_pyfunction!(multiply_add, m)?)?;
    m.add_function(wrap_pyfunction!(multiply_add_schoolbook, m)?)?;
    m.add_function(wrap_pyfunction!(choose_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(trace, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_toffoli_count, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_space_bits, m)?)?;
    m.add_function(wrap_pyfunction!(fit_loglog_slope, m)?)?;
    m.add_function(wrap_pyfunction!(classical_karatsuba_multiply, m)?)?;
    Ok(())
}
