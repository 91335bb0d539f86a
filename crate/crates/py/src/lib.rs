//! Python bindings: `import oabounds`.

use num_bigint::BigUint;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use oabounds::asymptotics;
use oabounds::{ArraySpec, BoundKind, BoundTarget, GvVariant};

fn to_py_err(e: oabounds::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_variant(variant: &str) -> PyResult<GvVariant> {
    GvVariant::ALL
        .into_iter()
        .find(|v| v.name() == variant)
        .ok_or_else(|| PyValueError::new_err(format!("unknown GV variant {variant:?}")))
}

fn parse_target(spec: &ArraySpec, bound: &str, variant: &str) -> PyResult<BoundTarget> {
    match bound {
        "rao" => Ok(BoundTarget::rao(spec)),
        "gv" => Ok(BoundTarget::gv_sum(spec)),
        "gv-expectation" => Ok(BoundTarget::gv_expectation(spec, parse_variant(variant)?)),
        other => Err(PyValueError::new_err(format!("unknown bound {other:?}"))),
    }
}

fn parse_kind(bound: &str) -> PyResult<BoundKind> {
    match bound {
        "rao" => Ok(BoundKind::RaoSum),
        "gv" | "gv-expectation" => Ok(BoundKind::GvExpectation),
        other => Err(PyValueError::new_err(format!("unknown bound {other:?}"))),
    }
}

#[pyclass(name = "ArraySpec", frozen, skip_from_py_object, module = "oabounds")]
#[derive(Clone)]
struct PyArraySpec {
    inner: ArraySpec,
}

#[pymethods]
impl PyArraySpec {
    #[new]
    fn new(alphabet_sizes: Vec<u64>, block_lengths: Vec<usize>, strength: usize) -> PyResult<Self> {
        ArraySpec::new(alphabet_sizes, block_lengths, strength)
            .map(|inner| PyArraySpec { inner })
            .map_err(to_py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        ArraySpec::from_json(text)
            .map(|inner| PyArraySpec { inner })
            .map_err(to_py_err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).unwrap()
    }

    #[getter]
    fn alphabet_sizes(&self) -> Vec<u64> {
        self.inner.alphabet_sizes().to_vec()
    }

    #[getter]
    fn block_lengths(&self) -> Vec<usize> {
        self.inner.block_lengths().to_vec()
    }

    #[getter]
    fn strength(&self) -> usize {
        self.inner.strength()
    }

    #[getter]
    fn row_length(&self) -> usize {
        self.inner.row_length()
    }

    fn block_of(&self, step: usize) -> PyResult<usize> {
        self.inner.block_of(step).map_err(to_py_err)
    }

    fn running_cost(&self, up: bool, step: usize) -> PyResult<u64> {
        self.inner.running_cost(up, step).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "ArraySpec(alphabet_sizes={:?}, block_lengths={:?}, strength={})",
            self.inner.alphabet_sizes(),
            self.inner.block_lengths(),
            self.inner.strength()
        )
    }
}

#[pyclass(name = "TiltProfile", frozen, get_all, module = "oabounds")]
struct PyTiltProfile {
    lambda_star: f64,
    thetas: Vec<f64>,
    rate: f64,
    budget: f64,
    constrained: bool,
}

impl From<asymptotics::TiltProfile> for PyTiltProfile {
    fn from(t: asymptotics::TiltProfile) -> Self {
        PyTiltProfile {
            lambda_star: t.lambda_star,
            thetas: t.thetas,
            rate: t.rate,
            budget: t.budget,
            constrained: t.constrained,
        }
    }
}

#[pyclass(name = "IsResult", frozen, get_all, module = "oabounds")]
struct PyIsResult {
    log_estimate: f64,
    estimate: f64,
    mantissa: f64,
    exponent10: i64,
    std_error: f64,
    ci_low: f64,
    ci_high: f64,
    hit_fraction: f64,
    log_second_moment: f64,
    samples: usize,
    seed: u64,
    json: String,
}

#[pyfunction]
#[pyo3(signature = (spec, bound = "rao", variant = "full"))]
fn direct_bound(spec: &PyArraySpec, bound: &str, variant: &str) -> PyResult<BigUint> {
    let target = parse_target(&spec.inner, bound, variant)?;
    oabounds::direct_bound(&spec.inner, &target)
        .map(|v| v.into_inner())
        .map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (spec, bound = "rao", variant = "full"))]
fn dp_bound(spec: &PyArraySpec, bound: &str, variant: &str) -> PyResult<BigUint> {
    let target = parse_target(&spec.inner, bound, variant)?;
    Ok(oabounds::dp_bound(&spec.inner, &target).into_inner())
}

#[pyfunction]
#[pyo3(signature = (spec, bound = "rao", variant = "full"))]
fn brute_force_oracle(spec: &PyArraySpec, bound: &str, variant: &str) -> PyResult<BigUint> {
    let target = parse_target(&spec.inner, bound, variant)?;
    oabounds::brute_force_oracle(&spec.inner, &target)
        .map(|v| v.into_inner())
        .map_err(to_py_err)
}

#[pyfunction]
fn direct_op_count(spec: &PyArraySpec) -> BigUint {
    oabounds::direct_op_count(&spec.inner).into_inner()
}

#[pyfunction]
fn entropy(theta: f64) -> PyResult<f64> {
    oabounds::entropy(theta).map_err(to_py_err)
}

#[pyfunction]
fn solve_lambda(spec: &PyArraySpec, budget: f64) -> PyResult<f64> {
    oabounds::solve_lambda(&spec.inner, budget).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (spec, bound = "rao"))]
fn optimal_tilt(spec: &PyArraySpec, bound: &str) -> PyResult<PyTiltProfile> {
    oabounds::optimal_tilt(&spec.inner, parse_kind(bound)?)
        .map(Into::into)
        .map_err(to_py_err)
}

/// Returns `(rate, log_value, mantissa, exponent10)`.
#[pyfunction]
#[pyo3(signature = (spec, bound = "rao"))]
fn ld_estimate(spec: &PyArraySpec, bound: &str) -> PyResult<(f64, f64, f64, i64)> {
    let ld = oabounds::ld_estimate(&spec.inner, parse_kind(bound)?).map_err(to_py_err)?;
    Ok((ld.rate, ld.log_value, ld.value.mantissa, ld.value.exponent))
}

#[pyfunction]
#[pyo3(signature = (spec, x, tau, bound = "rao"))]
fn value_function(spec: &PyArraySpec, x: f64, tau: f64, bound: &str) -> PyResult<f64> {
    oabounds::value_function(&spec.inner, parse_kind(bound)?, x, tau).map_err(to_py_err)
}

/// Returns `(x, tau, values)` with `values[i][j]` at `(x[i], tau[j])`.
#[pyfunction]
#[pyo3(signature = (spec, bound = "rao"))]
fn prelimit_grid(spec: &PyArraySpec, bound: &str) -> PyResult<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
    let grid = oabounds::prelimit_grid(&spec.inner, parse_kind(bound)?);
    Ok((grid.x, grid.tau, grid.values))
}

#[pyfunction]
#[pyo3(signature = (spec, samples, seed, bound = "rao", variant = "full", use_tilt = true))]
fn is_estimate(
    py: Python<'_>,
    spec: &PyArraySpec,
    samples: usize,
    seed: u64,
    bound: &str,
    variant: &str,
    use_tilt: bool,
) -> PyResult<PyIsResult> {
    let target = parse_target(&spec.inner, bound, variant)?;
    let config = oabounds::IsConfig {
        samples,
        seed,
        target,
        use_tilt,
    };
    let inner = spec.inner.clone();
    let r = py
        .detach(move || oabounds::is_estimate(&inner, &config))
        .map_err(to_py_err)?;
    Ok(PyIsResult {
        json: serde_json::to_string(&r).unwrap(),
        log_estimate: r.log_estimate,
        estimate: r.estimate,
        mantissa: r.mantissa,
        exponent10: r.exponent10,
        std_error: r.std_error,
        ci_low: r.ci_low,
        ci_high: r.ci_high,
        hit_fraction: r.hit_fraction,
        log_second_moment: r.log_second_moment,
        samples: r.samples,
        seed: r.seed,
    })
}

#[pymodule]
#[pyo3(name = "oabounds")]
fn oabounds_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyArraySpec>()?;
    m.add_class::<PyTiltProfile>()?;
    m.add_class::<PyIsResult>()?;
    m.add_function(wrap_pyfunction!(direct_bound, m)?)?;
    m.add_function(wrap_pyfunction!(dp_bound, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(direct_op_count, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(solve_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_tilt, m)?)?;
    m.add_function(wrap_pyfunction!(ld_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(value_function, m)?)?;
    m.add_function(wrap_pyfunction!(prelimit_grid, m)?)?;
    m.add_function(wrap_pyfunction!(is_estimate, m)?)?;
    Ok(())
}
