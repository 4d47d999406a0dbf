//! Python module `spacelike`. Reports come back as plain dicts and lists.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::{json, Value};

use spacelike_core::codim2::{equivalence_suite, IDENTITY_TOL};
use spacelike_core::error::Error;
use spacelike_core::estimate::{
    bochner_check, default_samples, estimate_trend, gradient_estimate_report, hyperplane_rigidity_trend,
    ComparisonFn, PlaneBump,
};
use spacelike_core::geometry::{
    cmc_residual, gauss_map_with, interior_sup, ricci_min, shape_and_mean_curvature, tension_field,
    SpacelikeGraph, DEFAULT_SLACK,
};
use spacelike_core::grid::GridDomain;
use spacelike_core::hyperbolic::{self, BusemannRay, Model, ModelPoint};
use spacelike_core::io::{read_fields as core_read, write_fields as core_write, Encoding, FieldSet};
use spacelike_core::problem::ProblemSpec;
use spacelike_core::solver::{
    central_and_interior_diagnostics, exact_hyperboloid as core_hyperboloid, solve as core_solve, DirichletProblem,
    ExactSolution, Solution, SolverConfig,
};

fn err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(f)) => f.into_pyobject(py)?.into_any(),
            _ => n.to_string().into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn report<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(py, &value)
}

fn parse_model(name: &str) -> PyResult<Model> {
    serde_json::from_value(Value::String(name.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown model {name:?} (hyperboloid, upper_half, ball)")))
}

/// Uniform grid on a box, row-major with the last axis fastest.
#[pyclass(name = "GridDomain", frozen, module = "spacelike")]
pub struct PyGridDomain {
    inner: GridDomain,
}

#[pymethods]
impl PyGridDomain {
    /// The cube `[-half_width, half_width]^m` with `nodes` nodes per axis.
    #[new]
    fn new(m: usize, half_width: f64, nodes: usize) -> PyResult<Self> {
        Ok(Self {
            inner: GridDomain::centered_cube(m, half_width, nodes).map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.inner.spacing()
    }

    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.inner.shape().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn coords(&self, idx: usize) -> PyResult<Vec<f64>> {
        if idx >= self.inner.len() {
            return Err(PyValueError::new_err(format!("node {idx} out of range")));
        }
        Ok(self.inner.coords(idx))
    }

    fn center_node(&self) -> usize {
        self.inner.center_node()
    }

    fn is_interior(&self, idx: usize) -> bool {
        self.inner.is_interior(idx)
    }

    /// Evaluate `f(x)` at every node; `x` is a list of coordinates.
    fn sample(&self, f: &Bound<'_, PyAny>) -> PyResult<Vec<f64>> {
        (0..self.inner.len())
            .map(|idx| f.call1((self.inner.coords(idx),))?.extract::<f64>())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "GridDomain(shape={:?}, spacing={}, origin={:?})",
            self.inner.shape(),
            self.inner.spacing(),
            self.inner.origin()
        )
    }
}

/// Height function `u` of a spacelike graph, `|grad u| < 1`.
#[pyclass(name = "SpacelikeGraph", frozen, module = "spacelike")]
pub struct PyGraph {
    inner: SpacelikeGraph,
}

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (domain, values, slack = DEFAULT_SLACK))]
    fn new(domain: &PyGridDomain, values: Vec<f64>, slack: f64) -> PyResult<Self> {
        Ok(Self {
            inner: SpacelikeGraph::new(domain.inner.clone(), values, slack).map_err(err)?,
        })
    }

    #[getter]
    fn domain(&self) -> PyGridDomain {
        PyGridDomain {
            inner: self.inner.domain().clone(),
        }
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    /// Residual of the mean curvature equation; NaN on the boundary.
    fn cmc_residual(&self, mean_curvature: f64) -> PyResult<Vec<f64>> {
        cmc_residual(&self.inner, mean_curvature).map_err(err)
    }

    /// Curvature and Gauss-map fields, one value per node (NaN on the
    /// boundary), with their interior sups.
    fn geometry<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let geo = shape_and_mean_curvature(&self.inner).map_err(err)?;
        let gauss = gauss_map_with(&self.inner, &geo);
        let tension = tension_field(&gauss, &geo);
        let ricci = ricci_min(&geo);
        let h_norm: Vec<f64> = geo.h_norm_sq.iter().map(|v| v.max(0.0).sqrt()).collect();
        let d = self.inner.domain();
        let v = json!({
            "mean_curvature": geo.mean_curvature,
            "h_norm": h_norm,
            "sup_h_norm": interior_sup(d, &h_norm),
            "tension_norm": tension.norm,
            "ricci_min": ricci.min_eigenvalue,
            "ricci": ricci,
            "gauss_upper_half": gauss.upper_half_components(),
        });
        to_py(py, &v)
    }

    /// Energy-identity and tension sups on the central box and the interior.
    fn diagnostics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let (central, interior) = central_and_interior_diagnostics(&self.inner).map_err(err)?;
        report(py, &json!({"central": central, "interior": interior}))
    }

    /// Gradient-estimate report at `center` (default: the box center) with
    /// the comparison function `g = g_level`.
    #[pyo3(signature = (a, c, center = None, g_level = 0.0))]
    fn gradient_estimate<'py>(
        &self,
        py: Python<'py>,
        a: f64,
        c: f64,
        center: Option<usize>,
        g_level: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let d = self.inner.domain();
        let g = ComparisonFn::constant(d, g_level);
        let center = center.unwrap_or_else(|| d.center_node());
        report(py, &gradient_estimate_report(&self.inner, center, a, &g, c).map_err(err)?)
    }

    #[pyo3(signature = (samples = 100))]
    fn bochner<'py>(&self, py: Python<'py>, samples: usize) -> PyResult<Bound<'py, PyAny>> {
        let nodes = default_samples(self.inner.domain(), samples);
        report(py, &bochner_check(&self.inner, &nodes).map_err(err)?)
    }
}

/// Result of a Dirichlet solve.
#[pyclass(name = "Solution", frozen, module = "spacelike")]
pub struct PySolution {
    inner: Solution,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn u(&self) -> Vec<f64> {
        self.inner.u.clone()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged()
    }

    #[getter]
    fn domain(&self) -> PyGridDomain {
        PyGridDomain {
            inner: self.inner.domain.clone(),
        }
    }

    #[getter]
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        report(py, &self.inner.report)
    }

    fn graph(&self) -> PyResult<PyGraph> {
        Ok(PyGraph {
            inner: self.inner.graph().map_err(err)?,
        })
    }
}

/// Solve the constant mean curvature equation with Dirichlet data taken from
/// the boundary entries of `boundary` (a full-grid list).
#[pyfunction]
#[pyo3(signature = (domain, boundary, mean_curvature, tol = None, max_newton = None))]
fn solve(
    domain: &PyGridDomain,
    boundary: Vec<f64>,
    mean_curvature: f64,
    tol: Option<f64>,
    max_newton: Option<usize>,
) -> PyResult<PySolution> {
    let problem = DirichletProblem::new(domain.inner.clone(), boundary, mean_curvature).map_err(err)?;
    let mut cfg = SolverConfig::default();
    if let Some(t) = tol {
        cfg.tol = t;
    }
    if let Some(n) = max_newton {
        cfg.max_newton = n;
    }
    Ok(PySolution {
        inner: core_solve(&problem, &cfg).map_err(err)?,
    })
}

/// Solve a problem given as JSON text (the CLI problem-file format).
#[pyfunction]
fn solve_problem(text: &str) -> PyResult<PySolution> {
    let spec = ProblemSpec::from_json(text).map_err(err)?;
    let problem = spec.dirichlet().map_err(err)?;
    Ok(PySolution {
        inner: core_solve(&problem, &spec.solver_config()).map_err(err)?,
    })
}

/// `sqrt(1/H^2 + |x - center|^2) + shift` sampled on the grid.
#[pyfunction]
#[pyo3(signature = (domain, mean_curvature, center = None, shift = 0.0))]
fn exact_hyperboloid(
    domain: &PyGridDomain,
    mean_curvature: f64,
    center: Option<Vec<f64>>,
    shift: f64,
) -> PyResult<Vec<f64>> {
    let center = center.unwrap_or_else(|| vec![0.0; domain.inner.dim()]);
    let exact = core_hyperboloid(mean_curvature, center, shift).map_err(err)?;
    Ok(exact.sample(&domain.inner))
}

/// Convert coordinates between `hyperboloid`, `upper_half` and `ball`.
#[pyfunction]
fn convert(coords: Vec<f64>, source: &str, target: &str) -> PyResult<Vec<f64>> {
    let p = ModelPoint::new(parse_model(source)?, coords).map_err(err)?;
    Ok(p.to(parse_model(target)?).map_err(err)?.into_coords())
}

#[pyfunction]
fn distance(model: &str, p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    let m = parse_model(model)?;
    let p = ModelPoint::new(m, p).map_err(err)?;
    let q = ModelPoint::new(m, q).map_err(err)?;
    hyperbolic::hyp_distance(&p, &q).map_err(err)
}

/// Busemann function `ln(z_m / c)` of the vertical ray through height `c`.
#[pyfunction]
#[pyo3(signature = (coords, c, model = "upper_half"))]
fn busemann(coords: Vec<f64>, c: f64, model: &str) -> PyResult<f64> {
    let z = ModelPoint::new(parse_model(model)?, coords).map_err(err)?;
    let ray = BusemannRay::new(c).map_err(err)?;
    hyperbolic::busemann_eval(&z, &ray).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (seed = 0, samples = 100))]
fn hyperbolic_self_test<'py>(py: Python<'py>, seed: u64, samples: usize) -> PyResult<Bound<'py, PyAny>> {
    report(py, &hyperbolic::self_test(seed, samples).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (seed = 0, fields = 20, nodes = 33, tol = IDENTITY_TOL))]
fn codim2_suite<'py>(py: Python<'py>, seed: u64, fields: usize, nodes: usize, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    report(py, &equivalence_suite(seed, fields, nodes, tol).map_err(err)?)
}

/// Flattening trend of the default plane-plus-bump family.
#[pyfunction]
#[pyo3(signature = (a_list, c = 0.25))]
fn rigidity_trend<'py>(py: Python<'py>, a_list: Vec<f64>, c: f64) -> PyResult<Bound<'py, PyAny>> {
    let trend = hyperplane_rigidity_trend(&PlaneBump::default(), &a_list, 0.0, c, &SolverConfig::default())
        .map_err(err)?;
    report(py, &trend)
}

/// Gradient-estimate reports across the plane-plus-bump family.
#[pyfunction]
#[pyo3(signature = (a_list, c = 0.25, extent = 1.25))]
fn gradient_estimate_trend<'py>(py: Python<'py>, a_list: Vec<f64>, c: f64, extent: f64) -> PyResult<Bound<'py, PyAny>> {
    let family = PlaneBump {
        extent,
        ..PlaneBump::default()
    };
    let reports = estimate_trend(&family, &a_list, 0.0, c, &SolverConfig::default()).map_err(err)?;
    report(py, &reports)
}

/// Write named full-grid fields; returns the header path.
#[pyfunction]
#[pyo3(signature = (stem, domain, fields, binary = false))]
fn write_fields(stem: PathBuf, domain: &PyGridDomain, fields: Vec<(String, Vec<f64>)>, binary: bool) -> PyResult<String> {
    let mut set = FieldSet::new(domain.inner.clone());
    for (name, values) in fields {
        set.push(&name, values).map_err(err)?;
    }
    let enc = if binary { Encoding::Binary } else { Encoding::Csv };
    Ok(core_write(&stem, &set, enc).map_err(err)?.display().to_string())
}

/// Read a `.field.json` header and payload: `(domain, {name: values})`.
#[pyfunction]
fn read_fields<'py>(py: Python<'py>, header: PathBuf) -> PyResult<(PyGridDomain, Bound<'py, PyDict>)> {
    let set = core_read(&header).map_err(err)?;
    let dict = PyDict::new(py);
    for (name, values) in set.names.iter().zip(&set.data) {
        dict.set_item(name, values.clone())?;
    }
    Ok((PyGridDomain { inner: set.domain }, dict))
}

#[pymodule]
fn spacelike(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGridDomain>()?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_problem, m)?)?;
    m.add_function(wrap_pyfunction!(exact_hyperboloid, m)?)?;
    m.add_function(wrap_pyfunction!(convert, m)?)?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(busemann, m)?)?;
    m.add_function(wrap_pyfunction!(hyperbolic_self_test, m)?)?;
    m.add_function(wrap_pyfunction!(codim2_suite, m)?)?;
    m.add_function(wrap_pyfunction!(rigidity_trend, m)?)?;
    m.add_function(wrap_pyfunction!(gradient_estimate_trend, m)?)?;
    m.add_function(wrap_pyfunction!(write_fields, m)?)?;
    m.add_function(wrap_pyfunction!(read_fields, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_names_parse() {
        assert_eq!(parse_model("upper_half").unwrap(), Model::UpperHalf);
        assert_eq!(parse_model("ball").unwrap(), Model::Ball);
        assert_eq!(parse_model("hyperboloid").unwrap(), Model::Hyperboloid);
    }
}
