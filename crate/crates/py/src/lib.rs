//! Python bindings for the `kncs` crate.

use kncs_core::existence::{self, ExistenceConfig};
use kncs_core::ion::{self, LaserConfig};
use kncs_core::observables::{self, MixedSpec};
use kncs_core::states::{self, Nonlinearity, StateSpec};
use kncs_core::{Complex64, Error};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(kncs_py, KncsError, PyException, "Numerical failure inside kncs.");
create_exception!(kncs_py, NonexistentStateError, KncsError, "The state's series diverges.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::InvalidConfig(_) | Error::DomainMismatch(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::NonexistentState { .. } | Error::Divergent { .. } => NonexistentStateError::new_err(e.to_string()),
        _ => KncsError::new_err(e.to_string()),
    }
}

fn nonlinearity(k: u32, eta: Option<f64>, table: Option<Vec<f64>>) -> PyResult<Nonlinearity> {
    match (eta, table) {
        (Some(eta), None) => Ok(Nonlinearity::trapped_ion(eta, k)),
        (None, Some(table)) => Ok(Nonlinearity::Tabulated { table }),
        (None, None) => Ok(Nonlinearity::Identity),
        (Some(_), Some(_)) => Err(PyValueError::new_err("give at most one of eta and table")),
    }
}

/// The state `|xi; Kj, f>`. `f` is the trapped-ion function when `eta` is
/// given, the tabulated values when `table` is given, and 1 otherwise.
#[pyclass(name = "State", frozen)]
struct PyState {
    spec: StateSpec,
}

#[pymethods]
impl PyState {
    #[new]
    #[pyo3(signature = (k, j, xi, eta=None, table=None))]
    fn new(k: u32, j: u32, xi: Complex64, eta: Option<f64>, table: Option<Vec<f64>>) -> PyResult<Self> {
        let f = nonlinearity(k, eta, table)?;
        let spec = StateSpec::new(k, j, xi, f).map_err(to_py)?;
        Ok(Self { spec })
    }

    #[getter]
    fn k(&self) -> u32 {
        self.spec.k()
    }

    #[getter]
    fn j(&self) -> u32 {
        self.spec.j()
    }

    #[getter]
    fn xi(&self) -> Complex64 {
        self.spec.xi()
    }

    /// Whether the defining series converges.
    fn exists(&self) -> PyResult<bool> {
        let cfg = ExistenceConfig::default();
        Ok(existence::classify(&self.spec, cfg.n_max, cfg.window).map_err(to_py)?.exists)
    }

    /// Normalized Fock amplitudes `c_0 .. c_N`.
    #[pyo3(signature = (tol=1e-14))]
    fn amplitudes(&self, tol: f64) -> PyResult<Vec<Complex64>> {
        Ok(states::build_state(&self.spec, tol).map_err(to_py)?.amplitudes)
    }

    /// `(n, P(n))` on the occupied lattice.
    #[pyo3(signature = (tol=1e-14))]
    fn distribution(&self, tol: f64) -> PyResult<Vec<(usize, f64)>> {
        observables::number_distribution(&self.spec, tol).map_err(to_py)
    }

    /// Dict with `mean_n`, `mandel`, `squeeze_s` and `variance_x`.
    #[pyo3(signature = (tol=1e-14))]
    fn statistics<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let r = observables::statistics(&self.spec, tol).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("mean_n", r.mean_n)?;
        d.set_item("mandel", r.mandel)?;
        d.set_item("squeeze_s", r.squeeze_s)?;
        d.set_item("variance_x", r.variance_x)?;
        Ok(d)
    }

    #[pyo3(signature = (l, tol=1e-14))]
    fn moment_a(&self, l: u32, tol: f64) -> PyResult<Complex64> {
        observables::moment_a(&self.spec, l, tol).map_err(to_py)
    }

    #[pyo3(signature = (l, tol=1e-14))]
    fn moment_n(&self, l: u32, tol: f64) -> PyResult<f64> {
        observables::moment_n(&self.spec, l, tol).map_err(to_py)
    }

    /// `<self|other>` from the closed form.
    #[pyo3(signature = (other, tol=1e-15))]
    fn overlap(&self, other: &PyState, tol: f64) -> PyResult<Complex64> {
        states::overlap(&self.spec, &other.spec, tol).map_err(to_py)
    }

    /// Single-quantum branches as `(xi_branch, zeta)` pairs.
    fn decompose(&self) -> PyResult<Vec<(Complex64, Complex64)>> {
        let b = states::decompose(&self.spec).map_err(to_py)?;
        Ok(b.into_iter().map(|b| (b.xi, b.zeta)).collect())
    }

    fn __repr__(&self) -> String {
        format!("State(k={}, j={}, xi={})", self.spec.k(), self.spec.j(), self.spec.xi())
    }
}

/// Critical `|xi|` of the trapped-ion state, bisected to width `tol`, or to
/// `rel_tol` times the critical value when that is given.
#[pyfunction]
#[pyo3(signature = (k, j, eta, tol=1e-2, rel_tol=None))]
fn critical_xi(py: Python<'_>, k: u32, j: u32, eta: f64, tol: f64, rel_tol: Option<f64>) -> PyResult<f64> {
    py.detach(|| match rel_tol {
        Some(r) => existence::critical_xi_relative(k, j, eta, r),
        None => existence::critical_xi(k, j, eta, tol),
    })
    .map_err(to_py)
}

/// `(eta, xi_critical or None)` over the grid; `tol` is relative.
#[pyfunction]
#[pyo3(signature = (k, etas, tol=1e-2))]
fn phase_diagram(py: Python<'_>, k: u32, etas: Vec<f64>, tol: f64) -> PyResult<Vec<(f64, Option<f64>)>> {
    let curve = py.detach(|| existence::phase_diagram(k, &etas, tol)).map_err(to_py)?;
    Ok(curve.points.into_iter().map(|p| (p.eta, p.xi_critical)).collect())
}

/// Null vectors of the single red-sideband system realizing `state`, one
/// dict per lattice with `residue`, `amplitudes`, `residual` and `null_dim`.
#[pyfunction]
#[pyo3(signature = (state, dim=None, tol=1e-14))]
fn dark_state<'py>(
    py: Python<'py>,
    state: &PyState,
    dim: Option<usize>,
    tol: f64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let Nonlinearity::TrappedIon { eta, .. } = *state.spec.f() else {
        return Err(PyValueError::new_err("dark_state needs a trapped-ion state"));
    };
    let spec = state.spec.clone();
    let set = py
        .detach(|| {
            let config = LaserConfig::for_state(&spec, eta)?;
            let dim = match dim {
                Some(d) => d,
                None => ion::suggested_dim(&spec, tol)?,
            };
            ion::dark_state(&config, dim)
        })
        .map_err(to_py)?;
    set.components
        .into_iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("residue", c.residue)?;
            d.set_item("amplitudes", c.vector.amplitudes)?;
            d.set_item("residual", c.residual)?;
            d.set_item("null_dim", c.null_dim)?;
            Ok(d)
        })
        .collect()
}

/// `(n, P(n))` of the mixed state prepared from a coherent state `|alpha|`.
#[pyfunction]
#[pyo3(signature = (k, alpha_mag, xi, eta=None, tol=1e-14))]
fn mixed_distribution(k: u32, alpha_mag: f64, xi: Complex64, eta: Option<f64>, tol: f64) -> PyResult<Vec<(usize, f64)>> {
    let mix = MixedSpec {
        k,
        alpha_mag,
        xi,
        f: nonlinearity(k, eta, None)?,
    };
    observables::mixed_distribution(&mix, tol).map_err(to_py)
}

#[pymodule]
fn kncs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(critical_xi, m)?)?;
    m.add_function(wrap_pyfunction!(phase_diagram, m)?)?;
    m.add_function(wrap_pyfunction!(dark_state, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_distribution, m)?)?;
    m.add("KncsError", m.py().get_type::<KncsError>())?;
    m.add("NonexistentStateError", m.py().get_type::<NonexistentStateError>())?;
    Ok(())
}
