//! Python bindings: torus specs, polyvector forms, the DGLA operations,
//! the functional and its variation, critical-point search and the check suite.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use kstorus::exterior::BasisLabel;
use kstorus::functional::{self, Variant};
use kstorus::hodge;
use kstorus::json;
use kstorus::omega;
use kstorus::report::reports_to_json;
use kstorus::search::{self, SearchConfig};
use kstorus::verify::{self, VerifyConfig};
use kstorus::{Complex64, Error, FourierScalar, Freq};

fn err(e: Error) -> PyErr {
    match e {
        Error::NumericFailure { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(frozen, eq, hash, skip_from_py_object, name = "TorusSpec", module = "kstorus")]
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct PySpec(kstorus::TorusSpec);

#[pymethods]
impl PySpec {
    #[new]
    #[pyo3(signature = (n, k))]
    fn new(n: usize, k: usize) -> PyResult<Self> {
        kstorus::TorusSpec::new(n, k).map(PySpec).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter(K)]
    fn k(&self) -> usize {
        self.0.k
    }

    fn mode_count(&self) -> usize {
        self.0.mode_count()
    }

    fn __repr__(&self) -> String {
        format!("TorusSpec(n={}, K={})", self.0.n, self.0.k)
    }
}

/// Element of the polyvector-valued forms, with Fourier coefficients.
#[pyclass(frozen, from_py_object, name = "PolyvectorForm", module = "kstorus")]
#[derive(Clone)]
struct PyForm(kstorus::PolyvectorForm);

fn form(x: kstorus::PolyvectorForm) -> PyForm {
    PyForm(x)
}

#[pymethods]
impl PyForm {
    #[staticmethod]
    fn zero(spec: &PySpec) -> Self {
        form(kstorus::PolyvectorForm::zero(spec.0))
    }

    /// value · e^{2πi(a·x + b·y)} on the label (I, J); a, b default to 0.
    #[staticmethod]
    #[pyo3(signature = (spec, i, j, value, a=None, b=None))]
    fn monomial(
        spec: &PySpec,
        i: Vec<usize>,
        j: Vec<usize>,
        value: Complex64,
        a: Option<Vec<i32>>,
        b: Option<Vec<i32>>,
    ) -> PyResult<Self> {
        let n = spec.0.n;
        let label = BasisLabel::from_indices(&i, &j, n).map_err(err)?;
        let freq = Freq::new(a.unwrap_or(vec![0; n]), b.unwrap_or(vec![0; n]));
        if freq.a.len() != n || freq.b.len() != n {
            return Err(PyValueError::new_err(format!("frequency vectors need length {n}")));
        }
        let f = FourierScalar::mode(spec.0, &freq, value).map_err(err)?;
        Ok(form(kstorus::PolyvectorForm::monomial(label, f)))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        json::form_from_value(v).map(form).map_err(err)
    }

    fn to_json(&self) -> String {
        json::to_string(&json::form_to_json(&self.0))
    }

    #[getter]
    fn spec(&self) -> PySpec {
        PySpec(self.0.spec())
    }

    /// Shifted degree if homogeneous and nonzero.
    fn degree(&self) -> Option<i32> {
        self.0.homogeneous_degree()
    }

    fn bidegrees(&self) -> Vec<(usize, usize)> {
        self.0.bidegrees()
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn project_bidegree(&self, p: usize, q: usize) -> Self {
        form(self.0.project_bidegree(p, q))
    }

    fn wedge(&self, other: &PyForm) -> PyResult<Self> {
        self.0.wedge(&other.0).map(form).map_err(err)
    }

    fn bracket(&self, other: &PyForm) -> PyResult<Self> {
        self.0.bracket(&other.0).map(form).map_err(err)
    }

    fn dbar(&self) -> PyResult<Self> {
        omega::dbar_j(&self.0).map(form).map_err(err)
    }

    fn delta(&self) -> PyResult<Self> {
        omega::delta_j(&self.0).map(form).map_err(err)
    }

    fn delta_inverse(&self) -> PyResult<Self> {
        hodge::delta_inverse(&self.0).map(form).map_err(err)
    }

    fn project_ker(&self) -> PyResult<Self> {
        hodge::project_ker_delta(&self.0).map(form).map_err(err)
    }

    fn __add__(&self, other: &PyForm) -> PyResult<Self> {
        self.0.add(&other.0).map(form).map_err(err)
    }

    fn __sub__(&self, other: &PyForm) -> PyResult<Self> {
        self.0.sub(&other.0).map(form).map_err(err)
    }

    fn __mul__(&self, s: Complex64) -> Self {
        form(self.0.scale(s))
    }

    fn __rmul__(&self, s: Complex64) -> Self {
        form(self.0.scale(s))
    }

    fn __neg__(&self) -> Self {
        form(self.0.scale_re(-1.0))
    }

    fn __repr__(&self) -> String {
        let s = self.0.spec();
        format!("PolyvectorForm(n={}, K={}, labels={}, norm={:.6e})", s.n, s.k, self.0.terms().len(), self.0.norm())
    }
}

fn variant(name: &str) -> PyResult<Variant> {
    name.parse().map_err(err)
}

/// Random element of ker Δ_J with L² norm `magnitude`.
#[pyfunction]
fn sample_ker_delta(spec: &PySpec, seed: u64, magnitude: f64) -> PyResult<PyForm> {
    hodge::sample_ker_delta(spec.0, seed, magnitude).map(form).map_err(err)
}

#[pyfunction]
fn pairing(x: &PyForm, y: &PyForm) -> PyResult<Complex64> {
    functional::pairing(&x.0, &y.0).map_err(err)
}

#[pyfunction]
fn integrate(x: &PyForm) -> Complex64 {
    functional::integrate(&x.0)
}

#[pyfunction]
fn tian_todorov_residual(x: &PyForm, y: &PyForm) -> PyResult<PyForm> {
    omega::tian_todorov_residual(&x.0, &y.0).map(form).map_err(err)
}

#[pyfunction]
fn phi(g: &PyForm) -> PyResult<Complex64> {
    functional::phi(&g.0).map_err(err)
}

#[pyfunction]
fn first_variation(g: &PyForm, direction: &PyForm) -> PyResult<Complex64> {
    functional::first_variation(&g.0, &direction.0).map_err(err)
}

/// d/dt Φ(γ + tβ) at 0 from exact cubic interpolation.
#[pyfunction]
fn variation_oracle(g: &PyForm, direction: &PyForm) -> PyResult<Complex64> {
    functional::variation_oracle(&g.0, &direction.0).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (g, variant="statement", restriction=None))]
fn el_residual_norm(g: &PyForm, variant: &str, restriction: Option<Vec<(usize, usize)>>) -> PyResult<f64> {
    functional::el_residual_norm(&g.0, self::variant(variant)?, restriction.as_deref()).map_err(err)
}

#[pyfunction]
fn mc_residual(g: &PyForm) -> PyResult<PyForm> {
    functional::mc_residual(&g.0).map(form).map_err(err)
}

/// Power-series coefficients of the extended functional; both arguments are
/// lists of forms (coefficients of t^0, t^1, ...).
#[pyfunction]
fn phi_powerseries(gamma_hat: Vec<PyForm>, alpha: Vec<PyForm>) -> PyResult<Vec<Complex64>> {
    let poly = |v: Vec<PyForm>| -> PyResult<functional::TPolynomial> {
        let spec = v.first().ok_or_else(|| PyValueError::new_err("empty coefficient list"))?.0.spec();
        functional::TPolynomial::new(spec, v.into_iter().map(|x| x.0).collect()).map_err(err)
    };
    functional::phi_powerseries(&poly(gamma_hat)?, &poly(alpha)?).map_err(err)
}

#[pyclass(frozen, get_all, name = "SearchResult", module = "kstorus")]
struct PySearchResult {
    gamma: PyForm,
    residual_norm: f64,
    iters: usize,
    converged: bool,
    phi_value: Complex64,
    el_residual: f64,
}

#[pymethods]
impl PySearchResult {
    fn __repr__(&self) -> String {
        format!(
            "SearchResult(converged={}, iters={}, residual_norm={:.3e}, el_residual={:.3e})",
            self.converged, self.iters, self.residual_norm, self.el_residual
        )
    }
}

#[pyfunction]
#[pyo3(signature = (start, tol=1e-9, max_iters=500, step=1.0, variant="statement", restriction=None))]
fn find_critical_point(
    py: Python<'_>,
    start: &PyForm,
    tol: f64,
    max_iters: usize,
    step: f64,
    variant: &str,
    restriction: Option<Vec<(usize, usize)>>,
) -> PyResult<PySearchResult> {
    let cfg = SearchConfig { max_iters, step, tol, seed: 0, degree_restriction: restriction, variant: self::variant(variant)? };
    let start = start.0.clone();
    let r = py.detach(|| search::find_critical_point(&cfg, &start)).map_err(err)?;
    Ok(PySearchResult {
        gamma: form(r.gamma),
        residual_norm: r.residual_norm,
        iters: r.iters,
        converged: r.converged,
        phi_value: r.phi_value,
        el_residual: r.el_residual,
    })
}

#[pyfunction]
fn check_names() -> Vec<&'static str> {
    verify::check_names()
}

/// Run the check suite; returns the report array as JSON text.
#[pyfunction]
fn verify_json(py: Python<'_>, spec: &PySpec, seed: u64) -> String {
    let cfg = VerifyConfig { spec: spec.0, seed };
    let reports = py.detach(|| verify::run_suite(&cfg));
    json::to_string(&reports_to_json(&reports))
}

#[pymodule(name = "kstorus")]
fn kstorus_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpec>()?;
    m.add_class::<PyForm>()?;
    m.add_class::<PySearchResult>()?;
    m.add_function(wrap_pyfunction!(sample_ker_delta, m)?)?;
    m.add_function(wrap_pyfunction!(pairing, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(tian_todorov_residual, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(first_variation, m)?)?;
    m.add_function(wrap_pyfunction!(variation_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(el_residual_norm, m)?)?;
    m.add_function(wrap_pyfunction!(mc_residual, m)?)?;
    m.add_function(wrap_pyfunction!(phi_powerseries, m)?)?;
    m.add_function(wrap_pyfunction!(find_critical_point, m)?)?;
    m.add_function(wrap_pyfunction!(check_names, m)?)?;
    m.add_function(wrap_pyfunction!(verify_json, m)?)?;
    Ok(())
}
