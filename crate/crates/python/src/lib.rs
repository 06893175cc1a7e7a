//! Python bindings: `Frame` wraps a window with its magnetic parameters.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use frame_lr::fock_sim::{lr_check, LrConfig};
use frame_lr::frame_analysis::{frame_bounds_one, gram, neumann_certificate, CertificateTuning, DEFAULT_MARGIN};
use frame_lr::interactions::{c_phi, density_density, lr_velocity, ZFamily};
use frame_lr::lattice::{m_epsilon, LatticeParams, Site, Window};
use frame_lr::magnetic_frame::{self, bessel_bound, MagneticParams};
use frame_lr::Complex64;

type Triple = (u32, i64, i64);

fn err(e: frame_lr::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn site(t: Triple) -> Site {
    Site::new(t.0, t.1, t.2)
}

#[pyclass(name = "Frame", frozen)]
struct PyFrame {
    window: Window,
    params: MagneticParams,
}

impl PyFrame {
    fn build(window: Window, ell_b: f64) -> PyResult<Self> {
        let params = MagneticParams::for_window(&window, ell_b).map_err(err)?;
        Ok(PyFrame { window, params })
    }

    fn rates(&self, zeta: Option<f64>, xi: Option<f64>) -> (f64, f64) {
        (zeta.unwrap_or(self.params.varpi() / 2.0), xi.unwrap_or(self.params.varpi()))
    }
}

#[pymethods]
impl PyFrame {
    #[new]
    #[pyo3(signature = (sites, alpha, beta=None, ell_b=1.0))]
    fn new(sites: Vec<Triple>, alpha: f64, beta: Option<f64>, ell_b: f64) -> PyResult<Self> {
        let lat = LatticeParams::new(alpha, beta.unwrap_or(alpha), 0, 0.0).map_err(err)?;
        let window = Window::from_sites(lat, sites.into_iter().map(site)).map_err(err)?;
        Self::build(window, ell_b)
    }

    /// Square window `|i|, |j| <= radius` on levels `0..=level_max`.
    #[staticmethod]
    #[pyo3(signature = (alpha, radius, level_max=0, beta=None, ell_b=1.0))]
    fn square(alpha: f64, radius: f64, level_max: u32, beta: Option<f64>, ell_b: f64) -> PyResult<Self> {
        let lat = LatticeParams::new(alpha, beta.unwrap_or(alpha), level_max, radius).map_err(err)?;
        Self::build(Window::square(lat).map_err(err)?, ell_b)
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.params.delta()
    }

    #[getter]
    fn regime(&self) -> String {
        self.params.regime().to_string()
    }

    #[getter]
    fn laguerre_trunc(&self) -> usize {
        self.params.laguerre_trunc
    }

    fn __len__(&self) -> usize {
        self.window.len()
    }

    fn sites(&self) -> Vec<Triple> {
        self.window.sites().iter().map(|s| (s.r, s.i, s.j)).collect()
    }

    fn gram(&self) -> Vec<Vec<Complex64>> {
        let g = gram(&self.window, &self.params).entries;
        (0..g.nrows()).map(|i| (0..g.ncols()).map(|j| g[(i, j)]).collect()).collect()
    }

    fn bessel_bound(&self) -> f64 {
        bessel_bound(&self.params)
    }

    #[pyo3(signature = (margin=DEFAULT_MARGIN))]
    fn frame_bounds<'py>(&self, py: Python<'py>, margin: f64) -> PyResult<Bound<'py, PyDict>> {
        let b = frame_bounds_one(&self.window, self.params.ell_b, margin).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("a_est", b.a_est)?;
        d.set_item("b_est", b.b_est)?;
        d.set_item("gram_min_retained", b.gram_min_retained)?;
        d.set_item("numerical_rank", b.numerical_rank)?;
        d.set_item("ill_conditioned", b.ill_conditioned)?;
        Ok(d)
    }

    /// Neumann-series decay certificate for `S^{-p}`.
    #[pyo3(signature = (p=1, margin=DEFAULT_MARGIN))]
    fn certificate<'py>(&self, py: Python<'py>, p: u32, margin: f64) -> PyResult<Bound<'py, PyDict>> {
        let tuning = CertificateTuning::magnetic(&self.params);
        let s_min = frame_bounds_one(&self.window, self.params.ell_b, margin).map_err(err)?.a_est;
        let m_eps = m_epsilon(&self.window, tuning.eps).map_err(err)?.closed_form_bound;
        let c = neumann_certificate(&tuning, s_min, bessel_bound(&self.params), p, m_eps).map_err(err)?;
        let d = PyDict::new(py);
        for (k, v) in [
            ("s_min", c.s_min),
            ("s_max", c.s_max),
            ("r_p", c.r_p),
            ("d_p", c.d_p),
            ("lambda_p", c.lambda_p),
            ("a_p", c.a_p),
        ] {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    /// `C_Phi` of the density-density interaction and the resulting velocity.
    #[pyo3(signature = (f0=1.0, mu=1.0, zeta=None, xi=None))]
    fn c_phi<'py>(
        &self,
        py: Python<'py>,
        f0: f64,
        mu: f64,
        zeta: Option<f64>,
        xi: Option<f64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let (zeta, xi) = self.rates(zeta, xi);
        let inter = density_density(f0, mu, &self.window).map_err(err)?;
        let c = c_phi(&inter, zeta, xi, &self.window, ZFamily::Balls { radius_cap: None }).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("c_phi", c.value)?;
        d.set_item("velocity", lr_velocity(c.value, 1.0, zeta).map_err(err)?)?;
        d.set_item("family_size", c.family_size)?;
        Ok(d)
    }

    /// Exact dynamics against the Lieb-Robinson bound; returns the summary and the CSV.
    #[pyo3(signature = (f0=1.0, mu=1.0, zeta=None, xi=None, t_max=2.0, n_t=11, v_scale=1.0))]
    #[allow(clippy::too_many_arguments)]
    fn lr_check<'py>(
        &self,
        py: Python<'py>,
        f0: f64,
        mu: f64,
        zeta: Option<f64>,
        xi: Option<f64>,
        t_max: f64,
        n_t: usize,
        v_scale: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let (zeta, xi) = self.rates(zeta, xi);
        let inter = density_density(f0, mu, &self.window).map_err(err)?;
        let cfg = LrConfig::new(1.0, zeta, xi, LrConfig::uniform_times(t_max, n_t));
        let (window, params) = (&self.window, &self.params);
        let rep = py
            .detach(|| lr_check(window, params, &inter, &cfg))
            .map_err(err)?
            .with_v_scale(v_scale);
        let d = PyDict::new(py);
        d.set_item("passed", rep.passed())?;
        d.set_item("rows", rep.rows.len())?;
        d.set_item("exceedances", rep.exceedances().len())?;
        d.set_item("max_ratio", rep.max_ratio())?;
        d.set_item("c_phi", rep.c_phi.value)?;
        d.set_item("v", rep.v)?;
        d.set_item("v_used", rep.v_used)?;
        d.set_item("critical_scale", rep.critical_scale())?;
        d.set_item("csv", rep.to_csv())?;
        Ok(d)
    }
}

/// `<chi_a, chi_b>` for sites given as `(r, i, j)`.
#[pyfunction]
#[pyo3(signature = (a, b, alpha, beta=None, ell_b=1.0))]
fn overlap(a: Triple, b: Triple, alpha: f64, beta: Option<f64>, ell_b: f64) -> PyResult<Complex64> {
    let p = MagneticParams::new(ell_b, alpha, beta.unwrap_or(alpha), 0).map_err(err)?;
    Ok(magnetic_frame::overlap(&site(a), &site(b), &p))
}

/// `theta_3(0 | i tau)`.
#[pyfunction]
fn theta3(tau: f64) -> PyResult<f64> {
    magnetic_frame::theta3(tau).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (alpha, beta=None, ell_b=1.0))]
fn regime(alpha: f64, beta: Option<f64>, ell_b: f64) -> PyResult<String> {
    let p = MagneticParams::new(ell_b, alpha, beta.unwrap_or(alpha), 0).map_err(err)?;
    Ok(p.regime().to_string())
}

#[pymodule]
fn frame_lr_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFrame>()?;
    m.add_function(wrap_pyfunction!(overlap, m)?)?;
    m.add_function(wrap_pyfunction!(theta3, m)?)?;
    m.add_function(wrap_pyfunction!(regime, m)?)?;
    Ok(())
}
