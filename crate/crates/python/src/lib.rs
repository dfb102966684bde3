//! Python bindings for the `contagion` simulator.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use contagion::balance::{self, BalanceSheet, SheetConfig, SolvencyParams};
use contagion::cascade::{self, CascadeConfig, CascadeState, PhiMode};
use contagion::experiment::{self, SummaryStats, SweepConfig, SweepResult};
use contagion::netgen::{self, DirectedWeightedNetwork, NetworkConfig, WeightRule};
use contagion::spread::{self, Diffusion, DiffusionMode, DiffusionState};
use contagion::Error;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(name = "Network", frozen)]
struct PyNetwork {
    inner: DirectedWeightedNetwork,
}

#[pymethods]
impl PyNetwork {
    /// Build from `(source, target, weight)` triples.
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        let edges = edges.into_iter().map(|(source, target, weight)| netgen::Edge {
            source,
            target,
            weight,
        });
        Ok(Self {
            inner: DirectedWeightedNetwork::from_edges(n, edges).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_edge_list(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: netgen::read_edge_list(text.as_bytes()).map_err(to_py)?,
        })
    }

    fn to_edge_list(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        netgen::write_edge_list(&self.inner, &mut buf).map_err(to_py)?;
        Ok(String::from_utf8(buf).expect("edge list is ASCII"))
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner
            .edges()
            .map(|e| (e.source, e.target, e.weight))
            .collect()
    }

    fn weight(&self, source: usize, target: usize) -> Option<f64> {
        self.inner.weight(source, target)
    }

    fn degree_stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let stats = self.inner.degree_stats();
        let d = PyDict::new(py);
        d.set_item("in_degrees", stats.in_degrees.clone())?;
        d.set_item("out_degrees", stats.out_degrees.clone())?;
        d.set_item("total_degrees", stats.total_degrees.clone())?;
        d.set_item("z_av", stats.z_av)?;
        Ok(d)
    }

    fn local_clustering(&self, v: usize) -> PyResult<f64> {
        netgen::local_clustering(&self.inner, v).map_err(to_py)
    }

    fn average_clustering(&self) -> f64 {
        netgen::average_clustering(&self.inner)
    }

    fn average_path_length(&self) -> PyResult<f64> {
        netgen::average_path_length(&self.inner).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(n={}, edges={})",
            self.inner.node_count(),
            self.inner.edge_count()
        )
    }
}

/// Directed G(n, p) network. Weights are `Uniform(weight_lo, weight_hi)`,
/// or all 1.0 when `unit_weights` is set.
#[pyfunction]
#[pyo3(signature = (n, p, seed, weight_lo = 0.5, weight_hi = 1.5, unit_weights = false))]
fn generate(
    n: usize,
    p: f64,
    seed: u64,
    weight_lo: f64,
    weight_hi: f64,
    unit_weights: bool,
) -> PyResult<PyNetwork> {
    let rule = if unit_weights {
        WeightRule::Unit
    } else {
        WeightRule::Uniform {
            lo: weight_lo,
            hi: weight_hi,
        }
    };
    let cfg = NetworkConfig::new(n, p, seed).with_weights(rule);
    Ok(PyNetwork {
        inner: netgen::generate(&cfg).map_err(to_py)?,
    })
}

#[pyfunction]
fn link_count_pmf(n: u64, p: f64, links: u64) -> PyResult<f64> {
    netgen::link_count_pmf(n, p, links).map_err(to_py)
}

#[pyfunction]
fn degree_pmf_binomial(n: u64, p: f64, z: u64) -> PyResult<f64> {
    netgen::degree_pmf_binomial(n, p, z).map_err(to_py)
}

#[pyfunction]
fn degree_pmf_poisson(z_av: f64, z: u64) -> PyResult<f64> {
    netgen::degree_pmf_poisson(z_av, z).map_err(to_py)
}

#[pyfunction]
fn path_length_estimate(n: u64, z_av: f64) -> PyResult<f64> {
    netgen::path_length_estimate(n, z_av).map_err(to_py)
}

#[pyclass(name = "BalanceSheet", frozen, from_py_object)]
#[derive(Clone)]
struct PySheet {
    inner: BalanceSheet,
}

#[pymethods]
impl PySheet {
    #[new]
    fn new(a_ib: f64, a_m: f64, l_ib: f64, d: f64) -> Self {
        Self {
            inner: BalanceSheet::new(a_ib, a_m, l_ib, d),
        }
    }

    #[getter]
    fn a_ib(&self) -> f64 {
        self.inner.a_ib
    }

    #[getter]
    fn a_m(&self) -> f64 {
        self.inner.a_m
    }

    #[getter]
    fn l_ib(&self) -> f64 {
        self.inner.l_ib
    }

    #[getter]
    fn d(&self) -> f64 {
        self.inner.d
    }

    fn capital_buffer(&self) -> f64 {
        self.inner.capital_buffer()
    }

    fn is_solvent(&self) -> bool {
        self.inner.is_solvent()
    }

    #[pyo3(signature = (phi, q = 1.0))]
    fn is_solvent_general(&self, phi: f64, q: f64) -> PyResult<bool> {
        let params = SolvencyParams::new(phi, q).map_err(to_py)?;
        Ok(self.inner.is_solvent_general(params))
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!(
            "BalanceSheet(a_ib={}, a_m={}, l_ib={}, d={})",
            s.a_ib, s.a_m, s.l_ib, s.d
        )
    }
}

/// Default sheets: external assets scaled to interbank assets, residual
/// deposits leaving `margin` of total assets as capital.
#[pyfunction]
#[pyo3(signature = (network, seed, margin = balance::DEFAULT_BUFFER_MARGIN))]
fn build_sheets(network: &PyNetwork, seed: u64, margin: f64) -> PyResult<Vec<PySheet>> {
    let cfg = SheetConfig {
        target_buffer_margin: margin,
        ..SheetConfig::default()
    };
    Ok(balance::build_sheets(&network.inner, &cfg, seed)
        .map_err(to_py)?
        .into_iter()
        .map(|inner| PySheet { inner })
        .collect())
}

fn phi_mode(name: &str) -> PyResult<PhiMode> {
    match name {
        "weight" => Ok(PhiMode::Weight),
        "count" => Ok(PhiMode::Count),
        other => Err(PyValueError::new_err(format!(
            "phi_mode must be 'weight' or 'count', got {other:?}"
        ))),
    }
}

/// Shock `shock` and propagate to a fixed point. Returns a dict with
/// `defaulted`, `rounds`, `percent_solvent` and `timeline`.
#[pyfunction]
#[pyo3(signature = (network, sheets, shock, recovery_rate = 0.0, q = 1.0, phi_mode = "weight"))]
fn run_cascade<'py>(
    py: Python<'py>,
    network: &PyNetwork,
    sheets: Vec<PySheet>,
    shock: Vec<usize>,
    recovery_rate: f64,
    q: f64,
    phi_mode: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = CascadeConfig {
        recovery_rate,
        q,
        phi_mode: self::phi_mode(phi_mode)?,
    };
    let sheets = sheets.into_iter().map(|s| s.inner).collect();
    let mut state = CascadeState::new(&network.inner, sheets, cfg).map_err(to_py)?;
    state.apply_initial_shock(&shock).map_err(to_py)?;
    let result = state.run_cascade();
    let d = PyDict::new(py);
    d.set_item("defaulted", result.defaulted)?;
    d.set_item("rounds", result.rounds)?;
    d.set_item("percent_solvent", result.percent_solvent)?;
    d.set_item("timeline", state.timeline().to_vec())?;
    Ok(d)
}

#[pyfunction]
fn draw_shock(n: usize, count: usize, seed: u64) -> PyResult<Vec<usize>> {
    cascade::draw_shock(n, count, seed).map_err(to_py)
}

#[pyclass(name = "SweepResult", frozen)]
struct PySweepResult {
    inner: SweepResult,
}

fn summary_dict<'py>(py: Python<'py>, s: &SummaryStats) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (name, value) in s.rows() {
        d.set_item(name, value)?;
    }
    Ok(d)
}

#[pymethods]
impl PySweepResult {
    #[getter]
    fn probabilities(&self) -> Vec<f64> {
        self.inner.probabilities()
    }

    #[getter]
    fn means(&self) -> Vec<f64> {
        self.inner.means()
    }

    /// Per grid point: `(p, mean, std, min, max, values)`.
    fn points(&self) -> Vec<(f64, f64, f64, f64, f64, Vec<f64>)> {
        self.inner
            .points
            .iter()
            .map(|g| (g.p, g.mean, g.std, g.min, g.max, g.values.clone()))
            .collect()
    }

    fn summarize<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = experiment::summarize(&self.inner).map_err(to_py)?;
        summary_dict(py, &s)
    }

    fn correlation(&self) -> PyResult<f64> {
        experiment::correlation(&self.inner).map_err(to_py)
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        experiment::write_sweep_csv(&self.inner, &mut buf).map_err(to_py)?;
        Ok(String::from_utf8(buf).expect("CSV is ASCII"))
    }
}

#[pyfunction]
#[pyo3(signature = (
    p_min = 0.04, p_max = 0.10, grid_points = 15, iterations = 10, seed = 42,
    n_banks = 100, n_shocked = 15, recovery_rate = 0.0, q = 1.0,
    margin = balance::DEFAULT_BUFFER_MARGIN, fixed_network = false, phi_mode = "weight"
))]
#[allow(clippy::too_many_arguments)]
fn run_sweep(
    py: Python<'_>,
    p_min: f64,
    p_max: f64,
    grid_points: usize,
    iterations: usize,
    seed: u64,
    n_banks: usize,
    n_shocked: usize,
    recovery_rate: f64,
    q: f64,
    margin: f64,
    fixed_network: bool,
    phi_mode: &str,
) -> PyResult<PySweepResult> {
    let mut cfg = SweepConfig {
        n_banks,
        n_shocked,
        p_min,
        p_max,
        grid_points,
        iterations,
        master_seed: seed,
        fixed_network,
        ..SweepConfig::default()
    };
    cfg.sheet_config.target_buffer_margin = margin;
    cfg.cascade = CascadeConfig {
        recovery_rate,
        q,
        phi_mode: self::phi_mode(phi_mode)?,
    };
    let inner = py
        .detach(|| experiment::run_sweep(&cfg))
        .map_err(to_py)?;
    Ok(PySweepResult { inner })
}

/// Welch t-test on grid-point means.
#[pyfunction]
fn compare_sweeps<'py>(
    py: Python<'py>,
    a: &PySweepResult,
    b: &PySweepResult,
) -> PyResult<Bound<'py, PyDict>> {
    let r = experiment::compare_sweeps(&a.inner, &b.inner).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("mean_difference", r.mean_difference)?;
    d.set_item("t_statistic", r.t_statistic)?;
    d.set_item("degrees_of_freedom", r.degrees_of_freedom)?;
    d.set_item("p_value", r.p_value)?;
    d.set_item("significant", r.significant)?;
    Ok(d)
}

#[pyfunction]
fn summarize<'py>(py: Python<'py>, values: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    summary_dict(py, &SummaryStats::of(&values).map_err(to_py)?)
}

/// One explicit-Euler diffusion step on the undirected projection.
#[pyfunction]
#[pyo3(signature = (network, phi, c_dt, weighted = false))]
fn diffusion_step(network: &PyNetwork, phi: Vec<f64>, c_dt: f64, weighted: bool) -> PyResult<Vec<f64>> {
    let mode = if weighted {
        DiffusionMode::Weighted
    } else {
        DiffusionMode::Unweighted
    };
    let next = Diffusion::new(&network.inner, mode)
        .step(&DiffusionState::new(phi, c_dt))
        .map_err(to_py)?;
    Ok(next.phi)
}

#[pyfunction]
fn transition_matrix(network: &PyNetwork) -> Vec<Vec<f64>> {
    spread::transition_matrix(&network.inner).to_dense()
}

#[pyfunction]
fn random_walk(network: &PyNetwork, start: usize, steps: usize, seed: u64) -> PyResult<Vec<usize>> {
    spread::random_walk(&network.inner, start, steps, seed).map_err(to_py)
}

#[pyfunction]
fn lattice_walk_3d(walkers: usize, steps: usize, seed: u64) -> PyResult<Vec<Vec<(i64, i64, i64)>>> {
    let paths = spread::lattice_walk_3d(walkers, steps, seed).map_err(to_py)?;
    Ok(paths
        .into_iter()
        .map(|path| path.into_iter().map(|[x, y, z]| (x, y, z)).collect())
        .collect())
}

#[pymodule]
fn pycontagion(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetwork>()?;
    m.add_class::<PySheet>()?;
    m.add_class::<PySweepResult>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(link_count_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(degree_pmf_binomial, m)?)?;
    m.add_function(wrap_pyfunction!(degree_pmf_poisson, m)?)?;
    m.add_function(wrap_pyfunction!(path_length_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(build_sheets, m)?)?;
    m.add_function(wrap_pyfunction!(run_cascade, m)?)?;
    m.add_function(wrap_pyfunction!(draw_shock, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(compare_sweeps, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(diffusion_step, m)?)?;
    m.add_function(wrap_pyfunction!(transition_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(random_walk, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_walk_3d, m)?)?;
    m.add("DEFAULT_BUFFER_MARGIN", balance::DEFAULT_BUFFER_MARGIN)?;
    Ok(())
}
