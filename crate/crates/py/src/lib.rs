//! Python bindings: load grids and days, attribute cost, score tail risk,
//! and compare commitment policies.

use std::path::PathBuf;

use chrono::NaiveDate;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use gridrisk::attribution::{attribute_day, AttributionReport, QuadratureConfig};
use gridrisk::dispatch::commit_day;
use gridrisk::grid::{load_day_data, load_grid, parse_grid, write_grid, DayData, DayPaths, GridSpec};
use gridrisk::risk::{build_adjustments, AdjustedCapacities, AdjustmentParams, RiskConfig, TailMean};
use gridrisk::simulator::{compare_policies, run_range, Comparison, PolicyConfig, ScenarioSpec};
use gridrisk::tutorial::{tutorial_day, tutorial_grid, DayShape};
use gridrisk::Error;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io { .. } => PyOSError::new_err(err.to_string()),
        Error::Solve(_) | Error::Model(_) => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn parse_date(s: &str) -> PyResult<NaiveDate> {
    s.parse()
        .map_err(|_| PyValueError::new_err(format!("bad date '{s}' (want YYYY-MM-DD)")))
}

fn quadrature(qmax: usize, qtol: f64) -> QuadratureConfig {
    QuadratureConfig {
        max_nodes: qmax,
        rel_threshold: qtol,
        ..QuadratureConfig::default()
    }
}

#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyGrid {
    inner: GridSpec,
}

#[pymethods]
impl PyGrid {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        load_grid(path).map(|inner| PyGrid { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        parse_grid(text, "<string>")
            .map(|inner| PyGrid { inner })
            .map_err(to_py)
    }

    /// The bundled 5-bus system.
    #[staticmethod]
    fn tutorial() -> Self {
        PyGrid { inner: tutorial_grid() }
    }

    fn with_reserve_factor(&self, reserve_factor: f64) -> PyResult<Self> {
        self.inner
            .with_reserve_factor(reserve_factor)
            .map(|inner| PyGrid { inner })
            .map_err(to_py)
    }

    #[getter]
    fn reserve_factor(&self) -> f64 {
        self.inner.reserve_factor
    }

    #[getter]
    fn bus_ids(&self) -> Vec<String> {
        self.inner.buses.iter().map(|b| b.id.clone()).collect()
    }

    #[getter]
    fn generator_ids(&self) -> Vec<String> {
        self.inner.dispatchables.iter().map(|g| g.id.clone()).collect()
    }

    #[getter]
    fn renewable_ids(&self) -> Vec<String> {
        self.inner.renewables.iter().map(|r| r.id.clone()).collect()
    }

    #[getter]
    fn load_ids(&self) -> Vec<String> {
        self.inner.loads.iter().map(|l| l.id.clone()).collect()
    }

    fn to_text(&self) -> String {
        write_grid(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(buses={}, lines={}, generators={}, renewables={}, loads={})",
            self.inner.buses.len(),
            self.inner.lines.len(),
            self.inner.dispatchables.len(),
            self.inner.renewables.len(),
            self.inner.loads.len()
        )
    }
}

#[pyclass(name = "Day", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyDay {
    inner: DayData,
}

#[pymethods]
impl PyDay {
    /// Reads the four series files from `dir`.
    #[staticmethod]
    #[pyo3(signature = (grid, dir, h = 1))]
    fn load(grid: &PyGrid, dir: PathBuf, h: usize) -> PyResult<Self> {
        load_day_data(&grid.inner, &DayPaths::in_dir(dir), h)
            .map(|inner| PyDay { inner })
            .map_err(to_py)
    }

    /// Generated tutorial day; `shape` is one of `identical`, `accurate`,
    /// `wind_over_forecast`, `single_shortfall`.
    #[staticmethod]
    #[pyo3(signature = (grid, date, shape = "accurate", h = 1))]
    fn tutorial(grid: &PyGrid, date: &str, shape: &str, h: usize) -> PyResult<Self> {
        let shape = match shape {
            "identical" => DayShape::Identical,
            "accurate" => DayShape::Accurate,
            "wind_over_forecast" => DayShape::WindOverForecast,
            "single_shortfall" => DayShape::SingleShortfall,
            _ => return Err(PyValueError::new_err(format!("unknown day shape '{shape}'"))),
        };
        Ok(PyDay {
            inner: tutorial_day(&grid.inner, parse_date(date)?, shape, h),
        })
    }

    #[getter]
    fn date(&self) -> String {
        self.inner.date.to_string()
    }

    /// `[hour][load]` forecast demand.
    #[getter]
    fn forecast_demand(&self) -> Vec<Vec<f64>> {
        self.inner.forecast.demand.clone()
    }

    /// `[hour][renewable]` forecast capacity.
    #[getter]
    fn forecast_capacity(&self) -> Vec<Vec<f64>> {
        self.inner.forecast.capacity.clone()
    }

    #[getter]
    fn actual_demand(&self) -> Vec<Vec<f64>> {
        self.inner.actual.demand.clone()
    }

    #[getter]
    fn actual_capacity(&self) -> Vec<Vec<f64>> {
        self.inner.actual.capacity.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Day('{}', forecast_hours={})",
            self.inner.date,
            self.inner.forecast.hours()
        )
    }
}

#[pyclass(name = "AttributionReport", frozen)]
pub struct PyReport {
    inner: AttributionReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn relative_efficiency_gap(&self) -> f64 {
        self.inner.relative_efficiency_gap
    }

    #[getter]
    fn asset_ids(&self) -> Vec<String> {
        self.inner.assets.iter().map(|a| a.id.clone()).collect()
    }

    #[getter]
    fn asset_classes(&self) -> Vec<&'static str> {
        self.inner.assets.iter().map(|a| a.class.as_str()).collect()
    }

    /// `[hour][asset]` attributed cost.
    #[getter]
    fn attribution(&self) -> Vec<Vec<f64>> {
        self.inner.hours.iter().map(|h| h.attribution.clone()).collect()
    }

    /// Per-hour residual `C_act - C_fcst - sum(attribution)`.
    #[getter]
    fn gaps(&self) -> Vec<f64> {
        self.inner.hours.iter().map(|h| h.gap).collect()
    }

    #[getter]
    fn nodes(&self) -> Vec<usize> {
        self.inner.hours.iter().map(|h| h.nodes).collect()
    }

    fn asset_totals(&self) -> Vec<f64> {
        self.inner.asset_totals()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn summary_json(&self) -> String {
        self.inner.summary_json().to_string()
    }
}

#[pyclass(name = "Adjustments", frozen)]
pub struct PyAdjustments {
    inner: AdjustedCapacities,
}

#[pymethods]
impl PyAdjustments {
    #[getter]
    fn worst_set(&self) -> Vec<usize> {
        self.inner.table.worst_set.clone()
    }

    #[getter]
    fn scenario_costs(&self) -> Vec<f64> {
        self.inner.scenario_costs.clone()
    }

    /// `[hour][renewable]` tail-mean attribution.
    #[getter]
    fn scores(&self) -> Vec<Vec<f64>> {
        self.inner.table.score.clone()
    }

    /// `[hour][renewable]` adjusted capacity for the real-time hours.
    #[getter]
    fn adjusted_capacity(&self) -> Vec<Vec<f64>> {
        self.inner.q_adj.clone()
    }

    fn max_fraction(&self) -> f64 {
        self.inner.max_fraction()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }
}

#[pyclass(name = "Comparison", frozen)]
pub struct PyComparison {
    inner: Comparison,
}

#[pymethods]
impl PyComparison {
    #[getter]
    fn policies(&self) -> Vec<String> {
        self.inner.runs.iter().map(|r| r.policy.name.clone()).collect()
    }

    fn total_cost(&self) -> Vec<f64> {
        self.inner.runs.iter().map(|r| r.total_cost()).collect()
    }

    fn total_shed(&self) -> Vec<f64> {
        self.inner.runs.iter().map(|r| r.total_shed()).collect()
    }

    fn cost_csv(&self) -> String {
        self.inner.cost_csv()
    }

    fn shed_csv(&self) -> String {
        self.inner.shed_csv()
    }

    fn write(&self, dir: PathBuf) -> PyResult<()> {
        std::fs::create_dir_all(&dir).map_err(|e| PyOSError::new_err(e.to_string()))?;
        self.inner.write(dir).map_err(to_py)
    }
}

/// Attributes a day's forecast-error cost to every asset, hour by hour.
#[pyfunction]
#[pyo3(signature = (grid, day, qmax = 4096, qtol = 0.05, h = 1))]
fn attribute(py: Python<'_>, grid: &PyGrid, day: &PyDay, qmax: usize, qtol: f64, h: usize) -> PyResult<PyReport> {
    let (g, d) = (&grid.inner, &day.inner);
    py.detach(|| {
        let (commit, start) = commit_day(g, &d.forecast, None, None);
        attribute_day(g, &commit, &d.forecast, &d.actual, &start, h, &quadrature(qmax, qtol))
    })
    .map(|inner| PyReport { inner })
    .map_err(to_py)
}

/// Scores synthetic tail scenarios and returns the capacity adjustments.
#[pyfunction]
#[pyo3(signature = (
    grid, day, k = 1000, alpha = 0.05, rel_sigma = 0.3, seed = 7, r_low = 20.0, r_high = 200.0,
    tail_mean = "k", qmax = 4096, qtol = 0.05, h = 1
))]
#[allow(clippy::too_many_arguments)]
fn risk(
    py: Python<'_>,
    grid: &PyGrid,
    day: &PyDay,
    k: usize,
    alpha: f64,
    rel_sigma: f64,
    seed: u64,
    r_low: f64,
    r_high: f64,
    tail_mean: &str,
    qmax: usize,
    qtol: f64,
    h: usize,
) -> PyResult<PyAdjustments> {
    let cfg = RiskConfig {
        alpha,
        params: AdjustmentParams::new(r_low, r_high).map_err(to_py)?,
        tail_mean: tail_mean.parse::<TailMean>().map_err(to_py)?,
        quadrature: quadrature(qmax, qtol),
        h,
    };
    let (g, d) = (&grid.inner, &day.inner);
    py.detach(|| {
        let set = ScenarioSpec { k, rel_sigma, seed }.for_day(d)?;
        build_adjustments(g, d, &set, &cfg, None)
    })
    .map(|inner| PyAdjustments { inner })
    .map_err(to_py)
}

/// Simulates consecutive days under each policy in `policies`
/// (`rn:<reserve>` or `ra:<r_high>[:<r_low>]`, comma separated).
#[pyfunction]
#[pyo3(signature = (grid, days, policies, k = 100, alpha = 0.05, rel_sigma = 0.3, seed = 7, h = 1))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    grid: &PyGrid,
    days: Vec<PyDay>,
    policies: &str,
    k: usize,
    alpha: f64,
    rel_sigma: f64,
    seed: u64,
    h: usize,
) -> PyResult<PyComparison> {
    let g = &grid.inner;
    let mut template = PolicyConfig::risk_neutral(g.reserve_factor);
    template.alpha = alpha;
    template.scenarios = ScenarioSpec { k, rel_sigma, seed };
    let policies = PolicyConfig::parse_list(policies, &template).map_err(to_py)?;
    let days: Vec<DayData> = days.into_iter().map(|d| d.inner).collect();
    py.detach(|| {
        if policies.len() >= 2 {
            compare_policies(g, &days, &policies, h, None)
        } else {
            run_range(g, &days, &policies[0], h, None).map(|r| Comparison { runs: vec![r] })
        }
    })
    .map(|inner| PyComparison { inner })
    .map_err(to_py)
}

/// `clamp((r - r_low) / r_high, 0, 1)`.
#[pyfunction]
fn adjust_fraction(r: f64, r_low: f64, r_high: f64) -> PyResult<f64> {
    let p = AdjustmentParams::new(r_low, r_high).map_err(to_py)?;
    Ok(gridrisk::risk::adjust_fraction(r, &p))
}

#[pyfunction]
fn adjust_capacity(q_fcst: f64, q_min: f64, r: f64) -> f64 {
    gridrisk::risk::adjust_capacity(q_fcst, q_min, r)
}

/// Indices of the `ceil(alpha * K)` costliest scenarios, worst first.
#[pyfunction]
fn rank_scenarios(costs: Vec<f64>, alpha: f64) -> PyResult<Vec<usize>> {
    gridrisk::risk::rank_scenarios(&costs, alpha).map_err(to_py)
}

/// Runs the command-line tool with `args` (without the program name) and
/// returns its exit status.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> i32 {
    py.detach(|| gridrisk::cli::main_with_args(std::iter::once("gridrisk".to_string()).chain(args)))
}

#[pymodule]
fn pygridrisk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyDay>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PyAdjustments>()?;
    m.add_class::<PyComparison>()?;
    m.add_function(wrap_pyfunction!(attribute, m)?)?;
    m.add_function(wrap_pyfunction!(risk, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(adjust_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(adjust_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(rank_scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
