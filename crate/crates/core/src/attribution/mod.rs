//! Integrated-gradients attribution of hourly dispatch cost differences.
//!
//! For hour `tau` the window objective `F(p_prev, d, q)` is evaluated along
//! the straight line from the forecast-side input to the target-side input.
//! Because `F` is a piecewise-linear function of right-hand sides, its
//! gradient is piecewise constant along the path and comes straight from
//! the LP duals. The path integral of each component times that asset's
//! displacement is its attribution, and the attributions sum to
//! `F(target) - F(baseline)`.

mod quadrature;
mod report;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispatch::{build_ed, dispatch_chain, solve_model, CommitmentSchedule, HourlyInput};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, HourSeries, REAL_TIME_HOURS};
use crate::lp::{rhs_gradient, symmetrize_duals, FlowDir, Role, SimplexSolver};

pub use quadrature::{integrate_path, uniform_trapezoid, QuadratureConfig, QuadratureResult, GRID_UNITS, NODE_LIMIT};
pub use report::{efficiency_gap, AssetClass, AssetRef, AttributionReport, HourAttribution};

/// One hour's attribution path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub baseline: HourlyInput,
    pub target: HourlyInput,
    pub tau: usize,
    pub h: usize,
}

impl PathSpec {
    pub fn new(baseline: HourlyInput, target: HourlyInput, tau: usize, h: usize) -> Result<Self> {
        let same = baseline.p_prev.len() == target.p_prev.len()
            && baseline.demand.len() == target.demand.len()
            && baseline.capacity.len() == target.capacity.len();
        if !same {
            return Err(Error::data("baseline and target cover different asset sets"));
        }
        Ok(PathSpec {
            baseline,
            target,
            tau,
            h,
        })
    }

    /// Displacement per asset, in [`AssetRef`] order: initial states, loads,
    /// renewables.
    pub fn delta(&self) -> Vec<f64> {
        flatten(&self.target)
            .iter()
            .zip(flatten(&self.baseline))
            .map(|(t, b)| t - b)
            .collect()
    }
}

fn flatten(input: &HourlyInput) -> Vec<f64> {
    let mut v = input.p_prev.clone();
    v.extend_from_slice(&input.demand);
    v.extend_from_slice(&input.capacity);
    v
}

fn lerp(b: &[f64], t: &[f64], lambda: f64) -> Vec<f64> {
    b.iter().zip(t).map(|(b, t)| (1.0 - lambda) * b + lambda * t).collect()
}

/// Input at `lambda` along the path; the endpoints are reproduced exactly.
pub fn path_point(spec: &PathSpec, lambda: f64) -> Result<HourlyInput> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid(format!("path parameter {lambda} outside [0, 1]")));
    }
    let (b, t) = (&spec.baseline, &spec.target);
    Ok(HourlyInput {
        p_prev: lerp(&b.p_prev, &t.p_prev, lambda),
        demand: lerp(&b.demand, &t.demand, lambda),
        capacity: lerp(&b.capacity, &t.capacity, lambda),
        lookahead: b.lookahead.clone(),
        reserve_base: b.reserve_base.clone(),
    })
}

/// Objective and gradient of `F` at one path point.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientPoint {
    pub objective: f64,
    /// In [`AssetRef`] order.
    pub gradient: Vec<f64>,
}

/// Rows whose duals must agree for identical assets to be treated alike:
/// hour-`tau` capacity rows of equal renewables at a shared bus, and ramp
/// rows of interchangeable units.
fn symmetry_groups(
    grid: &GridSpec,
    commit: &CommitmentSchedule,
    lp: &crate::lp::LinearProgram,
    input: &HourlyInput,
    tau: usize,
    h: usize,
) -> Vec<Vec<usize>> {
    let mut groups = Vec::new();
    let mut by_key: BTreeMap<(String, u64), Vec<usize>> = BTreeMap::new();
    for (n, ren) in grid.renewables.iter().enumerate() {
        if let Some(row) = lp.tagged(Role::RenewCap {
            renewable: n,
            hour: tau,
        }) {
            by_key
                .entry((ren.bus.clone(), input.capacity[n].to_bits()))
                .or_default()
                .push(row);
        }
    }
    groups.extend(by_key.into_values().filter(|g| g.len() > 1));

    let gens = &grid.dispatchables;
    let mut seen = vec![false; gens.len()];
    for a in 0..gens.len() {
        if seen[a] {
            continue;
        }
        let mut members = vec![a];
        for b in a + 1..gens.len() {
            let (ga, gb) = (&gens[a], &gens[b]);
            let twin = ga.bus == gb.bus
                && ga.p_min == gb.p_min
                && ga.p_max == gb.p_max
                && ga.ramp_up == gb.ramp_up
                && ga.ramp_down == gb.ramp_down
                && ga.marginal_cost == gb.marginal_cost
                && input.p_prev[a] == input.p_prev[b]
                && commit.was_on(a, tau) == commit.was_on(b, tau)
                && (tau..=tau + h).all(|t| commit.is_on(a, t) == commit.is_on(b, t));
            if twin {
                members.push(b);
                seen[b] = true;
            }
        }
        if members.len() > 1 {
            let ups: Vec<usize> = members
                .iter()
                .filter_map(|&g| lp.tagged(Role::RampUp { gen: g, hour: tau }))
                .collect();
            let downs: Vec<usize> = members
                .iter()
                .filter_map(|&g| lp.tagged(Role::RampDown { gen: g, hour: tau }))
                .collect();
            groups.extend([ups, downs].into_iter().filter(|rows| rows.len() > 1));
        }
    }
    groups
}

/// Right-hand-side sensitivities of hour-`tau` rows to each parameter.
fn param_map(grid: &GridSpec, lp: &crate::lp::LinearProgram, tau: usize) -> BTreeMap<usize, Vec<(usize, f64)>> {
    let m = grid.dispatchables.len();
    let l_count = grid.loads.len();
    let bus_of = grid.bus_index();
    let ptdf = grid.ptdf_matrix();
    let mut map = BTreeMap::new();
    for g in 0..m {
        let mut entries = Vec::new();
        if let Some(r) = lp.tagged(Role::RampUp { gen: g, hour: tau }) {
            entries.push((r, 1.0));
        }
        if let Some(r) = lp.tagged(Role::RampDown { gen: g, hour: tau }) {
            entries.push((r, -1.0));
        }
        map.insert(g, entries);
    }
    let balance = lp.tagged(Role::Balance { hour: tau });
    for (l, load) in grid.loads.iter().enumerate() {
        let bus = bus_of[load.bus.as_str()];
        let mut entries: Vec<(usize, f64)> = balance.into_iter().map(|r| (r, 1.0)).collect();
        for (li, row) in ptdf.iter().enumerate() {
            let a = row[bus];
            if a == 0.0 {
                continue;
            }
            if let Some(r) = lp.tagged(Role::Line {
                line: li,
                hour: tau,
                dir: FlowDir::Forward,
            }) {
                entries.push((r, a));
            }
            if let Some(r) = lp.tagged(Role::Line {
                line: li,
                hour: tau,
                dir: FlowDir::Reverse,
            }) {
                entries.push((r, -a));
            }
        }
        map.insert(m + l, entries);
    }
    for n in 0..grid.renewables.len() {
        let entries = lp
            .tagged(Role::RenewCap {
                renewable: n,
                hour: tau,
            })
            .map(|r| vec![(r, 1.0)])
            .unwrap_or_default();
        map.insert(m + l_count + n, entries);
    }
    map
}

/// Gradient of a given input, bypassing the path parameterization.
pub fn gradient_of(
    grid: &GridSpec,
    commit: &CommitmentSchedule,
    input: &HourlyInput,
    tau: usize,
    h: usize,
    solver: &mut SimplexSolver,
) -> Result<GradientPoint> {
    let model = build_ed(grid, commit, input, tau, h)?;
    let (sol, _) = solve_model(grid, &model, solver)?;
    let groups = symmetry_groups(grid, commit, &model.lp, input, tau, h);
    let sol = if groups.is_empty() {
        sol
    } else {
        symmetrize_duals(&model.lp, &sol, &groups)?
    };
    let grad = rhs_gradient(&model.lp, &sol, &param_map(grid, &model.lp, tau))?;
    Ok(GradientPoint {
        objective: sol.objective,
        gradient: grad.into_values().collect(),
    })
}

/// Solves the dispatch at `lambda` and returns its objective and gradient.
pub fn gradient_at(
    grid: &GridSpec,
    commit: &CommitmentSchedule,
    spec: &PathSpec,
    lambda: f64,
) -> Result<GradientPoint> {
    gradient_with(grid, commit, spec, lambda, &mut SimplexSolver::new())
}

pub(crate) fn gradient_with(
    grid: &GridSpec,
    commit: &CommitmentSchedule,
    spec: &PathSpec,
    lambda: f64,
    solver: &mut SimplexSolver,
) -> Result<GradientPoint> {
    let input = path_point(spec, lambda)?;
    gradient_of(grid, commit, &input, spec.tau, spec.h, solver).map_err(|e| match e {
        Error::Solve(msg) => Error::Solve(format!("{msg} (at lambda = {lambda})")),
        other => other,
    })
}

/// Attributes one hour.
pub fn integrate(
    grid: &GridSpec,
    commit: &CommitmentSchedule,
    spec: &PathSpec,
    qcfg: &QuadratureConfig,
) -> Result<HourAttribution> {
    let q = integrate_path(grid, commit, spec, qcfg)?;
    let total: f64 = q.attribution.iter().sum();
    Ok(HourAttribution {
        hour: spec.tau,
        gap: q.c_act - q.c_fcst - total,
        attribution: q.attribution,
        shadow_price: q.mean_gradient,
        c_fcst: q.c_fcst,
        c_act: q.c_act,
        realized_cost: f64::NAN,
        nodes: q.nodes,
        error_estimate: q.error_estimate,
        budget_exhausted: q.budget_exhausted,
    })
}

/// Attributes all real-time hours of one day.
///
/// The baseline chain dispatches on forecasts throughout and the target
/// chain on `target`, both starting from `initial`; each hour's path runs
/// between the two chains' states at that hour.
pub fn attribute_day(
    grid: &GridSpec,
    commit: &CommitmentSchedule,
    forecast: &HourSeries,
    target: &HourSeries,
    initial: &[f64],
    h: usize,
    qcfg: &QuadratureConfig,
) -> Result<AttributionReport> {
    qcfg.validate()?;
    let hours = REAL_TIME_HOURS;
    let (_, base_states) = dispatch_chain(grid, commit, forecast, forecast, initial, hours, h)?;
    let (outcomes, target_states) = dispatch_chain(grid, commit, forecast, target, initial, hours, h)?;

    let mut rows: Vec<HourAttribution> = (0..hours)
        .into_par_iter()
        .map(|tau| {
            let baseline = HourlyInput::from_series(forecast, forecast, tau, h, base_states[tau].clone())?;
            let tgt = HourlyInput::from_series(forecast, target, tau, h, target_states[tau].clone())?;
            integrate(grid, commit, &PathSpec::new(baseline, tgt, tau, h)?, qcfg)
        })
        .collect::<Result<_>>()?;
    for (row, o) in rows.iter_mut().zip(&outcomes) {
        row.realized_cost = o.hour_cost;
    }
    AttributionReport::new(grid, rows)
}
