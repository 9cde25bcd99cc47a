//! Hourly economic dispatch with look-ahead, and the day-ahead commitment
//! heuristic that fixes which units the dispatch may use.
//!
//! For every hour `t` in the window `tau..=tau+h` the model has
//!
//! * `p[g,t] in [u*p_min, u*p_max]` and reserve `r[g,t] in [0, u*ramp_up]`
//!   with `p + r <= u*p_max`,
//! * renewable output `w[n,t] >= 0` with the tagged cap `w <= q[n,t]`,
//! * shed `s[l,t] >= 0` at each load's bus, system over-generation `o[t]`,
//!   and reserve shortfall `v[t]`,
//! * balance `sum p + sum w + sum s - o = sum d`,
//! * PTDF line limits in both directions, with demand moved to the RHS,
//! * ramping between consecutive committed hours, where the initial state
//!   `p_prev` appears only on the right-hand side,
//! * spinning reserve `sum r + v >= reserve_factor * forecast demand`.
//!
//! Every row has a slack path, so a well-formed model is always feasible.

mod commit;

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, HourSeries};
use crate::lp::{FlowDir, LinearProgram, LpSolution, Role, Sense, SimplexSolver};

pub use commit::{commit_day, commit_units, CommitmentSchedule};

/// Future hour data held fixed inside the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookaheadHour {
    pub demand: Vec<f64>,
    pub capacity: Vec<f64>,
}

/// Parameters of one hourly dispatch: `(p_prev, d_tau, q_tau)` plus the
/// frozen look-ahead hours and the forecast demand that sizes reserves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyInput {
    /// MW per dispatchable at `tau - 1`.
    pub p_prev: Vec<f64>,
    /// MW per load at `tau`.
    pub demand: Vec<f64>,
    /// MW per renewable at `tau`.
    pub capacity: Vec<f64>,
    /// Hours `tau+1 ..= tau+h`.
    pub lookahead: Vec<LookaheadHour>,
    /// Forecast system demand for `tau ..= tau+h`.
    pub reserve_base: Vec<f64>,
}

impl HourlyInput {
    /// Hour `tau` from `target`; look-ahead hours and reserve base from
    /// `forecast`.
    pub fn from_series(
        forecast: &HourSeries,
        target: &HourSeries,
        tau: usize,
        h: usize,
        p_prev: Vec<f64>,
    ) -> Result<Self> {
        if tau >= target.hours() {
            return Err(Error::data(format!("target series has no hour {tau}")));
        }
        if tau + h >= forecast.hours() {
            return Err(Error::data(format!(
                "missing look-ahead data: forecast ends before hour {}",
                tau + h
            )));
        }
        Ok(HourlyInput {
            p_prev,
            demand: target.demand[tau].clone(),
            capacity: target.capacity[tau].clone(),
            lookahead: (tau + 1..=tau + h)
                .map(|t| LookaheadHour {
                    demand: forecast.demand[t].clone(),
                    capacity: forecast.capacity[t].clone(),
                })
                .collect(),
            reserve_base: (tau..=tau + h).map(|t| forecast.system_demand(t)).collect(),
        })
    }

    fn hour_demand(&self, k: usize) -> &[f64] {
        if k == 0 {
            &self.demand
        } else {
            &self.lookahead[k - 1].demand
        }
    }

    fn hour_capacity(&self, k: usize) -> &[f64] {
        if k == 0 {
            &self.capacity
        } else {
            &self.lookahead[k - 1].capacity
        }
    }
}

/// Variable indices of a built dispatch model, `[window hour][asset]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdLayout {
    pub tau: usize,
    pub h: usize,
    pub p: Vec<Vec<usize>>,
    pub r: Vec<Vec<usize>>,
    pub w: Vec<Vec<usize>>,
    pub s: Vec<Vec<usize>>,
    pub o: Vec<usize>,
    pub v: Vec<usize>,
    /// Commitment per window hour, `[k][g]`.
    pub on: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdModel {
    pub lp: LinearProgram,
    pub layout: EdLayout,
}

impl EdModel {
    /// Objective terms of window hour `k` evaluated at `x`.
    pub fn hour_cost(&self, grid: &GridSpec, x: &[f64], k: usize) -> f64 {
        let lay = &self.layout;
        let pen = grid.penalties;
        let mut c = self.generation_cost(grid, x, k);
        c += pen.load_mismatch * (lay.s[k].iter().map(|&j| x[j]).sum::<f64>() + x[lay.o[k]]);
        c += pen.reserve_shortfall * x[lay.v[k]];
        c
    }

    /// Marginal plus no-load cost of window hour `k`.
    pub fn generation_cost(&self, grid: &GridSpec, x: &[f64], k: usize) -> f64 {
        let lay = &self.layout;
        grid.dispatchables
            .iter()
            .enumerate()
            .map(|(g, gen)| {
                let nl = if lay.on[k][g] { gen.no_load_cost } else { 0.0 };
                gen.marginal_cost * x[lay.p[k][g]] + nl
            })
            .sum()
    }
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::data(format!("{what}: expected {want} values, got {got}")));
    }
    Ok(())
}

/// Builds the look-ahead dispatch LP for hour `tau`.
pub fn build_ed(
    grid: &GridSpec,
    commit: &CommitmentSchedule,
    input: &HourlyInput,
    tau: usize,
    h: usize,
) -> Result<EdModel> {
    if h < 1 {
        return Err(Error::invalid("look-ahead h must be >= 1"));
    }
    if input.lookahead.len() != h {
        return Err(Error::data(format!(
            "missing look-ahead data: need {h} hours, got {}",
            input.lookahead.len()
        )));
    }
    if tau + h >= commit.hours() {
        return Err(Error::data(format!(
            "commitment covers {} hours, window needs hour {}",
            commit.hours(),
            tau + h
        )));
    }
    let n_g = grid.dispatchables.len();
    let n_r = grid.renewables.len();
    let n_l = grid.loads.len();
    check_len("p_prev", input.p_prev.len(), n_g)?;
    check_len("reserve_base", input.reserve_base.len(), h + 1)?;
    for k in 0..=h {
        check_len("demand", input.hour_demand(k).len(), n_l)?;
        check_len("capacity", input.hour_capacity(k).len(), n_r)?;
    }
    if commit.gen_ids.len() != n_g {
        return Err(Error::data("commitment does not match the generator list"));
    }

    let bus_of = grid.bus_index();
    let ptdf = grid.ptdf_matrix();
    let gen_bus: Vec<usize> = grid.dispatchables.iter().map(|g| bus_of[g.bus.as_str()]).collect();
    let ren_bus: Vec<usize> = grid.renewables.iter().map(|r| bus_of[r.bus.as_str()]).collect();
    let load_bus: Vec<usize> = grid.loads.iter().map(|l| bus_of[l.bus.as_str()]).collect();
    let pen = grid.penalties;

    let mut lp = LinearProgram::new();
    let mut lay = EdLayout {
        tau,
        h,
        p: Vec::new(),
        r: Vec::new(),
        w: Vec::new(),
        s: Vec::new(),
        o: Vec::new(),
        v: Vec::new(),
        on: Vec::new(),
    };

    for k in 0..=h {
        let t = tau + k;
        let on: Vec<bool> = (0..n_g).map(|g| commit.is_on(g, t)).collect();
        let mut p = Vec::with_capacity(n_g);
        let mut r = Vec::with_capacity(n_g);
        for (g, gen) in grid.dispatchables.iter().enumerate() {
            let u = if on[g] { 1.0 } else { 0.0 };
            p.push(lp.add_var(
                format!("p@{}@{t}", gen.id),
                u * gen.p_min,
                u * gen.p_max,
                gen.marginal_cost,
            ));
            r.push(lp.add_var(format!("r@{}@{t}", gen.id), 0.0, u * gen.ramp_up, 0.0));
            lp.objective_offset += u * gen.no_load_cost;
        }
        let w: Vec<usize> = grid
            .renewables
            .iter()
            .map(|ren| lp.add_var(format!("w@{}@{t}", ren.id), 0.0, f64::INFINITY, 0.0))
            .collect();
        let s: Vec<usize> = grid
            .loads
            .iter()
            .map(|l| lp.add_var(format!("s@{}@{t}", l.id), 0.0, f64::INFINITY, pen.load_mismatch))
            .collect();
        let o = lp.add_var(format!("o@{t}"), 0.0, f64::INFINITY, pen.load_mismatch);
        let v = lp.add_var(format!("v@{t}"), 0.0, f64::INFINITY, pen.reserve_shortfall);
        lay.p.push(p);
        lay.r.push(r);
        lay.w.push(w);
        lay.s.push(s);
        lay.o.push(o);
        lay.v.push(v);
        lay.on.push(on);
    }

    for k in 0..=h {
        let t = tau + k;
        let demand = input.hour_demand(k);
        let capacity = input.hour_capacity(k);
        let (p, r, w, s) = (&lay.p[k], &lay.r[k], &lay.w[k], &lay.s[k]);

        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        coeffs.extend(p.iter().map(|&j| (j, 1.0)));
        coeffs.extend(w.iter().map(|&j| (j, 1.0)));
        coeffs.extend(s.iter().map(|&j| (j, 1.0)));
        coeffs.push((lay.o[k], -1.0));
        let row = lp.add_constraint(format!("balance@{t}"), coeffs, Sense::Eq, demand.iter().sum());
        lp.tag(row, Role::Balance { hour: t })?;

        for (n, ren) in grid.renewables.iter().enumerate() {
            let row = lp.add_constraint(
                format!("renew-cap@{}@{t}", ren.id),
                [(w[n], 1.0)],
                Sense::Le,
                capacity[n],
            );
            lp.tag(row, Role::RenewCap { renewable: n, hour: t })?;
        }

        for (g, gen) in grid.dispatchables.iter().enumerate() {
            if lay.on[k][g] {
                lp.add_constraint(
                    format!("headroom@{}@{t}", gen.id),
                    [(p[g], 1.0), (r[g], 1.0)],
                    Sense::Le,
                    gen.p_max,
                );
            }
            let prev_on = if k == 0 { commit.was_on(g, t) } else { lay.on[k - 1][g] };
            if prev_on && lay.on[k][g] {
                let (up, down) = if k == 0 {
                    let pp = input.p_prev[g];
                    (
                        lp.add_constraint(
                            format!("ramp-up@{}@{t}", gen.id),
                            [(p[g], 1.0)],
                            Sense::Le,
                            gen.ramp_up + pp,
                        ),
                        lp.add_constraint(
                            format!("ramp-down@{}@{t}", gen.id),
                            [(p[g], -1.0)],
                            Sense::Le,
                            gen.ramp_down - pp,
                        ),
                    )
                } else {
                    let q = lay.p[k - 1][g];
                    (
                        lp.add_constraint(
                            format!("ramp-up@{}@{t}", gen.id),
                            [(p[g], 1.0), (q, -1.0)],
                            Sense::Le,
                            gen.ramp_up,
                        ),
                        lp.add_constraint(
                            format!("ramp-down@{}@{t}", gen.id),
                            [(q, 1.0), (p[g], -1.0)],
                            Sense::Le,
                            gen.ramp_down,
                        ),
                    )
                };
                lp.tag(up, Role::RampUp { gen: g, hour: t })?;
                lp.tag(down, Role::RampDown { gen: g, hour: t })?;
            }
        }

        for (li, line) in grid.lines.iter().enumerate() {
            let row_ptdf = &ptdf[li];
            let mut coeffs: Vec<(usize, f64)> = Vec::new();
            coeffs.extend(p.iter().enumerate().map(|(g, &j)| (j, row_ptdf[gen_bus[g]])));
            coeffs.extend(w.iter().enumerate().map(|(n, &j)| (j, row_ptdf[ren_bus[n]])));
            coeffs.extend(s.iter().enumerate().map(|(l, &j)| (j, row_ptdf[load_bus[l]])));
            let withdrawal: f64 = demand.iter().enumerate().map(|(l, d)| row_ptdf[load_bus[l]] * d).sum();
            let fwd = lp.add_constraint(
                format!("line@{}@{t}@fwd", line.id),
                coeffs.clone(),
                Sense::Le,
                line.flow_limit + withdrawal,
            );
            lp.tag(
                fwd,
                Role::Line {
                    line: li,
                    hour: t,
                    dir: FlowDir::Forward,
                },
            )?;
            let rev = lp.add_constraint(
                format!("line@{}@{t}@rev", line.id),
                coeffs.into_iter().map(|(j, a)| (j, -a)),
                Sense::Le,
                line.flow_limit - withdrawal,
            );
            lp.tag(
                rev,
                Role::Line {
                    line: li,
                    hour: t,
                    dir: FlowDir::Reverse,
                },
            )?;
        }

        let mut coeffs: Vec<(usize, f64)> = r.iter().map(|&j| (j, 1.0)).collect();
        coeffs.push((lay.v[k], 1.0));
        let row = lp.add_constraint(
            format!("reserve@{t}"),
            coeffs,
            Sense::Ge,
            grid.reserve_factor * input.reserve_base[k],
        );
        lp.tag(row, Role::Reserve { hour: t })?;
    }

    Ok(EdModel { lp, layout: lay })
}

/// Result of one hourly dispatch. Per-asset values refer to hour `tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchOutcome {
    pub tau: usize,
    /// Objective of the whole window; this is `F_tau`.
    pub cost: f64,
    /// Objective terms of hour `tau` alone.
    pub hour_cost: f64,
    /// Marginal and no-load cost of hour `tau`.
    pub generation_cost: f64,
    pub dispatch: Vec<f64>,
    pub reserve: Vec<f64>,
    pub renewable_used: Vec<f64>,
    pub shed: Vec<f64>,
    pub over_gen: f64,
    pub reserve_shortfall: f64,
    /// Balance residual of hour `tau` at the reported dispatch.
    pub balance_residual: f64,
    #[serde(skip)]
    pub solution: Option<LpSolution>,
}

impl DispatchOutcome {
    pub fn total_shed(&self) -> f64 {
        self.shed.iter().sum()
    }
}

/// Solves a built model; any status other than optimal is an error.
pub fn solve_model(
    grid: &GridSpec,
    model: &EdModel,
    solver: &mut SimplexSolver,
) -> Result<(LpSolution, DispatchOutcome)> {
    let sol = solver.solve(&model.lp)?;
    if !sol.is_optimal() {
        return Err(Error::Solve(format!(
            "dispatch for hour {} returned {:?}; the model is malformed",
            model.layout.tau, sol.status
        )));
    }
    let lay = &model.layout;
    let x = &sol.primal;
    let pick = |idx: &[usize]| idx.iter().map(|&j| x[j].max(0.0)).collect::<Vec<f64>>();
    let dispatch: Vec<f64> = lay.p[0].iter().map(|&j| x[j]).collect();
    let renewable_used = pick(&lay.w[0]);
    let shed = pick(&lay.s[0]);
    let over_gen = x[lay.o[0]].max(0.0);
    let demand: f64 = model.lp.constraints[model.lp.tagged(Role::Balance { hour: lay.tau }).unwrap()].rhs;
    let supplied: f64 =
        dispatch.iter().sum::<f64>() + renewable_used.iter().sum::<f64>() + shed.iter().sum::<f64>() - over_gen;
    let outcome = DispatchOutcome {
        tau: lay.tau,
        cost: sol.objective,
        hour_cost: model.hour_cost(grid, x, 0),
        generation_cost: model.generation_cost(grid, x, 0),
        dispatch,
        reserve: pick(&lay.r[0]),
        renewable_used,
        shed,
        over_gen,
        reserve_shortfall: x[lay.v[0]].max(0.0),
        balance_residual: supplied - demand,
        solution: None,
    };
    Ok((sol, outcome))
}

/// Builds and solves the dispatch for hour `tau`.
pub fn solve_ed(
    grid: &GridSpec,
    commit: &CommitmentSchedule,
    input: &HourlyInput,
    tau: usize,
    h: usize,
) -> Result<DispatchOutcome> {
    let model = build_ed(grid, commit, input, tau, h)?;
    let (sol, mut outcome) = solve_model(grid, &model, &mut SimplexSolver::new())?;
    outcome.solution = Some(sol);
    Ok(outcome)
}

/// Runs hours `0..hours` of one series, feeding each hour's dispatch forward
/// as the next hour's initial state. Returns one outcome per hour and the
/// `p_prev` used at each hour.
pub fn dispatch_chain(
    grid: &GridSpec,
    commit: &CommitmentSchedule,
    forecast: &HourSeries,
    target: &HourSeries,
    initial: &[f64],
    hours: usize,
    h: usize,
) -> Result<(Vec<DispatchOutcome>, Vec<Vec<f64>>)> {
    let mut solver = SimplexSolver::new();
    let mut p_prev = initial.to_vec();
    let mut outcomes = Vec::with_capacity(hours);
    let mut states = Vec::with_capacity(hours);
    for tau in 0..hours {
        let input = HourlyInput::from_series(forecast, target, tau, h, p_prev.clone())?;
        let model = build_ed(grid, commit, &input, tau, h)?;
        let (_, outcome) = solve_model(grid, &model, &mut solver)?;
        states.push(p_prev);
        p_prev = outcome.dispatch.clone();
        outcomes.push(outcome);
    }
    Ok((outcomes, states))
}

/// Writes `hour,asset,value,role` rows for a sequence of hourly outcomes.
pub fn write_outcomes_csv(path: impl AsRef<Path>, grid: &GridSpec, outcomes: &[DispatchOutcome]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("hour,asset,value,role\n");
    for o in outcomes {
        for (g, gen) in grid.dispatchables.iter().enumerate() {
            out.push_str(&format!("{},{},{},dispatch\n", o.tau, gen.id, o.dispatch[g]));
            out.push_str(&format!("{},{},{},reserve\n", o.tau, gen.id, o.reserve[g]));
        }
        for (n, ren) in grid.renewables.iter().enumerate() {
            out.push_str(&format!("{},{},{},renewable\n", o.tau, ren.id, o.renewable_used[n]));
        }
        for (l, load) in grid.loads.iter().enumerate() {
            out.push_str(&format!("{},{},{},shed\n", o.tau, load.id, o.shed[l]));
        }
        out.push_str(&format!("{},system,{},over_gen\n", o.tau, o.over_gen));
        out.push_str(&format!("{},system,{},reserve_shortfall\n", o.tau, o.reserve_shortfall));
        out.push_str(&format!("{},system,{},hour_cost\n", o.tau, o.hour_cost));
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
