use serde::{Deserialize, Serialize};

use crate::grid::{GridSpec, HourSeries, DAY_AHEAD_HOURS};

/// On/off status per dispatchable per day-ahead hour.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitmentSchedule {
    pub gen_ids: Vec<String>,
    /// `[gen][hour]`
    pub on: Vec<Vec<bool>>,
    /// Status in the hour before hour 0; decides whether hour 0 carries
    /// ramp limits against `p_prev`.
    pub initial_on: Vec<bool>,
}

impl CommitmentSchedule {
    /// Every unit on for `hours` hours, including before hour 0.
    pub fn all_on(grid: &GridSpec, hours: usize) -> Self {
        let n = grid.dispatchables.len();
        CommitmentSchedule {
            gen_ids: grid.dispatchables.iter().map(|g| g.id.clone()).collect(),
            on: vec![vec![true; hours]; n],
            initial_on: vec![true; n],
        }
    }

    pub fn hours(&self) -> usize {
        self.on.first().map_or(usize::MAX, Vec::len)
    }

    pub fn is_on(&self, gen: usize, hour: usize) -> bool {
        self.on[gen][hour]
    }

    pub fn was_on(&self, gen: usize, hour: usize) -> bool {
        if hour == 0 {
            self.initial_on[gen]
        } else {
            self.on[gen][hour - 1]
        }
    }

    /// Committed `p_max` in `hour`.
    pub fn committed_capacity(&self, grid: &GridSpec, hour: usize) -> f64 {
        grid.dispatchables
            .iter()
            .enumerate()
            .filter(|(g, _)| self.on[*g][hour])
            .map(|(_, gen)| gen.p_max)
            .sum()
    }

    /// Treats a unit as already online before hour 0 when it is committed
    /// in hour 0 and `p_prev` is a valid online output for it; otherwise
    /// hour 0 is a start-up without ramp limits.
    pub fn set_initial_state(&mut self, grid: &GridSpec, p_prev: &[f64]) {
        self.initial_on = grid
            .dispatchables
            .iter()
            .enumerate()
            .map(|(g, gen)| self.on[g].first().copied().unwrap_or(false) && p_prev[g] >= gen.p_min)
            .collect();
    }

    /// Units at `p_min` if committed in hour 0, else 0.
    pub fn initial_dispatch(&self, grid: &GridSpec) -> Vec<f64> {
        grid.dispatchables
            .iter()
            .enumerate()
            .map(|(g, gen)| if self.on[g][0] { gen.p_min } else { 0.0 })
            .collect()
    }
}

/// Merit-order commitment over the day-ahead horizon.
///
/// Each hour must-run units go first, then the cheapest remaining units
/// (ties by id) until committed `p_max` covers `(1 + reserve_factor)` times
/// the forecast net load. `adjusted_capacity`, `[hour][renewable]`, replaces
/// forecast renewable capacity where given. Minimum up and down times are
/// then repaired by only ever switching units on.
pub fn commit_units(
    grid: &GridSpec,
    forecast: &HourSeries,
    reserve_factor: f64,
    adjusted_capacity: Option<&[Vec<f64>]>,
) -> CommitmentSchedule {
    let hours = DAY_AHEAD_HOURS.min(forecast.hours());
    let n = grid.dispatchables.len();
    let mut order: Vec<usize> = (0..n).filter(|&g| !grid.dispatchables[g].must_run).collect();
    order.sort_by(|&a, &b| {
        let (ga, gb) = (&grid.dispatchables[a], &grid.dispatchables[b]);
        ga.marginal_cost
            .total_cmp(&gb.marginal_cost)
            .then_with(|| ga.id.cmp(&gb.id))
    });
    let must_run_cap: f64 = grid.dispatchables.iter().filter(|g| g.must_run).map(|g| g.p_max).sum();

    let mut on = vec![vec![false; hours]; n];
    for t in 0..hours {
        let renew: f64 = match adjusted_capacity.and_then(|a| a.get(t)) {
            Some(q) => q.iter().sum(),
            None => forecast.system_capacity(t),
        };
        let target = (1.0 + reserve_factor) * (forecast.system_demand(t) - renew).max(0.0);
        for (row, gen) in on.iter_mut().zip(&grid.dispatchables) {
            row[t] = gen.must_run;
        }
        let mut cap = must_run_cap;
        for &g in &order {
            if cap >= target {
                break;
            }
            on[g][t] = true;
            cap += grid.dispatchables[g].p_max;
        }
    }

    for (g, gen) in grid.dispatchables.iter().enumerate() {
        enforce_min_up(&mut on[g], gen.min_up as usize);
        enforce_min_down(&mut on[g], gen.min_down as usize);
    }

    let initial_on = on.iter().map(|row| row.first().copied().unwrap_or(false)).collect();
    CommitmentSchedule {
        gen_ids: grid.dispatchables.iter().map(|g| g.id.clone()).collect(),
        on,
        initial_on,
    }
}

/// Commits one day and fixes its initial state. Without `initial` every
/// committed unit starts at `p_min`. Returns the schedule and the dispatch
/// entering hour 0.
pub fn commit_day(
    grid: &GridSpec,
    forecast: &HourSeries,
    adjusted_capacity: Option<&[Vec<f64>]>,
    initial: Option<&[f64]>,
) -> (CommitmentSchedule, Vec<f64>) {
    let mut commit = commit_units(grid, forecast, grid.reserve_factor, adjusted_capacity);
    let start = initial.map_or_else(|| commit.initial_dispatch(grid), <[f64]>::to_vec);
    commit.set_initial_state(grid, &start);
    (commit, start)
}

/// Keeps every unit on for `min_up` hours after any hour it is on.
fn enforce_min_up(row: &mut [bool], min_up: usize) {
    if min_up <= 1 {
        return;
    }
    let raw = row.to_vec();
    let mut until = 0;
    for t in 0..row.len() {
        if raw[t] {
            until = t + min_up;
        }
        row[t] = t < until;
    }
}

/// Closes off-gaps between two on-blocks that are shorter than `min_down`.
fn enforce_min_down(row: &mut [bool], min_down: usize) {
    let mut t = 0;
    while t < row.len() {
        if row[t] {
            t += 1;
            continue;
        }
        let start = t;
        while t < row.len() && !row[t] {
            t += 1;
        }
        if start > 0 && t < row.len() && t - start < min_down {
            row[start..t].fill(true);
        }
    }
}
