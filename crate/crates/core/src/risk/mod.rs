//! Tail-scenario risk scores and the renewable capacity haircut they drive.
//!
//! Scenarios are dispatched against the forecast commitment, the worst
//! `ceil(alpha * K)` by total cost form the tail `S`, and each renewable
//! hour's attribution averaged over `S` becomes its risk score. A per-MWh
//! version of the score sets the fraction `r` by which forecast capacity is
//! pulled toward the lowest capacity seen in any scenario.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attribution::{attribute_day, AssetClass, AttributionReport, QuadratureConfig};
use crate::dispatch::{commit_day, dispatch_chain, CommitmentSchedule};
use crate::error::{Error, Result};
use crate::grid::{write_series, DayData, GridSpec, ScenarioSet, DAY_AHEAD_HOURS, REAL_TIME_HOURS};

/// Capacity gaps at or below this many MW make a score non-adjustable.
pub const EPSILON_DENOMINATOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjustmentParams {
    /// $/MWh below which no adjustment happens.
    pub r_low: f64,
    /// $/MWh span over which the adjustment ramps from 0 to 1.
    pub r_high: f64,
}

impl AdjustmentParams {
    pub fn new(r_low: f64, r_high: f64) -> Result<Self> {
        let p = AdjustmentParams { r_low, r_high };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_low > 0.0 && self.r_high > 0.0) {
            return Err(Error::invalid(format!(
                "r_low and r_high must be positive, got {} and {}",
                self.r_low, self.r_high
            )));
        }
        Ok(())
    }
}

/// How the tail capacity sum is averaged in the per-MWh score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMean {
    /// Divide by the full scenario count `K`.
    #[default]
    AllScenarios,
    /// Divide by the tail size `alpha * K`.
    TailSize,
}

impl std::str::FromStr for TailMean {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k" | "all" | "all_scenarios" => Ok(TailMean::AllScenarios),
            "alpha_k" | "tail" | "tail_size" => Ok(TailMean::TailSize),
            _ => Err(Error::invalid(format!("unknown tail mean '{s}' (use k or alpha_k)"))),
        }
    }
}

/// `ceil(alpha * k)`, rejecting an empty tail.
pub fn tail_size(alpha: f64, k: usize) -> Result<usize> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let ak = alpha * k as f64;
    if ak < 1.0 - 1e-9 {
        return Err(Error::invalid(format!("alpha * K = {ak} is below one scenario")));
    }
    // The small slack keeps 0.05 * 1000 from rounding up to 51.
    Ok(((ak - 1e-9).ceil() as usize).clamp(1, k))
}

/// Indices of the `ceil(alpha * K)` costliest scenarios, most expensive
/// first; ties go to the lower index.
pub fn rank_scenarios(costs: &[f64], alpha: f64) -> Result<Vec<usize>> {
    if costs.is_empty() {
        return Err(Error::data("no scenario costs to rank"));
    }
    let n = tail_size(alpha, costs.len())?;
    let mut idx: Vec<usize> = (0..costs.len()).collect();
    idx.sort_by(|&a, &b| costs[b].total_cmp(&costs[a]).then(a.cmp(&b)));
    idx.truncate(n);
    Ok(idx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskScoreTable {
    pub alpha: f64,
    pub k: usize,
    pub worst_set: Vec<usize>,
    pub renewable_ids: Vec<String>,
    pub load_ids: Vec<String>,
    /// Tail-mean renewable attribution, `[hour][renewable]`.
    pub score: Vec<Vec<f64>>,
    /// Tail-mean load attribution, `[hour][load]`; informational only.
    pub load_score: Vec<Vec<f64>>,
}

/// Averages the attributions of the tail scenarios. `reports[i]` belongs
/// to scenario `worst_set[i]`.
pub fn risk_scores(
    reports: &[&AttributionReport],
    worst_set: &[usize],
    alpha: f64,
    k: usize,
) -> Result<RiskScoreTable> {
    if reports.len() != worst_set.len() {
        return Err(Error::data(format!(
            "missing scenario report: {} reports for {} tail scenarios",
            reports.len(),
            worst_set.len()
        )));
    }
    let first = reports.first().ok_or_else(|| Error::data("empty tail set"))?;
    let pick = |class: AssetClass| -> Vec<usize> {
        (0..first.assets.len())
            .filter(|&i| first.assets[i].class == class)
            .collect()
    };
    let (ren, loads) = (pick(AssetClass::Renewable), pick(AssetClass::Load));
    let hours = first.hours.len();
    let s = reports.len() as f64;
    let mean_of = |cols: &[usize]| -> Vec<Vec<f64>> {
        (0..hours)
            .map(|t| {
                cols.iter()
                    .map(|&c| reports.iter().map(|r| r.hours[t].attribution[c]).sum::<f64>() / s)
                    .collect()
            })
            .collect()
    };
    Ok(RiskScoreTable {
        alpha,
        k,
        worst_set: worst_set.to_vec(),
        renewable_ids: ren.iter().map(|&i| first.assets[i].id.clone()).collect(),
        load_ids: loads.iter().map(|&i| first.assets[i].id.clone()).collect(),
        score: mean_of(&ren),
        load_score: mean_of(&loads),
    })
}

/// `score / (q_fcst - tail_caps_sum / divisor)` where the divisor is `K` or
/// `alpha * K`; `None` when the gap is not positive.
pub fn per_mwh_score(score: f64, q_fcst: f64, tail_caps: &[f64], k: usize, alpha: f64, mean: TailMean) -> Option<f64> {
    let divisor = match mean {
        TailMean::AllScenarios => k as f64,
        TailMean::TailSize => alpha * k as f64,
    };
    let denom = q_fcst - tail_caps.iter().sum::<f64>() / divisor;
    (denom > EPSILON_DENOMINATOR).then(|| score / denom)
}

/// `clamp((R - r_low) / r_high, 0, 1)`.
pub fn adjust_fraction(r: f64, params: &AdjustmentParams) -> f64 {
    ((r - params.r_low) / params.r_high).clamp(0.0, 1.0)
}

/// `q_fcst - r * (q_fcst - q_min)`.
pub fn adjust_capacity(q_fcst: f64, q_min: f64, r: f64) -> f64 {
    q_fcst - r * (q_fcst - q_min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskConfig {
    pub alpha: f64,
    pub params: AdjustmentParams,
    pub tail_mean: TailMean,
    pub quadrature: QuadratureConfig,
    pub h: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustmentEntry {
    pub hour: usize,
    pub renewable: String,
    pub score: f64,
    /// `None` when the forecast does not exceed the tail-mean capacity.
    pub per_mwh: Option<f64>,
    pub r: f64,
    pub q_fcst: f64,
    pub q_min: f64,
    pub q_adj: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustedCapacities {
    pub renewable_ids: Vec<String>,
    /// `[hour][renewable]` for the real-time hours.
    pub q_adj: Vec<Vec<f64>>,
    pub entries: Vec<AdjustmentEntry>,
    pub scenario_costs: Vec<f64>,
    pub table: RiskScoreTable,
    /// Attribution of each tail scenario, in `table.worst_set` order.
    #[serde(skip)]
    pub tail_reports: Vec<AttributionReport>,
}

impl AdjustedCapacities {
    /// Day-ahead capacities: adjusted for the real-time hours, forecast
    /// beyond them.
    pub fn day_ahead(&self, day: &DayData) -> Vec<Vec<f64>> {
        (0..DAY_AHEAD_HOURS.min(day.forecast.hours()))
            .map(|t| self.q_adj.get(t).unwrap_or(&day.forecast.capacity[t]).clone())
            .collect()
    }

    pub fn max_fraction(&self) -> f64 {
        self.entries.iter().map(|e| e.r).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("hour,asset,score,per_mwh,r,q_fcst,q_min,q_adj\n");
        for e in &self.entries {
            let per_mwh = e.per_mwh.map_or_else(String::new, |v| v.to_string());
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                e.hour, e.renewable, e.score, per_mwh, e.r, e.q_fcst, e.q_min, e.q_adj
            ));
        }
        out
    }

    /// Writes the forecast renewable series with the adjusted hours
    /// substituted, in the renewable series format.
    pub fn write_series(&self, path: impl AsRef<Path>, day: &DayData) -> Result<()> {
        let rows: Vec<Vec<f64>> = (0..day.forecast.hours())
            .map(|t| self.q_adj.get(t).unwrap_or(&day.forecast.capacity[t]).clone())
            .collect();
        write_series(path, day.forecast.start, &self.renewable_ids, &rows)
    }
}

/// Runs the whole tail analysis for one day and returns adjusted capacities.
///
/// `initial` is the dispatch entering the day; the commitment's own
/// starting point is used when absent.
pub fn build_adjustments(
    grid: &GridSpec,
    day: &DayData,
    scenarios: &ScenarioSet,
    cfg: &RiskConfig,
    initial: Option<&[f64]>,
) -> Result<AdjustedCapacities> {
    cfg.params.validate()?;
    cfg.quadrature.validate()?;
    let k = scenarios.len();
    tail_size(cfg.alpha, k)?;
    let need = REAL_TIME_HOURS + cfg.h;
    if scenarios.hours() < need {
        return Err(Error::SeriesTooShort {
            role: "scenario".into(),
            need,
            got: scenarios.hours(),
        });
    }

    let (commit, start) = commit_day(grid, &day.forecast, None, initial);
    let costs = scenario_costs(grid, &commit, day, scenarios, &start, cfg.h)?;
    let worst = rank_scenarios(&costs, cfg.alpha)?;
    let reports: Vec<AttributionReport> = worst
        .par_iter()
        .map(|&j| {
            attribute_day(
                grid,
                &commit,
                &day.forecast,
                &scenarios.scenarios[j],
                &start,
                cfg.h,
                &cfg.quadrature,
            )
        })
        .collect::<Result<_>>()?;
    let table = risk_scores(&reports.iter().collect::<Vec<_>>(), &worst, cfg.alpha, k)?;

    let n_r = grid.renewables.len();
    let mut entries = Vec::with_capacity(REAL_TIME_HOURS * n_r);
    let mut q_adj = Vec::with_capacity(REAL_TIME_HOURS);
    for t in 0..REAL_TIME_HOURS {
        let mut row = Vec::with_capacity(n_r);
        for n in 0..n_r {
            let q_fcst = day.forecast.capacity[t][n];
            let q_min = scenarios
                .scenarios
                .iter()
                .map(|s| s.capacity[t][n])
                .fold(f64::INFINITY, f64::min)
                .min(q_fcst);
            let tail_caps: Vec<f64> = worst.iter().map(|&j| scenarios.scenarios[j].capacity[t][n]).collect();
            let score = table.score[t][n];
            let per_mwh = per_mwh_score(score, q_fcst, &tail_caps, k, cfg.alpha, cfg.tail_mean);
            let r = per_mwh.map_or(0.0, |v| adjust_fraction(v, &cfg.params));
            let q = adjust_capacity(q_fcst, q_min, r);
            row.push(q);
            entries.push(AdjustmentEntry {
                hour: t,
                renewable: grid.renewables[n].id.clone(),
                score,
                per_mwh,
                r,
                q_fcst,
                q_min,
                q_adj: q,
            });
        }
        q_adj.push(row);
    }

    Ok(AdjustedCapacities {
        renewable_ids: grid.renewables.iter().map(|r| r.id.clone()).collect(),
        q_adj,
        entries,
        scenario_costs: costs,
        table,
        tail_reports: reports,
    })
}

/// Total real-time cost of each scenario under `commit`, penalties included.
pub fn scenario_costs(
    grid: &GridSpec,
    commit: &CommitmentSchedule,
    day: &DayData,
    scenarios: &ScenarioSet,
    initial: &[f64],
    h: usize,
) -> Result<Vec<f64>> {
    scenarios
        .scenarios
        .par_iter()
        .map(|s| {
            let (outs, _) = dispatch_chain(grid, commit, &day.forecast, s, initial, REAL_TIME_HOURS, h)?;
            Ok(outs.iter().map(|o| o.hour_cost).sum())
        })
        .collect()
}

#[cfg(test)]
mod tests;
