//! Rolling day-ahead / real-time simulation under a commitment policy.
//!
//! Each day is committed on its forecast (risk-neutral) or on tail-adjusted
//! renewable capacity (risk-averse), then dispatched hour by hour against
//! actuals with the real capacities. The final dispatch of a day is the
//! only state carried into the next.

use std::path::Path;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attribution::QuadratureConfig;
use crate::dispatch::{commit_day, dispatch_chain, DispatchOutcome};
use crate::error::{Error, Result};
use crate::grid::{synth_scenarios, DayData, GridSpec, ScenarioSet, REAL_TIME_HOURS};
use crate::plot::line_chart;
use crate::risk::{build_adjustments, AdjustedCapacities, AdjustmentParams, RiskConfig, TailMean};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    RiskNeutral,
    RiskAverse,
}

/// Synthetic scenario generation used when no scenario file is supplied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub k: usize,
    pub rel_sigma: f64,
    pub seed: u64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            k: 100,
            rel_sigma: 0.3,
            seed: 7,
        }
    }
}

impl ScenarioSpec {
    /// Each day draws from its own stream derived from the run seed.
    pub fn for_day(&self, day: &DayData) -> Result<ScenarioSet> {
        let seed = self.seed.wrapping_add(day.date.num_days_from_ce() as u64);
        synth_scenarios(day, self.k, seed, self.rel_sigma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub name: String,
    pub mode: PolicyMode,
    pub reserve_factor: f64,
    /// Ignored by risk-neutral policies.
    pub adjustment: AdjustmentParams,
    pub alpha: f64,
    pub tail_mean: TailMean,
    pub scenarios: ScenarioSpec,
    pub quadrature: QuadratureConfig,
}

impl PolicyConfig {
    pub fn risk_neutral(reserve_factor: f64) -> Self {
        PolicyConfig {
            name: format!("rn:{reserve_factor:.2}"),
            mode: PolicyMode::RiskNeutral,
            reserve_factor,
            adjustment: AdjustmentParams {
                r_low: 20.0,
                r_high: 200.0,
            },
            alpha: 0.05,
            tail_mean: TailMean::default(),
            scenarios: ScenarioSpec::default(),
            quadrature: QuadratureConfig::default(),
        }
    }

    pub fn risk_averse(r_low: f64, r_high: f64) -> Self {
        PolicyConfig {
            name: format!("ra:{r_high}"),
            mode: PolicyMode::RiskAverse,
            adjustment: AdjustmentParams { r_low, r_high },
            ..PolicyConfig::risk_neutral(0.05)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.reserve_factor) {
            return Err(Error::invalid(format!(
                "policy {}: reserve factor {} outside [0, 1]",
                self.name, self.reserve_factor
            )));
        }
        if self.mode == PolicyMode::RiskAverse {
            self.adjustment.validate()?;
            crate::risk::tail_size(self.alpha, self.scenarios.k)?;
            self.quadrature.validate()?;
            if !(self.scenarios.rel_sigma >= 0.0) {
                return Err(Error::invalid("rel_sigma must be >= 0"));
            }
        }
        Ok(())
    }

    /// Parses `rn:<reserve>` and `ra:<r_high>[:<r_low>]` tokens, comma
    /// separated. Unspecified settings come from `template`.
    pub fn parse_list(text: &str, template: &PolicyConfig) -> Result<Vec<PolicyConfig>> {
        let mut out = Vec::new();
        for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let parts: Vec<&str> = token.split(':').collect();
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::invalid(format!("policy '{token}': '{s}' is not a number")))
            };
            let mut p = template.clone();
            p.name = token.to_string();
            match parts.as_slice() {
                ["rn", rf] => {
                    p.mode = PolicyMode::RiskNeutral;
                    p.reserve_factor = num(rf)?;
                }
                ["ra", hi] => {
                    p.mode = PolicyMode::RiskAverse;
                    p.adjustment.r_high = num(hi)?;
                }
                ["ra", hi, lo] => {
                    p.mode = PolicyMode::RiskAverse;
                    p.adjustment.r_high = num(hi)?;
                    p.adjustment.r_low = num(lo)?;
                }
                _ => {
                    return Err(Error::invalid(format!(
                        "unrecognized policy '{token}' (use rn:<reserve> or ra:<r_high>)"
                    )))
                }
            }
            p.validate()?;
            out.push(p);
        }
        if out.is_empty() {
            return Err(Error::invalid("no policies given"));
        }
        Ok(out)
    }

    fn risk_config(&self, h: usize) -> RiskConfig {
        RiskConfig {
            alpha: self.alpha,
            params: self.adjustment,
            tail_mean: self.tail_mean,
            quadrature: self.quadrature,
            h,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourResult {
    pub hour: usize,
    /// Hour cost including penalties.
    pub cost: f64,
    pub generation_cost: f64,
    pub shed: f64,
    pub over_gen: f64,
    pub reserve_shortfall: f64,
    pub committed: Vec<bool>,
    pub dispatch: Vec<f64>,
    pub renewable_used: Vec<f64>,
    /// Actual renewable capacity left unused.
    pub curtailment: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayResult {
    pub date: NaiveDate,
    /// Generation plus penalty cost, summed over hours.
    pub production_cost: f64,
    pub generation_cost: f64,
    pub load_shed: f64,
    pub over_gen: f64,
    pub reserve_shortfall: f64,
    /// Largest capacity haircut fraction applied to the commitment.
    pub max_adjustment: f64,
    pub hours: Vec<HourResult>,
    pub final_dispatch: Vec<f64>,
}

impl DayResult {
    fn from_outcomes(
        date: NaiveDate,
        day: &DayData,
        committed: impl Fn(usize) -> Vec<bool>,
        outcomes: &[DispatchOutcome],
        max_adjustment: f64,
    ) -> Self {
        let hours: Vec<HourResult> = outcomes
            .iter()
            .enumerate()
            .map(|(t, o)| HourResult {
                hour: t,
                cost: o.hour_cost,
                generation_cost: o.generation_cost,
                shed: o.total_shed(),
                over_gen: o.over_gen,
                reserve_shortfall: o.reserve_shortfall,
                committed: committed(t),
                dispatch: o.dispatch.clone(),
                renewable_used: o.renewable_used.clone(),
                curtailment: day.actual.capacity[t]
                    .iter()
                    .zip(&o.renewable_used)
                    .map(|(q, w)| (q - w).max(0.0))
                    .collect(),
            })
            .collect();
        let sum = |f: fn(&HourResult) -> f64| hours.iter().map(f).sum::<f64>();
        DayResult {
            date,
            production_cost: sum(|h| h.cost),
            generation_cost: sum(|h| h.generation_cost),
            load_shed: sum(|h| h.shed),
            over_gen: sum(|h| h.over_gen),
            reserve_shortfall: sum(|h| h.reserve_shortfall),
            max_adjustment,
            final_dispatch: outcomes.last().map(|o| o.dispatch.clone()).unwrap_or_default(),
            hours,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayRun {
    pub result: DayResult,
    /// Present for risk-averse policies.
    pub adjustments: Option<AdjustedCapacities>,
}

/// Simulates one day. `initial` is the dispatch entering hour 0.
pub fn run_day(
    grid: &GridSpec,
    day: &DayData,
    policy: &PolicyConfig,
    h: usize,
    scenarios: Option<&ScenarioSet>,
    initial: Option<&[f64]>,
) -> Result<DayRun> {
    policy.validate()?;
    let grid = grid.with_reserve_factor(policy.reserve_factor)?;
    let adjustments = match policy.mode {
        PolicyMode::RiskNeutral => None,
        PolicyMode::RiskAverse => {
            let owned;
            let set = match scenarios {
                Some(s) => s,
                None => {
                    owned = policy.scenarios.for_day(day)?;
                    &owned
                }
            };
            Some(build_adjustments(&grid, day, set, &policy.risk_config(h), initial)?)
        }
    };
    let caps = adjustments.as_ref().map(|a| a.day_ahead(day));
    let (commit, start) = commit_day(&grid, &day.forecast, caps.as_deref(), initial);
    let (outcomes, _) = dispatch_chain(&grid, &commit, &day.forecast, &day.actual, &start, REAL_TIME_HOURS, h)?;
    let committed = |t: usize| (0..grid.dispatchables.len()).map(|g| commit.is_on(g, t)).collect();
    let max_adj = adjustments.as_ref().map_or(0.0, AdjustedCapacities::max_fraction);
    Ok(DayRun {
        result: DayResult::from_outcomes(day.date, day, committed, &outcomes, max_adj),
        adjustments,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeResult {
    pub policy: PolicyConfig,
    pub days: Vec<DayRun>,
}

impl RangeResult {
    pub fn total_cost(&self) -> f64 {
        self.days.iter().map(|d| d.result.production_cost).sum()
    }

    pub fn mean_daily_cost(&self) -> f64 {
        self.total_cost() / self.days.len().max(1) as f64
    }

    pub fn total_shed(&self) -> f64 {
        self.days.iter().map(|d| d.result.load_shed).sum()
    }
}

/// Simulates consecutive days, carrying each day's final dispatch forward.
/// `scenarios`, when given, holds one set per day.
pub fn run_range(
    grid: &GridSpec,
    days: &[DayData],
    policy: &PolicyConfig,
    h: usize,
    scenarios: Option<&[ScenarioSet]>,
) -> Result<RangeResult> {
    if days.is_empty() {
        return Err(Error::data("empty date range"));
    }
    for w in days.windows(2) {
        if w[1].date != w[0].date.succ_opt().unwrap_or(w[0].date) {
            return Err(Error::data(format!(
                "missing day: {} does not follow {}",
                w[1].date, w[0].date
            )));
        }
    }
    if let Some(s) = scenarios {
        if s.len() != days.len() {
            return Err(Error::data("one scenario set per day is required"));
        }
    }
    let mut out = Vec::with_capacity(days.len());
    let mut carry: Option<Vec<f64>> = None;
    for (i, day) in days.iter().enumerate() {
        let run = run_day(grid, day, policy, h, scenarios.map(|s| &s[i]), carry.as_deref())?;
        carry = Some(run.result.final_dispatch.clone());
        out.push(run);
    }
    Ok(RangeResult {
        policy: policy.clone(),
        days: out,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub runs: Vec<RangeResult>,
}

/// Runs every policy over the same days; policies run concurrently.
pub fn compare_policies(
    grid: &GridSpec,
    days: &[DayData],
    policies: &[PolicyConfig],
    h: usize,
    scenarios: Option<&[ScenarioSet]>,
) -> Result<Comparison> {
    if policies.len() < 2 {
        return Err(Error::invalid("comparison needs at least two policies"));
    }
    let runs = policies
        .par_iter()
        .map(|p| run_range(grid, days, p, h, scenarios))
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison { runs })
}

impl Comparison {
    fn table(&self, metric: fn(&DayResult) -> f64, agg_label: &str, agg: fn(&RangeResult) -> f64) -> String {
        let mut out = String::from("date");
        for r in &self.runs {
            out.push(',');
            out.push_str(&r.policy.name);
        }
        out.push('\n');
        if let Some(first) = self.runs.first() {
            for (i, d) in first.days.iter().enumerate() {
                out.push_str(&d.result.date.to_string());
                for r in &self.runs {
                    out.push_str(&format!(",{}", metric(&r.days[i].result)));
                }
                out.push('\n');
            }
        }
        out.push_str(agg_label);
        for r in &self.runs {
            out.push_str(&format!(",{}", agg(r)));
        }
        out.push('\n');
        out
    }

    /// Daily production cost per policy plus a mean row.
    pub fn cost_csv(&self) -> String {
        self.table(|d| d.production_cost, "mean", RangeResult::mean_daily_cost)
    }

    /// Daily load shed per policy plus a total row.
    pub fn shed_csv(&self) -> String {
        self.table(|d| d.load_shed, "total", RangeResult::total_shed)
    }

    pub fn cost_svg(&self) -> String {
        let labels: Vec<String> = self
            .runs
            .first()
            .map(|r| {
                r.days
                    .iter()
                    .map(|d| d.result.date.format("%m-%d").to_string())
                    .collect()
            })
            .unwrap_or_default();
        let series: Vec<(String, Vec<f64>)> = self
            .runs
            .iter()
            .map(|r| {
                (
                    r.policy.name.clone(),
                    r.days.iter().map(|d| d.result.production_cost).collect(),
                )
            })
            .collect();
        line_chart("Daily production cost ($)", &labels, &series)
    }

    /// Writes the comparison tables, plot, and one JSON file per policy-day.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let put = |name: String, text: String| {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
        };
        put("comparison_cost.csv".into(), self.cost_csv())?;
        put("comparison_shed.csv".into(), self.shed_csv())?;
        put("comparison_cost.svg".into(), self.cost_svg())?;
        for r in &self.runs {
            let slug = r.policy.name.replace(':', "-");
            for d in &r.days {
                let json = serde_json::to_string_pretty(&d.result).expect("day results serialize");
                put(format!("day_{}_{slug}.json", d.result.date), json + "\n")?;
                if let Some(adj) = &d.adjustments {
                    put(format!("risk_{}_{slug}.csv", d.result.date), adj.to_csv())?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
