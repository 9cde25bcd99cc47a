//! Batch command-line front end: `validate`, `attribute`, `risk`, `simulate`.
//!
//! Settings resolve as built-in defaults, then an optional TOML file
//! (`--config`), then command-line flags. The effective settings are echoed
//! to `<out>/config.toml` by every command that writes results.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::attribution::{attribute_day, AssetClass, QuadratureConfig};
use crate::dispatch::commit_day;
use crate::error::{Error, Result};
use crate::grid::{load_day_data, load_grid, load_scenarios, DayData, DayPaths, GridSpec, ScenarioSet};
use crate::plot::histogram;
use crate::risk::{build_adjustments, tail_size, AdjustmentParams, RiskConfig, TailMean};
use crate::simulator::{compare_policies, run_range, Comparison, PolicyConfig, ScenarioSpec};

/// Exit status for configuration and argument errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for unreadable or inconsistent input data.
pub const EXIT_DATA: i32 = 3;
/// Exit status for optimization failures.
pub const EXIT_SOLVE: i32 = 4;

const SCENARIO_FILE: &str = "scenarios.csv";

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Invalid(_) => EXIT_CONFIG,
        Error::Solve(_) | Error::Model(_) => EXIT_SOLVE,
        _ => EXIT_DATA,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gridrisk",
    version,
    about = "Cost attribution and risk-aware commitment for small grids"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Parse and check every input without solving anything.
    Validate,
    /// Attribute one day's forecast-error cost to individual assets.
    Attribute,
    /// Score tail scenarios and write adjusted renewable capacities.
    Risk,
    /// Simulate a date range under one or more commitment policies.
    Simulate,
}

/// Command-line overrides; anything left unset falls through to the config.
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// TOML file with any of the settings below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Grid file; defaults to `<data-dir>/grid.txt`.
    #[arg(long, global = true)]
    pub grid: Option<PathBuf>,
    /// Directory holding one `<YYYY-MM-DD>/` folder per day.
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Scenario CSV; defaults to `<day>/scenarios.csv`, else synthetic.
    #[arg(long, global = true)]
    pub scenarios: Option<PathBuf>,
    /// Day to process (first day for `simulate`).
    #[arg(long, global = true)]
    pub day: Option<NaiveDate>,
    /// Number of consecutive days.
    #[arg(long, global = true)]
    pub days: Option<usize>,
    /// Base seed for synthetic scenarios
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Tail fraction of scenarios
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Quadrature node budget per hour.
    #[arg(long, global = true)]
    pub qmax: Option<usize>,
    /// Quadrature relative error threshold.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub qtol: Option<f64>,
    /// Look-ahead hours per dispatch.
    #[arg(long, global = true)]
    pub h: Option<usize>,
    /// Comma-separated `rn:<reserve>` / `ra:<r_high>[:<r_low>]`.
    #[arg(long, global = true)]
    pub policies: Option<String>,
    /// Scenario count.
    #[arg(long = "K", global = true)]
    pub k: Option<usize>,
    /// Relative noise of synthetic scenarios.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub rel_sigma: Option<f64>,
    /// Score ($/MWh) below which no adjustment is made
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub r_low: Option<f64>,
    /// Score span ($/MWh) over which the adjustment grows to full
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub r_high: Option<f64>,
    /// `k` (divide by K) or `alpha_k` (divide by the tail size).
    #[arg(long, global = true)]
    pub tail_mean: Option<String>,
    /// Overrides the grid's reserve factor.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub reserve_factor: Option<f64>,
    /// Renewable whose tail attributions are histogrammed by `risk`.
    #[arg(long, global = true)]
    pub hist_asset: Option<String>,
}

/// Effective settings of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: Option<PathBuf>,
    pub data_dir: PathBuf,
    pub out: PathBuf,
    pub scenarios: Option<PathBuf>,
    pub day: Option<NaiveDate>,
    pub days: usize,
    pub seed: u64,
    pub jobs: usize,
    pub alpha: f64,
    pub qmax: usize,
    pub qtol: f64,
    pub h: usize,
    pub policies: String,
    pub k: usize,
    pub rel_sigma: f64,
    pub r_low: f64,
    pub r_high: f64,
    pub tail_mean: TailMean,
    pub reserve_factor: Option<f64>,
    pub hist_asset: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let q = QuadratureConfig::default();
        RunConfig {
            grid: None,
            data_dir: PathBuf::from("data"),
            out: PathBuf::from("out"),
            scenarios: None,
            day: None,
            days: 1,
            seed: 7,
            jobs: 0,
            alpha: 0.05,
            qmax: q.max_nodes,
            qtol: q.rel_threshold,
            h: 1,
            policies: "rn:0.10,rn:0.20,rn:0.30,ra:200".into(),
            k: 1000,
            rel_sigma: 0.3,
            r_low: 20.0,
            r_high: 200.0,
            tail_mean: TailMean::default(),
            reserve_factor: None,
            hist_asset: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Defaults, then the `--config` file, then flags.
    pub fn resolve(flags: &Flags) -> Result<Self> {
        let mut cfg = match &flags.config {
            Some(p) => {
                let text =
                    std::fs::read_to_string(p).map_err(|e| Error::invalid(format!("config {}: {e}", p.display())))?;
                Self::from_toml(&text)?
            }
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = &flags.$f { cfg.$f = v.clone(); })* };
        }
        macro_rules! set_opt {
            ($($f:ident),*) => { $(if flags.$f.is_some() { cfg.$f = flags.$f.clone(); })* };
        }
        set!(data_dir, out, days, seed, jobs, alpha, qmax, qtol, h, policies, k, rel_sigma, r_low, r_high);
        set_opt!(grid, scenarios, day, reserve_factor, hist_asset);
        if let Some(t) = &flags.tail_mean {
            cfg.tail_mean = t.parse()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.h == 0 {
            return Err(Error::invalid("h must be at least 1"));
        }
        if self.days == 0 {
            return Err(Error::invalid("days must be at least 1"));
        }
        if self.k == 0 {
            return Err(Error::invalid("K must be at least 1"));
        }
        if !(self.rel_sigma >= 0.0 && self.rel_sigma.is_finite()) {
            return Err(Error::invalid(format!(
                "rel_sigma must be >= 0, got {}",
                self.rel_sigma
            )));
        }
        if let Some(rf) = self.reserve_factor {
            if !(0.0..=1.0).contains(&rf) {
                return Err(Error::invalid(format!("reserve factor {rf} outside [0, 1]")));
            }
        }
        AdjustmentParams::new(self.r_low, self.r_high)?;
        self.quadrature().validate()
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        QuadratureConfig {
            max_nodes: self.qmax,
            rel_threshold: self.qtol,
            ..QuadratureConfig::default()
        }
    }

    pub fn grid_path(&self) -> PathBuf {
        self.grid.clone().unwrap_or_else(|| self.data_dir.join("grid.txt"))
    }

    pub fn day_dir(&self, date: NaiveDate) -> PathBuf {
        self.data_dir.join(date.to_string())
    }

    fn dates(&self) -> Result<Vec<NaiveDate>> {
        let first = self.day.ok_or_else(|| Error::invalid("--day is required"))?;
        Ok(first.iter_days().take(self.days).collect())
    }

    fn scenario_spec(&self) -> ScenarioSpec {
        ScenarioSpec {
            k: self.k,
            rel_sigma: self.rel_sigma,
            seed: self.seed,
        }
    }

    fn policy_template(&self, grid: &GridSpec) -> PolicyConfig {
        let mut p = PolicyConfig::risk_neutral(self.reserve_factor.unwrap_or(grid.reserve_factor));
        p.adjustment = AdjustmentParams {
            r_low: self.r_low,
            r_high: self.r_high,
        };
        p.alpha = self.alpha;
        p.tail_mean = self.tail_mean;
        p.scenarios = self.scenario_spec();
        p.quadrature = self.quadrature();
        p
    }

    fn load_grid(&self) -> Result<GridSpec> {
        let grid = load_grid(self.grid_path())?;
        match self.reserve_factor {
            Some(rf) => grid.with_reserve_factor(rf),
            None => Ok(grid),
        }
    }

    fn load_day(&self, grid: &GridSpec, date: NaiveDate) -> Result<DayData> {
        load_day_data(grid, &DayPaths::in_dir(self.day_dir(date)), self.h)
    }

    /// The explicit scenario file, else the day's own file if present.
    fn scenario_file(&self, date: NaiveDate) -> Option<PathBuf> {
        self.scenarios
            .clone()
            .or_else(|| Some(self.day_dir(date).join(SCENARIO_FILE)).filter(|p| p.exists()))
    }

    /// Scenarios for `day` and a label describing their origin.
    fn scenarios_for(&self, grid: &GridSpec, day: &DayData) -> Result<(ScenarioSet, String)> {
        match self.scenario_file(day.date) {
            Some(p) => Ok((load_scenarios(grid, &p, self.k)?, p.display().to_string())),
            None => Ok((self.scenario_spec().for_day(day)?, "synthetic".into())),
        }
    }

    fn prepare_out(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))?;
        write_text(&self.out.join("config.toml"), &self.to_toml())
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    write_text(
        path,
        &(serde_json::to_string_pretty(value).expect("json values serialize") + "\n"),
    )
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    let cfg = RunConfig::resolve(&cli.flags)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Validate => cmd_validate(&cfg),
        Command::Attribute => cmd_attribute(&cfg).map(|_| 0),
        Command::Risk => cmd_risk(&cfg).map(|_| 0),
        Command::Simulate => cmd_simulate(&cfg).map(|_| 0),
    })
}

/// Checks the grid, every day's series, and any scenario files. Returns 0
/// when everything parses, otherwise prints each failure and returns 3.
pub fn cmd_validate(cfg: &RunConfig) -> Result<i32> {
    let mut failures = Vec::new();
    let grid_path = cfg.grid_path();
    let grid = match cfg.load_grid() {
        Ok(g) => {
            println!(
                "ok    grid {}: {} buses, {} lines, {} dispatchable, {} renewable, {} loads",
                grid_path.display(),
                g.buses.len(),
                g.lines.len(),
                g.dispatchables.len(),
                g.renewables.len(),
                g.loads.len()
            );
            Some(g)
        }
        Err(e) => {
            failures.push(format!("grid {}: {e}", grid_path.display()));
            None
        }
    };
    if let Some(grid) = &grid {
        let dates = match cfg.day {
            Some(_) => cfg.dates()?,
            None => discover_dates(&cfg.data_dir),
        };
        if dates.is_empty() {
            failures.push(format!("no day directories under {}", cfg.data_dir.display()));
        }
        for date in dates {
            match cfg.load_day(grid, date) {
                Ok(day) => println!("ok    day {date}: {} forecast hours", day.forecast.hours()),
                Err(e) => failures.push(format!("day {date}: {e}")),
            }
            if let Some(p) = cfg.scenario_file(date) {
                match load_scenarios(grid, &p, cfg.k) {
                    Ok(s) => println!("ok    scenarios {}: {} scenarios", p.display(), s.len()),
                    Err(e) => failures.push(format!("scenarios {}: {e}", p.display())),
                }
            }
        }
    }
    for f in &failures {
        println!("error {f}");
    }
    if failures.is_empty() {
        println!("all inputs valid");
        Ok(0)
    } else {
        println!("{} problem(s) found", failures.len());
        Ok(EXIT_DATA)
    }
}

fn discover_dates(dir: &Path) -> Vec<NaiveDate> {
    let mut dates: Vec<NaiveDate> = std::fs::read_dir(dir)
        .into_iter()
        .flatten()
        .flatten()
        .filter(|e| e.path().is_dir())
        .filter_map(|e| e.file_name().to_str()?.parse().ok())
        .collect();
    dates.sort();
    dates
}

/// Attributes each selected day and writes `attr_<date>.csv` and `.json`.
pub fn cmd_attribute(cfg: &RunConfig) -> Result<()> {
    let grid = cfg.load_grid()?;
    let qcfg = cfg.quadrature();
    let mut work = Vec::new();
    for date in cfg.dates()? {
        work.push(cfg.load_day(&grid, date)?);
    }
    cfg.prepare_out()?;
    for day in &work {
        let (commit, start) = commit_day(&grid, &day.forecast, None, None);
        let report = attribute_day(&grid, &commit, &day.forecast, &day.actual, &start, cfg.h, &qcfg)?;
        let mut summary = report.summary_json();
        summary["date"] = day.date.to_string().into();
        summary["qmax"] = qcfg.max_nodes.into();
        summary["qtol"] = qcfg.rel_threshold.into();
        summary["h"] = cfg.h.into();
        summary["seed"] = cfg.seed.into();
        summary["realized_cost"] = report.realized_cost().into();
        let csv = cfg.out.join(format!("attr_{}.csv", day.date));
        write_text(&csv, &report.to_csv())?;
        write_json(&cfg.out.join(format!("attr_{}.json", day.date)), &summary)?;
        println!(
            "{}: gap {:.4}, {} nodes -> {}",
            day.date,
            report.relative_efficiency_gap,
            report.hours.iter().map(|h| h.nodes).sum::<usize>(),
            csv.display()
        );
    }
    Ok(())
}

/// Runs the tail analysis for each selected day and writes the score table,
/// the adjusted renewable series, and a JSON summary.
pub fn cmd_risk(cfg: &RunConfig) -> Result<()> {
    let grid = cfg.load_grid()?;
    tail_size(cfg.alpha, cfg.k)?;
    let risk_cfg = RiskConfig {
        alpha: cfg.alpha,
        params: AdjustmentParams::new(cfg.r_low, cfg.r_high)?,
        tail_mean: cfg.tail_mean,
        quadrature: cfg.quadrature(),
        h: cfg.h,
    };
    let hist_idx = match &cfg.hist_asset {
        Some(id) => Some(
            grid.renewable_position(id)
                .map(|_| id.clone())
                .ok_or_else(|| Error::invalid(format!("unknown renewable '{id}' for histogram")))?,
        ),
        None => None,
    };
    let dates = cfg.dates()?;
    if cfg.scenarios.is_some() && dates.len() > 1 {
        return Err(Error::invalid(
            "--scenarios names one file; use per-day scenarios.csv for ranges",
        ));
    }
    let mut work = Vec::new();
    for date in dates {
        let day = cfg.load_day(&grid, date)?;
        let (set, source) = cfg.scenarios_for(&grid, &day)?;
        work.push((day, set, source));
    }
    cfg.prepare_out()?;
    for (day, set, source) in &work {
        let adj = build_adjustments(&grid, day, set, &risk_cfg, None)?;
        let date = day.date;
        write_text(&cfg.out.join(format!("risk_{date}.csv")), &adj.to_csv())?;
        let series = cfg.out.join(format!("adjusted_{date}.csv"));
        adj.write_series(&series, day)?;
        let summary = serde_json::json!({
            "date": date.to_string(),
            "k": set.len(),
            "alpha": cfg.alpha,
            "tail_size": adj.table.worst_set.len(),
            "worst_set": adj.table.worst_set,
            "tail_mean": cfg.tail_mean,
            "r_low": cfg.r_low,
            "r_high": cfg.r_high,
            "max_fraction": adj.max_fraction(),
            "scenario_source": source,
            "seed": cfg.seed,
            "rel_sigma": cfg.rel_sigma,
            "qmax": cfg.qmax,
            "qtol": cfg.qtol,
            "h": cfg.h,
            "scenario_costs": adj.scenario_costs,
        });
        write_json(&cfg.out.join(format!("risk_{date}.json")), &summary)?;
        if let Some(id) = &hist_idx {
            let values: Vec<f64> = adj
                .tail_reports
                .iter()
                .filter_map(|r| r.asset_index(id, AssetClass::Renewable).map(|i| r.asset_totals()[i]))
                .collect();
            let bins = ((values.len() as f64).sqrt().ceil() as usize).max(5);
            let svg = histogram(&format!("{id} tail-scenario attribution, {date} ($)"), &values, bins);
            write_text(&cfg.out.join(format!("hist_{id}_{date}.svg")), &svg)?;
        }
        println!(
            "{date}: |S| = {} of K = {}, max adjustment {:.3} -> {}",
            adj.table.worst_set.len(),
            set.len(),
            adj.max_fraction(),
            series.display()
        );
    }
    Ok(())
}

/// Simulates the selected range under every policy and writes the
/// comparison tables, plot, and per-day results.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<()> {
    let grid = cfg.load_grid()?;
    let policies = PolicyConfig::parse_list(&cfg.policies, &cfg.policy_template(&grid))?;
    let dates = cfg.dates()?;
    let mut days = Vec::with_capacity(dates.len());
    for date in &dates {
        days.push(cfg.load_day(&grid, *date)?);
    }
    let files: Vec<Option<PathBuf>> = match &cfg.scenarios {
        Some(p) if dates.len() == 1 => vec![Some(p.clone())],
        Some(_) => {
            return Err(Error::invalid(
                "--scenarios names one file; use per-day scenarios.csv for ranges",
            ))
        }
        None => dates.iter().map(|d| cfg.scenario_file(*d)).collect(),
    };
    let sets: Option<Vec<ScenarioSet>> = if files.iter().all(Option::is_some) {
        Some(
            files
                .iter()
                .flatten()
                .map(|p| load_scenarios(&grid, p, cfg.k))
                .collect::<Result<_>>()?,
        )
    } else {
        None
    };
    cfg.prepare_out()?;
    let cmp = if policies.len() >= 2 {
        compare_policies(&grid, &days, &policies, cfg.h, sets.as_deref())?
    } else {
        Comparison {
            runs: vec![run_range(&grid, &days, &policies[0], cfg.h, sets.as_deref())?],
        }
    };
    cmp.write(&cfg.out)?;
    let summary = serde_json::json!({
        "first_day": dates[0].to_string(),
        "days": dates.len(),
        "seed": cfg.seed,
        "scenario_source": if sets.is_some() { "files" } else { "synthetic" },
        "policies": cmp.runs.iter().map(|r| serde_json::json!({
            "name": r.policy.name,
            "total_cost": r.total_cost(),
            "mean_daily_cost": r.mean_daily_cost(),
            "total_shed": r.total_shed(),
        })).collect::<Vec<_>>(),
    });
    write_json(&cfg.out.join("summary.json"), &summary)?;
    for r in &cmp.runs {
        println!(
            "{:<12} total cost {:>14.2}  load shed {:>10.3} MWh",
            r.policy.name,
            r.total_cost(),
            r.total_shed()
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests;
