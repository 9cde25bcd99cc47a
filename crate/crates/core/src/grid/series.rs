//! Hourly demand/capacity series, day bundles, and Monte Carlo scenario sets.

use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::GridSpec;
use crate::error::{Error, Result};

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M";
const TIMESTAMP_PARSE: [&str; 4] = [
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
];

/// Hours the day-ahead commitment covers.
pub const DAY_AHEAD_HOURS: usize = 48;
/// Real-time dispatch hours per simulated day.
pub const REAL_TIME_HOURS: usize = 24;

/// Hour-major demand and renewable-capacity values, columns in grid order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourSeries {
    pub start: NaiveDateTime,
    /// `[hour][load]`, MW
    pub demand: Vec<Vec<f64>>,
    /// `[hour][renewable]`, MW
    pub capacity: Vec<Vec<f64>>,
}

impl HourSeries {
    pub fn hours(&self) -> usize {
        self.demand.len().min(self.capacity.len())
    }

    pub fn system_demand(&self, hour: usize) -> f64 {
        self.demand[hour].iter().sum()
    }

    pub fn system_capacity(&self, hour: usize) -> f64 {
        self.capacity[hour].iter().sum()
    }

    pub fn timestamp(&self, hour: usize) -> NaiveDateTime {
        self.start + Duration::hours(hour as i64)
    }

    fn check_non_negative(&self, grid: &GridSpec) -> Result<()> {
        for (t, row) in self.demand.iter().enumerate() {
            for (l, &v) in row.iter().enumerate() {
                if !(v >= 0.0) {
                    return Err(Error::NegativeValue {
                        asset: grid.loads[l].id.clone(),
                        hour: t,
                        value: v,
                    });
                }
            }
        }
        for (t, row) in self.capacity.iter().enumerate() {
            for (n, &v) in row.iter().enumerate() {
                if !(v >= 0.0) {
                    return Err(Error::NegativeValue {
                        asset: grid.renewables[n].id.clone(),
                        hour: t,
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Forecast and actual series for one operating day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayData {
    pub date: NaiveDate,
    /// Day-ahead forecast, at least 48 hours.
    pub forecast: HourSeries,
    /// Realized values, at least 24 + h hours.
    pub actual: HourSeries,
}

impl DayData {
    /// Validates horizons and signs, then builds the bundle.
    pub fn new(grid: &GridSpec, forecast: HourSeries, actual: HourSeries, h: usize) -> Result<Self> {
        check_shape(grid, &forecast, "forecast")?;
        check_shape(grid, &actual, "actual")?;
        let need_fcst = DAY_AHEAD_HOURS.max(REAL_TIME_HOURS + h);
        if forecast.hours() < need_fcst {
            return Err(Error::SeriesTooShort {
                role: "forecast".into(),
                need: need_fcst,
                got: forecast.hours(),
            });
        }
        if actual.hours() < REAL_TIME_HOURS + h {
            return Err(Error::SeriesTooShort {
                role: "actual".into(),
                need: REAL_TIME_HOURS + h,
                got: actual.hours(),
            });
        }
        if forecast.start != actual.start {
            return Err(Error::data(format!(
                "forecast starts at {} but actual starts at {}",
                forecast.start, actual.start
            )));
        }
        forecast.check_non_negative(grid)?;
        actual.check_non_negative(grid)?;
        Ok(DayData {
            date: forecast.start.date(),
            forecast,
            actual,
        })
    }
}

fn check_shape(grid: &GridSpec, s: &HourSeries, role: &str) -> Result<()> {
    if s.demand.len() != s.capacity.len() {
        return Err(Error::data(format!(
            "{role}: {} demand hours but {} capacity hours",
            s.demand.len(),
            s.capacity.len()
        )));
    }
    let bad_d = s.demand.iter().any(|r| r.len() != grid.loads.len());
    let bad_q = s.capacity.iter().any(|r| r.len() != grid.renewables.len());
    if bad_d || bad_q {
        return Err(Error::data(format!("{role}: row width does not match grid assets")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesRole {
    LoadForecast,
    LoadActual,
    RenewableForecast,
    RenewableActual,
}

impl SeriesRole {
    pub fn file_name(self) -> &'static str {
        match self {
            SeriesRole::LoadForecast => "load_forecast.csv",
            SeriesRole::LoadActual => "load_actual.csv",
            SeriesRole::RenewableForecast => "renewable_forecast.csv",
            SeriesRole::RenewableActual => "renewable_actual.csv",
        }
    }
}

/// The four series files that make up one day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DayPaths {
    pub load_forecast: PathBuf,
    pub load_actual: PathBuf,
    pub renewable_forecast: PathBuf,
    pub renewable_actual: PathBuf,
}

impl DayPaths {
    /// Conventional layout: `<dir>/{load,renewable}_{forecast,actual}.csv`.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        DayPaths {
            load_forecast: dir.join(SeriesRole::LoadForecast.file_name()),
            load_actual: dir.join(SeriesRole::LoadActual.file_name()),
            renewable_forecast: dir.join(SeriesRole::RenewableForecast.file_name()),
            renewable_actual: dir.join(SeriesRole::RenewableActual.file_name()),
        }
    }

    pub fn all(&self) -> [&Path; 4] {
        [
            &self.load_forecast,
            &self.load_actual,
            &self.renewable_forecast,
            &self.renewable_actual,
        ]
    }
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    TIMESTAMP_PARSE
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

fn column_map(headers: &csv::StringRecord, skip: usize, ids: &[String], label: &str) -> Result<Vec<usize>> {
    let names: Vec<&str> = headers.iter().skip(skip).map(str::trim).collect();
    for name in &names {
        if !ids.iter().any(|id| id == name) {
            return Err(Error::data(format!("{label}: asset '{name}' not in grid")));
        }
    }
    ids.iter()
        .map(|id| {
            names
                .iter()
                .position(|n| n == id)
                .map(|p| p + skip)
                .ok_or_else(|| Error::data(format!("{label}: missing column for asset '{id}'")))
        })
        .collect()
}

fn check_contiguous(label: &str, prev: NaiveDateTime, next: NaiveDateTime, row: usize) -> Result<()> {
    if next != prev + Duration::hours(1) {
        return Err(Error::data(format!(
            "{label}: missing hour after {} (row {row} is {next})",
            prev.format(TIMESTAMP_FORMAT)
        )));
    }
    Ok(())
}

/// Reads one series CSV and returns `(start, [hour][asset])` with columns
/// reordered to `ids`.
pub fn read_series(path: impl AsRef<Path>, ids: &[String]) -> Result<(NaiveDateTime, Vec<Vec<f64>>)> {
    let path = path.as_ref();
    let label = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let cols = column_map(&headers, 1, ids, &label)?;
    let mut start = None;
    let mut prev: Option<NaiveDateTime> = None;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let ts = parse_timestamp(&rec[0])
            .ok_or_else(|| Error::data(format!("{label}: row {}: bad timestamp '{}'", i + 1, &rec[0])))?;
        if let Some(p) = prev {
            check_contiguous(&label, p, ts, i + 1)?;
        } else {
            start = Some(ts);
        }
        prev = Some(ts);
        let row = cols
            .iter()
            .map(|&c| {
                let cell = rec.get(c).unwrap_or("");
                cell.parse::<f64>().map_err(|_| {
                    Error::data(format!(
                        "{label}: row {}: '{}' is not a number for '{}'",
                        i + 1,
                        cell,
                        &headers[c]
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let start = start.ok_or_else(|| Error::data(format!("{label}: no rows")))?;
    Ok((start, rows))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::data(format!("{}: {:?}", path.display(), other)),
    }
}

/// Writes `[hour][asset]` rows in the series CSV layout.
pub fn write_series(path: impl AsRef<Path>, start: NaiveDateTime, ids: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("timestamp");
    for id in ids {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    for (t, row) in rows.iter().enumerate() {
        out.push_str(&(start + Duration::hours(t as i64)).format(TIMESTAMP_FORMAT).to_string());
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_day_data(grid: &GridSpec, paths: &DayPaths, h: usize) -> Result<DayData> {
    for p in paths.all() {
        if !p.exists() {
            return Err(Error::data(format!("missing series file {}", p.display())));
        }
    }
    let load_ids: Vec<String> = grid.loads.iter().map(|l| l.id.clone()).collect();
    let ren_ids: Vec<String> = grid.renewables.iter().map(|r| r.id.clone()).collect();
    let (s_lf, lf) = read_series(&paths.load_forecast, &load_ids)?;
    let (s_la, la) = read_series(&paths.load_actual, &load_ids)?;
    let (s_rf, rf) = read_series(&paths.renewable_forecast, &ren_ids)?;
    let (s_ra, ra) = read_series(&paths.renewable_actual, &ren_ids)?;
    if s_lf != s_rf || s_la != s_ra {
        return Err(Error::data("load and renewable series start at different hours"));
    }
    let n_f = lf.len().min(rf.len());
    let n_a = la.len().min(ra.len());
    let forecast = HourSeries {
        start: s_lf,
        demand: lf[..n_f].to_vec(),
        capacity: rf[..n_f].to_vec(),
    };
    let actual = HourSeries {
        start: s_la,
        demand: la[..n_a].to_vec(),
        capacity: ra[..n_a].to_vec(),
    };
    DayData::new(grid, forecast, actual, h)
}

/// K aligned Monte Carlo scenarios of demand and renewable capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub scenarios: Vec<HourSeries>,
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<HourSeries>) -> Result<Self> {
        let first = scenarios.first().ok_or_else(|| Error::data("empty scenario set"))?;
        let hours = first.hours();
        for (j, s) in scenarios.iter().enumerate() {
            if s.hours() != hours || s.start != first.start {
                return Err(Error::data(format!("scenario {j} is not aligned with scenario 0")));
            }
        }
        Ok(ScenarioSet { scenarios })
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn hours(&self) -> usize {
        self.scenarios.first().map_or(0, HourSeries::hours)
    }
}

pub fn load_scenarios(grid: &GridSpec, path: impl AsRef<Path>, k: usize) -> Result<ScenarioSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenarios(grid, &text, &path.display().to_string(), k)
}

/// Parses the scenario CSV layout: `scenario,timestamp,<loads...>,<renewables...>`.
pub fn parse_scenarios(grid: &GridSpec, text: &str, label: &str, k: usize) -> Result<ScenarioSet> {
    if k == 0 {
        return Err(Error::data("empty scenario set"));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::data(format!("{label}: {e}")))?.clone();
    let mut ids: Vec<String> = grid.loads.iter().map(|l| l.id.clone()).collect();
    ids.extend(grid.renewables.iter().map(|r| r.id.clone()));
    let cols = column_map(&headers, 2, &ids, label)?;
    let n_load = grid.loads.len();

    let mut scenarios: Vec<HourSeries> = Vec::new();
    let mut current: Option<(usize, NaiveDateTime, HourSeries)> = None;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::data(format!("{label}: {e}")))?;
        let row_no = i + 1;
        let j: usize = rec[0]
            .parse()
            .map_err(|_| Error::data(format!("{label}: row {row_no}: bad scenario index '{}'", &rec[0])))?;
        let ts = parse_timestamp(&rec[1])
            .ok_or_else(|| Error::data(format!("{label}: row {row_no}: bad timestamp '{}'", &rec[1])))?;
        let mut values = Vec::with_capacity(cols.len());
        for (a, &c) in cols.iter().enumerate() {
            let cell = rec.get(c).unwrap_or("");
            if cell.is_empty() {
                return Err(Error::data(format!(
                    "{label}: scenario {j}: missing value for asset '{}'",
                    ids[a]
                )));
            }
            let v: f64 = cell.parse().map_err(|_| {
                Error::data(format!(
                    "{label}: scenario {j}: '{cell}' is not a number for '{}'",
                    ids[a]
                ))
            })?;
            if !(v >= 0.0) {
                return Err(Error::data(format!(
                    "{label}: scenario {j}: negative value {v} for asset '{}'",
                    ids[a]
                )));
            }
            values.push(v);
        }
        let (demand, capacity) = (values[..n_load].to_vec(), values[n_load..].to_vec());
        match &mut current {
            Some((cj, prev, s)) if *cj == j => {
                check_contiguous(&format!("{label}: scenario {j}"), *prev, ts, row_no)?;
                *prev = ts;
                s.demand.push(demand);
                s.capacity.push(capacity);
            }
            _ => {
                if let Some((cj, _, s)) = current.take() {
                    scenarios.push(s);
                    if j != cj + 1 {
                        return Err(Error::data(format!(
                            "{label}: scenario index {j} follows {cj}; blocks must be consecutive"
                        )));
                    }
                } else if j != 0 {
                    return Err(Error::data(format!("{label}: first scenario index is {j}, expected 0")));
                }
                current = Some((
                    j,
                    ts,
                    HourSeries {
                        start: ts,
                        demand: vec![demand],
                        capacity: vec![capacity],
                    },
                ));
            }
        }
    }
    if let Some((_, _, s)) = current {
        scenarios.push(s);
    }
    if scenarios.len() != k {
        return Err(Error::data(format!(
            "{label}: expected {k} scenarios, found {}",
            scenarios.len()
        )));
    }
    ScenarioSet::new(scenarios)
}

pub fn write_scenarios(grid: &GridSpec, set: &ScenarioSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let mut header = String::from("scenario,timestamp");
    for l in &grid.loads {
        header.push(',');
        header.push_str(&l.id);
    }
    for r in &grid.renewables {
        header.push(',');
        header.push_str(&r.id);
    }
    writeln!(w, "{header}").map_err(|e| Error::io(path, e))?;
    for (j, s) in set.scenarios.iter().enumerate() {
        for t in 0..s.hours() {
            let mut line = format!("{j},{}", s.timestamp(t).format(TIMESTAMP_FORMAT));
            for v in s.demand[t].iter().chain(&s.capacity[t]) {
                line.push(',');
                line.push_str(&v.to_string());
            }
            writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Multiplicative Gaussian perturbations of the day's forecast:
/// every value becomes `forecast * max(0, 1 + eps)`, `eps ~ N(0, rel_sigma^2)`.
///
/// Draw order is scenario, hour, loads then renewables, from a single
/// ChaCha8 stream seeded with `seed`.
pub fn synth_scenarios(day: &DayData, k: usize, seed: u64, rel_sigma: f64) -> Result<ScenarioSet> {
    if !(rel_sigma >= 0.0) || !rel_sigma.is_finite() {
        return Err(Error::invalid(format!("rel_sigma must be >= 0, got {rel_sigma}")));
    }
    if k == 0 {
        return Err(Error::data("empty scenario set"));
    }
    let normal = Normal::new(0.0, rel_sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fc = &day.forecast;
    let mut perturb = |v: f64| v * (1.0 + normal.sample(&mut rng)).max(0.0);
    let scenarios = (0..k)
        .map(|_| {
            let mut demand = Vec::with_capacity(fc.hours());
            let mut capacity = Vec::with_capacity(fc.hours());
            for t in 0..fc.hours() {
                demand.push(fc.demand[t].iter().map(|&v| perturb(v)).collect());
                capacity.push(fc.capacity[t].iter().map(|&v| perturb(v)).collect());
            }
            HourSeries {
                start: fc.start,
                demand,
                capacity,
            }
        })
        .collect();
    ScenarioSet::new(scenarios)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tutorial::{tutorial_day, tutorial_grid, DayShape};

    fn tutorial_dir() -> PathBuf {
        PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data/tutorial/2020-07-08"))
    }

    #[test]
    fn tutorial_day_loads() {
        let grid = tutorial_grid();
        let day = load_day_data(&grid, &DayPaths::in_dir(tutorial_dir()), 1).unwrap();
        assert_eq!(day.forecast.hours(), 48);
        assert_eq!(day.actual.hours(), 25);
        assert_eq!(day.date, NaiveDate::from_ymd_opt(2020, 7, 8).unwrap());
    }

    fn write_day(dir: &Path, day: &DayData, grid: &GridSpec, actual_hours: usize) {
        let l: Vec<String> = grid.loads.iter().map(|x| x.id.clone()).collect();
        let r: Vec<String> = grid.renewables.iter().map(|x| x.id.clone()).collect();
        let p = DayPaths::in_dir(dir);
        write_series(&p.load_forecast, day.forecast.start, &l, &day.forecast.demand).unwrap();
        write_series(&p.renewable_forecast, day.forecast.start, &r, &day.forecast.capacity).unwrap();
        write_series(&p.load_actual, day.actual.start, &l, &day.actual.demand[..actual_hours]).unwrap();
        write_series(
            &p.renewable_actual,
            day.actual.start,
            &r,
            &day.actual.capacity[..actual_hours],
        )
        .unwrap();
    }

    #[test]
    fn short_actual_is_rejected() {
        let grid = tutorial_grid();
        let day = tutorial_day(
            &grid,
            NaiveDate::from_ymd_opt(2020, 7, 8).unwrap(),
            DayShape::Accurate,
            1,
        );
        let dir = tempfile::tempdir().unwrap();
        write_day(dir.path(), &day, &grid, 24);
        let err = load_day_data(&grid, &DayPaths::in_dir(dir.path()), 1).unwrap_err();
        assert!(err.to_string().contains("actual series too short: need 25"), "{err}");
        write_day(dir.path(), &day, &grid, 25);
        assert!(load_day_data(&grid, &DayPaths::in_dir(dir.path()), 1).is_ok());
    }

    #[test]
    fn negative_demand_names_asset_and_hour() {
        let grid = tutorial_grid();
        let mut day = tutorial_day(
            &grid,
            NaiveDate::from_ymd_opt(2020, 7, 8).unwrap(),
            DayShape::Accurate,
            1,
        );
        day.actual.demand[3][1] = -5.0;
        let err = DayData::new(&grid, day.forecast.clone(), day.actual.clone(), 1).unwrap_err();
        match err {
            Error::NegativeValue { asset, hour, .. } => {
                assert_eq!(asset, grid.loads[1].id);
                assert_eq!(hour, 3);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn missing_hour_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, "timestamp,D2\n2020-01-01T00:00,1\n2020-01-01T02:00,1\n").unwrap();
        let err = read_series(&path, &["D2".to_string()]).unwrap_err();
        assert!(err.to_string().contains("missing hour"), "{err}");
    }

    #[test]
    fn unknown_asset_column_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, "timestamp,D2,ZZ\n2020-01-01T00:00,1,2\n").unwrap();
        let err = read_series(&path, &["D2".to_string()]).unwrap_err();
        assert!(err.to_string().contains("ZZ"), "{err}");
    }

    #[test]
    fn synth_zero_sigma_reproduces_forecast() {
        let grid = tutorial_grid();
        let day = tutorial_day(
            &grid,
            NaiveDate::from_ymd_opt(2020, 7, 8).unwrap(),
            DayShape::Accurate,
            1,
        );
        let set = synth_scenarios(&day, 5, 11, 0.0).unwrap();
        assert_eq!(set.len(), 5);
        for s in &set.scenarios {
            assert_eq!(s, &day.forecast);
        }
    }

    #[test]
    fn synth_is_deterministic() {
        let grid = tutorial_grid();
        let day = tutorial_day(
            &grid,
            NaiveDate::from_ymd_opt(2020, 7, 8).unwrap(),
            DayShape::Accurate,
            1,
        );
        let a = synth_scenarios(&day, 20, 99, 0.2).unwrap();
        let b = synth_scenarios(&day, 20, 99, 0.2).unwrap();
        assert_eq!(a, b);
        let c = synth_scenarios(&day, 20, 100, 0.2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn synth_sample_mean_tracks_forecast() {
        let grid = tutorial_grid();
        let day = tutorial_day(
            &grid,
            NaiveDate::from_ymd_opt(2020, 7, 8).unwrap(),
            DayShape::Accurate,
            1,
        );
        let k = 1000;
        let set = synth_scenarios(&day, k, 7, 0.2).unwrap();
        for t in 0..day.forecast.hours() {
            for l in 0..grid.loads.len() {
                let f = day.forecast.demand[t][l];
                let mean: f64 = set.scenarios.iter().map(|s| s.demand[t][l]).sum::<f64>() / k as f64;
                assert!((mean - f).abs() <= 0.03 * f, "hour {t} load {l}: {mean} vs {f}");
            }
            for n in 0..grid.renewables.len() {
                let f = day.forecast.capacity[t][n];
                let mean: f64 = set.scenarios.iter().map(|s| s.capacity[t][n]).sum::<f64>() / k as f64;
                assert!((mean - f).abs() <= 0.03 * f, "hour {t} renewable {n}: {mean} vs {f}");
            }
        }
    }

    #[test]
    fn scenario_file_round_trip_and_errors() {
        let grid = tutorial_grid();
        let day = tutorial_day(
            &grid,
            NaiveDate::from_ymd_opt(2020, 7, 8).unwrap(),
            DayShape::Accurate,
            1,
        );
        let set = synth_scenarios(&day, 4, 3, 0.1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scen.csv");
        write_scenarios(&grid, &set, &path).unwrap();
        let back = load_scenarios(&grid, &path, 4).unwrap();
        assert_eq!(back, set);

        assert!(load_scenarios(&grid, &path, 5).is_err());
        let err = load_scenarios(&grid, &path, 0).unwrap_err();
        assert_eq!(err.to_string(), "empty scenario set");

        // blank out one renewable cell in scenario 2
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let row = 1 + 2 * 48 + 5;
        let mut cells: Vec<&str> = lines[row].split(',').collect();
        let last = cells.len() - 1;
        cells[last] = "";
        lines[row] = cells.join(",");
        let err = parse_scenarios(&grid, &lines.join("\n"), "mem", 4).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("scenario 2") && msg.contains(&grid.renewables[1].id),
            "{msg}"
        );
    }
}
