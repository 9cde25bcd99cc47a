//! The 5-bus tutorial system and deterministic day generators used by the
//! examples, the CLI demo data, and the test suites.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{
    write_grid, write_series, Bus, DayData, DayPaths, DispatchableGen, GridSpec, HourSeries, Line, LoadAsset,
    PenaltyConfig, RenewableGen, RenewableKind,
};

const PTDF: [(&str, f64, [f64; 5]); 6] = [
    ("L12", 250.0, [0.1939, -0.4759, -0.3490, 0.0, 0.1595]),
    ("L14", 250.0, [0.4376, 0.2583, 0.1895, 0.0, 0.3600]),
    ("L15", 250.0, [0.3685, 0.2176, 0.1595, 0.0, -0.5195]),
    ("L23", 250.0, [0.1939, 0.5241, -0.3490, 0.0, 0.1595]),
    ("L34", 150.0, [0.1939, 0.5241, 0.6510, 0.0, 0.1595]),
    ("L45", 250.0, [-0.3685, -0.2176, -0.1595, 0.0, -0.4805]),
];

const LOAD_PEAK: [f64; 3] = [120.0, 140.0, 160.0];
const WIND_CAP: f64 = 250.0;
const SOLAR_CAP: f64 = 100.0;

/// Five buses, six PTDF lines, four thermal units, one wind and one solar
/// plant, three loads. Reference bus is B4.
pub fn tutorial_grid() -> GridSpec {
    let bus_ids = ["B1", "B2", "B3", "B4", "B5"];
    let names = ["Alder", "Birch", "Cedar", "Dogwood", "Elm"];
    let buses = bus_ids
        .iter()
        .zip(names)
        .map(|(id, name)| Bus {
            id: id.to_string(),
            name: name.to_string(),
        })
        .collect();
    let lines = PTDF
        .iter()
        .map(|(id, limit, row)| Line {
            id: id.to_string(),
            flow_limit: *limit,
            ptdf: bus_ids
                .iter()
                .zip(row)
                .map(|(b, v)| (b.to_string(), *v))
                .collect::<BTreeMap<_, _>>(),
        })
        .collect();
    let gen = |id: &str, bus: &str, p_min, p_max, ramp, mc, nl, mu, md, must_run| DispatchableGen {
        id: id.into(),
        bus: bus.into(),
        p_min,
        p_max,
        ramp_up: ramp,
        ramp_down: ramp,
        marginal_cost: mc,
        no_load_cost: nl,
        min_up: mu,
        min_down: md,
        must_run,
    };
    let dispatchables = vec![
        gen("G1", "B1", 40.0, 200.0, 120.0, 14.0, 300.0, 4, 4, true),
        gen("G2", "B3", 30.0, 150.0, 150.0, 22.0, 200.0, 2, 2, false),
        gen("G3", "B4", 10.0, 100.0, 100.0, 35.0, 100.0, 1, 1, false),
        gen("G4", "B5", 0.0, 80.0, 80.0, 60.0, 50.0, 1, 1, false),
    ];
    let renewables = vec![
        RenewableGen {
            id: "W1".into(),
            bus: "B3".into(),
            kind: RenewableKind::Wind,
        },
        RenewableGen {
            id: "S1".into(),
            bus: "B2".into(),
            kind: RenewableKind::Solar,
        },
    ];
    let loads = ["D2", "D3", "D4"]
        .iter()
        .zip(["B2", "B3", "B4"])
        .map(|(id, bus)| LoadAsset {
            id: id.to_string(),
            bus: bus.to_string(),
        })
        .collect();
    GridSpec::new(
        buses,
        lines,
        dispatchables,
        renewables,
        loads,
        PenaltyConfig::default(),
        0.05,
    )
    .expect("tutorial grid is valid")
}

/// How a generated day's actuals relate to its forecast.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DayShape {
    /// Actual equals forecast exactly.
    Identical,
    /// Small load noise and moderate wind/solar errors.
    Accurate,
    /// Forecast wind is high; actual wind is a fifth of it.
    WindOverForecast,
    /// Only the first renewable deviates (60% of forecast).
    SingleShortfall,
}

pub fn load_factor(hour: usize) -> f64 {
    let hod = (hour % 24) as f64;
    0.75 - 0.2 * (2.0 * PI * (hod - 4.0) / 24.0).cos()
}

pub fn solar_factor(hour: usize) -> f64 {
    let hod = (hour % 24) as f64;
    if hod > 6.0 && hod < 18.0 {
        (PI * (hod - 6.0) / 12.0).sin()
    } else {
        0.0
    }
}

pub fn wind_factor(hour: usize) -> f64 {
    let hod = (hour % 24) as f64;
    0.5 + 0.25 * (2.0 * PI * hod / 24.0).cos()
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

/// Deterministic day for any grid whose assets follow the tutorial naming;
/// loads cycle through the tutorial peaks, renewables use their kind's
/// profile. Forecast covers 48 hours, actual `24 + h`.
pub fn tutorial_day(grid: &GridSpec, date: NaiveDate, shape: DayShape, h: usize) -> DayData {
    let fcst_hours = 48.max(24 + h);
    let act_hours = 24 + h;
    let mut rng = ChaCha8Rng::seed_from_u64(date.num_days_from_ce() as u64);
    let start = date.and_hms_opt(0, 0, 0).expect("midnight");
    let wind_level = match shape {
        DayShape::WindOverForecast => 0.85,
        _ => 1.0,
    };

    let mut f_demand = Vec::with_capacity(fcst_hours);
    let mut f_cap = Vec::with_capacity(fcst_hours);
    for t in 0..fcst_hours {
        let lf = load_factor(t);
        f_demand.push(
            (0..grid.loads.len())
                .map(|l| round3(LOAD_PEAK[l % LOAD_PEAK.len()] * lf))
                .collect::<Vec<f64>>(),
        );
        f_cap.push(
            grid.renewables
                .iter()
                .map(|r| match r.kind {
                    RenewableKind::Wind => match shape {
                        DayShape::WindOverForecast => round3(WIND_CAP * wind_level),
                        _ => round3(WIND_CAP * wind_factor(t)),
                    },
                    RenewableKind::Solar => round3(SOLAR_CAP * solar_factor(t)),
                })
                .collect::<Vec<f64>>(),
        );
    }

    let mut a_demand = Vec::with_capacity(act_hours);
    let mut a_cap = Vec::with_capacity(act_hours);
    for t in 0..act_hours {
        let (d, q): (Vec<f64>, Vec<f64>) = match shape {
            DayShape::Identical => (f_demand[t].clone(), f_cap[t].clone()),
            DayShape::SingleShortfall => {
                let mut q = f_cap[t].clone();
                if let Some(first) = q.first_mut() {
                    *first = round3(*first * 0.6);
                }
                (f_demand[t].clone(), q)
            }
            DayShape::Accurate | DayShape::WindOverForecast => {
                let d = f_demand[t]
                    .iter()
                    .map(|v| round3(v * (1.0 + 0.03 * (rng.random::<f64>() - 0.5) * 2.0)))
                    .collect();
                let q = f_cap[t]
                    .iter()
                    .zip(&grid.renewables)
                    .map(|(v, r)| {
                        let noise = (rng.random::<f64>() - 0.5) * 2.0;
                        let factor = match (shape, r.kind) {
                            (DayShape::WindOverForecast, RenewableKind::Wind) => 0.2 + 0.05 * noise,
                            (_, RenewableKind::Wind) => 1.0 + 0.25 * noise,
                            (_, RenewableKind::Solar) => 1.0 + 0.15 * noise,
                        };
                        round3(v * factor.max(0.0))
                    })
                    .collect();
                (d, q)
            }
        };
        a_demand.push(d);
        a_cap.push(q);
    }

    DayData::new(
        grid,
        HourSeries {
            start,
            demand: f_demand,
            capacity: f_cap,
        },
        HourSeries {
            start,
            demand: a_demand,
            capacity: a_cap,
        },
        h,
    )
    .expect("generated day is valid")
}

/// Seven consecutive days starting at `start`; days 1, 3 and 6 carry a
/// wind over-forecast.
pub fn tutorial_week(grid: &GridSpec, start: NaiveDate, h: usize) -> Vec<DayData> {
    (0..7)
        .map(|i| {
            let date = start + chrono::Duration::days(i as i64);
            let shape = if matches!(i, 1 | 3 | 6) {
                DayShape::WindOverForecast
            } else {
                DayShape::Accurate
            };
            tutorial_day(grid, date, shape, h)
        })
        .collect()
}

/// Writes a day's four series files into `dir` in the standard layout.
pub fn write_day(grid: &GridSpec, day: &DayData, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = DayPaths::in_dir(dir);
    let l: Vec<String> = grid.loads.iter().map(|x| x.id.clone()).collect();
    let r: Vec<String> = grid.renewables.iter().map(|x| x.id.clone()).collect();
    write_series(&paths.load_forecast, day.forecast.start, &l, &day.forecast.demand)?;
    write_series(&paths.load_actual, day.actual.start, &l, &day.actual.demand)?;
    write_series(
        &paths.renewable_forecast,
        day.forecast.start,
        &r,
        &day.forecast.capacity,
    )?;
    write_series(&paths.renewable_actual, day.actual.start, &r, &day.actual.capacity)
}

/// Writes `grid.txt` plus one `<date>/` directory per day under `dir`.
pub fn write_bundle(grid: &GridSpec, days: &[DayData], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let g = dir.join("grid.txt");
    std::fs::write(&g, write_grid(grid)).map_err(|e| Error::io(&g, e))?;
    for day in days {
        write_day(grid, day, &dir.join(day.date.to_string()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{load_day_data, DayPaths};
    use std::path::PathBuf;

    fn data_dir() -> PathBuf {
        PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data/tutorial"))
    }

    fn tutorial_date() -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 7, 8).unwrap()
    }

    /// Regenerates the checked-in tutorial week.
    #[test]
    #[ignore]
    fn write_tutorial_files() {
        let grid = tutorial_grid();
        let week = tutorial_week(&grid, NaiveDate::from_ymd_opt(2020, 7, 6).unwrap(), 1);
        write_bundle(&grid, &week, &data_dir()).unwrap();
    }

    #[test]
    fn checked_in_files_match_generator() {
        let grid = tutorial_grid();
        let loaded = load_day_data(&grid, &DayPaths::in_dir(data_dir().join("2020-07-08")), 1).unwrap();
        assert_eq!(loaded, tutorial_day(&grid, tutorial_date(), DayShape::Accurate, 1));
    }

    #[test]
    fn shapes() {
        let grid = tutorial_grid();
        let d = tutorial_day(&grid, tutorial_date(), DayShape::Identical, 2);
        assert_eq!(d.actual.hours(), 26);
        assert_eq!(&d.actual.demand[..], &d.forecast.demand[..26]);
        let d = tutorial_day(&grid, tutorial_date(), DayShape::SingleShortfall, 1);
        for t in 0..25 {
            assert_eq!(d.actual.demand[t], d.forecast.demand[t]);
            assert_eq!(d.actual.capacity[t][1], d.forecast.capacity[t][1]);
        }
        let d = tutorial_day(&grid, tutorial_date(), DayShape::WindOverForecast, 1);
        let f: f64 = (0..24).map(|t| d.forecast.capacity[t][0]).sum();
        let a: f64 = (0..24).map(|t| d.actual.capacity[t][0]).sum();
        assert!(a < 0.3 * f);
    }
}
