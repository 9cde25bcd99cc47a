//! Grid data model: buses, PTDF lines, dispatchable and renewable
//! generators, load assets, and the hourly series that drive them.
//!
//! Everything here is immutable after construction and `Sync`, so a single
//! [`GridSpec`] can be shared by every worker in a parallel run.

mod format;
mod series;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use format::{load_grid, parse_grid, write_grid};
pub use series::{
    load_day_data, load_scenarios, parse_scenarios, read_series, synth_scenarios, write_scenarios, write_series,
    DayData, DayPaths, HourSeries, ScenarioSet, SeriesRole, DAY_AHEAD_HOURS, REAL_TIME_HOURS,
};

/// PTDF entries may exceed one by this much before a line is rejected.
pub const PTDF_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: String,
    /// MW, applies to both flow directions.
    pub flow_limit: f64,
    /// Bus id to flow sensitivity. Missing buses read as zero.
    pub ptdf: BTreeMap<String, f64>,
}

impl Line {
    pub fn ptdf_at(&self, bus: &str) -> f64 {
        self.ptdf.get(bus).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchableGen {
    pub id: String,
    pub bus: String,
    pub p_min: f64,
    pub p_max: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
    /// $/MWh
    pub marginal_cost: f64,
    /// $/h while committed
    pub no_load_cost: f64,
    pub min_up: u32,
    pub min_down: u32,
    pub must_run: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenewableKind {
    Wind,
    Solar,
}

impl RenewableKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RenewableKind::Wind => "wind",
            RenewableKind::Solar => "solar",
        }
    }
}

impl std::str::FromStr for RenewableKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "wind" => Ok(RenewableKind::Wind),
            "solar" | "pv" => Ok(RenewableKind::Solar),
            other => Err(format!("unknown renewable kind '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewableGen {
    pub id: String,
    pub bus: String,
    pub kind: RenewableKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadAsset {
    pub id: String,
    pub bus: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    /// $/MWh for both unserved load and over-generation.
    pub load_mismatch: f64,
    /// $/MWh of unmet spinning reserve.
    pub reserve_shortfall: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            load_mismatch: 10_000.0,
            reserve_shortfall: 1_000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub dispatchables: Vec<DispatchableGen>,
    pub renewables: Vec<RenewableGen>,
    pub loads: Vec<LoadAsset>,
    pub penalties: PenaltyConfig,
    /// Spinning reserve as a fraction of forecast system demand.
    pub reserve_factor: f64,
}

impl GridSpec {
    /// Builds a grid and checks every invariant.
    pub fn new(
        buses: Vec<Bus>,
        lines: Vec<Line>,
        dispatchables: Vec<DispatchableGen>,
        renewables: Vec<RenewableGen>,
        loads: Vec<LoadAsset>,
        penalties: PenaltyConfig,
        reserve_factor: f64,
    ) -> Result<Self> {
        let grid = GridSpec {
            buses,
            lines,
            dispatchables,
            renewables,
            loads,
            penalties,
            reserve_factor,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        unique_ids("bus", self.buses.iter().map(|b| b.id.as_str()))?;
        unique_ids("line", self.lines.iter().map(|l| l.id.as_str()))?;
        unique_ids("generator", self.dispatchables.iter().map(|g| g.id.as_str()))?;
        unique_ids("renewable", self.renewables.iter().map(|r| r.id.as_str()))?;
        unique_ids("load", self.loads.iter().map(|l| l.id.as_str()))?;

        let buses: HashSet<&str> = self.buses.iter().map(|b| b.id.as_str()).collect();
        let check_bus = |asset: &str, bus: &str| -> Result<()> {
            if buses.contains(bus) {
                Ok(())
            } else {
                Err(Error::UnknownBus {
                    asset: asset.to_string(),
                    bus: bus.to_string(),
                })
            }
        };

        for line in &self.lines {
            if !(line.flow_limit >= 0.0) {
                return Err(invalid(&line.id, "flow_limit must be >= 0"));
            }
            for (bus, value) in &line.ptdf {
                check_bus(&line.id, bus)?;
                if !value.is_finite() || value.abs() > 1.0 + PTDF_TOLERANCE {
                    return Err(invalid(&line.id, format!("ptdf {value} at bus {bus} out of range")));
                }
            }
        }
        for g in &self.dispatchables {
            check_bus(&g.id, &g.bus)?;
            if !(g.p_min >= 0.0 && g.p_min <= g.p_max) || !g.p_max.is_finite() {
                return Err(invalid(&g.id, "requires 0 <= p_min <= p_max"));
            }
            if !(g.ramp_up >= 0.0 && g.ramp_down >= 0.0) {
                return Err(invalid(&g.id, "ramp limits must be >= 0"));
            }
            if !(g.marginal_cost >= 0.0 && g.no_load_cost >= 0.0) {
                return Err(invalid(&g.id, "costs must be >= 0"));
            }
            if g.min_up < 1 || g.min_down < 1 {
                return Err(invalid(&g.id, "min_up and min_down must be >= 1"));
            }
        }
        for r in &self.renewables {
            check_bus(&r.id, &r.bus)?;
        }
        for l in &self.loads {
            check_bus(&l.id, &l.bus)?;
        }
        if !(self.penalties.load_mismatch >= 0.0 && self.penalties.reserve_shortfall >= 0.0) {
            return Err(Error::invalid("penalties must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.reserve_factor) {
            return Err(Error::invalid(format!(
                "reserve_factor {} outside [0, 1]",
                self.reserve_factor
            )));
        }
        Ok(())
    }

    /// Same grid with a different spinning-reserve factor.
    pub fn with_reserve_factor(&self, reserve_factor: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&reserve_factor) {
            return Err(Error::invalid(format!(
                "reserve_factor {reserve_factor} outside [0, 1]"
            )));
        }
        let mut grid = self.clone();
        grid.reserve_factor = reserve_factor;
        Ok(grid)
    }

    pub fn bus_index(&self) -> HashMap<&str, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect()
    }

    /// Dense PTDF matrix, `[line][bus]` in `self.buses` order.
    pub fn ptdf_matrix(&self) -> Vec<Vec<f64>> {
        self.lines
            .iter()
            .map(|line| self.buses.iter().map(|b| line.ptdf_at(&b.id)).collect())
            .collect()
    }

    pub fn load_position(&self, id: &str) -> Option<usize> {
        self.loads.iter().position(|l| l.id == id)
    }

    pub fn renewable_position(&self, id: &str) -> Option<usize> {
        self.renewables.iter().position(|r| r.id == id)
    }
}

fn invalid(asset: &str, message: impl Into<String>) -> Error {
    Error::InvalidAsset {
        asset: asset.to_string(),
        message: message.into(),
    }
}

fn unique_ids<'a>(category: &'static str, ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::DuplicateId {
                category,
                id: id.to_string(),
            });
        }
    }
    Ok(())
}
