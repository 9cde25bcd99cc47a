use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetClass {
    /// Initial state `p_prev` of a dispatchable unit.
    Initial,
    Load,
    Renewable,
}

impl AssetClass {
    pub fn as_str(self) -> &'static str {
        match self {
            AssetClass::Initial => "initial",
            AssetClass::Load => "load",
            AssetClass::Renewable => "renewable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetRef {
    pub id: String,
    pub class: AssetClass,
}

impl AssetRef {
    /// Dispatchables, then loads, then renewables.
    pub fn all(grid: &GridSpec) -> Vec<AssetRef> {
        let mk = |id: &String, class| AssetRef { id: id.clone(), class };
        grid.dispatchables
            .iter()
            .map(|g| mk(&g.id, AssetClass::Initial))
            .chain(grid.loads.iter().map(|l| mk(&l.id, AssetClass::Load)))
            .chain(grid.renewables.iter().map(|r| mk(&r.id, AssetClass::Renewable)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourAttribution {
    pub hour: usize,
    /// $ per asset, in [`AssetRef::all`] order.
    pub attribution: Vec<f64>,
    /// Path-average shadow price per asset.
    pub shadow_price: Vec<f64>,
    /// Window objective at the baseline and the target.
    pub c_fcst: f64,
    pub c_act: f64,
    /// `c_act - c_fcst - sum(attribution)`.
    pub gap: f64,
    /// Hour-`tau` cost of the target chain (penalties included).
    pub realized_cost: f64,
    pub nodes: usize,
    pub error_estimate: f64,
    pub budget_exhausted: bool,
}

impl HourAttribution {
    pub fn total(&self) -> f64 {
        self.attribution.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionReport {
    pub assets: Vec<AssetRef>,
    pub hours: Vec<HourAttribution>,
    pub relative_efficiency_gap: f64,
}

/// `max |gap| / max |c_act|` over hours.
pub fn efficiency_gap(hours: &[HourAttribution]) -> Result<f64> {
    let num = hours.iter().map(|h| h.gap.abs()).fold(0.0, f64::max);
    let den = hours.iter().map(|h| h.c_act.abs()).fold(0.0, f64::max);
    if den == 0.0 {
        if num == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::Model(
            "degenerate normalizer: every hour has zero actual cost".into(),
        ));
    }
    Ok(num / den)
}

impl AttributionReport {
    pub fn new(grid: &GridSpec, hours: Vec<HourAttribution>) -> Result<Self> {
        let relative_efficiency_gap = efficiency_gap(&hours)?;
        Ok(AttributionReport {
            assets: AssetRef::all(grid),
            hours,
            relative_efficiency_gap,
        })
    }

    pub fn asset_index(&self, id: &str, class: AssetClass) -> Option<usize> {
        self.assets.iter().position(|a| a.id == id && a.class == class)
    }

    /// Attribution of asset `idx` in every hour.
    pub fn series(&self, idx: usize) -> Vec<f64> {
        self.hours.iter().map(|h| h.attribution[idx]).collect()
    }

    /// Sum over hours per asset.
    pub fn asset_totals(&self) -> Vec<f64> {
        let mut t = vec![0.0; self.assets.len()];
        for h in &self.hours {
            for (acc, v) in t.iter_mut().zip(&h.attribution) {
                *acc += v;
            }
        }
        t
    }

    /// Hour-cost sum of the target chain.
    pub fn realized_cost(&self) -> f64 {
        self.hours.iter().map(|h| h.realized_cost).sum()
    }

    pub fn budget_exhausted(&self) -> bool {
        self.hours.iter().any(|h| h.budget_exhausted)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("hour,asset,class,attribution,shadow_price\n");
        for h in &self.hours {
            for (i, a) in self.assets.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    h.hour,
                    a.id,
                    a.class.as_str(),
                    h.attribution[i],
                    h.shadow_price[i]
                ));
            }
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        let gaps: Vec<f64> = self.hours.iter().map(|h| h.gap).collect();
        let totals = self.asset_totals();
        serde_json::json!({
            "relative_efficiency_gap": self.relative_efficiency_gap,
            "max_abs_gap": gaps.iter().map(|g| g.abs()).fold(0.0, f64::max),
            "budget_exhausted": self.budget_exhausted(),
            "total_nodes": self.hours.iter().map(|h| h.nodes).sum::<usize>(),
            "hours": self.hours.iter().map(|h| serde_json::json!({
                "hour": h.hour,
                "c_fcst": h.c_fcst,
                "c_act": h.c_act,
                "gap": h.gap,
                "nodes": h.nodes,
                "error_estimate": h.error_estimate,
                "budget_exhausted": h.budget_exhausted,
            })).collect::<Vec<_>>(),
            "asset_totals": self.assets.iter().zip(&totals).map(|(a, t)| serde_json::json!({
                "asset": a.id,
                "class": a.class.as_str(),
                "attribution": t,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn write(&self, csv_path: impl AsRef<Path>, json_path: impl AsRef<Path>) -> Result<()> {
        let (c, j) = (csv_path.as_ref(), json_path.as_ref());
        std::fs::write(c, self.to_csv()).map_err(|e| Error::io(c, e))?;
        let text = serde_json::to_string_pretty(&self.summary_json()).expect("json values serialize");
        std::fs::write(j, text + "\n").map_err(|e| Error::io(j, e))
    }
}
