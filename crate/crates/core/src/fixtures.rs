//! Small hand-checkable systems shared by unit tests.

use crate::dispatch::{HourlyInput, LookaheadHour};
use crate::grid::{Bus, DispatchableGen, GridSpec, LoadAsset, PenaltyConfig, RenewableGen, RenewableKind};

pub fn gen(id: &str, p_max: f64, cost: f64) -> DispatchableGen {
    DispatchableGen {
        id: id.into(),
        bus: "B1".into(),
        p_min: 0.0,
        p_max,
        ramp_up: 1000.0,
        ramp_down: 1000.0,
        marginal_cost: cost,
        no_load_cost: 0.0,
        min_up: 1,
        min_down: 1,
        must_run: false,
    }
}

pub fn one_bus(gens: Vec<DispatchableGen>, with_wind: bool) -> GridSpec {
    let renewables = if with_wind {
        vec![RenewableGen {
            id: "W1".into(),
            bus: "B1".into(),
            kind: RenewableKind::Wind,
        }]
    } else {
        vec![]
    };
    GridSpec::new(
        vec![Bus {
            id: "B1".into(),
            name: "only".into(),
        }],
        vec![],
        gens,
        renewables,
        vec![LoadAsset {
            id: "D1".into(),
            bus: "B1".into(),
        }],
        PenaltyConfig::default(),
        0.0,
    )
    .unwrap()
}

pub fn flat_input(grid: &GridSpec, demand: f64, cap: f64, h: usize) -> HourlyInput {
    let q = vec![cap; grid.renewables.len()];
    HourlyInput {
        p_prev: vec![0.0; grid.dispatchables.len()],
        demand: vec![demand],
        capacity: q.clone(),
        lookahead: (0..h)
            .map(|_| LookaheadHour {
                demand: vec![demand],
                capacity: q.clone(),
            })
            .collect(),
        reserve_base: vec![demand; h + 1],
    }
}
