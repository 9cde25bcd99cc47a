use super::*;
use crate::attribution::{AssetRef, HourAttribution};
use crate::grid::{synth_scenarios, HourSeries};
use crate::tutorial::{tutorial_day, tutorial_grid, DayShape};
use chrono::NaiveDate;
use proptest::prelude::*;

fn params(r_low: f64, r_high: f64) -> AdjustmentParams {
    AdjustmentParams::new(r_low, r_high).unwrap()
}

fn report(values: &[f64]) -> AttributionReport {
    AttributionReport {
        assets: vec![AssetRef {
            id: "W1".into(),
            class: AssetClass::Renewable,
        }],
        hours: values
            .iter()
            .enumerate()
            .map(|(t, &v)| HourAttribution {
                hour: t,
                attribution: vec![v],
                shadow_price: vec![0.0],
                c_fcst: 0.0,
                c_act: v,
                gap: 0.0,
                realized_cost: v,
                nodes: 3,
                error_estimate: 0.0,
                budget_exhausted: false,
            })
            .collect(),
        relative_efficiency_gap: 0.0,
    }
}

#[test]
fn tail_sizes() {
    assert_eq!(tail_size(0.05, 1000).unwrap(), 50);
    assert_eq!(tail_size(0.1, 25).unwrap(), 3);
    assert!(tail_size(0.01, 50).is_err());
    assert!(tail_size(0.0, 50).is_err());
    assert!(tail_size(1.0, 50).is_err());
}

#[test]
fn ranking_examples() {
    assert_eq!(rank_scenarios(&[10.0, 30.0, 20.0, 40.0], 0.5).unwrap(), vec![3, 1]);
    assert_eq!(rank_scenarios(&[7.0; 40], 0.1).unwrap(), vec![0, 1, 2, 3]);
    assert!(rank_scenarios(&[], 0.1).is_err());
}

#[test]
fn scores_are_tail_means() {
    let (a, b) = (report(&[100.0, 1.0]), report(&[300.0, 3.0]));
    let t = risk_scores(&[&a, &b], &[4, 9], 0.2, 10).unwrap();
    assert_eq!(t.score, vec![vec![200.0], vec![2.0]]);
    let single = risk_scores(&[&a], &[4], 0.1, 10).unwrap();
    assert_eq!(single.score[0][0], 100.0);
    assert!(risk_scores(&[&a], &[4, 9], 0.2, 10).is_err());
}

#[test]
fn per_mwh_examples() {
    let caps = vec![4000.0 / 50.0; 50];
    let r = per_mwh_score(960.0, 100.0, &caps, 1000, 0.05, TailMean::AllScenarios).unwrap();
    assert!((r - 10.0).abs() < 1e-12);
    assert_eq!(
        per_mwh_score(0.0, 100.0, &caps, 1000, 0.05, TailMean::AllScenarios),
        Some(0.0)
    );
    // With the tail-size mean the tail average is 80 MW.
    let r = per_mwh_score(960.0, 100.0, &caps, 1000, 0.05, TailMean::TailSize).unwrap();
    assert!((r - 48.0).abs() < 1e-9);
    assert_eq!(per_mwh_score(5.0, 80.0, &caps, 1000, 0.05, TailMean::TailSize), None);
}

#[test]
fn fractions_and_capacities() {
    assert!((adjust_fraction(210.8, &params(20.0, 200.0)) - 0.954).abs() < 1e-12);
    assert!((adjust_fraction(210.8, &params(20.0, 500.0)) - 0.3816).abs() < 1e-12);
    assert!((adjust_fraction(35.0, &params(20.0, 300.0)) - 0.05).abs() < 1e-12);
    assert_eq!(adjust_fraction(5.0, &params(20.0, 200.0)), 0.0);
    assert_eq!(adjust_fraction(1e6, &params(20.0, 200.0)), 1.0);
    assert_eq!(adjust_capacity(107.0, 3.0, 0.0), 107.0);
    assert_eq!(adjust_capacity(107.0, 3.0, 1.0), 3.0);
    assert_eq!(format!("{:.1}", adjust_capacity(107.0, 0.0, 0.954)), "4.9");
}

#[test]
fn params_must_be_positive() {
    assert!(AdjustmentParams::new(0.0, 200.0).is_err());
    assert!(AdjustmentParams::new(20.0, -1.0).is_err());
}

fn config(alpha: f64) -> RiskConfig {
    RiskConfig {
        alpha,
        params: params(20.0, 200.0),
        tail_mean: TailMean::AllScenarios,
        quadrature: QuadratureConfig::default(),
        h: 1,
    }
}

#[test]
fn no_spread_means_no_adjustment() {
    let grid = tutorial_grid();
    let day = tutorial_day(
        &grid,
        NaiveDate::from_ymd_opt(2020, 7, 8).unwrap(),
        DayShape::Accurate,
        1,
    );
    let set = synth_scenarios(&day, 10, 3, 0.0).unwrap();
    let adj = build_adjustments(&grid, &day, &set, &config(0.2), None).unwrap();
    assert!(adj.entries.iter().all(|e| e.r == 0.0 && e.q_adj == e.q_fcst));
    assert_eq!(&adj.day_ahead(&day)[..], &day.forecast.capacity[..48]);
    assert!(build_adjustments(&grid, &day, &set, &config(0.05), None).is_err());
}

#[test]
fn only_the_short_asset_is_adjusted() {
    let grid = tutorial_grid();
    let day = tutorial_day(
        &grid,
        NaiveDate::from_ymd_opt(2020, 7, 8).unwrap(),
        DayShape::WindOverForecast,
        1,
    );
    let scenarios: Vec<HourSeries> = (0..20)
        .map(|j| {
            let mut s = day.forecast.clone();
            let factor = 0.3 + 0.02 * j as f64;
            for q in &mut s.capacity {
                q[0] *= factor;
            }
            s
        })
        .collect();
    let set = ScenarioSet::new(scenarios).unwrap();
    let adj = build_adjustments(&grid, &day, &set, &config(0.1), None).unwrap();
    assert_eq!(adj.table.worst_set, vec![0, 1]);
    let w1: Vec<&AdjustmentEntry> = adj.entries.iter().filter(|e| e.renewable == "W1").collect();
    assert!(w1.iter().any(|e| e.r > 0.0));
    assert!(adj.entries.iter().filter(|e| e.renewable == "S1").all(|e| e.r == 0.0));
    for e in &adj.entries {
        assert!(e.q_min <= e.q_adj && e.q_adj <= e.q_fcst);
    }
    let csv = adj.to_csv();
    assert_eq!(csv.lines().count(), 1 + 48);
}

proptest! {
    #[test]
    fn fraction_is_clamped_and_monotone(a in -1e3f64..1e4, b in -1e3f64..1e4, lo in 1.0f64..100.0, hi in 1.0f64..1000.0) {
        let p = params(lo, hi);
        let (fa, fb) = (adjust_fraction(a, &p), adjust_fraction(b, &p));
        prop_assert!((0.0..=1.0).contains(&fa));
        if a <= b {
            prop_assert!(fa <= fb);
        }
        let wider = params(lo, hi * 2.5);
        prop_assert!(adjust_fraction(a, &wider) <= fa);
    }

    #[test]
    fn capacity_between_bounds(q_min in 0.0f64..100.0, extra in 0.0f64..100.0, r1 in 0.0f64..=1.0, r2 in 0.0f64..=1.0) {
        let q_fcst = q_min + extra;
        let (a, b) = (adjust_capacity(q_fcst, q_min, r1), adjust_capacity(q_fcst, q_min, r2));
        prop_assert!(a >= q_min - 1e-12 && a <= q_fcst + 1e-12);
        if r1 <= r2 {
            prop_assert!(a >= b - 1e-12);
        }
    }

    #[test]
    fn scores_scale_linearly(vals in prop::collection::vec(-500.0f64..500.0, 1..6), c in -3.0f64..3.0) {
        let base: Vec<AttributionReport> = vals.iter().map(|&v| report(&[v])).collect();
        let scaled: Vec<AttributionReport> = vals.iter().map(|&v| report(&[c * v])).collect();
        let s: Vec<usize> = (0..vals.len()).collect();
        let a = risk_scores(&base.iter().collect::<Vec<_>>(), &s, 0.5, 2 * vals.len()).unwrap();
        let b = risk_scores(&scaled.iter().collect::<Vec<_>>(), &s, 0.5, 2 * vals.len()).unwrap();
        prop_assert!((b.score[0][0] - c * a.score[0][0]).abs() <= 1e-9 * (1.0 + a.score[0][0].abs()));
    }

    #[test]
    fn ranking_matches_full_sort(costs in prop::collection::vec(0u32..50, 1..200), alpha in 0.01f64..0.99) {
        let costs: Vec<f64> = costs.into_iter().map(f64::from).collect();
        let Ok(n) = tail_size(alpha, costs.len()) else { return Ok(()) };
        let mut pairs: Vec<(f64, usize)> = costs.iter().copied().zip(0..).collect();
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let oracle: Vec<usize> = pairs[..n].iter().map(|p| p.1).collect();
        prop_assert_eq!(rank_scenarios(&costs, alpha).unwrap(), oracle);
    }
}
