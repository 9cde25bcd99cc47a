use super::*;
use crate::tutorial::{tutorial_day, tutorial_grid, tutorial_week, DayShape};

fn date(d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 7, d).unwrap()
}

fn small_ra(r_high: f64) -> PolicyConfig {
    let mut p = PolicyConfig::risk_averse(20.0, r_high);
    p.scenarios.k = 40;
    p.alpha = 0.1;
    p
}

#[test]
fn perfect_forecast_never_sheds() {
    let grid = tutorial_grid();
    let day = tutorial_day(&grid, date(8), DayShape::Identical, 1);
    for p in [
        PolicyConfig::risk_neutral(0.05),
        PolicyConfig::risk_neutral(0.3),
        small_ra(200.0),
    ] {
        let run = run_day(&grid, &day, &p, 1, None, None).unwrap();
        assert!(run.result.load_shed < 1e-9, "{} shed {}", p.name, run.result.load_shed);
    }
}

#[test]
fn totals_equal_hourly_sums() {
    let grid = tutorial_grid();
    let day = tutorial_day(&grid, date(8), DayShape::Accurate, 1);
    let r = run_day(&grid, &day, &PolicyConfig::risk_neutral(0.1), 1, None, None)
        .unwrap()
        .result;
    assert_eq!(r.hours.len(), 24);
    let cost: f64 = r.hours.iter().map(|h| h.cost).sum();
    assert!((cost - r.production_cost).abs() <= 1e-6 * cost.abs());
    assert!(r.production_cost >= r.generation_cost);
    assert_eq!(r.final_dispatch, r.hours[23].dispatch);
}

#[test]
fn over_forecast_day_favors_risk_averse() {
    let grid = tutorial_grid();
    let day = tutorial_day(&grid, date(9), DayShape::WindOverForecast, 1);
    let rn = run_day(&grid, &day, &PolicyConfig::risk_neutral(0.05), 1, None, None).unwrap();
    let ra = run_day(&grid, &day, &small_ra(200.0), 1, None, None).unwrap();
    assert!(rn.result.load_shed > 0.0);
    assert!(ra.result.load_shed < rn.result.load_shed);
    assert!(ra.result.max_adjustment > 0.0);
    assert!(ra.adjustments.is_some() && rn.adjustments.is_none());
}

#[test]
fn unreachable_threshold_degenerates_to_risk_neutral() {
    let grid = tutorial_grid();
    let day = tutorial_day(&grid, date(9), DayShape::WindOverForecast, 1);
    let rn = run_day(&grid, &day, &PolicyConfig::risk_neutral(0.05), 1, None, None).unwrap();
    let mut ra = PolicyConfig::risk_averse(1e12, 200.0);
    ra.scenarios.k = 20;
    ra.alpha = 0.1;
    let ra = run_day(&grid, &day, &ra, 1, None, None).unwrap();
    assert_eq!(
        serde_json::to_string(&rn.result).unwrap(),
        serde_json::to_string(&ra.result).unwrap()
    );
}

#[test]
fn range_chains_final_dispatch() {
    let grid = tutorial_grid();
    let days = tutorial_week(&grid, date(6), 1);
    let p = PolicyConfig::risk_neutral(0.1);
    let range = run_range(&grid, &days[..2], &p, 1, None).unwrap();
    let first = &range.days[0].result;
    let second = run_day(&grid, &days[1], &p, 1, None, Some(&first.final_dispatch)).unwrap();
    assert_eq!(range.days[1].result, second.result);

    let single = run_range(&grid, &days[..1], &p, 1, None).unwrap();
    assert_eq!(single.total_cost(), single.days[0].result.production_cost);
    assert_eq!(single.mean_daily_cost(), single.total_cost());
}

#[test]
fn gap_in_range_names_the_date() {
    let grid = tutorial_grid();
    let days = vec![
        tutorial_day(&grid, date(6), DayShape::Accurate, 1),
        tutorial_day(&grid, date(8), DayShape::Accurate, 1),
    ];
    let err = run_range(&grid, &days, &PolicyConfig::risk_neutral(0.1), 1, None).unwrap_err();
    assert!(err.to_string().contains("2020-07-08"));
}

#[test]
fn policy_list_parsing() {
    let base = PolicyConfig::risk_neutral(0.05);
    let ps = PolicyConfig::parse_list("rn:0.10,rn:0.30,ra:200", &base).unwrap();
    assert_eq!(ps.len(), 3);
    assert_eq!(ps[0].mode, PolicyMode::RiskNeutral);
    assert_eq!(ps[1].reserve_factor, 0.30);
    assert_eq!(ps[2].mode, PolicyMode::RiskAverse);
    assert_eq!(ps[2].adjustment.r_high, 200.0);
    assert_eq!(ps[2].name, "ra:200");
    assert!(PolicyConfig::parse_list("xx:1", &base).is_err());
    assert!(PolicyConfig::parse_list("rn:abc", &base).is_err());
    assert!(PolicyConfig::parse_list("", &base).is_err());
}

#[test]
fn comparison_tables_have_policy_columns() {
    let grid = tutorial_grid();
    let days = tutorial_week(&grid, date(6), 1);
    let ps = vec![PolicyConfig::risk_neutral(0.1), PolicyConfig::risk_neutral(0.3)];
    let cmp = compare_policies(&grid, &days[..3], &ps, 1, None).unwrap();
    let csv = cmp.cost_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 3 + 1);
    assert_eq!(lines[0], "date,rn:0.10,rn:0.30");
    assert!(lines[4].starts_with("mean,"));
    assert!(cmp.shed_csv().lines().last().unwrap().starts_with("total,"));
    let dir = tempfile::tempdir().unwrap();
    cmp.write(dir.path()).unwrap();
    assert!(dir.path().join("day_2020-07-06_rn-0.10.json").exists());
    assert!(dir.path().join("comparison_cost.svg").exists());
    assert!(compare_policies(&grid, &days[..1], &ps[..1], 1, None).is_err());
}

#[test]
fn more_reserve_never_sheds_more_on_adequate_days() {
    let grid = tutorial_grid();
    for d in 6..9 {
        let day = tutorial_day(&grid, date(d), DayShape::Accurate, 1);
        let shed = |rf: f64| {
            run_day(&grid, &day, &PolicyConfig::risk_neutral(rf), 1, None, None)
                .unwrap()
                .result
                .load_shed
        };
        let (a, b, c) = (shed(0.05), shed(0.2), shed(0.3));
        assert!(b <= a + 1e-9 && c <= b + 1e-9, "{a} {b} {c}");
    }
}
