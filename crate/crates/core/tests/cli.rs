use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::NaiveDate;
use gridrisk::grid::{load_day_data, synth_scenarios, write_scenarios, DayPaths};
use gridrisk::tutorial::{tutorial_grid, tutorial_week, write_bundle};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridrisk"))
        .args(args)
        .output()
        .unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn week_bundle(dir: &Path) -> PathBuf {
    let grid = tutorial_grid();
    let week = tutorial_week(&grid, NaiveDate::from_ymd_opt(2020, 7, 6).unwrap(), 1);
    let data = dir.join("data");
    write_bundle(&grid, &week, &data).unwrap();
    data
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_checked_in_bundle() {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data/tutorial");
    let out = run(&["validate", "--data-dir", data]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
    assert!(text(&out.stdout).contains("all inputs valid"));
}

#[test]
fn validate_names_duplicate_generator() {
    let dir = tempfile::tempdir().unwrap();
    let data = week_bundle(dir.path());
    let grid = std::fs::read_to_string(data.join("grid.txt")).unwrap();
    let grid = grid.replace("G4, B5", "G3, B5");
    std::fs::write(data.join("grid.txt"), grid).unwrap();
    let out = run(&["validate", "--data-dir", s(&data)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(text(&out.stdout).contains("G3"), "{}", text(&out.stdout));
}

#[test]
fn validate_checks_scenario_count() {
    let dir = tempfile::tempdir().unwrap();
    let data = week_bundle(dir.path());
    let grid = tutorial_grid();
    let day_dir = data.join("2020-07-08");
    let day = load_day_data(&grid, &DayPaths::in_dir(&day_dir), 1).unwrap();
    write_scenarios(
        &grid,
        &synth_scenarios(&day, 5, 1, 0.1).unwrap(),
        day_dir.join("scenarios.csv"),
    )
    .unwrap();
    let ok = run(&["validate", "--data-dir", s(&data), "--K", "5"]);
    assert_eq!(ok.status.code(), Some(0), "{}", text(&ok.stdout));
    let bad = run(&["validate", "--data-dir", s(&data), "--K", "10"]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(text(&bad.stdout).contains("scenarios"));
}

#[test]
fn attribute_writes_one_row_per_hour_and_asset() {
    let dir = tempfile::tempdir().unwrap();
    let data = week_bundle(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "attribute",
        "--data-dir",
        s(&data),
        "--day",
        "2020-07-08",
        "--out",
        s(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("attr_2020-07-08.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 24 * (4 + 3 + 2));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("attr_2020-07-08.json")).unwrap()).unwrap();
    assert_eq!(json["qmax"], 4096);
    assert_eq!(json["qtol"], 0.05);
    assert!(out_dir.join("config.toml").exists());
}

#[test]
fn missing_actual_series_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = week_bundle(dir.path());
    std::fs::remove_file(data.join("2020-07-08/load_actual.csv")).unwrap();
    let out = run(&[
        "attribute",
        "--data-dir",
        s(&data),
        "--day",
        "2020-07-08",
        "--out",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(text(&out.stderr).contains("load_actual.csv"));
}

#[test]
fn bad_arguments_exit_with_config_status() {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data/tutorial");
    let out = run(&["risk", "--data-dir", data, "--day", "2020-07-08", "--alpha", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["attribute", "--day", "not-a-date"]).status.code(), Some(2));
}

#[test]
fn risk_reports_tail_size() {
    let dir = tempfile::tempdir().unwrap();
    let data = week_bundle(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "risk",
        "--data-dir",
        s(&data),
        "--day",
        "2020-07-09",
        "--out",
        s(&out_dir),
        "--K",
        "1000",
        "--alpha",
        "0.05",
        "--hist-asset",
        "W1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("risk_2020-07-09.json")).unwrap()).unwrap();
    assert_eq!(json["tail_size"], 50);
    assert_eq!(json["k"], 1000);
    assert!(out_dir.join("hist_W1_2020-07-09.svg").exists());
    let table = std::fs::read_to_string(out_dir.join("risk_2020-07-09.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 24 * 2);
}

#[test]
fn noiseless_scenarios_leave_forecast_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let data = week_bundle(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "risk",
        "--data-dir",
        s(&data),
        "--day",
        "2020-07-09",
        "--out",
        s(&out_dir),
        "--K",
        "20",
        "--alpha",
        "0.1",
        "--rel-sigma",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(
        std::fs::read(out_dir.join("adjusted_2020-07-09.csv")).unwrap(),
        std::fs::read(data.join("2020-07-09/renewable_forecast.csv")).unwrap()
    );
}

#[test]
fn simulate_two_policies_three_days() {
    let dir = tempfile::tempdir().unwrap();
    let data = week_bundle(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "simulate",
        "--data-dir",
        s(&data),
        "--day",
        "2020-07-06",
        "--days",
        "3",
        "--out",
        s(&out_dir),
        "--policies",
        "rn:0.10,rn:0.30",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("comparison_cost.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 3 + 1);
    assert_eq!(lines[0].split(',').count(), 3);
    assert!(out_dir.join("summary.json").exists());
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = week_bundle(dir.path());
    let out_dir = dir.path().join("out");
    let args = |jobs: &'static str| {
        vec![
            "simulate".to_string(),
            "--data-dir".into(),
            s(&data).into(),
            "--day".into(),
            "2020-07-08".into(),
            "--days".into(),
            "2".into(),
            "--out".into(),
            s(&out_dir).into(),
            "--policies".into(),
            "rn:0.10,ra:200".into(),
            "--K".into(),
            "40".into(),
            "--alpha".into(),
            "0.1".into(),
            "--jobs".into(),
            jobs.into(),
        ]
    };
    let first = run(&args("1").iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(first.status.code(), Some(0), "{}", text(&first.stderr));
    let a = snapshot(&out_dir);
    std::fs::remove_dir_all(&out_dir).unwrap();
    let second = run(&args("1").iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(a, snapshot(&out_dir));
    assert!(a.iter().any(|(n, _)| n.starts_with("risk_")));

    // Thread count changes only the echoed config.
    std::fs::remove_dir_all(&out_dir).unwrap();
    let threaded = run(&args("4").iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(threaded.status.code(), Some(0));
    let results = |v: Vec<(String, Vec<u8>)>| v.into_iter().filter(|(n, _)| n != "config.toml").collect::<Vec<_>>();
    assert_eq!(results(a), results(snapshot(&out_dir)));
}
