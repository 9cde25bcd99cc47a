use super::*;

fn flags(args: &[&str]) -> Flags {
    let mut v = vec!["gridrisk", "validate"];
    v.extend_from_slice(args);
    Cli::try_parse_from(v).unwrap().flags
}

#[test]
fn flags_override_file_override_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "alpha = 0.1\nk = 200\nseed = 3\n").unwrap();
    let p = path.to_str().unwrap();
    let cfg = RunConfig::resolve(&flags(&["--config", p, "--K", "500"])).unwrap();
    assert_eq!(cfg.alpha, 0.1);
    assert_eq!(cfg.k, 500);
    assert_eq!(cfg.seed, 3);
    assert_eq!(cfg.qmax, 4096);
    assert_eq!(cfg.qtol, 0.05);
}

#[test]
fn config_round_trips_through_toml() {
    let cfg = RunConfig {
        day: NaiveDate::from_ymd_opt(2020, 7, 8),
        reserve_factor: Some(0.2),
        tail_mean: TailMean::TailSize,
        ..RunConfig::default()
    };
    assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
}

#[test]
fn bad_settings_are_config_errors() {
    for args in [
        &["--alpha", "0"][..],
        &["--alpha", "1.5"],
        &["--qmax", "2"],
        &["--qtol", "0"],
        &["--h", "0"],
        &["--r-high", "-1"],
        &["--tail-mean", "median"],
        &["--reserve-factor", "2"],
    ] {
        let err = RunConfig::resolve(&flags(args)).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_CONFIG, "{args:?}: {err}");
    }
    assert!(RunConfig::from_toml("alhpa = 0.1").is_err());
}

#[test]
fn error_classes_map_to_exit_codes() {
    assert_eq!(exit_code(&Error::invalid("x")), 2);
    assert_eq!(exit_code(&Error::data("x")), 3);
    assert_eq!(exit_code(&Error::Solve("x".into())), 4);
}

#[test]
fn range_dates_are_consecutive() {
    let mut cfg = RunConfig::default();
    assert!(cfg.dates().is_err());
    cfg.day = NaiveDate::from_ymd_opt(2020, 2, 28);
    cfg.days = 3;
    let d: Vec<String> = cfg.dates().unwrap().iter().map(|d| d.to_string()).collect();
    assert_eq!(d, ["2020-02-28", "2020-02-29", "2020-03-01"]);
}
