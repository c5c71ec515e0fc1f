//! End-to-end runs through config parsing, the runner and the CSV layer.

mod common;

use xhaul_alloc::runner::{csv_header, run_scenario, summarize_csv, write_csv, RunStatus};
use xhaul_alloc::scenario::{parse_config, Mechanism, ScenarioConfig};
use xhaul_alloc::topology::DeploymentSpec;
use xhaul_alloc::Error;

fn desk_config() -> ScenarioConfig {
    parse_config(r#"{"scenario": "I", "mechanisms": ["minmax", "vcg", "nearest_first"]}"#).unwrap()
}

#[test]
fn mean_outage_never_drops_as_demand_grows() {
    let cfg = desk_config();
    let report = run_scenario(&cfg, None).unwrap();
    for mech in &cfg.mechanisms {
        let means: Vec<f64> = cfg
            .demand_sweep
            .iter()
            .map(|&level| {
                let rows: Vec<f64> = report
                    .rows
                    .iter()
                    .filter(|r| r.mechanism == *mech && r.demand_gbps == level / 1e9)
                    .map(|r| r.outage_overall)
                    .collect();
                rows.iter().sum::<f64>() / rows.len() as f64
            })
            .collect();
        assert!(
            means.windows(2).all(|w| w[0] <= w[1] + 1e-12),
            "{mech}: {means:?}"
        );
        assert_eq!(means[0], 0.0, "{mech} drops RUs at the lowest level");
    }
    assert!(report.rows.iter().all(|r| r.violations == 0 && r.status == RunStatus::Ok));
}

#[test]
fn csv_round_trips_through_summary() {
    let cfg = ScenarioConfig {
        deployment: DeploymentSpec { n_macro: 2, n_small: 6, n_level1: 2, ..DeploymentSpec::default() },
        seeds: vec![1, 2, 3],
        mechanisms: vec![Mechanism::Minmax, Mechanism::Oracle],
        ..desk_config()
    };
    let report = run_scenario(&cfg, Some(2)).unwrap();
    assert_eq!(report.rows.len(), cfg.demand_sweep.len() * 3 * 2);
    let mut bytes = Vec::new();
    write_csv(&report.rows, cfg.n_mno(), &mut bytes).unwrap();
    let text = String::from_utf8(bytes.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), csv_header(3).join(","));
    assert!(text.lines().skip(1).all(|l| l.ends_with(&cfg.config_hash())));

    let summary = summarize_csv(bytes.as_slice(), Some("minmax")).unwrap();
    assert_eq!(summary.len(), cfg.demand_sweep.len());
    assert!(summary.values().all(|(_, s)| s.rows == 3));
}

#[test]
fn config_errors_are_typed() {
    assert!(matches!(parse_config(""), Err(Error::Parse { .. })));
    assert!(matches!(parse_config(r#"{"scenario": "I", "colour": 1}"#), Err(Error::Parse { .. })));
    assert!(matches!(parse_config(r#"{"seeds": [1]}"#), Err(Error::Parse { .. })));
    assert!(matches!(
        parse_config(r#"{"scenario": "I", "deployment": {"mno_shares": [0.3, 0.6]}}"#),
        Err(Error::Validation(_))
    ));
    assert!(matches!(parse_config(r#"{"scenario": "I", "demand_sweep": [1e9, -1]}"#), Err(Error::Validation(_))));
}

#[test]
fn hash_tracks_config_content() {
    let a = desk_config();
    let b = ScenarioConfig { seeds: vec![1], ..desk_config() };
    assert_eq!(a.config_hash(), desk_config().config_hash());
    assert_ne!(a.config_hash(), b.config_hash());
    assert_eq!(a.config_hash().len(), 16);
}
