use std::collections::BTreeSet;

use jape_harness::{
    crosscheck, emit_report, monte_carlo, render_report, run_scenario, summarize, Campaign, EstimatorChoice,
    HarnessError, ScenarioConfig, Stat,
};
use proptest::prelude::*;

fn short(duration: f64, runs: usize) -> ScenarioConfig {
    ScenarioConfig {
        duration_s: duration,
        warmup_s: 20.0,
        runs,
        record_interval_s: 1.0,
        ..ScenarioConfig::default()
    }
}

#[test]
fn same_run_twice_is_identical() {
    let mut c = short(40.0, 1);
    c.estimators = vec![EstimatorChoice::All];
    let a = run_scenario(&c, 3).unwrap();
    let b = run_scenario(&c, 3).unwrap();
    assert_eq!(a.tracks.len(), 3);
    for (x, y) in a.tracks.iter().zip(&b.tracks) {
        // The EKF's objective columns are NaN, so compare renderings.
        assert_eq!(format!("{:?}", x.records), format!("{:?}", y.records));
        assert_eq!(x.nonconverged, y.nonconverged);
    }
    assert_eq!(a.warmup, b.warmup);
    assert_eq!(a.seed, b.seed);
    assert_ne!(run_scenario(&c, 4).unwrap().tracks[0].records, a.tracks[0].records);
}

#[test]
fn parallel_campaign_matches_serial_byte_for_byte() {
    let c = short(30.0, 3);
    let serial = monte_carlo(&c, None).unwrap();
    let parallel = monte_carlo(&c, Some(3)).unwrap();
    assert_eq!(render_report(&serial).unwrap(), render_report(&parallel).unwrap());
    let idx: Vec<_> = parallel.runs.iter().map(|r| r.run_index).collect();
    assert_eq!(idx, [0, 1, 2]);
}

#[test]
fn empty_campaign_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report");
    let empty = Campaign {
        config: ScenarioConfig::default(),
        runs: Vec::new(),
    };
    assert!(matches!(emit_report(&empty, &out), Err(HarnessError::EmptyCampaign)));
    assert!(!out.exists());
}

#[test]
fn single_run_report_has_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let c = short(30.0, 1);
    let campaign = monte_carlo(&c, None).unwrap();
    let files = emit_report(&campaign, dir.path()).unwrap();
    let names: BTreeSet<_> = files
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    for n in [
        "run_000_ra-jape.csv",
        "run_000_ekf.csv",
        "summary.json",
        "summary.txt",
        "fig_ra-jape_mean_std.csv",
        "fig_ekf_mean_std.csv",
        "fig15_objective.csv",
    ] {
        assert!(names.contains(n), "missing {n}");
    }
    let text = std::fs::read_to_string(dir.path().join("run_000_ra-jape.csv")).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "t,err_yaw_deg,err_pitch_deg,err_roll_deg,ba_x,ba_y,ba_z,bg_x,bg_y,bg_z,\
         lever_err_x_mm,lever_err_y_mm,lever_err_z_mm,objective,objective_at_truth,iters"
    );
    let rows = text.lines().count() - 1;
    assert!(rows >= 29, "{rows} rows");
}

fn key_skeleton(v: &serde_json::Value, prefix: &str, out: &mut Vec<String>) {
    match v {
        serde_json::Value::Object(m) => {
            for (k, x) in m {
                let p = format!("{prefix}/{k}");
                out.push(p.clone());
                key_skeleton(x, &p, out);
            }
        }
        serde_json::Value::Array(a) => {
            if let Some(x) = a.first() {
                key_skeleton(x, &format!("{prefix}[]"), out);
            }
        }
        _ => {}
    }
}

#[test]
fn summary_json_matches_golden_schema() {
    let mut c = short(30.0, 2);
    c.estimators = vec![EstimatorChoice::All];
    let campaign = monte_carlo(&c, None).unwrap();
    let summary = serde_json::to_value(summarize(&campaign).unwrap()).unwrap();
    let mut keys = Vec::new();
    key_skeleton(&summary, "", &mut keys);
    let golden: Vec<String> = include_str!("golden/summary_keys.txt")
        .lines()
        .map(str::to_owned)
        .collect();
    assert_eq!(keys, golden);
    assert_eq!(summary["schema_version"], 1);
    let ra = &summary["estimators"]["RA-JAPE"];
    for label in ["Attitude (0.001deg)", "Accelerometer Bias (μg)", "GPS Lever Arm (mm)"] {
        assert_eq!(ra[label].as_array().unwrap().len(), 3);
    }
}

#[test]
fn identical_runs_have_zero_spread() {
    let c = short(30.0, 1);
    let one = run_scenario(&c, 0).unwrap();
    let campaign = Campaign {
        config: c,
        runs: vec![one.clone(), one],
    };
    let s = summarize(&campaign).unwrap();
    for e in s.estimators.values() {
        for st in e.attitude_mdeg.iter().chain(&e.accel_bias_ug).chain(&e.lever_arm_mm) {
            assert_eq!(st.sigma, 0.0);
        }
    }
}

#[test]
fn recursive_and_batch_agree_over_a_run() {
    let mut c = short(60.0, 1);
    c.sensor.gnss_velocity_sigma_mps = 0.02;
    let r = crosscheck(&c, 0, 25).unwrap();
    assert!(r.epochs_compared > 50);
    assert!(r.max_difference < 1e-8, "{r:?}");
    assert!(matches!(crosscheck(&c, 0, 0), Err(HarnessError::Config(_))));
}

/// Welford's update, independent of the two-pass formula in `Stat::of`.
fn welford(xs: &[f64]) -> (f64, f64) {
    let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
    for &x in xs {
        n += 1.0;
        let d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    (mean, (m2 / (n - 1.0)).sqrt())
}

proptest! {
    #[test]
    fn stat_matches_welford(xs in prop::collection::vec(-1e3f64..1e3, 2..60)) {
        let s = Stat::of(&xs);
        let (m, sd) = welford(&xs);
        prop_assert!((s.mean - m).abs() <= 1e-9 * (1.0 + m.abs()));
        prop_assert!((s.sigma - sd).abs() <= 1e-9 * (1.0 + sd));
    }

    #[test]
    fn stat_is_order_and_shift_invariant(
        xs in prop::collection::vec(-1e3f64..1e3, 2..60),
        shift in -1e3f64..1e3,
        rot in 0usize..60,
    ) {
        let s = Stat::of(&xs);
        let mut ys: Vec<f64> = xs.iter().map(|x| x + shift).collect();
        ys.rotate_left(rot % xs.len());
        let t = Stat::of(&ys);
        prop_assert!((t.mean - s.mean - shift).abs() <= 1e-9 * (1.0 + s.mean.abs() + shift.abs()));
        prop_assert!((t.sigma - s.sigma).abs() <= 1e-8 * (1.0 + s.sigma));
    }
}

#[test]
fn single_sample_sigma_is_nan() {
    let s = Stat::of(&[2.5]);
    assert_eq!(s.mean, 2.5);
    assert!(s.sigma.is_nan());
}
