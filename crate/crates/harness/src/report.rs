//! Report files. Everything is rendered in memory before the first write, so
//! a failing campaign leaves no partial output behind.
//!
//! Per-run series `run_NNN_<estimator>.csv` carry the columns
//! `t, err_yaw_deg, err_pitch_deg, err_roll_deg, ba_x, ba_y, ba_z, bg_x, bg_y,
//! bg_z, lever_err_x_mm, lever_err_y_mm, lever_err_z_mm, objective,
//! objective_at_truth, iters`. Attitude errors are estimate minus truth in
//! yaw/pitch/roll (deg), `ba_*` in μg and `bg_*` in °/h are estimates, the
//! lever-arm error is estimate minus truth in mm. The EKF writes NaN for the
//! objective columns.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use jape_core::rotation::Euler;
use jape_core::sim::Trajectory;

use crate::campaign::{summarize, Campaign, CampaignSummary, Stat};
use crate::run::{EpochRecord, Estimator, SimData};
use crate::{HarnessError, Result};

fn csv_bytes<T: serde::Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))
}

fn raw_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>, time_col: bool) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().enumerate().map(|(i, v)| {
            if time_col && i == 0 {
                format!("{v:.9}")
            } else {
                format!("{v:e}")
            }
        }))?;
    }
    w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))
}

fn write_all(dir: &Path, files: Vec<(String, Vec<u8>)>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    files
        .into_iter()
        .map(|(name, bytes)| {
            let p = dir.join(name);
            fs::write(&p, bytes)?;
            Ok(p)
        })
        .collect()
}

fn triple(s: &[Stat; 3]) -> String {
    let one = |x: &Stat| format!("{:.2}±{:.2}", x.mean, x.sigma);
    format!("[{} {} {}]", one(&s[0]), one(&s[1]), one(&s[2]))
}

/// Plain-text table with one column per estimator.
pub fn render_table(summary: &CampaignSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Comparison of Final Estimate Errors (1σ), {} runs", summary.runs);
    let _ = writeln!(out, "Attitude axes: {}", summary.attitude_axes);
    let names: Vec<_> = summary.estimators.keys().copied().collect();
    let cols: Vec<Vec<String>> = summary
        .estimators
        .values()
        .map(|e| {
            vec![
                triple(&e.attitude_mdeg),
                triple(&e.accel_bias_ug),
                triple(&e.lever_arm_mm),
            ]
        })
        .collect();
    let labels = ["Attitude (0.001deg)", "Accelerometer Bias (μg)", "GPS Lever Arm (mm)"];
    let width: Vec<usize> = (0..names.len())
        .map(|j| {
            cols[j]
                .iter()
                .map(|c| c.chars().count())
                .chain([names[j].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let _ = write!(out, "{:<26}", "");
    for (j, n) in names.iter().enumerate() {
        let _ = write!(out, "  {:<w$}", n, w = width[j]);
    }
    out.push('\n');
    for (i, label) in labels.iter().enumerate() {
        let _ = write!(out, "{label:<26}");
        for j in 0..names.len() {
            let cell = &cols[j][i];
            let pad = width[j] - cell.chars().count();
            let _ = write!(out, "  {cell}{}", " ".repeat(pad));
        }
        out.push('\n');
    }
    if let Some(w) = &summary.warmup {
        let _ = writeln!(
            out,
            "Warm-up attitude error (deg, yaw/pitch/roll): {}, max |.| [{:.3} {:.3} {:.3}]",
            triple(&w.error_deg),
            w.max_abs_deg[0],
            w.max_abs_deg[1],
            w.max_abs_deg[2]
        );
    }
    out
}

const SERIES: [&str; 13] = [
    "err_yaw_deg",
    "err_pitch_deg",
    "err_roll_deg",
    "ba_x",
    "ba_y",
    "ba_z",
    "bg_x",
    "bg_y",
    "bg_z",
    "lever_err_x_mm",
    "lever_err_y_mm",
    "lever_err_z_mm",
    "objective",
];

fn series(r: &EpochRecord) -> [f64; 13] {
    [
        r.err_yaw_deg,
        r.err_pitch_deg,
        r.err_roll_deg,
        r.ba_x,
        r.ba_y,
        r.ba_z,
        r.bg_x,
        r.bg_y,
        r.bg_z,
        r.lever_err_x_mm,
        r.lever_err_y_mm,
        r.lever_err_z_mm,
        r.objective,
    ]
}

/// Cross-run mean and σ of every series at each recorded epoch, for the
/// error-band figures. Runs are aligned by record index.
fn mean_std_csv(campaign: &Campaign, e: Estimator) -> Result<Option<Vec<u8>>> {
    let tracks: Vec<_> = campaign.runs.iter().filter_map(|r| r.track(e)).collect();
    let Some(len) = tracks.iter().map(|t| t.records.len()).min() else {
        return Ok(None);
    };
    let mut header = vec!["t".to_string()];
    for s in SERIES {
        header.push(format!("{s}_mean"));
        header.push(format!("{s}_std"));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..len).map(|k| {
        let mut row = vec![tracks[0].records[k].t];
        for j in 0..SERIES.len() {
            let xs: Vec<f64> = tracks.iter().map(|t| series(&t.records[k])[j]).collect();
            let s = Stat::of(&xs);
            row.push(s.mean);
            row.push(s.sigma);
        }
        row
    });
    raw_csv(&header, rows, true).map(Some)
}

/// Renders every report file of `campaign` without touching the disk.
pub fn render_report(campaign: &Campaign) -> Result<Vec<(String, Vec<u8>)>> {
    let summary = summarize(campaign)?;
    let mut files = Vec::new();
    for run in &campaign.runs {
        for t in &run.tracks {
            files.push((
                format!("run_{:03}_{}.csv", run.run_index, t.estimator.slug()),
                csv_bytes(&t.records)?,
            ));
        }
    }
    let mut json = serde_json::to_vec_pretty(&summary)?;
    json.push(b'\n');
    files.push(("summary.json".into(), json));
    files.push(("summary.txt".into(), render_table(&summary).into_bytes()));
    for e in [Estimator::RaJape, Estimator::BaJape, Estimator::Ekf] {
        if let Some(bytes) = mean_std_csv(campaign, e)? {
            files.push((format!("fig_{}_mean_std.csv", e.slug()), bytes));
        }
    }
    if let Some(t) = campaign.runs[0].track(Estimator::RaJape) {
        let rows = t.records.iter().map(|r| vec![r.t, r.objective, r.objective_at_truth]);
        files.push((
            "fig15_objective.csv".into(),
            raw_csv(&["t", "objective", "objective_at_truth"], rows, true)?,
        ));
    }
    Ok(files)
}

/// Writes the campaign's report files into `dir` and returns their paths.
pub fn emit_report(campaign: &Campaign, dir: &Path) -> Result<Vec<PathBuf>> {
    let files = render_report(campaign)?;
    write_all(dir, files)
}

/// Writes `imu.csv`, `gnss.csv` and `truth.csv` for one simulated run.
///
/// * `imu.csv`: `t, dtheta1_x..z, dtheta2_x..z` (rad), `dvel1_x..z, dvel2_x..z` (m/s), body frame
/// * `gnss.csv`: `t, lat_deg, lon_deg, height_m, v_n, v_u, v_e` at the antenna
/// * `truth.csv`: `t, yaw_deg, pitch_deg, roll_deg, lat_deg, lon_deg, height_m, v_n, v_u, v_e` at the IMU
pub fn write_simulation(sim: &SimData, dir: &Path) -> Result<Vec<PathBuf>> {
    let traj = Trajectory::new(&sim.profile).map_err(|e| HarnessError::run(0, e))?;
    let imu = raw_csv(
        &[
            "t",
            "dtheta1_x",
            "dtheta1_y",
            "dtheta1_z",
            "dtheta2_x",
            "dtheta2_y",
            "dtheta2_z",
            "dvel1_x",
            "dvel1_y",
            "dvel1_z",
            "dvel2_x",
            "dvel2_y",
            "dvel2_z",
        ],
        sim.imu.iter().map(|s| {
            let mut row = vec![s.t];
            for v in s.dtheta.iter().chain(&s.dvel) {
                row.extend(v.iter());
            }
            row
        }),
        true,
    )?;
    let gnss = raw_csv(
        &["t", "lat_deg", "lon_deg", "height_m", "v_n", "v_u", "v_e"],
        sim.gnss.iter().map(|f| {
            vec![
                f.t,
                f.position.lat.to_degrees(),
                f.position.lon.to_degrees(),
                f.position.height,
                f.velocity.x,
                f.velocity.y,
                f.velocity.z,
            ]
        }),
        true,
    )?;
    let truth_rows = sim
        .gnss
        .iter()
        .map(|f| {
            let s = traj.at(f.t).map_err(|e| HarnessError::run(0, e))?;
            let a = Euler::from_body_to_nav(&s.c_bn);
            Ok(vec![
                s.t,
                a.yaw.to_degrees(),
                a.pitch.to_degrees(),
                a.roll.to_degrees(),
                s.position.lat.to_degrees(),
                s.position.lon.to_degrees(),
                s.position.height,
                s.velocity.x,
                s.velocity.y,
                s.velocity.z,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let truth = raw_csv(
        &[
            "t",
            "yaw_deg",
            "pitch_deg",
            "roll_deg",
            "lat_deg",
            "lon_deg",
            "height_m",
            "v_n",
            "v_u",
            "v_e",
        ],
        truth_rows,
        true,
    )?;
    write_all(
        dir,
        vec![
            ("imu.csv".into(), imu),
            ("gnss.csv".into(), gnss),
            ("truth.csv".into(), truth),
        ],
    )
}
