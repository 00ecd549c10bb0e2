//! Monte Carlo campaigns and their mean ± 1σ summaries.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::run::{run_scenario, Estimator, RunReport, Track};
use crate::{HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub config: ScenarioConfig,
    /// Sorted by run index.
    pub runs: Vec<RunReport>,
}

/// Runs `config.runs` scenarios. `jobs` of `None` or `Some(1)` runs serially;
/// otherwise runs fan out over a pool of that many workers. Each run owns its
/// RNG streams, so the result does not depend on `jobs`.
pub fn monte_carlo(config: &ScenarioConfig, jobs: Option<usize>) -> Result<Campaign> {
    config.validate()?;
    let runs = match jobs {
        None | Some(1) => (0..config.runs)
            .map(|i| run_scenario(config, i))
            .collect::<Result<Vec<_>>>()?,
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))?;
            pool.install(|| {
                (0..config.runs)
                    .into_par_iter()
                    .map(|i| run_scenario(config, i))
                    .collect::<Result<Vec<_>>>()
            })?
        }
    };
    Ok(Campaign {
        config: config.clone(),
        runs,
    })
}

/// Sample mean and standard deviation (n − 1 denominator).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub sigma: f64,
}

impl Stat {
    /// σ is NaN for fewer than two samples. Sums run in slice order.
    pub fn of(xs: &[f64]) -> Stat {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sigma = if xs.len() < 2 {
            f64::NAN
        } else {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Stat { mean, sigma }
    }

    pub fn of_axes(rows: &[[f64; 3]]) -> [Stat; 3] {
        core::array::from_fn(|i| Stat::of(&rows.iter().map(|r| r[i]).collect::<Vec<_>>()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorSummary {
    /// Final attitude error about N, U, E (roll, yaw, pitch), milli-degrees.
    #[serde(rename = "Attitude (0.001deg)")]
    pub attitude_mdeg: [Stat; 3],
    /// Final accelerometer-bias error, μg.
    #[serde(rename = "Accelerometer Bias (μg)")]
    pub accel_bias_ug: [Stat; 3],
    /// Final lever-arm error, mm.
    #[serde(rename = "GPS Lever Arm (mm)")]
    pub lever_arm_mm: [Stat; 3],
    /// Final gyro-bias error, °/h.
    pub gyro_bias_deg_per_h: [Stat; 3],
    /// Runs whose final objective at the estimate does not exceed the one at truth.
    pub objective_below_truth_final: usize,
    /// Runs where that holds at every recorded epoch after the warm-up.
    pub objective_below_truth_all_epochs: usize,
    /// Total epochs stopped at the iteration limit.
    pub nonconverged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarmupSummary {
    /// yaw, pitch, roll error in degrees.
    pub error_deg: [Stat; 3],
    pub max_abs_deg: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub schema_version: u32,
    pub runs: usize,
    pub attitude_axes: &'static str,
    pub estimators: BTreeMap<&'static str, EstimatorSummary>,
    pub warmup: Option<WarmupSummary>,
}

/// Attitude (mdeg), accel bias (μg), lever arm (mm) and gyro bias (°/h) errors.
type FinalErrors = ([f64; 3], [f64; 3], [f64; 3], [f64; 3]);

fn final_errors(t: &Track, truth: &crate::run::TruthRecord) -> FinalErrors {
    let r = &t.final_record;
    let att = r.attitude_neu_deg().map(|d| d * 1e3);
    let ba = r.accel_bias_ug();
    let bg = r.gyro_bias_deg_per_h();
    (
        att,
        core::array::from_fn(|i| ba[i] - truth.accel_bias_ug[i]),
        r.lever_err_mm(),
        core::array::from_fn(|i| bg[i] - truth.gyro_bias_deg_per_h[i]),
    )
}

/// Objective at the estimate against the one at truth, with a relative slack
/// for rounding in the two sums.
fn dominates(objective: f64, at_truth: f64) -> bool {
    objective <= at_truth * (1.0 + 1e-12) + 1e-300
}

pub fn summarize(campaign: &Campaign) -> Result<CampaignSummary> {
    if campaign.runs.is_empty() {
        return Err(HarnessError::EmptyCampaign);
    }
    let warmup_s = campaign.config.warmup_s + 1e-9;
    let mut estimators = BTreeMap::new();
    for e in [Estimator::RaJape, Estimator::BaJape, Estimator::Ekf] {
        let tracks: Vec<_> = campaign
            .runs
            .iter()
            .filter_map(|r| r.track(e).map(|t| (t, &r.truth)))
            .collect();
        if tracks.is_empty() {
            continue;
        }
        let errs: Vec<_> = tracks.iter().map(|(t, truth)| final_errors(t, truth)).collect();
        let pick = |f: fn(&FinalErrors) -> [f64; 3]| Stat::of_axes(&errs.iter().map(f).collect::<Vec<_>>());
        let has_objective = e != Estimator::Ekf;
        let final_ok = tracks
            .iter()
            .filter(|(t, _)| has_objective && dominates(t.final_record.objective, t.final_record.objective_at_truth))
            .count();
        let all_ok = tracks
            .iter()
            .filter(|(t, _)| {
                has_objective
                    && t.records
                        .iter()
                        .filter(|r| r.t > warmup_s)
                        .all(|r| dominates(r.objective, r.objective_at_truth))
            })
            .count();
        estimators.insert(
            e.name(),
            EstimatorSummary {
                attitude_mdeg: pick(|x| x.0),
                accel_bias_ug: pick(|x| x.1),
                lever_arm_mm: pick(|x| x.2),
                gyro_bias_deg_per_h: pick(|x| x.3),
                objective_below_truth_final: final_ok,
                objective_below_truth_all_epochs: all_ok,
                nonconverged: tracks.iter().map(|(t, _)| t.nonconverged).sum(),
            },
        );
    }
    let warm: Vec<[f64; 3]> = campaign
        .runs
        .iter()
        .filter_map(|r| r.warmup.map(|w| [w.err_yaw_deg, w.err_pitch_deg, w.err_roll_deg]))
        .collect();
    let warmup = (!warm.is_empty()).then(|| WarmupSummary {
        error_deg: Stat::of_axes(&warm),
        max_abs_deg: core::array::from_fn(|i| warm.iter().map(|w| w[i].abs()).fold(0.0, f64::max)),
    });
    Ok(CampaignSummary {
        schema_version: SCHEMA_VERSION,
        runs: campaign.runs.len(),
        attitude_axes: "N,U,E = roll,yaw,pitch",
        estimators,
        warmup,
    })
}
