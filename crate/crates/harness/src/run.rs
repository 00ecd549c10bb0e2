//! One simulated run: simkit → observation builder → estimators.

use std::time::Instant;

use jape_core::ekf::{ekf_init, EkfState};
use jape_core::jape::{
    compensated_attitude, current_attitude, Backend, EpochEstimate, EstimateX, EstimatorConfig, JapeEstimator,
};
use jape_core::obs::{rate_at_end, CoeffBuilder, CoeffEpoch};
use jape_core::rotation::Euler;
use jape_core::sim::{
    synthesize_gnss, synthesize_imu, GnssFix, ImuIncrement, MotionProfile, SensorSpec, Trajectory, DEG_PER_HOUR,
    MICRO_G,
};
use jape_core::{Error, Mat3};
use serde::Serialize;

use crate::config::{EstimatorChoice, ScenarioConfig};
use crate::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Estimator {
    #[serde(rename = "RA-JAPE")]
    RaJape,
    #[serde(rename = "BA-JAPE")]
    BaJape,
    #[serde(rename = "EKF")]
    Ekf,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::RaJape => "RA-JAPE",
            Estimator::BaJape => "BA-JAPE",
            Estimator::Ekf => "EKF",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Estimator::RaJape => "ra-jape",
            Estimator::BaJape => "ba-jape",
            Estimator::Ekf => "ekf",
        }
    }
}

/// One row of the per-run time series. Attitude errors are estimate minus
/// truth in yaw/pitch/roll; biases are estimates (μg, °/h); the lever arm is
/// estimate minus truth. The EKF has no objective and writes NaN there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochRecord {
    pub t: f64,
    pub err_yaw_deg: f64,
    pub err_pitch_deg: f64,
    pub err_roll_deg: f64,
    pub ba_x: f64,
    pub ba_y: f64,
    pub ba_z: f64,
    pub bg_x: f64,
    pub bg_y: f64,
    pub bg_z: f64,
    pub lever_err_x_mm: f64,
    pub lever_err_y_mm: f64,
    pub lever_err_z_mm: f64,
    pub objective: f64,
    pub objective_at_truth: f64,
    pub iters: usize,
}

impl EpochRecord {
    /// Attitude error about the N, U, E axes (roll, yaw, pitch), deg.
    pub fn attitude_neu_deg(&self) -> [f64; 3] {
        [self.err_roll_deg, self.err_yaw_deg, self.err_pitch_deg]
    }

    pub fn accel_bias_ug(&self) -> [f64; 3] {
        [self.ba_x, self.ba_y, self.ba_z]
    }

    pub fn gyro_bias_deg_per_h(&self) -> [f64; 3] {
        [self.bg_x, self.bg_y, self.bg_z]
    }

    pub fn lever_err_mm(&self) -> [f64; 3] {
        [self.lever_err_x_mm, self.lever_err_y_mm, self.lever_err_z_mm]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Track {
    pub estimator: Estimator,
    pub records: Vec<EpochRecord>,
    pub final_record: EpochRecord,
    /// Epochs whose Newton-Lagrange iterations stopped at `max_iter`.
    pub nonconverged: usize,
    /// Time spent inside the estimator, s. Not part of any report file.
    #[serde(skip)]
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthRecord {
    pub accel_bias_ug: [f64; 3],
    pub gyro_bias_deg_per_h: [f64; 3],
    pub lever_arm_m: [f64; 3],
}

/// Attitude-only estimate at the end of the warm-up phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WarmupRecord {
    pub t: f64,
    pub err_yaw_deg: f64,
    pub err_pitch_deg: f64,
    pub err_roll_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub run_index: usize,
    pub seed: u64,
    pub truth: TruthRecord,
    pub warmup: Option<WarmupRecord>,
    pub tracks: Vec<Track>,
}

impl RunReport {
    pub fn track(&self, e: Estimator) -> Option<&Track> {
        self.tracks.iter().find(|t| t.estimator == e)
    }
}

/// Simulated sensor data of one run.
#[derive(Debug, Clone)]
pub struct SimData {
    pub seed: u64,
    pub profile: MotionProfile,
    pub spec: SensorSpec,
    pub imu: Vec<ImuIncrement>,
    pub gnss: Vec<GnssFix>,
}

pub fn simulate(config: &ScenarioConfig, run_index: usize) -> Result<SimData> {
    config.validate()?;
    let ctx = |e| HarnessError::run(run_index, e);
    let seed = config.seed_base + run_index as u64;
    let profile = config.profile()?;
    let spec = config.sensor_spec();
    let imu = synthesize_imu(&profile, &spec, seed, config.duration_s).map_err(ctx)?;
    let gnss = synthesize_gnss(&profile, &spec, seed, config.duration_s).map_err(ctx)?;
    Ok(SimData {
        seed,
        profile,
        spec,
        imu,
        gnss,
    })
}

fn euler_error(estimate: &Mat3, truth: &Mat3) -> [f64; 3] {
    let d = Euler::from_body_to_nav(estimate).difference(&Euler::from_body_to_nav(truth));
    [d.yaw.to_degrees(), d.pitch.to_degrees(), d.roll.to_degrees()]
}

struct TrackBuilder {
    estimator: Estimator,
    records: Vec<EpochRecord>,
    nonconverged: usize,
    clock: f64,
}

impl TrackBuilder {
    fn new(estimator: Estimator) -> Self {
        Self {
            estimator,
            records: Vec::new(),
            nonconverged: 0,
            clock: 0.0,
        }
    }

    fn finish(self) -> Option<Track> {
        let final_record = *self.records.last()?;
        Some(Track {
            estimator: self.estimator,
            records: self.records,
            final_record,
            nonconverged: self.nonconverged,
            wall_clock_s: self.clock,
        })
    }
}

struct Recorder<'a> {
    spec: &'a SensorSpec,
    truth_x: EstimateX,
}

impl Recorder<'_> {
    fn jape(
        &self,
        est: &JapeEstimator,
        e: &EpochEstimate,
        epoch: &CoeffEpoch,
        truth_c: &Mat3,
    ) -> jape_core::Result<EpochRecord> {
        let x = &e.estimate;
        let c = compensated_attitude(x, &epoch.c_n, &epoch.c_b, &epoch.chi)?;
        let [yaw, pitch, roll] = euler_error(&c, truth_c);
        let ba = x.accel_bias / MICRO_G;
        let bg = x.gyro_bias / DEG_PER_HOUR;
        let dl = (x.lever_arm - self.spec.lever_arm) * 1e3;
        Ok(EpochRecord {
            t: epoch.t,
            err_yaw_deg: yaw,
            err_pitch_deg: pitch,
            err_roll_deg: roll,
            ba_x: ba.x,
            ba_y: ba.y,
            ba_z: ba.z,
            bg_x: bg.x,
            bg_y: bg.y,
            bg_z: bg.z,
            lever_err_x_mm: dl.x,
            lever_err_y_mm: dl.y,
            lever_err_z_mm: dl.z,
            objective: e.objective,
            objective_at_truth: est.objective_at(&self.truth_x),
            iters: e.iterations,
        })
    }

    fn ekf(&self, s: &EkfState, truth_c: &Mat3) -> EpochRecord {
        let [yaw, pitch, roll] = euler_error(&s.nav.c_bn, truth_c);
        let ba = s.accel_bias / MICRO_G;
        let bg = s.gyro_bias / DEG_PER_HOUR;
        let dl = (s.lever_arm - self.spec.lever_arm) * 1e3;
        EpochRecord {
            t: s.nav.t,
            err_yaw_deg: yaw,
            err_pitch_deg: pitch,
            err_roll_deg: roll,
            ba_x: ba.x,
            ba_y: ba.y,
            ba_z: ba.z,
            bg_x: bg.x,
            bg_y: bg.y,
            bg_z: bg.z,
            lever_err_x_mm: dl.x,
            lever_err_y_mm: dl.y,
            lever_err_z_mm: dl.z,
            objective: f64::NAN,
            objective_at_truth: f64::NAN,
            iters: 0,
        }
    }
}

/// Runs `est.estimate()`, treating an unobservable attitude before the first
/// estimate as "nothing yet".
fn timed_estimate(
    est: &mut JapeEstimator,
    have_any: bool,
    clock: &mut f64,
) -> jape_core::Result<Option<EpochEstimate>> {
    let start = Instant::now();
    let r = est.estimate();
    *clock += start.elapsed().as_secs_f64();
    match r {
        Ok(e) => Ok(Some(e)),
        Err(Error::DegenerateSpectrum { .. }) if !have_any => Ok(None),
        Err(e) => Err(e),
    }
}

/// Executes one run of `config`. Deterministic in `(config, run_index)`.
pub fn run_scenario(config: &ScenarioConfig, run_index: usize) -> Result<RunReport> {
    let sim = simulate(config, run_index)?;
    let ctx = |e| HarnessError::run(run_index, e);
    let spec = &sim.spec;
    let traj = Trajectory::new(&sim.profile).map_err(ctx)?;
    let interval = spec.interval();
    let record_every = ((config.record_interval_s / interval).round() as usize).max(1);
    let est_config = EstimatorConfig {
        interval,
        warmup_s: config.warmup_s,
        solver: config.solver_options(),
    };
    let want_ra = config.wants(EstimatorChoice::RaJape);
    let want_ba = config.wants(EstimatorChoice::BaJape);
    let want_ekf = config.wants(EstimatorChoice::Ekf);

    let mut builder = CoeffBuilder::new(sim.gnss[0], interval, config.window).map_err(ctx)?;
    // The recursive estimator also supplies the EKF's starting attitude.
    let mut ra = JapeEstimator::new(est_config, Backend::Recursive).map_err(ctx)?;
    let mut ba = if want_ba {
        Some(JapeEstimator::new(est_config, Backend::Batch).map_err(ctx)?)
    } else {
        None
    };
    let recorder = Recorder {
        spec,
        truth_x: EstimateX {
            q: sim.profile.initial_attitude,
            accel_bias: spec.accel_bias,
            gyro_bias: spec.gyro_bias,
            lever_arm: spec.lever_arm,
            mu: 0.0,
        },
    };
    let mut ra_track = TrackBuilder::new(Estimator::RaJape);
    let mut ba_track = TrackBuilder::new(Estimator::BaJape);
    let mut ekf_track = TrackBuilder::new(Estimator::Ekf);
    let mut ra_last: Option<EpochEstimate> = None;
    let mut warm_x: Option<EstimateX> = None;
    let mut warmup = None;
    let mut ekf: Option<EkfState> = None;
    let n = sim.imu.len();

    for (k, (inc, fix)) in sim.imu.iter().zip(&sim.gnss[1..]).enumerate() {
        let diff = builder.push(inc, fix).map_err(ctx)?;
        let last = k + 1 == n;
        let record = (k + 1) % record_every == 0 || last;
        let mut ba_solved = None;
        if let Some(d) = &diff {
            ra.feed(d).map_err(ctx)?;
            if want_ra || warmup.is_none() {
                if let Some(e) = timed_estimate(&mut ra, ra_last.is_some(), &mut ra_track.clock).map_err(ctx)? {
                    if e.phase == jape_core::jape::Phase::Warmup {
                        warm_x = Some(e.estimate);
                    }
                    if !e.converged {
                        ra_track.nonconverged += 1;
                    }
                    ra_last = Some(e);
                }
            }
            if let Some(ba) = ba.as_mut() {
                ba.feed(d).map_err(ctx)?;
                if d.m % config.batch_every == 0 || last {
                    let have = !ba_track.records.is_empty();
                    if let Some(e) = timed_estimate(ba, have, &mut ba_track.clock).map_err(ctx)? {
                        if !e.converged {
                            ba_track.nonconverged += 1;
                        }
                        ba_solved = Some(e);
                    }
                }
            }
        }
        let epoch = builder.current();

        let ekf_running = ekf.is_some();
        if let Some(s) = ekf.as_mut() {
            let start = Instant::now();
            s.propagate(inc).map_err(ctx)?;
            s.update(fix).map_err(ctx)?;
            ekf_track.clock += start.elapsed().as_secs_f64();
        }
        if warmup.is_none() && epoch.t >= config.warmup_s - 1e-9 {
            if let Some(x) = warm_x.or(ra_last.as_ref().map(|e| e.estimate)) {
                let c = current_attitude(&x, &epoch.c_n, &epoch.c_b).map_err(ctx)?;
                let truth = traj.at(epoch.t).map_err(ctx)?;
                let [yaw, pitch, roll] = euler_error(&c, &truth.c_bn);
                warmup = Some(WarmupRecord {
                    t: epoch.t,
                    err_yaw_deg: yaw,
                    err_pitch_deg: pitch,
                    err_roll_deg: roll,
                });
                if want_ekf && !ekf_running {
                    let mut s = ekf_init(&c, fix, config.ekf_tuning());
                    s.body_rate = rate_at_end(inc);
                    ekf = Some(s);
                }
            }
        }

        if record || ba_solved.is_some() {
            let truth_c = traj.at(epoch.t).map_err(ctx)?.c_bn;
            if record && want_ra {
                if let Some(e) = &ra_last {
                    ra_track
                        .records
                        .push(recorder.jape(&ra, e, epoch, &truth_c).map_err(ctx)?);
                }
            }
            if let (Some(e), Some(ba)) = (&ba_solved, &ba) {
                ba_track
                    .records
                    .push(recorder.jape(ba, e, epoch, &truth_c).map_err(ctx)?);
            }
            if record {
                if let Some(s) = &ekf {
                    ekf_track.records.push(recorder.ekf(s, &truth_c));
                }
            }
        }
    }

    let tracks = [ra_track, ba_track, ekf_track]
        .into_iter()
        .filter(|t| match t.estimator {
            Estimator::RaJape => want_ra,
            Estimator::BaJape => want_ba,
            Estimator::Ekf => want_ekf,
        })
        .map(|t| {
            let e = t.estimator;
            t.finish().ok_or_else(|| HarnessError::NoEstimate {
                run: run_index,
                estimator: e.name(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunReport {
        run_index,
        seed: sim.seed,
        truth: TruthRecord {
            accel_bias_ug: (spec.accel_bias / MICRO_G).into(),
            gyro_bias_deg_per_h: (spec.gyro_bias / DEG_PER_HOUR).into(),
            lever_arm_m: spec.lever_arm.into(),
        },
        warmup,
        tracks,
    })
}

/// Outcome of running the recursive and batch estimators side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosscheckReport {
    pub run_index: usize,
    pub epochs_compared: usize,
    /// Largest `‖x_RA − x_BA‖∞` over the compared epochs.
    pub max_difference: f64,
    pub worst_epoch: usize,
}

/// Estimates with both backends every `every` epochs and compares them.
pub fn crosscheck(config: &ScenarioConfig, run_index: usize, every: usize) -> Result<CrosscheckReport> {
    if every == 0 {
        return Err(HarnessError::Config("crosscheck spacing must be at least 1".into()));
    }
    let sim = simulate(config, run_index)?;
    let ctx = |e| HarnessError::run(run_index, e);
    let est_config = EstimatorConfig {
        interval: sim.spec.interval(),
        warmup_s: config.warmup_s,
        solver: config.solver_options(),
    };
    let mut builder = CoeffBuilder::new(sim.gnss[0], sim.spec.interval(), config.window).map_err(ctx)?;
    let mut ra = JapeEstimator::new(est_config, Backend::Recursive).map_err(ctx)?;
    let mut ba = JapeEstimator::new(est_config, Backend::Batch).map_err(ctx)?;
    let mut report = CrosscheckReport {
        run_index,
        epochs_compared: 0,
        max_difference: 0.0,
        worst_epoch: 0,
    };
    let n = sim.imu.len();
    let (mut clock_ra, mut clock_ba) = (0.0, 0.0);
    for (k, (inc, fix)) in sim.imu.iter().zip(&sim.gnss[1..]).enumerate() {
        let Some(d) = builder.push(inc, fix).map_err(ctx)? else {
            continue;
        };
        ra.feed(&d).map_err(ctx)?;
        ba.feed(&d).map_err(ctx)?;
        if d.m % every != 0 && k + 1 != n {
            continue;
        }
        let have = report.epochs_compared > 0;
        let r = timed_estimate(&mut ra, have, &mut clock_ra).map_err(ctx)?;
        let b = timed_estimate(&mut ba, have, &mut clock_ba).map_err(ctx)?;
        if let (Some(r), Some(b)) = (r, b) {
            let diff = (r.estimate.to_vector() - b.estimate.to_vector()).amax();
            if !(diff <= report.max_difference) {
                report.max_difference = diff;
                report.worst_epoch = d.m;
            }
            report.epochs_compared += 1;
        }
    }
    Ok(report)
}
