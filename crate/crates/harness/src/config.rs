//! Scenario configuration, stored as TOML.

use std::path::Path;

use jape_core::earth::GeodeticPosition;
use jape_core::rotation::{dcm_to_quat, Euler};
use jape_core::sim::{MotionProfile, SensorSpec, DEG_PER_HOUR, MICRO_G};
use jape_core::Vec3;
use serde::{Deserialize, Serialize};

use crate::{HarnessError, Result};

/// The ideal-to-realistic scenario used throughout the reports: 300 s of the
/// default maneuver at 30° N with a high-end INS and 50 Hz GNSS.
pub const DEFAULT_CONFIG: &str = r#"# Scenario configuration.
#
# Frames are North-Up-East. Euler angles are yaw (about Up), pitch (about
# East) and roll (about North), applied in that order body-to-nav.

# Simulated time, s. Must be at least warmup_s.
duration_s = 300.0
# Even-interval differencing window, epochs of T = 1 / gnss_rate_hz.
window = 50
# Attitude-only phase, s. The EKF is started from its attitude at this time.
warmup_s = 30.0
# Any of "ra-jape", "ba-jape", "ekf", or "all".
estimators = ["ra-jape", "ekf"]
# Run i draws its noise from seed_base + i.
seed_base = 1
# Monte Carlo run count.
runs = 50
# Spacing of recorded rows in the per-run time series, s.
record_interval_s = 0.1
# The batch estimator re-reads the whole history every solve, so it solves
# only every this many epochs.
batch_every = 50

[solver]
max_iter = 5
tolerance = 1e-12
step_guard = false

[motion]
# Start attitude, deg.
yaw_deg = 30.0
pitch_deg = 2.0
roll_deg = -1.0
# Start position.
lon_deg = 114.0
lat_deg = 30.0
height_m = 100.0
# Swings of yaw, pitch, roll about the start attitude: A (sin(2 pi f t + phase) - sin phase).
attitude_amplitude_deg = [10.0, 8.0, 6.0]
attitude_frequency_hz = [0.1, 0.15, 0.2]
attitude_phase_rad = [0.0, 0.7, 1.9]
# North, Up, East velocity: A cos(2 pi f t + phase).
velocity_amplitude_mps = [2.0, 1.0, 1.5]
velocity_frequency_hz = [0.1, 0.1, 0.1]
velocity_phase_rad = [0.0, 1.2, 2.5]

[sensor]
gyro_bias_deg_per_h = [0.01, 0.01, 0.01]
gyro_noise_deg_per_h_rthz = 0.1
accel_bias_ug = [50.0, 50.0, 50.0]
accel_noise_ug_rthz = 5.0
# The IMU delivers two samples per GNSS period.
imu_rate_hz = 100.0
gnss_rate_hz = 50.0
gnss_velocity_sigma_mps = 0.02
gnss_position_sigma_m = 0.2
# Antenna offset from the INS, body axes, m.
lever_arm_m = [1.0, 2.0, 1.5]

[ekf]
heading_sigma_deg = 8.0
level_sigma_deg = 1.0
velocity_sigma_mps = 0.5
position_sigma_m = 3.0
lever_sigma_m = 3.0
# Initial bias uncertainty as a multiple of the configured bias magnitude.
bias_sigma_factor = 2.0
# Normalized innovation squared gate; 0 disables it.
innovation_gate = 0.0
"#;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorChoice {
    RaJape,
    BaJape,
    Ekf,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub tolerance: f64,
    pub step_guard: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionConfig {
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub roll_deg: f64,
    pub lon_deg: f64,
    pub lat_deg: f64,
    pub height_m: f64,
    pub attitude_amplitude_deg: [f64; 3],
    pub attitude_frequency_hz: [f64; 3],
    pub attitude_phase_rad: [f64; 3],
    pub velocity_amplitude_mps: [f64; 3],
    pub velocity_frequency_hz: [f64; 3],
    pub velocity_phase_rad: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    pub gyro_bias_deg_per_h: [f64; 3],
    pub gyro_noise_deg_per_h_rthz: f64,
    pub accel_bias_ug: [f64; 3],
    pub accel_noise_ug_rthz: f64,
    pub imu_rate_hz: f64,
    pub gnss_rate_hz: f64,
    pub gnss_velocity_sigma_mps: f64,
    pub gnss_position_sigma_m: f64,
    pub lever_arm_m: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EkfConfig {
    pub heading_sigma_deg: f64,
    pub level_sigma_deg: f64,
    pub velocity_sigma_mps: f64,
    pub position_sigma_m: f64,
    pub lever_sigma_m: f64,
    pub bias_sigma_factor: f64,
    pub innovation_gate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub duration_s: f64,
    pub window: usize,
    pub warmup_s: f64,
    pub estimators: Vec<EstimatorChoice>,
    pub seed_base: u64,
    pub runs: usize,
    pub record_interval_s: f64,
    pub batch_every: usize,
    pub solver: SolverConfig,
    pub motion: MotionConfig,
    pub sensor: SensorConfig,
    pub ekf: EkfConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        toml::from_str(DEFAULT_CONFIG).expect("built-in configuration parses")
    }
}

impl ScenarioConfig {
    /// GNSS velocity noise raised to 0.2 m/s.
    pub fn enlarged_velocity_noise() -> Self {
        let mut c = Self::default();
        c.sensor.gnss_velocity_sigma_mps = 0.2;
        c
    }

    /// Low-cost INS: 10 °/h, 36 °/h/√Hz, 5000 μg, 80 μg/√Hz.
    pub fn consumer_grade() -> Self {
        let mut c = Self::default();
        c.sensor.gyro_bias_deg_per_h = [10.0; 3];
        c.sensor.gyro_noise_deg_per_h_rthz = 36.0;
        c.sensor.accel_bias_ug = [5000.0; 3];
        c.sensor.accel_noise_ug_rthz = 80.0;
        c
    }

    /// Navigation-grade biases and lever arm without any noise.
    pub fn noise_free() -> Self {
        let mut c = Self::default();
        c.sensor.gyro_noise_deg_per_h_rthz = 0.0;
        c.sensor.accel_noise_ug_rthz = 0.0;
        c.sensor.gnss_velocity_sigma_mps = 0.0;
        c.sensor.gnss_position_sigma_m = 0.0;
        c
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Self::default()),
            "velocity-noise" => Ok(Self::enlarged_velocity_noise()),
            "consumer" => Ok(Self::consumer_grade()),
            "noise-free" => Ok(Self::noise_free()),
            _ => Err(HarnessError::Config(format!(
                "unknown preset {name:?} (default, velocity-noise, consumer, noise-free)"
            ))),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if !(self.duration_s > 0.0) {
            return bad("duration_s must be positive");
        }
        if !(self.warmup_s >= 0.0) || self.duration_s < self.warmup_s {
            return bad("warmup_s must lie in [0, duration_s]");
        }
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if self.window == 0 || self.batch_every == 0 {
            return bad("window and batch_every must be at least 1");
        }
        if !(self.record_interval_s > 0.0) {
            return bad("record_interval_s must be positive");
        }
        if self.estimators.is_empty() {
            return bad("select at least one estimator");
        }
        if self.solver.max_iter == 0 || !(self.solver.tolerance > 0.0) {
            return bad("solver needs max_iter >= 1 and a positive tolerance");
        }
        self.profile()?.validate()?;
        self.sensor_spec().validate()?;
        Ok(())
    }

    pub fn wants(&self, e: EstimatorChoice) -> bool {
        self.estimators.iter().any(|&c| c == e || c == EstimatorChoice::All)
    }

    pub fn profile(&self) -> Result<MotionProfile> {
        let m = &self.motion;
        let c_bn = Euler::from_degrees(m.yaw_deg, m.pitch_deg, m.roll_deg).to_body_to_nav();
        Ok(MotionProfile {
            attitude_amplitude: Vec3::from(m.attitude_amplitude_deg).map(f64::to_radians),
            attitude_frequency: Vec3::from(m.attitude_frequency_hz),
            attitude_phase: Vec3::from(m.attitude_phase_rad),
            velocity_amplitude: Vec3::from(m.velocity_amplitude_mps),
            velocity_frequency: Vec3::from(m.velocity_frequency_hz),
            velocity_phase: Vec3::from(m.velocity_phase_rad),
            initial_attitude: dcm_to_quat(&c_bn.transpose())?,
            initial_position: GeodeticPosition::from_degrees(m.lon_deg, m.lat_deg, m.height_m),
        })
    }

    pub fn sensor_spec(&self) -> SensorSpec {
        let s = &self.sensor;
        SensorSpec {
            gyro_bias: Vec3::from(s.gyro_bias_deg_per_h) * DEG_PER_HOUR,
            gyro_noise_density: s.gyro_noise_deg_per_h_rthz * DEG_PER_HOUR,
            accel_bias: Vec3::from(s.accel_bias_ug) * MICRO_G,
            accel_noise_density: s.accel_noise_ug_rthz * MICRO_G,
            imu_rate: s.imu_rate_hz,
            gnss_rate: s.gnss_rate_hz,
            gnss_velocity_sigma: s.gnss_velocity_sigma_mps,
            gnss_position_sigma: s.gnss_position_sigma_m,
            lever_arm: Vec3::from(s.lever_arm_m),
        }
    }

    pub fn ekf_tuning(&self) -> jape_core::ekf::EkfTuning {
        let spec = self.sensor_spec();
        let e = &self.ekf;
        let mut t = jape_core::ekf::EkfTuning::from_spec(&spec);
        t.heading_sigma = e.heading_sigma_deg.to_radians();
        t.level_sigma = e.level_sigma_deg.to_radians();
        t.velocity_sigma = e.velocity_sigma_mps;
        t.position_sigma = e.position_sigma_m;
        t.lever_sigma = e.lever_sigma_m;
        t.gyro_bias_sigma = e.bias_sigma_factor * spec.gyro_bias.amax().max(1e-3 * DEG_PER_HOUR);
        t.accel_bias_sigma = e.bias_sigma_factor * spec.accel_bias.amax().max(MICRO_G);
        t.innovation_gate = (e.innovation_gate > 0.0).then_some(e.innovation_gate);
        t
    }

    pub fn solver_options(&self) -> jape_core::jape::SolverOptions {
        jape_core::jape::SolverOptions {
            max_iter: self.solver.max_iter,
            tolerance: self.solver.tolerance,
            step_guard: self.solver.step_guard,
            attitude_only: false,
        }
    }
}
