//! Ground-truth trajectories and sensor synthesis.
//!
//! Attitude follows body-fixed Euler oscillations applied on top of the
//! initial attitude, `C_b^n(t) = C_b^n(0) · R_U(ψ(t)) R_E(θ(t)) R_N(φ(t))`,
//! each angle `A (sin(2πft + φ₀) − sin φ₀)` so that it starts at zero.
//!
//! Translation is defined by a geodetic position trajectory whose local
//! displacement along N, U and E has velocity `A cos(2πft + φ₀)`. Velocity,
//! acceleration and hence the specific force then follow analytically, which
//! keeps the gyro and accelerometer signals exactly consistent with the
//! navigation equations.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::earth::{self, EarthParams, GeodeticPosition};
use crate::rotation::{dcm_to_quat, quat_to_dcm, rot_east, rot_north, rot_up, Euler, Quaternion};
use crate::{Error, Mat3, Result, Vec3, G0};

/// Sinusoidal motion on top of a start attitude and position.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionProfile {
    /// Yaw, pitch, roll amplitudes, rad.
    pub attitude_amplitude: Vec3,
    /// Yaw, pitch, roll frequencies, Hz.
    pub attitude_frequency: Vec3,
    pub attitude_phase: Vec3,
    /// North, Up, East velocity amplitudes, m/s.
    pub velocity_amplitude: Vec3,
    pub velocity_frequency: Vec3,
    pub velocity_phase: Vec3,
    /// Encodes `C_n^b(0)`, same convention as the estimator's `q`.
    pub initial_attitude: Quaternion,
    pub initial_position: GeodeticPosition,
}

impl MotionProfile {
    /// Zero-amplitude profile: the INS sits still.
    pub fn stationary(initial_attitude: Quaternion, initial_position: GeodeticPosition) -> Self {
        Self {
            attitude_amplitude: Vec3::zeros(),
            attitude_frequency: Vec3::zeros(),
            attitude_phase: Vec3::zeros(),
            velocity_amplitude: Vec3::zeros(),
            velocity_frequency: Vec3::zeros(),
            velocity_phase: Vec3::zeros(),
            initial_attitude,
            initial_position,
        }
    }

    /// Default maneuver at 30° N: yaw/pitch/roll swings of 10°/8°/6° at
    /// 0.1/0.15/0.2 Hz and 2/1/1.5 m/s N/U/E velocity swings at 0.1 Hz.
    pub fn default_maneuver() -> Self {
        let c_bn = Euler::from_degrees(30.0, 2.0, -1.0).to_body_to_nav();
        let initial_attitude = dcm_to_quat(&c_bn.transpose()).expect("Euler angles give a proper rotation");
        Self {
            attitude_amplitude: Vector3::new(10.0, 8.0, 6.0) * (PI / 180.0),
            attitude_frequency: Vector3::new(0.1, 0.15, 0.2),
            attitude_phase: Vector3::new(0.0, 0.7, 1.9),
            velocity_amplitude: Vector3::new(2.0, 1.0, 1.5),
            velocity_frequency: Vector3::new(0.1, 0.1, 0.1),
            velocity_phase: Vector3::new(0.0, 1.2, 2.5),
            initial_attitude,
            initial_position: GeodeticPosition::from_degrees(114.0, 30.0, 100.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let freqs = self.attitude_frequency.iter().chain(self.velocity_frequency.iter());
        if freqs.clone().any(|f| !(*f >= 0.0) || !f.is_finite()) {
            return Err(Error::InvalidConfig("motion frequencies must be finite and >= 0"));
        }
        let finite = self
            .attitude_amplitude
            .iter()
            .chain(self.velocity_amplitude.iter())
            .chain(self.attitude_phase.iter())
            .chain(self.velocity_phase.iter())
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidConfig("motion amplitudes and phases must be finite"));
        }
        quat_to_dcm(&self.initial_attitude)?;
        earth::curvature_matrix(&self.initial_position)?;
        Ok(())
    }
}

/// Inertial sensor and GNSS receiver characteristics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSpec {
    /// rad/s
    pub gyro_bias: Vec3,
    /// rad/s/√Hz
    pub gyro_noise_density: f64,
    /// m/s²
    pub accel_bias: Vec3,
    /// m/s²/√Hz
    pub accel_noise_density: f64,
    pub imu_rate: f64,
    pub gnss_rate: f64,
    /// Per-axis GNSS velocity noise, m/s.
    pub gnss_velocity_sigma: f64,
    /// Per-axis GNSS position noise (N, U, E), m.
    pub gnss_position_sigma: f64,
    /// Antenna offset from the INS in body axes, m.
    pub lever_arm: Vec3,
}

/// 1 °/h in rad/s.
pub const DEG_PER_HOUR: f64 = PI / 180.0 / 3600.0;
/// 1 μg in m/s².
pub const MICRO_G: f64 = 1e-6 * G0;

impl SensorSpec {
    /// High-end INS: 0.01 °/h drift, 0.1 °/h/√Hz, 50 μg bias, 5 μg/√Hz;
    /// 100 Hz IMU, 50 Hz GNSS with 0.02 m/s and 0.2 m noise.
    pub fn navigation_grade() -> Self {
        Self {
            gyro_bias: Vec3::repeat(0.01 * DEG_PER_HOUR),
            gyro_noise_density: 0.1 * DEG_PER_HOUR,
            accel_bias: Vec3::repeat(50.0 * MICRO_G),
            accel_noise_density: 5.0 * MICRO_G,
            imu_rate: 100.0,
            gnss_rate: 50.0,
            gnss_velocity_sigma: 0.02,
            gnss_position_sigma: 0.2,
            lever_arm: Vector3::new(1.0, 2.0, 1.5),
        }
    }

    /// Low-cost INS: 10 °/h drift, 36 °/h/√Hz, 5000 μg bias, 80 μg/√Hz.
    pub fn consumer_grade() -> Self {
        Self {
            gyro_bias: Vec3::repeat(10.0 * DEG_PER_HOUR),
            gyro_noise_density: 36.0 * DEG_PER_HOUR,
            accel_bias: Vec3::repeat(5000.0 * MICRO_G),
            accel_noise_density: 80.0 * MICRO_G,
            ..Self::navigation_grade()
        }
    }

    /// Same biases and lever arm, every noise source switched off.
    pub fn noise_free(&self) -> Self {
        Self {
            gyro_noise_density: 0.0,
            accel_noise_density: 0.0,
            gnss_velocity_sigma: 0.0,
            gnss_position_sigma: 0.0,
            ..*self
        }
    }

    /// Update interval `T` (one GNSS period, two IMU samples).
    pub fn interval(&self) -> f64 {
        1.0 / self.gnss_rate
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.imu_rate > 0.0 && self.gnss_rate > 0.0) {
            return Err(Error::InvalidConfig("sensor rates must be positive"));
        }
        if (self.imu_rate - 2.0 * self.gnss_rate).abs() > 1e-9 * self.imu_rate {
            return Err(Error::InvalidConfig("IMU rate must be twice the GNSS rate"));
        }
        let sigmas = [
            self.gyro_noise_density,
            self.accel_noise_density,
            self.gnss_velocity_sigma,
            self.gnss_position_sigma,
        ];
        if sigmas.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::InvalidConfig("noise levels must be >= 0"));
        }
        Ok(())
    }
}

/// True navigation state and error-free sensor signals at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct NavTruth {
    pub t: f64,
    pub c_bn: Mat3,
    pub velocity: Vec3,
    pub position: GeodeticPosition,
    pub omega_ib_b: Vec3,
    pub f_b: Vec3,
    pub omega_eb_b: Vec3,
    pub earth: EarthParams,
}

/// Two-sample gyro and accelerometer increments over `[t, t + interval]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuIncrement {
    pub t: f64,
    pub dtheta: [Vec3; 2],
    pub dvel: [Vec3; 2],
    pub interval: f64,
}

/// Antenna velocity and position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnssFix {
    pub t: f64,
    pub velocity: Vec3,
    pub position: GeodeticPosition,
}

/// `(offset, rate, acceleration)` of `A (sin(ωt + φ) − sin φ)`.
fn angle_wave(amp: f64, freq: f64, phase: f64, t: f64) -> (f64, f64, f64) {
    let w = 2.0 * PI * freq;
    let (s, c) = (w * t + phase).sin_cos();
    (amp * (s - phase.sin()), amp * w * c, -amp * w * w * s)
}

/// `(displacement, velocity, acceleration)` with velocity `A cos(ωt + φ)`.
fn displacement_wave(amp: f64, freq: f64, phase: f64, t: f64) -> (f64, f64, f64) {
    let w = 2.0 * PI * freq;
    if w == 0.0 {
        let v = amp * phase.cos();
        return (v * t, v, 0.0);
    }
    let (s, c) = (w * t + phase).sin_cos();
    (amp / w * (s - phase.sin()), amp * c, -amp * w * s)
}

/// A validated profile with its constant terms precomputed.
#[derive(Debug, Clone)]
pub struct Trajectory {
    profile: MotionProfile,
    c_bn0: Mat3,
    north_scale: f64,
    east_scale: f64,
}

impl Trajectory {
    pub fn new(profile: &MotionProfile) -> Result<Self> {
        profile.validate()?;
        let p0 = profile.initial_position;
        let (r_e0, r_n0) = earth::radii(p0.lat);
        Ok(Self {
            c_bn0: quat_to_dcm(&profile.initial_attitude)?.transpose(),
            north_scale: 1.0 / (r_n0 + p0.height),
            east_scale: 1.0 / ((r_e0 + p0.height) * p0.lat.cos()),
            profile: profile.clone(),
        })
    }

    pub fn profile(&self) -> &MotionProfile {
        &self.profile
    }

    pub fn at(&self, t: f64) -> Result<NavTruth> {
        let pr = &self.profile;
        let p0 = pr.initial_position;
        let wave = |i: usize| {
            displacement_wave(
                pr.velocity_amplitude[i],
                pr.velocity_frequency[i],
                pr.velocity_phase[i],
                t,
            )
        };
        let (sn, sn_d, sn_dd) = wave(0);
        let (su, su_d, su_dd) = wave(1);
        let (se, se_d, se_dd) = wave(2);

        let lat = p0.lat + sn * self.north_scale;
        let (lat_d, lat_dd) = (sn_d * self.north_scale, sn_dd * self.north_scale);
        let (h, h_d, h_dd) = (p0.height + su, su_d, su_dd);
        let lon = p0.lon + se * self.east_scale;
        let (lon_d, lon_dd) = (se_d * self.east_scale, se_dd * self.east_scale);
        let position = GeodeticPosition::new(lon, lat, h);

        let (r_e, r_n) = earth::radii(lat);
        let (d_re, d_rn) = earth::radii_derivative(lat);
        let (sl, cl) = lat.sin_cos();
        let velocity = Vector3::new((r_n + h) * lat_d, h_d, (r_e + h) * cl * lon_d);
        let accel = Vector3::new(
            (d_rn * lat_d + h_d) * lat_d + (r_n + h) * lat_dd,
            h_dd,
            (d_re * lat_d + h_d) * cl * lon_d - (r_e + h) * sl * lat_d * lon_d + (r_e + h) * cl * lon_dd,
        );

        let ang = |i: usize| {
            angle_wave(
                pr.attitude_amplitude[i],
                pr.attitude_frequency[i],
                pr.attitude_phase[i],
                t,
            )
        };
        let (yaw, yaw_d, _) = ang(0);
        let (pitch, pitch_d, _) = ang(1);
        let (roll, roll_d, _) = ang(2);
        let (ry, rz, rx) = (rot_up(yaw), rot_east(pitch), rot_north(roll));
        let c_bn = self.c_bn0 * ry * rz * rx;
        let omega_nb_b = rx.transpose() * rz.transpose() * Vec3::y() * yaw_d
            + rx.transpose() * Vec3::z() * pitch_d
            + Vec3::x() * roll_d;

        let earth = EarthParams::at(&position, &velocity)?;
        let c_nb = c_bn.transpose();
        let omega_ib_b = omega_nb_b + c_nb * earth.omega_in;
        let coriolis = (earth.omega_ie * 2.0 + earth.omega_en).cross(&velocity);
        let f_b = c_nb * (accel + coriolis - earth.gravity);
        let omega_eb_b = omega_ib_b - c_nb * earth.omega_ie;
        Ok(NavTruth {
            t,
            c_bn,
            velocity,
            position,
            omega_ib_b,
            f_b,
            omega_eb_b,
            earth,
        })
    }
}

/// Truth at time `t` for `profile`.
pub fn truth_at(profile: &MotionProfile, t: f64) -> Result<NavTruth> {
    Trajectory::new(profile)?.at(t)
}

// Five-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];
/// Gauss-Legendre panels per IMU sample.
const PANELS: usize = 2;

/// `(∫ω_ib^b dt, ∫f^b dt)` over `[a, b]`.
fn integrate_rates(traj: &Trajectory, a: f64, b: f64) -> Result<(Vec3, Vec3)> {
    let mut dtheta = Vec3::zeros();
    let mut dvel = Vec3::zeros();
    let width = (b - a) / PANELS as f64;
    for p in 0..PANELS {
        let mid = a + (p as f64 + 0.5) * width;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let truth = traj.at(mid + 0.5 * width * x)?;
            dtheta += truth.omega_ib_b * (w * 0.5 * width);
            dvel += truth.f_b * (w * 0.5 * width);
        }
    }
    Ok((dtheta, dvel))
}

fn interval_count(duration: f64, period: f64) -> usize {
    (duration / period).round().max(0.0) as usize
}

/// Always consumes three draws, so switching one noise source off leaves the
/// realizations of the others unchanged.
fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> Vec3 {
    let mut draw = || -> f64 { StandardNormal.sample(rng) };
    Vector3::new(draw(), draw(), draw()) * sigma
}

const IMU_STREAM: u64 = 0;
const GNSS_STREAM: u64 = 1;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Two-sample IMU increments for `duration / T` update intervals.
///
/// Each sample integrates the analytic rates plus the constant biases over
/// its half interval; white noise with variance `density² · T/2` is added.
pub fn synthesize_imu(
    profile: &MotionProfile,
    spec: &SensorSpec,
    seed: u64,
    duration: f64,
) -> Result<Vec<ImuIncrement>> {
    spec.validate()?;
    let traj = Trajectory::new(profile)?;
    let period = spec.interval();
    let half = 0.5 * period;
    let mut rng = rng_for(seed, IMU_STREAM);
    let gyro_sigma = spec.gyro_noise_density * half.sqrt();
    let accel_sigma = spec.accel_noise_density * half.sqrt();
    let n = interval_count(duration, period);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 * period;
        let mut dtheta = [Vec3::zeros(); 2];
        let mut dvel = [Vec3::zeros(); 2];
        for i in 0..2 {
            let a = t + i as f64 * half;
            let (th, v) = integrate_rates(&traj, a, a + half)?;
            dtheta[i] = th + spec.gyro_bias * half + gaussian(&mut rng, gyro_sigma);
            dvel[i] = v + spec.accel_bias * half + gaussian(&mut rng, accel_sigma);
        }
        out.push(ImuIncrement {
            t,
            dtheta,
            dvel,
            interval: period,
        });
    }
    Ok(out)
}

/// Noise-free antenna velocity and position for a truth sample.
pub fn antenna_fix(truth: &NavTruth, lever_arm: &Vec3) -> Result<GnssFix> {
    let rc = earth::curvature_matrix(&truth.position)?;
    let velocity = truth.velocity + truth.c_bn * truth.omega_eb_b.cross(lever_arm);
    let position = truth.position.offset(&(rc * truth.c_bn * lever_arm));
    Ok(GnssFix {
        t: truth.t,
        velocity,
        position,
    })
}

/// GNSS fixes at `t = 0, T, …, duration`.
pub fn synthesize_gnss(profile: &MotionProfile, spec: &SensorSpec, seed: u64, duration: f64) -> Result<Vec<GnssFix>> {
    spec.validate()?;
    let traj = Trajectory::new(profile)?;
    let period = spec.interval();
    let mut rng = rng_for(seed, GNSS_STREAM);
    let n = interval_count(duration, period);
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let truth = traj.at(k as f64 * period)?;
        let mut fix = antenna_fix(&truth, &spec.lever_arm)?;
        fix.velocity += gaussian(&mut rng, spec.gnss_velocity_sigma);
        let noise_m = gaussian(&mut rng, spec.gnss_position_sigma);
        if noise_m != Vec3::zeros() {
            let rc = earth::curvature_matrix(&fix.position)?;
            fix.position = fix.position.offset(&(rc * noise_m));
        }
        out.push(fix);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn start() -> (Quaternion, GeodeticPosition) {
        let c_bn = Euler::from_degrees(30.0, 2.0, -1.0).to_body_to_nav();
        let q = crate::rotation::dcm_to_quat(&c_bn.transpose()).unwrap();
        (q, GeodeticPosition::from_degrees(114.0, 30.0, 100.0))
    }

    fn wavy() -> MotionProfile {
        let (q, p) = start();
        MotionProfile {
            attitude_amplitude: Vector3::new(10f64.to_radians(), 8f64.to_radians(), 6f64.to_radians()),
            attitude_frequency: Vector3::new(0.1, 0.15, 0.2),
            attitude_phase: Vector3::new(0.0, 0.5, 1.0),
            velocity_amplitude: Vector3::new(2.0, 1.0, 1.5),
            velocity_frequency: Vector3::new(0.1, 0.1, 0.1),
            velocity_phase: Vector3::new(0.0, 1.0, 2.0),
            initial_attitude: q,
            initial_position: p,
        }
    }

    #[test]
    fn static_truth() {
        let (q, p) = start();
        let prof = MotionProfile::stationary(q, p);
        let tr = truth_at(&prof, 12.5).unwrap();
        let c_nb = tr.c_bn.transpose();
        assert_eq!(tr.velocity, Vec3::zeros());
        assert_relative_eq!(tr.omega_ib_b, c_nb * tr.earth.omega_ie, epsilon = 1e-18);
        assert_relative_eq!(tr.f_b, -c_nb * tr.earth.gravity, epsilon = 1e-14);
    }

    #[test]
    fn initial_attitude_exact() {
        let prof = wavy();
        let tr = truth_at(&prof, 0.0).unwrap();
        let expected = quat_to_dcm(&prof.initial_attitude).unwrap().transpose();
        assert_relative_eq!(tr.c_bn, expected, epsilon = 1e-15);
        assert_eq!(tr.position, prof.initial_position);
    }

    #[test]
    fn yaw_rate_matches_finite_difference() {
        let (q, p) = start();
        let mut prof = MotionProfile::stationary(q, p);
        prof.attitude_amplitude.x = 0.1;
        prof.attitude_frequency.x = 0.2;
        let traj = Trajectory::new(&prof).unwrap();
        let t = 3.3;
        let h = 1e-5;
        let c_dot = (traj.at(t + h).unwrap().c_bn - traj.at(t - h).unwrap().c_bn) / (2.0 * h);
        let tr = traj.at(t).unwrap();
        let omega_nb = crate::rotation::vee(&(tr.c_bn.transpose() * c_dot));
        let expected = 2.0 * PI * 0.2 * 0.1 * (2.0 * PI * 0.2 * t).cos();
        assert_relative_eq!(omega_nb.y, expected, epsilon = 1e-9);
        let omega_nb_analytic = tr.omega_ib_b - tr.c_bn.transpose() * tr.earth.omega_in;
        assert_relative_eq!(omega_nb_analytic, omega_nb, epsilon = 1e-9);
    }

    #[test]
    fn velocity_is_position_rate() {
        let traj = Trajectory::new(&wavy()).unwrap();
        let t = 7.7;
        let h = 1e-4;
        let (a, b) = (traj.at(t - 10.0 * h).unwrap(), traj.at(t + 10.0 * h).unwrap());
        let pdot = (b.position.to_vector() - a.position.to_vector()) / (20.0 * h);
        let tr = traj.at(t).unwrap();
        let minv = earth::curvature_matrix_inverse(&tr.position).unwrap();
        assert_relative_eq!(minv * pdot, tr.velocity, epsilon = 1e-6);
        let (a, b) = (traj.at(t - h).unwrap(), traj.at(t + h).unwrap());
        let vdot = (b.velocity - a.velocity) / (2.0 * h);
        let coriolis = (tr.earth.omega_ie * 2.0 + tr.earth.omega_en).cross(&tr.velocity);
        assert_relative_eq!(tr.c_bn * tr.f_b - coriolis + tr.earth.gravity, vdot, epsilon = 1e-7);
    }

    #[test]
    fn static_earth_rate_increments() {
        let (q, p) = start();
        let prof = MotionProfile::stationary(q, p);
        let spec = SensorSpec {
            gyro_bias: Vec3::zeros(),
            accel_bias: Vec3::zeros(),
            ..SensorSpec::navigation_grade().noise_free()
        };
        let imu = synthesize_imu(&prof, &spec, 1, 1.0).unwrap();
        assert_eq!(imu.len(), 50);
        for inc in &imu {
            let total = (inc.dtheta[0] + inc.dtheta[1]).norm();
            assert_relative_eq!(total, earth::EARTH_RATE * 0.02, max_relative = 1e-10);
        }
    }

    #[test]
    fn bias_only_increments() {
        let prof = wavy();
        let spec = SensorSpec::navigation_grade().noise_free();
        let clean = SensorSpec {
            gyro_bias: Vec3::zeros(),
            accel_bias: Vec3::zeros(),
            ..spec
        };
        let biased = synthesize_imu(&prof, &spec, 3, 2.0).unwrap();
        let reference = synthesize_imu(&prof, &clean, 3, 2.0).unwrap();
        let traj = Trajectory::new(&prof).unwrap();
        // High-rate (100x) midpoint quadrature of the analytic gyro rate.
        let mut mean = Vec3::zeros();
        for (inc, r) in biased.iter().zip(&reference) {
            let n = 100;
            let dt = 0.01 / n as f64;
            let dense: Vec3 = (0..n)
                .map(|j| traj.at(inc.t + (j as f64 + 0.5) * dt).unwrap().omega_ib_b * dt)
                .sum();
            assert_relative_eq!(r.dtheta[0], dense, epsilon = 1e-10);
            mean += (inc.dtheta[0] - dense) / 0.01;
        }
        mean /= biased.len() as f64;
        assert_relative_eq!(mean, spec.gyro_bias, epsilon = 1e-9);
    }

    #[test]
    fn deterministic_given_seed() {
        let prof = wavy();
        let spec = SensorSpec::navigation_grade();
        let a = synthesize_imu(&prof, &spec, 42, 1.0).unwrap();
        let b = synthesize_imu(&prof, &spec, 42, 1.0).unwrap();
        assert_eq!(a, b);
        let c = synthesize_imu(&prof, &spec, 43, 1.0).unwrap();
        assert_ne!(a, c);
        let g1 = synthesize_gnss(&prof, &spec, 42, 1.0).unwrap();
        let g2 = synthesize_gnss(&prof, &spec, 42, 1.0).unwrap();
        assert_eq!(g1, g2);
        assert_eq!(g1.len(), 51);
    }

    #[test]
    fn zero_lever_arm_gnss_is_ins() {
        let prof = wavy();
        let spec = SensorSpec {
            lever_arm: Vec3::zeros(),
            ..SensorSpec::navigation_grade().noise_free()
        };
        let traj = Trajectory::new(&prof).unwrap();
        for fix in synthesize_gnss(&prof, &spec, 0, 0.5).unwrap() {
            let tr = traj.at(fix.t).unwrap();
            assert_eq!(fix.velocity, tr.velocity);
            assert_eq!(fix.position, tr.position);
        }
    }

    #[test]
    fn static_lever_arm_velocity_bound() {
        let (q, p) = start();
        let prof = MotionProfile::stationary(q, p);
        let spec = SensorSpec::navigation_grade().noise_free();
        let traj = Trajectory::new(&prof).unwrap();
        for fix in synthesize_gnss(&prof, &spec, 0, 0.2).unwrap() {
            let tr = traj.at(fix.t).unwrap();
            let bound = tr.omega_eb_b.norm() * spec.lever_arm.norm();
            assert!((fix.velocity - tr.velocity).norm() <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn lever_offset_rotates_with_body() {
        let (q, p) = start();
        let mut prof = MotionProfile::stationary(q, p);
        prof.attitude_amplitude.x = 0.5;
        prof.attitude_frequency.x = 0.25;
        let spec = SensorSpec::navigation_grade().noise_free();
        let traj = Trajectory::new(&prof).unwrap();
        let fixes = synthesize_gnss(&prof, &spec, 0, 1.0).unwrap();
        for fix in [fixes[0], fixes[50]] {
            let tr = traj.at(fix.t).unwrap();
            let minv = earth::curvature_matrix_inverse(&tr.position).unwrap();
            let offset = minv * (fix.position.to_vector() - tr.position.to_vector());
            assert_relative_eq!(offset, tr.c_bn * spec.lever_arm, epsilon = 1e-6);
        }
    }

    #[test]
    fn gnss_noise_statistics() {
        let (q, p) = start();
        let prof = MotionProfile::stationary(q, p);
        let spec = SensorSpec {
            lever_arm: Vec3::zeros(),
            ..SensorSpec::navigation_grade()
        };
        let fixes = synthesize_gnss(&prof, &spec, 9, 200.0).unwrap();
        assert!(fixes.len() > 10_000);
        let n = fixes.len() as f64;
        let mut sum2 = Vec3::zeros();
        let mut pos2 = Vec3::zeros();
        let minv = earth::curvature_matrix_inverse(&p).unwrap();
        for f in &fixes {
            sum2 += f.velocity.component_mul(&f.velocity);
            let d = minv * (f.position.to_vector() - p.to_vector());
            pos2 += d.component_mul(&d);
        }
        for i in 0..3 {
            assert_relative_eq!((sum2[i] / n).sqrt(), 0.02, max_relative = 0.05);
            assert_relative_eq!((pos2[i] / n).sqrt(), 0.2, max_relative = 0.05);
        }
    }
}
