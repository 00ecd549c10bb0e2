//! Error-state extended Kalman filter with 18 states
//! `[φ, δv, δr, δb_g, δb_a, δl]`.
//!
//! Every error is truth minus estimate. `φ` is the attitude error in the
//! navigation frame with `C_b^n = (I + φ×) Ĉ_b^n`, `δr` the position error in
//! local North-Up-East metres. Biases and lever arm are random constants.
//!
//! Continuous error dynamics (`Ω = 2ω_ie + ω_en`, `f^n = Ĉ f̂^b`):
//!
//! ```text
//! φ̇  = −ω_in × φ − Ĉ δb_g
//! δv̇ = −f^n × φ − Ω × δv − Ĉ δb_a
//! δṙ = δv
//! ```
//!
//! discretized as `Φ = I + F T`. The GNSS antenna measurement is
//!
//! ```text
//! r_ant = r + C l
//! v_ant = v + C (ω_ib × l) − ω_ie × (C l)
//! ```
//!
//! with the position part in local metres about the nominal INS position.

use nalgebra::{SMatrix, SVector};

use crate::earth::{curvature_matrix, curvature_matrix_inverse, earth_rate_n, EarthParams};
use crate::obs::{rate_at_end, sculled_dv};
use crate::rotation::{orthonormalize, rotvec_to_dcm, skew, wrap_pi};
use crate::sim::{GnssFix, ImuIncrement, SensorSpec};
use crate::strapdown::NavState;
use crate::{Error, Mat3, Result, Vec3};

pub type Vec18 = SVector<f64, 18>;
pub type Mat18 = SMatrix<f64, 18, 18>;
pub type Vec6 = SVector<f64, 6>;
pub type Mat6 = SMatrix<f64, 6, 6>;
pub type Mat6x18 = SMatrix<f64, 6, 18>;

pub const ATT: usize = 0;
pub const VEL: usize = 3;
pub const POS: usize = 6;
pub const GYRO: usize = 9;
pub const ACCEL: usize = 12;
pub const LEVER: usize = 15;

/// Filter times closer than this are taken as equal, s.
pub const TIME_TOLERANCE: f64 = 1e-6;

/// Initial uncertainties and noise levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EkfTuning {
    /// 1σ of the Up-axis attitude error, rad.
    pub heading_sigma: f64,
    /// 1σ of the North and East attitude errors, rad.
    pub level_sigma: f64,
    pub velocity_sigma: f64,
    pub position_sigma: f64,
    pub gyro_bias_sigma: f64,
    pub accel_bias_sigma: f64,
    pub lever_sigma: f64,
    /// Angle random walk, rad/√s.
    pub gyro_noise_density: f64,
    /// Velocity random walk, (m/s)/√s.
    pub accel_noise_density: f64,
    pub velocity_meas_sigma: f64,
    pub position_meas_sigma: f64,
    /// Reject fixes whose normalized innovation squared exceeds this.
    pub innovation_gate: Option<f64>,
}

impl EkfTuning {
    /// Tuning for an attitude known to about 8° in heading and 1° in level,
    /// an unknown lever arm of a few metres and biases up to twice the
    /// sensor specification.
    pub fn from_spec(spec: &SensorSpec) -> Self {
        Self {
            heading_sigma: 8f64.to_radians(),
            level_sigma: 1f64.to_radians(),
            velocity_sigma: 0.5,
            position_sigma: 3.0,
            gyro_bias_sigma: 2.0 * spec.gyro_bias.amax().max(1e-3 * crate::sim::DEG_PER_HOUR),
            accel_bias_sigma: 2.0 * spec.accel_bias.amax().max(crate::sim::MICRO_G),
            lever_sigma: 3.0,
            gyro_noise_density: spec.gyro_noise_density,
            accel_noise_density: spec.accel_noise_density,
            velocity_meas_sigma: spec.gnss_velocity_sigma.max(1e-4),
            position_meas_sigma: spec.gnss_position_sigma.max(1e-3),
            innovation_gate: None,
        }
    }

    /// Every uncertainty and noise level zero.
    pub fn zero() -> Self {
        Self {
            heading_sigma: 0.0,
            level_sigma: 0.0,
            velocity_sigma: 0.0,
            position_sigma: 0.0,
            gyro_bias_sigma: 0.0,
            accel_bias_sigma: 0.0,
            lever_sigma: 0.0,
            gyro_noise_density: 0.0,
            accel_noise_density: 0.0,
            velocity_meas_sigma: 0.0,
            position_meas_sigma: 0.0,
            innovation_gate: None,
        }
    }

    fn initial_covariance(&self) -> Mat18 {
        let mut sig = Vec18::zeros();
        sig[ATT] = self.level_sigma;
        sig[ATT + 1] = self.heading_sigma;
        sig[ATT + 2] = self.level_sigma;
        let blocks = [
            (VEL, self.velocity_sigma),
            (POS, self.position_sigma),
            (GYRO, self.gyro_bias_sigma),
            (ACCEL, self.accel_bias_sigma),
            (LEVER, self.lever_sigma),
        ];
        for (start, s) in blocks {
            sig.fixed_rows_mut::<3>(start).fill(s);
        }
        Mat18::from_diagonal(&sig.component_mul(&sig))
    }

    fn measurement_noise(&self) -> Mat6 {
        let (p, v) = (self.position_meas_sigma.powi(2), self.velocity_meas_sigma.powi(2));
        Mat6::from_diagonal(&Vec6::new(p, p, p, v, v, v))
    }
}

/// Nominal state, parameter estimates and error covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct EkfState {
    pub nav: NavState,
    pub gyro_bias: Vec3,
    pub accel_bias: Vec3,
    pub lever_arm: Vec3,
    pub cov: Mat18,
    pub tuning: EkfTuning,
    /// Bias-corrected `ω_ib^b` at the current time.
    pub body_rate: Vec3,
}

/// Starts the filter at `fix` with attitude `c_bn`, zero biases and zero
/// lever arm; the INS is placed at the antenna.
pub fn ekf_init(c_bn: &Mat3, fix: &GnssFix, tuning: EkfTuning) -> EkfState {
    EkfState {
        nav: NavState {
            t: fix.t,
            c_bn: *c_bn,
            velocity: fix.velocity,
            position: fix.position,
        },
        gyro_bias: Vec3::zeros(),
        accel_bias: Vec3::zeros(),
        lever_arm: Vec3::zeros(),
        cov: tuning.initial_covariance(),
        tuning,
        body_rate: Vec3::zeros(),
    }
}

/// Propagates across one IMU interval.
pub fn ekf_propagate(state: &EkfState, imu: &ImuIncrement) -> Result<EkfState> {
    let mut next = state.clone();
    next.propagate(imu)?;
    Ok(next)
}

/// Processes one GNSS fix at the current filter time.
pub fn ekf_update(state: &EkfState, fix: &GnssFix) -> Result<EkfState> {
    let mut next = state.clone();
    next.update(fix)?;
    Ok(next)
}

fn symmetrize(p: &Mat18) -> Mat18 {
    (p + p.transpose()) * 0.5
}

impl EkfState {
    pub fn propagate(&mut self, imu: &ImuIncrement) -> Result<()> {
        if (imu.t - self.nav.t).abs() > TIME_TOLERANCE {
            return Err(Error::TimeGap {
                expected: self.nav.t,
                got: imu.t,
            });
        }
        let t = imu.interval;
        let earth = EarthParams::at(&self.nav.position, &self.nav.velocity)?;
        let c = self.nav.c_bn;
        let f_n = c * (sculled_dv(imu) - self.accel_bias * t) / t;

        let mut f = Mat18::zeros();
        f.fixed_view_mut::<3, 3>(ATT, ATT).copy_from(&-skew(&earth.omega_in));
        f.fixed_view_mut::<3, 3>(ATT, GYRO).copy_from(&-c);
        f.fixed_view_mut::<3, 3>(VEL, ATT).copy_from(&-skew(&f_n));
        f.fixed_view_mut::<3, 3>(VEL, VEL)
            .copy_from(&-skew(&(earth.omega_ie * 2.0 + earth.omega_en)));
        f.fixed_view_mut::<3, 3>(VEL, ACCEL).copy_from(&-c);
        f.fixed_view_mut::<3, 3>(POS, VEL).copy_from(&Mat3::identity());
        let phi = Mat18::identity() + f * t;

        let mut q = Vec18::zeros();
        q.fixed_rows_mut::<3>(ATT)
            .fill(self.tuning.gyro_noise_density.powi(2) * t);
        q.fixed_rows_mut::<3>(VEL)
            .fill(self.tuning.accel_noise_density.powi(2) * t);

        self.nav = self.nav.propagate(imu, &self.gyro_bias, &self.accel_bias)?;
        self.body_rate = rate_at_end(imu) - self.gyro_bias;
        self.cov = symmetrize(&(phi * self.cov * phi.transpose() + Mat18::from_diagonal(&q)));
        Ok(())
    }

    /// Antenna `[r_ant; v_ant]` for the truth `nominal ⊕ err`, with `r_ant`
    /// in local metres about the nominal INS position.
    pub fn measurement(&self, err: &Vec18) -> Vec6 {
        let phi = err.fixed_rows::<3>(ATT);
        let c = rotvec_to_dcm(&phi.into_owned()) * self.nav.c_bn;
        let lever = self.lever_arm + err.fixed_rows::<3>(LEVER);
        let rate = self.body_rate - err.fixed_rows::<3>(GYRO);
        let w_ie = earth_rate_n(&self.nav.position);
        let cl = c * lever;
        let r = err.fixed_rows::<3>(POS) + cl;
        let v = self.nav.velocity + err.fixed_rows::<3>(VEL) + c * rate.cross(&lever) - w_ie.cross(&cl);
        let mut h = Vec6::zeros();
        h.fixed_rows_mut::<3>(0).copy_from(&r);
        h.fixed_rows_mut::<3>(3).copy_from(&v);
        h
    }

    /// Jacobian of [`measurement`](Self::measurement) at zero error.
    pub fn measurement_jacobian(&self) -> Mat6x18 {
        let c = self.nav.c_bn;
        let l = self.lever_arm;
        let w_ie = skew(&earth_rate_n(&self.nav.position));
        let cl = c * l;
        let mut h = Mat6x18::zeros();
        h.fixed_view_mut::<3, 3>(0, ATT).copy_from(&-skew(&cl));
        h.fixed_view_mut::<3, 3>(0, POS).copy_from(&Mat3::identity());
        h.fixed_view_mut::<3, 3>(0, LEVER).copy_from(&c);
        h.fixed_view_mut::<3, 3>(3, ATT)
            .copy_from(&(-skew(&(c * self.body_rate.cross(&l))) + w_ie * skew(&cl)));
        h.fixed_view_mut::<3, 3>(3, VEL).copy_from(&Mat3::identity());
        h.fixed_view_mut::<3, 3>(3, GYRO).copy_from(&(c * skew(&l)));
        h.fixed_view_mut::<3, 3>(3, LEVER)
            .copy_from(&(c * skew(&self.body_rate) - w_ie * c));
        h
    }

    /// Measured minus predicted antenna position (local metres) and velocity.
    pub fn innovation(&self, fix: &GnssFix) -> Result<Vec6> {
        let mut dp = fix.position.to_vector() - self.nav.position.to_vector();
        dp.x = wrap_pi(dp.x);
        let mut z = Vec6::zeros();
        z.fixed_rows_mut::<3>(0)
            .copy_from(&(curvature_matrix_inverse(&self.nav.position)? * dp));
        z.fixed_rows_mut::<3>(3).copy_from(&fix.velocity);
        Ok(z - self.measurement(&Vec18::zeros()))
    }

    pub fn update(&mut self, fix: &GnssFix) -> Result<()> {
        if (fix.t - self.nav.t).abs() > TIME_TOLERANCE {
            return Err(Error::TimeGap {
                expected: self.nav.t,
                got: fix.t,
            });
        }
        let y = self.innovation(fix)?;
        let h = self.measurement_jacobian();
        let r = self.tuning.measurement_noise();
        let s = h * self.cov * h.transpose() + r;
        let s_inv = s
            .try_inverse()
            .ok_or(Error::InvalidConfig("innovation covariance is singular"))?;
        if let Some(gate) = self.tuning.innovation_gate {
            let nis = (y.transpose() * s_inv * y)[0];
            if nis > gate {
                return Err(Error::InnovationOutlier { nis, gate });
            }
        }
        let k = self.cov * h.transpose() * s_inv;
        let dx = k * y;
        let ikh = Mat18::identity() - k * h;
        self.cov = symmetrize(&(ikh * self.cov * ikh.transpose() + k * r * k.transpose()));

        let phi = dx.fixed_rows::<3>(ATT).into_owned();
        self.nav.c_bn = orthonormalize(&(rotvec_to_dcm(&phi) * self.nav.c_bn));
        self.nav.velocity += dx.fixed_rows::<3>(VEL);
        let rc = curvature_matrix(&self.nav.position)?;
        self.nav.position = self.nav.position.offset(&(rc * dx.fixed_rows::<3>(POS)));
        self.gyro_bias += dx.fixed_rows::<3>(GYRO);
        self.accel_bias += dx.fixed_rows::<3>(ACCEL);
        self.lever_arm += dx.fixed_rows::<3>(LEVER);
        self.body_rate -= dx.fixed_rows::<3>(GYRO);
        Ok(())
    }
}
