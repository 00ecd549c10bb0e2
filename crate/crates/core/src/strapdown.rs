//! Two-sample strapdown mechanization of the attitude, velocity and position
//! rate equations in the North-Up-East frame.

use crate::earth::{curvature_matrix, EarthParams, GeodeticPosition};
use crate::obs::{coned_rotation, sculled_dv};
use crate::rotation::{orthonormalize, rotvec_to_dcm, skew};
use crate::sim::ImuIncrement;
use crate::{Mat3, Result, Vec3};

/// Navigation solution at the IMU.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavState {
    pub t: f64,
    /// `C_b^n`
    pub c_bn: Mat3,
    pub velocity: Vec3,
    pub position: GeodeticPosition,
}

impl NavState {
    /// Advances the state across one increment after removing the given
    /// biases. Earth-dependent terms use midpoint values from a predictor pass.
    pub fn propagate(&self, imu: &ImuIncrement, gyro_bias: &Vec3, accel_bias: &Vec3) -> Result<NavState> {
        let t = imu.interval;
        let half = t / 2.0;
        let inc = ImuIncrement {
            dtheta: imu.dtheta.map(|th| th - gyro_bias * half),
            dvel: imu.dvel.map(|dv| dv - accel_bias * half),
            ..*imu
        };
        let phi_b = coned_rotation(&inc);
        // Second-order rotation of the specific force, which rectifies under
        // sustained angular motion.
        let dv_b = sculled_dv(&inc) + phi_b.cross(&phi_b.cross(&(inc.dvel[0] + inc.dvel[1]))) / 6.0;

        let start = EarthParams::at(&self.position, &self.velocity)?;
        let predicted = self.step(&start, &phi_b, &dv_b, t)?;
        let end = EarthParams::at(&predicted.position, &predicted.velocity)?;
        let mid = EarthParams {
            r_e: (start.r_e + end.r_e) / 2.0,
            r_n: (start.r_n + end.r_n) / 2.0,
            omega_ie: (start.omega_ie + end.omega_ie) / 2.0,
            omega_en: (start.omega_en + end.omega_en) / 2.0,
            omega_in: (start.omega_in + end.omega_in) / 2.0,
            gravity: (start.gravity + end.gravity) / 2.0,
        };
        self.step(&mid, &phi_b, &dv_b, t)
    }

    fn step(&self, earth: &EarthParams, phi_b: &Vec3, dv_b: &Vec3, t: f64) -> Result<NavState> {
        let zeta = earth.omega_in * t;
        let dv_n = (Mat3::identity() - skew(&zeta) * 0.5) * self.c_bn * dv_b;
        let coriolis = (earth.omega_ie * 2.0 + earth.omega_en).cross(&self.velocity);
        // Coriolis evaluated at the start, corrected with the half-step change.
        let v_guess = self.velocity + dv_n + (earth.gravity - coriolis) * t;
        let coriolis_mid = (earth.omega_ie * 2.0 + earth.omega_en).cross(&((self.velocity + v_guess) * 0.5));
        let velocity = self.velocity + dv_n + (earth.gravity - coriolis_mid) * t;
        let c_bn = orthonormalize(&(rotvec_to_dcm(&-zeta) * self.c_bn * rotvec_to_dcm(phi_b)));
        let mean_v = (self.velocity + velocity) * 0.5;
        let mid_pos = self
            .position
            .offset(&(curvature_matrix(&self.position)? * mean_v * (t / 2.0)));
        let position = self.position.offset(&(curvature_matrix(&mid_pos)? * mean_v * t));
        Ok(NavState {
            t: self.t + t,
            c_bn,
            velocity,
            position,
        })
    }
}
