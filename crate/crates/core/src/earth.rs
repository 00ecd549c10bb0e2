//! WGS-84 reference ellipsoid, Earth rotation, transport rate and normal
//! gravity, all expressed in the North-Up-East local-level frame.

use nalgebra::{Matrix3, Vector3};

use crate::rotation::wrap_pi;
use crate::{Error, Mat3, Result, Vec3};

pub const WGS84_A: f64 = 6_378_137.0;
pub const WGS84_E2: f64 = 6.694_379_990_14e-3;
/// Earth rotation rate, rad/s.
pub const EARTH_RATE: f64 = 7.292_115e-5;

const GRAVITY_EQUATOR: f64 = 9.780_325_335_9;
const SOMIGLIANA_K: f64 = 0.001_931_852_652_41;
/// Free-air gradient, (m/s²)/m.
const FREE_AIR: f64 = 3.086e-6;
const POLAR_COS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeodeticPosition {
    /// Longitude, rad, wrapped to (−π, π].
    pub lon: f64,
    /// Latitude, rad.
    pub lat: f64,
    /// Height above the ellipsoid, m.
    pub height: f64,
}

impl GeodeticPosition {
    pub fn new(lon: f64, lat: f64, height: f64) -> Self {
        Self {
            lon: wrap_pi(lon),
            lat,
            height,
        }
    }

    pub fn from_degrees(lon_deg: f64, lat_deg: f64, height: f64) -> Self {
        Self::new(lon_deg.to_radians(), lat_deg.to_radians(), height)
    }

    /// `[λ, L, h]`.
    pub fn to_vector(&self) -> Vec3 {
        Vector3::new(self.lon, self.lat, self.height)
    }

    pub fn from_vector(p: &Vec3) -> Self {
        Self::new(p.x, p.y, p.z)
    }

    /// Adds a geodetic increment `[δλ, δL, δh]`.
    pub fn offset(&self, d: &Vec3) -> Self {
        Self::new(self.lon + d.x, self.lat + d.y, self.height + d.z)
    }

    fn check(&self) -> Result<f64> {
        let cos_lat = self.lat.cos();
        if cos_lat.abs() < POLAR_COS {
            return Err(Error::PolarSingularity { cos_lat });
        }
        Ok(cos_lat)
    }
}

/// `(R_E, R_N)`: transverse and meridian radii of curvature at latitude `lat`.
pub fn radii(lat: f64) -> (f64, f64) {
    let s = lat.sin();
    let w = 1.0 - WGS84_E2 * s * s;
    let r_e = WGS84_A / w.sqrt();
    let r_n = WGS84_A * (1.0 - WGS84_E2) / (w * w.sqrt());
    (r_e, r_n)
}

/// `(dR_E/dL, dR_N/dL)`.
pub(crate) fn radii_derivative(lat: f64) -> (f64, f64) {
    let (s, c) = lat.sin_cos();
    let w = 1.0 - WGS84_E2 * s * s;
    let d_re = WGS84_A * WGS84_E2 * s * c / (w * w.sqrt());
    let d_rn = 3.0 * WGS84_A * (1.0 - WGS84_E2) * WGS84_E2 * s * c / (w * w * w.sqrt());
    (d_re, d_rn)
}

/// Local curvature matrix `R_c`, with `ṗ = R_c v` for `p = [λ, L, h]` and
/// `v = [v_N, v_U, v_E]`.
pub fn curvature_matrix(pos: &GeodeticPosition) -> Result<Mat3> {
    let cos_lat = pos.check()?;
    let (r_e, r_n) = radii(pos.lat);
    let mut rc = Matrix3::zeros();
    rc[(0, 2)] = 1.0 / ((r_e + pos.height) * cos_lat);
    rc[(1, 0)] = 1.0 / (r_n + pos.height);
    rc[(2, 1)] = 1.0;
    Ok(rc)
}

/// Inverse of [`curvature_matrix`]: maps a geodetic increment to local metres.
pub fn curvature_matrix_inverse(pos: &GeodeticPosition) -> Result<Mat3> {
    let cos_lat = pos.check()?;
    let (r_e, r_n) = radii(pos.lat);
    let mut m = Matrix3::zeros();
    m[(2, 0)] = (r_e + pos.height) * cos_lat;
    m[(0, 1)] = r_n + pos.height;
    m[(1, 2)] = 1.0;
    Ok(m)
}

/// `ω_ie^n = Ω [cos L, sin L, 0]`.
pub fn earth_rate_n(pos: &GeodeticPosition) -> Vec3 {
    let (s, c) = pos.lat.sin_cos();
    Vector3::new(EARTH_RATE * c, EARTH_RATE * s, 0.0)
}

/// `ω_en^n = λ̇ [cos L, sin L, 0] − L̇ [0, 0, 1]`, with `[λ̇, L̇, ḣ] = R_c v`.
///
/// In components: `[v_E/(R_E+h), v_E tan L/(R_E+h), −v_N/(R_N+h)]`.
pub fn transport_rate_n(v: &Vec3, pos: &GeodeticPosition) -> Result<Vec3> {
    let cos_lat = pos.check()?;
    let (r_e, r_n) = radii(pos.lat);
    let east = v.z / (r_e + pos.height);
    Ok(Vector3::new(
        east,
        east * pos.lat.sin() / cos_lat,
        -v.x / (r_n + pos.height),
    ))
}

/// Normal gravity magnitude (Somigliana plus linear free-air correction).
pub fn gravity_magnitude(pos: &GeodeticPosition) -> f64 {
    let s2 = pos.lat.sin().powi(2);
    let g0 = GRAVITY_EQUATOR * (1.0 + SOMIGLIANA_K * s2) / (1.0 - WGS84_E2 * s2).sqrt();
    g0 - FREE_AIR * pos.height
}

/// `g^n = [0, −g, 0]`.
pub fn gravity_n(pos: &GeodeticPosition) -> Vec3 {
    Vector3::new(0.0, -gravity_magnitude(pos), 0.0)
}

/// Earth-model quantities at one position and velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarthParams {
    pub r_e: f64,
    pub r_n: f64,
    pub omega_ie: Vec3,
    pub omega_en: Vec3,
    pub omega_in: Vec3,
    pub gravity: Vec3,
}

impl EarthParams {
    pub fn at(pos: &GeodeticPosition, v: &Vec3) -> Result<Self> {
        let (r_e, r_n) = radii(pos.lat);
        let omega_ie = earth_rate_n(pos);
        let omega_en = transport_rate_n(v, pos)?;
        Ok(Self {
            r_e,
            r_n,
            omega_ie,
            omega_en,
            omega_in: omega_ie + omega_en,
            gravity: gravity_n(pos),
        })
    }
}
