//! Quaternion and direction-cosine algebra.
//!
//! Quaternions are stored scalar-first, `[s, η1, η2, η3]`, and are never
//! normalized implicitly. A unit quaternion `q` encodes the body-from-nav
//! matrix `C_n^b = (s² − ηᵀη)I + 2ηηᵀ − 2s(η×)`; its transpose `C_b^n` is the
//! matrix that satisfies `q ∘ v ∘ q* = C_b^n v` for vector quaternions.
//!
//! Rotation-valued results are identical for `q` and `−q`; comparisons of
//! quaternions themselves must account for that sign ambiguity.

use core::ops::{Mul, Neg};

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use crate::{Error, Mat3, Mat4, Result, Vec3, Vec4};

/// Tolerance on `|q|² − 1` accepted as "unit" by checked conversions.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Below this rotation angle the Rodrigues coefficients switch to series.
const SMALL_ANGLE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion(pub Vec4);

impl Quaternion {
    pub const fn new(s: f64, x: f64, y: f64, z: f64) -> Self {
        Self(Vector4::new(s, x, y, z))
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0)
    }

    /// Vector quaternion `[0, v]`.
    pub fn pure(v: &Vec3) -> Self {
        Self::new(0.0, v.x, v.y, v.z)
    }

    pub fn from_parts(s: f64, eta: &Vec3) -> Self {
        Self::new(s, eta.x, eta.y, eta.z)
    }

    pub fn s(&self) -> f64 {
        self.0[0]
    }

    pub fn eta(&self) -> Vec3 {
        Vector3::new(self.0[1], self.0[2], self.0[3])
    }

    pub fn conj(&self) -> Self {
        Self::new(self.0[0], -self.0[1], -self.0[2], -self.0[3])
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn normalized(&self) -> Self {
        Self(self.0 / self.0.norm())
    }

    /// `[q]⁺`, so that `q ∘ p = [q]⁺ p`.
    pub fn plus_matrix(&self) -> Mat4 {
        let (s, e) = (self.s(), self.eta());
        let mut m = Matrix4::zeros();
        m[(0, 0)] = s;
        m.fixed_view_mut::<1, 3>(0, 1).copy_from(&(-e.transpose()));
        m.fixed_view_mut::<3, 1>(1, 0).copy_from(&e);
        m.fixed_view_mut::<3, 3>(1, 1)
            .copy_from(&(Matrix3::identity() * s + skew(&e)));
        m
    }

    /// `[q]⁻`, so that `p ∘ q = [q]⁻ p`.
    pub fn minus_matrix(&self) -> Mat4 {
        let (s, e) = (self.s(), self.eta());
        let mut m = Matrix4::zeros();
        m[(0, 0)] = s;
        m.fixed_view_mut::<1, 3>(0, 1).copy_from(&(-e.transpose()));
        m.fixed_view_mut::<3, 1>(1, 0).copy_from(&e);
        m.fixed_view_mut::<3, 3>(1, 1)
            .copy_from(&(Matrix3::identity() * s - skew(&e)));
        m
    }

    /// Homogeneous quadratic form of `C_n^b(q)`, valid for any `q`;
    /// equals the rotation matrix only when `q` is unit.
    pub fn nav_to_body_unchecked(&self) -> Mat3 {
        let (s, e) = (self.s(), self.eta());
        Matrix3::identity() * (s * s - e.dot(&e)) + e * e.transpose() * 2.0 - skew(&e) * (2.0 * s)
    }

    /// Sign-insensitive angular distance to `other`, in radians.
    pub fn angle_to(&self, other: &Quaternion) -> f64 {
        let d = (self.0.dot(&other.0) / (self.norm() * other.norm())).abs().min(1.0);
        2.0 * d.acos()
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, rhs: Quaternion) -> Quaternion {
        quat_mul(&self, &rhs)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;

    fn neg(self) -> Quaternion {
        Quaternion(-self.0)
    }
}

/// Cross-product matrix: `skew(v) * w == v × w`.
pub fn skew(v: &Vec3) -> Mat3 {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`skew`] for an (approximately) antisymmetric matrix.
pub fn vee(m: &Mat3) -> Vec3 {
    Vector3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

pub fn quat_mul(q: &Quaternion, p: &Quaternion) -> Quaternion {
    let (qs, qv) = (q.s(), q.eta());
    let (ps, pv) = (p.s(), p.eta());
    Quaternion::from_parts(qs * ps - qv.dot(&pv), &(pv * qs + qv * ps + qv.cross(&pv)))
}

/// Both quaternion multiplication matrices, `([q]⁺, [q]⁻)`.
pub fn qmat(q: &Quaternion) -> (Mat4, Mat4) {
    (q.plus_matrix(), q.minus_matrix())
}

fn check_unit(q: &Quaternion) -> Result<()> {
    let deviation = q.norm_squared() - 1.0;
    if deviation.abs() > UNIT_TOLERANCE || !deviation.is_finite() {
        return Err(Error::NotUnit { deviation });
    }
    Ok(())
}

/// `C_n^b(0)` from the attitude quaternion.
pub fn quat_to_dcm(q: &Quaternion) -> Result<Mat3> {
    check_unit(q)?;
    Ok(q.nav_to_body_unchecked())
}

/// Inverse of [`quat_to_dcm`] by largest-pivot extraction.
///
/// The returned quaternion has a non-negative largest component.
pub fn dcm_to_quat(c: &Mat3) -> Result<Quaternion> {
    let residual = (c * c.transpose() - Matrix3::identity()).amax();
    let det = c.determinant();
    if residual > 1e-9 || (det - 1.0).abs() > 1e-9 {
        return Err(Error::NotRotation { residual, det });
    }
    // C_n^b = R(q)ᵀ, with R the usual active rotation matrix of q.
    let r = c.transpose();
    let tr = r.trace();
    let cands = [tr, r[(0, 0)], r[(1, 1)], r[(2, 2)]];
    let mut k = 0;
    for i in 1..4 {
        if cands[i] > cands[k] {
            k = i;
        }
    }
    let q = match k {
        0 => {
            let t = (1.0 + tr).sqrt() * 2.0;
            Quaternion::new(
                0.25 * t,
                (r[(2, 1)] - r[(1, 2)]) / t,
                (r[(0, 2)] - r[(2, 0)]) / t,
                (r[(1, 0)] - r[(0, 1)]) / t,
            )
        }
        1 => {
            let t = (1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).sqrt() * 2.0;
            Quaternion::new(
                (r[(2, 1)] - r[(1, 2)]) / t,
                0.25 * t,
                (r[(0, 1)] + r[(1, 0)]) / t,
                (r[(0, 2)] + r[(2, 0)]) / t,
            )
        }
        2 => {
            let t = (1.0 - r[(0, 0)] + r[(1, 1)] - r[(2, 2)]).sqrt() * 2.0;
            Quaternion::new(
                (r[(0, 2)] - r[(2, 0)]) / t,
                (r[(0, 1)] + r[(1, 0)]) / t,
                0.25 * t,
                (r[(1, 2)] + r[(2, 1)]) / t,
            )
        }
        _ => {
            let t = (1.0 - r[(0, 0)] - r[(1, 1)] + r[(2, 2)]).sqrt() * 2.0;
            Quaternion::new(
                (r[(1, 0)] - r[(0, 1)]) / t,
                (r[(0, 2)] + r[(2, 0)]) / t,
                (r[(1, 2)] + r[(2, 1)]) / t,
                0.25 * t,
            )
        }
    };
    Ok(q.normalized())
}

/// Exact Rodrigues formula `I + sin‖φ‖/‖φ‖ (φ×) + (1 − cos‖φ‖)/‖φ‖² (φ×)²`.
pub fn rotvec_to_dcm(phi: &Vec3) -> Mat3 {
    let angle2 = phi.norm_squared();
    let angle = angle2.sqrt();
    let (a, b) = if angle < SMALL_ANGLE {
        (1.0 - angle2 / 6.0, 0.5 - angle2 / 24.0)
    } else {
        (angle.sin() / angle, (1.0 - angle.cos()) / angle2)
    };
    let k = skew(phi);
    Matrix3::identity() + k * a + k * k * b
}

/// Rotation vector of a proper rotation matrix (angle below π).
pub fn dcm_to_rotvec(c: &Mat3) -> Vec3 {
    let cos_angle = ((c.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let angle = cos_angle.acos();
    let v = vee(c);
    if angle < SMALL_ANGLE {
        v
    } else {
        v * (angle / angle.sin())
    }
}

/// `J_β1, J_β2, J_β3`: with `q = [s, η]`, `[β]⁺[q]⁺ = s[β]⁺ + Σ ηᵢ J_βᵢ`.
pub fn jbeta_decomp(beta: &Vec3) -> [Mat4; 3] {
    let (b1, b2, b3) = (beta.x, beta.y, beta.z);
    [
        Matrix4::new(
            -b1, 0.0, -b3, b2, //
            0.0, -b1, b2, b3, //
            b3, -b2, -b1, 0.0, //
            -b2, -b3, 0.0, -b1,
        ),
        Matrix4::new(
            -b2, b3, 0.0, -b1, //
            -b3, -b2, -b1, 0.0, //
            0.0, b1, -b2, b3, //
            b1, 0.0, -b3, -b2,
        ),
        Matrix4::new(
            -b3, -b2, b1, 0.0, //
            b2, -b3, 0.0, -b1, //
            -b1, 0.0, -b3, -b2, //
            0.0, b1, b2, -b3,
        ),
    ]
}

/// `J_q1, J_q2, J_q3`: `q* ∘ β ∘ q = Σ βᵢ J_qᵢ` for a unit `q`.
pub fn jq_decomp(q: &Quaternion) -> Result<[Vec4; 3]> {
    check_unit(q)?;
    Ok(jq_terms(q))
}

/// Unchecked [`jq_decomp`]; the entries are homogeneous quadratics in `q`
/// and reproduce `q* ∘ β ∘ q` for any `q`.
pub(crate) fn jq_terms(q: &Quaternion) -> [Vec4; 3] {
    let s = q.s();
    let [e1, e2, e3] = [q.0[1], q.0[2], q.0[3]];
    [
        Vector4::new(
            0.0,
            s * s + e1 * e1 - e2 * e2 - e3 * e3,
            2.0 * e1 * e2 - 2.0 * s * e3,
            2.0 * s * e2 + 2.0 * e1 * e3,
        ),
        Vector4::new(
            0.0,
            2.0 * e1 * e2 + 2.0 * s * e3,
            s * s - e1 * e1 + e2 * e2 - e3 * e3,
            -2.0 * s * e1 + 2.0 * e2 * e3,
        ),
        Vector4::new(
            0.0,
            -2.0 * s * e2 + 2.0 * e1 * e3,
            2.0 * s * e1 + 2.0 * e2 * e3,
            s * s - e1 * e1 - e2 * e2 + e3 * e3,
        ),
    ]
}

/// Yaw, pitch and roll of a body-to-nav matrix, in radians.
///
/// `C_b^n = R_U(yaw) · R_E(pitch) · R_N(roll)`: yaw about Up, pitch about
/// East, roll about North, each a right-handed active rotation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Euler {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl Euler {
    pub fn new(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self { yaw, pitch, roll }
    }

    pub fn from_degrees(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self::new(yaw.to_radians(), pitch.to_radians(), roll.to_radians())
    }

    pub fn to_body_to_nav(&self) -> Mat3 {
        rot_up(self.yaw) * rot_east(self.pitch) * rot_north(self.roll)
    }

    pub fn from_body_to_nav(c: &Mat3) -> Self {
        Self {
            yaw: (-c[(2, 0)]).atan2(c[(0, 0)]),
            pitch: c[(1, 0)].clamp(-1.0, 1.0).asin(),
            roll: (-c[(1, 2)]).atan2(c[(1, 1)]),
        }
    }

    /// Angle-wise difference `self − other`, each wrapped to (−π, π].
    pub fn difference(&self, other: &Euler) -> Euler {
        Euler {
            yaw: wrap_pi(self.yaw - other.yaw),
            pitch: wrap_pi(self.pitch - other.pitch),
            roll: wrap_pi(self.roll - other.roll),
        }
    }
}

pub(crate) fn rot_north(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub(crate) fn rot_up(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub(crate) fn rot_east(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub fn wrap_pi(a: f64) -> f64 {
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut w = a % two_pi;
    if w <= -core::f64::consts::PI {
        w += two_pi;
    } else if w > core::f64::consts::PI {
        w -= two_pi;
    }
    w
}

/// Projects a nearly orthonormal matrix back onto SO(3).
pub fn orthonormalize(c: &Mat3) -> Mat3 {
    let svd = c.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    u * vt
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn sample_quats() -> [Quaternion; 4] {
        [
            Quaternion::new(0.9, 0.1, -0.3, 0.2).normalized(),
            Quaternion::new(-0.2, 0.7, 0.1, -0.4).normalized(),
            Quaternion::new(0.0, 0.0, 1.0, 0.0),
            Quaternion::new(0.5, -0.5, 0.5, 0.5),
        ]
    }

    #[test]
    fn skew_basics() {
        assert_eq!(skew(&Vec3::zeros()), Mat3::zeros());
        let w = skew(&Vec3::x()) * Vec3::y();
        assert_eq!(w, Vec3::z());
        let v = Vec3::new(0.3, -1.2, 2.5);
        assert_eq!(skew(&v).transpose(), -skew(&v));
        assert_eq!(vee(&skew(&v)), v);
    }

    #[test]
    fn quat_to_dcm_special_cases() {
        assert_eq!(quat_to_dcm(&Quaternion::identity()).unwrap(), Mat3::identity());
        let c = quat_to_dcm(&Quaternion::new(0.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(c, Mat3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0)));
        assert!(matches!(
            quat_to_dcm(&Quaternion::new(1.0, 0.1, 0.0, 0.0)),
            Err(Error::NotUnit { .. })
        ));
    }

    #[test]
    fn quat_dcm_matches_sandwich_product() {
        // q ∘ v ∘ q* = C_b^n v
        for q in sample_quats() {
            let cbn = quat_to_dcm(&q).unwrap().transpose();
            let v = Vec3::new(0.4, -2.0, 1.1);
            let rotated = q * Quaternion::pure(&v) * q.conj();
            assert_relative_eq!(rotated.eta(), cbn * v, epsilon = 1e-14);
            assert!(rotated.s().abs() < 1e-15);
        }
    }

    #[test]
    fn dcm_to_quat_special_cases() {
        let q = dcm_to_quat(&Mat3::identity()).unwrap();
        assert!(Quaternion::identity().angle_to(&q) < 1e-15);
        let q = dcm_to_quat(&Mat3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0))).unwrap();
        assert_relative_eq!(q.0.abs(), Vec4::new(0.0, 1.0, 0.0, 0.0), epsilon = 1e-15);
        let bad = Mat3::identity() * 1.01;
        assert!(matches!(dcm_to_quat(&bad), Err(Error::NotRotation { .. })));
        let reflection = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        assert!(matches!(dcm_to_quat(&reflection), Err(Error::NotRotation { .. })));
    }

    #[test]
    fn qmat_identity_and_products() {
        let (p, m) = qmat(&Quaternion::identity());
        assert_eq!(p, Mat4::identity());
        assert_eq!(m, Mat4::identity());
        let [q, r, ..] = sample_quats();
        assert_relative_eq!((q * r).0, q.plus_matrix() * r.0, epsilon = 1e-15);
        assert_relative_eq!((q * r).0, r.minus_matrix() * q.0, epsilon = 1e-15);
    }

    #[test]
    fn vector_quaternion_square() {
        let v = Vec3::new(1.0, 2.0, -0.5);
        let sq = Quaternion::pure(&v) * Quaternion::pure(&v);
        assert_eq!(sq.s(), -v.dot(&v));
    }

    #[test]
    fn rodrigues() {
        assert_eq!(rotvec_to_dcm(&Vec3::zeros()), Mat3::identity());
        let c = rotvec_to_dcm(&Vec3::new(FRAC_PI_2, 0.0, 0.0));
        assert_relative_eq!(c * Vec3::y(), Vec3::z(), epsilon = 1e-15);
        let phi = Vec3::new(1e-3, -2e-3, 0.5e-3);
        let first = Mat3::identity() + skew(&phi);
        assert!((rotvec_to_dcm(&phi) - first).norm() <= phi.norm_squared());
        let phi = Vec3::new(0.3, -1.1, 0.7);
        assert_relative_eq!(dcm_to_rotvec(&rotvec_to_dcm(&phi)), phi, epsilon = 1e-13);
    }

    #[test]
    fn jbeta_unit_and_zero() {
        for m in jbeta_decomp(&Vec3::zeros()) {
            assert_eq!(m, Mat4::zeros());
        }
        let [j1, _, _] = jbeta_decomp(&Vec3::x());
        let expected = Matrix4::new(
            -1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, -1.0,
        );
        assert_eq!(j1, expected);
    }

    #[test]
    fn jq_special_cases() {
        let [a, b, c] = jq_decomp(&Quaternion::identity()).unwrap();
        assert_eq!(a, Vec4::new(0.0, 1.0, 0.0, 0.0));
        assert_eq!(b, Vec4::new(0.0, 0.0, 1.0, 0.0));
        assert_eq!(c, Vec4::new(0.0, 0.0, 0.0, 1.0));
        let [a, b, c] = jq_decomp(&Quaternion::new(0.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(a, Vec4::new(0.0, 1.0, 0.0, 0.0));
        assert_eq!(b, Vec4::new(0.0, 0.0, -1.0, 0.0));
        assert_eq!(c, Vec4::new(0.0, 0.0, 0.0, -1.0));
        assert!(jq_decomp(&Quaternion::new(2.0, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn euler_round_trip_and_axes() {
        let e = Euler::from_degrees(40.0, -12.0, 7.5);
        let back = Euler::from_body_to_nav(&e.to_body_to_nav());
        assert_relative_eq!(back.yaw, e.yaw, epsilon = 1e-14);
        assert_relative_eq!(back.pitch, e.pitch, epsilon = 1e-14);
        assert_relative_eq!(back.roll, e.roll, epsilon = 1e-14);
        // Yaw rotates about Up: North heads toward -East for a positive angle.
        let c = Euler::new(FRAC_PI_2, 0.0, 0.0).to_body_to_nav();
        assert_relative_eq!(c * Vec3::x(), -Vec3::z(), epsilon = 1e-15);
        assert_relative_eq!(wrap_pi(3.0 * PI), PI, epsilon = 1e-15);
        assert_relative_eq!(wrap_pi(-PI), PI, epsilon = 1e-15);
    }
}
