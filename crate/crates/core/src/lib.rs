//! Joint estimation of INS/GNSS initial attitude, inertial sensor biases and
//! GNSS antenna lever arm by online constrained optimization.
//!
//! The crate is `no_std` (it needs `alloc`) and contains every numerical piece
//! of the pipeline:
//!
//! * [`earth`]: WGS-84 geometry, Earth/transport rates and normal gravity in
//!   the North-Up-East frame.
//! * [`rotation`]: quaternion and direction-cosine algebra, including the
//!   quaternion multiplication matrices and the decompositions used by the
//!   recursive estimator.
//! * [`sim`]: analytic truth trajectories plus two-sample IMU and GNSS
//!   synthesis.
//! * [`obs`]: per-epoch observation coefficients and their even-interval
//!   differences.
//! * [`jape`]: attitude-only initialization, the batch and the recursive
//!   Newton-Lagrange solvers.
//! * [`strapdown`] and [`ekf`]: a strapdown mechanization and the error-state
//!   EKF used as the comparison baseline.
//!
//! Frames follow the North-Up-East convention throughout, with
//! `v = [v_N, v_U, v_E]` and position `[longitude, latitude, height]`.
#![no_std]
// `!(x > y)` comparisons deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod earth;
pub mod ekf;
mod error;
pub mod jape;
pub mod obs;
pub mod rotation;
pub mod sim;
pub mod strapdown;

pub use error::{Error, Result};

use nalgebra::{Matrix3, Matrix4, SMatrix, SVector, Vector3, Vector4};

pub type Vec3 = Vector3<f64>;
pub type Vec4 = Vector4<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Mat4 = Matrix4<f64>;
/// Parameter-sized blocks: `[χ λ γ]` maps the 9 non-attitude unknowns.
pub type Mat3x9 = SMatrix<f64, 3, 9>;
pub type Mat4x9 = SMatrix<f64, 4, 9>;
pub type Mat9 = SMatrix<f64, 9, 9>;
pub type Vec9 = SVector<f64, 9>;
/// Unknown vector `[q, b_a, b_g, l]`.
pub type Vec13 = SVector<f64, 13>;
pub type Mat13 = SMatrix<f64, 13, 13>;

/// Standard gravity, used only for μg unit conversions.
pub const G0: f64 = 9.806_65;
