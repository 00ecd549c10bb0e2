//! Joint attitude and parameter estimation.
//!
//! Each differenced epoch gives the quaternion residual
//!
//! ```text
//! π = ([ᾱ]⁻ − [β̄]⁺) q + [q]⁺ Ĝ p,    Ĝ = [0; χ̄ λ̄ γ̄],  p = [b_a; b_g; l]
//! ```
//!
//! and the estimator minimizes `Σ πᵀπ` subject to `qᵀq = 1` with
//! Newton-Lagrange iterations. [`batch`] evaluates the derivatives from the
//! full epoch history, [`RecursiveAccumulators`] from fixed-size sums with the
//! unknowns factored out, and [`JapeEstimator`] drives either one epoch by
//! epoch.

mod accum;
mod batch;
mod estimator;
mod solver;

pub use accum::RecursiveAccumulators;
pub use batch::{grad_hess_batch, Batch};
pub use estimator::{Backend, EpochEstimate, EstimatorConfig, JapeEstimator, Phase};
pub use solver::{ba_jape, newton_lagrange_step, solve, Solution, SolverOptions, Step, KKT_CONDITION_LIMIT};

use nalgebra::SymmetricEigen;

use crate::obs::DiffCoeff;
use crate::rotation::{quat_to_dcm, Quaternion};
use crate::{Error, Mat3, Mat4, Mat4x9, Result, Vec13, Vec3, Vec4, Vec9};

/// Relative eigenvalue gap below which the attitude is declared unobservable.
pub const SPECTRUM_GAP_TOLERANCE: f64 = 1e-12;

/// `x = [q, b_a, b_g, l]` plus the multiplier `μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateX {
    /// Encodes `C_n^b(0)`.
    pub q: Quaternion,
    pub accel_bias: Vec3,
    pub gyro_bias: Vec3,
    pub lever_arm: Vec3,
    pub mu: f64,
}

impl EstimateX {
    /// Attitude only, every other parameter zero.
    pub fn from_attitude(q: Quaternion) -> Self {
        Self {
            q,
            accel_bias: Vec3::zeros(),
            gyro_bias: Vec3::zeros(),
            lever_arm: Vec3::zeros(),
            mu: 0.0,
        }
    }

    pub fn params(&self) -> Vec9 {
        let mut p = Vec9::zeros();
        p.fixed_rows_mut::<3>(0).copy_from(&self.accel_bias);
        p.fixed_rows_mut::<3>(3).copy_from(&self.gyro_bias);
        p.fixed_rows_mut::<3>(6).copy_from(&self.lever_arm);
        p
    }

    pub fn to_vector(&self) -> Vec13 {
        let mut x = Vec13::zeros();
        x.fixed_rows_mut::<4>(0).copy_from(&self.q.0);
        x.fixed_rows_mut::<9>(4).copy_from(&self.params());
        x
    }

    pub fn from_vector(x: &Vec13, mu: f64) -> Self {
        Self {
            q: Quaternion(x.fixed_rows::<4>(0).into_owned()),
            accel_bias: x.fixed_rows::<3>(4).into_owned(),
            gyro_bias: x.fixed_rows::<3>(7).into_owned(),
            lever_arm: x.fixed_rows::<3>(10).into_owned(),
            mu,
        }
    }

    /// `C_b^n(0)`; requires a unit `q`.
    pub fn body_to_nav(&self) -> Result<Mat3> {
        Ok(quat_to_dcm(&self.q)?.transpose())
    }
}

/// Splits `x` into `(q, p)`.
pub(crate) fn split(x: &Vec13) -> (Quaternion, Vec9) {
    (
        Quaternion(x.fixed_rows::<4>(0).into_owned()),
        x.fixed_rows::<9>(4).into_owned(),
    )
}

/// `A = [ᾱ]⁻ − [β̄]⁺`.
pub fn attitude_matrix(d: &DiffCoeff) -> Mat4 {
    Quaternion::pure(&d.alpha).minus_matrix() - Quaternion::pure(&d.beta).plus_matrix()
}

/// `Ĝ`: the parameter block with a zero scalar row on top.
pub fn lifted_param_block(d: &DiffCoeff) -> Mat4x9 {
    let mut g = Mat4x9::zeros();
    g.fixed_view_mut::<3, 9>(1, 0).copy_from(&d.param_block());
    g
}

/// Quaternion residual `π` of one epoch.
pub fn residual(x: &EstimateX, d: &DiffCoeff) -> Vec4 {
    let u = d.param_block() * x.params();
    attitude_matrix(d) * x.q.0 + x.q.plus_matrix() * Quaternion::pure(&u).0
}

/// `Σ πᵀπ` over `epochs`.
pub fn objective<'a>(x: &EstimateX, epochs: impl IntoIterator<Item = &'a DiffCoeff>) -> f64 {
    epochs.into_iter().map(|d| residual(x, d).norm_squared()).sum()
}

/// Gram matrix `K = Σ AᵀA` of the attitude-only problem.
pub fn attitude_gram<'a>(epochs: impl IntoIterator<Item = &'a DiffCoeff>) -> Mat4 {
    epochs
        .into_iter()
        .map(|d| {
            let a = attitude_matrix(d);
            a.transpose() * a
        })
        .sum()
}

/// Unit `q` minimizing `qᵀKq`: the eigenvector of the smallest eigenvalue.
///
/// The sign is chosen with a non-negative scalar part.
pub fn attitude_only_init(k: &Mat4) -> Result<Quaternion> {
    let sym = (k + k.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lo = eig.eigenvalues[order[0]];
    let gap = eig.eigenvalues[order[1]] - lo;
    let scale = eig.eigenvalues[order[3]].abs().max(1.0);
    if !(gap > SPECTRUM_GAP_TOLERANCE * scale) {
        return Err(Error::DegenerateSpectrum { gap });
    }
    let v: Vec4 = eig.eigenvectors.column(order[0]).into_owned();
    let v = v / v.norm();
    Ok(Quaternion(if v[0] < 0.0 { -v } else { v }))
}

/// `C_b^n(t) = C_n(0)^n(t) · C_b^n(0) · C_b(t)^b(0)`.
pub fn current_attitude(x: &EstimateX, c_n: &Mat3, c_b: &Mat3) -> Result<Mat3> {
    Ok(c_n.transpose() * x.body_to_nav()? * c_b)
}

/// [`current_attitude`] with the body-side matrix corrected for the
/// estimated gyro bias. `chi = −∫C_b dτ` rotates a constant bias into the
/// initial body frame, so the drift `C_b` picked up is `exp([χ b_g]×)`.
pub fn compensated_attitude(x: &EstimateX, c_n: &Mat3, c_b: &Mat3, chi: &Mat3) -> Result<Mat3> {
    let fix = crate::rotation::rotvec_to_dcm(&(chi * x.gyro_bias));
    current_attitude(x, c_n, &(fix * c_b))
}

/// Derivatives of the Lagrangian `L = Σ πᵀπ − μ (qᵀq − 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    /// `∇ₓL`
    pub grad: Vec13,
    /// `∇²ₓₓL`
    pub hess: crate::Mat13,
    /// `∇²ₓμL = −2 [q; 0]`
    pub grad_mu: Vec13,
}

impl Derivatives {
    /// Adds the multiplier terms to `½∇f` and `½∇²f`.
    pub(crate) fn from_half_objective(x: &Vec13, mu: f64, half_grad: &Vec13, half_hess: &crate::Mat13) -> Self {
        let mut q_part = Vec13::zeros();
        q_part.fixed_rows_mut::<4>(0).copy_from(&x.fixed_rows::<4>(0));
        let mut hess = half_hess * 2.0;
        for i in 0..4 {
            hess[(i, i)] -= 2.0 * mu;
        }
        Self {
            grad: half_grad * 2.0 - q_part * (2.0 * mu),
            hess,
            grad_mu: q_part * -2.0,
        }
    }
}

/// Sources of the objective and its derivatives at any `x`.
pub trait Problem {
    fn epochs(&self) -> usize;
    fn objective_at(&self, x: &Vec13) -> f64;
    fn derivatives(&self, x: &Vec13, mu: f64) -> Derivatives;
    /// `Σ AᵀA`, for the attitude-only initialization.
    fn attitude_gram(&self) -> Mat4;
}
