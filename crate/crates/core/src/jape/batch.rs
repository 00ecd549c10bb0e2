use super::{attitude_matrix, lifted_param_block, split, Derivatives, Problem};
use crate::obs::DiffCoeff;
use crate::rotation::Quaternion;
use crate::{Mat13, Mat4, Vec13, Vec4};

/// `(½∇(πᵀπ), ½∇²(πᵀπ))` of one epoch, straight from the residual.
///
/// With `û = Ĝp`, `π = (A + [û]⁻) q`, so `∂π/∂q = A + [û]⁻` and
/// `∂π/∂p = [q]⁺Ĝ`; the only second derivative of `π` is
/// `∂²π/∂q∂pⱼ = [Ĝⱼ]⁻`.
fn epoch_terms(q: &Quaternion, p: &crate::Vec9, d: &DiffCoeff) -> (Vec13, Mat13) {
    let a = attitude_matrix(d);
    let g = lifted_param_block(d);
    let u_hat = Quaternion(g * p);
    let jq = a + u_hat.minus_matrix();
    let jp = q.plus_matrix() * g;
    let pi: Vec4 = jq * q.0;

    let mut half_grad = Vec13::zeros();
    half_grad.fixed_rows_mut::<4>(0).copy_from(&(jq.transpose() * pi));
    half_grad.fixed_rows_mut::<9>(4).copy_from(&(jp.transpose() * pi));

    let mut cross = jq.transpose() * jp;
    for j in 0..9 {
        let gj = Quaternion(g.column(j).into_owned());
        let col = gj.minus_matrix().transpose() * pi;
        let mut c = cross.column_mut(j);
        c += col;
    }
    let mut half_hess = Mat13::zeros();
    half_hess.fixed_view_mut::<4, 4>(0, 0).copy_from(&(jq.transpose() * jq));
    half_hess.fixed_view_mut::<4, 9>(0, 4).copy_from(&cross);
    half_hess.fixed_view_mut::<9, 4>(4, 0).copy_from(&cross.transpose());
    half_hess.fixed_view_mut::<9, 9>(4, 4).copy_from(&(jp.transpose() * jp));
    (half_grad, half_hess)
}

/// `(∇ₓL, ∇²ₓₓL, ∇²ₓμL)` summed over `epochs`.
pub fn grad_hess_batch(x: &Vec13, mu: f64, epochs: &[DiffCoeff]) -> Derivatives {
    let (q, p) = split(x);
    let mut g = Vec13::zeros();
    let mut h = Mat13::zeros();
    for d in epochs {
        let (eg, eh) = epoch_terms(&q, &p, d);
        g += eg;
        h += eh;
    }
    Derivatives::from_half_objective(x, mu, &g, &h)
}

/// The full epoch history, evaluated on every call.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a>(pub &'a [DiffCoeff]);

impl Problem for Batch<'_> {
    fn epochs(&self) -> usize {
        self.0.len()
    }

    fn objective_at(&self, x: &Vec13) -> f64 {
        let (q, p) = split(x);
        self.0
            .iter()
            .map(|d| {
                let u = Quaternion(lifted_param_block(d) * p);
                (attitude_matrix(d) * q.0 + q.plus_matrix() * u.0).norm_squared()
            })
            .sum()
    }

    fn derivatives(&self, x: &Vec13, mu: f64) -> Derivatives {
        grad_hess_batch(x, mu, self.0)
    }

    fn attitude_gram(&self) -> Mat4 {
        super::attitude_gram(self.0)
    }
}
