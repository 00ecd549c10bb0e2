use nalgebra::SMatrix;

use super::{attitude_matrix, lifted_param_block, split, Derivatives, Problem};
use crate::obs::DiffCoeff;
use crate::rotation::{jbeta_decomp, jq_terms, Quaternion};
use crate::{Error, Mat13, Mat4, Mat4x9, Mat9, Result, Vec13, Vec9};

type Mat9x3 = SMatrix<f64, 9, 3>;

/// Epoch sums from which the objective and its derivatives are assembled at
/// any `x` without revisiting past epochs.
///
/// With `A = [ᾱ]⁻ − [β̄]⁺`, `G = [χ̄ λ̄ γ̄]` and `Ĝ = [0; G]`:
///
/// | field        | per-epoch term      |
/// |--------------|---------------------|
/// | `k`          | `AᵀA`               |
/// | `s_alpha`    | `[ᾱ]⁻ Ĝ`            |
/// | `s_beta`     | `[β̄]⁺ Ĝ`            |
/// | `s_beta_i`   | `J_β̄ᵢ Ĝ`            |
/// | `s_lin`      | `Gᵀ ᾱ`              |
/// | `s_beta_chi` | `β̄ᵢ Gᵀ`             |
/// | `gram`       | `GᵀG`               |
/// | `cols`       | `Aᵀ [Ĝⱼ]⁻`, j = 1…9 |
#[derive(Debug, Clone, PartialEq)]
pub struct RecursiveAccumulators {
    pub m: usize,
    pub last_epoch: Option<usize>,
    pub k: Mat4,
    pub s_alpha: Mat4x9,
    pub s_beta: Mat4x9,
    pub s_beta_i: [Mat4x9; 3],
    pub s_lin: Vec9,
    pub s_beta_chi: [Mat9x3; 3],
    pub gram: Mat9,
    pub cols: [Mat4; 9],
}

impl Default for RecursiveAccumulators {
    fn default() -> Self {
        Self {
            m: 0,
            last_epoch: None,
            k: Mat4::zeros(),
            s_alpha: Mat4x9::zeros(),
            s_beta: Mat4x9::zeros(),
            s_beta_i: [Mat4x9::zeros(); 3],
            s_lin: Vec9::zeros(),
            s_beta_chi: [Mat9x3::zeros(); 3],
            gram: Mat9::zeros(),
            cols: [Mat4::zeros(); 9],
        }
    }
}

impl RecursiveAccumulators {
    pub fn new() -> Self {
        Self::default()
    }

    /// Folds in epoch `d`, which must directly follow the previous one.
    pub fn accumulate(&mut self, d: &DiffCoeff) -> Result<()> {
        if let Some(last) = self.last_epoch {
            if d.m != last + 1 {
                return Err(Error::EpochOrder {
                    expected: last + 1,
                    got: d.m,
                });
            }
        }
        let a = attitude_matrix(d);
        let g = d.param_block();
        let g_hat = lifted_param_block(d);
        let alpha = Quaternion::pure(&d.alpha);
        let beta = Quaternion::pure(&d.beta);

        self.k += a.transpose() * a;
        self.s_alpha += alpha.minus_matrix() * g_hat;
        self.s_beta += beta.plus_matrix() * g_hat;
        for (acc, jb) in self.s_beta_i.iter_mut().zip(jbeta_decomp(&d.beta)) {
            *acc += jb * g_hat;
        }
        self.s_lin += g.transpose() * d.alpha;
        for (i, acc) in self.s_beta_chi.iter_mut().enumerate() {
            *acc += g.transpose() * d.beta[i];
        }
        self.gram += g.transpose() * g;
        let at = a.transpose();
        for (j, acc) in self.cols.iter_mut().enumerate() {
            *acc += at * Quaternion(g_hat.column(j).into_owned()).minus_matrix();
        }
        self.m += 1;
        self.last_epoch = Some(d.m);
        Ok(())
    }

    /// `Aᵀ[q]⁺Ĝ` summed, i.e. the matrix whose column `j` is `Cⱼ q`:
    /// `−[q]⁺ S_α + s S_β + Σ ηᵢ S_βᵢ`.
    fn mixed(&self, q: &Quaternion) -> Mat4x9 {
        let eta = q.eta();
        -q.plus_matrix() * self.s_alpha
            + self.s_beta * q.s()
            + self.s_beta_i[0] * eta.x
            + self.s_beta_i[1] * eta.y
            + self.s_beta_i[2] * eta.z
    }

    /// `Σⱼ pⱼ Cⱼ`
    fn weighted_cols(&self, p: &Vec9) -> Mat4 {
        self.cols.iter().zip(p.iter()).map(|(c, pj)| c * *pj).sum()
    }

    /// `(½∇f, ½∇²f)` with `f = Σ πᵀπ`.
    pub fn half_objective_derivatives(&self, x: &Vec13) -> (Vec13, Mat13) {
        let (q, p) = split(x);
        let qv = q.0;
        let qq = q.norm_squared();
        let b = self.mixed(&q);
        let cw = self.weighted_cols(&p);
        let gp = self.gram * p;
        let pgp = p.dot(&gp);

        let mut grad = Vec13::zeros();
        grad.fixed_rows_mut::<4>(0)
            .copy_from(&(self.k * qv + b * p + cw.transpose() * qv + qv * pgp));
        // Ĝᵀ[q]⁺ᵀ A q = |q|² Gᵀᾱ − Ĝᵀ (q* ∘ β̄ ∘ q), expanded with J_qᵢ.
        let jq = jq_terms(&q);
        let mut gp_part = self.s_lin * qq + gp * qq;
        for (s, j) in self.s_beta_chi.iter().zip(jq.iter()) {
            gp_part -= s * j.fixed_rows::<3>(1);
        }
        grad.fixed_rows_mut::<9>(4).copy_from(&gp_part);

        let mut hess = Mat13::zeros();
        let hqq = self.k + cw + cw.transpose() + Mat4::identity() * pgp;
        hess.fixed_view_mut::<4, 4>(0, 0).copy_from(&hqq);
        let mut hqp = b;
        for j in 0..9 {
            let extra = self.cols[j].transpose() * qv + qv * (2.0 * gp[j]);
            let mut col = hqp.column_mut(j);
            col += extra;
        }
        hess.fixed_view_mut::<4, 9>(0, 4).copy_from(&hqp);
        hess.fixed_view_mut::<9, 4>(4, 0).copy_from(&hqp.transpose());
        hess.fixed_view_mut::<9, 9>(4, 4).copy_from(&(self.gram * qq));
        (grad, hess)
    }

    /// `(∇ₓL, ∇²ₓₓL, ∇²ₓμL)` at `(x, μ)`.
    pub fn assemble_grad_hess(&self, x: &Vec13, mu: f64) -> Derivatives {
        let (g, h) = self.half_objective_derivatives(x);
        Derivatives::from_half_objective(x, mu, &g, &h)
    }

    /// `Σ πᵀπ = qᵀKq + 2 qᵀ(Aᵀ[q]⁺Ĝ)p + |q|² pᵀ(GᵀG)p`.
    pub fn objective(&self, x: &Vec13) -> f64 {
        let (q, p) = split(x);
        let qv = q.0;
        qv.dot(&(self.k * qv)) + 2.0 * qv.dot(&(self.mixed(&q) * p)) + q.norm_squared() * p.dot(&(self.gram * p))
    }
}

impl Problem for RecursiveAccumulators {
    fn epochs(&self) -> usize {
        self.m
    }

    fn objective_at(&self, x: &Vec13) -> f64 {
        self.objective(x)
    }

    fn derivatives(&self, x: &Vec13, mu: f64) -> Derivatives {
        self.assemble_grad_hess(x, mu)
    }

    fn attitude_gram(&self) -> Mat4 {
        self.k
    }
}
