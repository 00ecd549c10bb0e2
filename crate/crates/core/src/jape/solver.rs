use alloc::vec::Vec;

use nalgebra::{SMatrix, SVector};

use super::{Batch, Derivatives, EstimateX, Problem};
use crate::obs::DiffCoeff;
use crate::{Error, Result, Vec13};

/// KKT systems with a larger (equilibrated) condition number are rejected.
pub const KKT_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Stop once `‖Δx‖∞` falls below this.
    pub tolerance: f64,
    /// Halve steps that increase `Σπᵀπ + ρ(qᵀq − 1)²`, at most four times.
    pub step_guard: bool,
    /// Keep `b_a, b_g, l` frozen and solve for `q` and `μ` only.
    pub attitude_only: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 5,
            tolerance: 1e-12,
            step_guard: false,
            attitude_only: false,
        }
    }
}

const GUARD_SLACK: f64 = 1e-10;

/// One Newton-Lagrange update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub dx: Vec13,
    pub dmu: f64,
    /// 2-norm condition number of the equilibrated KKT matrix.
    pub condition: f64,
}

macro_rules! equilibrated_solver {
    ($name:ident, $n:literal) => {
        /// Solves `A y = b` for a symmetric `A` after symmetric max-norm
        /// equilibration, returning `y` and the equilibrated condition number.
        fn $name(a: &SMatrix<f64, $n, $n>, b: &SVector<f64, $n>) -> Result<(SVector<f64, $n>, f64)> {
            let mut scale = SVector::<f64, $n>::zeros();
            for i in 0..$n {
                let row_max = a.row(i).amax();
                if !(row_max > 0.0) || !row_max.is_finite() {
                    return Err(Error::SingularKkt {
                        condition: f64::INFINITY,
                    });
                }
                scale[i] = 1.0 / row_max.sqrt();
            }
            let scaled = SMatrix::<f64, $n, $n>::from_fn(|i, j| a[(i, j)] * scale[i] * scale[j]);
            let svd = scaled.svd(true, true);
            let sv = &svd.singular_values;
            let (hi, lo) = (sv.max(), sv.min());
            let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
            if !(condition < KKT_CONDITION_LIMIT) {
                return Err(Error::SingularKkt { condition });
            }
            let rhs = b.component_mul(&scale);
            let y = svd
                .solve(&rhs, 0.0)
                .map_err(|_| Error::SingularKkt { condition })?;
            Ok((y.component_mul(&scale), condition))
        }
    };
}

equilibrated_solver!(solve_equilibrated_5, 5);
equilibrated_solver!(solve_equilibrated_14, 14);

/// Solves
///
/// ```text
/// [ ∇²ₓₓL    ∇²ₓμL ] [Δx]     [ ∇ₓL     ]
/// [ −∇²ₓμLᵀ  0     ] [Δμ] = − [ qᵀq − 1 ]
/// ```
///
/// The constraint row is negated first so the matrix is symmetric; the
/// solution is unchanged. With `attitude_only` the parameter rows and
/// columns are dropped and their step is zero.
pub fn newton_lagrange_step(x: &Vec13, d: &Derivatives, attitude_only: bool) -> Result<Step> {
    let q = x.fixed_rows::<4>(0);
    let constraint = q.dot(&q) - 1.0;
    if attitude_only {
        let mut a = SMatrix::<f64, 5, 5>::zeros();
        a.fixed_view_mut::<4, 4>(0, 0)
            .copy_from(&d.hess.fixed_view::<4, 4>(0, 0));
        a.fixed_view_mut::<4, 1>(0, 4).copy_from(&d.grad_mu.fixed_rows::<4>(0));
        a.fixed_view_mut::<1, 4>(4, 0)
            .copy_from(&d.grad_mu.fixed_rows::<4>(0).transpose());
        let mut b = SVector::<f64, 5>::zeros();
        b.fixed_rows_mut::<4>(0).copy_from(&(-d.grad.fixed_rows::<4>(0)));
        b[4] = constraint;
        let (y, condition) = solve_equilibrated_5(&a, &b)?;
        let mut dx = Vec13::zeros();
        dx.fixed_rows_mut::<4>(0).copy_from(&y.fixed_rows::<4>(0));
        return Ok(Step {
            dx,
            dmu: y[4],
            condition,
        });
    }
    let mut a = SMatrix::<f64, 14, 14>::zeros();
    a.fixed_view_mut::<13, 13>(0, 0).copy_from(&d.hess);
    a.fixed_view_mut::<13, 1>(0, 13).copy_from(&d.grad_mu);
    a.fixed_view_mut::<1, 13>(13, 0).copy_from(&d.grad_mu.transpose());
    let mut b = SVector::<f64, 14>::zeros();
    b.fixed_rows_mut::<13>(0).copy_from(&(-d.grad));
    b[13] = constraint;
    let (y, condition) = solve_equilibrated_14(&a, &b)?;
    Ok(Step {
        dx: y.fixed_rows::<13>(0).into_owned(),
        dmu: y[13],
        condition,
    })
}

/// Result of a Newton-Lagrange solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Final iterate with `q` renormalized.
    pub estimate: EstimateX,
    pub iterations: usize,
    pub converged: bool,
    /// `‖Δx‖∞` of every iteration taken.
    pub steps: Vec<f64>,
    pub condition: f64,
    /// `Σ πᵀπ` at `estimate`.
    pub objective: f64,
}

impl Solution {
    /// The estimate, or `NoConvergence` if the tolerance was not reached.
    pub fn require_converged(&self) -> Result<EstimateX> {
        if self.converged {
            Ok(self.estimate)
        } else {
            Err(Error::NoConvergence {
                iterations: self.iterations,
                last_step: self.steps.last().copied().unwrap_or(f64::NAN),
            })
        }
    }
}

fn merit<P: Problem + ?Sized>(problem: &P, x: &Vec13, rho: f64) -> f64 {
    let c = x.fixed_rows::<4>(0).norm_squared() - 1.0;
    problem.objective_at(x) + rho * c * c
}

/// Newton-Lagrange iterations from `x0` (including its `μ`).
pub fn solve<P: Problem + ?Sized>(problem: &P, x0: &EstimateX, opts: &SolverOptions) -> Result<Solution> {
    let mut x = x0.to_vector();
    let mut mu = x0.mu;
    let mut steps = Vec::with_capacity(opts.max_iter);
    let mut condition = f64::NAN;
    let mut converged = false;
    let rho = problem.objective_at(&x).max(1.0);
    for _ in 0..opts.max_iter {
        let d = problem.derivatives(&x, mu);
        let step = newton_lagrange_step(&x, &d, opts.attitude_only)?;
        condition = step.condition;
        let mut t = 1.0;
        if opts.step_guard {
            // Slack for round-off in the accumulated quadratic forms.
            let base = merit(problem, &x, rho);
            let limit = base + GUARD_SLACK * base.abs();
            for _ in 0..4 {
                if merit(problem, &(x + step.dx * t), rho) <= limit {
                    break;
                }
                t *= 0.5;
            }
        }
        x += step.dx * t;
        mu += step.dmu * t;
        let size = (step.dx * t).amax();
        steps.push(size);
        if !size.is_finite() {
            break;
        }
        if size < opts.tolerance {
            converged = true;
            break;
        }
    }
    let q_norm = x.fixed_rows::<4>(0).norm();
    let mut out = x;
    out.fixed_rows_mut::<4>(0).unscale_mut(q_norm);
    Ok(Solution {
        estimate: EstimateX::from_vector(&out, mu),
        iterations: steps.len(),
        converged,
        steps,
        condition,
        objective: problem.objective_at(&out),
    })
}

/// Batch solve over the full history of differenced epochs.
pub fn ba_jape(epochs: &[DiffCoeff], x0: &EstimateX, opts: &SolverOptions) -> Result<Solution> {
    solve(&Batch(epochs), x0, opts)
}
