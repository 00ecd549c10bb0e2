use alloc::vec::Vec;

use super::{attitude_only_init, solve, Batch, EstimateX, Problem, RecursiveAccumulators, SolverOptions};
use crate::obs::DiffCoeff;
use crate::rotation::Quaternion;
use crate::{Error, Result};

/// Where the derivatives come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Fixed-size accumulators; constant cost per epoch.
    Recursive,
    /// Full history re-evaluated every iteration; cost grows with time.
    Batch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Update interval `T`, s.
    pub interval: f64,
    /// Attitude-only phase length, s.
    pub warmup_s: f64,
    pub solver: SolverOptions,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            interval: 0.02,
            warmup_s: 30.0,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Eigenvector attitude, parameters held at zero.
    Warmup,
    /// Full Newton-Lagrange estimation.
    Joint,
}

/// Estimate and diagnostics after one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochEstimate {
    pub m: usize,
    pub t: f64,
    pub phase: Phase,
    pub estimate: EstimateX,
    pub iterations: usize,
    pub converged: bool,
    /// `Σ πᵀπ` at the estimate.
    pub objective: f64,
    /// Equilibrated KKT condition number of the last iteration, NaN in warm-up.
    pub condition: f64,
}

/// Pull-based epoch estimator: [`feed`](Self::feed) a differenced epoch,
/// then ask for the [`estimate`](Self::estimate).
#[derive(Debug, Clone)]
pub struct JapeEstimator {
    config: EstimatorConfig,
    backend: Backend,
    acc: RecursiveAccumulators,
    history: Vec<DiffCoeff>,
    last_epoch: Option<usize>,
    state: Option<(Phase, EstimateX)>,
}

impl JapeEstimator {
    pub fn new(config: EstimatorConfig, backend: Backend) -> Result<Self> {
        if !(config.interval > 0.0) || !(config.warmup_s >= 0.0) {
            return Err(Error::InvalidConfig(
                "interval must be positive and warm-up non-negative",
            ));
        }
        if config.solver.max_iter == 0 {
            return Err(Error::InvalidConfig("solver needs at least one iteration"));
        }
        Ok(Self {
            config,
            backend,
            acc: RecursiveAccumulators::new(),
            history: Vec::new(),
            last_epoch: None,
            state: None,
        })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn accumulators(&self) -> &RecursiveAccumulators {
        &self.acc
    }

    pub fn epochs(&self) -> usize {
        match self.backend {
            Backend::Recursive => self.acc.m,
            Backend::Batch => self.history.len(),
        }
    }

    pub fn feed(&mut self, d: &DiffCoeff) -> Result<()> {
        match self.backend {
            Backend::Recursive => self.acc.accumulate(d)?,
            Backend::Batch => {
                if let Some(last) = self.last_epoch {
                    if d.m != last + 1 {
                        return Err(Error::EpochOrder {
                            expected: last + 1,
                            got: d.m,
                        });
                    }
                }
                self.history.push(d.clone());
            }
        }
        self.last_epoch = Some(d.m);
        Ok(())
    }

    /// Estimate from every epoch fed so far.
    pub fn estimate(&mut self) -> Result<EpochEstimate> {
        let m = self
            .last_epoch
            .ok_or(Error::InsufficientHistory { needed: 1, have: 0 })?;
        let t = m as f64 * self.config.interval;
        let batch = Batch(&self.history);
        let problem: &dyn Problem = match self.backend {
            Backend::Recursive => &self.acc,
            Backend::Batch => &batch,
        };
        let previous = self.state.map(|(_, x)| x);
        let eigen_start = || -> Result<EstimateX> {
            let mut q = attitude_only_init(&problem.attitude_gram())?;
            if let Some(prev) = previous {
                if q.0.dot(&prev.q.0) < 0.0 {
                    q = Quaternion(-q.0);
                }
            }
            Ok(EstimateX::from_attitude(q))
        };

        let out = if t < self.config.warmup_s {
            let x = eigen_start()?;
            EpochEstimate {
                m,
                t,
                phase: Phase::Warmup,
                estimate: x,
                iterations: 0,
                converged: true,
                objective: problem.objective_at(&x.to_vector()),
                condition: f64::NAN,
            }
        } else {
            let x0 = match self.state {
                Some((Phase::Joint, x)) => x,
                _ => eigen_start()?,
            };
            let sol = solve(problem, &x0, &self.config.solver)?;
            EpochEstimate {
                m,
                t,
                phase: Phase::Joint,
                estimate: sol.estimate,
                iterations: sol.iterations,
                converged: sol.converged,
                objective: sol.objective,
                condition: sol.condition,
            }
        };
        self.state = Some((out.phase, out.estimate));
        Ok(out)
    }

    /// `Σ πᵀπ` over the epochs fed so far, at an arbitrary `x`.
    pub fn objective_at(&self, x: &EstimateX) -> f64 {
        match self.backend {
            Backend::Recursive => self.acc.objective(&x.to_vector()),
            Backend::Batch => Batch(&self.history).objective_at(&x.to_vector()),
        }
    }
}
