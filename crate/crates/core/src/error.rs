use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("position too close to a pole (|cos L| = {cos_lat:e})")]
    PolarSingularity { cos_lat: f64 },
    #[error("quaternion is not unit: |q|^2 - 1 = {deviation:e}")]
    NotUnit { deviation: f64 },
    #[error("matrix is not a proper rotation (orthogonality residual {residual:e}, det {det})")]
    NotRotation { residual: f64, det: f64 },
    #[error("GNSS fix spacing {spacing} s does not match the update interval {expected} s")]
    GapDetected { spacing: f64, expected: f64 },
    #[error("need {needed} epochs of history, have {have}")]
    InsufficientHistory { needed: usize, have: usize },
    #[error("attitude unobservable: two smallest eigenvalues differ by {gap:e}")]
    DegenerateSpectrum { gap: f64 },
    #[error("KKT system is singular (condition estimate {condition:e})")]
    SingularKkt { condition: f64 },
    #[error("no convergence after {iterations} iterations (last step {last_step:e})")]
    NoConvergence { iterations: usize, last_step: f64 },
    #[error("epoch {got} fed out of order, expected {expected}")]
    EpochOrder { expected: usize, got: usize },
    #[error("IMU increment at t = {got} s is not contiguous with filter time {expected} s")]
    TimeGap { expected: f64, got: f64 },
    #[error("innovation rejected: normalized squared innovation {nis} exceeds gate {gate}")]
    InnovationOutlier { nis: f64, gate: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}
