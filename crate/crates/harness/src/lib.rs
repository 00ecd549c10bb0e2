//! Scenario configuration, Monte Carlo campaigns and report files for the
//! joint attitude and parameter estimators in `jape-core`.
//!
//! A run simulates one trajectory, builds the observation coefficients epoch
//! by epoch and feeds the recursive estimator, the batch estimator and the
//! error-state EKF baseline, recording their errors against truth. Campaigns
//! repeat runs with independent noise and reduce them to mean ± 1σ tables.

// `!(x > y)` comparisons deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaign;
pub mod config;
pub mod report;
pub mod run;

pub use campaign::{
    monte_carlo, summarize, Campaign, CampaignSummary, EstimatorSummary, Stat, WarmupSummary, SCHEMA_VERSION,
};
pub use config::{EstimatorChoice, ScenarioConfig, DEFAULT_CONFIG};
pub use report::{emit_report, render_report, render_table, write_simulation};
pub use run::{crosscheck, run_scenario, simulate, CrosscheckReport, EpochRecord, Estimator, RunReport, Track};

use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("run {run}: {source}")]
    Run {
        run: usize,
        #[source]
        source: jape_core::Error,
    },
    #[error("run {run}: {estimator} produced no estimate")]
    NoEstimate { run: usize, estimator: &'static str },
    #[error("configuration: {0}")]
    Config(String),
    #[error("campaign has no runs")]
    EmptyCampaign,
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn run(run: usize, source: jape_core::Error) -> Self {
        HarnessError::Run { run, source }
    }
}

impl From<jape_core::Error> for HarnessError {
    fn from(e: jape_core::Error) -> Self {
        HarnessError::Config(e.to_string())
    }
}
