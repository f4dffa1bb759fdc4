//! Simulation harness: trajectory generation, lockstep filter runs, Monte
//! Carlo aggregation, linearization-error maps and CSV output.

mod config;
mod linmap;
mod montecarlo;
mod output;
mod rng;
mod stats;
mod trial;

pub use config::{ConfigFile, NoiseFree, SimConfig};
pub use linmap::{linearization_error_map, linearization_errors, linearization_order, LinmapRow, CAP_RADIUS};
pub use montecarlo::{run_monte_carlo, thread_count, MonteCarloResult, TrialFailure};
pub use output::{write_aggregate_csv, write_linmap_csv, write_trial_csv};
pub use rng::GaussianStream;
pub use stats::{exponential_decay_rate, halving_time, loglog_slope, percentile, AggregateRecord, PercentileSeries};
pub use trial::{
    angle_between, generate_trial, halving_starts, noiseless_start, noiseless_trial, reference_omega, run_trial, FilterKind, TrialData, TrialRecord,
    NOISELESS_OFFSET,
};

use thiserror::Error;

use crate::bearing::BearingError;
use crate::eqf::EqfError;
use crate::ekf::EkfError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("trial {trial}: {filter} failed at t = {t:.4}: {message}")]
    Filter { trial: usize, filter: FilterKind, t: f64, message: String },
    #[error("every trial failed; first failure: {0}")]
    AllTrialsFailed(String),
    #[error(transparent)]
    Eqf(#[from] EqfError),
    #[error(transparent)]
    Ekf(#[from] EkfError),
    #[error(transparent)]
    Bearing(#[from] BearingError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("config file: {0}")]
    ConfigParse(#[from] toml::de::Error),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}
