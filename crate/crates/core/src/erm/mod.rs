//! Sampling, exact finite-class ERM, approximate network ERM, Monte Carlo
//! checks of the oracle inequality and convergence-rate experiments.

pub mod finite;
pub mod oracle;
pub mod rate;
pub mod sample;
pub mod train;

pub use finite::erm_finite;
pub use oracle::{canonical_oracle_configs, covering_number_bruteforce, oracle_mc, oracle_rhs, sup_distances, NamedFn, OracleReport, OracleStudyConfig};
pub use rate::{fit_slope, rate_experiment, RateConfig, RateFamily, RatePoint, RateReplication, RateReport, Schedule};
pub use sample::{sample, Sample};
pub use train::{erm_train, TrainConfig, TrainReport};

use crate::constructions::ConstructionError;
use crate::net::NetError;
use crate::risk::RiskError;

/// Errors raised by sampling, training and experiments.
#[derive(Debug, thiserror::Error)]
pub enum ErmError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("training diverged: {0}")]
    Diverged(String),
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}
