//! Constructive ingredients of the minimax lower bounds: mollifier bump
//! grids, binary codes, the hypothesis family and its certificates.

pub mod bump;
pub mod code;
pub mod family;
pub mod mollifier;

use thiserror::Error;

pub use bump::{bump_grid_build, holder_norm_estimate, BumpGrid};
pub use code::{vg_code, BinaryCode};
pub use family::{hypothesis_family, q_for_n, separation_certificate, FamilyParams, HypothesisFamily, PairSeparation, SeparationReport};
pub use mollifier::{adaptive_simpson, holder_norm_overestimate, kappa, mollifier_u};

/// Errors raised by the lower-bound constructions.
#[derive(Debug, Error)]
pub enum LowerBoundError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
