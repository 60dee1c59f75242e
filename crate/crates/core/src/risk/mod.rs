//! Logistic and misclassification risks, the baseline functions used in the
//! variance condition, pointwise inequalities and noise/margin estimators.

pub mod boundary;
pub mod dist;
pub mod loss;
pub mod pointwise;
pub mod psi;
pub mod risks;

pub use boundary::{noise_margin_estimators, BoundaryClassifierSpec, CurvePoint, HorizonPiece};
pub use dist::{integrate, integrate_many, DataDistribution, Estimate, Marginal, PointFn, Quadrature};
pub use loss::{conditional_phi_risk, entropy_h, logistic_loss, sgn, target_function};
pub use pointwise::{covering_bound, j_bounds_check, j_function, kl_bernoulli, kl_divergence, sandwich_check, variance_ratio_pointwise, JBoundsReport, SandwichReport, VarianceRatioReport};
pub use psi::{truncation_level, variance_bound_check, PsiFunction, PsiVariant, VarianceReport};
pub use risks::{calibration_check, misclass_risk, phi_risk, CalibrationReport, Decision, RiskReport};

/// Errors raised by risk computations.
#[derive(Debug, thiserror::Error)]
pub enum RiskError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
