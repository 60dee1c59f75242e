//! Network surrogate of the truncated log-odds `log(η/(1−η))`.

use super::{clip_net, log_approx, ConstructionError, LogApproxReport};
use crate::matrix::Matrix;
use crate::net::ReluNet;
use crate::Net;

/// Result of [`truncated_target_net`].
#[derive(Clone, Debug)]
pub struct TruncatedTarget {
    /// `x ↦ l̃(Π_δ(η̃(x))) − l̃(1 − Π_δ(η̃(x)))`.
    pub net: Net,
    pub delta: f64,
    /// Hölder exponent used for the inner logarithm approximant.
    pub alpha: f64,
    /// Report of the logarithm network `l̃` on `[δ, 1−δ]`.
    pub log_report: LogApproxReport,
    /// `log((1−δ)/δ)`, the bound on `|f̃|`.
    pub output_bound: f64,
}

/// Builds `f̃ = l̃∘Π_δ∘η̃ − l̃∘(1 − Π_δ∘η̃)` where `Π_δ` clamps to `[δ, 1−δ]`
/// and `l̃ = log_approx(δ, 1−δ, alpha, δ)`. The caller picks `alpha`
/// (typically `2β/d_*`).
pub fn truncated_target_net(eta_net: &Net, delta: f64, alpha: f64) -> Result<TruncatedTarget, ConstructionError> {
    if eta_net.output_dim() != 1 {
        return Err(ConstructionError::InvalidParameter(format!(
            "truncated_target_net needs a scalar network, got output dimension {}",
            eta_net.output_dim()
        )));
    }
    if !(delta > 0.0 && delta < 1.0 / 3.0) {
        return Err(ConstructionError::InvalidParameter(format!("truncated_target_net needs delta in (0, 1/3), got {delta}")));
    }
    let (log_net, log_report) = log_approx(delta, 1.0 - delta, alpha, delta)?;
    let flipped = log_net.precompose_affine(&Matrix::from_vec(1, 1, vec![-1.0]).expect("1x1"), &[1.0])?;
    let both = ReluNet::parallel(&[log_net, flipped])?;
    let diff = both.map_output(&Matrix::from_vec(1, 2, vec![1.0, -1.0]).expect("1x2"))?;
    let clamped = ReluNet::compose(&clip_net(delta, 1.0 - delta)?, eta_net)?;
    let net = ReluNet::compose(&diff, &clamped)?;
    Ok(TruncatedTarget { net, delta, alpha, log_report, output_bound: ((1.0 - delta) / delta).ln() })
}
