//! Baseline functions `ψ(x, y)` and the variance condition
//! `∫(φ(yf) − ψ)² dP ≤ Γ·∫(φ(yf) − ψ) dP`.

use std::fmt;

use serde::Serialize;

use super::dist::{integrate_many, DataDistribution, PointFn, Quadrature};
use super::loss::{entropy_h, logistic_loss, sgn, target_function};
use super::risks::Decision;
use super::RiskError;

/// Which baseline is used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum PsiVariant {
    /// `φ(y log(η/(1−η)))` for `η ∈ [δ₁, 1−δ₁]`, `H(η)` elsewhere, `0` at
    /// `η ∈ {0, 1}`; `δ₁` solves `H(δ₁) = (4/5) log(1/(1−δ₀))`.
    Truncated { delta0: f64, delta1: f64 },
    /// `φ(y F₀ sgn(2η−1))` where `|2η−1| > η₀`, `φ(y log(η/(1−η)))` elsewhere.
    Margin { eta0: f64, f0: f64 },
}

/// A baseline `ψ` attached to a conditional probability function.
#[derive(Clone)]
pub struct PsiFunction {
    pub variant: PsiVariant,
    pub eta: PointFn,
}

impl fmt::Debug for PsiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PsiFunction").field("variant", &self.variant).finish()
    }
}

/// `δ₁ ∈ [δ₀/(10 log(1/δ₀)), δ₀/log(1/δ₀)]` with `H(δ₁) = (4/5) log(1/(1−δ₀))`,
/// found by bisection (`H` is increasing on `(0, 1/2)`).
pub fn truncation_level(delta0: f64) -> f64 {
    let l = (1.0 / delta0).ln();
    let target = 0.8 * (1.0 / (1.0 - delta0)).ln();
    let (mut lo, mut hi) = (delta0 / (10.0 * l), delta0 / l);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if entropy_h(mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

impl PsiFunction {
    /// Truncated baseline for `δ₀ ∈ (0, 1/3)`.
    pub fn truncated(eta: PointFn, delta0: f64) -> Result<Self, RiskError> {
        if !(delta0 > 0.0 && delta0 < 1.0 / 3.0) {
            return Err(RiskError::InvalidParameter(format!("truncated psi needs delta0 in (0, 1/3), got {delta0}")));
        }
        Ok(Self { variant: PsiVariant::Truncated { delta0, delta1: truncation_level(delta0) }, eta })
    }

    /// Margin baseline for `η₀ ∈ (0,1)` and `F₀ ∈ (0, log((1+η₀)/(1−η₀)))`.
    pub fn margin(eta: PointFn, eta0: f64, f0: f64) -> Result<Self, RiskError> {
        if !(eta0 > 0.0 && eta0 < 1.0) || !(f0 > 0.0 && f0 < ((1.0 + eta0) / (1.0 - eta0)).ln()) {
            return Err(RiskError::InvalidParameter(format!("margin psi needs eta0 in (0,1) and F0 in (0, log((1+eta0)/(1-eta0))), got {eta0}, {f0}")));
        }
        Ok(Self { variant: PsiVariant::Margin { eta0, f0 }, eta })
    }

    /// `ψ` as a function of `η(x)` and `y`.
    pub fn value_at(&self, eta: f64, y: f64) -> f64 {
        match self.variant {
            PsiVariant::Truncated { delta1, .. } => {
                if eta <= 0.0 || eta >= 1.0 {
                    0.0
                } else if (delta1..=1.0 - delta1).contains(&eta) {
                    logistic_loss(y * target_function(eta))
                } else {
                    entropy_h(eta)
                }
            }
            PsiVariant::Margin { eta0, f0 } => {
                if (2.0 * eta - 1.0).abs() > eta0 {
                    logistic_loss(y * f0 * sgn(2.0 * eta - 1.0))
                } else {
                    logistic_loss(y * target_function(eta))
                }
            }
        }
    }

    /// `ψ(x, y)`.
    pub fn eval(&self, x: &[f64], y: f64) -> f64 {
        self.value_at((self.eta)(x).clamp(0.0, 1.0), y)
    }

    /// Upper end of the range of `ψ`.
    pub fn upper_bound(&self) -> f64 {
        match self.variant {
            PsiVariant::Truncated { delta0, .. } => (10.0 * (1.0 / delta0).ln() / delta0).ln(),
            PsiVariant::Margin { eta0, .. } => (2.0 / (1.0 - eta0)).ln(),
        }
    }

    /// Bound `F` on admissible decision functions `|f| ≤ F`.
    pub fn admissible_bound(&self) -> f64 {
        match self.variant {
            PsiVariant::Truncated { delta0, .. } => ((1.0 - delta0) / delta0).ln(),
            PsiVariant::Margin { f0, .. } => f0,
        }
    }

    /// Variance constant `Γ`: `125000 |log δ₀|²` or `8/(1−η₀²)`.
    pub fn gamma(&self) -> f64 {
        match self.variant {
            PsiVariant::Truncated { delta0, .. } => 125_000.0 * delta0.ln().powi(2),
            PsiVariant::Margin { eta0, .. } => 8.0 / (1.0 - eta0 * eta0),
        }
    }
}

/// Outcome of [`variance_bound_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VarianceReport {
    pub second_moment: f64,
    pub first_moment: f64,
    pub gamma: f64,
    /// `second_moment / (Γ·first_moment)`, zero when both vanish.
    pub ratio: f64,
    pub slack: f64,
    pub passed: bool,
}

/// Checks the variance condition for `f` (which must satisfy `|f| ≤ F`).
pub fn variance_bound_check(psi: &PsiFunction, f: Decision<'_>, p: &DataDistribution, quad: Quadrature) -> Result<VarianceReport, RiskError> {
    let bound = psi.admissible_bound() * (1.0 + 1e-12);
    let [second, first, worst] = integrate_many(p, quad, |x| {
        let eta = p.eta_at(x);
        let fx = f(x);
        let a = logistic_loss(fx) - psi.value_at(eta, 1.0);
        let b = logistic_loss(-fx) - psi.value_at(eta, -1.0);
        let w = |weight: f64, v: f64| if weight == 0.0 { 0.0 } else { weight * v };
        [w(eta, a * a) + w(1.0 - eta, b * b), w(eta, a) + w(1.0 - eta, b), if fx.abs() > bound { 1.0 } else { 0.0 }]
    });
    if worst.value > 0.0 {
        return Err(RiskError::InvalidParameter(format!("decision function leaves the admissible band |f| <= {}", psi.admissible_bound())));
    }
    let gamma = psi.gamma();
    let lhs = second.value;
    let rhs = gamma * first.value;
    let slack = second.half_width + gamma * first.half_width + 1e-12;
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(VarianceReport { second_moment: lhs, first_moment: first.value, gamma, ratio, slack, passed: lhs <= rhs + slack })
}
