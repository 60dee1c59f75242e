//! φ-risk, misclassification risk and the calibration inequality.

use serde::Serialize;

use super::dist::{integrate_many, DataDistribution, Quadrature};
use super::loss::{conditional_phi_risk, entropy_h, sgn};

/// Decision function on `[0,1]^d`.
pub type Decision<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

/// Risk, Bayes level and excess, each with a quadrature error indicator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RiskReport {
    pub risk: f64,
    pub bayes: f64,
    pub excess: f64,
    /// Error indicator for `excess` (sum of both indicators).
    pub half_width: f64,
}

/// Logistic risk `∫ φ(y f(x)) dP` and its excess over `∫ H(η) dP_X`.
pub fn phi_risk(f: Decision<'_>, p: &DataDistribution, quad: Quadrature) -> RiskReport {
    let [risk, bayes, excess] = integrate_many(p, quad, |x| {
        let eta = p.eta_at(x);
        let r = conditional_phi_risk(eta, f(x));
        let h = entropy_h(eta);
        [r, h, r - h]
    });
    RiskReport { risk: risk.value, bayes: bayes.value, excess: excess.value, half_width: excess.half_width }
}

/// Misclassification risk `P(y ≠ sgn f(x))` and its excess
/// `∫ |2η−1|·1{sgn f ≠ sgn(2η−1)} dP_X`.
pub fn misclass_risk(f: Decision<'_>, p: &DataDistribution, quad: Quadrature) -> RiskReport {
    let [risk, bayes, excess] = integrate_many(p, quad, |x| {
        let eta = p.eta_at(x);
        let s = sgn(f(x));
        let r = if s > 0.0 { 1.0 - eta } else { eta };
        let b = eta.min(1.0 - eta);
        let e = if s != sgn(2.0 * eta - 1.0) { (2.0 * eta - 1.0).abs() } else { 0.0 };
        [r, b, e]
    });
    RiskReport { risk: risk.value, bayes: bayes.value, excess: excess.value, half_width: excess.half_width }
}

/// Outcome of [`calibration_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub excess_misclass: f64,
    pub excess_phi: f64,
    /// `2√2·√(excess_phi)`.
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
}

/// Checks `E(f) ≤ 2√2·(E^φ(f))^{1/2}` up to quadrature slack.
pub fn calibration_check(f: Decision<'_>, p: &DataDistribution, quad: Quadrature) -> CalibrationReport {
    let m = misclass_risk(f, p, quad);
    let phi = phi_risk(f, p, quad);
    let c = 2.0 * 2f64.sqrt();
    let rhs = c * phi.excess.max(0.0).sqrt();
    let slack = m.half_width + c * phi.half_width.sqrt() + 1e-12;
    CalibrationReport { excess_misclass: m.excess, excess_phi: phi.excess, rhs, slack, passed: m.excess <= rhs + slack }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::risk::loss::target_function;

    fn dist(eta: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> DataDistribution {
        DataDistribution::uniform(1, Arc::new(eta))
    }

    #[test]
    fn trivial_risks() {
        let q = Quadrature::Grid { per_axis: 1000 };
        let r = phi_risk(&|_| 0.0, &dist(|_| 0.5), q);
        assert!((r.risk - 2f64.ln()).abs() < 1e-12 && r.excess.abs() < 1e-12);
        let r = phi_risk(&|_| 0.0, &dist(|_| 1.0), q);
        assert!((r.risk - 2f64.ln()).abs() < 1e-12 && r.bayes == 0.0);
        assert!((r.excess - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn truncated_target_has_small_excess() {
        // Oracle: independent fine midpoint sum of η φ(f) + (1−η) φ(−f) − H(η).
        let f = |x: &[f64]| target_function(x[0]).clamp(-3.0, 3.0);
        let r = phi_risk(&f, &dist(|x| x[0]), Quadrature::Grid { per_axis: 10_000 });
        let n = 200_000;
        let oracle: f64 = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) / n as f64;
                conditional_phi_risk(x, f(&[x])) - entropy_h(x)
            })
            .sum::<f64>()
            / n as f64;
        assert!((r.excess - oracle).abs() < 1e-6, "{} vs {oracle}", r.excess);
        assert!(r.excess > 0.0 && r.excess < 0.02, "{}", r.excess);
    }

    #[test]
    fn misclassification_examples() {
        let q = Quadrature::Grid { per_axis: 10_000 };
        let p = dist(|x| x[0]);
        assert_eq!(misclass_risk(&|x| 2.0 * x[0] - 1.0, &p, q).excess, 0.0);
        let r = misclass_risk(&|_| -(2.0 * 0.8 - 1.0), &dist(|_| 0.8), q);
        assert!((r.excess - 0.6).abs() < 1e-12);
        let r = misclass_risk(&|_| 1.0, &p, q);
        assert!((r.excess - 0.25).abs() < 1e-6, "{}", r.excess);
    }

    #[test]
    fn calibration_examples() {
        let q = Quadrature::Grid { per_axis: 1000 };
        let rep = calibration_check(&|x| target_function(x[0]), &dist(|x| x[0]), q);
        assert!(rep.passed && rep.excess_misclass == 0.0);
        // sgn(0) = +1 agrees with the Bayes sign, so f ≡ 0 has no excess error.
        let expected = 2.0 * 2f64.sqrt() * (2f64.ln() - entropy_h(0.9)).sqrt();
        let rep = calibration_check(&|_| 0.0, &dist(|_| 0.9), q);
        assert_eq!(rep.excess_misclass, 0.0);
        assert!((rep.rhs - expected).abs() < 1e-9);
        // An infinitesimally negative f flips the sign: 0.8 ≤ 2√2·√(log 2 − H(0.9)).
        let rep = calibration_check(&|_| -1e-300, &dist(|_| 0.9), q);
        assert!((rep.excess_misclass - 0.8).abs() < 1e-12);
        assert!((rep.rhs - expected).abs() < 1e-9);
        assert!(rep.passed);
    }
}
