//! Pointwise inequalities, the divergence function `J`, Kullback–Leibler
//! divergences between label distributions and the covering-number bound.

use serde::Serialize;

use super::dist::{integrate, DataDistribution, Estimate, Quadrature};
use super::loss::{entropy_h, logistic_loss};
use super::RiskError;

/// Outcome of [`sandwich_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    pub lower: f64,
    /// `aφ(f) + (1−a)φ(−f) − H(a)`.
    pub middle: f64,
    pub upper: f64,
    /// `|f − log(a/(1−a))|²/8`.
    pub eighth: f64,
    pub passed: bool,
}

fn curvature(z: f64) -> f64 {
    1.0 / (4.0 + 2.0 * z.exp() + 2.0 * (-z).exp())
}

/// Checks `lower ≤ middle ≤ upper ≤ |f − log(a/(1−a))|²/8` where the outer
/// bounds use `1/(4 + 2e^z + 2e^{−z})` over `z ∈ [A, B]`.
pub fn sandwich_check(a: f64, f: f64, big_a: f64, big_b: f64) -> Result<SandwichReport, RiskError> {
    if !(a > 0.0 && a < 1.0) {
        return Err(RiskError::InvalidParameter(format!("sandwich_check needs a in (0,1), got {a}")));
    }
    let t = (a / (1.0 - a)).ln();
    if !(big_a <= f.min(t) && f.max(t) <= big_b) {
        return Err(RiskError::InvalidParameter(format!("sandwich_check needs A <= min(f, logit a) <= max(f, logit a) <= B, got A={big_a}, B={big_b}, f={f}, logit={t}")));
    }
    let sq = (f - t).powi(2);
    let lower = curvature(big_a).min(curvature(big_b)) * sq;
    let upper = curvature(0f64.clamp(big_a, big_b)) * sq;
    let eighth = sq / 8.0;
    let gross = a * logistic_loss(f) + (1.0 - a) * logistic_loss(-f);
    let middle = gross - entropy_h(a);
    let tol = 1e-13 * (1.0 + gross);
    let passed = lower <= middle + tol && middle <= upper + tol && upper <= eighth * (1.0 + 1e-15);
    Ok(SandwichReport { lower, middle, upper, eighth, passed })
}

/// Outcome of [`variance_ratio_pointwise`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VarianceRatioReport {
    pub h: f64,
    pub g: f64,
    /// `5000 |log δ|²`.
    pub gamma: f64,
    pub passed: bool,
}

/// Checks `H(a,f) ≤ Γ·G(a,f)` with
/// `H = a|φ(f) − φ(t)|² + (1−a)|φ(−f) − φ(−t)|²`, `t = log(a/(1−a))`, and
/// `G = aφ(f) + (1−a)φ(−f) − H(a)`.
pub fn variance_ratio_pointwise(a: f64, f: f64, delta: f64) -> Result<VarianceRatioReport, RiskError> {
    if !(delta > 0.0 && delta < 0.5) || !(delta..=1.0 - delta).contains(&a) {
        return Err(RiskError::InvalidParameter(format!("variance_ratio_pointwise needs delta in (0,1/2) and a in [delta, 1-delta], got a={a}, delta={delta}")));
    }
    let band = ((1.0 - delta) / delta).ln();
    if f.abs() > band * (1.0 + 1e-12) {
        return Err(RiskError::InvalidParameter(format!("variance_ratio_pointwise needs |f| <= {band}, got {f}")));
    }
    let t = (a / (1.0 - a)).ln();
    let h = a * (logistic_loss(f) - logistic_loss(t)).powi(2) + (1.0 - a) * (logistic_loss(-f) - logistic_loss(-t)).powi(2);
    let gross = a * logistic_loss(f) + (1.0 - a) * logistic_loss(-f);
    let g = gross - entropy_h(a);
    let gamma = 5000.0 * delta.ln().powi(2);
    let passed = h <= gamma * g + 1e-13 * gamma * (1.0 + gross);
    Ok(VarianceRatioReport { h, g, gamma, passed })
}

/// `J(x, y) = 2H((x+y)/2) − H(x) − H(y)`.
pub fn j_function(x: f64, y: f64) -> f64 {
    2.0 * entropy_h(0.5 * (x + y)) - (entropy_h(x) + entropy_h(y))
}

/// Outcome of [`j_bounds_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JBoundsReport {
    pub eps: f64,
    pub value: f64,
    pub passed: bool,
}

/// Checks `ε/4 < J(ε, 3ε) < ε` for `ε ∈ (0, 1/6]`.
pub fn j_bounds_check(eps: f64) -> Result<JBoundsReport, RiskError> {
    if !(eps > 0.0 && eps <= 1.0 / 6.0) {
        return Err(RiskError::InvalidParameter(format!("j_bounds_check needs eps in (0, 1/6], got {eps}")));
    }
    let value = j_function(eps, 3.0 * eps);
    Ok(JBoundsReport { eps, value, passed: eps / 4.0 < value && value < eps })
}

/// Pointwise `a log(a/b) + (1−a) log((1−a)/(1−b))` with `0 log 0 = 0`.
pub fn kl_bernoulli(a: f64, b: f64) -> f64 {
    let term = |p: f64, q: f64| if p == 0.0 { 0.0 } else { p * (p / q).ln() };
    term(a, b) + term(1.0 - a, 1.0 - b)
}

/// `KL(P_{η₁,Q} ‖ P_{η₂,Q}) = ∫ kl_bernoulli(η₁, η₂) dQ`, with `Q` the
/// marginal of `p1`. `η₂` must take values in `(0, 1)`.
pub fn kl_divergence(p1: &DataDistribution, eta2: &(dyn Fn(&[f64]) -> f64 + Sync), quad: Quadrature) -> Estimate {
    integrate(p1, quad, |x| kl_bernoulli(p1.eta_at(x), eta2(x)))
}

/// `(S + Gd + 1)(2G + 5)·log((max{N, d} + 1)(B ∨ 1)(2G + 2)/γ)`.
pub fn covering_bound(g: f64, n: f64, s: f64, b: f64, gamma: f64, d: usize) -> Result<f64, RiskError> {
    if !(g >= 1.0) || !(gamma > 0.0 && gamma < 1.0) || n < 0.0 || s < 0.0 || b < 0.0 {
        return Err(RiskError::InvalidParameter(format!("covering_bound needs G >= 1, gamma in (0,1), N,S,B >= 0; got G={g}, gamma={gamma}")));
    }
    let df = d as f64;
    Ok((s + g * df + 1.0) * (2.0 * g + 5.0) * ((n.max(df) + 1.0) * b.max(1.0) * (2.0 * g + 2.0) / gamma).ln())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    #[test]
    fn sandwich_examples() {
        let a: f64 = 0.3;
        let t = (a / (1.0 - a)).ln();
        let r = sandwich_check(a, t, -1.0, 1.0).unwrap();
        assert!(r.passed && r.middle.abs() < 1e-15 && r.upper == 0.0);
        // Direct evaluation for a = 1/2, f = 1.
        let r = sandwich_check(0.5, 1.0, -1.0, 1.0).unwrap();
        let middle = 0.5 * (logistic_loss(1.0) + logistic_loss(-1.0)) - 2f64.ln();
        assert!((r.middle - middle).abs() < 1e-15);
        assert!((r.lower - curvature(1.0)).abs() < 1e-15 && (r.upper - 0.125).abs() < 1e-15);
        assert!(r.passed);
        assert!(sandwich_check(0.5, 2.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn sandwich_sweep() {
        for i in 1..=9 {
            let a = i as f64 / 10.0;
            let t = (a / (1.0 - a)).ln();
            for j in 0..=80 {
                let f = -2.0 + j as f64 / 20.0;
                let r = sandwich_check(a, f, f.min(t), f.max(t)).unwrap();
                assert!(r.passed, "a={a} f={f}: {r:?}");
            }
        }
    }

    #[test]
    fn variance_ratio_examples() {
        let delta: f64 = 0.05;
        let a = 0.3;
        let r = variance_ratio_pointwise(a, (a / (1.0 - a)).ln(), delta).unwrap();
        assert!(r.passed && r.h < 1e-25);
        let band = ((1.0 - delta) / delta).ln();
        let r = variance_ratio_pointwise(delta, band, delta).unwrap();
        assert!(r.passed && r.h > 0.0, "{r:?}");
        for i in 0..=45 {
            let a = (delta + (1.0 - 2.0 * delta) * i as f64 / 45.0).min(1.0 - delta);
            for j in 0..=40 {
                let f = -band + 2.0 * band * j as f64 / 40.0;
                assert!(variance_ratio_pointwise(a, f, delta).unwrap().passed);
            }
        }
        assert!(variance_ratio_pointwise(0.01, 0.0, delta).is_err());
    }

    #[test]
    fn j_examples() {
        assert_eq!(j_function(0.3, 0.3), 0.0);
        let r = j_bounds_check(0.1).unwrap();
        assert!(r.passed && r.value > 0.025 && r.value < 0.1);
        let direct = 2.0 * entropy_h(0.3) - entropy_h(0.2) - entropy_h(0.4);
        assert!((j_function(0.2, 0.4) - direct).abs() < 1e-15);
        assert!((j_function(0.2, 0.4) - j_function(0.4, 0.2)).abs() < 1e-15);
    }

    #[test]
    fn kl_examples() {
        let q = Quadrature::Grid { per_axis: 4000 };
        let eps = 0.1;
        let p = DataDistribution::uniform(1, Arc::new(move |_: &[f64]| eps));
        assert_eq!(kl_divergence(&p, &|_| eps, q).value, 0.0);
        let v = kl_divergence(&p, &|_| 3.0 * eps, q).value;
        assert!(v >= 0.0 && v <= 9.0 * eps);
        assert!((v - kl_bernoulli(0.1, 0.3)).abs() < 1e-12);
        // η₁(x) = ε(1 + 2x) against η₂ ≡ 2ε; oracle by a finer independent sum.
        let p = DataDistribution::uniform(1, Arc::new(move |x: &[f64]| eps * (1.0 + 2.0 * x[0])));
        let v = kl_divergence(&p, &|_| 2.0 * eps, q).value;
        let n = 100_000;
        let oracle: f64 = (0..n).map(|i| kl_bernoulli(eps * (1.0 + 2.0 * (i as f64 + 0.5) / n as f64), 2.0 * eps)).sum::<f64>() / n as f64;
        assert!((v - oracle).abs() < 1e-8, "{v} vs {oracle}");
    }

    #[test]
    fn covering_examples() {
        let v = covering_bound(2.0, 4.0, 10.0, 1.0, 0.1, 2).unwrap();
        assert!((v - 135.0 * 300f64.ln()).abs() < 1e-9);
        assert!((v - 770.04).abs() < 0.05, "{v}");
        assert_eq!(covering_bound(2.0, 4.0, 10.0, 0.5, 0.1, 2).unwrap(), v);
        assert!(covering_bound(0.5, 4.0, 10.0, 1.0, 0.1, 2).is_err());
    }
}
