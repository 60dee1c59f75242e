//! Logistic loss, log-odds target and binary entropy.

/// `φ(t) = log(1 + e^{−t})`, stable for large `|t|`; `φ(+∞) = 0`, `φ(−∞) = +∞`.
pub fn logistic_loss(t: f64) -> f64 {
    if t == f64::INFINITY {
        return 0.0;
    }
    if t == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    (-t).max(0.0) + (-t.abs()).exp().ln_1p()
}

/// `log(η/(1−η))` with `−∞` at `η = 0` and `+∞` at `η = 1`.
pub fn target_function(eta: f64) -> f64 {
    if eta <= 0.0 {
        f64::NEG_INFINITY
    } else if eta >= 1.0 {
        f64::INFINITY
    } else {
        (eta / (1.0 - eta)).ln()
    }
}

/// `sgn(t)` with the convention `sgn(0) = 1`.
pub fn sgn(t: f64) -> f64 {
    if t >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// `t log(1/t)` with `0 log(1/0) = 0`.
fn xlog_inv(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        -t * t.ln()
    }
}

/// Binary entropy `H(t) = t log(1/t) + (1−t) log(1/(1−t))`, zero at 0 and 1.
pub fn entropy_h(t: f64) -> f64 {
    xlog_inv(t) + xlog_inv(1.0 - t)
}

/// Conditional φ-risk `η φ(f) + (1−η) φ(−f)` with `0·∞ = 0`.
pub fn conditional_phi_risk(eta: f64, f: f64) -> f64 {
    let term = |w: f64, loss: f64| if w == 0.0 { 0.0 } else { w * loss };
    term(eta, logistic_loss(f)) + term(1.0 - eta, logistic_loss(-f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_values() {
        assert!((logistic_loss(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!(logistic_loss(50.0) < 1e-20);
        assert!((logistic_loss(-50.0) - 50.0).abs() < 1e-12);
        assert!(logistic_loss(1000.0).is_finite() && logistic_loss(-1000.0) == 1000.0);
        assert_eq!(logistic_loss(f64::INFINITY), 0.0);
    }

    #[test]
    fn target_values() {
        assert_eq!(target_function(0.5), 0.0);
        assert!((target_function(0.9) - 9f64.ln()).abs() < 1e-14);
        assert_eq!(target_function(1.0), f64::INFINITY);
        assert_eq!(target_function(0.0), f64::NEG_INFINITY);
        assert_eq!(sgn(0.0), 1.0);
    }

    #[test]
    fn entropy_values() {
        assert!((entropy_h(0.5) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(entropy_h(0.0), 0.0);
        assert_eq!(entropy_h(1.0), 0.0);
        let direct = 0.1 * 10f64.ln() + 0.9 * (10.0f64 / 9.0).ln();
        assert!((entropy_h(0.1) - direct).abs() < 1e-15);
        assert!((entropy_h(0.3) - entropy_h(0.7)).abs() < 1e-15);
    }

    #[test]
    fn conditional_risk_at_target_is_entropy() {
        for &eta in &[0.0, 0.1, 0.5, 0.77, 1.0] {
            assert!((conditional_phi_risk(eta, target_function(eta)) - entropy_h(eta)).abs() < 1e-14);
        }
    }
}
