//! Approximate multiplication on `[0,1]²` with an exact zero boundary.
//!
//! Uses `xy = u² − w²` with `u = (x+y)/2` and `w = |x−y|/2`. Each square is
//! the sawtooth interpolant `f_m(z) = z − Σ_{s=1}^m g_s(z)/4^s`, where `g_s`
//! is the `s`-fold tooth map; `0 ≤ f_m(z) − z² ≤ 2^{−2m−2}` on `[0,1]`.
//! With `R_s = g_s/4^s` the recursion
//! `R_{s+1} = σ(R_s/2) − σ(R_s − 2^{−1−2s})` keeps every parameter in
//! `[−1, 1]`. The two squaring chains use identical rows, so when either
//! input is zero they produce bitwise identical values and the difference
//! is exactly zero.

use super::ConstructionError;
use crate::matrix::Matrix;
use crate::net::{ComplexityBudget, Layer, ReluNet};
use crate::Net;

/// Smallest `m ≥ 1` with `2^{−2m−2} ≤ eps`.
pub fn mult_sawtooth_levels(eps: f64) -> u32 {
    let mut m = 1;
    while 2f64.powi(-2 * m as i32 - 2) > eps {
        m += 1;
    }
    m
}

/// Network `M` with `|M(t,t') − t·t'| ≤ eps` and `M(t,t') ∈ [0,1]` for
/// `t, t' ∈ [0,1]`, and `M(t,0) = M(0,t') = 0` exactly.
pub fn mult_net(eps: f64) -> Result<Net, ConstructionError> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(ConstructionError::InvalidParameter(format!("mult_net needs eps in (0, 1/2], got {eps}")));
    }
    let m = mult_sawtooth_levels(eps);
    let mut layers = Vec::new();

    // u = σ(x/2 + y/2), w1 = σ(x/2 − y/2), w2 = σ(y/2 − x/2).
    let w0 = Matrix::from_rows(2, vec![vec![0.5, 0.5], vec![0.5, -0.5], vec![-0.5, 0.5]]).expect("3x2");
    layers.push(Layer::unshifted(w0));

    // First chain level for z_a = u and z_b = w1 + w2: t1 = σ(z/2), t2 = σ(z − 1/2), c = σ(z).
    let w1 = Matrix::from_rows(
        3,
        vec![
            vec![0.5, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.5, 0.5],
            vec![0.0, 1.0, 1.0],
            vec![0.0, 1.0, 1.0],
        ],
    )
    .expect("6x3");
    layers.push(Layer::new(w1, vec![0.0, 0.5, 0.0, 0.0, 0.5, 0.0]));

    // Level s → s+1 on each chain: t1' = σ(t1/2 − t2/2), t2' = σ(t1 − t2 − 2^{−1−2s}), c' = σ(c − t1 + t2).
    for s in 1..m {
        let mut w = Matrix::zeros(6, 6);
        let mut v = vec![0.0; 6];
        for chain in 0..2 {
            let o = 3 * chain;
            w.set(o, o, 0.5);
            w.set(o, o + 1, -0.5);
            w.set(o + 1, o, 1.0);
            w.set(o + 1, o + 1, -1.0);
            v[o + 1] = 2f64.powi(-1 - 2 * s as i32);
            w.set(o + 2, o, -1.0);
            w.set(o + 2, o + 1, 1.0);
            w.set(o + 2, o + 2, 1.0);
        }
        layers.push(Layer::new(w, v));
    }

    // A = σ(f_m(z_a)), B = σ(f_m(z_b)) with f_m = c − t1 + t2.
    let ab = Matrix::from_rows(6, vec![vec![-1.0, 1.0, 1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, -1.0, 1.0, 1.0]])
        .expect("2x6");
    layers.push(Layer::unshifted(ab));

    // Clamp A − B to [0, 1]: σ(A − B) − σ(A − B − 1).
    let clamp = Matrix::from_rows(2, vec![vec![1.0, -1.0], vec![1.0, -1.0]]).expect("2x2");
    layers.push(Layer::new(clamp, vec![0.0, 1.0]));

    let out = Matrix::from_vec(1, 2, vec![1.0, -1.0]).expect("1x2");
    Ok(ReluNet::new(2, layers, out)?)
}

/// Budget `(15 ln(1/ε), 6, 900 ln(1/ε), 1, 1)`.
pub fn mult_budget(eps: f64) -> ComplexityBudget {
    let l = (1.0 / eps).ln();
    ComplexityBudget::new(15.0 * l, 6.0, 900.0 * l, 1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct evaluation of the sawtooth square, independent of the network.
    fn sawtooth_square(z: f64, m: u32) -> f64 {
        let tooth = |x: f64| if x < 0.5 { 2.0 * x } else { 2.0 * (1.0 - x) };
        let mut g = z;
        let mut acc = z;
        for s in 1..=m {
            g = tooth(g);
            acc -= g / 4f64.powi(s as i32);
        }
        acc
    }

    #[test]
    fn levels_match_error_target() {
        assert_eq!(mult_sawtooth_levels(0.5), 1);
        assert_eq!(mult_sawtooth_levels(1.0 / 16.0), 1);
        assert_eq!(mult_sawtooth_levels(1.0 / 17.0), 2);
        assert_eq!(mult_sawtooth_levels(2f64.powi(-10)), 4);
    }

    #[test]
    fn matches_independent_sawtooth_formula() {
        let eps = 2f64.powi(-10);
        let m = mult_sawtooth_levels(eps);
        let net = mult_net(eps).unwrap();
        for i in 0..=40 {
            for j in 0..=40 {
                let (x, y) = (i as f64 / 40.0, j as f64 / 40.0);
                let oracle = (sawtooth_square((x + y) / 2.0, m) - sawtooth_square((x - y).abs() / 2.0, m)).clamp(0.0, 1.0);
                let got = net.evaluate(&[x, y]).unwrap()[0];
                assert!((got - oracle).abs() < 1e-12, "({x},{y}): {got} vs {oracle}");
            }
        }
    }

    #[test]
    fn zero_boundary_and_endpoints() {
        let net = mult_net(0.01).unwrap();
        assert_eq!(net.evaluate(&[0.5, 0.0]).unwrap()[0], 0.0);
        assert_eq!(net.evaluate(&[0.0, 0.3]).unwrap()[0], 0.0);
        assert!((net.evaluate(&[1.0, 1.0]).unwrap()[0] - 1.0).abs() <= 0.01);
        assert!(mult_net(0.0).is_err());
        assert!(mult_net(0.6).is_err());
    }

    #[test]
    fn grid_error_at_two_to_minus_ten() {
        let eps = 2f64.powi(-10);
        let net = mult_net(eps).unwrap();
        assert!((net.evaluate(&[0.5, 0.5]).unwrap()[0] - 0.25).abs() <= eps);
        let mut worst: f64 = 0.0;
        for i in 0..=512 {
            for j in 0..=512 {
                let (x, y) = (i as f64 / 512.0, j as f64 / 512.0);
                let v = net.evaluate(&[x, y]).unwrap()[0];
                assert!((0.0..=1.0).contains(&v));
                worst = worst.max((v - x * y).abs());
            }
        }
        assert!(worst <= eps, "{worst}");
    }

    #[test]
    fn budget_holds() {
        for &eps in &[0.5, 0.1, 0.01, 1e-4, 1e-8] {
            let net = mult_net(eps).unwrap();
            assert!(net.is_member(&mult_budget(eps), 65), "eps = {eps}: {:?}", net.complexity());
        }
    }
}
