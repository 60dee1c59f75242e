//! Partition-of-unity functions `f̃_k` on the dyadic intervals
//! `J_k = [1/(3·2^k), 1/2^k]`.
//!
//! `f̃_0` ramps from 0 at 1/3 to 1 at 1/2 and stays 1 beyond. For `k ≥ 1`,
//! `f̃_k` rises with slope `6·2^k` on `[1/(3·2^k), 1/2^{k+1}]`, equals 1 on
//! `[1/2^{k+1}, 1/(3·2^{k−1})]` and falls with slope `−3·2^k` to 0 at `1/2^k`.
//! Together `Σ_{k=0}^I f̃_k = 1` on `[1/2^{I+1}, 1]`.

use super::{scale_pos_net, ConstructionError};
use crate::matrix::Matrix;
use crate::net::{ComplexityBudget, Layer, ReluNet};
use crate::Net;

/// `(coefficient, breakpoint)` pairs with `f̃_k(x) = Σ c·σ(x − s)`.
fn terms(k: u32) -> Vec<(f64, f64)> {
    if k == 0 {
        return vec![(6.0, 1.0 / 3.0), (-6.0, 0.5)];
    }
    let p = 2f64.powi(k as i32);
    vec![(6.0 * p, 1.0 / (3.0 * p)), (-6.0 * p, 0.5 / p), (-3.0 * p, 2.0 / (3.0 * p)), (3.0 * p, 1.0 / p)]
}

/// Exact value of `f̃_k(x)` from its piecewise definition.
pub fn hat_value(k: u32, x: f64) -> f64 {
    if k == 0 {
        return (6.0 * (x - 1.0 / 3.0)).clamp(0.0, 1.0);
    }
    let p = 2f64.powi(k as i32);
    let (a, b, c, e) = (1.0 / (3.0 * p), 0.5 / p, 2.0 / (3.0 * p), 1.0 / p);
    if x <= a || x >= e {
        0.0
    } else if x < b {
        6.0 * p * (x - a)
    } else if x <= c {
        1.0
    } else {
        3.0 * p * (e - x)
    }
}

/// Network for `f̃_k`, `0 ≤ k ≤ I`. Each breakpoint unit `σ(x − s)` is
/// magnified by `scale_pos_net(I+3)` so the output coefficients
/// `c/2^{I+3}` stay in `[−1, 1]`.
pub fn hat_net(k: u32, i_max: u32) -> Result<Net, ConstructionError> {
    if i_max == 0 || k > i_max {
        return Err(ConstructionError::InvalidParameter(format!("hat_net needs 0 <= k <= I and I >= 1, got k={k}, I={i_max}")));
    }
    let ts = terms(k);
    let n = ts.len();
    let breakpoints = ReluNet::new(
        1,
        vec![Layer::new(Matrix::from_vec(n, 1, vec![1.0; n]).expect("nx1"), ts.iter().map(|t| t.1).collect())],
        Matrix::identity(n),
    )?;
    let scale = scale_pos_net(i_max + 3)?;
    let branches = (0..n)
        .map(|i| ReluNet::compose(&scale, &ReluNet::select(n, &[i])?))
        .collect::<Result<Vec<_>, _>>()?;
    let magnified = ReluNet::compose(&ReluNet::parallel(&branches)?, &breakpoints)?;
    let unit = 2f64.powi(-(i_max as i32 + 3));
    let coefs = Matrix::from_vec(1, n, ts.iter().map(|t| t.0 * unit).collect()).expect("1xn");
    Ok(magnified.map_output(&coefs)?)
}

/// Budget `(I+5, 8, 16I+60, 1, ∞)`.
pub fn hat_budget(i_max: u32) -> ComplexityBudget {
    let i = i_max as f64;
    ComplexityBudget::new(i + 5.0, 8.0, 16.0 * i + 60.0, 1.0, f64::INFINITY)
}
