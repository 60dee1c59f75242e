//! Exact scaling network `x ↦ 2^k σ(x)`.

use super::ConstructionError;
use crate::matrix::Matrix;
use crate::net::{ComplexityBudget, Layer, ReluNet};
use crate::Net;

/// `x ↦ 2^k σ(x)` with `W_0 = (1,1)ᵀ`, `W_i = [[1,1],[1,1]]` and `W_k = (1,1)`,
/// all shifts zero. Exact in floating point.
pub fn scale_pos_net(k: u32) -> Result<Net, ConstructionError> {
    if k == 0 {
        return Err(ConstructionError::InvalidParameter("scale_pos_net needs k >= 1".into()));
    }
    let w0 = Matrix::from_rows(1, vec![vec![1.0], vec![1.0]]).expect("2x1");
    let mut layers = vec![Layer::unshifted(w0)];
    let square = Matrix::from_vec(2, 2, vec![1.0; 4]).expect("2x2");
    for _ in 1..k {
        layers.push(Layer::unshifted(square.clone()));
    }
    let out = Matrix::from_vec(1, 2, vec![1.0, 1.0]).expect("1x2");
    Ok(ReluNet::new(1, layers, out)?)
}

/// Budget `(k, 2, 4k, 1, ∞)`.
pub fn scale_budget(k: u32) -> ComplexityBudget {
    let k = k as f64;
    ComplexityBudget::new(k, 2.0, 4.0 * k, 1.0, f64::INFINITY)
}
