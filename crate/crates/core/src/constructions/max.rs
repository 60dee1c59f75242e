//! Recursive-halving network for `x ↦ ‖x‖_∞`.

use super::{ceil_log2, ConstructionError};
use crate::matrix::Matrix;
use crate::net::{ComplexityBudget, Layer, Padding, ReluNet};
use crate::Net;

/// `x ↦ max_i |x_i|` on `R^k`.
///
/// For `k = 1` the net is `σ(x) + σ(−x)`. For larger `k` the coordinates are
/// split into halves of sizes `⌊k/2⌋` and `⌈k/2⌉`, each half is handled
/// recursively (the shallower half is carried by single-unit identities since
/// its output is nonnegative), and the two nonnegative results `A, B` are
/// merged with `max(A,B) = σ(A/2 − B/2) + σ(B/2 − A/2) + σ(A/2 + B/2)`.
/// Depth is `1 + 2⌈log₂ k⌉`.
pub fn max_net(k: usize) -> Result<Net, ConstructionError> {
    if k == 0 {
        return Err(ConstructionError::InvalidParameter("max_net needs k >= 1".into()));
    }
    build(k)
}

fn build(k: usize) -> Result<Net, ConstructionError> {
    if k == 1 {
        let w0 = Matrix::from_rows(1, vec![vec![1.0], vec![-1.0]]).expect("2x1");
        let out = Matrix::from_vec(1, 2, vec![1.0, 1.0]).expect("1x2");
        return Ok(ReluNet::new(1, vec![Layer::unshifted(w0)], out)?);
    }
    let left_k = k / 2;
    let left = ReluNet::compose(&build(left_k)?, &ReluNet::select(k, &(0..left_k).collect::<Vec<_>>())?)?;
    let right = ReluNet::compose(&build(k - left_k)?, &ReluNet::select(k, &(left_k..k).collect::<Vec<_>>())?)?;
    let halves = ReluNet::parallel_with(&[left, right], Padding::NonNegative)?;
    let merge = ReluNet::new(
        2,
        vec![
            Layer::unshifted(Matrix::identity(2)),
            Layer::unshifted(
                Matrix::from_rows(2, vec![vec![0.5, -0.5], vec![-0.5, 0.5], vec![0.5, 0.5]]).expect("3x2"),
            ),
        ],
        Matrix::from_vec(1, 3, vec![1.0; 3]).expect("1x3"),
    )?;
    Ok(ReluNet::compose(&merge, &halves)?)
}

/// Budget `(1 + 2⌈log₂k⌉, 2k, 26·2^{⌈log₂k⌉} − 20 − 2⌈log₂k⌉, 1, 1)`.
pub fn max_budget(k: usize) -> ComplexityBudget {
    let c = ceil_log2(k) as f64;
    ComplexityBudget::new(1.0 + 2.0 * c, 2.0 * k as f64, 26.0 * 2f64.powf(c) - 20.0 - 2.0 * c, 1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(max_net(1).unwrap().evaluate(&[-0.7]).unwrap(), vec![0.7]);
        assert_eq!(max_net(3).unwrap().evaluate(&[0.2, -0.7, 0.5]).unwrap(), vec![0.7]);
        assert!(max_net(0).is_err());
    }

    #[test]
    fn max_net_3_complexity() {
        let s = max_net(3).unwrap().complexity();
        assert_eq!((s.depth_g, s.width_n, s.param_bound_b), (5, 6, 1.0));
        assert!(s.nnz_s <= 80, "S = {}", s.nnz_s);
    }

    #[test]
    fn depth_formula() {
        for k in 1..=20 {
            let s = max_net(k).unwrap().complexity();
            assert_eq!(s.depth_g, 1 + 2 * ceil_log2(k) as usize, "k = {k}");
            assert!(max_budget(k).admits(&s), "k = {k}: {s:?} vs {}", max_budget(k));
        }
    }
}
