//! Clamping networks `t ↦ min(max(t, lo), hi)`.

use super::ConstructionError;
use crate::matrix::Matrix;
use crate::net::{Layer, ReluNet};
use crate::Net;

/// Clamp to `[lo, hi]` as `σ(t − lo) − σ(t − hi) + lo`, the constant coming
/// from one bias-only unit. Inputs at or below `lo` map to `lo` exactly;
/// elsewhere the result carries at most a couple of roundings.
pub fn clip_net(lo: f64, hi: f64) -> Result<Net, ConstructionError> {
    clip_net_vec(1, lo, hi)
}

/// Coordinatewise clamp of a `dim`-vector to `[lo, hi]`.
pub fn clip_net_vec(dim: usize, lo: f64, hi: f64) -> Result<Net, ConstructionError> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(ConstructionError::InvalidParameter(format!("clip_net needs lo < hi, got [{lo}, {hi}]")));
    }
    if dim == 0 {
        return Err(ConstructionError::InvalidParameter("clip_net_vec needs dim >= 1".into()));
    }
    let with_const = lo != 0.0;
    let per = if with_const { 3 } else { 2 };
    let mut w = Matrix::zeros(per * dim, dim);
    let mut v = vec![0.0; per * dim];
    let mut out = Matrix::zeros(dim, per * dim);
    for j in 0..dim {
        let o = per * j;
        w.set(o, j, 1.0);
        v[o] = lo;
        w.set(o + 1, j, 1.0);
        v[o + 1] = hi;
        out.set(j, o, 1.0);
        out.set(j, o + 1, -1.0);
        if with_const {
            v[o + 2] = -lo.abs();
            out.set(j, o + 2, lo.signum());
        }
    }
    Ok(ReluNet::new(dim, vec![Layer::new(w, v)], out)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamps_both_sides() {
        let net = clip_net(-0.5, 2.0).unwrap();
        assert_eq!(net.evaluate(&[-1.5]).unwrap(), vec![-0.5]);
        assert_eq!(net.evaluate(&[0.75]).unwrap(), vec![0.75]);
        assert_eq!(net.evaluate(&[7.0]).unwrap(), vec![2.0]);
        let unit = clip_net(0.0, 1.0).unwrap();
        assert_eq!(unit.complexity().width_n, 2);
        assert_eq!(unit.evaluate(&[1.5]).unwrap(), vec![1.0]);
        assert!(clip_net(1.0, 1.0).is_err());
    }

    #[test]
    fn vector_clamp() {
        let net = clip_net_vec(3, 0.1, 0.9).unwrap();
        let got = net.evaluate(&[-1.0, 0.5, 3.0]).unwrap();
        assert_eq!(got[0], 0.1);
        for (g, want) in got.iter().zip([0.1, 0.5, 0.9]) {
            assert!((g - want).abs() <= 4.0 * f64::EPSILON, "{g} vs {want}");
        }
    }
}
