//! Fully connected ReLU networks of the form
//! `x ↦ W_L σ_{v_L} W_{L−1} ⋯ W_1 σ_{v_1} W_0 x` with `σ_v(z) = max(z − v, 0)`,
//! together with complexity accounting and membership checks against a
//! `(G, N, S, B, F)` budget.

mod combine;
mod json;

use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::UnitGrid;
use crate::matrix::{Matrix, SparseRows};
use crate::scalar::Scalar;

pub use combine::Padding;

/// Relative slack granted to the grid sup-norm comparison in [`ReluNet::is_member`],
/// covering the last-bit rounding of the final affine map.
pub const SUP_NORM_RELATIVE_SLACK: f64 = 1e-12;

/// Errors raised while building, evaluating or parsing networks.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetError {
    /// A weight matrix or shift vector does not chain with its neighbour.
    #[error("dimension mismatch at layer {layer}: expected {expected}, found {found}")]
    DimensionMismatch { layer: usize, expected: usize, found: usize },
    /// The input vector has the wrong length.
    #[error("input has length {found}, network expects {expected}")]
    InputLength { expected: usize, found: usize },
    /// Malformed serialized text.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    /// `parallel` was called without any network.
    #[error("parallel composition needs at least one network")]
    EmptyParallel,
    /// Any other structural violation.
    #[error("invalid network: {0}")]
    Invalid(String),
}

/// One hidden layer: `h ↦ σ(W h − v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer<T> {
    pub weights: Matrix<T>,
    pub shift: Vec<T>,
}

impl<T: Scalar> Layer<T> {
    pub fn new(weights: Matrix<T>, shift: Vec<T>) -> Self {
        Self { weights, shift }
    }

    /// Layer with zero shifts.
    pub fn unshifted(weights: Matrix<T>) -> Self {
        let n = weights.rows();
        Self { weights, shift: vec![T::zero(); n] }
    }

    pub fn width(&self) -> usize {
        self.weights.rows()
    }
}

/// Exact complexity figures of a network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityStats {
    /// Number of hidden layers `L`.
    pub depth_g: usize,
    /// Largest hidden width.
    pub width_n: usize,
    /// Nonzero entries over every `W_k` (k = 0..L) and every `v_k` (k = 1..L).
    pub nnz_s: usize,
    /// Largest absolute value over the same entries.
    pub param_bound_b: f64,
    /// Grid estimate of the sup-norm on `[0,1]^d`, when computed.
    pub supnorm_f: Option<f64>,
}

/// A `(G, N, S, B, F)` budget. `S`, `B` and `F` may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityBudget {
    pub g: f64,
    pub n: f64,
    pub s: f64,
    pub b: f64,
    pub f: f64,
}

impl ComplexityBudget {
    pub fn new(g: f64, n: f64, s: f64, b: f64, f: f64) -> Self {
        Self { g, n, s, b, f }
    }

    /// True when every component is nonnegative (and not NaN).
    pub fn is_valid(&self) -> bool {
        [self.g, self.n, self.s, self.b, self.f].iter().all(|v| *v >= 0.0)
    }

    /// `G, N, S, B` part of the membership test.
    pub fn admits(&self, stats: &ComplexityStats) -> bool {
        stats.depth_g as f64 <= self.g
            && stats.width_n as f64 <= self.n
            && stats.nnz_s as f64 <= self.s
            && stats.param_bound_b <= self.b
    }
}

impl fmt::Display for ComplexityBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {}, {})", self.g, self.n, self.s, self.b, self.f)
    }
}

#[derive(Clone, Debug)]
struct Plan<T> {
    hidden: Vec<(SparseRows<T>, Vec<T>)>,
    output: SparseRows<T>,
}

/// A fully connected ReLU network. Immutable once built; evaluation is
/// reentrant and may run on many threads at once.
#[derive(Clone, Debug)]
pub struct ReluNet<T: Scalar> {
    input_dim: usize,
    layers: Vec<Layer<T>>,
    output: Matrix<T>,
    stats: OnceLock<ComplexityStats>,
    plan: OnceLock<Plan<T>>,
}

impl<T: Scalar> PartialEq for ReluNet<T> {
    fn eq(&self, other: &Self) -> bool {
        self.input_dim == other.input_dim && self.layers == other.layers && self.output == other.output
    }
}

impl<T: Scalar> ReluNet<T> {
    /// Builds a network after checking that all dimensions chain.
    pub fn new(input_dim: usize, layers: Vec<Layer<T>>, output: Matrix<T>) -> Result<Self, NetError> {
        if input_dim == 0 {
            return Err(NetError::Invalid("input dimension must be positive".into()));
        }
        let mut prev = input_dim;
        for (k, layer) in layers.iter().enumerate() {
            if layer.weights.cols() != prev {
                return Err(NetError::DimensionMismatch { layer: k, expected: prev, found: layer.weights.cols() });
            }
            if layer.shift.len() != layer.weights.rows() {
                return Err(NetError::DimensionMismatch {
                    layer: k,
                    expected: layer.weights.rows(),
                    found: layer.shift.len(),
                });
            }
            prev = layer.weights.rows();
        }
        if output.cols() != prev {
            return Err(NetError::DimensionMismatch { layer: layers.len(), expected: prev, found: output.cols() });
        }
        if output.rows() == 0 {
            return Err(NetError::Invalid("output dimension must be positive".into()));
        }
        Ok(Self { input_dim, layers, output, stats: OnceLock::new(), plan: OnceLock::new() })
    }

    /// Network without hidden layers: `x ↦ W x`.
    pub fn linear(weights: Matrix<T>) -> Result<Self, NetError> {
        Self::new(weights.cols(), Vec::new(), weights)
    }

    /// Identity map on `R^n` without hidden layers.
    pub fn identity_affine(n: usize) -> Self {
        Self::linear(Matrix::identity(n)).expect("identity is well formed")
    }

    /// Linear map picking coordinates `indices` out of an `input_dim` vector.
    pub fn select(input_dim: usize, indices: &[usize]) -> Result<Self, NetError> {
        let mut m = Matrix::zeros(indices.len(), input_dim);
        for (r, &i) in indices.iter().enumerate() {
            if i >= input_dim {
                return Err(NetError::Invalid(format!("coordinate {i} out of range for dimension {input_dim}")));
            }
            m.set(r, i, T::one());
        }
        Self::linear(m)
    }

    /// One hidden layer producing the constant `c` for every input.
    pub fn constant(input_dim: usize, c: T) -> Result<Self, NetError> {
        let shift = vec![-c.abs()];
        let sign = if c < T::zero() { -T::one() } else { T::one() };
        let layer = Layer::new(Matrix::zeros(1, input_dim), shift);
        Self::new(input_dim, vec![layer], Matrix::from_vec(1, 1, vec![sign]).expect("1x1"))
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output.rows()
    }

    /// Number of hidden layers `L`.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    /// The final matrix `W_L`.
    pub fn output_matrix(&self) -> &Matrix<T> {
        &self.output
    }

    /// Consumes the network, returning `(input_dim, layers, W_L)`.
    pub fn into_parts(self) -> (usize, Vec<Layer<T>>, Matrix<T>) {
        (self.input_dim, self.layers, self.output)
    }

    fn plan(&self) -> &Plan<T> {
        self.plan.get_or_init(|| Plan {
            hidden: self.layers.iter().map(|l| (SparseRows::from_dense(&l.weights), l.shift.clone())).collect(),
            output: SparseRows::from_dense(&self.output),
        })
    }

    /// Evaluates the network at `x`.
    pub fn evaluate(&self, x: &[T]) -> Result<Vec<T>, NetError> {
        if x.len() != self.input_dim {
            return Err(NetError::InputLength { expected: self.input_dim, found: x.len() });
        }
        let mut scratch = Scratch::default();
        Ok(self.evaluate_with(x, &mut scratch).to_vec())
    }

    /// Evaluates a network with scalar output.
    pub fn evaluate_scalar(&self, x: &[T]) -> Result<T, NetError> {
        if self.output_dim() != 1 {
            return Err(NetError::Invalid(format!("expected scalar output, network has {}", self.output_dim())));
        }
        Ok(self.evaluate(x)?[0])
    }

    /// Allocation-free evaluation for hot loops. `x` must have length `input_dim`.
    pub fn evaluate_with<'s>(&self, x: &[T], scratch: &'s mut Scratch<T>) -> &'s [T] {
        debug_assert_eq!(x.len(), self.input_dim);
        let plan = self.plan();
        scratch.a.clear();
        scratch.a.extend_from_slice(x);
        for (w, v) in &plan.hidden {
            w.apply(&scratch.a, &mut scratch.b);
            for (z, &s) in scratch.b.iter_mut().zip(v) {
                let t = *z - s;
                *z = if t > T::zero() { t } else { T::zero() };
            }
            std::mem::swap(&mut scratch.a, &mut scratch.b);
        }
        plan.output.apply(&scratch.a, &mut scratch.b);
        &scratch.b
    }

    /// Exact complexity figures (sup-norm left unset).
    pub fn complexity(&self) -> ComplexityStats {
        self.stats
            .get_or_init(|| {
                let mut nnz = self.output.nnz();
                let mut bound = self.output.max_abs().as_f64();
                let mut width = 0;
                for l in &self.layers {
                    nnz += l.weights.nnz() + l.shift.iter().filter(|v| !v.is_zero()).count();
                    bound = bound.max(l.weights.max_abs().as_f64());
                    bound = l.shift.iter().fold(bound, |b, v| b.max(v.abs().as_f64()));
                    width = width.max(l.width());
                }
                ComplexityStats {
                    depth_g: self.layers.len(),
                    width_n: width,
                    nnz_s: nnz,
                    param_bound_b: bound,
                    supnorm_f: None,
                }
            })
            .clone()
    }

    /// Largest absolute output over a uniform grid on `[0,1]^d` with
    /// `grid_resolution` points per axis. This only estimates the true sup-norm
    /// from below.
    pub fn sup_norm_estimate(&self, grid_resolution: usize) -> f64 {
        let grid = UnitGrid::new(self.input_dim, grid_resolution);
        (0..grid.len())
            .into_par_iter()
            .with_min_len(1024)
            .fold(
                || (Scratch::default(), vec![0.0; self.input_dim], vec![T::zero(); self.input_dim], 0.0f64),
                |(mut s, mut p, mut pt, m), i| {
                    grid.point_into(i, &mut p);
                    for (t, v) in pt.iter_mut().zip(&p) {
                        *t = T::from_f64_lossy(*v);
                    }
                    let out = self.evaluate_with(&pt, &mut s);
                    let m = out.iter().fold(m, |m, v| m.max(v.abs().as_f64()));
                    (s, p, pt, m)
                },
            )
            .map(|(_, _, _, m)| m)
            .reduce(|| 0.0, f64::max)
    }

    /// Complexity figures with the grid sup-norm filled in.
    pub fn complexity_with_supnorm(&self, grid_resolution: usize) -> ComplexityStats {
        let mut s = self.complexity();
        s.supnorm_f = Some(self.sup_norm_estimate(grid_resolution));
        s
    }

    /// Membership in `F(G, N, S, B, F)`: exact for `G, N, S, B`; for finite `F`
    /// the grid sup-norm estimate must not exceed `F` (a necessary condition
    /// only, since the grid cannot see between its points).
    pub fn is_member(&self, budget: &ComplexityBudget, grid_resolution: usize) -> bool {
        if !budget.admits(&self.complexity()) {
            return false;
        }
        if budget.f.is_finite() {
            let sup = self.sup_norm_estimate(grid_resolution.max(2));
            return sup <= budget.f * (1.0 + SUP_NORM_RELATIVE_SLACK) + SUP_NORM_RELATIVE_SLACK;
        }
        true
    }

    /// Converts all parameters to another scalar type.
    pub fn cast<U: Scalar>(&self) -> ReluNet<U> {
        ReluNet {
            input_dim: self.input_dim,
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    weights: l.weights.cast(),
                    shift: l.shift.iter().map(|v| U::from_f64_lossy(v.as_f64())).collect(),
                })
                .collect(),
            output: self.output.cast(),
            stats: OnceLock::new(),
            plan: OnceLock::new(),
        }
    }

    /// Multiplies the output by `s` (applied to `W_L`).
    pub fn scale_output(&self, s: T) -> Self {
        Self::new(self.input_dim, self.layers.clone(), self.output.scaled(s)).expect("shape preserved")
    }

    /// Applies a linear map to the output: `x ↦ M f(x)`.
    pub fn map_output(&self, m: &Matrix<T>) -> Result<Self, NetError> {
        let out = m.matmul(&self.output).ok_or(NetError::DimensionMismatch {
            layer: self.layers.len(),
            expected: self.output.rows(),
            found: m.cols(),
        })?;
        Self::new(self.input_dim, self.layers.clone(), out)
    }

    /// Precomposes with the affine map `x ↦ A x + c`. The offset is absorbed
    /// into the first shift vector, so the network needs a hidden layer when
    /// `c` is nonzero.
    pub fn precompose_affine(&self, a: &Matrix<T>, c: &[T]) -> Result<Self, NetError> {
        if a.rows() != self.input_dim || c.len() != self.input_dim {
            return Err(NetError::DimensionMismatch { layer: 0, expected: self.input_dim, found: a.rows() });
        }
        if self.layers.is_empty() {
            if c.iter().any(|v| !v.is_zero()) {
                return Err(NetError::Invalid("affine offset needs a hidden layer".into()));
            }
            return Self::linear(self.output.matmul(a).expect("checked"));
        }
        let first = &self.layers[0];
        let w = first.weights.matmul(a).expect("checked");
        let cm = Matrix::from_vec(c.len(), 1, c.to_vec()).expect("column");
        let wc = first.weights.matmul(&cm).expect("checked");
        let shift = first.shift.iter().enumerate().map(|(i, &v)| v - wc.get(i, 0)).collect();
        let mut layers = self.layers.clone();
        layers[0] = Layer::new(w, shift);
        Self::new(a.cols(), layers, self.output.clone())
    }
}

/// Reusable buffers for [`ReluNet::evaluate_with`].
#[derive(Clone, Debug, Default)]
pub struct Scratch<T> {
    a: Vec<T>,
    b: Vec<T>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs_net() -> ReluNet<f64> {
        let w0 = Matrix::from_rows(1, vec![vec![1.0], vec![-1.0]]).unwrap();
        let w1 = Matrix::from_rows(2, vec![vec![1.0, 1.0]]).unwrap();
        ReluNet::new(1, vec![Layer::unshifted(w0)], w1).unwrap()
    }

    #[test]
    fn linear_net_is_a_matrix_product() {
        let net = ReluNet::linear(Matrix::from_rows(1, vec![vec![2.0]]).unwrap()).unwrap();
        assert_eq!(net.evaluate(&[3.0]).unwrap(), vec![6.0]);
        assert_eq!(net.depth(), 0);
    }

    #[test]
    fn dead_relus_give_zero() {
        let w0 = Matrix::from_rows(2, vec![vec![1.0, 1.0], vec![-1.0, 0.5]]).unwrap();
        let net = ReluNet::new(
            2,
            vec![Layer::new(w0, vec![5.0, 5.0])],
            Matrix::from_rows(2, vec![vec![3.0, -7.0]]).unwrap(),
        )
        .unwrap();
        assert_eq!(net.evaluate(&[1.0, 2.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn complexity_counts_entries() {
        let s = abs_net().complexity();
        assert_eq!((s.depth_g, s.width_n, s.nnz_s, s.param_bound_b), (1, 2, 4, 1.0));
        let zero = ReluNet::<f64>::new(
            1,
            vec![Layer::unshifted(Matrix::zeros(3, 1))],
            Matrix::zeros(1, 3),
        )
        .unwrap();
        let z = zero.complexity();
        assert_eq!((z.nnz_s, z.param_bound_b), (0, 0.0));
    }

    #[test]
    fn construction_checks_dimensions() {
        let bad = ReluNet::<f64>::new(2, vec![Layer::unshifted(Matrix::zeros(3, 1))], Matrix::zeros(1, 3));
        assert_eq!(bad.unwrap_err(), NetError::DimensionMismatch { layer: 0, expected: 2, found: 1 });
        let bad_shift = ReluNet::<f64>::new(1, vec![Layer::new(Matrix::zeros(3, 1), vec![0.0])], Matrix::zeros(1, 3));
        assert!(matches!(bad_shift, Err(NetError::DimensionMismatch { layer: 0, .. })));
        let bad_out = ReluNet::<f64>::new(1, vec![Layer::unshifted(Matrix::zeros(3, 1))], Matrix::zeros(1, 2));
        assert!(matches!(bad_out, Err(NetError::DimensionMismatch { layer: 1, .. })));
        assert_eq!(
            abs_net().evaluate(&[1.0, 2.0]).unwrap_err(),
            NetError::InputLength { expected: 1, found: 2 }
        );
    }

    #[test]
    fn constants_and_selection() {
        let c = ReluNet::<f64>::constant(3, -0.3).unwrap();
        assert_eq!(c.evaluate(&[0.1, 5.0, -2.0]).unwrap(), vec![-0.3]);
        let s = ReluNet::<f64>::select(3, &[2, 0]).unwrap();
        assert_eq!(s.evaluate(&[1.0, 2.0, 3.0]).unwrap(), vec![3.0, 1.0]);
        assert!(ReluNet::<f64>::select(2, &[2]).is_err());
    }

    #[test]
    fn membership_depends_on_depth_and_supnorm() {
        let net = abs_net();
        assert!(net.is_member(&ComplexityBudget::new(1.0, 2.0, 4.0, 1.0, 1.0), 11));
        assert!(!net.is_member(&ComplexityBudget::new(0.0, 2.0, 4.0, 1.0, 1.0), 11));
        assert!(!net.is_member(&ComplexityBudget::new(1.0, 2.0, 4.0, 1.0, 0.5), 11));
        assert_eq!(net.sup_norm_estimate(11), 1.0);
    }

    #[test]
    fn affine_precomposition_moves_offset_into_shifts() {
        let net = abs_net();
        let a = Matrix::from_rows(2, vec![vec![2.0, 0.0]]).unwrap();
        let shifted = net.precompose_affine(&a, &[-1.0]).unwrap();
        assert_eq!(shifted.evaluate(&[0.25, 9.0]).unwrap(), vec![0.5]);
        assert_eq!(shifted.input_dim(), 2);
    }

    #[test]
    fn f32_cast_evaluates_close() {
        let net32: ReluNet<f32> = abs_net().cast();
        assert_eq!(net32.evaluate(&[-0.5f32]).unwrap(), vec![0.5f32]);
    }
}
