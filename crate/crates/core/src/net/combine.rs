//! Serial and parallel combinators and the unit-bound rescaling transform.

use super::{Layer, NetError, ReluNet};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// How a shallower network is carried forward when depths are synchronized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Padding {
    /// Carries a signed value `y` as `σ(y) − σ(−y)` (two units per output).
    TwoChannel,
    /// Carries a value known to be nonnegative as `σ(y)` (one unit per output).
    NonNegative,
}

impl<T: Scalar> ReluNet<T> {
    /// `outer ∘ inner`. The outer first matrix is merged with the inner output
    /// matrix, so the depth of the result is the sum of both depths.
    pub fn compose(outer: &ReluNet<T>, inner: &ReluNet<T>) -> Result<ReluNet<T>, NetError> {
        if inner.output_dim() != outer.input_dim() {
            return Err(NetError::DimensionMismatch {
                layer: inner.depth(),
                expected: outer.input_dim(),
                found: inner.output_dim(),
            });
        }
        if outer.layers.is_empty() {
            let out = outer.output.matmul(&inner.output).expect("checked");
            return ReluNet::new(inner.input_dim, inner.layers.clone(), out);
        }
        let first = &outer.layers[0];
        let merged = first.weights.matmul(&inner.output).expect("checked");
        let mut layers = inner.layers.clone();
        layers.push(Layer::new(merged, first.shift.clone()));
        layers.extend(outer.layers[1..].iter().cloned());
        ReluNet::new(inner.input_dim, layers, outer.output.clone())
    }

    /// Appends `extra` hidden layers that carry the output unchanged.
    pub fn pad_to_depth(&self, depth: usize, padding: Padding) -> Result<ReluNet<T>, NetError> {
        if depth < self.depth() {
            return Err(NetError::Invalid(format!("cannot pad depth {} down to {depth}", self.depth())));
        }
        if depth == self.depth() {
            return Ok(self.clone());
        }
        let o = self.output_dim();
        let extra = depth - self.depth();
        let mut layers = self.layers.clone();
        let (first, carried, out) = match padding {
            Padding::TwoChannel => {
                let neg = self.output.scaled(-T::one());
                let first = Matrix::vstack(&[&self.output, &neg]).expect("same columns");
                let mut out = Matrix::zeros(o, 2 * o);
                for j in 0..o {
                    out.set(j, j, T::one());
                    out.set(j, o + j, -T::one());
                }
                (first, 2 * o, out)
            }
            Padding::NonNegative => (self.output.clone(), o, Matrix::identity(o)),
        };
        layers.push(Layer::unshifted(first));
        for _ in 1..extra {
            layers.push(Layer::unshifted(Matrix::identity(carried)));
        }
        ReluNet::new(self.input_dim, layers, out)
    }

    /// Runs several networks on the same input and concatenates their outputs.
    /// Shallower networks are padded to the common depth with `padding`.
    pub fn parallel_with(nets: &[ReluNet<T>], padding: Padding) -> Result<ReluNet<T>, NetError> {
        let first = nets.first().ok_or(NetError::EmptyParallel)?;
        let n = first.input_dim();
        if let Some(bad) = nets.iter().find(|f| f.input_dim() != n) {
            return Err(NetError::DimensionMismatch { layer: 0, expected: n, found: bad.input_dim() });
        }
        let depth = nets.iter().map(|f| f.depth()).max().unwrap_or(0);
        let padded: Vec<ReluNet<T>> = nets.iter().map(|f| f.pad_to_depth(depth, padding)).collect::<Result<_, _>>()?;
        let outs: Vec<&Matrix<T>> = padded.iter().map(|f| &f.output).collect();
        let output = Matrix::block_diag(&outs);
        if depth == 0 {
            let stacked = Matrix::vstack(&outs).expect("same input");
            return ReluNet::linear(stacked);
        }
        let mut layers = Vec::with_capacity(depth);
        for k in 0..depth {
            let ws: Vec<&Matrix<T>> = padded.iter().map(|f| &f.layers[k].weights).collect();
            let weights = if k == 0 { Matrix::vstack(&ws).expect("same input") } else { Matrix::block_diag(&ws) };
            let shift = padded.iter().flat_map(|f| f.layers[k].shift.iter().copied()).collect();
            layers.push(Layer::new(weights, shift));
        }
        ReluNet::new(n, layers, output)
    }

    /// [`parallel_with`](Self::parallel_with) using two-channel padding.
    pub fn parallel(nets: &[ReluNet<T>]) -> Result<ReluNet<T>, NetError> {
        Self::parallel_with(nets, Padding::TwoChannel)
    }

    /// Sum of the outputs of several scalar networks evaluated in parallel.
    pub fn sum(nets: &[ReluNet<T>]) -> Result<ReluNet<T>, NetError> {
        let p = Self::parallel(nets)?;
        let ones = Matrix::from_vec(1, p.output_dim(), vec![T::one(); p.output_dim()]).expect("row");
        p.map_output(&ones)
    }

    /// Equivalent network whose parameters all lie in `[−1, 1]`.
    ///
    /// Each hidden unit whose incoming weights or shift exceed 1 is divided by
    /// a power of two and the factor moves into the next layer (ReLU is
    /// positively homogeneous). A remaining factor `2^p` on the output matrix
    /// is produced by `p` extra doubling layers. Power-of-two scaling is exact
    /// in binary floating point, so outputs are bitwise unchanged unless an
    /// intermediate value leaves the normal range.
    pub fn rescale_to_unit_bound(&self) -> ReluNet<T> {
        let mut layers = self.layers.clone();
        let mut output = self.output.clone();
        for k in 0..layers.len() {
            for i in 0..layers[k].width() {
                let row_max = layers[k].weights.row(i).iter().fold(T::zero(), |m, v| m.max(v.abs()));
                let m = row_max.max(layers[k].shift[i].abs());
                if m <= T::one() {
                    continue;
                }
                let e = m.as_f64().log2().ceil() as i32;
                let down = T::pow2(-e);
                let up = T::pow2(e);
                for w in layers[k].weights.row_mut(i) {
                    *w = *w * down;
                }
                layers[k].shift[i] = layers[k].shift[i] * down;
                let next = if k + 1 < layers.len() { &mut layers[k + 1].weights } else { &mut output };
                for r in 0..next.rows() {
                    let v = next.get(r, i);
                    next.set(r, i, v * up);
                }
            }
        }
        let m = output.max_abs();
        if m <= T::one() {
            return ReluNet::new(self.input_dim, layers, output).expect("shape preserved");
        }
        let p = m.as_f64().log2().ceil() as i32;
        let unit_out = output.scaled(T::pow2(-p));
        let o = output.rows();
        let width = unit_out.cols();
        // Units per output j: P1, P2 carry (W'h)_+ and N1, N2 carry (W'h)_−.
        let mut first = Matrix::zeros(4 * o, width);
        for j in 0..o {
            for c in 0..width {
                let v = unit_out.get(j, c);
                first.set(4 * j, c, v);
                first.set(4 * j + 1, c, v);
                first.set(4 * j + 2, c, -v);
                first.set(4 * j + 3, c, -v);
            }
        }
        layers.push(Layer::unshifted(first));
        let mut doubling = Matrix::zeros(4 * o, 4 * o);
        for j in 0..o {
            for (a, b) in [(0, 1), (2, 3)] {
                for r in [a, b] {
                    doubling.set(4 * j + r, 4 * j + a, T::one());
                    doubling.set(4 * j + r, 4 * j + b, T::one());
                }
            }
        }
        for _ in 1..p {
            layers.push(Layer::unshifted(doubling.clone()));
        }
        let mut out = Matrix::zeros(o, 4 * o);
        for j in 0..o {
            out.set(j, 4 * j, T::one());
            out.set(j, 4 * j + 1, T::one());
            out.set(j, 4 * j + 2, -T::one());
            out.set(j, 4 * j + 3, -T::one());
        }
        ReluNet::new(self.input_dim, layers, out).expect("shape preserved")
    }
}
