//! Dense row-major matrices and the compressed row form used for evaluation.

use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    /// Matrix of the given shape filled with zeros.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    /// Builds a matrix from row-major data. Returns `None` on a length mismatch.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Self { rows, cols, data })
    }

    /// Builds a matrix from explicit rows. Every row must have `cols` entries.
    pub fn from_rows(cols: usize, rows: Vec<Vec<T>>) -> Option<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            if r.len() != cols {
                return None;
            }
            data.extend(r);
        }
        Some(Self { rows: n, cols, data })
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// Number of entries that are not exactly zero.
    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|v| !v.is_zero()).count()
    }

    /// Largest absolute entry (zero for an empty matrix).
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Matrix product `self · rhs`, summed left to right in column order.
    pub fn matmul(&self, rhs: &Matrix<T>) -> Option<Matrix<T>> {
        if self.cols != rhs.rows {
            return None;
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = T::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = rhs.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc + a * b;
                    }
                }
                out.set(i, j, acc);
            }
        }
        Some(out)
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(parts: &[&Matrix<T>]) -> Option<Matrix<T>> {
        let cols = parts.first()?.cols;
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            if p.cols != cols {
                return None;
            }
            rows += p.rows;
            data.extend_from_slice(&p.data);
        }
        Some(Self { rows, cols, data })
    }

    /// Block-diagonal matrix.
    pub fn block_diag(parts: &[&Matrix<T>]) -> Matrix<T> {
        let rows = parts.iter().map(|p| p.rows).sum();
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for p in parts {
            for i in 0..p.rows {
                for j in 0..p.cols {
                    out.set(r0 + i, c0 + j, p.get(i, j));
                }
            }
            r0 += p.rows;
            c0 += p.cols;
        }
        out
    }

    /// Multiplies every entry by `s`.
    pub fn scaled(&self, s: T) -> Matrix<T> {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| v * s).collect() }
    }

    /// Converts entries to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| U::from_f64_lossy(v.as_f64())).collect(),
        }
    }

    /// Rows as owned vectors.
    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }
}

/// Compressed sparse row copy of a [`Matrix`] that keeps column order, so a
/// sparse product sums exactly the same terms in the same order as the dense one.
#[derive(Clone, Debug)]
pub(crate) struct SparseRows<T> {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<T>,
}

impl<T: Scalar> SparseRows<T> {
    pub(crate) fn from_dense(m: &Matrix<T>) -> Self {
        let mut row_ptr = Vec::with_capacity(m.rows() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for r in 0..m.rows() {
            for (c, &v) in m.row(r).iter().enumerate() {
                if !v.is_zero() {
                    cols.push(c as u32);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { row_ptr, cols, vals }
    }

    pub(crate) fn rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    /// `out[r] = Σ_c M[r,c]·x[c]`, accumulated from zero in column order.
    pub(crate) fn apply(&self, x: &[T], out: &mut Vec<T>) {
        out.clear();
        for r in 0..self.rows() {
            let mut acc = T::zero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc = acc + self.vals[k] * x[self.cols[k] as usize];
            }
            out.push(acc);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_and_blocks() {
        let a = Matrix::from_rows(2, vec![vec![1.0, 2.0], vec![0.0, -1.0]]).unwrap();
        let b = Matrix::from_rows(1, vec![vec![3.0], vec![4.0]]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.to_rows(), vec![vec![11.0], vec![-4.0]]);
        let d = Matrix::block_diag(&[&a, &b]);
        assert_eq!((d.rows(), d.cols()), (4, 3));
        assert_eq!(d.get(2, 2), 3.0);
        assert_eq!(d.get(0, 2), 0.0);
        assert_eq!(a.nnz(), 3);
        assert!(a.matmul(&a.scaled(2.0)).is_some());
        assert!(b.matmul(&b).is_none());
    }

    #[test]
    fn sparse_rows_match_dense_product() {
        let a = Matrix::from_rows(3, vec![vec![0.5, 0.0, -0.25], vec![0.0, 0.0, 0.0]]).unwrap();
        let s = SparseRows::from_dense(&a);
        let mut out = Vec::new();
        s.apply(&[2.0, 7.0, 4.0], &mut out);
        assert_eq!(out, vec![0.0, 0.0]);
        s.apply(&[2.0, 7.0, 1.0], &mut out);
        assert_eq!(out, vec![0.75, 0.0]);
    }
}
