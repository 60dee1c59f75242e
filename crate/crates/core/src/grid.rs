//! Uniform grids on the unit cube, used for sup-norm certification and quadrature.

/// Default per-axis resolution for certification grids on `[0,1]^d`.
///
/// One-dimensional grids use 10⁴ points and two-dimensional grids 10² per
/// axis. For `d ≥ 3` the per-axis count is reduced so the whole grid stays
/// near 10⁴ points, with at least 2 points per axis.
pub fn default_resolution(d: usize) -> usize {
    match d {
        0 | 1 => 10_000,
        2 => 100,
        _ => ((10_000f64.powf(1.0 / d as f64) + 1e-9).floor() as usize).max(2),
    }
}

/// Regular grid with `per_axis` equally spaced points per axis, endpoints included.
#[derive(Clone, Debug)]
pub struct UnitGrid {
    dim: usize,
    per_axis: usize,
}

impl UnitGrid {
    /// `per_axis` is clamped to at least 2 so both endpoints are present.
    pub fn new(dim: usize, per_axis: usize) -> Self {
        Self { dim, per_axis: per_axis.max(2) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    /// Total number of points.
    pub fn len(&self) -> usize {
        self.per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the `index`-th point (axis 0 varies slowest) into `out`.
    pub fn point_into(&self, mut index: usize, out: &mut [f64]) {
        let step = 1.0 / (self.per_axis - 1) as f64;
        for axis in (0..self.dim).rev() {
            let k = index % self.per_axis;
            index /= self.per_axis;
            out[axis] = if k + 1 == self.per_axis { 1.0 } else { k as f64 * step };
        }
    }

    /// The `index`-th point.
    pub fn point(&self, index: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.dim];
        self.point_into(index, &mut p);
        p
    }
}

/// Midpoint rule nodes on `[0,1]^d` with `per_axis` cells per axis.
#[derive(Clone, Debug)]
pub struct MidpointGrid {
    dim: usize,
    per_axis: usize,
}

impl MidpointGrid {
    pub fn new(dim: usize, per_axis: usize) -> Self {
        Self { dim, per_axis: per_axis.max(1) }
    }

    pub fn len(&self) -> usize {
        self.per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Equal weight of every node.
    pub fn weight(&self) -> f64 {
        1.0 / self.len() as f64
    }

    pub fn point_into(&self, mut index: usize, out: &mut [f64]) {
        let h = 1.0 / self.per_axis as f64;
        for axis in (0..self.dim).rev() {
            let k = index % self.per_axis;
            index /= self.per_axis;
            out[axis] = (k as f64 + 0.5) * h;
        }
    }

    pub fn point(&self, index: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.dim];
        self.point_into(index, &mut p);
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_grid_enumerates_corners() {
        let g = UnitGrid::new(2, 3);
        assert_eq!(g.len(), 9);
        assert_eq!(g.point(0), vec![0.0, 0.0]);
        assert_eq!(g.point(1), vec![0.0, 0.5]);
        assert_eq!(g.point(8), vec![1.0, 1.0]);
    }

    #[test]
    fn midpoint_grid_weights_sum_to_one() {
        let g = MidpointGrid::new(3, 4);
        assert_eq!(g.len(), 64);
        assert!((g.weight() * g.len() as f64 - 1.0).abs() < 1e-15);
        assert_eq!(g.point(0), vec![0.125; 3]);
    }

    #[test]
    fn default_resolutions() {
        assert_eq!(default_resolution(1), 10_000);
        assert_eq!(default_resolution(2), 100);
        assert_eq!(default_resolution(4), 10);
        assert_eq!(default_resolution(16), 2);
    }
}
