//! Classifiers with piecewise smooth decision boundaries and Monte Carlo
//! estimates of the noise and margin conditions.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::dist::{DataDistribution, PointFn};
use super::RiskError;

/// Horizon piece `Λ_{g,j} = {x : x_j ≥ max(0, g(x_{−j}))}`.
#[derive(Clone)]
pub struct HorizonPiece {
    /// Function of the remaining `d − 1` coordinates.
    pub g: PointFn,
    /// Distinguished axis `j` (zero based).
    pub axis: usize,
}

impl fmt::Debug for HorizonPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HorizonPiece(axis={})", self.axis)
    }
}

impl HorizonPiece {
    fn threshold(&self, x: &[f64], buf: &mut Vec<f64>) -> f64 {
        buf.clear();
        buf.extend(x.iter().enumerate().filter(|(i, _)| *i != self.axis).map(|(_, &v)| v));
        (self.g)(buf).max(0.0)
    }

    fn contains(&self, x: &[f64], buf: &mut Vec<f64>) -> bool {
        x[self.axis] >= self.threshold(x, buf)
    }
}

/// Classifier `C = 2 Σ_t 1_{A_t} − 1` with `A_t = ∩_k Λ_{g_{t,k}, j_{t,k}}`.
#[derive(Clone, Debug)]
pub struct BoundaryClassifierSpec {
    pub d: usize,
    /// `regions[t][k]` is the `k`-th piece of `A_t`.
    pub regions: Vec<Vec<HorizonPiece>>,
    /// Sampled points of the decision boundary.
    boundary: Vec<Vec<f64>>,
    /// Spacing of the parameter grid used to sample each hypersurface.
    pub surface_spacing: f64,
}

impl BoundaryClassifierSpec {
    /// Builds the classifier, rejecting overlapping regions found by
    /// `check_samples` uniform draws, and samples the decision boundary with
    /// about `surface_points` points per hypersurface.
    pub fn new(d: usize, regions: Vec<Vec<HorizonPiece>>, check_samples: usize, surface_points: usize, seed: u64) -> Result<Self, RiskError> {
        if d < 2 || regions.is_empty() || regions.iter().any(|r| r.is_empty()) {
            return Err(RiskError::InvalidParameter("boundary classifier needs d >= 2 and nonempty regions".into()));
        }
        if regions.iter().flatten().any(|p| p.axis >= d) {
            return Err(RiskError::InvalidParameter(format!("piece axis out of range for d = {d}")));
        }
        let mut spec = Self { d, regions, boundary: Vec::new(), surface_spacing: 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = vec![0.0; d];
        for _ in 0..check_samples {
            x.iter_mut().for_each(|v| *v = rng.gen());
            let hits = (0..spec.regions.len()).filter(|&t| spec.in_region(t, &x)).count();
            if hits > 1 {
                return Err(RiskError::InvalidParameter(format!("regions overlap at {x:?}")));
            }
        }
        spec.sample_boundary(surface_points.max(2));
        Ok(spec)
    }

    /// Whether `x ∈ A_t`.
    pub fn in_region(&self, t: usize, x: &[f64]) -> bool {
        let mut buf = Vec::with_capacity(self.d);
        self.regions[t].iter().all(|p| p.contains(x, &mut buf))
    }

    /// `C(x) ∈ {−1, 1}`.
    pub fn classify(&self, x: &[f64]) -> f64 {
        if (0..self.regions.len()).any(|t| self.in_region(t, x)) {
            1.0
        } else {
            -1.0
        }
    }

    fn sample_boundary(&mut self, surface_points: usize) {
        let m = self.d - 1;
        let per_axis = ((surface_points as f64).powf(1.0 / m as f64).floor() as usize).max(2);
        self.surface_spacing = 1.0 / (per_axis - 1) as f64;
        let grid = crate::grid::UnitGrid::new(m, per_axis);
        let mut points = Vec::new();
        let mut buf = Vec::new();
        let mut u = vec![0.0; m];
        for (t, region) in self.regions.iter().enumerate() {
            for piece in region {
                for idx in 0..grid.len() {
                    grid.point_into(idx, &mut u);
                    let level = (piece.g)(&u).max(0.0);
                    if level > 1.0 {
                        continue;
                    }
                    let mut x = Vec::with_capacity(self.d);
                    x.extend_from_slice(&u[..piece.axis]);
                    x.push(level);
                    x.extend_from_slice(&u[piece.axis..]);
                    if self.regions[t].iter().all(|p| p.contains(&x, &mut buf)) {
                        points.push(x);
                    }
                }
            }
        }
        self.boundary = points;
    }

    /// Number of sampled boundary points.
    pub fn boundary_len(&self) -> usize {
        self.boundary.len()
    }

    /// Distance from `x` to the sampled decision boundary (an upper-biased
    /// estimate of `Δ_C(x)`; `+∞` when the boundary is empty).
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        self.boundary
            .iter()
            .map(|b| b.iter().zip(x).map(|(u, v)| (u - v) * (u - v)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }
}

/// One point of the noise and margin curves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    /// Estimate of `P_X(|2η − 1| ≤ t)`.
    pub noise: f64,
    pub noise_half_width: f64,
    /// Estimate of `P_X(Δ_C ≤ t)`.
    pub margin: f64,
    pub margin_half_width: f64,
}

/// Monte Carlo estimates of the noise and margin curves on `t_grid` from
/// `n` draws of `P_X`, with 95% binomial half-widths.
pub fn noise_margin_estimators(p: &DataDistribution, spec: &BoundaryClassifierSpec, t_grid: &[f64], n: usize, seed: u64) -> Vec<CurvePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = vec![vec![0.0; p.d]; n];
    for x in xs.iter_mut() {
        p.sample_x(&mut rng, x);
    }
    let stats: Vec<(f64, f64)> = xs.par_iter().map(|x| ((2.0 * p.eta_at(x) - 1.0).abs(), spec.boundary_distance(x))).collect();
    let nf = n.max(1) as f64;
    let hw = |q: f64| 1.96 * (q * (1.0 - q) / nf).sqrt();
    t_grid
        .iter()
        .map(|&t| {
            let noise = stats.iter().filter(|s| s.0 <= t).count() as f64 / nf;
            let margin = stats.iter().filter(|s| s.1 <= t).count() as f64 / nf;
            CurvePoint { t, noise, noise_half_width: hw(noise), margin, margin_half_width: hw(margin) }
        })
        .collect()
}
