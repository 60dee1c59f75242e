//! Data distributions `P_{η,Q}` on `[0,1]^d × {−1, 1}` and quadrature over
//! the input marginal.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::RiskError;
use crate::grid::MidpointGrid;

/// Pointwise function on `[0,1]^d`.
pub type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Input marginal `Q`.
#[derive(Clone, Debug, PartialEq)]
pub enum Marginal {
    /// Lebesgue measure on `[0,1]^d`.
    Uniform,
    /// Finitely many points with weights summing to one.
    Discrete { points: Vec<Vec<f64>>, weights: Vec<f64> },
}

/// Conditional probability `η` together with the input marginal.
#[derive(Clone)]
pub struct DataDistribution {
    pub d: usize,
    pub eta: PointFn,
    pub marginal: Marginal,
    /// Optional family label such as `H1`.
    pub family: Option<String>,
}

impl fmt::Debug for DataDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DataDistribution").field("d", &self.d).field("marginal", &self.marginal).field("family", &self.family).finish()
    }
}

impl DataDistribution {
    /// Uniform marginal on `[0,1]^d`.
    pub fn uniform(d: usize, eta: PointFn) -> Self {
        Self { d, eta, marginal: Marginal::Uniform, family: None }
    }

    /// Finite marginal; weights must be nonnegative and sum to one.
    pub fn discrete(d: usize, eta: PointFn, points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self, RiskError> {
        if points.len() != weights.len() || points.is_empty() {
            return Err(RiskError::InvalidParameter("discrete marginal needs matching nonempty points and weights".into()));
        }
        if points.iter().any(|p| p.len() != d) {
            return Err(RiskError::InvalidParameter(format!("discrete marginal points must have dimension {d}")));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(RiskError::InvalidParameter(format!("weights must be nonnegative and sum to 1, got {total}")));
        }
        Ok(Self { d, eta, marginal: Marginal::Discrete { points, weights }, family: None })
    }

    pub fn with_family(mut self, tag: &str) -> Self {
        self.family = Some(tag.to_string());
        self
    }

    /// `η(x)` clamped into `[0, 1]`.
    pub fn eta_at(&self, x: &[f64]) -> f64 {
        (self.eta)(x).clamp(0.0, 1.0)
    }

    /// Draws `x ~ Q`.
    pub fn sample_x(&self, rng: &mut impl Rng, out: &mut [f64]) {
        match &self.marginal {
            Marginal::Uniform => out.iter_mut().for_each(|v| *v = rng.gen::<f64>()),
            Marginal::Discrete { points, weights } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut pick = points.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                out.copy_from_slice(&points[pick]);
            }
        }
    }
}

/// How integrals over `Q` are approximated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Quadrature {
    /// Composite midpoint rule with `per_axis` cells per axis.
    Grid { per_axis: usize },
    /// Monte Carlo with `n` draws, jittered along the first axis.
    MonteCarlo { n: usize, seed: u64 },
}

impl Quadrature {
    /// Midpoint grid for `d ≤ 2` (10⁴ cells in total), Monte Carlo otherwise.
    pub fn default_for(d: usize) -> Self {
        match d {
            1 => Quadrature::Grid { per_axis: 10_000 },
            2 => Quadrature::Grid { per_axis: 100 },
            _ => Quadrature::MonteCarlo { n: 100_000, seed: 0 },
        }
    }
}

/// Integral estimate with an error indicator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// For Monte Carlo the 95% half-width `1.96·σ/√n`; for grids the change
    /// against the grid with half the resolution; zero for discrete marginals.
    pub half_width: f64,
}

/// `∫ g dQ` for several integrands at once, sharing the evaluation points.
pub fn integrate_many<const K: usize>(
    p: &DataDistribution,
    quad: Quadrature,
    g: impl Fn(&[f64]) -> [f64; K] + Sync,
) -> [Estimate; K] {
    match &p.marginal {
        Marginal::Discrete { points, weights } => {
            let mut acc = [0.0; K];
            for (x, &w) in points.iter().zip(weights) {
                let v = g(x);
                for k in 0..K {
                    if w != 0.0 {
                        acc[k] += w * v[k];
                    }
                }
            }
            acc.map(|value| Estimate { value, half_width: 0.0 })
        }
        Marginal::Uniform => match quad {
            Quadrature::Grid { per_axis } => {
                let fine = grid_sum(p.d, per_axis.max(2), &g);
                let coarse = grid_sum(p.d, (per_axis / 2).max(1), &g);
                let mut out = [Estimate { value: 0.0, half_width: 0.0 }; K];
                for k in 0..K {
                    out[k] = Estimate { value: fine[k], half_width: (fine[k] - coarse[k]).abs() };
                }
                out
            }
            Quadrature::MonteCarlo { n, seed } => monte_carlo(p.d, n.max(2), seed, &g),
        },
    }
}

/// `∫ g dQ`.
pub fn integrate(p: &DataDistribution, quad: Quadrature, g: impl Fn(&[f64]) -> f64 + Sync) -> Estimate {
    integrate_many(p, quad, |x| [g(x)])[0]
}

fn grid_sum<const K: usize>(d: usize, per_axis: usize, g: &(impl Fn(&[f64]) -> [f64; K] + Sync)) -> [f64; K] {
    let grid = MidpointGrid::new(d, per_axis);
    let w = grid.weight();
    // Fixed chunks summed in order keep the result independent of how rayon
    // splits the work.
    const CHUNK: usize = 4096;
    let parts: Vec<[f64; K]> = (0..grid.len().div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut x = vec![0.0; d];
            let mut acc = [0.0; K];
            for i in c * CHUNK..((c + 1) * CHUNK).min(grid.len()) {
                grid.point_into(i, &mut x);
                let v = g(&x);
                for k in 0..K {
                    acc[k] += v[k];
                }
            }
            acc
        })
        .collect();
    let mut sums = [0.0; K];
    for part in &parts {
        for k in 0..K {
            sums[k] += part[k];
        }
    }
    sums.map(|s| s * w)
}

fn monte_carlo<const K: usize>(d: usize, n: usize, seed: u64, g: &(impl Fn(&[f64]) -> [f64; K] + Sync)) -> [Estimate; K] {
    const CHUNK: usize = 4096;
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<([f64; K], [f64; K])> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut x = vec![0.0; d];
            let (mut s, mut s2) = ([0.0; K], [0.0; K]);
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                for v in x.iter_mut() {
                    *v = rng.gen::<f64>();
                }
                x[0] = (i as f64 + x[0]) / n as f64;
                let v = g(&x);
                for k in 0..K {
                    s[k] += v[k];
                    s2[k] += v[k] * v[k];
                }
            }
            (s, s2)
        })
        .collect();
    let mut out = [Estimate { value: 0.0, half_width: 0.0 }; K];
    for k in 0..K {
        let s: f64 = parts.iter().map(|p| p.0[k]).sum();
        let s2: f64 = parts.iter().map(|p| p.1[k]).sum();
        let mean = s / n as f64;
        let var = ((s2 / n as f64) - mean * mean).max(0.0) * n as f64 / (n as f64 - 1.0);
        out[k] = Estimate { value: mean, half_width: 1.96 * (var / n as f64).sqrt() };
    }
    out
}
