//! Convergence-rate experiments: train networks on growing samples and fit
//! the slope of log excess risk against log sample size.
//!
//! Results are non-asymptotic and limited by the optimizer; every
//! replication records the optimization gap against the clamped target.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{erm_train, sample, ErmError, TrainConfig};
use crate::constructions::CompositionSpec;
use crate::net::ComplexityBudget;
use crate::risk::{misclass_risk, phi_risk, target_function, DataDistribution, Quadrature};

/// Target distributions used in rate studies. All have uniform marginals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RateFamily {
    /// `η(x) = (1 + sin 2πx)/2` on `[0,1]`, treated as `β = 1`.
    Sine1d,
    /// `η ≡ 1/2` in dimension `d`.
    PureNoise { d: usize },
    /// `η = 0.1 + 0.8·g/6` with `g(x) = Σ_{i<j} x_i x_j` on `[0,1]^4`, the
    /// composite of [`CompositionSpec::sum_of_pairwise_products`].
    PairwiseProducts,
    /// `η = 1/2 + 0.4·Σ_a T(a) Π_i cos²(πQ(x_i − a_i))` on `[0,1]^4` with
    /// random signs `T` on the `Q^4` cell centers: an unstructured smooth
    /// field with values in `[0.1, 0.9]`, treated as `β = 2`.
    BumpField { q: usize, sign_seed: u64 },
}

impl RateFamily {
    pub fn name(&self) -> String {
        match self {
            RateFamily::Sine1d => "sine-1d".into(),
            RateFamily::PureNoise { d } => format!("pure-noise-{d}d"),
            RateFamily::PairwiseProducts => "pairwise-products-4d".into(),
            RateFamily::BumpField { q, .. } => format!("bump-field-4d-q{q}"),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            RateFamily::Sine1d => 1,
            RateFamily::PureNoise { d } => *d,
            RateFamily::PairwiseProducts | RateFamily::BumpField { .. } => 4,
        }
    }

    pub fn distribution(&self) -> DataDistribution {
        let d = self.dim();
        let eta: crate::risk::PointFn = match *self {
            RateFamily::Sine1d => Arc::new(|x: &[f64]| 0.5 * (1.0 + (2.0 * PI * x[0]).sin())),
            RateFamily::PureNoise { .. } => Arc::new(|_: &[f64]| 0.5),
            RateFamily::PairwiseProducts => {
                let spec = CompositionSpec::sum_of_pairwise_products();
                Arc::new(move |x: &[f64]| 0.1 + 0.8 * spec.evaluate(x) / 6.0)
            }
            RateFamily::BumpField { q, sign_seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(sign_seed);
                let cells = q.pow(4);
                let signs: Vec<f64> = (0..cells).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
                Arc::new(move |x: &[f64]| {
                    // Cells tile the cube, so only the cell containing x contributes.
                    let mut idx = 0;
                    let mut bump = 1.0;
                    for &xi in x {
                        let cell = ((xi * q as f64) as usize).min(q - 1);
                        let center = (cell as f64 + 0.5) / q as f64;
                        bump *= (PI * q as f64 * (xi - center)).cos().powi(2);
                        idx = idx * q + cell;
                    }
                    0.5 + 0.4 * signs[idx] * bump
                })
            }
        };
        DataDistribution::uniform(d, eta).with_family(&self.name())
    }

    /// Exponent `ρ` in the theoretical rate `n^{−ρ}` (up to logarithms),
    /// `None` when the Bayes-trivial case has no rate of interest.
    pub fn theoretical_rate(&self) -> Option<f64> {
        match self {
            RateFamily::Sine1d => Some(0.5),
            RateFamily::PureNoise { .. } => None,
            // β·(1∧β)^q / (d_* + β·(1∧β)^q) with β = 2, q = 2, d_* = 2.
            RateFamily::PairwiseProducts => Some(0.5),
            // β/(β + d) with β = 2, d = 4.
            RateFamily::BumpField { .. } => Some(1.0 / 3.0),
        }
    }

    /// Exponent of the width schedule `N ∝ n^{κ}`.
    fn width_exponent(&self) -> f64 {
        match self {
            RateFamily::PureNoise { .. } => 0.0,
            _ => 1.0 - self.theoretical_rate().unwrap_or(0.0),
        }
    }
}

/// Budget schedule. `N = clamp(⌈c_width·n^κ⌉)`, `G = max(2, ⌈c_depth·ln n⌉)`,
/// `F = max(1, ρ·ln n)` and `B = max(bound, F)`, with `κ, ρ` from the family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub c_width: f64,
    pub min_width: usize,
    pub max_width: usize,
    pub c_depth: f64,
    pub bound: f64,
    pub steps: usize,
    pub step_size: f64,
    pub batch: usize,
    pub restarts: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self { c_width: 1.0, min_width: 4, max_width: 32, c_depth: 0.25, bound: 10.0, steps: 4000, step_size: 0.01, batch: 64, restarts: 1 }
    }
}

impl Schedule {
    /// Training configuration for sample size `n`.
    pub fn config(&self, family: &RateFamily, n: usize, seed: u64) -> TrainConfig {
        let ln = (n as f64).ln();
        let width = ((self.c_width * (n as f64).powf(family.width_exponent())).ceil() as usize).clamp(self.min_width.max(3), self.max_width.max(3));
        let depth = ((self.c_depth * ln).ceil() as usize).max(2);
        let clamp = (family.theoretical_rate().unwrap_or(0.5) * ln).max(1.0);
        let budget = ComplexityBudget::new(depth as f64, width as f64, 0.0, self.bound.max(clamp), clamp);
        TrainConfig { budget, steps: self.steps, step_size: self.step_size, batch: self.batch, restarts: self.restarts, seed }.fit_sparsity(family.dim())
    }
}

/// Settings of one rate study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    pub family: RateFamily,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub schedule: Schedule,
    pub seed: u64,
    /// Cells per axis (grid) or draws (Monte Carlo) used to integrate risks.
    pub quad_points: usize,
}

/// One trained replication.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReplication {
    pub n: usize,
    pub replication: usize,
    pub seed: u64,
    pub width: usize,
    pub depth: usize,
    pub excess_phi: f64,
    pub excess_misclass: f64,
    pub empirical_risk: f64,
    /// Empirical risk of the network minus that of the target clamped to
    /// `[−F, F]` on the same sample.
    pub opt_gap: f64,
    pub member: bool,
}

/// Averages at one sample size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatePoint {
    pub n: usize,
    pub mean_excess_phi: f64,
    pub phi_half_width: f64,
    pub mean_excess_misclass: f64,
    pub misclass_half_width: f64,
    pub mean_opt_gap: f64,
}

/// Fitted slopes against the theoretical exponent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub family: String,
    pub points: Vec<RatePoint>,
    pub phi_slope: f64,
    pub phi_slope_std_err: f64,
    pub misclass_slope: f64,
    /// `−ρ` for the family, if any.
    pub theoretical_slope: Option<f64>,
    pub tolerance: f64,
    pub within_tolerance: Option<bool>,
    pub note: String,
}

/// Least-squares slope and its standard error for `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let resid: f64 = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    let se = if n > 2.0 { (resid / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (slope, se)
}

fn quadrature(d: usize, points: usize, seed: u64) -> Quadrature {
    if d == 1 {
        Quadrature::Grid { per_axis: points }
    } else {
        Quadrature::MonteCarlo { n: points, seed }
    }
}

/// Trains `replications` networks per sample size and fits slopes of the
/// mean excess risks. Replications run in parallel and are returned in
/// `(n, replication)` order.
pub fn rate_experiment(cfg: &RateConfig) -> Result<(Vec<RateReplication>, RateReport), ErmError> {
    if cfg.n_grid.len() < 3 {
        return Err(ErmError::InvalidParameter(format!("rate_experiment needs at least 3 sample sizes, got {}", cfg.n_grid.len())));
    }
    if cfg.replications == 0 || cfg.n_grid.iter().any(|&n| n < 2) {
        return Err(ErmError::InvalidParameter("rate_experiment needs replications >= 1 and n >= 2".into()));
    }
    let p = cfg.family.distribution();
    let quad = quadrature(p.d, cfg.quad_points, cfg.seed ^ 0x5eed);
    let jobs: Vec<(usize, usize)> = cfg.n_grid.iter().flat_map(|&n| (0..cfg.replications).map(move |r| (n, r))).collect();
    let reps: Vec<RateReplication> = jobs
        .par_iter()
        .map(|&(n, r)| replicate(cfg, &p, quad, n, r))
        .collect::<Result<_, _>>()?;

    let mut points = Vec::new();
    for &n in &cfg.n_grid {
        let rs: Vec<&RateReplication> = reps.iter().filter(|r| r.n == n).collect();
        let (phi, phw) = mean_ci(rs.iter().map(|r| r.excess_phi));
        let (mis, mhw) = mean_ci(rs.iter().map(|r| r.excess_misclass));
        let (gap, _) = mean_ci(rs.iter().map(|r| r.opt_gap));
        points.push(RatePoint { n, mean_excess_phi: phi, phi_half_width: phw, mean_excess_misclass: mis, misclass_half_width: mhw, mean_opt_gap: gap });
    }
    let ln_n: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let floor = |v: f64| v.max(1e-300).ln();
    let (phi_slope, phi_slope_std_err) = fit_slope(&ln_n, &points.iter().map(|p| floor(p.mean_excess_phi)).collect::<Vec<_>>());
    let (misclass_slope, _) = fit_slope(&ln_n, &points.iter().map(|p| floor(p.mean_excess_misclass)).collect::<Vec<_>>());
    let theoretical_slope = cfg.family.theoretical_rate().map(|r| -r);
    let tolerance = 0.3;
    let report = RateReport {
        family: cfg.family.name(),
        points,
        phi_slope,
        phi_slope_std_err,
        misclass_slope,
        theoretical_slope,
        tolerance,
        within_tolerance: theoretical_slope.map(|t| (phi_slope - t).abs() <= tolerance),
        note: "non-asymptotic desk-scale study; trained by projected Adam, so results are optimizer-limited".into(),
    };
    Ok((reps, report))
}

fn mean_ci(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

fn replicate(cfg: &RateConfig, p: &DataDistribution, quad: Quadrature, n: usize, r: usize) -> Result<RateReplication, ErmError> {
    let seed = cfg.seed ^ ((n as u64) << 32) ^ (r as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let s = sample(p, n, seed);
    let train = cfg.schedule.config(&cfg.family, n, seed);
    let clamp = train.budget.f;
    let (net, report) = erm_train(&s, &train)?;
    let f = |x: &[f64]| net.evaluate_scalar(x).expect("input dimension matches");
    let excess_phi = phi_risk(&f, p, quad).excess;
    let excess_misclass = misclass_risk(&f, p, quad).excess;
    let reference = s.empirical_risk(&|x| target_function(p.eta_at(x)).clamp(-clamp, clamp));
    Ok(RateReplication {
        n,
        replication: r,
        seed,
        width: train.budget.n as usize,
        depth: train.budget.g as usize,
        excess_phi,
        excess_misclass,
        empirical_risk: report.empirical_risk,
        opt_gap: report.empirical_risk - reference,
        member: report.member,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let x: Vec<f64> = (8..14).map(|k| (2f64.powi(k)).ln()).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.3 - 0.5 * v).collect();
        let (s, se) = fit_slope(&x, &y);
        assert!((s + 0.5).abs() < 1e-12 && se < 1e-6);
    }

    #[test]
    fn families_have_values_in_range() {
        for fam in [RateFamily::Sine1d, RateFamily::PureNoise { d: 2 }, RateFamily::PairwiseProducts, RateFamily::BumpField { q: 2, sign_seed: 1 }] {
            let p = fam.distribution();
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let mut x = vec![0.0; p.d];
            for _ in 0..2000 {
                p.sample_x(&mut rng, &mut x);
                let e = (p.eta)(&x);
                assert!((0.0..=1.0).contains(&e));
                if matches!(fam, RateFamily::PairwiseProducts | RateFamily::BumpField { .. }) {
                    assert!((0.1..=0.9).contains(&e), "{fam:?} {e}");
                }
            }
        }
        let p = RateFamily::PairwiseProducts.distribution();
        assert!(((p.eta)(&[1.0; 4]) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn needs_three_sample_sizes() {
        let cfg = RateConfig { family: RateFamily::Sine1d, n_grid: vec![64, 128], replications: 1, schedule: Schedule::default(), seed: 0, quad_points: 1000 };
        assert!(rate_experiment(&cfg).is_err());
    }

    #[test]
    fn pure_noise_excess_shrinks() {
        let schedule = Schedule { steps: 300, ..Schedule::default() };
        let cfg = RateConfig { family: RateFamily::PureNoise { d: 1 }, n_grid: vec![64, 256, 1024, 4096], replications: 4, schedule, seed: 3, quad_points: 2000 };
        let (reps, rep) = rate_experiment(&cfg).unwrap();
        assert_eq!(reps.len(), 16);
        assert!(reps.iter().all(|r| r.member));
        assert!(rep.phi_slope < 0.0, "{rep:?}");
    }
}
