//! Monte Carlo check of the oracle inequality for exact ERM over a finite
//! class.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{erm_finite, sample, ErmError};
use crate::grid::{default_resolution, UnitGrid};
use crate::risk::{integrate, logistic_loss, phi_risk, variance_bound_check, DataDistribution, PointFn, PsiFunction, Quadrature};

/// A finite class, a baseline `ψ` and the constants of the inequality.
#[derive(Clone, Debug)]
pub struct OracleStudyConfig {
    pub name: String,
    pub class: Vec<NamedFn>,
    pub psi: PsiFunction,
    /// Covering radius `γ`.
    pub gamma_radius: f64,
    /// `ε ∈ (0, 1)`.
    pub eps: f64,
    pub replications: usize,
    pub n: usize,
    pub seed: u64,
    pub quad: Quadrature,
}

/// A class member with a label used in reports.
#[derive(Clone)]
pub struct NamedFn {
    pub label: String,
    pub f: PointFn,
}

impl std::fmt::Debug for NamedFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.label)
    }
}

impl NamedFn {
    pub fn new(label: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), f: Arc::new(f) }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), move |_| c)
    }
}

/// Outcome of [`oracle_mc`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub name: String,
    pub n: usize,
    pub replications: usize,
    pub class_size: usize,
    /// `∫ ψ dP`.
    pub psi_integral: f64,
    /// `min_f R(f)` over the class.
    pub best_class_risk: f64,
    /// `∫ψ dP ≤ min_f R(f)` up to quadrature slack.
    pub baseline_ok: bool,
    /// Every member passed the variance check with `Γ`.
    pub variance_ok: bool,
    pub m: f64,
    pub gamma: f64,
    pub gamma_radius: f64,
    pub covering_number: usize,
    pub w: f64,
    pub eps: f64,
    /// Mean of `R(f̂_n) − ∫ψ dP` over the replications.
    pub lhs: f64,
    pub lhs_half_width: f64,
    pub rhs: f64,
    pub passed: bool,
}

/// Minimal number of members whose closed sup-norm `γ`-balls cover the
/// class, with centers taken from the class itself. Exhaustive over subsets,
/// so limited to 20 members.
pub fn covering_number_bruteforce(distances: &[Vec<f64>], gamma: f64) -> Result<usize, ErmError> {
    let m = distances.len();
    if m == 0 || m > 20 {
        return Err(ErmError::InvalidParameter(format!("brute-force covering needs 1..=20 members, got {m}")));
    }
    let balls: Vec<u32> = (0..m).map(|c| (0..m).filter(|&j| distances[c][j] <= gamma).fold(0u32, |acc, j| acc | (1 << j))).collect();
    let full = (1u32 << m) - 1;
    let mut best = m;
    for subset in 1u32..=full {
        let size = subset.count_ones() as usize;
        if size >= best {
            continue;
        }
        let covered = (0..m).filter(|&c| subset & (1 << c) != 0).fold(0u32, |acc, c| acc | balls[c]);
        if covered == full {
            best = size;
        }
    }
    Ok(best)
}

/// Pairwise sup-distances between members on a uniform grid.
pub fn sup_distances(class: &[NamedFn], d: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let grid = UnitGrid::new(d, per_axis);
    let values: Vec<Vec<f64>> = class.iter().map(|g| (0..grid.len()).map(|i| (g.f)(&grid.point(i))).collect()).collect();
    let m = class.len();
    let mut out = vec![vec![0.0; m]; m];
    for a in 0..m {
        for b in a + 1..m {
            let dist = values[a].iter().zip(&values[b]).fold(0.0f64, |acc, (u, v)| acc.max((u - v).abs()));
            out[a][b] = dist;
            out[b][a] = dist;
        }
    }
    out
}

/// Right-hand side `80(1+ε)²/ε·Γ log W/n + 20(1+ε)·M log W/n
/// + 20(1+ε)·√γ·√(Γ log W/n) + 4γ + (1+ε)·approx`.
pub fn oracle_rhs(gamma: f64, m: f64, w: f64, n: usize, eps: f64, gamma_radius: f64, approx: f64) -> f64 {
    let lw = w.ln();
    let nf = n as f64;
    80.0 * (1.0 + eps).powi(2) / eps * gamma * lw / nf
        + (20.0 + 20.0 * eps) * m * lw / nf
        + (20.0 + 20.0 * eps) * gamma_radius.sqrt() * (gamma * lw / nf).sqrt()
        + 4.0 * gamma_radius
        + (1.0 + eps) * approx
}

/// Estimates `E[R(f̂_n) − ∫ψ dP]` for exact ERM over the class and compares
/// it with the oracle bound; passes when `LHS ≤ RHS + 3·half-width`.
pub fn oracle_mc(cfg: &OracleStudyConfig, p: &DataDistribution) -> Result<OracleReport, ErmError> {
    if cfg.class.is_empty() || cfg.replications < 2 || cfg.n == 0 {
        return Err(ErmError::InvalidParameter("oracle_mc needs a nonempty class, n >= 1 and at least two replications".into()));
    }
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) || !(cfg.gamma_radius > 0.0) {
        return Err(ErmError::InvalidParameter(format!("oracle_mc needs eps in (0,1) and gamma > 0, got {}, {}", cfg.eps, cfg.gamma_radius)));
    }
    let psi_est = integrate(p, cfg.quad, |x| {
        let eta = p.eta_at(x);
        let w = |weight: f64, v: f64| if weight == 0.0 { 0.0 } else { weight * v };
        w(eta, cfg.psi.value_at(eta, 1.0)) + w(1.0 - eta, cfg.psi.value_at(eta, -1.0))
    });
    let risks: Vec<_> = cfg.class.iter().map(|g| phi_risk(&|x| (g.f)(x), p, cfg.quad)).collect();
    let best_class_risk = risks.iter().map(|r| r.risk).fold(f64::INFINITY, f64::min);
    let quad_slack = psi_est.half_width + risks.iter().map(|r| r.half_width).fold(0.0, f64::max) + 1e-12;
    let baseline_ok = psi_est.value <= best_class_risk + quad_slack;

    let mut variance_ok = true;
    for g in &cfg.class {
        let rep = variance_bound_check(&cfg.psi, &|x| (g.f)(x), p, cfg.quad)?;
        variance_ok &= rep.passed;
    }
    let gamma = cfg.psi.gamma();

    let per_axis = default_resolution(p.d).min(1000);
    let distances = sup_distances(&cfg.class, p.d, per_axis);
    let sup_f = {
        let grid = UnitGrid::new(p.d, per_axis);
        let grid = &grid;
        cfg.class.iter().flat_map(|g| (0..grid.len()).map(move |i| (g.f)(&grid.point(i)).abs())).fold(0.0, f64::max)
    };
    let m = logistic_loss(-sup_f).max(cfg.psi.upper_bound());
    let covering_number = covering_number_bruteforce(&distances, cfg.gamma_radius)?;
    let w = (covering_number as f64).max(3.0);

    let excess: Vec<f64> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let s = sample(p, cfg.n, cfg.seed.wrapping_add(r as u64));
            let fs: Vec<PointFn> = cfg.class.iter().map(|g| g.f.clone()).collect();
            let (idx, _) = erm_finite(&fs, &s).expect("class and sample are nonempty");
            risks[idx].risk - psi_est.value
        })
        .collect();
    let rf = cfg.replications as f64;
    let lhs = excess.iter().sum::<f64>() / rf;
    let var = excess.iter().map(|e| (e - lhs).powi(2)).sum::<f64>() / (rf - 1.0);
    let lhs_half_width = 1.96 * (var / rf).sqrt() + quad_slack;
    let approx = best_class_risk - psi_est.value;
    let rhs = oracle_rhs(gamma, m, w, cfg.n, cfg.eps, cfg.gamma_radius, approx);
    Ok(OracleReport {
        name: cfg.name.clone(),
        n: cfg.n,
        replications: cfg.replications,
        class_size: cfg.class.len(),
        psi_integral: psi_est.value,
        best_class_risk,
        baseline_ok,
        variance_ok,
        m,
        gamma,
        gamma_radius: cfg.gamma_radius,
        covering_number,
        w,
        eps: cfg.eps,
        lhs,
        lhs_half_width,
        rhs,
        passed: baseline_ok && variance_ok && lhs <= rhs + 3.0 * lhs_half_width,
    })
}

/// The five reference configurations: finite classes of at most 16 members,
/// `n ∈ {100, 400}`, `R` replications, both baselines.
pub fn canonical_oracle_configs(replications: usize, seed: u64) -> Vec<(OracleStudyConfig, DataDistribution)> {
    let quad = Quadrature::Grid { per_axis: 2000 };
    let mk = |name: &str, class: Vec<NamedFn>, psi: PsiFunction, n: usize, k: u64| OracleStudyConfig {
        name: name.into(),
        class,
        psi,
        gamma_radius: 0.05,
        eps: 0.5,
        replications,
        n,
        seed: seed.wrapping_add(k * 1_000_003),
        quad,
    };
    let lin = |c: f64| NamedFn::new(format!("{c}*(2x-1)"), move |x| c * (2.0 * x[0] - 1.0));
    let levels = |lo: f64, hi: f64, k: usize| (0..k).map(move |i| lo + (hi - lo) * i as f64 / (k - 1) as f64);

    let mut out = Vec::new();

    let p = DataDistribution::uniform(1, Arc::new(|_: &[f64]| 0.8)).with_family("const-0.8");
    let psi = PsiFunction::truncated(p.eta.clone(), 0.1).expect("valid delta0");
    out.push((mk("two-constants-truncated", vec![NamedFn::constant(-1.0), NamedFn::constant(1.0)], psi, 100, 0), p));

    let p = DataDistribution::uniform(1, Arc::new(|x: &[f64]| x[0])).with_family("identity");
    let psi = PsiFunction::truncated(p.eta.clone(), 0.1).expect("valid delta0");
    let class: Vec<NamedFn> = levels(-2.0, 2.0, 8).map(NamedFn::constant).chain(levels(-2.0, 2.0, 8).map(lin)).collect();
    out.push((mk("constants-and-lines-truncated", class, psi, 400, 1), p));

    let p = DataDistribution::uniform(1, Arc::new(|x: &[f64]| 0.5 + 0.4 * (2.0 * std::f64::consts::PI * x[0]).sin())).with_family("sine");
    let psi = PsiFunction::truncated(p.eta.clone(), 0.05).expect("valid delta0");
    let class: Vec<NamedFn> = levels(0.0, 2.5, 12).map(|c| NamedFn::new(format!("{c}*sin"), move |x| c * (2.0 * std::f64::consts::PI * x[0]).sin())).collect();
    out.push((mk("sine-multiples-truncated", class, psi, 100, 2), p));

    let p = DataDistribution::uniform(1, Arc::new(|_: &[f64]| 0.8)).with_family("const-0.8");
    let psi = PsiFunction::margin(p.eta.clone(), 0.5, 1.0).expect("valid margin parameters");
    out.push((mk("constants-margin", levels(-1.0, 1.0, 9).map(NamedFn::constant).collect(), psi, 400, 3), p));

    let p = DataDistribution::uniform(1, Arc::new(|x: &[f64]| if x[0] < 0.5 { 0.15 } else { 0.85 })).with_family("step");
    let f0 = 0.6;
    let psi = PsiFunction::margin(p.eta.clone(), 0.3, f0).expect("valid margin parameters");
    let class: Vec<NamedFn> = (0..8)
        .flat_map(|k| {
            let t = k as f64 / 7.0;
            [1.0, -1.0].map(move |s| NamedFn::new(format!("{s}*step@{t:.3}"), move |x| if x[0] >= t { s * f0 } else { -s * f0 }))
        })
        .collect();
    out.push((mk("steps-margin", class, psi, 100, 4), p));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covering_bruteforce_examples() {
        // Points 0, 0.1, 0.2, 1.0 on a line: radius 0.1 needs the middle one and 1.0.
        let pts = [0.0, 0.1, 0.2, 1.0];
        let dist: Vec<Vec<f64>> = pts.iter().map(|a| pts.iter().map(|b| f64::abs(a - b)).collect()).collect();
        assert_eq!(covering_number_bruteforce(&dist, 0.1).unwrap(), 2);
        assert_eq!(covering_number_bruteforce(&dist, 0.05).unwrap(), 4);
        assert_eq!(covering_number_bruteforce(&dist, 1.0).unwrap(), 1);
    }

    #[test]
    fn rhs_formula_by_hand() {
        let (g, m, w, n, e, r, a) = (2.0, 3.0, 5.0, 100, 0.5, 0.04, 0.1);
        let lw = 5f64.ln();
        let hand = 80.0 * 2.25 / 0.5 * 2.0 * lw / 100.0 + 30.0 * 3.0 * lw / 100.0 + 30.0 * 0.2 * (2.0 * lw / 100.0).sqrt() + 0.16 + 1.5 * 0.1;
        assert!((oracle_rhs(g, m, w, n, e, r, a) - hand).abs() < 1e-12);
    }

    #[test]
    fn two_constants_example_holds() {
        let (mut cfg, p) = canonical_oracle_configs(500, 1).remove(0);
        cfg.n = 200;
        let rep = oracle_mc(&cfg, &p).unwrap();
        assert!(rep.passed && rep.baseline_ok && rep.variance_ok, "{rep:?}");
        assert_eq!(rep.covering_number, 2);
        assert!(rep.rhs >= rep.lhs);
    }

    #[test]
    fn singleton_class_is_approximation_only() {
        let p = DataDistribution::uniform(1, Arc::new(|x: &[f64]| 0.2 + 0.6 * x[0]));
        let psi = PsiFunction::truncated(p.eta.clone(), 0.1).unwrap();
        let f = NamedFn::new("clipped target", |x| crate::risk::target_function(0.2 + 0.6 * x[0]).clamp(-2.0, 2.0));
        let cfg = OracleStudyConfig { name: "single".into(), class: vec![f], psi, gamma_radius: 0.05, eps: 0.5, replications: 50, n: 100, seed: 0, quad: Quadrature::Grid { per_axis: 2000 } };
        let rep = oracle_mc(&cfg, &p).unwrap();
        assert!(rep.passed);
        assert!((rep.lhs - (rep.best_class_risk - rep.psi_integral)).abs() < 1e-12);
    }
}
