//! The finite family of compositional distributions behind the minimax lower
//! bound, with quadrature certificates for its separation and KL radius.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::bump::{bump_grid_build, BumpGrid};
use super::code::vg_code;
use super::LowerBoundError;
use crate::risk::{j_function, kl_bernoulli, DataDistribution};

/// Shrink factor for the smoothness radius of the inner pieces.
const RADIUS_SHRINK: f64 = 777.0;

/// Parameters of [`hypothesis_family`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FamilyParams {
    pub q_cells: usize,
    pub d: usize,
    pub d_star: usize,
    pub k: usize,
    /// Composition depth `q`.
    pub depth: usize,
    pub beta: f64,
    pub r: f64,
    /// Noise level `A` of the target class.
    pub a: f64,
}

impl FamilyParams {
    /// `1 ∧ β`.
    pub fn w(&self) -> f64 {
        self.beta.min(1.0)
    }

    /// `β·(1 ∧ β)^q`.
    pub fn effective_smoothness(&self) -> f64 {
        self.beta * self.w().powi(self.depth as i32)
    }

    /// `(1 ∧ r)/777`.
    pub fn inner_radius(&self) -> f64 {
        self.r.min(1.0) / RADIUS_SHRINK
    }

    /// `Σ_{k<q} (1 ∧ β)^k`.
    pub fn inner_exponent(&self) -> f64 {
        (0..self.depth).map(|k| self.w().powi(k as i32)).sum()
    }

    /// Sample size above which membership is guaranteed:
    /// `(7/(1 − A))^{(d_* + β(1∧β)^q)/(β(1∧β)^q)}`.
    pub fn n_threshold(&self) -> f64 {
        let e = self.effective_smoothness();
        (7.0 / (1.0 - self.a)).powf((self.d_star as f64 + e) / e)
    }
}

/// `Q = ⌊n^{1/(d_* + β(1∧β)^q)}⌋ + 1`.
pub fn q_for_n(n: usize, d_star: usize, beta: f64, depth: usize) -> usize {
    let e = beta * beta.min(1.0).powi(depth as i32);
    (n as f64).powf(1.0 / (d_star as f64 + e)).floor() as usize + 1
}

/// `M + 1` hypotheses `η_j = ε + h_q ∘ ⋯ ∘ h_1 ∘ h_{0,j}` on `[0,1]^d`.
#[derive(Clone, Debug)]
pub struct HypothesisFamily {
    pub params: FamilyParams,
    /// `M = ⌈2^{Q^{d_*}/8}⌉`.
    pub m: usize,
    pub eps: f64,
    /// Bump fields `f_j` on `[0,1]^{d_*}`.
    pub bumps: Vec<BumpGrid>,
    pub distributions: Vec<DataDistribution>,
    /// Whether `3ε < (1 − A)/2`, so that `|2η_j − 1| > A` everywhere.
    pub membership_ok: bool,
}

impl HypothesisFamily {
    /// Number of hypotheses, `M + 1`.
    pub fn len(&self) -> usize {
        self.distributions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distributions.is_empty()
    }

    /// `s = (2/√(25 d_*))^{d_*}·ε/32`.
    pub fn separation(&self) -> f64 {
        let ds = self.params.d_star as f64;
        (2.0 / (25.0 * ds).sqrt()).powf(ds) * self.eps / 32.0
    }

    /// `η_j` as a function of the first `d_*` coordinates.
    pub fn eta_reduced(&self, j: usize, x: &[f64]) -> f64 {
        staged_eta(&self.params, &self.bumps[j], self.eps, x)
    }
}

/// `g_j = c₁/Q^β + f_j` fed through the composition stage by stage.
fn staged_eta(p: &FamilyParams, bump: &BumpGrid, eps: f64, x: &[f64]) -> f64 {
    let g = bump.amplitude + bump.eval(&x[..p.d_star]);
    if p.depth == 0 {
        return eps + g;
    }
    let c = p.inner_radius();
    let w = p.w();
    // h_{0,j}(x) = (g_j(x_{1..d_*}), 0, …, 0) ∈ [0,1]^K.
    let mut state = vec![0.0; p.k];
    state[0] = g;
    // h_i(y) = (u₀(y_{1..d_*}), 0, …, 0) with u₀(y) = c·|y₁|^w; h_q is scalar.
    for _ in 1..=p.depth {
        let next = c * state[0].abs().powf(w);
        state.iter_mut().for_each(|v| *v = 0.0);
        state[0] = next;
    }
    eps + state[0]
}

/// Builds the hypothesis family for `Q` cells per axis.
pub fn hypothesis_family(q_cells: usize, d: usize, d_star: usize, k: usize, depth: usize, beta: f64, r: f64, a: f64) -> Result<HypothesisFamily, LowerBoundError> {
    let params = FamilyParams { q_cells, d, d_star, k, depth, beta, r, a };
    let bad = |msg: String| Err(LowerBoundError::InvalidParameter(msg));
    if d == 0 || d_star == 0 || k == 0 {
        return bad(format!("dimensions must be positive, got d={d}, d_*={d_star}, K={k}"));
    }
    let cap = if depth == 0 { d } else { d.min(k) };
    if d_star > cap {
        return bad(format!("d_* = {d_star} exceeds min{{d, K + 1_{{q=0}}(d - K)}} = {cap}"));
    }
    if !(0.0..1.0).contains(&a) {
        return bad(format!("A must lie in [0, 1), got {a}"));
    }
    if !(r > 0.0) {
        return bad(format!("r must be positive, got {r}"));
    }
    let cells = q_cells.checked_pow(d_star as u32).filter(|&c| c <= 64);
    let Some(cells) = cells else {
        return bad(format!("Q^d_* must be at most 64 for the code construction, got Q={q_cells}, d_*={d_star}"));
    };
    let m = 2f64.powf(cells as f64 / 8.0).ceil() as usize;
    let code = vg_code(cells.max(2))?;
    let bumps = code.words[..=m]
        .iter()
        .map(|&word| {
            let signs: Vec<i8> = (0..cells).map(|i| if word >> i & 1 == 1 { 1 } else { -1 }).collect();
            bump_grid_build(q_cells, d_star, beta, params.inner_radius(), &signs)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let amplitude = bumps[0].amplitude;
    let eps = 0.5 * params.inner_radius().powf(params.inner_exponent()) * (2.0 * amplitude).powf(params.w().powi(depth as i32));
    let distributions = bumps
        .iter()
        .map(|b| {
            let (b, params) = (b.clone(), params);
            DataDistribution::uniform(d, Arc::new(move |x: &[f64]| staged_eta(&params, &b, eps, x))).with_family("lower-bound")
        })
        .collect();
    Ok(HypothesisFamily { params, m, eps, bumps, distributions, membership_ok: 3.0 * eps < (1.0 - a) / 2.0 })
}

// ── Certificates ──

/// Pairwise entry of a [`SeparationReport`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairSeparation {
    pub i: usize,
    pub j: usize,
    /// Number of cells where the sign assignments differ.
    pub differing_cells: usize,
    /// `∫ J(η_i, η_j) dx`.
    pub integral: f64,
    /// Gap between the last two refinement levels.
    pub slack: f64,
    pub passed: bool,
}

/// Separation and KL certificate for a [`HypothesisFamily`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationReport {
    pub s: f64,
    pub eps: f64,
    pub kl_bound: f64,
    pub n_threshold: f64,
    pub pairs: Vec<PairSeparation>,
    /// `KL(P_j ‖ P_0)` for `j = 1..=M`.
    pub kl: Vec<f64>,
    pub kl_passed: bool,
    pub separation_passed: bool,
    /// Midpoint cells per axis at the final refinement level.
    pub cells_per_axis: usize,
}

/// Midpoint rule on `[0,1]^{dim}` with `per_axis` cells per axis.
fn midpoint(dim: usize, per_axis: usize, g: &(impl Fn(&[f64]) -> f64 + Sync)) -> f64 {
    let total = per_axis.pow(dim as u32);
    let h = 1.0 / per_axis as f64;
    // Fixed chunks reduced in order keep the result independent of the
    // thread count.
    let chunk = 4096;
    let partials: Vec<f64> = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut x = vec![0.0; dim];
            (c * chunk..((c + 1) * chunk).min(total))
                .map(|mut idx| {
                    for v in x.iter_mut().rev() {
                        *v = ((idx % per_axis) as f64 + 0.5) * h;
                        idx /= per_axis;
                    }
                    g(&x)
                })
                .sum::<f64>()
        })
        .collect();
    let sum: f64 = partials.iter().sum();
    sum * h.powi(dim as i32)
}

/// Refines the midpoint rule (doubling cells per axis) until two successive
/// levels agree to `rel_tol` of the fine value, returning `(value, gap, cells)`.
fn refined(dim: usize, start: usize, max_points: usize, rel_tol: f64, g: &(impl Fn(&[f64]) -> f64 + Sync)) -> (f64, f64, usize) {
    let mut cells = start;
    let mut coarse = midpoint(dim, cells, g);
    loop {
        let next = cells * 2;
        if next.pow(dim as u32) > max_points {
            return (coarse, f64::INFINITY, cells);
        }
        let fine = midpoint(dim, next, g);
        let gap = (fine - coarse).abs();
        if gap <= rel_tol * fine.abs() {
            return (fine, gap, next);
        }
        coarse = fine;
        cells = next;
    }
}

/// Certifies `∫ J(η_i, η_j) dx ≥ s − slack` for every pair and
/// `KL(P_j ‖ P_0) ≤ 9ε` for every `j`. Each `η_j` depends on the first `d_*`
/// coordinates only, so both integrals run over `[0,1]^{d_*}`.
pub fn separation_certificate(family: &HypothesisFamily) -> SeparationReport {
    let ds = family.params.d_star;
    let start = 64 * family.params.q_cells;
    let max_points = 1 << 22;
    let rel_tol = 1e-3;
    let s = family.separation();
    let kl_bound = 9.0 * family.eps;
    let mut cells_per_axis = start;
    let n = family.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (integral, slack, cells) = refined(ds, start, max_points, rel_tol, &|x: &[f64]| j_function(family.eta_reduced(i, x), family.eta_reduced(j, x)));
            cells_per_axis = cells_per_axis.max(cells);
            let differing_cells = family.bumps[i].signs.iter().zip(&family.bumps[j].signs).filter(|(a, b)| a != b).count();
            pairs.push(PairSeparation { i, j, differing_cells, integral, slack, passed: slack.is_finite() && integral >= s - slack });
        }
    }
    let kl: Vec<f64> = (1..n)
        .map(|j| {
            let (v, slack, _) = refined(ds, start, max_points, rel_tol, &|x: &[f64]| kl_bernoulli(family.eta_reduced(j, x), family.eta_reduced(0, x)));
            v + slack
        })
        .collect();
    SeparationReport {
        s,
        eps: family.eps,
        kl_bound,
        n_threshold: family.params.n_threshold(),
        separation_passed: pairs.iter().all(|p| p.passed),
        kl_passed: kl.iter().all(|&v| v <= kl_bound),
        pairs,
        kl,
        cells_per_axis,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::UnitGrid;

    fn closed_form(f: &HypothesisFamily, j: usize, x: &[f64]) -> f64 {
        let p = &f.params;
        let g = f.bumps[j].amplitude + f.bumps[j].eval(&x[..p.d_star]);
        f.eps + p.inner_radius().powf(p.inner_exponent()) * g.abs().powf(p.w().powi(p.depth as i32))
    }

    #[test]
    fn staged_composition_matches_closed_form() {
        for (depth, beta, k) in [(0, 1.0, 1), (1, 0.5, 2), (2, 1.5, 3), (3, 0.7, 2)] {
            let f = hypothesis_family(3, 3, 2, k, depth, beta, 2.0, 0.5).unwrap();
            let grid = UnitGrid::new(3, 13);
            for j in 0..f.len() {
                for idx in 0..grid.len() {
                    let x = grid.point(idx);
                    let (a, b) = (f.distributions[j].eta_at(&x), closed_form(&f, j, &x));
                    assert!((a - b).abs() <= 1e-12 * b, "depth {depth}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn ranges_and_membership() {
        let f = hypothesis_family(4, 2, 1, 1, 0, 1.0, 1.0, 0.9).unwrap();
        assert_eq!(f.m, 2);
        assert_eq!(f.len(), 3);
        assert!(f.membership_ok);
        let grid = UnitGrid::new(2, 101);
        for dist in &f.distributions {
            for idx in 0..grid.len() {
                let v = dist.eta_at(&grid.point(idx));
                assert!(v >= f.eps * (1.0 - 1e-12) && v <= 3.0 * f.eps * (1.0 + 1e-12));
                assert!((2.0 * v - 1.0).abs() > 0.9);
            }
        }
    }

    #[test]
    fn invalid_dimensions_are_rejected() {
        assert!(hypothesis_family(4, 3, 3, 2, 1, 1.0, 1.0, 0.5).is_err());
        assert!(hypothesis_family(4, 3, 3, 2, 0, 1.0, 1.0, 0.5).is_ok());
        assert!(hypothesis_family(4, 2, 3, 3, 0, 1.0, 1.0, 0.5).is_err());
        assert!(hypothesis_family(4, 1, 1, 1, 0, 1.0, 1.0, 1.0).is_err());
        assert!(hypothesis_family(9, 2, 2, 2, 0, 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn identical_signs_give_zero_separation() {
        let mut f = hypothesis_family(4, 1, 1, 1, 0, 1.0, 1.0, 0.5).unwrap();
        f.bumps[1] = f.bumps[0].clone();
        let v = midpoint(1, 512, &|x: &[f64]| j_function(f.eta_reduced(0, x), f.eta_reduced(1, x)));
        assert_eq!(v, 0.0);
    }

    #[test]
    fn separation_and_kl_certified() {
        let f = hypothesis_family(4, 1, 1, 1, 0, 1.0, 1.0, 0.5).unwrap();
        let rep = separation_certificate(&f);
        assert!(rep.separation_passed && rep.kl_passed, "{rep:?}");
        assert_eq!(rep.pairs.len(), 3);
        // Independent lower bound: each differing cell contributes at least
        // J(ε, 3ε) times the plateau length 2/(5Q).
        for p in &rep.pairs {
            let floor = p.differing_cells as f64 * j_function(f.eps, 3.0 * f.eps) * 2.0 / 20.0;
            assert!(p.integral >= floor * (1.0 - 1e-3), "{p:?}");
        }
    }

    #[test]
    fn separation_scales_linearly_in_eps() {
        let mut last = 0.0;
        for q in [2usize, 4, 8] {
            let f = hypothesis_family(q, 1, 1, 1, 0, 1.0, 1.0, 0.5).unwrap();
            let ratio = f.separation() / f.eps;
            assert!((ratio - (2.0 / 5.0) / 32.0).abs() < 1e-15);
            // ε shrinks with Q, and s with it.
            assert!(last == 0.0 || f.separation() < last);
            last = f.separation();
        }
    }

    #[test]
    fn q_for_n_matches_definition() {
        // √30 ≈ 5.48, 200^{1/3} ≈ 5.85, 50^{1/(1 + 0.25)} ≈ 22.9.
        assert_eq!(q_for_n(30, 1, 1.0, 0), 6);
        assert_eq!(q_for_n(200, 2, 1.0, 0), 6);
        assert_eq!(q_for_n(50, 1, 0.5, 1), 23);
    }
}
