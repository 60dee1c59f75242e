//! `check <suite>`: grid and randomized sweeps over the inequality checkers
//! and lower-bound certificates.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{num, CliError, Outcome, RunOptions, Table};
use crate::lower_bounds::{bump_grid_build, holder_norm_estimate, hypothesis_family, separation_certificate, vg_code, BinaryCode};
use crate::risk::{
    calibration_check, covering_bound, j_function, kl_divergence, sandwich_check, variance_bound_check, variance_ratio_pointwise, DataDistribution, PointFn,
    PsiFunction, Quadrature,
};

/// Suites accepted by `check`.
pub const SUITES: [&str; 9] = ["sandwich", "variance", "calibration", "J", "KL", "covering", "vg", "bump", "separation"];

/// Runs one suite.
pub fn cmd_check(suite: &str, opts: &RunOptions) -> Result<Outcome, CliError> {
    let (tables, checks, failures) = match suite {
        "sandwich" => sandwich(opts)?,
        "variance" => variance(opts)?,
        "calibration" => calibration(opts),
        "J" => j_suite(opts)?,
        "KL" => kl_suite(opts),
        "covering" => covering(opts)?,
        "vg" => vg(opts)?,
        "bump" => bump(opts)?,
        "separation" => separation(opts)?,
        other => return Err(CliError::Usage(format!("unknown check suite `{other}` (expected one of: {})", SUITES.join(", ")))),
    };
    Ok(Outcome { stem: format!("check-{suite}"), tables, checks, failures, config_text: format!("suite={suite}\n"), files: Vec::new() })
}

type SuiteResult = Result<(Vec<Table>, usize, usize), CliError>;

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (n.max(2) - 1) as f64;
    // The last point is pinned to `hi` so rounding cannot leave the range.
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + step * i as f64 })
}

fn rng_for(opts: &RunOptions, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(opts.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

// ── Pointwise inequalities ──

/// `A ≤ (risk gap) ≤ B ≤ |f − logit a|²/8` on an `a × f` grid.
fn sandwich(opts: &RunOptions) -> SuiteResult {
    let (na, nf) = (opts.scaled(100, 2), opts.scaled(100, 2));
    let mut t = Table::new("report", &["a", "cells", "violations", "max_gap_over_eighth"]);
    let (mut checks, mut failures) = (0, 0);
    for a in linspace(0.05, 0.95, na) {
        let (mut bad, mut worst) = (0, 0.0f64);
        for f in linspace(-3.0, 3.0, nf) {
            let logit = (a / (1.0 - a)).ln();
            let r = sandwich_check(a, f, f.min(logit), f.max(logit))?;
            bad += usize::from(!r.passed);
            if r.eighth > 0.0 {
                worst = worst.max(r.middle / r.eighth);
            }
        }
        checks += nf;
        failures += bad;
        t.push(vec![num(a), nf.to_string(), bad.to_string(), num(worst)]);
    }
    Ok((vec![t], checks, failures))
}

/// Pointwise variance ratio with `δ = 0.05`, then the integrated variance
/// conditions for both `ψ` variants on random admissible `f`.
fn variance(opts: &RunOptions) -> SuiteResult {
    let delta = 0.05;
    let band = ((1.0f64 - delta) / delta).ln();
    let (na, nf) = (opts.scaled(100, 2), opts.scaled(100, 2));
    let mut pointwise = Table::new("pointwise", &["a", "cells", "violations", "max_ratio"]);
    let (mut checks, mut failures) = (0, 0);
    for a in linspace(delta, 1.0 - delta, na) {
        let (mut bad, mut worst) = (0, 0.0f64);
        for f in linspace(-band, band, nf) {
            let r = variance_ratio_pointwise(a, f, delta)?;
            bad += usize::from(!r.passed);
            if r.g > 0.0 {
                worst = worst.max(r.h / (r.gamma * r.g));
            }
        }
        checks += nf;
        failures += bad;
        pointwise.push(vec![num(a), nf.to_string(), bad.to_string(), num(worst)]);
    }

    let mut integrated = Table::new("integrated", &["psi", "eta", "case", "gamma", "second_moment", "first_moment", "ratio", "passed"]);
    let etas: [(&str, PointFn); 2] = [("x", Arc::new(|x: &[f64]| x[0])), ("0.8", Arc::new(|_: &[f64]| 0.8))];
    let quad = Quadrature::Grid { per_axis: opts.scaled(2000, 10) };
    let cases = opts.scaled(20, 1);
    for (eta_name, eta) in &etas {
        let psis = [("truncated", PsiFunction::truncated(eta.clone(), 0.1)?), ("margin", PsiFunction::margin(eta.clone(), 0.5, 1.0)?)];
        let p = DataDistribution::uniform(1, eta.clone());
        for (psi_name, psi) in &psis {
            let mut rng = rng_for(opts, 0x7a21 + psi_name.len() as u64 + eta_name.len() as u64);
            let bound = psi.admissible_bound();
            for case in 0..cases {
                let (c0, c1, k, ph): (f64, f64, f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(1..5) as f64, rng.gen_range(0.0..2.0 * PI));
                let s = bound / (c0.abs() + c1.abs()).max(1.0);
                let f = move |x: &[f64]| s * (c0 + c1 * (2.0 * PI * k * x[0] + ph).sin());
                let r = variance_bound_check(psi, &f, &p, quad)?;
                checks += 1;
                failures += usize::from(!r.passed);
                integrated.push(vec![psi_name.to_string(), eta_name.to_string(), case.to_string(), num(r.gamma), num(r.second_moment), num(r.first_moment), num(r.ratio), r.passed.to_string()]);
            }
        }
    }
    Ok((vec![pointwise, integrated], checks, failures))
}

/// `E(f) ≤ 2√2·√(E^φ(f))` on random smooth `(f, η)` pairs in one dimension.
fn calibration(opts: &RunOptions) -> (Vec<Table>, usize, usize) {
    let cases = opts.scaled(100, 1);
    let quad = Quadrature::Grid { per_axis: opts.scaled(2000, 10) };
    let mut rng = rng_for(opts, 0xca1);
    let params: Vec<[f64; 8]> = (0..cases)
        .map(|_| {
            [
                rng.gen_range(0.1..0.6),
                rng.gen_range(1..4) as f64,
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..3.0),
                rng.gen_range(1..5) as f64,
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(-0.2..0.2),
            ]
        })
        .collect();
    let reports: Vec<_> = params
        .par_iter()
        .map(|&[amp, k, ph, c0, c1, m, ps, shift]| {
            let eta = move |x: &[f64]| (0.5 + shift + amp * (2.0 * PI * k * x[0] + ph).sin()).clamp(0.0, 1.0);
            let p = DataDistribution::uniform(1, Arc::new(eta));
            let f = move |x: &[f64]| c0 + c1 * (2.0 * PI * m * x[0] + ps).sin();
            calibration_check(&f, &p, quad)
        })
        .collect();
    let mut t = Table::new("report", &["case", "excess_misclass", "excess_phi", "rhs", "slack", "passed"]);
    let mut failures = 0;
    for (i, r) in reports.iter().enumerate() {
        failures += usize::from(!r.passed);
        t.push(vec![i.to_string(), num(r.excess_misclass), num(r.excess_phi), num(r.rhs), num(r.slack), r.passed.to_string()]);
    }
    (vec![t], cases, failures)
}

/// `ε/4 < J(ε, 3ε) < ε` on an even grid of `(0, 1/6]`.
fn j_suite(opts: &RunOptions) -> SuiteResult {
    let n = opts.scaled(50, 1);
    let mut t = Table::new("report", &["eps", "j", "lower", "upper", "passed"]);
    let mut failures = 0;
    for i in 1..=n {
        let eps = i as f64 / (6.0 * n as f64);
        let r = crate::risk::j_bounds_check(eps)?;
        failures += usize::from(!r.passed);
        t.push(vec![num(eps), num(j_function(eps, 3.0 * eps)), num(eps / 4.0), num(eps), r.passed.to_string()]);
    }
    Ok((vec![t], n, failures))
}

/// `KL(P_{η₁} ‖ P_{η₂}) ≤ 9ε` for random `η₁, η₂` with ranges in `[ε, 3ε]`.
fn kl_suite(opts: &RunOptions) -> (Vec<Table>, usize, usize) {
    let cases = opts.scaled(200, 1);
    let quad = Quadrature::Grid { per_axis: opts.scaled(2000, 10) };
    let mut rng = rng_for(opts, 0x4b1);
    let params: Vec<[f64; 5]> = (0..cases)
        .map(|_| [10f64.powf(rng.gen_range(-4.0..(1.0f64 / 6.0).log10())), rng.gen_range(1..6) as f64, rng.gen_range(0.0..2.0 * PI), rng.gen_range(1..6) as f64, rng.gen_range(0.0..2.0 * PI)])
        .collect();
    let values: Vec<f64> = params
        .par_iter()
        .map(|&[eps, k1, p1, k2, p2]| {
            let p = DataDistribution::uniform(1, Arc::new(move |x: &[f64]| eps * (2.0 + (2.0 * PI * k1 * x[0] + p1).sin())));
            let eta2 = move |x: &[f64]| eps * (2.0 + (2.0 * PI * k2 * x[0] + p2).sin());
            let est = kl_divergence(&p, &eta2, quad);
            est.value + est.half_width
        })
        .collect();
    let mut t = Table::new("report", &["case", "eps", "kl_upper", "bound", "passed"]);
    let mut failures = 0;
    for (i, (pr, kl)) in params.iter().zip(&values).enumerate() {
        let ok = *kl <= 9.0 * pr[0];
        failures += usize::from(!ok);
        t.push(vec![i.to_string(), num(pr[0]), num(*kl), num(9.0 * pr[0]), ok.to_string()]);
    }
    (vec![t], cases, failures)
}

/// Monotonicity of the covering-number bound in each argument.
fn covering(opts: &RunOptions) -> SuiteResult {
    let n = opts.scaled(20, 3);
    let base = (3.0, 8.0, 50.0, 2.0, 0.1, 2usize);
    let mut t = Table::new("report", &["parameter", "value", "bound", "monotone"]);
    let (mut checks, mut failures) = (0, 0);
    let sweeps: [(&str, Box<dyn Fn(f64) -> Result<f64, crate::risk::RiskError>>, f64, f64, bool); 6] = [
        ("G", Box::new(|v| covering_bound(v, base.1, base.2, base.3, base.4, base.5)), 1.0, 20.0, true),
        ("N", Box::new(|v| covering_bound(base.0, v, base.2, base.3, base.4, base.5)), 0.0, 100.0, true),
        ("S", Box::new(|v| covering_bound(base.0, base.1, v, base.3, base.4, base.5)), 0.0, 500.0, true),
        ("B", Box::new(|v| covering_bound(base.0, base.1, base.2, v, base.4, base.5)), 0.0, 50.0, true),
        ("gamma", Box::new(|v| covering_bound(base.0, base.1, base.2, base.3, v, base.5)), 0.001, 0.99, false),
        ("d", Box::new(|v| covering_bound(base.0, base.1, base.2, base.3, base.4, v as usize)), 1.0, n as f64, true),
    ];
    for (name, f, lo, hi, increasing) in &sweeps {
        let values: Vec<f64> = if *name == "d" { (1..=n).map(|v| v as f64).collect() } else { linspace(*lo, *hi, n).collect() };
        let mut prev: Option<f64> = None;
        for v in values {
            let b = f(v)?;
            let ok = match prev {
                None => true,
                Some(p) => {
                    checks += 1;
                    if *increasing {
                        b >= p
                    } else {
                        b <= p
                    }
                }
            };
            failures += usize::from(!ok);
            prev = Some(b);
            t.push(vec![name.to_string(), num(v), num(b), ok.to_string()]);
        }
    }
    Ok((vec![t], checks, failures))
}

// ── Lower-bound ingredients ──

fn bitstring(bits: impl Iterator<Item = bool>) -> String {
    bits.map(|b| if b { '1' } else { '0' }).collect()
}

/// Exhaustive pairwise certification of the codes for `m = 2..=20`.
fn vg(opts: &RunOptions) -> SuiteResult {
    let m_max = opts.scaled(20, 2).min(64);
    let mut t = Table::new("report", &["m", "words", "min_distance", "size_target", "distance_target", "passed"]);
    let mut failures = 0;
    for m in 2..=m_max {
        let c = vg_code(m)?;
        let ok = c.certify();
        failures += usize::from(!ok);
        t.push(vec![m.to_string(), c.words.len().to_string(), c.min_distance.to_string(), num(BinaryCode::size_target(m)), BinaryCode::distance_target(m).to_string(), ok.to_string()]);
    }
    Ok((vec![t], m_max - 1, failures))
}

/// Plateau exactness and the finite-difference Hölder estimate of random
/// bump grids for `(Q, d, β) ∈ {2,4}×{1,2}×{0.5,1,2}` with `r = 1`.
fn bump(opts: &RunOptions) -> SuiteResult {
    let r = 1.0;
    let pairs = opts.scaled(1000, 10);
    let mut t = Table::new("report", &["q", "d", "beta", "r", "c1", "amplitude", "plateau_max_error", "holder_estimate", "passed"]);
    let (mut checks, mut failures) = (0, 0);
    for q in [2usize, 4] {
        for d in [1usize, 2] {
            for beta in [0.5, 1.0, 2.0] {
                let mut rng = rng_for(opts, (q * 100 + d * 10) as u64 + (beta * 2.0) as u64);
                let signs: Vec<i8> = (0..q.pow(d as u32)).map(|_| if rng.gen() { 1 } else { -1 }).collect();
                let g = bump_grid_build(q, d, beta, r, &signs)?;
                let mut plateau = 0.0f64;
                for k in 0..g.len() {
                    let c = g.center(k);
                    let want = f64::from(g.signs[k]) * g.amplitude;
                    plateau = plateau.max((g.eval(&c) - want).abs());
                    for _ in 0..20 {
                        // A random point of the plateau ball B(a, 1/(5Q)).
                        let dir: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
                        let rad = rng.gen_range(0.0..1.0) / (5.0 * q as f64);
                        let x: Vec<f64> = c.iter().zip(&dir).map(|(a, v)| a + rad * v / norm).collect();
                        plateau = plateau.max((g.eval(&x) - want).abs());
                    }
                }
                let est = holder_norm_estimate(|x: &[f64]| g.eval(x), d, beta, pairs, opts.seed ^ 0xb0);
                let ok = plateau == 0.0 && est <= r;
                checks += 1;
                failures += usize::from(!ok);
                t.push(vec![q.to_string(), d.to_string(), num(beta), num(r), num(g.c1), num(g.amplitude), num(plateau), num(est), ok.to_string()]);
            }
        }
    }
    Ok((vec![t], checks, failures))
}

/// Separation and KL certificates for a few small hypothesis families.
fn separation(_opts: &RunOptions) -> SuiteResult {
    // (label, Q, d, d_*, K, q, β, r, A)
    let families: [(&str, usize, usize, usize, usize, usize, f64, f64, f64); 3] =
        [("q4-d1-b1", 4, 1, 1, 1, 0, 1.0, 1.0, 0.5), ("q4-d1-b1-depth1", 4, 2, 1, 1, 1, 1.0, 1.0, 0.5), ("q2-d2-b2", 2, 2, 2, 2, 0, 2.0, 1.0, 0.5)];
    let mut members = Table::new("family", &["family", "j", "signs", "eps", "s", "n_threshold", "membership_ok"]);
    let mut pairs = Table::new("pairs", &["family", "i", "j", "differing_cells", "integral", "s", "slack", "passed"]);
    let mut kls = Table::new("kl", &["family", "j", "kl_upper", "bound", "passed"]);
    let (mut checks, mut failures) = (0, 0);
    for (label, q, d, ds, k, depth, beta, r, a) in families {
        let fam = hypothesis_family(q, d, ds, k, depth, beta, r, a)?;
        let rep = separation_certificate(&fam);
        for (j, b) in fam.bumps.iter().enumerate() {
            members.push(vec![label.into(), j.to_string(), bitstring(b.signs.iter().map(|&s| s > 0)), num(fam.eps), num(rep.s), num(rep.n_threshold), fam.membership_ok.to_string()]);
        }
        checks += 1;
        failures += usize::from(!fam.membership_ok);
        for p in &rep.pairs {
            checks += 1;
            failures += usize::from(!p.passed);
            pairs.push(vec![label.into(), p.i.to_string(), p.j.to_string(), p.differing_cells.to_string(), num(p.integral), num(rep.s), num(p.slack), p.passed.to_string()]);
        }
        for (j, v) in rep.kl.iter().enumerate() {
            let ok = *v <= rep.kl_bound;
            checks += 1;
            failures += usize::from(!ok);
            kls.push(vec![label.into(), (j + 1).to_string(), num(*v), num(rep.kl_bound), ok.to_string()]);
        }
    }
    Ok((vec![members, pairs, kls], checks, failures))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suites_pass() {
        let opts = RunOptions::default();
        for suite in ["J", "covering", "vg", "sandwich"] {
            let o = cmd_check(suite, &opts).unwrap();
            assert!(o.passed() && o.checks > 0, "{suite}: {} failures", o.failures);
        }
    }

    #[test]
    fn unknown_suite_is_usage_error() {
        assert_eq!(cmd_check("nope", &RunOptions::default()).unwrap_err().exit_code(), super::super::EXIT_USAGE);
    }

    #[test]
    fn linspace_pins_endpoint() {
        let v: Vec<f64> = linspace(0.05, 0.95, 100).collect();
        assert_eq!(v.len(), 100);
        assert_eq!(*v.last().unwrap(), 0.95);
        assert_eq!(v[0], 0.05);
    }
}
