//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! a failure status if any criterion fails. Runs without the libtest harness
//! so the lines always appear.

use std::sync::Arc;
use std::time::{Duration, Instant};

use logitnets::cli::check::cmd_check;
use logitnets::cli::experiment::cmd_experiment;
use logitnets::cli::{Config, Outcome, RunOptions};
use logitnets::constructions::{log_approx, max_net, mult_net, scale_pos_net};
use logitnets::erm::{canonical_oracle_configs, oracle_mc};
use logitnets::lower_bounds::{bump_grid_build, holder_norm_estimate, hypothesis_family, separation_certificate, vg_code};
use logitnets::risk::{j_function, PsiFunction};
use logitnets::{ComplexityBudget, Net, Scratch};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ── Harness ──

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

/// Runs one criterion, enforcing its runtime limit, and prints its line.
fn criterion(id: usize, title: &str, limit: Duration, body: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = body();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let passed = v.passed && in_time;
    println!(
        "criterion {id} [{}] {title}: {} (runtime {:.1}s, limit {}s)",
        if passed { "PASS" } else { "FAIL" },
        v.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    passed
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
}

fn eval(net: &Net, s: &mut Scratch<f64>, x: &[f64]) -> f64 {
    net.evaluate_with(x, s)[0]
}

fn ceil_log2(k: usize) -> u32 {
    usize::BITS - (k - 1).leading_zeros()
}

fn cell(o: &Outcome, table: &str, row: usize, column: &str) -> f64 {
    let t = o.tables.iter().find(|t| t.name == table).expect("table present");
    let c = t.header.iter().position(|h| h == column).expect("column present");
    t.rows[row][c].parse().expect("numeric cell")
}

// ── Criteria ──

fn construction_exactness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut s = Scratch::default();
    let mut worst_max = 0.0f64;
    for k in 1..=16 {
        let net = max_net(k).unwrap();
        let mut x = vec![0.0; k];
        for _ in 0..10_000 {
            x.iter_mut().for_each(|v| *v = rng.gen_range(-10.0..10.0));
            let exact = x.iter().map(|v: &f64| v.abs()).fold(0.0, f64::max);
            worst_max = worst_max.max((eval(&net, &mut s, &x) - exact).abs());
        }
    }
    let mut scale_exact = true;
    for k in 1..=12u32 {
        let net = scale_pos_net(k).unwrap();
        for t in linspace(-8.0, 8.0, 4001) {
            scale_exact &= eval(&net, &mut s, &[t]) == 2f64.powi(k as i32) * t.max(0.0);
        }
    }
    let mut mult_zero = true;
    for eps in [0.5, 0.1, 0.01, 1e-3, 1e-4] {
        let net = mult_net(eps).unwrap();
        for t in linspace(0.0, 1.0, 2001) {
            mult_zero &= eval(&net, &mut s, &[t, 0.0]) == 0.0 && eval(&net, &mut s, &[0.0, t]) == 0.0;
        }
    }
    verdict(
        worst_max <= 1e-12 && scale_exact && mult_zero,
        format!("max_net worst error {worst_max:e} (tol 1e-12), scale exact {scale_exact}, mult(t,0)=mult(0,t)=0 {mult_zero}"),
    )
}

fn log_certificate() -> Verdict {
    let mut s = Scratch::default();
    let mut failures = Vec::new();
    let mut worst_ratio = 0.0f64;
    for a in [0.25, 0.1, 0.01] {
        for eps in [0.5, 0.25, 0.1] {
            let b = 1.0 - a;
            let (net, _) = log_approx(a, b, 1.0, eps).unwrap();
            let err = linspace(a, b, 100_000).map(|t| (eval(&net, &mut s, &[t]) - t.ln()).abs()).fold(0.0, f64::max);
            let (lo, hi) = linspace(-10.0, 10.0, 100_000).map(|t| eval(&net, &mut s, &[t])).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
            worst_ratio = worst_ratio.max(err / eps);
            if !(err <= eps && lo >= a.ln() && hi <= b.ln()) {
                failures.push(format!("(a={a}, eps={eps}): err {err:e}, range [{lo}, {hi}]"));
            }
        }
    }
    verdict(failures.is_empty(), format!("9 cases, worst err/eps {worst_ratio:.3}, failures {failures:?}"))
}

fn complexity_budgets() -> Verdict {
    let mut checked = 0;
    let mut failures = Vec::new();
    let resolution = |d: usize| ((20_000f64.powf(1.0 / d as f64)) as usize).max(2);
    for eps in [0.5, 0.25, 0.1, 0.01, 1e-3, 1e-4] {
        let l = (1.0 / eps as f64).ln();
        let budget = ComplexityBudget::new(15.0 * l, 6.0, 900.0 * l, 1.0, 1.0);
        checked += 1;
        if !mult_net(eps).unwrap().is_member(&budget, resolution(2)) {
            failures.push(format!("mult eps={eps}"));
        }
    }
    for k in 1..=16usize {
        let c = f64::from(ceil_log2(k));
        let budget = ComplexityBudget::new(1.0 + 2.0 * c, 2.0 * k as f64, 26.0 * 2f64.powf(c) - 20.0 - 2.0 * c, 1.0, 1.0);
        checked += 1;
        if !max_net(k).unwrap().is_member(&budget, resolution(k)) {
            failures.push(format!("max k={k}"));
        }
    }
    for k in 1..=12u32 {
        let kf = f64::from(k);
        let budget = ComplexityBudget::new(kf, 2.0, 4.0 * kf, 1.0, f64::INFINITY);
        checked += 1;
        if !scale_pos_net(k).unwrap().is_member(&budget, resolution(1)) {
            failures.push(format!("scale k={k}"));
        }
    }
    verdict(failures.is_empty(), format!("{checked} networks checked, failures {failures:?}"))
}

fn inequality_sweeps() -> Verdict {
    let opts = RunOptions { seed: 11, grid_scale: 1.0 };
    let mut parts = Vec::new();
    let mut ok = true;
    for (suite, min_checks) in [("sandwich", 10_000), ("variance", 10_000), ("J", 50), ("KL", 200), ("calibration", 100)] {
        let o = cmd_check(suite, &opts).unwrap();
        ok &= o.failures == 0 && o.checks >= min_checks;
        parts.push(format!("{suite} {}/{} violations", o.failures, o.checks));
    }
    // Independent spot check of the J sandwich at the endpoints of (0, 1/6].
    for eps in [1e-8, 1.0 / 6.0] {
        let j = j_function(eps, 3.0 * eps);
        ok &= eps / 4.0 < j && j < eps;
    }
    verdict(ok, parts.join(", "))
}

fn oracle_inequality() -> Verdict {
    let configs = canonical_oracle_configs(300, 2024);
    let mut ok = configs.len() == 5;
    let mut parts = Vec::new();
    let (mut truncated, mut margin) = (false, false);
    for (cfg, p) in &configs {
        let r = oracle_mc(cfg, p).unwrap();
        truncated |= r.name.contains("truncated");
        margin |= r.name.contains("margin");
        let holds = r.lhs <= r.rhs + 3.0 * r.lhs_half_width;
        ok &= holds && r.replications == 300 && r.class_size <= 16 && (r.n == 100 || r.n == 400) && r.baseline_ok && r.variance_ok;
        parts.push(format!("{} lhs {:.4}±{:.1e} rhs {:.3e}", r.name, r.lhs, r.lhs_half_width, r.rhs));
    }
    verdict(ok && truncated && margin, parts.join("; "))
}

fn variance_bounds() -> Verdict {
    let o = cmd_check("variance", &RunOptions { seed: 5, grid_scale: 1.0 }).unwrap();
    let integrated = o.tables.iter().find(|t| t.name == "integrated").unwrap();
    let violations = integrated.rows.iter().filter(|r| r.last().map(String::as_str) != Some("true")).count();
    // Both baselines × both η × 20 decision functions.
    let rows_ok = integrated.rows.len() == 80;
    let eta: logitnets::risk::PointFn = Arc::new(|x: &[f64]| x[0]);
    let g_trunc = PsiFunction::truncated(eta.clone(), 0.1).unwrap().gamma();
    let g_margin = PsiFunction::margin(eta, 0.5, 1.0).unwrap().gamma();
    let gammas_ok = (g_trunc - 125_000.0 * 0.1f64.ln().powi(2)).abs() <= 1e-9 * g_trunc && (g_margin - 8.0 / 0.75).abs() <= 1e-12;
    verdict(
        violations == 0 && rows_ok && gammas_ok,
        format!("{} integrated checks, {violations} violations, Γ_trunc {g_trunc:.1}, Γ_margin {g_margin:.4}", integrated.rows.len()),
    )
}

fn run_rate_config(text: &str) -> Outcome {
    let cfg = Config::parse(text).unwrap();
    let seed = cfg.parse_or("seed", 0u64).unwrap();
    cmd_experiment(&cfg, &RunOptions { seed, grid_scale: 1.0 }).unwrap()
}

fn rate_study() -> Verdict {
    let sine = run_rate_config(include_str!("../configs/rate-study.conf"));
    let comp = run_rate_config(include_str!("../configs/rate-compositional.conf"));
    let control = run_rate_config(include_str!("../configs/rate-control.conf"));
    let slope = |o: &Outcome| cell(o, "slope", 0, "phi_slope");
    let (s, c, k) = (slope(&sine), slope(&comp), slope(&control));
    let sine_ok = s < 0.0 && (s + 0.5).abs() <= 0.3;
    let comp_ok = c <= k - 0.05;
    verdict(sine_ok && comp_ok, format!("sine slope {s:.3} (target -0.5±0.3), compositional {c:.3} vs control {k:.3} (need ≥0.05 steeper)"))
}

fn lower_bound_ingredients() -> Verdict {
    // Codes: exhaustive pairwise verification, independent of `certify`.
    let mut codes_ok = true;
    for m in 2..=20usize {
        let c = vg_code(m).unwrap();
        let need = 1.0 + 2f64.powf(m as f64 / 8.0);
        let dist = m.div_ceil(8);
        codes_ok &= c.words.len() as f64 >= need && c.words.iter().all(|w| w >> m == 0);
        for i in 0..c.words.len() {
            for j in i + 1..c.words.len() {
                let d = (0..m).filter(|&b| (c.words[i] >> b & 1) != (c.words[j] >> b & 1)).count();
                codes_ok &= d >= dist;
            }
        }
    }
    // Bumps: exact plateau values and Hölder estimate within r.
    let mut bumps_ok = true;
    let mut worst_holder = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for q in [2usize, 4] {
        for d in [1usize, 2] {
            for beta in [0.5, 1.0, 2.0] {
                let signs: Vec<i8> = (0..q.pow(d as u32)).map(|_| if rng.gen() { 1 } else { -1 }).collect();
                let g = bump_grid_build(q, d, beta, 1.0, &signs).unwrap();
                for k in 0..g.len() {
                    let c: Vec<f64> = g.center(k);
                    let expected = f64::from(signs[k]) * g.c1 / (q as f64).powf(beta);
                    let nudged: Vec<f64> = c.iter().map(|v| v + 0.1 / (q as f64 * (d as f64).sqrt() * 2.0)).collect();
                    bumps_ok &= g.eval(&c) == expected && g.eval(&nudged) == expected;
                }
                let est = holder_norm_estimate(|x: &[f64]| g.eval(x), d, beta, 1000, 3);
                worst_holder = worst_holder.max(est);
                bumps_ok &= est <= 1.0;
            }
        }
    }
    // Hypothesis family Q = 4, d_* = 1, β = 1.
    let fam = hypothesis_family(4, 1, 1, 1, 0, 1.0, 1.0, 0.5).unwrap();
    let rep = separation_certificate(&fam);
    let mut family_ok = fam.membership_ok && rep.separation_passed && rep.kl_passed && !rep.pairs.is_empty();
    // Independent midpoint integration of J on a fine grid.
    let cells = 1 << 14;
    for i in 0..fam.len() {
        for j in i + 1..fam.len() {
            let integral: f64 = (0..cells).map(|c| j_function(fam.eta_reduced(i, &[(c as f64 + 0.5) / cells as f64]), fam.eta_reduced(j, &[(c as f64 + 0.5) / cells as f64]))).sum::<f64>() / cells as f64;
            family_ok &= integral >= rep.s;
        }
    }
    family_ok &= rep.kl.iter().all(|&v| v <= 9.0 * rep.eps);
    verdict(
        codes_ok && bumps_ok && family_ok,
        format!("codes m=2..20 {codes_ok}, bumps {bumps_ok} (largest Hölder estimate {worst_holder:.3e}), family Q=4 {family_ok} ({} words, s {:.3e})", fam.len(), rep.s),
    )
}

fn determinism() -> Verdict {
    let opts = RunOptions { seed: 77, grid_scale: 0.5 };
    let mut identical = true;
    let mut compared = 0;
    let csvs = |o: Outcome| o.tables.iter().map(|t| t.to_csv().unwrap()).collect::<Vec<_>>();
    for suite in ["sandwich", "variance", "calibration", "J", "KL", "covering", "vg", "bump", "separation"] {
        let (a, b) = (cmd_check(suite, &opts).unwrap(), cmd_check(suite, &opts).unwrap());
        let (a, b) = (csvs(a), csvs(b));
        compared += a.len();
        identical &= a == b;
    }
    let rate = "experiment = rate-study\nfamily = sine-1d\nn_grid = 64, 128, 256\nreplications = 2\nsteps = 100\nquad_points = 1000\n";
    let oracle = "experiment = oracle-study\nreplications = 10\n";
    for text in [rate, oracle] {
        let cfg = Config::parse(text).unwrap();
        let (a, b) = (csvs(cmd_experiment(&cfg, &opts).unwrap()), csvs(cmd_experiment(&cfg, &opts).unwrap()));
        compared += a.len();
        identical &= a == b;
    }
    verdict(identical, format!("{compared} CSV tables compared across repeated runs"))
}

// ── Entry point ──

fn main() {
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "construction exactness", secs(10), construction_exactness),
        criterion(2, "log approximation certificate", secs(120), log_certificate),
        criterion(3, "complexity budgets", secs(60), complexity_budgets),
        criterion(4, "inequality sweeps", secs(60), inequality_sweeps),
        criterion(5, "oracle inequality", secs(300), oracle_inequality),
        criterion(6, "variance bounds", secs(60), variance_bounds),
        criterion(7, "rate study", secs(1800), rate_study),
        criterion(8, "lower-bound ingredients", secs(180), lower_bound_ingredients),
        criterion(9, "determinism", secs(300), determinism),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    println!("acceptance: {} of 9 criteria passed", 9 - failed.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
