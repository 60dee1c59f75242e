//! `build <kind> key=value…`: construct a network, certify it and serialize it.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{num, CliError, Config, Outcome, RunOptions, Table};
use crate::constructions::{
    clip_net, compositional_approx, hat_budget, hat_net, hat_value, holder_approx, log_approx_with, max_budget, max_net, mult_budget, mult_net, scale_budget,
    scale_pos_net, sup_error_1d, sup_error_grid, truncated_target_net, CompositionSpec, ErrorCertificate,
};
use crate::grid::UnitGrid;
use crate::{ComplexityBudget, Net, Scratch};

/// Construction kinds accepted by `build`.
pub const KINDS: [&str; 9] = ["scale", "max", "mult", "hat", "holder", "log", "clip", "trunc-target", "compositional"];

/// Named targets for `holder` and `trunc-target`.
pub const TARGETS: [&str; 3] = ["sine", "product", "quadratic"];

/// Target function on `[0,1]^d` by name.
pub fn named_target(name: &str) -> Result<fn(&[f64]) -> f64, CliError> {
    fn sine(x: &[f64]) -> f64 {
        0.5 * (1.0 + (2.0 * PI * x[0]).sin())
    }
    fn product(x: &[f64]) -> f64 {
        x.iter().product()
    }
    fn quadratic(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
    }
    match name {
        "sine" => Ok(sine),
        "product" => Ok(product),
        "quadratic" => Ok(quadratic),
        other => Err(CliError::Usage(format!("unknown target `{other}` (expected one of: {})", TARGETS.join(", ")))),
    }
}

fn certificate_table(certs: &[ErrorCertificate]) -> Table {
    let mut t = Table::new("certificate", &ErrorCertificate::CSV_HEADER);
    for c in certs {
        let [a, b, g, _, _, p] = c.csv_record();
        t.push(vec![a, b, g, num(c.measured_sup_error), num(c.claimed_bound), p]);
    }
    t
}

/// Budget membership recorded as a certificate row.
fn budget_certificate(kind: &str, params: &str, net: &Net, budget: &ComplexityBudget, opts: &RunOptions) -> ErrorCertificate {
    let d = net.input_dim();
    let res = ((opts.scaled(20_000, 16) as f64).powf(1.0 / d as f64).floor() as usize).max(2);
    let stats = net.complexity();
    let member = net.is_member(budget, res);
    let domain = format!(
        "budget G={} N={} S={} B={} F={} vs measured G={} N={} S={} B={}",
        num(budget.g),
        num(budget.n),
        num(budget.s),
        num(budget.b),
        num(budget.f),
        stats.depth_g,
        stats.width_n,
        stats.nnz_s,
        num(stats.param_bound_b)
    );
    let mut c = ErrorCertificate::new(&format!("{kind}-budget"), params.to_string(), domain, res.pow(d as u32), if member { 0.0 } else { 1.0 }, 0.0);
    c.passed = member;
    c
}

/// Builds the requested network and its certificates.
pub fn cmd_build(kind: &str, cfg: &Config, opts: &RunOptions) -> Result<Outcome, CliError> {
    let mut certs = Vec::new();
    let net: Net = match kind {
        "scale" => {
            cfg.check_known(&["k"])?;
            let k: u32 = cfg.require_parse("k")?;
            let net = scale_pos_net(k)?;
            let factor = 2f64.powi(k as i32);
            let n = opts.scaled(10_001, 2);
            let err = sup_error_1d(&net, |t| factor * t.max(0.0), -4.0, 4.0, n);
            let params = format!("k={k}");
            certs.push(ErrorCertificate::new("scale", params.clone(), "[-4,4]".into(), n, err, 0.0));
            certs.push(budget_certificate("scale", &params, &net, &scale_budget(k), opts));
            net
        }
        "max" => {
            cfg.check_known(&["k"])?;
            let k: usize = cfg.require_parse("k")?;
            let net = max_net(k)?;
            let n = opts.scaled(10_000, 1);
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut scratch = Scratch::default();
            let mut err = 0.0f64;
            let mut x = vec![0.0; k];
            for _ in 0..n {
                x.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
                let exact = x.iter().fold(0.0f64, |m, v| m.max(f64::abs(*v)));
                err = err.max((net.evaluate_with(&x, &mut scratch)[0] - exact).abs());
            }
            let params = format!("k={k}");
            certs.push(ErrorCertificate::new("max", params.clone(), format!("{n} random points of [-1,1]^{k}"), n, err, 1e-12));
            certs.push(budget_certificate("max", &params, &net, &max_budget(k), opts));
            net
        }
        "mult" => {
            cfg.check_known(&["eps"])?;
            let eps: f64 = cfg.require_parse("eps")?;
            let net = mult_net(eps)?;
            let per_axis = opts.scaled(201, 3);
            let err = sup_error_grid(&net, |x| x[0] * x[1], &UnitGrid::new(2, per_axis));
            let params = format!("eps={}", num(eps));
            certs.push(ErrorCertificate::new("mult", params.clone(), "[0,1]^2".into(), per_axis * per_axis, err, eps));
            let n = opts.scaled(1001, 2);
            let mut s = Scratch::default();
            let zero_err = (0..n)
                .map(|i| {
                    let t = i as f64 / (n - 1) as f64;
                    net.evaluate_with(&[t, 0.0], &mut s)[0].abs().max(net.evaluate_with(&[0.0, t], &mut s)[0].abs())
                })
                .fold(0.0, f64::max);
            certs.push(ErrorCertificate::new("mult-zero-boundary", params.clone(), "{0}x[0,1] and [0,1]x{0}".into(), 2 * n, zero_err, 0.0));
            certs.push(budget_certificate("mult", &params, &net, &mult_budget(eps), opts));
            net
        }
        "hat" => {
            cfg.check_known(&["k", "i"])?;
            let (k, i_max): (u32, u32) = (cfg.require_parse("k")?, cfg.require_parse("i")?);
            let net = hat_net(k, i_max)?;
            let n = opts.scaled(100_001, 2);
            let err = sup_error_1d(&net, |t| hat_value(k, t), -0.5, 1.5, n);
            let params = format!("k={k};i={i_max}");
            certs.push(ErrorCertificate::new("hat", params.clone(), "[-0.5,1.5]".into(), n, err, 1e-12));
            certs.push(budget_certificate("hat", &params, &net, &hat_budget(i_max), opts));
            net
        }
        "holder" => {
            cfg.check_known(&["target", "d", "beta", "r", "eps"])?;
            let name = cfg.require("target")?;
            let f = named_target(name)?;
            let d: usize = cfg.parse_or("d", 1)?;
            let (beta, r, eps): (f64, f64, f64) = (cfg.parse_or("beta", 1.0)?, cfg.parse_or("r", 8.0)?, cfg.require_parse("eps")?);
            let (net, rep) = holder_approx(&f, d, beta, r, eps)?;
            let mut c = rep.certificate.clone();
            c.params = format!("target={name};{}", c.params);
            certs.push(c);
            net
        }
        "log" => {
            cfg.check_known(&["a", "b", "alpha", "eps"])?;
            let a: f64 = cfg.require_parse("a")?;
            let b: f64 = cfg.parse_or("b", 1.0 - a)?;
            let alpha: f64 = cfg.parse_or("alpha", 1.0)?;
            let eps: f64 = cfg.require_parse("eps")?;
            let (net, rep) = log_approx_with(a, b, alpha, eps, opts.scaled(100_000, 2))?;
            certs.push(rep.certificate.clone());
            let (lo, hi) = rep.range_seen;
            let params = rep.certificate.params.clone();
            let overshoot = (a.ln() - lo).max(hi - b.ln()).max(0.0);
            let mut range = ErrorCertificate::new("log-range", params, format!("[-10,10] seen [{}, {}]", num(lo), num(hi)), 0, overshoot, 0.0);
            range.passed = rep.range_ok;
            certs.push(range);
            net
        }
        "clip" => {
            cfg.check_known(&["lo", "hi"])?;
            let (lo, hi): (f64, f64) = (cfg.require_parse("lo")?, cfg.require_parse("hi")?);
            let net = clip_net(lo, hi)?;
            let n = opts.scaled(10_001, 2);
            let err = sup_error_1d(&net, |t| t.clamp(lo, hi), lo - 1.0, hi + 1.0, n);
            let tol = 4.0 * f64::EPSILON * (1.0 + lo.abs().max(hi.abs()));
            certs.push(ErrorCertificate::new("clip", format!("lo={};hi={}", num(lo), num(hi)), format!("[{},{}]", num(lo - 1.0), num(hi + 1.0)), n, err, tol));
            net
        }
        "trunc-target" => {
            cfg.check_known(&["target", "delta", "alpha", "beta", "r"])?;
            let name = cfg.require("target")?;
            let f = named_target(name)?;
            let delta: f64 = cfg.require_parse("delta")?;
            let alpha: f64 = cfg.parse_or("alpha", 2.0)?;
            let (beta, r): (f64, f64) = (cfg.parse_or("beta", 2.0)?, cfg.parse_or("r", 8.0)?);
            let eta_eps = delta * delta / 8.0;
            let (eta_net, _) = holder_approx(&f, 1, beta, r, eta_eps)?;
            let tt = truncated_target_net(&eta_net, delta, alpha)?;
            let n = opts.scaled(10_001, 2);
            let logit = |t: f64| {
                let e = f(&[t]).clamp(delta, 1.0 - delta);
                (e / (1.0 - e)).ln()
            };
            let err = sup_error_1d(&tt.net, logit, 0.0, 1.0, n);
            // Each logarithm is within δ and 1/δ-Lipschitz on [δ, 1−δ].
            let claimed = 2.0 * delta + 2.0 * eta_eps / delta;
            let params = format!("target={name};delta={};alpha={}", num(delta), num(alpha));
            certs.push(ErrorCertificate::new("trunc-target", params, "[0,1]".into(), n, err, claimed));
            tt.net
        }
        "compositional" => {
            cfg.check_known(&["spec", "eps"])?;
            let spec = match cfg.require("spec")? {
                "sum-pairs" => CompositionSpec::sum_of_pairwise_products(),
                "max-pairs" => CompositionSpec::max_of_pairwise_products(),
                other => return Err(CliError::InvalidValue { key: "spec".into(), value: other.into() }),
            };
            let eps: f64 = cfg.require_parse("eps")?;
            let (net, rep) = compositional_approx(&spec, eps)?;
            certs.push(rep.certificate.clone());
            net
        }
        other => return Err(CliError::Usage(format!("unknown build kind `{other}` (expected one of: {})", KINDS.join(", ")))),
    };
    let failures = certs.iter().filter(|c| !c.passed).count();
    Ok(Outcome {
        stem: format!("build-{kind}"),
        checks: certs.len(),
        failures,
        tables: vec![certificate_table(&certs)],
        files: vec![("net.json".into(), net.to_json())],
        config_text: cfg.canonical(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(kind: &str, params: &[&str]) -> Outcome {
        cmd_build(kind, &Config::from_pairs(params).unwrap(), &RunOptions::default()).unwrap()
    }

    #[test]
    fn exact_constructions_pass() {
        for (kind, params) in [("max", vec!["k=8"]), ("scale", vec!["k=3"]), ("clip", vec!["lo=-1", "hi=2"]), ("hat", vec!["k=1", "i=3"])] {
            let o = build(kind, &params);
            assert!(o.passed(), "{kind}: {:?}", o.tables[0].rows);
        }
    }

    #[test]
    fn log_certificate_passes() {
        let o = build("log", &["a=0.01", "b=0.99", "eps=0.1"]);
        assert!(o.passed(), "{:?}", o.tables[0].rows);
        assert_eq!(o.checks, 2);
    }

    #[test]
    fn mult_has_zero_boundary_row() {
        let o = build("mult", &["eps=0.01"]);
        assert!(o.passed());
        assert!(o.tables[0].rows.iter().any(|r| r[0] == "mult-zero-boundary" && r[3] == "0"));
    }

    #[test]
    fn bad_kind_and_missing_key() {
        let cfg = Config::default();
        assert_eq!(cmd_build("wat", &cfg, &RunOptions::default()).unwrap_err().exit_code(), super::super::EXIT_USAGE);
        let e = cmd_build("log", &Config::from_pairs(&["a=0.1"]).unwrap(), &RunOptions::default()).unwrap_err();
        assert!(e.to_string().contains("eps"));
    }
}
