//! `experiment --config FILE`: oracle-inequality and convergence-rate studies.

use super::{num, CliError, Config, Outcome, RunOptions, Table};
use crate::erm::{canonical_oracle_configs, oracle_mc, rate_experiment, RateConfig, RateFamily, Schedule};

/// Experiment kinds accepted under the `experiment` key.
pub const EXPERIMENTS: [&str; 2] = ["oracle-study", "rate-study"];

/// Runs the experiment described by `cfg`.
pub fn cmd_experiment(cfg: &Config, opts: &RunOptions) -> Result<Outcome, CliError> {
    let kind = cfg.require("experiment")?;
    let (tables, checks, failures) = match kind {
        "oracle-study" => oracle_study(cfg, opts)?,
        "rate-study" => rate_study(cfg, opts)?,
        other => return Err(CliError::InvalidValue { key: "experiment".into(), value: other.into() }),
    };
    let name = cfg.get("name").unwrap_or(kind);
    Ok(Outcome { stem: format!("experiment-{name}"), tables, checks, failures, config_text: cfg.canonical(), files: Vec::new() })
}

type StudyResult = Result<(Vec<Table>, usize, usize), CliError>;

fn oracle_study(cfg: &Config, opts: &RunOptions) -> StudyResult {
    cfg.check_known(&["experiment", "name", "seed", "replications", "configs"])?;
    let replications: usize = cfg.require_parse("replications")?;
    let all = canonical_oracle_configs(replications, opts.seed);
    let wanted: Option<Vec<String>> = cfg.get("configs").filter(|v| *v != "all").map(|v| v.split(',').map(|s| s.trim().to_string()).collect());
    if let Some(w) = &wanted {
        if let Some(bad) = w.iter().find(|n| !all.iter().any(|(c, _)| &c.name == *n)) {
            return Err(CliError::InvalidValue { key: "configs".into(), value: bad.clone() });
        }
    }
    let mut t = Table::new(
        "oracle",
        &["config", "n", "replications", "class_size", "covering_number", "m", "gamma", "psi_integral", "best_class_risk", "lhs", "lhs_half_width", "rhs", "baseline_ok", "variance_ok", "passed"],
    );
    let (mut checks, mut failures) = (0, 0);
    for (c, p) in all.iter().filter(|(c, _)| wanted.as_ref().is_none_or(|w| w.contains(&c.name))) {
        let r = oracle_mc(c, p)?;
        checks += 1;
        failures += usize::from(!r.passed);
        t.push(vec![
            r.name.clone(),
            r.n.to_string(),
            r.replications.to_string(),
            r.class_size.to_string(),
            r.covering_number.to_string(),
            num(r.m),
            num(r.gamma),
            num(r.psi_integral),
            num(r.best_class_risk),
            num(r.lhs),
            num(r.lhs_half_width),
            num(r.rhs),
            r.baseline_ok.to_string(),
            r.variance_ok.to_string(),
            r.passed.to_string(),
        ]);
    }
    Ok((vec![t], checks, failures))
}

/// Rate-study family from its config name.
pub fn parse_family(cfg: &Config) -> Result<RateFamily, CliError> {
    match cfg.require("family")? {
        "sine-1d" => Ok(RateFamily::Sine1d),
        "pairwise-products" => Ok(RateFamily::PairwiseProducts),
        "bump-field" => Ok(RateFamily::BumpField { q: cfg.parse_or("bump_q", 2)?, sign_seed: cfg.parse_or("bump_sign_seed", 1)? }),
        "pure-noise" => Ok(RateFamily::PureNoise { d: cfg.parse_or("noise_d", 1)? }),
        other => Err(CliError::InvalidValue { key: "family".into(), value: other.into() }),
    }
}

fn rate_study(cfg: &Config, opts: &RunOptions) -> StudyResult {
    cfg.check_known(&[
        "experiment", "name", "seed", "family", "n_grid", "replications", "bump_q", "bump_sign_seed", "noise_d", "c_width", "min_width", "max_width", "c_depth", "bound", "steps",
        "step_size", "batch", "restarts", "quad_points",
    ])?;
    let family = parse_family(cfg)?;
    let d = Schedule::default();
    let schedule = Schedule {
        c_width: cfg.parse_or("c_width", d.c_width)?,
        min_width: cfg.parse_or("min_width", d.min_width)?,
        max_width: cfg.parse_or("max_width", d.max_width)?,
        c_depth: cfg.parse_or("c_depth", d.c_depth)?,
        bound: cfg.parse_or("bound", d.bound)?,
        steps: cfg.parse_or("steps", d.steps)?,
        step_size: cfg.parse_or("step_size", d.step_size)?,
        batch: cfg.parse_or("batch", d.batch)?,
        restarts: cfg.parse_or("restarts", d.restarts)?,
    };
    let default_quad = if family.dim() == 1 { 10_000 } else { 50_000 };
    let rc = RateConfig {
        family,
        n_grid: cfg.require_list("n_grid")?,
        replications: cfg.require_parse("replications")?,
        schedule,
        seed: opts.seed,
        quad_points: opts.scaled(cfg.parse_or("quad_points", default_quad)?, 10),
    };
    let (reps, report) = rate_experiment(&rc)?;
    let mut per_rep = Table::new("replications", &["n", "replication", "seed", "width", "depth", "excess_phi", "excess_misclass", "empirical_risk", "opt_gap", "member"]);
    for r in &reps {
        per_rep.push(vec![
            r.n.to_string(),
            r.replication.to_string(),
            r.seed.to_string(),
            r.width.to_string(),
            r.depth.to_string(),
            num(r.excess_phi),
            num(r.excess_misclass),
            num(r.empirical_risk),
            num(r.opt_gap),
            r.member.to_string(),
        ]);
    }
    let mut points = Table::new("points", &["n", "mean_excess_phi", "phi_half_width", "mean_excess_misclass", "misclass_half_width", "mean_opt_gap"]);
    for p in &report.points {
        points.push(vec![p.n.to_string(), num(p.mean_excess_phi), num(p.phi_half_width), num(p.mean_excess_misclass), num(p.misclass_half_width), num(p.mean_opt_gap)]);
    }
    let mut slope = Table::new("slope", &["family", "phi_slope", "phi_slope_std_err", "misclass_slope", "theoretical_slope", "tolerance", "within_tolerance", "note"]);
    slope.push(vec![
        report.family.clone(),
        num(report.phi_slope),
        num(report.phi_slope_std_err),
        num(report.misclass_slope),
        report.theoretical_slope.map(num).unwrap_or_default(),
        num(report.tolerance),
        report.within_tolerance.map(|b| b.to_string()).unwrap_or_default(),
        report.note.clone(),
    ]);
    let (checks, failures) = match report.within_tolerance {
        Some(ok) => (1, usize::from(!ok)),
        None => (0, 0),
    };
    Ok((vec![per_rep, points, slope], checks, failures))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_keys_are_named() {
        let opts = RunOptions::default();
        let e = cmd_experiment(&Config::parse("seed=1").unwrap(), &opts).unwrap_err();
        assert!(e.to_string().contains("experiment"));
        let e = cmd_experiment(&Config::parse("experiment=rate-study\nfamily=sine-1d\nreplications=2").unwrap(), &opts).unwrap_err();
        assert!(e.to_string().contains("n_grid"));
        let e = cmd_experiment(&Config::parse("experiment=oracle-study").unwrap(), &opts).unwrap_err();
        assert!(e.to_string().contains("replications"));
    }

    #[test]
    fn unknown_keys_and_values_rejected() {
        let opts = RunOptions::default();
        assert!(cmd_experiment(&Config::parse("experiment=oracle-study\nreplications=2\nbogus=1").unwrap(), &opts).is_err());
        assert!(cmd_experiment(&Config::parse("experiment=oracle-study\nreplications=2\nconfigs=nope").unwrap(), &opts).is_err());
        assert!(cmd_experiment(&Config::parse("experiment=wat").unwrap(), &opts).is_err());
    }

    #[test]
    fn tiny_rate_study_runs() {
        let cfg = Config::parse("experiment=rate-study\nfamily=sine-1d\nn_grid=32,64,128\nreplications=2\nsteps=50\nquad_points=500").unwrap();
        let o = cmd_experiment(&cfg, &RunOptions { seed: 3, grid_scale: 1.0 }).unwrap();
        assert_eq!(o.tables[0].rows.len(), 6);
        assert_eq!(o.tables[2].rows.len(), 1);
    }
}
