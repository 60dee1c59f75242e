//! Command-line entry points: `build`, `check` and `experiment`, each
//! writing CSV tables and a JSON run manifest.

pub mod build;
pub mod check;
pub mod config;
pub mod experiment;
pub mod manifest;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::Config;
pub use manifest::{RunManifest, Table};

/// All checks passed.
pub const EXIT_OK: i32 = 0;
/// Any internal failure such as an unwritable output directory.
pub const EXIT_INTERNAL: i32 = 1;
/// At least one check failed.
pub const EXIT_CHECK_FAILED: i32 = 2;
/// Bad command line or configuration.
pub const EXIT_USAGE: i32 = 64;

/// Environment variable consulted when `--jobs` is absent.
pub const JOBS_ENV: &str = "LOGITNETS_JOBS";

/// Errors raised by the command-line layer.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("missing config key `{0}`")]
    MissingKey(String),
    #[error("invalid value `{value}` for key `{key}`")]
    InvalidValue { key: String, value: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::MissingKey(_) | CliError::InvalidValue { .. } => EXIT_USAGE,
            CliError::Io(_) | CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<crate::constructions::ConstructionError> for CliError {
    fn from(e: crate::constructions::ConstructionError) -> Self {
        match e {
            crate::constructions::ConstructionError::InvalidParameter(m) => CliError::Usage(m),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<crate::risk::RiskError> for CliError {
    fn from(e: crate::risk::RiskError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<crate::erm::ErmError> for CliError {
    fn from(e: crate::erm::ErmError) -> Self {
        match e {
            crate::erm::ErmError::InvalidParameter(m) => CliError::Usage(m),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<crate::lower_bounds::LowerBoundError> for CliError {
    fn from(e: crate::lower_bounds::LowerBoundError) -> Self {
        match e {
            crate::lower_bounds::LowerBoundError::InvalidParameter(m) => CliError::Usage(m),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "logitnets", version, about = "ReLU network constructions, logistic-risk checks and ERM experiments")]
struct Cli {
    /// Base seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory receiving CSV files and the manifest.
    #[arg(long, global = true, default_value = "logitnets-out")]
    out_dir: PathBuf,
    /// Worker threads (falls back to LOGITNETS_JOBS, then all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Multiplier on grid resolutions and sweep sizes.
    #[arg(long, global = true, default_value_t = 1.0)]
    grid_scale: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a network and certify it: scale, max, mult, hat, holder, log,
    /// clip, trunc-target or compositional, followed by key=value parameters.
    Build { kind: String, params: Vec<String> },
    /// Run an inequality sweep: sandwich, variance, calibration, J, KL,
    /// covering, vg, bump or separation.
    Check { suite: String },
    /// Run an experiment described by a key=value config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Settings shared by all commands.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub grid_scale: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { seed: 0, grid_scale: 1.0 }
    }
}

impl RunOptions {
    /// `base` scaled by the grid scale, at least `min`.
    pub fn scaled(&self, base: usize, min: usize) -> usize {
        ((base as f64 * self.grid_scale).round() as usize).max(min)
    }
}

/// Result of a command before it is written to disk.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    /// File stem shared by every output, e.g. `check-J`.
    pub stem: String,
    pub tables: Vec<Table>,
    /// Extra non-CSV outputs as `(suffix, contents)`.
    pub files: Vec<(String, String)>,
    /// Canonical configuration text entering the hash.
    pub config_text: String,
    pub checks: usize,
    pub failures: usize,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Number formatting shared by every CSV: plain decimals for moderate
/// magnitudes, shortest round-trip scientific notation otherwise.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn resolve_jobs(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(j) = flag {
        return if j == 0 { Err(CliError::Usage("--jobs must be at least 1".into())) } else { Ok(j) };
    }
    match std::env::var(JOBS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(j) if j > 0 => Ok(j),
            _ => Err(CliError::Usage(format!("{JOBS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli, &args) {
        Ok(manifest) => {
            println!("{} checks, {} failures; manifest in {}", manifest.checks, manifest.failures, manifest.outputs.first().map(String::as_str).unwrap_or("-"));
            if manifest.passed {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, args: &[OsString]) -> Result<RunManifest, CliError> {
    if !(cli.grid_scale > 0.0 && cli.grid_scale.is_finite()) {
        return Err(CliError::Usage(format!("--grid-scale must be positive, got {}", cli.grid_scale)));
    }
    let jobs = resolve_jobs(cli.jobs)?;
    let started = manifest::unix_now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| CliError::Internal(e.to_string()))?;
    let (command, outcome, seed) = pool.install(|| -> Result<_, CliError> {
        match &cli.command {
            Command::Build { kind, params } => {
                let opts = RunOptions { seed: cli.seed.unwrap_or(0), grid_scale: cli.grid_scale };
                Ok(("build", build::cmd_build(kind, &Config::from_pairs(params)?, &opts)?, opts.seed))
            }
            Command::Check { suite } => {
                let opts = RunOptions { seed: cli.seed.unwrap_or(0), grid_scale: cli.grid_scale };
                Ok(("check", check::cmd_check(suite, &opts)?, opts.seed))
            }
            Command::Experiment { config } => {
                let text = fs::read_to_string(config).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", config.display())))?;
                let cfg = Config::parse(&text)?;
                let seed = match cli.seed {
                    Some(s) => s,
                    None => cfg.parse_or("seed", 0u64)?,
                };
                let opts = RunOptions { seed, grid_scale: cli.grid_scale };
                Ok(("experiment", experiment::cmd_experiment(&cfg, &opts)?, seed))
            }
        }
    })?;
    fs::create_dir_all(&cli.out_dir)?;
    let manifest_name = format!("{}.manifest.json", outcome.stem);
    let mut outputs = vec![manifest_name.clone()];
    for t in &outcome.tables {
        outputs.push(manifest::write_file(&cli.out_dir, &format!("{}-{}.csv", outcome.stem, t.name), &t.to_csv()?)?);
    }
    for (suffix, contents) in &outcome.files {
        outputs.push(manifest::write_file(&cli.out_dir, &format!("{}.{suffix}", outcome.stem), contents)?);
    }
    let hash_input = format!("{command}\n{}\n{}seed={seed}\ngrid_scale={}\n", outcome.stem, outcome.config_text, cli.grid_scale);
    let m = RunManifest {
        command: command.to_string(),
        args: args.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
        config_hash: manifest::sha256_hex(&hash_input),
        seed,
        grid_scale: cli.grid_scale,
        jobs,
        started_unix_secs: started,
        finished_unix_secs: manifest::unix_now(),
        outputs,
        checks: outcome.checks,
        failures: outcome.failures,
        passed: outcome.passed(),
    };
    let json = serde_json::to_string_pretty(&m).map_err(|e| CliError::Internal(e.to_string()))?;
    manifest::write_file(&cli.out_dir, &manifest_name, &json)?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(0.25), "0.25");
        assert_eq!(num(1.5e-7), "1.5e-7");
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn usage_errors_exit_64() {
        assert_eq!(run(["logitnets", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["logitnets", "check", "nonsense", "--out-dir", "/nonexistent/never"]), EXIT_USAGE);
        assert_eq!(run(["logitnets", "build", "nonsense"]), EXIT_USAGE);
        assert_eq!(run(["logitnets", "--help"]), EXIT_OK);
    }
}
