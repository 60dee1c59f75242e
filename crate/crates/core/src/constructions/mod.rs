//! Explicit approximating networks. Each builder returns a [`Net`] and,
//! where an approximation error is involved, an [`ErrorCertificate`] measured
//! on a grid.

mod clip;
mod compositional;
mod hat;
mod holder;
mod log;
mod max;
mod mult;
mod scale;
mod trunc;

use rayon::prelude::*;
use serde::Serialize;

use crate::grid::UnitGrid;
use crate::net::{NetError, Scratch};
use crate::Net;

pub use clip::{clip_net, clip_net_vec};
pub use compositional::{composition_error_bound, compositional_approx, Component, CompositionSpec, CompositionalReport, StageFn};
pub use hat::{hat_budget, hat_net, hat_value};
pub use holder::{holder_approx, holder_approx_with, HolderOptions, HolderReport, Target};
pub use log::{log_approx, log_approx_with, LogApproxReport, DEFAULT_LOG_GRID};
pub use max::{max_budget, max_net};
pub use mult::{mult_budget, mult_net, mult_sawtooth_levels};
pub use scale::{scale_budget, scale_pos_net};
pub use trunc::{truncated_target_net, TruncatedTarget};

/// Errors raised by network builders.
#[derive(Debug, thiserror::Error)]
pub enum ConstructionError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Grid-measured sup error of a construction against its claimed bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorCertificate {
    /// Name of the construction, e.g. `log`.
    pub construction: String,
    /// Parameters as `key=value` pairs separated by `;`.
    pub params: String,
    /// Interval or box on which the error was measured.
    pub domain: String,
    /// Number of grid points evaluated.
    pub grid_points: usize,
    pub measured_sup_error: f64,
    pub claimed_bound: f64,
    /// `measured_sup_error ≤ claimed_bound`.
    pub passed: bool,
}

impl ErrorCertificate {
    pub fn new(
        construction: &str,
        params: String,
        domain: String,
        grid_points: usize,
        measured_sup_error: f64,
        claimed_bound: f64,
    ) -> Self {
        Self {
            construction: construction.to_string(),
            params,
            domain,
            grid_points,
            measured_sup_error,
            claimed_bound,
            passed: measured_sup_error <= claimed_bound,
        }
    }

    /// Header of the certificate CSV.
    pub const CSV_HEADER: [&'static str; 6] = ["construction", "params", "grid", "measured", "claimed", "passed"];

    /// One CSV record matching [`Self::CSV_HEADER`].
    pub fn csv_record(&self) -> [String; 6] {
        [
            self.construction.clone(),
            self.params.clone(),
            format!("{} on {}", self.grid_points, self.domain),
            format!("{:e}", self.measured_sup_error),
            format!("{:e}", self.claimed_bound),
            self.passed.to_string(),
        ]
    }
}

/// Sup over `n` equally spaced points of `[lo, hi]` of `|net(t) − f(t)|`.
pub fn sup_error_1d(net: &Net, f: impl Fn(f64) -> f64 + Sync, lo: f64, hi: f64, n: usize) -> f64 {
    let n = n.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .into_par_iter()
        .with_min_len(2048)
        .fold(
            || (Scratch::default(), 0.0f64),
            |(mut s, m), i| {
                let t = if i + 1 == n { hi } else { lo + step * i as f64 };
                let y = net.evaluate_with(&[t], &mut s)[0];
                let e = (y - f(t)).abs();
                (s, if e.is_nan() { f64::INFINITY } else { m.max(e) })
            },
        )
        .map(|(_, m)| m)
        .reduce(|| 0.0, f64::max)
}

/// Sup over a [`UnitGrid`] of `|net(x) − f(x)|` for scalar-output nets.
pub fn sup_error_grid(net: &Net, f: impl Fn(&[f64]) -> f64 + Sync, grid: &UnitGrid) -> f64 {
    (0..grid.len())
        .into_par_iter()
        .with_min_len(512)
        .fold(
            || (Scratch::default(), vec![0.0; grid.dim()], 0.0f64),
            |(mut s, mut p, m), i| {
                grid.point_into(i, &mut p);
                let y = net.evaluate_with(&p, &mut s)[0];
                let e = (y - f(&p)).abs();
                (s, p, if e.is_nan() { f64::INFINITY } else { m.max(e) })
            },
        )
        .map(|(_, _, m)| m)
        .reduce(|| 0.0, f64::max)
}

/// `⌈log₂ k⌉` for `k ≥ 1`.
pub fn ceil_log2(k: usize) -> u32 {
    assert!(k >= 1);
    usize::BITS - (k - 1).leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_values() {
        let got: Vec<u32> = (1..=9).map(ceil_log2).collect();
        assert_eq!(got, vec![0, 1, 2, 2, 3, 3, 3, 3, 4]);
    }

    #[test]
    fn certificate_pass_flag_and_csv() {
        let c = ErrorCertificate::new("demo", "k=1".into(), "[0,1]".into(), 10, 0.5, 0.25);
        assert!(!c.passed);
        let rec = c.csv_record();
        assert_eq!(rec[0], "demo");
        assert_eq!(rec[5], "false");
    }
}
