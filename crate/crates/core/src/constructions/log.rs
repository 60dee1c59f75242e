//! Network approximation of the natural logarithm on `[a, b]` whose output
//! stays inside `[log a, log b]` for every real input.
//!
//! With `I = ⌈log₂(1/a)⌉` the interval `[a, 1]` is covered by the dyadic
//! pieces `J_k = [1/(3·2^k), 1/2^k]`, `0 ≤ k ≤ I`. On `J_k` one has
//! `log t = log(2x/3 + 1/3) − k log 2` with `x = (3·2^k t − 1)/2 ∈ [0,1]`, so a
//! single approximant `g̃₁` of `x ↦ log(2x/3 + 1/3)` serves every piece. Each
//! branch computes the normalised value
//! `h̃_k ≈ −log t / (8 log(1/a)) ∈ [0, 1]`, the branches are blended with the
//! partition of unity `f̃_k` through multiplication networks, and a final
//! clamp maps the blend back to `[log a, log b]`.

use super::{hat_net, mult_net, scale_pos_net, sup_error_1d, ConstructionError, ErrorCertificate};
use super::{holder_approx, HolderReport};
use crate::matrix::Matrix;
use crate::net::{ComplexityStats, Layer, Padding, ReluNet};
use crate::Net;

/// Default number of certification points on `[a, b]`.
pub const DEFAULT_LOG_GRID: usize = 100_000;

/// Outcome of [`log_approx`].
#[derive(Clone, Debug)]
pub struct LogApproxReport {
    pub certificate: ErrorCertificate,
    /// Number of dyadic pieces minus one.
    pub i_max: u32,
    /// Accuracy of the blending multiplications.
    pub mult_eps: f64,
    /// Report of the inner approximant `g̃₁`.
    pub inner: HolderReport,
    /// Smallest and largest output seen on the wide range grid over `[−10, 10]`.
    pub range_seen: (f64, f64),
    /// Whether every output on the wide range grid lies in `[log a, log b]`.
    pub range_ok: bool,
    pub stats: ComplexityStats,
    /// A priori error bound `ε/2 + ε(I+1)/(12 log(1/a))`.
    pub error_bound: f64,
}

/// [`log_approx_with`] certified on [`DEFAULT_LOG_GRID`] points.
pub fn log_approx(a: f64, b: f64, alpha: f64, eps: f64) -> Result<(Net, LogApproxReport), ConstructionError> {
    log_approx_with(a, b, alpha, eps, DEFAULT_LOG_GRID)
}

/// Network `f̃` with `|log t − f̃(t)| ≤ eps` on `[a, b]` and
/// `log a ≤ f̃(t) ≤ log b` for all real `t`.
pub fn log_approx_with(a: f64, b: f64, alpha: f64, eps: f64, grid_points: usize) -> Result<(Net, LogApproxReport), ConstructionError> {
    if !(a > 0.0 && a <= 0.5) || !(b > a && b <= 1.0) {
        return Err(ConstructionError::InvalidParameter(format!("log_approx needs 0 < a <= 1/2 and a < b <= 1, got a={a}, b={b}")));
    }
    if !(eps > 0.0 && eps <= 0.5) || !(alpha > 0.0) {
        return Err(ConstructionError::InvalidParameter(format!("log_approx needs eps in (0, 1/2] and alpha > 0, got eps={eps}, alpha={alpha}")));
    }
    let i_max = (1.0 / a).log2().ceil().max(1.0) as u32;
    let log_inv_a = -a.ln();
    let lambda = 1.0 / (8.0 * log_inv_a);
    let ln3 = 3f64.ln();

    // Inner approximant of x ↦ log(2x/3 + 1/3) on [0, 1] within eps/2.
    let g1_target = |x: &[f64]| (2.0 * x[0] / 3.0 + 1.0 / 3.0).ln();
    let (g1, inner) = holder_approx(&g1_target, 1, alpha, 2.0, eps / 2.0)?;

    // Clip g̃₁ to [−log 3, 0] and normalise: p = σ(g̃₁/2 + log3/2) twice,
    // q = σ(log3/2 − p₁/2 − p₂/2) twice, so q₁ + q₂ = min(max(−g̃₁, 0), log 3).
    let clip_half = ReluNet::new(
        1,
        vec![
            Layer::new(Matrix::from_vec(2, 1, vec![0.5, 0.5]).expect("2x1"), vec![-ln3 / 2.0; 2]),
            Layer::new(Matrix::from_vec(2, 2, vec![-0.5; 4]).expect("2x2"), vec![-ln3 / 2.0; 2]),
        ],
        Matrix::from_vec(1, 2, vec![1.0, 1.0]).expect("1x2"),
    )?;
    let clipped = ReluNet::compose(&clip_half, &g1)?;

    let scale = scale_pos_net(i_max + 1)?;
    let mult_eps = eps / (96.0 * log_inv_a * log_inv_a);
    let mult = mult_net(mult_eps.min(0.5))?;
    let mut products = Vec::with_capacity(i_max as usize + 1);
    for k in 0..=i_max {
        // x_k = σ((3/(4·2^{I−k}))·2^{I+1}σ(t) − 1/2) = σ((3·2^k t − 1)/2).
        let c = 3.0 / (4.0 * 2f64.powi((i_max - k) as i32));
        let to_local = ReluNet::new(
            1,
            vec![Layer::new(Matrix::from_vec(1, 1, vec![c]).expect("1x1"), vec![0.5])],
            Matrix::identity(1),
        )?;
        let local = ReluNet::compose(&to_local, &scale)?;
        // h̃_k = σ(λ(q₁ + q₂) + λ k log 2).
        let normalise = ReluNet::new(
            1,
            vec![Layer::new(Matrix::from_vec(1, 1, vec![lambda]).expect("1x1"), vec![-lambda * k as f64 * 2f64.ln()])],
            Matrix::identity(1),
        )?;
        let branch = ReluNet::compose(&normalise, &ReluNet::compose(&clipped, &local)?)?;
        let pair = ReluNet::parallel_with(&[branch, hat_net(k, i_max)?], Padding::NonNegative)?;
        products.push(ReluNet::compose(&mult, &pair)?);
    }
    let blend = ReluNet::parallel_with(&products, Padding::NonNegative)?;
    let ones = Matrix::from_vec(1, blend.output_dim(), vec![1.0; blend.output_dim()]).expect("row");
    let g3 = blend.map_output(&ones)?;

    // Clamp σ(g̃₃) to [L, 1/8] with L = log b / (8 log a), then multiply by
    // 8 log a using 8I copies of the clamped value with weight log a / I.
    // Both levels move inward by a relative 1e-12 so that rounding in the
    // final sum cannot leave [log a, log b].
    let inward = 1e-12;
    let big_l = b.ln() / (8.0 * a.ln()) * (1.0 + inward);
    let top = 0.125 * (1.0 - inward);
    let copies = 8 * i_max as usize;
    let clamp = ReluNet::new(
        1,
        vec![
            Layer::unshifted(Matrix::identity(1)),
            Layer::new(Matrix::from_vec(2, 1, vec![1.0, 1.0]).expect("2x1"), vec![big_l, top]),
            Layer::new(Matrix::from_rows(2, vec![vec![1.0, -1.0]; copies]).expect("copies x 2"), vec![-big_l; copies]),
        ],
        Matrix::from_vec(1, copies, vec![a.ln() / i_max as f64; copies]).expect("row"),
    )?;
    let net = ReluNet::compose(&clamp, &g3)?;

    let measured = sup_error_1d(&net, f64::ln, a, b, grid_points);
    let (lo, hi) = wide_range(&net);
    let range_ok = lo >= a.ln() && hi <= b.ln();
    let error_bound = eps / 2.0 + eps * (i_max as f64 + 1.0) / (12.0 * log_inv_a);
    let certificate = ErrorCertificate::new(
        "log",
        format!("a={a};b={b};alpha={alpha};eps={eps};I={i_max}"),
        format!("[{a},{b}]"),
        grid_points.max(2),
        measured,
        eps,
    );
    let stats = net.complexity();
    Ok((net, LogApproxReport { certificate, i_max, mult_eps, inner, range_seen: (lo, hi), range_ok, stats, error_bound }))
}

/// Output range over 200 001 points of `[−10, 10]`.
fn wide_range(net: &Net) -> (f64, f64) {
    let mut scratch = Default::default();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..=200_000 {
        let t = -10.0 + 20.0 * i as f64 / 200_000.0;
        let y = net.evaluate_with(&[t], &mut scratch)[0];
        lo = lo.min(y);
        hi = hi.max(y);
    }
    (lo, hi)
}
