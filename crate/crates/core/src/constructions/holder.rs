//! Approximation of Hölder-smooth functions on `[0,1]^d`.
//!
//! The general construction places `K+1` nodes `a_j = j/K` on every axis and
//! uses the tensor partition of unity `Φ_j(x) = Π_i φ_{j_i}(x_i)` with
//! `φ_j(t) = σ(1 − Kσ(t − a_j) − Kσ(a_j − t))`. On the support box of `Φ_j`
//! the target is replaced by its tensor Lagrange interpolant `P_j` of degree
//! `p` per axis, written in clamped local coordinates `u ∈ [0,1]^d`. The
//! network computes `Σ_j Σ_α c_{j,α} M(⋯M(φ_{j_1}, φ_{j_2})⋯, u^α)` where every
//! product goes through [`mult_net`]. Hats come first in each chain, so a
//! vanishing hat makes the whole term exactly zero and at most `2^d` nodes
//! contribute rounding error at any point.
//!
//! `(K, p)` is chosen as the cheapest pair whose exact (network-free)
//! approximant meets `ε/2` on the certification grid; the multiplication
//! accuracy then absorbs the other half. Constant and affine targets are
//! detected and represented exactly.

use super::{mult_net, ConstructionError, ErrorCertificate};
use crate::grid::{default_resolution, UnitGrid};
use crate::matrix::Matrix;
use crate::net::{ComplexityStats, Layer, Padding, ReluNet};
use crate::Net;

/// Target function on `[0,1]^d`.
pub type Target<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

/// Tuning knobs for [`holder_approx_with`].
#[derive(Clone, Debug)]
pub struct HolderOptions {
    /// Certification grid points per axis; `None` uses the default resolution.
    pub grid_per_axis: Option<usize>,
    /// Upper bound on the local polynomial degree per axis.
    pub max_degree: u32,
    /// Upper bound on the number of `(node, monomial)` terms.
    pub max_terms: usize,
}

impl Default for HolderOptions {
    fn default() -> Self {
        Self { grid_per_axis: None, max_degree: 3, max_terms: 4096 }
    }
}

/// Outcome of [`holder_approx`].
#[derive(Clone, Debug)]
pub struct HolderReport {
    pub certificate: ErrorCertificate,
    /// `constant`, `affine` or `local-polynomial`.
    pub kind: &'static str,
    /// Grid intervals per axis `K` (zero for the exact special cases).
    pub nodes_per_axis: usize,
    /// Local polynomial degree `p` per axis.
    pub degree: u32,
    /// Accuracy handed to every multiplication network.
    pub mult_eps: Option<f64>,
    pub stats: ComplexityStats,
    /// Smallest `C` with the measured complexity inside
    /// `C·(log(1/ε), ε^{−d/β}, ε^{−d/β} log(1/ε), 1)`.
    pub achieved_constant: f64,
}

/// [`holder_approx_with`] with default options.
pub fn holder_approx(f: Target<'_>, d: usize, beta: f64, r: f64, eps: f64) -> Result<(Net, HolderReport), ConstructionError> {
    holder_approx_with(f, d, beta, r, eps, &HolderOptions::default())
}

/// Network within `eps` of `f` on `[0,1]^d`, certified on a grid.
pub fn holder_approx_with(
    f: Target<'_>,
    d: usize,
    beta: f64,
    r: f64,
    eps: f64,
    opts: &HolderOptions,
) -> Result<(Net, HolderReport), ConstructionError> {
    if d == 0 {
        return Err(ConstructionError::InvalidParameter("holder_approx needs d >= 1".into()));
    }
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(ConstructionError::InvalidParameter(format!("holder_approx needs eps in (0, 1/2], got {eps}")));
    }
    if !(beta > 0.0 && r > 0.0) {
        return Err(ConstructionError::InvalidParameter(format!("holder_approx needs beta, r > 0, got {beta}, {r}")));
    }
    let grid = UnitGrid::new(d, opts.grid_per_axis.unwrap_or_else(|| default_resolution(d)));

    let (net, kind, k, p, mult_eps) = if let Some((c, a)) = affine_fit(f, d, &grid) {
        let kind = if a.iter().all(|&v| v == 0.0) { "constant" } else { "affine" };
        (affine_net(c, &a)?, kind, 0, 0, None)
    } else {
        let p_max = ((beta.ceil() as i64 - 1).max(0) as u32).min(opts.max_degree);
        let (k, p) = choose_resolution(f, d, p_max, eps, opts.max_terms, &grid).ok_or_else(|| {
            ConstructionError::InvalidParameter(format!(
                "holder_approx could not reach eps={eps} within {} terms",
                opts.max_terms
            ))
        })?;
        let approx = LocalPoly::new(f, d, k, p);
        let (net, me) = approx.network(eps / 2.0)?;
        (net, "local-polynomial", k, p, me)
    };

    let measured = super::sup_error_grid(&net, |x| f(x), &grid);
    let stats = net.complexity();
    let l = (1.0 / eps).ln();
    let e = eps.powf(-(d as f64) / beta);
    let achieved_constant = [stats.depth_g as f64 / l, stats.width_n as f64 / e, stats.nnz_s as f64 / (e * l), stats.param_bound_b]
        .into_iter()
        .fold(0.0, f64::max);
    let certificate = ErrorCertificate::new(
        "holder",
        format!("d={d};beta={beta};r={r};eps={eps};kind={kind};K={k};p={p};C={achieved_constant:.3}"),
        format!("[0,1]^{d}"),
        grid.len(),
        measured,
        eps,
    );
    let report = HolderReport { certificate, kind, nodes_per_axis: k, degree: p, mult_eps, stats, achieved_constant };
    Ok((net, report))
}

// ── Special cases ──

/// `(c, a)` with `f(x) = c + a·x` on every grid point, if such a fit exists.
fn affine_fit(f: Target<'_>, d: usize, grid: &UnitGrid) -> Option<(f64, Vec<f64>)> {
    let zero = vec![0.0; d];
    let c = f(&zero);
    let mut e = vec![0.0; d];
    let a: Vec<f64> = (0..d)
        .map(|i| {
            e[i] = 1.0;
            let v = f(&e) - c;
            e[i] = 0.0;
            v
        })
        .collect();
    let scale = 1.0 + c.abs() + a.iter().map(|v| v.abs()).sum::<f64>();
    let mut p = vec![0.0; d];
    for idx in 0..grid.len() {
        grid.point_into(idx, &mut p);
        let lin = c + a.iter().zip(&p).map(|(ai, xi)| ai * xi).sum::<f64>();
        if (f(&p) - lin).abs() > 1e-14 * scale {
            return None;
        }
    }
    Some((c, a))
}

/// `c + a·x` as `Σ a_i (σ(x_i) − σ(−x_i))` plus a bias-only unit.
fn affine_net(c: f64, a: &[f64]) -> Result<Net, ConstructionError> {
    let d = a.len();
    let mut rows = Vec::new();
    let mut shifts = Vec::new();
    let mut out = Vec::new();
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for s in [1.0, -1.0] {
            let mut row = vec![0.0; d];
            row[i] = s;
            rows.push(row);
            shifts.push(0.0);
            out.push(s * ai);
        }
    }
    if c != 0.0 || rows.is_empty() {
        rows.push(vec![0.0; d]);
        shifts.push(-c.abs());
        out.push(if c < 0.0 { -1.0 } else { 1.0 });
    }
    let n = rows.len();
    let net = ReluNet::new(
        d,
        vec![Layer::new(Matrix::from_rows(d, rows).expect("rows"), shifts)],
        Matrix::from_vec(1, n, out).expect("row"),
    )?;
    Ok(net.rescale_to_unit_bound())
}

// ── Local polynomial approximant ──

fn choose_resolution(f: Target<'_>, d: usize, p_max: u32, eps: f64, max_terms: usize, grid: &UnitGrid) -> Option<(usize, u32)> {
    let mut k = 1usize;
    loop {
        let mut any = false;
        for p in 0..=p_max {
            let terms = ((k + 1) as f64 * (p + 1) as f64).powi(d as i32);
            if terms > max_terms as f64 {
                break;
            }
            any = true;
            let approx = LocalPoly::new(f, d, k, p);
            if approx.grid_error(f, grid) <= eps / 2.0 {
                return Some((k, p));
            }
        }
        if !any {
            return None;
        }
        k *= 2;
    }
}

/// Exact `Σ_j Φ_j(x) P_j(u_j(x))` with monomial coefficients per node.
struct LocalPoly {
    d: usize,
    k: usize,
    p: u32,
    /// `coefs[node][monomial]`, both in mixed-radix order with axis 0 slowest.
    coefs: Vec<Vec<f64>>,
}

impl LocalPoly {
    fn new(f: Target<'_>, d: usize, k: usize, p: u32) -> Self {
        let m = p as usize + 1;
        let vinv = vandermonde_inverse(p);
        let n_nodes = (k + 1).pow(d as u32);
        let n_mono = m.pow(d as u32);
        let mut coefs = Vec::with_capacity(n_nodes);
        let mut node = vec![0usize; d];
        let mut x = vec![0.0; d];
        for ni in 0..n_nodes {
            unravel(ni, k + 1, &mut node);
            let boxes: Vec<(f64, f64)> = node.iter().map(|&j| node_box(j, k)).collect();
            let mut vals = vec![0.0; n_mono];
            let mut t = vec![0usize; d];
            for (vi, v) in vals.iter_mut().enumerate() {
                unravel(vi, m, &mut t);
                for i in 0..d {
                    x[i] = if p == 0 {
                        node[i] as f64 / k as f64
                    } else {
                        let (lo, hi) = boxes[i];
                        lo + (hi - lo) * t[i] as f64 / p as f64
                    };
                }
                *v = f(&x);
            }
            if p > 0 {
                for axis in 0..d {
                    apply_along_axis(&mut vals, &vinv, m, d, axis);
                }
            }
            coefs.push(vals);
        }
        Self { d, k, p, coefs }
    }

    fn value(&self, x: &[f64]) -> f64 {
        let d = self.d;
        let m = self.p as usize + 1;
        let kf = self.k as f64;
        // Up to two active nodes per axis with their hat values.
        let mut active: Vec<Vec<(usize, f64)>> = Vec::with_capacity(d);
        for &xi in x {
            let mut a = Vec::with_capacity(2);
            for j in 0..=self.k {
                let h = hat(xi, j as f64 / kf, kf);
                if h > 0.0 {
                    a.push((j, h));
                }
            }
            active.push(a);
        }
        let mut total = 0.0;
        let mut choice = vec![0usize; d];
        'outer: loop {
            let mut phi = 1.0;
            let mut ni = 0usize;
            for i in 0..d {
                let (j, h) = match active[i].get(choice[i]) {
                    Some(&v) => v,
                    None => return total,
                };
                phi *= h;
                ni = ni * (self.k + 1) + j;
            }
            let coefs = &self.coefs[ni];
            let mut node = vec![0usize; d];
            unravel(ni, self.k + 1, &mut node);
            let u: Vec<f64> = (0..d)
                .map(|i| {
                    let (lo, hi) = node_box(node[i], self.k);
                    ((x[i] - lo) / (hi - lo)).clamp(0.0, 1.0)
                })
                .collect();
            let mut t = vec![0usize; d];
            let mut poly = 0.0;
            for (mi, &c) in coefs.iter().enumerate() {
                unravel(mi, m, &mut t);
                poly += c * t.iter().zip(&u).map(|(&e, &ui)| ui.powi(e as i32)).product::<f64>();
            }
            total += phi * poly;
            for i in (0..d).rev() {
                choice[i] += 1;
                if choice[i] < active[i].len() {
                    continue 'outer;
                }
                choice[i] = 0;
            }
            return total;
        }
    }

    fn grid_error(&self, f: Target<'_>, grid: &UnitGrid) -> f64 {
        use rayon::prelude::*;
        (0..grid.len())
            .into_par_iter()
            .with_min_len(256)
            .map(|i| {
                let x = grid.point(i);
                let e = (self.value(&x) - f(&x)).abs();
                if e.is_nan() {
                    f64::INFINITY
                } else {
                    e
                }
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Network realisation; returns the multiplication accuracy when products occur.
    fn network(&self, budget: f64) -> Result<(Net, Option<f64>), ConstructionError> {
        let d = self.d;
        let k = self.k;
        let p = self.p as usize;
        let m = p + 1;
        let kf = k as f64;

        // Features: hats φ_j(x_i), then clamped local coordinates of node boxes.
        let mut features = Vec::new();
        for i in 0..d {
            for j in 0..=k {
                features.push(hat_feature(d, i, j as f64 / kf, kf)?);
            }
        }
        let u_offset = features.len();
        if p > 0 {
            for i in 0..d {
                for j in 0..=k {
                    let (lo, hi) = node_box(j, k);
                    features.push(local_coordinate_feature(d, i, lo, hi)?);
                }
            }
        }
        let feat = ReluNet::parallel_with(&features, Padding::NonNegative)?;
        let nf = feat.output_dim();

        let c_max = self.coefs.iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let chain_max = d + d * p - 1;
        let mult_eps = if chain_max == 0 || c_max == 0.0 {
            None
        } else {
            Some((budget / (2f64.powi(d as i32) * c_max * chain_max as f64)).min(0.5))
        };
        let mult = match mult_eps {
            Some(e) => Some(mult_net(e)?),
            None => None,
        };

        let mut terms = Vec::new();
        let mut weights = Vec::new();
        let mut node = vec![0usize; d];
        let mut t = vec![0usize; d];
        for (ni, coefs) in self.coefs.iter().enumerate() {
            unravel(ni, k + 1, &mut node);
            for (mi, &c) in coefs.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                unravel(mi, m, &mut t);
                let mut factors: Vec<usize> = (0..d).map(|i| i * (k + 1) + node[i]).collect();
                for i in 0..d {
                    for _ in 0..t[i] {
                        factors.push(u_offset + i * (k + 1) + node[i]);
                    }
                }
                terms.push(product_chain(nf, &factors, mult.as_ref())?);
                weights.push(c);
            }
        }
        let net = if terms.is_empty() {
            ReluNet::constant(d, 0.0)?
        } else {
            let all = ReluNet::parallel_with(&terms, Padding::NonNegative)?;
            let row = Matrix::from_vec(1, weights.len(), weights).expect("row");
            ReluNet::compose(&all.map_output(&row)?, &feat)?
        };
        Ok((net.rescale_to_unit_bound(), mult_eps))
    }
}

fn hat(t: f64, a: f64, k: f64) -> f64 {
    let s1 = (t - a).max(0.0);
    let s2 = (a - t).max(0.0);
    (1.0 - k * s1 - k * s2).max(0.0)
}

/// `[a_j − 1/K, a_j + 1/K] ∩ [0,1]`.
fn node_box(j: usize, k: usize) -> (f64, f64) {
    let kf = k as f64;
    (((j as f64 - 1.0) / kf).max(0.0), ((j as f64 + 1.0) / kf).min(1.0))
}

fn unravel(mut index: usize, radix: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = index % radix;
        index /= radix;
    }
}

/// Inverse of `V[i][e] = (i/p)^e`, so that `c = V⁻¹ y` gives monomial coefficients.
fn vandermonde_inverse(p: u32) -> Vec<Vec<f64>> {
    let m = p as usize + 1;
    let mut a: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let x = if p == 0 { 0.0 } else { i as f64 / p as f64 };
            let mut row: Vec<f64> = (0..m).map(|e| x.powi(e as i32)).collect();
            row.extend((0..m).map(|c| if c == i { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..m {
        let piv = (col..m).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).expect("nonempty");
        a.swap(col, piv);
        let pv = a[col][col];
        for v in a[col].iter_mut() {
            *v /= pv;
        }
        for r in 0..m {
            if r != col {
                let factor = a[r][col];
                if factor != 0.0 {
                    for c in 0..2 * m {
                        a[r][c] -= factor * a[col][c];
                    }
                }
            }
        }
    }
    a.into_iter().map(|row| row[m..].to_vec()).collect()
}

/// Applies the `m×m` matrix `mat` along one axis of a `m^d` tensor.
fn apply_along_axis(vals: &mut [f64], mat: &[Vec<f64>], m: usize, d: usize, axis: usize) {
    let stride = m.pow((d - 1 - axis) as u32);
    let block = stride * m;
    let mut line = vec![0.0; m];
    for start in (0..vals.len()).step_by(block) {
        for off in 0..stride {
            for (i, l) in line.iter_mut().enumerate() {
                *l = vals[start + off + i * stride];
            }
            for (r, row) in mat.iter().enumerate() {
                vals[start + off + r * stride] = row.iter().zip(&line).map(|(a, b)| a * b).sum();
            }
        }
    }
}

/// `x ↦ σ(1 − Kσ(x_i − a) − Kσ(a − x_i))`.
fn hat_feature(d: usize, i: usize, a: f64, k: f64) -> Result<Net, ConstructionError> {
    let mut w = Matrix::zeros(2, d);
    w.set(0, i, 1.0);
    w.set(1, i, -1.0);
    let second = Matrix::from_vec(1, 2, vec![-k, -k]).expect("1x2");
    Ok(ReluNet::new(
        d,
        vec![Layer::new(w, vec![a, -a]), Layer::new(second, vec![-1.0])],
        Matrix::identity(1),
    )?)
}

/// `x ↦ min(max((x_i − lo)/(hi − lo), 0), 1)`.
fn local_coordinate_feature(d: usize, i: usize, lo: f64, hi: f64) -> Result<Net, ConstructionError> {
    let s = 1.0 / (hi - lo);
    let mut w = Matrix::zeros(2, d);
    w.set(0, i, s);
    w.set(1, i, s);
    let t0 = lo * s;
    Ok(ReluNet::new(
        d,
        vec![Layer::new(w, vec![t0, t0 + 1.0])],
        Matrix::from_vec(1, 2, vec![1.0, -1.0]).expect("1x2"),
    )?)
}

/// `M(⋯M(F_{i_1}, F_{i_2})⋯, F_{i_n})` on a nonnegative feature vector.
fn product_chain(nf: usize, factors: &[usize], mult: Option<&Net>) -> Result<Net, ConstructionError> {
    let mut acc = ReluNet::select(nf, &factors[..1])?;
    for &i in &factors[1..] {
        let mult = mult.expect("products need a multiplication net");
        let pair = ReluNet::parallel_with(&[acc, ReluNet::select(nf, &[i])?], Padding::NonNegative)?;
        acc = ReluNet::compose(mult, &pair)?;
    }
    Ok(acc)
}
