//! Signed bump fields on the cell-center grid `G_{Q,d}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::mollifier::{holder_norm_overestimate, mollifier_u};
use super::LowerBoundError;

/// `f(x) = Σ_a T(a)·(c₁/Q^β)·u(Q(x − a))` over the centers `a ∈ G_{Q,d}`,
/// the odd multiples of `1/(2Q)` on every axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BumpGrid {
    pub q: usize,
    pub d: usize,
    pub beta: f64,
    pub r: f64,
    /// `T(a) ∈ {−1, 1}` with centers in lexicographic order (last axis fastest).
    pub signs: Vec<i8>,
    /// Over-estimate `ĉ₂` of the Hölder norm of `u`.
    pub c2_hat: f64,
    /// `c₁ = min(r/(4ĉ₂), 1/10000)`.
    pub c1: f64,
    /// `c₁/Q^β`.
    pub amplitude: f64,
}

impl BumpGrid {
    /// Number of centers, `Q^d`.
    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// The `k`-th center.
    pub fn center(&self, mut k: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.d];
        for axis in (0..self.d).rev() {
            c[axis] = (2 * (k % self.q) + 1) as f64 / (2 * self.q) as f64;
            k /= self.q;
        }
        c
    }

    /// Index of the center whose cell contains `x`.
    pub fn cell_of(&self, x: &[f64]) -> usize {
        x.iter().fold(0, |acc, &v| acc * self.q + ((v * self.q as f64) as usize).min(self.q - 1))
    }

    /// `f(x)`. Supports lie inside the open cells, so only the cell holding
    /// `x` can contribute.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let k = self.cell_of(x);
        let c = self.center(k);
        let z: Vec<f64> = x.iter().zip(&c).map(|(v, a)| self.q as f64 * (v - a)).collect();
        f64::from(self.signs[k]) * self.amplitude * mollifier_u(&z)
    }

    /// `f(x)` summed over every center, for checking the single-cell shortcut.
    pub fn eval_full(&self, x: &[f64]) -> f64 {
        (0..self.len())
            .map(|k| {
                let c = self.center(k);
                let z: Vec<f64> = x.iter().zip(&c).map(|(v, a)| self.q as f64 * (v - a)).collect();
                f64::from(self.signs[k]) * self.amplitude * mollifier_u(&z)
            })
            .sum()
    }
}

/// Builds the bump field for signs `t` (length `Q^d`).
pub fn bump_grid_build(q: usize, d: usize, beta: f64, r: f64, t: &[i8]) -> Result<BumpGrid, LowerBoundError> {
    if q < 2 || d == 0 {
        return Err(LowerBoundError::InvalidParameter(format!("bump grid needs Q >= 2 and d >= 1, got Q={q}, d={d}")));
    }
    if t.len() != q.pow(d as u32) || t.iter().any(|&s| s != 1 && s != -1) {
        return Err(LowerBoundError::InvalidParameter(format!("need {} signs in {{-1, 1}}", q.pow(d as u32))));
    }
    if !(r > 0.0) {
        return Err(LowerBoundError::InvalidParameter(format!("r must be positive, got {r}")));
    }
    let c2_hat = holder_norm_overestimate(beta).ok_or_else(|| LowerBoundError::InvalidParameter(format!("bump smoothness estimate supports beta in (0, 2], got {beta}")))?;
    let c1 = (r / (4.0 * c2_hat)).min(1e-4);
    Ok(BumpGrid { q, d, beta, r, signs: t.to_vec(), c2_hat, c1, amplitude: c1 / (q as f64).powf(beta) })
}

/// Finite-difference estimate of `‖f‖_{C^{b,λ}([0,1]^d)}` from `pairs`
/// random pairs at log-uniform scales in `[10⁻⁴, 1]` (`β ≤ 2`).
pub fn holder_norm_estimate(f: impl Fn(&[f64]) -> f64, d: usize, beta: f64, pairs: usize, seed: u64) -> f64 {
    let b = beta.ceil() as i32 - 1;
    let lambda = beta - b as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-6;
    let partial = |x: &[f64], i: usize| {
        let (mut up, mut down) = (x.to_vec(), x.to_vec());
        up[i] += h;
        down[i] -= h;
        (f(&up) - f(&down)) / (2.0 * h)
    };
    let (mut sup, mut semi) = (0.0f64, 0.0f64);
    for _ in 0..pairs {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(h..1.0 - h)).collect();
        let scale = 10f64.powf(-4.0 * rng.gen::<f64>());
        let dir: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        let y: Vec<f64> = x.iter().zip(&dir).map(|(a, v)| (a + scale * v / norm).clamp(h, 1.0 - h)).collect();
        let dist = x.iter().zip(&y).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
        if dist == 0.0 {
            continue;
        }
        sup = sup.max(f(&x).abs());
        if b == 0 {
            semi = semi.max((f(&x) - f(&y)).abs() / dist.powf(lambda));
        } else {
            for i in 0..d {
                let (gx, gy) = (partial(&x, i), partial(&y, i));
                sup = sup.max(gx.abs());
                semi = semi.max((gx - gy).abs() / dist.powf(lambda));
            }
        }
    }
    sup + semi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_values_one_dimensional() {
        let g = bump_grid_build(2, 1, 1.0, 1.0, &[1, 1]).unwrap();
        let amp = g.c1 / 2.0;
        assert_eq!(g.eval(&[0.25]), amp);
        assert_eq!(g.eval(&[0.75]), amp);
        assert_eq!(g.eval(&[0.5]), 0.0);
        assert!(g.c1 > 0.0 && g.c1 <= 1e-4);
    }

    #[test]
    fn grid_size_and_centers() {
        for q in 2..=6 {
            for d in 1..=3 {
                let g = bump_grid_build(q, d, 1.0, 1.0, &vec![1; q.pow(d as u32)]).unwrap();
                assert_eq!(g.len(), q.pow(d as u32));
                for k in 0..g.len() {
                    let c = g.center(k);
                    assert!(c.iter().all(|v| {
                        let odd = v * 2.0 * q as f64;
                        (odd - odd.round()).abs() < 1e-12 && odd.round() as i64 % 2 == 1
                    }));
                    assert_eq!(g.cell_of(&c), k);
                }
            }
        }
    }

    #[test]
    fn sup_norm_by_grid_scan() {
        let g = bump_grid_build(3, 2, 2.0, 1.0, &[1, -1, 1, -1, 1, -1, 1, -1, 1]).unwrap();
        let grid = crate::grid::UnitGrid::new(2, 301);
        let sup = (0..grid.len()).map(|i| g.eval(&grid.point(i)).abs()).fold(0.0, f64::max);
        assert_eq!(sup, g.amplitude);
    }

    #[test]
    fn supports_are_disjoint() {
        let g = bump_grid_build(3, 2, 1.0, 1.0, &[1; 9]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let radius = (1.0f64 / 8.0).sqrt() / 3.0;
        for a in 0..g.len() {
            let ca = g.center(a);
            for _ in 0..200 {
                let x: Vec<f64> = ca.iter().map(|c| c + rng.gen_range(-radius..radius)).collect();
                for z in (0..g.len()).filter(|&z| z != a) {
                    let cz = g.center(z);
                    let w: Vec<f64> = x.iter().zip(&cz).map(|(v, c)| 3.0 * (v - c)).collect();
                    assert_eq!(mollifier_u(&w), 0.0);
                }
            }
        }
        // The single-cell shortcut agrees with the full sum.
        for _ in 0..200 {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            assert_eq!(g.eval(&x), g.eval_full(&x));
        }
    }

    #[test]
    fn holder_estimate_on_known_functions() {
        // |x|^{1/2} on [0,1]: sup 1, Hölder-1/2 seminorm 1.
        let est = holder_norm_estimate(|x: &[f64]| x[0].sqrt(), 1, 0.5, 20_000, 5);
        assert!(est <= 2.0 + 1e-9 && est > 1.2, "{est}");
        // β = 1 is C^{0,1}: x²/2 has sup 1/2 and Lipschitz constant 1.
        let est = holder_norm_estimate(|x: &[f64]| 0.5 * x[0] * x[0], 1, 1.0, 20_000, 6);
        assert!(est <= 1.5 + 1e-6 && est > 1.45, "{est}");
        // x₀ + x₁ with β = 2: max(sup|f|, sup|∂ᵢf|) = 2 and zero seminorm.
        let est = holder_norm_estimate(|x: &[f64]| x[0] + x[1], 2, 2.0, 5_000, 7);
        assert!(est <= 2.0 + 1e-6 && est > 1.9, "{est}");
    }

    #[test]
    fn bump_seminorm_within_radius() {
        for (q, d, beta) in [(2usize, 1usize, 0.5), (4, 2, 1.0), (2, 2, 2.0)] {
            let mut rng = ChaCha8Rng::seed_from_u64(q as u64);
            let signs: Vec<i8> = (0..q.pow(d as u32)).map(|_| if rng.gen() { 1 } else { -1 }).collect();
            let g = bump_grid_build(q, d, beta, 0.5, &signs).unwrap();
            let est = holder_norm_estimate(|x: &[f64]| g.eval(x), d, beta, 2_000, 9);
            assert!(est > 0.0 && est <= g.r, "Q={q} d={d} beta={beta}: {est}");
        }
    }
}
