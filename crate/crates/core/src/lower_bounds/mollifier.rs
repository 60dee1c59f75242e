//! The smooth step `κ` on `(1/9, 1/8)` and the radial bump `u(x) = κ(‖x‖²)`.

use std::sync::OnceLock;

const A: f64 = 1.0 / 9.0;
const B: f64 = 1.0 / 8.0;
/// Minimum of `1/(s − 1/9) + 1/(1/8 − s)`, attained at the midpoint; used to
/// rescale the integrand away from underflow.
const SHIFT: f64 = 4.0 / (B - A);

/// `exp(SHIFT − 1/(s − 1/9) − 1/(1/8 − s))` on `(1/9, 1/8)`, zero outside.
fn density(s: f64) -> f64 {
    if s <= A || s >= B {
        0.0
    } else {
        (SHIFT - 1.0 / (s - A) - 1.0 / (B - s)).exp()
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
    let left = simpson(a, m, fa, lm, fm);
    let right = simpson(m, b, fm, rm, fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        left + right + diff / 15.0
    } else {
        adaptive(f, a, m, fa, lm, fm, left, 0.5 * tol, depth - 1) + adaptive(f, m, b, fm, rm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Normalizer `∫_{1/9}^{1/8} exp(SHIFT − …)`, computed once per process.
fn normalizer() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| adaptive_simpson(density, A, B, 1e-13))
}

/// `κ(t)`: `1` for `t ≤ 1/9`, `0` for `t ≥ 1/8`, smooth and decreasing between.
pub fn kappa(t: f64) -> f64 {
    if t <= A {
        1.0
    } else if t >= B {
        0.0
    } else {
        let z = normalizer();
        // Integrate over the shorter side for accuracy.
        if t >= 0.5 * (A + B) {
            adaptive_simpson(density, t, B, 1e-12 * z) / z
        } else {
            1.0 - adaptive_simpson(density, A, t, 1e-12 * z) / z
        }
    }
}

/// `κ′(t)`.
pub fn kappa_prime(t: f64) -> f64 {
    -density(t) / normalizer()
}

/// `κ″(t)`.
pub fn kappa_second(t: f64) -> f64 {
    if t <= A || t >= B {
        return 0.0;
    }
    -density(t) * (1.0 / (t - A).powi(2) - 1.0 / (B - t).powi(2)) / normalizer()
}

/// `u(x) = κ(‖x‖₂²)`.
pub fn mollifier_u(x: &[f64]) -> f64 {
    kappa(x.iter().map(|v| v * v).sum())
}

/// Over-estimate of `‖u‖_{C^{b,λ}([−2,2]^d)}` for `β ≤ 2`, where
/// `b = ⌈β⌉ − 1` and `λ = β − b`. Radial derivative bounds are taken from a
/// dense scan of `κ′, κ″` and inflated by 2%:
/// `sup|∇u| ≤ L₀ = sup 2√s|κ′(s)|`, `‖∇²u‖ ≤ L₁ = sup (2|κ′| + 4s|κ″|)`,
/// and a function with sup `M` and Lipschitz constant `L` has Hölder-`λ`
/// seminorm at most `(2M)^{1−λ} L^λ`. Returns `None` for `β > 2`.
pub fn holder_norm_overestimate(beta: f64) -> Option<f64> {
    if !(beta > 0.0 && beta <= 2.0) {
        return None;
    }
    static BOUNDS: OnceLock<(f64, f64)> = OnceLock::new();
    let &(l0, l1) = BOUNDS.get_or_init(|| {
        let steps = 200_000;
        let (mut l0, mut l1) = (0.0f64, 0.0f64);
        for i in 1..steps {
            let s = A + (B - A) * i as f64 / steps as f64;
            l0 = l0.max(2.0 * s.sqrt() * kappa_prime(s).abs());
            l1 = l1.max(2.0 * kappa_prime(s).abs() + 4.0 * s * kappa_second(s).abs());
        }
        (1.02 * l0, 1.02 * l1)
    });
    let b = beta.ceil() as i32 - 1;
    let lambda = beta - b as f64;
    let seminorm = |m: f64, l: f64| (2.0 * m).powf(1.0 - lambda) * l.powf(lambda);
    Some(if b == 0 { 1.0 + seminorm(1.0, l0) } else { 1f64.max(l0) + seminorm(l0, l1) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        assert_eq!(mollifier_u(&[0.0, 0.0]), 1.0);
        assert_eq!(mollifier_u(&[(1.0f64 / 8.0).sqrt()]), 0.0);
        assert_eq!(kappa(1.0 / 9.0), 1.0);
        let mid = kappa(0.12);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn kappa_is_monotone_and_symmetric() {
        let mut prev = 1.0;
        for i in 0..=400 {
            let t = A + (B - A) * i as f64 / 400.0;
            let k = kappa(t);
            // Monotone up to the 1e-10 quadrature accuracy.
            assert!(k <= prev + 1e-10, "t={t}");
            prev = k;
        }
        // The density is symmetric about the midpoint, so κ(mid) = 1/2.
        assert!((kappa(0.5 * (A + B)) - 0.5).abs() < 1e-10);
        // κ(t) + κ(A + B − t) = 1 by the same symmetry.
        for t in [0.112, 0.115, 0.119, 0.1235] {
            assert!((kappa(t) + kappa(A + B - t) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        for t in [0.113, 0.117, 0.121] {
            let h = 1e-7;
            let fd = (kappa(t + h) - kappa(t - h)) / (2.0 * h);
            assert!((fd - kappa_prime(t)).abs() < 1e-4 * kappa_prime(t).abs().max(1.0), "{t}: {fd} vs {}", kappa_prime(t));
            let fd2 = (kappa_prime(t + h) - kappa_prime(t - h)) / (2.0 * h);
            assert!((fd2 - kappa_second(t)).abs() < 1e-4 * kappa_second(t).abs().max(1.0));
        }
    }

    #[test]
    fn simpson_integrates_known_functions() {
        assert!((adaptive_simpson(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-12) - 2.0).abs() < 1e-10);
        assert!((adaptive_simpson(|x| (-x * x).exp(), -6.0, 6.0, 1e-12) - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn holder_overestimate_exceeds_sup() {
        for beta in [0.5, 1.0, 1.5, 2.0] {
            assert!(holder_norm_overestimate(beta).unwrap() > 1.0);
        }
        assert!(holder_norm_overestimate(2.5).is_none());
    }
}
