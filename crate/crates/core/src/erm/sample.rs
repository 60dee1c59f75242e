//! Labelled samples drawn from a data distribution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::risk::{logistic_loss, DataDistribution, Decision};

/// `n` pairs `(x_i, y_i)` with `x_i ∈ [0,1]^d` stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub d: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub seed: u64,
}

impl Sample {
    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    /// The `i`-th input.
    pub fn x(&self, i: usize) -> &[f64] {
        &self.xs[i * self.d..(i + 1) * self.d]
    }

    /// `(1/n) Σ φ(y_i f(x_i))`; `NaN` for an empty sample.
    pub fn empirical_risk(&self, f: Decision<'_>) -> f64 {
        (0..self.len()).map(|i| logistic_loss(self.ys[i] * f(self.x(i)))).sum::<f64>() / self.len() as f64
    }

    /// Fraction of `+1` labels.
    pub fn positive_fraction(&self) -> f64 {
        self.ys.iter().filter(|&&y| y > 0.0).count() as f64 / self.len() as f64
    }
}

/// Draws `n` i.i.d. pairs: `x ~ Q`, then `y = +1` with probability `η(x)`.
pub fn sample(p: &DataDistribution, n: usize, seed: u64) -> Sample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = vec![0.0; n * p.d];
    let mut ys = Vec::with_capacity(n);
    for x in xs.chunks_exact_mut(p.d.max(1)).take(n) {
        p.sample_x(&mut rng, x);
        let u: f64 = rng.gen();
        ys.push(if u < p.eta_at(x) { 1.0 } else { -1.0 });
    }
    Sample { d: p.d, xs, ys, seed }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    #[test]
    fn deterministic_labels() {
        let ones = sample(&DataDistribution::uniform(2, Arc::new(|_: &[f64]| 1.0)), 500, 1);
        assert!(ones.ys.iter().all(|&y| y == 1.0));
        let zeros = sample(&DataDistribution::uniform(2, Arc::new(|_: &[f64]| 0.0)), 500, 1);
        assert!(zeros.ys.iter().all(|&y| y == -1.0));
        assert!(ones.xs.iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn fair_coin_fraction() {
        let n = 100_000;
        let s = sample(&DataDistribution::uniform(1, Arc::new(|_: &[f64]| 0.5)), n, 9);
        let sd = (0.25 / n as f64).sqrt();
        assert!((s.positive_fraction() - 0.5).abs() <= (3.0 * sd).min(0.01));
    }

    #[test]
    fn reproducible_by_seed() {
        let p = DataDistribution::uniform(3, Arc::new(|x: &[f64]| x[0]));
        assert_eq!(sample(&p, 300, 4), sample(&p, 300, 4));
        assert_ne!(sample(&p, 300, 4), sample(&p, 300, 5));
    }
}
