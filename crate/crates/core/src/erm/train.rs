//! Approximate empirical risk minimization over a network class by projected
//! Adam on a dense architecture, followed by an appended output clamp.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::Serialize;

use super::{ErmError, Sample};
use crate::constructions::clip_net;
use crate::matrix::Matrix;
use crate::net::{ComplexityBudget, ComplexityStats, Layer, ReluNet};
use crate::risk::logistic_loss;
use crate::Net;

/// Optimizer settings together with the target class `F(G, N, S, B, F)`.
///
/// The trained architecture has `G − 1` dense hidden layers of width `N`;
/// the clamp to `[−F, F]` contributes the last hidden layer.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainConfig {
    pub budget: ComplexityBudget,
    pub steps: usize,
    pub step_size: f64,
    pub batch: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl TrainConfig {
    /// Hidden depth and width of the trained part.
    pub fn architecture(&self) -> (usize, usize) {
        (self.budget.g as usize - 1, self.budget.n as usize)
    }

    /// Number of parameters of the dense architecture after the clamp is
    /// appended, an upper bound on its nonzero count.
    pub fn dense_size(&self, d: usize) -> usize {
        let (h, n) = self.architecture();
        d * n + n + (h - 1) * (n * n + n) + 2 * n + 6
    }

    /// Budget with `S` set to the dense size, the smallest admissible value.
    pub fn fit_sparsity(mut self, d: usize) -> Self {
        self.budget.s = self.dense_size(d) as f64;
        self
    }

    fn validate(&self, d: usize) -> Result<(), ErmError> {
        let b = &self.budget;
        let bad = |m: String| Err(ErmError::InvalidParameter(m));
        if !(b.g >= 2.0 && b.g.is_finite()) || !(b.n >= 3.0 && b.n.is_finite()) {
            return bad(format!("training needs finite G >= 2 and N >= 3, got G={}, N={}", b.g, b.n));
        }
        if !(b.f > 0.0 && b.f.is_finite()) || !(b.b >= b.f) {
            return bad(format!("training needs 0 < F < inf and B >= F for the clamp, got B={}, F={}", b.b, b.f));
        }
        if (self.dense_size(d) as f64) > b.s {
            return bad(format!("dense architecture has {} parameters, more than S = {}", self.dense_size(d), b.s));
        }
        if self.steps == 0 || self.batch == 0 || self.restarts == 0 || !(self.step_size > 0.0) {
            return bad("steps, batch, restarts and step_size must be positive".into());
        }
        Ok(())
    }
}

/// Outcome of [`erm_train`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainReport {
    /// Empirical logistic risk of the returned (clamped) network.
    pub empirical_risk: f64,
    /// Final empirical risk of every restart, `NaN` for diverged ones.
    pub restart_risks: Vec<f64>,
    pub best_restart: usize,
    /// Spread between the worst and the best finite restart.
    pub restart_gap: f64,
    pub diverged: usize,
    /// Largest parameter magnitude seen after any projection step.
    pub max_abs_param: f64,
    pub stats: ComplexityStats,
    pub member: bool,
}

// ── Dense model ──

struct Dense {
    dims: Vec<usize>,
    params: Vec<f64>,
    /// Offsets of `(W_l, v_l)` per hidden layer, then of the output row.
    offsets: Vec<(usize, usize)>,
    out_offset: usize,
}

impl Dense {
    fn new(d: usize, hidden: usize, width: usize) -> Self {
        let mut dims = vec![d];
        dims.extend(std::iter::repeat(width).take(hidden));
        let mut offsets = Vec::new();
        let mut at = 0;
        for l in 0..hidden {
            let (i, o) = (dims[l], dims[l + 1]);
            offsets.push((at, at + o * i));
            at += o * i + o;
        }
        let out_offset = at;
        Self { params: vec![0.0; at + width], dims, offsets, out_offset }
    }

    fn init(&mut self, rng: &mut ChaCha8Rng) {
        let hidden = self.offsets.len();
        for l in 0..hidden {
            let (i, o) = (self.dims[l], self.dims[l + 1]);
            let (wo, vo) = self.offsets[l];
            let normal = Normal::new(0.0, (2.0 / i as f64).sqrt()).expect("finite std");
            for k in 0..o * i {
                self.params[wo + k] = normal.sample(rng);
            }
            if l == 0 {
                // Put the first-layer kinks through random points of the cube.
                let unit = Uniform::new(0.0, 1.0);
                for r in 0..o {
                    let c: f64 = (0..i).map(|k| self.params[wo + r * i + k] * unit.sample(rng)).sum();
                    self.params[vo + r] = c;
                }
            }
        }
        let w = *self.dims.last().expect("nonempty dims");
        let normal = Normal::new(0.0, (1.0 / w as f64).sqrt()).expect("finite std");
        for k in 0..w {
            self.params[self.out_offset + k] = normal.sample(rng);
        }
    }

    fn forward(&self, x: &[f64], acts: &mut [Vec<f64>]) -> f64 {
        acts[0].copy_from_slice(x);
        for l in 0..self.offsets.len() {
            let (i, o) = (self.dims[l], self.dims[l + 1]);
            let (wo, vo) = self.offsets[l];
            let (prev, next) = acts.split_at_mut(l + 1);
            let a = &prev[l];
            for r in 0..o {
                let row = &self.params[wo + r * i..wo + (r + 1) * i];
                let z: f64 = row.iter().zip(a).map(|(w, v)| w * v).sum::<f64>() - self.params[vo + r];
                next[0][r] = z.max(0.0);
            }
        }
        let last = acts.last().expect("nonempty activations");
        self.params[self.out_offset..].iter().zip(last).map(|(w, v)| w * v).sum()
    }

    /// Adds `g · ∂f/∂θ` at the activations of the last forward pass.
    fn backward(&self, g: f64, acts: &[Vec<f64>], grad: &mut [f64], delta: &mut Vec<f64>, next: &mut Vec<f64>) {
        let hidden = self.offsets.len();
        let last = &acts[hidden];
        delta.clear();
        for (k, &a) in last.iter().enumerate() {
            grad[self.out_offset + k] += g * a;
            delta.push(if a > 0.0 { g * self.params[self.out_offset + k] } else { 0.0 });
        }
        for l in (0..hidden).rev() {
            let (i, o) = (self.dims[l], self.dims[l + 1]);
            let (wo, vo) = self.offsets[l];
            let a = &acts[l];
            next.clear();
            next.resize(i, 0.0);
            for r in 0..o {
                let dr = delta[r];
                if dr == 0.0 {
                    continue;
                }
                grad[vo + r] -= dr;
                let base = wo + r * i;
                for k in 0..i {
                    grad[base + k] += dr * a[k];
                    next[k] += dr * self.params[base + k];
                }
            }
            if l > 0 {
                for (n, &a) in next.iter_mut().zip(a) {
                    if a <= 0.0 {
                        *n = 0.0;
                    }
                }
            }
            std::mem::swap(delta, next);
        }
    }

    fn empirical_risk(&self, sample: &Sample, clamp: f64, acts: &mut [Vec<f64>]) -> f64 {
        let mut total = 0.0;
        for i in 0..sample.len() {
            let f = self.forward(sample.x(i), acts).clamp(-clamp, clamp);
            total += logistic_loss(sample.ys[i] * f);
        }
        total / sample.len() as f64
    }

    fn to_net(&self, clamp: f64) -> Result<Net, ErmError> {
        let mut layers = Vec::with_capacity(self.offsets.len());
        for l in 0..self.offsets.len() {
            let (i, o) = (self.dims[l], self.dims[l + 1]);
            let (wo, vo) = self.offsets[l];
            let w = Matrix::from_vec(o, i, self.params[wo..wo + o * i].to_vec()).expect("layer shape");
            layers.push(Layer::new(w, self.params[vo..vo + o].to_vec()));
        }
        let out = Matrix::from_vec(1, *self.dims.last().expect("dims"), self.params[self.out_offset..].to_vec()).expect("output shape");
        let raw = ReluNet::new(self.dims[0], layers, out)?;
        Ok(ReluNet::compose(&clip_net(-clamp, clamp)?, &raw)?)
    }
}

fn new_activations(dims: &[usize]) -> Vec<Vec<f64>> {
    dims.iter().map(|&k| vec![0.0; k]).collect()
}

// ── Training ──

/// Trains a network in `F(G, N, S, B, F)` on `sample` by projected Adam with
/// restarts and returns the restart with the smallest empirical risk.
pub fn erm_train(sample: &Sample, cfg: &TrainConfig) -> Result<(Net, TrainReport), ErmError> {
    if sample.is_empty() {
        return Err(ErmError::InvalidParameter("erm_train needs a nonempty sample".into()));
    }
    cfg.validate(sample.d)?;
    let (hidden, width) = cfg.architecture();
    let (bound, clamp) = (cfg.budget.b, cfg.budget.f);
    let mut best: Option<(f64, usize, Dense)> = None;
    let mut restart_risks = Vec::with_capacity(cfg.restarts);
    let mut max_abs_param = 0.0f64;
    for restart in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(restart as u64);
        let mut model = Dense::new(sample.d, hidden, width);
        model.init(&mut rng);
        project(&mut model.params, bound);
        let outcome = run_adam(&mut model, sample, cfg, &mut rng, &mut max_abs_param);
        let risk = match outcome {
            Some(()) => model.empirical_risk(sample, clamp, &mut new_activations(&model.dims)),
            None => f64::NAN,
        };
        restart_risks.push(risk);
        if risk.is_finite() && best.as_ref().map_or(true, |b| risk < b.0) {
            best = Some((risk, restart, model));
        }
    }
    let (risk, best_restart, model) = best.ok_or_else(|| ErmError::Diverged(format!("all {} restarts diverged", cfg.restarts)))?;
    let net = model.to_net(clamp)?;
    let finite: Vec<f64> = restart_risks.iter().copied().filter(|r| r.is_finite()).collect();
    let restart_gap = finite.iter().fold(f64::NEG_INFINITY, |m, &r| m.max(r)) - risk;
    let grid = crate::grid::default_resolution(sample.d).min(200);
    let member = net.is_member(&cfg.budget, grid);
    let report = TrainReport {
        empirical_risk: risk,
        diverged: cfg.restarts - finite.len(),
        restart_risks,
        best_restart,
        restart_gap,
        max_abs_param,
        stats: net.complexity(),
        member,
    };
    Ok((net, report))
}

fn project(params: &mut [f64], bound: f64) {
    for p in params.iter_mut() {
        *p = p.clamp(-bound, bound);
    }
}

/// Runs the optimizer in place; `None` when the loss stops being finite.
fn run_adam(model: &mut Dense, sample: &Sample, cfg: &TrainConfig, rng: &mut ChaCha8Rng, max_abs: &mut f64) -> Option<()> {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;
    let n = sample.len();
    let batch = cfg.batch.min(n);
    let p = model.params.len();
    let (mut m, mut v, mut grad) = (vec![0.0; p], vec![0.0; p], vec![0.0; p]);
    let mut order: Vec<usize> = (0..n).collect();
    let mut cursor = n;
    let mut acts = new_activations(&model.dims);
    let (mut delta, mut next) = (Vec::new(), Vec::new());
    let (mut b1t, mut b2t) = (1.0, 1.0);
    for step in 0..cfg.steps {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for _ in 0..batch {
            if cursor == n {
                order.shuffle(rng);
                cursor = 0;
            }
            let i = order[cursor];
            cursor += 1;
            let y = sample.ys[i];
            let f = model.forward(sample.x(i), &mut acts);
            loss += logistic_loss(y * f);
            // d/df φ(yf) = −y / (1 + e^{yf}).
            let g = -y / (1.0 + (y * f).exp()) / batch as f64;
            model.backward(g, &acts, &mut grad, &mut delta, &mut next);
        }
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return None;
        }
        // Cosine decay down to a hundredth of the initial step size.
        let progress = step as f64 / cfg.steps as f64;
        let lr = cfg.step_size * (0.01 + 0.99 * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos()));
        b1t *= BETA1;
        b2t *= BETA2;
        for k in 0..p {
            m[k] = BETA1 * m[k] + (1.0 - BETA1) * grad[k];
            v[k] = BETA2 * v[k] + (1.0 - BETA2) * grad[k] * grad[k];
            let step = lr * (m[k] / (1.0 - b1t)) / ((v[k] / (1.0 - b2t)).sqrt() + EPS);
            model.params[k] = (model.params[k] - step).clamp(-cfg.budget.b, cfg.budget.b);
        }
        let top = model.params.iter().fold(0.0f64, |a, w| a.max(w.abs()));
        assert!(top <= cfg.budget.b, "projection left a parameter of size {top} above B = {}", cfg.budget.b);
        *max_abs = max_abs.max(top);
    }
    Some(())
}
