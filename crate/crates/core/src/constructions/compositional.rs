//! Approximation of compositions `h_q ∘ ⋯ ∘ h_1 ∘ h_0` whose coordinate
//! functions are Hölder functions of a few inputs or maxima of a few inputs.

use std::sync::Arc;

use super::{clip_net_vec, holder_approx, max_net, sup_error_grid, ConstructionError, ErrorCertificate};
use crate::grid::{default_resolution, UnitGrid};
use crate::net::{ComplexityStats, ReluNet};
use crate::Net;

/// A coordinate function of one stage, evaluated on its selected inputs.
pub type StageFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One coordinate function of a stage.
#[derive(Clone)]
pub enum Component {
    /// Hölder function of exactly `d_ast` coordinates of the stage input.
    Holder { inputs: Vec<usize>, f: StageFn },
    /// Maximum of at most `d_star` coordinates of the stage input.
    Max { inputs: Vec<usize> },
}

impl std::fmt::Debug for Component {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Component::Holder { inputs, .. } => write!(f, "Holder{inputs:?}"),
            Component::Max { inputs } => write!(f, "Max{inputs:?}"),
        }
    }
}

impl Component {
    fn inputs(&self) -> &[usize] {
        match self {
            Component::Holder { inputs, .. } | Component::Max { inputs } => inputs,
        }
    }

    fn eval(&self, x: &[f64], buf: &mut Vec<f64>) -> f64 {
        buf.clear();
        buf.extend(self.inputs().iter().map(|&i| x[i]));
        match self {
            Component::Holder { f, .. } => f(buf),
            Component::Max { .. } => buf.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)),
        }
    }
}

/// Description of a composite function on `[0,1]^d`.
#[derive(Clone, Debug)]
pub struct CompositionSpec {
    pub q: usize,
    /// Width of the intermediate stages.
    pub k: usize,
    pub d: usize,
    /// Largest fan-in of a maximum component.
    pub d_star: usize,
    /// Fan-in of every Hölder component.
    pub d_ast: usize,
    pub beta: f64,
    pub r: f64,
    /// `q + 1` stages; stages `0..q` have `k` components, the last has one.
    pub stages: Vec<Vec<Component>>,
}

impl CompositionSpec {
    /// Checks the dimension constraints of the class.
    pub fn validate(&self) -> Result<(), ConstructionError> {
        let bad = |m: String| Err(ConstructionError::InvalidParameter(m));
        if self.k == 0 || self.d == 0 || self.d_star == 0 || self.d_ast == 0 {
            return bad("k, d, d_star and d_ast must be positive".into());
        }
        let cap = if self.q == 0 { self.d } else { self.d.min(self.k) };
        if self.d_ast > cap {
            return bad(format!("d_ast = {} exceeds {cap}", self.d_ast));
        }
        if !(self.beta > 0.0 && self.r > 0.0) {
            return bad("beta and r must be positive".into());
        }
        if self.stages.len() != self.q + 1 {
            return bad(format!("expected {} stages, got {}", self.q + 1, self.stages.len()));
        }
        for (i, stage) in self.stages.iter().enumerate() {
            let want = if i == self.q { 1 } else { self.k };
            if stage.len() != want {
                return bad(format!("stage {i} has {} components, expected {want}", stage.len()));
            }
            let in_dim = if i == 0 { self.d } else { self.k };
            for c in stage {
                if c.inputs().iter().any(|&j| j >= in_dim) {
                    return bad(format!("stage {i} component {c:?} indexes outside dimension {in_dim}"));
                }
                match c {
                    Component::Holder { inputs, .. } if inputs.len() != self.d_ast => {
                        return bad(format!("stage {i} Hölder component uses {} inputs, expected {}", inputs.len(), self.d_ast));
                    }
                    Component::Max { inputs } if inputs.is_empty() || inputs.len() > self.d_star => {
                        return bad(format!("stage {i} max component uses {} inputs, allowed 1..={}", inputs.len(), self.d_star));
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Exact value of the composite function.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let mut cur = x.to_vec();
        let mut buf = Vec::new();
        for stage in &self.stages {
            cur = stage.iter().map(|c| c.eval(&cur, &mut buf)).collect();
        }
        cur[0]
    }

    /// `x ↦ Σ_{i<j} x_i x_j` on `[0,1]^4` with four-wide stages
    /// `(x₁x₂, x₃x₄, (x₁+x₂)/2, (x₃+x₄)/2)`, `(y₁/4 + y₂/4, y₃y₄, 0, 0)` and
    /// `4z₁ + 4z₂`.
    pub fn sum_of_pairwise_products() -> Self {
        let h = |inputs: [usize; 2], f: fn(&[f64]) -> f64| Component::Holder { inputs: inputs.to_vec(), f: Arc::new(f) };
        let prod: fn(&[f64]) -> f64 = |v| v[0] * v[1];
        let zero: fn(&[f64]) -> f64 = |_| 0.0;
        Self {
            q: 2,
            k: 4,
            d: 4,
            d_star: 2,
            d_ast: 2,
            beta: 2.0,
            r: 8.0,
            stages: vec![
                vec![h([0, 1], prod), h([2, 3], prod), h([0, 1], |v| (v[0] + v[1]) / 2.0), h([2, 3], |v| (v[0] + v[1]) / 2.0)],
                vec![h([0, 1], |v| (v[0] + v[1]) / 4.0), h([2, 3], prod), h([0, 1], zero), h([0, 1], zero)],
                vec![h([0, 1], |v| 4.0 * v[0] + 4.0 * v[1])],
            ],
        }
    }

    /// `x ↦ max_{i<j} x_i x_j` on `[0,1]^4` with the six pairwise products,
    /// then two maxima of three, then the maximum of the two.
    pub fn max_of_pairwise_products() -> Self {
        let pairs = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
        let prod = |p: [usize; 2]| Component::Holder { inputs: p.to_vec(), f: Arc::new(|v: &[f64]| v[0] * v[1]) };
        let zero = || Component::Holder { inputs: vec![0, 1], f: Arc::new(|_: &[f64]| 0.0) };
        let mut middle = vec![Component::Max { inputs: vec![0, 1, 2] }, Component::Max { inputs: vec![3, 4, 5] }];
        middle.extend((0..4).map(|_| zero()));
        Self {
            q: 2,
            k: 6,
            d: 4,
            d_star: 3,
            d_ast: 2,
            beta: 2.0,
            r: 2.0,
            stages: vec![pairs.iter().map(|&p| prod(p)).collect(), middle, vec![Component::Max { inputs: vec![0, 1] }]],
        }
    }
}

/// Outcome of [`compositional_approx`].
#[derive(Clone, Debug)]
pub struct CompositionalReport {
    /// Grid certificate of the composite against `ε/8`.
    pub certificate: ErrorCertificate,
    /// Per-stage accuracy parameter `δ`.
    pub delta: f64,
    /// Measured `sup ‖h̃_i − h_i‖_∞` for every stage, on its own domain.
    pub stage_deviations: Vec<f64>,
    /// Right-hand side of the composition error bound evaluated at the
    /// measured stage deviations.
    pub propagation_bound: f64,
    pub stats: ComplexityStats,
}

/// `(r̄·d_*^{1∧β})^{Σ_{k<q}(1∧β)^k} · Σ_k dev_k^{(1∧β)^{q−k}}` with `r̄ = max(r, 1)`.
pub fn composition_error_bound(r: f64, d_ast: usize, beta: f64, deviations: &[f64]) -> f64 {
    let b = beta.min(1.0);
    let q = deviations.len().saturating_sub(1);
    let exponent: f64 = (0..q).map(|k| b.powi(k as i32)).sum();
    let factor = (r.max(1.0) * (d_ast as f64).powf(b)).powf(exponent);
    factor * deviations.iter().enumerate().map(|(k, &e)| e.powf(b.powi((q - k) as i32))).sum::<f64>()
}

/// Network within `eps/8` of the composite on `[0,1]^d`.
///
/// Hölder components are approximated to `2δ` with
/// `δ = ½(ε/(8((1∨r)d_*)^q(q+1)))^{1/(1∧β)^q}`; maximum components are exact.
/// Intermediate stages are clamped to `[0,1]`.
pub fn compositional_approx(spec: &CompositionSpec, eps: f64) -> Result<(Net, CompositionalReport), ConstructionError> {
    spec.validate()?;
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(ConstructionError::InvalidParameter(format!("compositional_approx needs eps in (0, 1/2], got {eps}")));
    }
    let q = spec.q;
    let b = spec.beta.min(1.0);
    let base = eps / (8.0 * (spec.r.max(1.0) * spec.d_ast as f64).powi(q as i32) * (q as f64 + 1.0));
    let delta = 0.5 * base.powf(1.0 / b.powi(q as i32));
    let stage_eps = (2.0 * delta).min(0.5);

    let mut stage_nets = Vec::with_capacity(q + 1);
    let mut stage_deviations = Vec::with_capacity(q + 1);
    for (i, stage) in spec.stages.iter().enumerate() {
        let in_dim = if i == 0 { spec.d } else { spec.k };
        let mut parts = Vec::with_capacity(stage.len());
        for c in stage {
            let pick = ReluNet::select(in_dim, c.inputs())?;
            let part = match c {
                Component::Holder { f, .. } => {
                    let f = f.clone();
                    let (net, _) = holder_approx(&move |v: &[f64]| f(v), spec.d_ast, spec.beta, spec.r, stage_eps)?;
                    ReluNet::compose(&net, &pick)?
                }
                Component::Max { inputs } => ReluNet::compose(&max_net(inputs.len())?, &pick)?,
            };
            parts.push(part);
        }
        let mut net = ReluNet::parallel(&parts)?;
        if i < q {
            net = ReluNet::compose(&clip_net_vec(spec.k, 0.0, 1.0)?, &net)?;
        }
        stage_deviations.push(stage_deviation(&net, stage, in_dim));
        stage_nets.push(net);
    }
    let mut net = stage_nets[0].clone();
    for s in &stage_nets[1..] {
        net = ReluNet::compose(s, &net)?;
    }

    let grid = UnitGrid::new(spec.d, default_resolution(spec.d));
    let measured = sup_error_grid(&net, |x| spec.evaluate(x), &grid);
    let propagation_bound = composition_error_bound(spec.r, spec.d_ast, spec.beta, &stage_deviations);
    let certificate = ErrorCertificate::new(
        "compositional",
        format!("q={q};K={};d={};d_star={};d_ast={};beta={};r={};eps={eps};delta={delta:e}", spec.k, spec.d, spec.d_star, spec.d_ast, spec.beta, spec.r),
        format!("[0,1]^{}", spec.d),
        grid.len(),
        measured,
        eps / 8.0,
    );
    let stats = net.complexity();
    Ok((net, CompositionalReport { certificate, delta, stage_deviations, propagation_bound, stats }))
}

/// `sup_x max_j |h̃_{i,j}(x) − h_{i,j}(x)|` on a grid of the stage domain.
fn stage_deviation(net: &Net, stage: &[Component], in_dim: usize) -> f64 {
    let grid = UnitGrid::new(in_dim, default_resolution(in_dim));
    let mut scratch = Default::default();
    let mut x = vec![0.0; in_dim];
    let mut buf = Vec::new();
    let mut worst: f64 = 0.0;
    for idx in 0..grid.len() {
        grid.point_into(idx, &mut x);
        let out = net.evaluate_with(&x, &mut scratch);
        for (c, &y) in stage.iter().zip(out.iter()) {
            let e = (y - c.eval(&x, &mut buf)).abs();
            worst = worst.max(if e.is_nan() { f64::INFINITY } else { e });
        }
    }
    worst
}
