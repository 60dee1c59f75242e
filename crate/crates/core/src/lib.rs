//! Explicit ReLU network constructions for logistic-loss classification,
//! numerical checks of the accompanying risk inequalities, and desk-scale
//! empirical risk minimization experiments.

pub mod cli;
pub mod constructions;
pub mod erm;
pub mod grid;
pub mod lower_bounds;
pub mod matrix;
pub mod net;
pub mod risk;
pub mod scalar;

pub use matrix::Matrix;
pub use net::{ComplexityBudget, ComplexityStats, Layer, NetError, Padding, ReluNet, Scratch};
pub use scalar::Scalar;

/// Double-precision network, the default for every construction.
pub type Net = ReluNet<f64>;
/// Single-precision network.
pub type NetF32 = ReluNet<f32>;
