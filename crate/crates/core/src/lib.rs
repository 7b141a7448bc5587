//! Physics-informed neural networks (MLP backbones) and physics-informed
//! Kolmogorov–Arnold networks (B-spline backbones) for nine ODE/PDE forward
//! problems, trained under a matched-parameter protocol.
//!
//! The crate is organised bottom-up:
//!
//! * [`diffengine`] – second-order jets for input derivatives and a reverse
//!   tape for parameter gradients.
//! * [`splines`] – uniform extended knot vectors and Cox–de Boor bases.
//! * [`networks`] – MLP and KAN forward passes, parameter layout and counts.
//! * [`problems`] – residual operators, conditions and exact solutions.
//! * [`refsolve`] – RK4 and explicit finite-difference reference solutions.
//! * [`training`] – collocation, composite loss, Adam, seeded training runs.
//! * [`metrics`] – relative L² / L∞ errors, aggregation and smoothing.

pub mod diffengine;
pub mod error;
pub mod metrics;
pub mod networks;
pub mod problems;
pub mod refsolve;
pub mod rng;
pub mod splines;
pub mod training;

pub use diffengine::{Jet2, Scalar, Tape, Var};
pub use error::{Error, Result};
pub use networks::{Model, Network, NetworkKind, NetworkSpec, ParameterVector};
pub use problems::{Problem, ProblemId};
