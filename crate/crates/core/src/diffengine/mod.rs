//! Exact derivatives for physics-informed training.
//!
//! Input derivatives are carried forward as truncated Taylor jets
//! ([`Jet2`]) along one seeded coordinate direction at a time. Every jet
//! component is itself a [`Scalar`], so running the same computation over
//! [`Var`]s records it on a [`Tape`] and a single reverse sweep yields the
//! gradient of the loss with respect to all parameters, including the
//! mixed terms such as ∂/∂θ of ∂²u/∂x².

mod check;
mod jet;
mod scalar;
mod tape;

pub use check::{fd_check, fd_gradient};
pub use jet::{jet_arith, jet_func, seed_input, ArithOp, Jet2, UnaryFunc};
pub use scalar::Scalar;
pub use tape::{param_gradient, Adjoints, Tape, Var};
pub(crate) use jet::{silu_derivs, tanh_derivs};

/// Alias naming the role a [`Var`] plays in a loss computation.
pub type DifferentiableScalar<'t> = Var<'t>;
