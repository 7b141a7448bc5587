use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

/// A real number that may carry provenance for reverse accumulation.
///
/// Everything differentiable in this crate is expressed through
/// [`Scalar::compose`]: a new quantity is defined by its value together with
/// the local partial derivatives with respect to the quantities it was
/// computed from. For plain `f64` the partials are discarded; for
/// [`Var`](super::Var) they become tape entries.
pub trait Scalar:
    Copy + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn value(self) -> f64;

    /// A quantity with no dependence on any recorded input.
    fn constant(value: f64) -> Self;

    /// Builds a dependent quantity from its value and `(parent, ∂self/∂parent)` pairs.
    ///
    /// Callers must pass partials evaluated at the parents' current values.
    fn compose<I>(value: f64, parents: I) -> Self
    where
        I: IntoIterator<Item = (Self, f64)>;

    #[inline]
    fn zero() -> Self {
        Self::constant(0.0)
    }

    #[inline]
    fn scale(self, c: f64) -> Self {
        Self::compose(self.value() * c, [(self, c)])
    }

    #[inline]
    fn offset(self, c: f64) -> Self {
        Self::compose(self.value() + c, [(self, 1.0)])
    }

    #[inline]
    fn square(self) -> Self {
        let v = self.value();
        Self::compose(v * v, [(self, 2.0 * v)])
    }

    /// Σ aᵢ·bᵢ as a single node.
    fn dot(pairs: &[(Self, Self)]) -> Self {
        let value = pairs.iter().map(|(a, b)| a.value() * b.value()).sum();
        Self::compose(
            value,
            pairs
                .iter()
                .flat_map(|&(a, b)| [(a, b.value()), (b, a.value())]),
        )
    }

    /// Σ cᵢ·xᵢ with constant coefficients, as a single node.
    fn weighted_sum(terms: &[(Self, f64)]) -> Self {
        let value = terms.iter().map(|(x, c)| x.value() * c).sum();
        Self::compose(value, terms.iter().copied())
    }
}

impl Scalar for f64 {
    #[inline]
    fn value(self) -> f64 {
        self
    }

    #[inline]
    fn constant(value: f64) -> Self {
        value
    }

    #[inline]
    fn compose<I>(value: f64, _parents: I) -> Self
    where
        I: IntoIterator<Item = (Self, f64)>,
    {
        value
    }

    #[inline]
    fn dot(pairs: &[(Self, Self)]) -> Self {
        pairs.iter().map(|(a, b)| a * b).sum()
    }

    #[inline]
    fn weighted_sum(terms: &[(Self, f64)]) -> Self {
        terms.iter().map(|(x, c)| x * c).sum()
    }
}
