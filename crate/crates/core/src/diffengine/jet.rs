use std::ops::{Add, Mul, Neg, Sub};

use smallvec::SmallVec;

use super::Scalar;
use crate::error::{Error, Result};

/// Truncated second-order Taylor coefficients along one input direction.
///
/// For a quantity `u(x + s·e)` the jet holds `(u, du/ds, d²u/ds²)` at `s = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2<S = f64> {
    pub v: S,
    pub d1: S,
    pub d2: S,
}

/// Seeds an input coordinate: active coordinates move with the direction.
pub fn seed_input<S: Scalar>(value: f64, active: bool) -> Jet2<S> {
    Jet2 {
        v: S::constant(value),
        d1: S::constant(if active { 1.0 } else { 0.0 }),
        d2: S::zero(),
    }
}

impl<S: Scalar> Jet2<S> {
    pub fn new(v: S, d1: S, d2: S) -> Self {
        Self { v, d1, d2 }
    }

    pub fn constant(value: f64) -> Self {
        Self::from_scalar(S::constant(value))
    }

    /// A scalar that does not vary along the seeded direction.
    pub fn from_scalar(v: S) -> Self {
        Self {
            v,
            d1: S::zero(),
            d2: S::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn values(&self) -> (f64, f64, f64) {
        (self.v.value(), self.d1.value(), self.d2.value())
    }

    pub fn scale(self, c: f64) -> Self {
        Self {
            v: self.v.scale(c),
            d1: self.d1.scale(c),
            d2: self.d2.scale(c),
        }
    }

    pub fn offset(self, c: f64) -> Self {
        Self {
            v: self.v.offset(c),
            ..self
        }
    }

    /// Applies a univariate function given `[f, f′, f″, f‴]` at `self.v`.
    ///
    /// The third derivative is what makes ∂/∂θ of the second coefficient exact.
    pub fn map(self, f: [f64; 4]) -> Self {
        let d1 = self.d1.value();
        let d2 = self.d2.value();
        let [f0, f1, f2, f3] = f;
        Self {
            v: S::compose(f0, [(self.v, f1)]),
            d1: S::compose(f1 * d1, [(self.v, f2 * d1), (self.d1, f1)]),
            d2: S::compose(
                f2 * d1 * d1 + f1 * d2,
                [
                    (self.v, f3 * d1 * d1 + f2 * d2),
                    (self.d1, 2.0 * f2 * d1),
                    (self.d2, f1),
                ],
            ),
        }
    }

    pub fn exp(self) -> Self {
        let e = self.v.value().exp();
        self.map([e; 4])
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.value().sin_cos();
        self.map([s, c, -s, -c])
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.value().sin_cos();
        self.map([c, -s, -c, s])
    }

    pub fn sinh(self) -> Self {
        let x = self.v.value();
        let (sh, ch) = (x.sinh(), x.cosh());
        self.map([sh, ch, sh, ch])
    }

    pub fn tanh(self) -> Self {
        self.map(tanh_derivs(self.v.value()))
    }

    pub fn sigmoid(self) -> Self {
        self.map(sigmoid_derivs(self.v.value()))
    }

    pub fn silu(self) -> Self {
        self.map(silu_derivs(self.v.value()))
    }

    pub fn recip(self) -> Result<Self> {
        let x = self.v.value();
        if x == 0.0 {
            return Err(Error::Domain("reciprocal of zero".into()));
        }
        let r = 1.0 / x;
        Ok(self.map([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]))
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        if rhs.v.value() == 0.0 {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(self * rhs.recip()?)
    }

    pub fn powi(self, n: i32) -> Result<Self> {
        let x = self.v.value();
        if x == 0.0 && n < 0 {
            return Err(Error::Domain(format!("0 raised to negative power {n}")));
        }
        let falling = |k: i32| (0..k).map(|i| (n - i) as f64).product::<f64>();
        let term = |k: i32| {
            let c = falling(k);
            if c == 0.0 {
                0.0
            } else {
                c * x.powi(n - k)
            }
        };
        Ok(self.map([term(0), term(1), term(2), term(3)]))
    }

    /// Σ wᵢ·xᵢ + b, where the weights are scalars constant along the direction.
    pub fn affine(weights: &[S], inputs: &[Self], bias: Option<S>) -> Self {
        debug_assert_eq!(weights.len(), inputs.len());
        let pairs = || weights.iter().zip(inputs);
        let b = bias.map_or(0.0, |b| b.value());
        let v = S::compose(
            pairs().map(|(w, x)| w.value() * x.v.value()).sum::<f64>() + b,
            pairs()
                .flat_map(|(&w, x)| [(w, x.v.value()), (x.v, w.value())])
                .chain(bias.map(|b| (b, 1.0))),
        );
        let d1 = S::compose(
            pairs().map(|(w, x)| w.value() * x.d1.value()).sum(),
            pairs().flat_map(|(&w, x)| [(w, x.d1.value()), (x.d1, w.value())]),
        );
        let d2 = S::compose(
            pairs().map(|(w, x)| w.value() * x.d2.value()).sum(),
            pairs().flat_map(|(&w, x)| [(w, x.d2.value()), (x.d2, w.value())]),
        );
        Self { v, d1, d2 }
    }

    /// Σ sᵢ·Jᵢ for scalar factors constant along the direction.
    pub fn sum_of_scaled(terms: &[(S, Self)]) -> Self {
        let weights: SmallVec<[S; 32]> = terms.iter().map(|t| t.0).collect();
        let jets: SmallVec<[Self; 32]> = terms.iter().map(|t| t.1).collect();
        Self::affine(&weights, &jets, None)
    }
}

pub(crate) fn tanh_derivs(x: f64) -> [f64; 4] {
    let t = x.tanh();
    let t1 = 1.0 - t * t;
    [t, t1, -2.0 * t * t1, -2.0 * t1 * (1.0 - 3.0 * t * t)]
}

pub(crate) fn sigmoid_derivs(x: f64) -> [f64; 4] {
    let s = 1.0 / (1.0 + (-x).exp());
    let s1 = s * (1.0 - s);
    let s2 = s1 * (1.0 - 2.0 * s);
    let s3 = s2 * (1.0 - 2.0 * s) - 2.0 * s1 * s1;
    [s, s1, s2, s3]
}

pub(crate) fn silu_derivs(x: f64) -> [f64; 4] {
    let [s, s1, s2, s3] = sigmoid_derivs(x);
    [x * s, s + x * s1, 2.0 * s1 + x * s2, 3.0 * s2 + x * s3]
}

impl<S: Scalar> Add for Jet2<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            v: self.v + rhs.v,
            d1: self.d1 + rhs.d1,
            d2: self.d2 + rhs.d2,
        }
    }
}

impl<S: Scalar> Sub for Jet2<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            v: self.v - rhs.v,
            d1: self.d1 - rhs.d1,
            d2: self.d2 - rhs.d2,
        }
    }
}

impl<S: Scalar> Neg for Jet2<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            v: -self.v,
            d1: -self.d1,
            d2: -self.d2,
        }
    }
}

impl<S: Scalar> Mul for Jet2<S> {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let a = self;
        let (av, ad1, ad2) = a.values();
        let (bv, bd1, bd2) = b.values();
        Self {
            v: a.v * b.v,
            d1: S::compose(
                ad1 * bv + av * bd1,
                [(a.d1, bv), (b.v, ad1), (a.v, bd1), (b.d1, av)],
            ),
            d2: S::compose(
                ad2 * bv + 2.0 * ad1 * bd1 + av * bd2,
                [
                    (a.d2, bv),
                    (b.v, ad2),
                    (a.d1, 2.0 * bd1),
                    (b.d1, 2.0 * ad1),
                    (a.v, bd2),
                    (b.d2, av),
                ],
            ),
        }
    }
}

/// Binary and power operations on jets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Negation of the first operand; the second is ignored.
    Neg,
    /// Integer power of the first operand; the second is ignored.
    PowInt(i32),
}

pub fn jet_arith<S: Scalar>(op: ArithOp, a: Jet2<S>, b: Jet2<S>) -> Result<Jet2<S>> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.checked_div(b)?,
        ArithOp::Neg => -a,
        ArithOp::PowInt(n) => a.powi(n)?,
    })
}

/// The univariate primitives used by residuals, exact solutions and activations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryFunc {
    Exp,
    Sin,
    Cos,
    Sinh,
    Tanh,
    Sigmoid,
    Silu,
}

pub fn jet_func<S: Scalar>(f: UnaryFunc, x: Jet2<S>) -> Jet2<S> {
    match f {
        UnaryFunc::Exp => x.exp(),
        UnaryFunc::Sin => x.sin(),
        UnaryFunc::Cos => x.cos(),
        UnaryFunc::Sinh => x.sinh(),
        UnaryFunc::Tanh => x.tanh(),
        UnaryFunc::Sigmoid => x.sigmoid(),
        UnaryFunc::Silu => x.silu(),
    }
}
