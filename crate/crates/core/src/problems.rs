//! The nine forward problems: residual operators over jets, initial and
//! boundary conditions, closed-form solutions and training schedules.
//!
//! Two-dimensional problems use the coordinate order `(x, y)` or `(x, t)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diffengine::{Jet2, Scalar};
use crate::error::{config, Error, Result};
use crate::networks::Model;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemId {
    Logistic,
    Oscillatory,
    Harmonic,
    Airy,
    Laplace,
    Poisson,
    Heat,
    Wave,
    Burgers,
}

impl ProblemId {
    pub const ALL: [ProblemId; 9] = [
        ProblemId::Logistic,
        ProblemId::Oscillatory,
        ProblemId::Harmonic,
        ProblemId::Airy,
        ProblemId::Laplace,
        ProblemId::Poisson,
        ProblemId::Heat,
        ProblemId::Wave,
        ProblemId::Burgers,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemId::Logistic => "logistic",
            ProblemId::Oscillatory => "oscillatory",
            ProblemId::Harmonic => "harmonic",
            ProblemId::Airy => "airy",
            ProblemId::Laplace => "laplace",
            ProblemId::Poisson => "poisson",
            ProblemId::Heat => "heat",
            ProblemId::Wave => "wave",
            ProblemId::Burgers => "burgers",
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        ProblemId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| config(format!("unknown problem '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionKind {
    Value,
    /// First derivative along `direction`.
    Derivative { direction: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Location {
    Point(Vec<f64>),
    /// Domain edge where coordinate `axis` equals `value`; the other
    /// coordinate spans its full range.
    Segment { axis: usize, value: f64 },
}

/// One initial or boundary condition.
#[derive(Clone, Debug)]
pub struct Condition {
    pub name: &'static str,
    pub kind: ConditionKind,
    pub location: Location,
    pub target: fn(&[f64]) -> f64,
}

impl Condition {
    /// Points where the condition is enforced. Segments receive `n_segment`
    /// equally spaced points including both ends.
    pub fn points(&self, domain: &[(f64, f64)], n_segment: usize) -> Vec<Vec<f64>> {
        match &self.location {
            Location::Point(p) => vec![p.clone()],
            Location::Segment { axis, value } => {
                let free = 1 - axis;
                let (lo, hi) = domain[free];
                linspace(lo, hi, n_segment)
                    .into_iter()
                    .map(|s| {
                        let mut p = vec![0.0; 2];
                        p[*axis] = *value;
                        p[free] = s;
                        p
                    })
                    .collect()
            }
        }
    }

    pub fn target_at(&self, point: &[f64]) -> f64 {
        (self.target)(point)
    }

    /// Direction whose jet this condition reads, if any.
    pub fn direction(&self) -> Option<usize> {
        match self.kind {
            ConditionKind::Value => None,
            ConditionKind::Derivative { direction } => Some(direction),
        }
    }

    /// The compared network quantity taken from a jet.
    pub fn quantity<S: Scalar>(&self, jet: &Jet2<S>) -> S {
        match self.kind {
            ConditionKind::Value => jet.v,
            ConditionKind::Derivative { .. } => jet.d1,
        }
    }
}

/// `n` equally spaced points on `[lo, hi]`, endpoints exact.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let m = (n - 1) as f64;
            (0..n)
                .map(|i| {
                    let s = i as f64;
                    (lo * (m - s) + hi * s) / m
                })
                .collect()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSchedule {
    pub learning_rate: f64,
    pub iterations: usize,
    pub n_collocation: usize,
    pub grid: usize,
    pub order: usize,
}

/// A forward problem and everything needed to train and score it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Problem {
    pub id: ProblemId,
}

pub type ProblemSpec = Problem;

fn zero(_: &[f64]) -> f64 {
    0.0
}

fn one(_: &[f64]) -> f64 {
    1.0
}

fn tenth(_: &[f64]) -> f64 {
    0.1
}

fn sin_pi_x(p: &[f64]) -> f64 {
    (PI * p[0]).sin()
}

fn neg_sin_pi_x(p: &[f64]) -> f64 {
    -(PI * p[0]).sin()
}

fn oscillatory_denominator(x: f64) -> f64 {
    2.0 + 1.5 * (4.0 * PI * x).sin()
}

/// Right-hand side `y′ = 1 − y/(2 + 1.5·sin 4πx)`.
pub fn oscillatory_rhs(x: f64, y: f64) -> f64 {
    1.0 - y / oscillatory_denominator(x)
}

impl Problem {
    pub fn new(id: ProblemId) -> Self {
        Self { id }
    }

    pub fn all() -> impl Iterator<Item = Problem> {
        ProblemId::ALL.into_iter().map(Problem::new)
    }

    pub fn dim(&self) -> usize {
        match self.id {
            ProblemId::Logistic | ProblemId::Oscillatory | ProblemId::Harmonic | ProblemId::Airy => 1,
            _ => 2,
        }
    }

    pub fn is_ode(&self) -> bool {
        self.dim() == 1
    }

    pub fn domain(&self) -> Vec<(f64, f64)> {
        match self.id {
            ProblemId::Logistic => vec![(0.0, 5.0)],
            ProblemId::Oscillatory | ProblemId::Harmonic => vec![(0.0, 2.0)],
            ProblemId::Airy => vec![(-2.0, 3.0)],
            _ => vec![(0.0, 1.0), (0.0, 1.0)],
        }
    }

    /// Highest derivative order appearing in the residual.
    pub fn residual_order(&self) -> usize {
        match self.id {
            ProblemId::Logistic | ProblemId::Oscillatory => 1,
            _ => 2,
        }
    }

    /// Coordinate directions along which the residual needs jets.
    pub fn residual_directions(&self) -> &'static [usize] {
        if self.is_ode() {
            &[0]
        } else {
            &[0, 1]
        }
    }

    pub fn has_closed_form(&self) -> bool {
        !matches!(
            self.id,
            ProblemId::Oscillatory | ProblemId::Airy | ProblemId::Burgers
        )
    }

    pub fn schedule(&self) -> TrainingSchedule {
        let (learning_rate, iterations, n_collocation, grid) = match self.id {
            ProblemId::Logistic => (1e-2, 10_000, 100, 3),
            ProblemId::Oscillatory => (1e-2, 10_000, 100, 5),
            ProblemId::Harmonic => (1e-2, 5_000, 100, 3),
            ProblemId::Airy => (5e-3, 20_000, 100, 3),
            ProblemId::Laplace => (1e-3, 10_000, 10_000, 5),
            ProblemId::Poisson => (1e-3, 15_000, 10_000, 5),
            ProblemId::Heat => (1e-3, 5_000, 10_000, 5),
            ProblemId::Wave => (1e-3, 10_000, 10_000, 5),
            ProblemId::Burgers => (1e-3, 15_000, 10_000, 5),
        };
        TrainingSchedule {
            learning_rate,
            iterations,
            n_collocation,
            grid,
            order: 3,
        }
    }

    /// Residual at `point` given one jet per coordinate direction (each
    /// seeded along that coordinate). Zero iff the equation holds there.
    pub fn residual<S: Scalar>(&self, point: &[f64], jets: &[Jet2<S>]) -> Result<S> {
        let needed = self.dim();
        if jets.len() < needed || point.len() < needed {
            return Err(config(format!(
                "{} needs derivative jets along {needed} coordinate(s), got {}",
                self.id,
                jets.len()
            )));
        }
        Ok(self.residual_unchecked(point, jets))
    }

    pub(crate) fn residual_unchecked<S: Scalar>(&self, point: &[f64], jets: &[Jet2<S>]) -> S {
        let u = jets[0];
        match self.id {
            ProblemId::Logistic => u.d1 - u.v + u.v * u.v,
            ProblemId::Oscillatory => {
                u.d1.offset(-1.0) + u.v.scale(1.0 / oscillatory_denominator(point[0]))
            }
            ProblemId::Harmonic => u.d2 + u.v.scale(PI * PI),
            ProblemId::Airy => u.d2 - u.v.scale(point[0]),
            ProblemId::Laplace => u.d2 + jets[1].d2,
            ProblemId::Poisson => {
                let f = 2.0 * PI * PI * (PI * point[0]).sin() * (PI * point[1]).sin();
                (u.d2 + jets[1].d2).offset(f)
            }
            ProblemId::Heat => jets[1].d1 - u.d2,
            ProblemId::Wave => jets[1].d2 - u.d2,
            ProblemId::Burgers => jets[1].d1 + u.v * u.d1 - u.d2.scale(0.1),
        }
    }

    pub fn conditions(&self) -> Vec<Condition> {
        use ConditionKind::*;
        let point = |x: f64| Location::Point(vec![x]);
        let seg = |axis: usize, value: f64| Location::Segment { axis, value };
        let c = |name, kind, location, target| Condition {
            name,
            kind,
            location,
            target,
        };
        match self.id {
            ProblemId::Logistic => vec![c("y(0)", Value, point(0.0), tenth)],
            ProblemId::Oscillatory => vec![c("y(0)", Value, point(0.0), one)],
            ProblemId::Harmonic => vec![
                c("y(0)", Value, point(0.0), zero),
                c("y'(0)", Derivative { direction: 0 }, point(0.0), one),
            ],
            ProblemId::Airy => vec![
                c("y(0)", Value, point(0.0), one),
                c("y'(0)", Derivative { direction: 0 }, point(0.0), zero),
            ],
            ProblemId::Laplace => vec![
                c("u(x,0)", Value, seg(1, 0.0), zero),
                c("u(0,y)", Value, seg(0, 0.0), zero),
                c("u(1,y)", Value, seg(0, 1.0), zero),
                c("u(x,1)", Value, seg(1, 1.0), sin_pi_x),
            ],
            ProblemId::Poisson => vec![
                c("u(x,0)", Value, seg(1, 0.0), zero),
                c("u(0,y)", Value, seg(0, 0.0), zero),
                c("u(1,y)", Value, seg(0, 1.0), zero),
                c("u(x,1)", Value, seg(1, 1.0), zero),
            ],
            ProblemId::Heat => vec![
                c("u(x,0)", Value, seg(1, 0.0), sin_pi_x),
                c("u(0,t)", Value, seg(0, 0.0), zero),
                c("u(1,t)", Value, seg(0, 1.0), zero),
            ],
            ProblemId::Wave => vec![
                c("u(x,0)", Value, seg(1, 0.0), sin_pi_x),
                c("u_t(x,0)", Derivative { direction: 1 }, seg(1, 0.0), zero),
                c("u(0,t)", Value, seg(0, 0.0), zero),
                c("u(1,t)", Value, seg(0, 1.0), zero),
            ],
            ProblemId::Burgers => vec![
                c("u(x,0)", Value, seg(1, 0.0), neg_sin_pi_x),
                c("u(0,t)", Value, seg(0, 0.0), zero),
                c("u(1,t)", Value, seg(0, 1.0), zero),
            ],
        }
    }

    /// Closed-form solution as a jet along `direction` (plain value for `None`).
    pub fn exact_jet(&self, point: &[f64], direction: Option<usize>) -> Result<Jet2> {
        let p2 = PI * PI;
        let (v, first, second): (f64, [f64; 2], [f64; 2]) = match self.id {
            ProblemId::Logistic => {
                let y = 1.0 / (1.0 + 9.0 * (-point[0]).exp());
                let d1 = y * (1.0 - y);
                (y, [d1, 0.0], [d1 * (1.0 - 2.0 * y), 0.0])
            }
            ProblemId::Harmonic => {
                let (s, c) = (PI * point[0]).sin_cos();
                (s / PI, [c, 0.0], [-PI * s, 0.0])
            }
            ProblemId::Laplace => {
                let (sx, cx) = (PI * point[0]).sin_cos();
                let k = 1.0 / PI.sinh();
                let (sy, cy) = ((PI * point[1]).sinh() * k, (PI * point[1]).cosh() * k);
                let u = sy * sx;
                (u, [PI * sy * cx, PI * cy * sx], [-p2 * u, p2 * u])
            }
            ProblemId::Poisson => {
                let (sx, cx) = (PI * point[0]).sin_cos();
                let (sy, cy) = (PI * point[1]).sin_cos();
                let u = sx * sy;
                (u, [PI * cx * sy, PI * sx * cy], [-p2 * u, -p2 * u])
            }
            ProblemId::Heat => {
                let (sx, cx) = (PI * point[0]).sin_cos();
                let e = (-p2 * point[1]).exp();
                let u = e * sx;
                (u, [PI * e * cx, -p2 * u], [-p2 * u, p2 * p2 * u])
            }
            ProblemId::Wave => {
                let (sx, cx) = (PI * point[0]).sin_cos();
                let (st, ct) = (PI * point[1]).sin_cos();
                let u = ct * sx;
                (u, [PI * ct * cx, -PI * st * sx], [-p2 * u, -p2 * u])
            }
            _ => {
                return Err(Error::Capability(format!(
                    "{} has no closed-form solution",
                    self.id
                )))
            }
        };
        Ok(match direction {
            None => Jet2::constant(v),
            Some(d) => Jet2::new(v, first[d], second[d]),
        })
    }

    pub fn exact_solution(&self, point: &[f64]) -> Result<f64> {
        Ok(self.exact_jet(point, None)?.v)
    }

    /// Derivative (1D) or gradient (2D) of the closed-form solution.
    pub fn exact_gradient(&self, point: &[f64]) -> Result<Vec<f64>> {
        (0..self.dim())
            .map(|d| Ok(self.exact_jet(point, Some(d))?.d1))
            .collect()
    }

    /// Equation label and kind used in summary tables.
    pub fn label(&self) -> (&'static str, &'static str) {
        match self.id {
            ProblemId::Logistic => ("Logistic equation", "ODE"),
            ProblemId::Oscillatory => ("Differential equation with oscillatory behavior", "ODE"),
            ProblemId::Harmonic => ("Classic harmonic oscillator equation", "ODE"),
            ProblemId::Airy => ("Airy’s equation", "ODE"),
            ProblemId::Laplace => ("Two-dimensional Laplace equation", "PDE"),
            ProblemId::Poisson => ("Two-dimensional Poisson equation", "PDE"),
            ProblemId::Heat => ("One-dimensional heat equation", "PDE"),
            ProblemId::Wave => ("One-dimensional wave equation", "PDE"),
            ProblemId::Burgers => ("One-dimensional viscous Burgers’ equation", "PDE"),
        }
    }
}

impl From<ProblemId> for Problem {
    fn from(id: ProblemId) -> Self {
        Problem::new(id)
    }
}

/// The closed-form solution wrapped as a parameter-free model.
#[derive(Clone, Copy, Debug)]
pub struct ExactModel {
    problem: Problem,
}

impl ExactModel {
    pub fn new(problem: Problem) -> Result<Self> {
        if !problem.has_closed_form() {
            return Err(Error::Capability(format!(
                "{} has no closed-form solution",
                problem.id
            )));
        }
        Ok(Self { problem })
    }
}

impl Model for ExactModel {
    fn input_dim(&self) -> usize {
        self.problem.dim()
    }

    fn param_count(&self) -> usize {
        0
    }

    fn eval<S: Scalar>(&self, _params: &[S], point: &[f64], direction: Option<usize>) -> Jet2<S> {
        let j = self
            .problem
            .exact_jet(point, direction)
            .expect("closed form checked at construction");
        Jet2::new(S::constant(j.v), S::constant(j.d1), S::constant(j.d2))
    }
}
