use std::cell::{RefCell, RefMut};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::Scalar;
use crate::error::{Error, Result};

#[derive(Default)]
struct Nodes {
    /// `ends[i]` is one past the last entry of node `i` in `parents`/`weights`.
    ends: Vec<u32>,
    parents: Vec<u32>,
    weights: Vec<f64>,
}

/// Wengert list recording every composed [`Var`] with its local partials.
///
/// A tape is single-threaded. Independent training runs each own one.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Nodes>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(nodes: usize, entries: usize) -> Self {
        Self {
            nodes: RefCell::new(Nodes {
                ends: Vec::with_capacity(nodes),
                parents: Vec::with_capacity(entries),
                weights: Vec::with_capacity(entries),
            }),
        }
    }

    /// Number of recorded nodes.
    pub fn len(&self) -> usize {
        self.nodes.borrow().ends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops all nodes while keeping the allocations.
    pub fn clear(&mut self) {
        let nodes = self.nodes.get_mut();
        nodes.ends.clear();
        nodes.parents.clear();
        nodes.weights.clear();
    }

    /// Records an independent input (leaf).
    pub fn var(&self, value: f64) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        let index = push_node(&mut nodes);
        Var {
            tape: Some(self),
            index,
            value,
        }
    }

    pub fn vars(&self, values: &[f64]) -> Vec<Var<'_>> {
        values.iter().map(|&v| self.var(v)).collect()
    }

    fn owns(&self, var: &Var<'_>) -> bool {
        matches!(var.tape, Some(t) if std::ptr::eq(t, self))
    }

    /// Reverse sweep from `output`, returning the adjoint of every node.
    pub fn gradient(&self, output: Var<'_>) -> Result<Adjoints> {
        let nodes = self.nodes.borrow();
        let n = nodes.ends.len();
        let mut adj = vec![0.0; n];
        match output.tape {
            None => return Ok(Adjoints { values: adj }),
            Some(_) if !self.owns(&output) => {
                return Err(Error::Usage("output variable belongs to another tape".into()))
            }
            Some(_) => {}
        }
        let out = output.index as usize;
        if out >= n {
            return Err(Error::Usage("output variable is stale".into()));
        }
        adj[out] = 1.0;
        for i in (0..=out).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let start = if i == 0 { 0 } else { nodes.ends[i - 1] as usize };
            let end = nodes.ends[i] as usize;
            for k in start..end {
                adj[nodes.parents[k] as usize] += a * nodes.weights[k];
            }
        }
        Ok(Adjoints { values: adj })
    }
}

fn push_node(nodes: &mut Nodes) -> u32 {
    let index = nodes.ends.len() as u32;
    let end = nodes.parents.len() as u32;
    nodes.ends.push(end);
    index
}

/// Adjoints of every node of a tape after one reverse sweep.
#[derive(Debug, Clone)]
pub struct Adjoints {
    values: Vec<f64>,
}

impl Adjoints {
    /// ∂output/∂var. Constants have zero derivative.
    pub fn wrt(&self, var: Var<'_>) -> f64 {
        if var.tape.is_none() {
            return 0.0;
        }
        self.values.get(var.index as usize).copied().unwrap_or(0.0)
    }
}

/// ∂loss/∂θᵢ for every parameter leaf in `params`.
pub fn param_gradient(loss: Var<'_>, params: &[Var<'_>]) -> Result<Vec<f64>> {
    let tape = match loss.tape {
        Some(t) => t,
        None => return Ok(vec![0.0; params.len()]),
    };
    if let Some(p) = params.iter().find(|p| !tape.owns(p)) {
        let what = if p.tape.is_none() { "a constant" } else { "a foreign tape node" };
        return Err(Error::Usage(format!("parameter list contains {what}")));
    }
    let len = tape.len();
    if params.iter().any(|p| p.index as usize >= len) {
        return Err(Error::Usage("parameter variable is stale".into()));
    }
    let adj = tape.gradient(loss)?;
    Ok(params.iter().map(|&p| adj.wrt(p)).collect())
}

/// A real number recorded on a [`Tape`].
///
/// Constants carry no tape reference and are skipped when recording.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: Option<&'t Tape>,
    index: u32,
    value: f64,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tape {
            Some(_) => write!(f, "Var(#{} = {})", self.index, self.value),
            None => write!(f, "Var(const {})", self.value),
        }
    }
}

impl<'t> Var<'t> {
    pub fn is_constant(&self) -> bool {
        self.tape.is_none()
    }
}

impl<'t> Scalar for Var<'t> {
    #[inline]
    fn value(self) -> f64 {
        self.value
    }

    #[inline]
    fn constant(value: f64) -> Self {
        Var {
            tape: None,
            index: 0,
            value,
        }
    }

    fn compose<I>(value: f64, parents: I) -> Self
    where
        I: IntoIterator<Item = (Self, f64)>,
    {
        let mut tape: Option<&'t Tape> = None;
        let mut nodes: Option<RefMut<'t, Nodes>> = None;
        for (p, w) in parents {
            let Some(pt) = p.tape else { continue };
            if w == 0.0 {
                continue;
            }
            match tape {
                None => {
                    tape = Some(pt);
                    nodes = Some(pt.nodes.borrow_mut());
                }
                Some(t) => assert!(
                    std::ptr::eq(t, pt),
                    "cannot combine variables from different tapes"
                ),
            }
            let n = nodes.as_mut().expect("tape borrowed");
            n.parents.push(p.index);
            n.weights.push(w);
        }
        match (tape, nodes) {
            (Some(t), Some(mut n)) => {
                let index = n.ends.len() as u32;
                let end = n.parents.len() as u32;
                n.ends.push(end);
                Var {
                    tape: Some(t),
                    index,
                    value,
                }
            }
            _ => Var::constant(value),
        }
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Var::compose(self.value + rhs.value, [(self, 1.0), (rhs, 1.0)])
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Var::compose(self.value - rhs.value, [(self, 1.0), (rhs, -1.0)])
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Var::compose(self.value * rhs.value, [(self, rhs.value), (rhs, self.value)])
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    #[inline]
    fn neg(self) -> Self {
        Var::compose(-self.value, [(self, -1.0)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_of_squares_gradient() {
        let tape = Tape::new();
        let theta = tape.vars(&[1.0, -2.0]);
        let loss = theta[0].square() + theta[1].square();
        assert_eq!(param_gradient(loss, &theta).unwrap(), vec![2.0, -4.0]);
    }

    #[test]
    fn loss_independent_of_params_is_zero() {
        let tape = Tape::new();
        let theta = tape.vars(&[0.3, 0.7, 1.1]);
        let other = tape.var(2.0);
        let loss = other * other;
        assert_eq!(param_gradient(loss, &theta).unwrap(), vec![0.0; 3]);
        let c = Var::constant(5.0);
        assert_eq!(param_gradient(c, &theta).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn foreign_nodes_are_rejected() {
        let a = Tape::new();
        let b = Tape::new();
        let theta = a.vars(&[1.0]);
        let other = b.vars(&[1.0]);
        let loss = theta[0] * theta[0];
        assert!(matches!(param_gradient(loss, &other), Err(Error::Usage(_))));
        assert!(matches!(b.gradient(loss), Err(Error::Usage(_))));
    }

    #[test]
    fn repeated_use_accumulates() {
        let tape = Tape::new();
        let x = tape.var(3.0);
        // x·x·x → 3x² = 27
        let y = x * x * x;
        let adj = tape.gradient(y).unwrap();
        assert_eq!(adj.wrt(x), 27.0);
    }

    #[test]
    fn clear_keeps_tape_usable() {
        let mut tape = Tape::new();
        {
            let x = tape.var(1.0);
            let _ = x + x;
        }
        assert_eq!(tape.len(), 2);
        tape.clear();
        assert!(tape.is_empty());
        let x = tape.var(2.0);
        let y = x * x;
        assert_eq!(tape.gradient(y).unwrap().wrt(x), 4.0);
    }
}
