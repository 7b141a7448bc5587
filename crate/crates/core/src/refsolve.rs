//! Classical reference solutions: RK4 trajectories for the oscillatory and
//! Airy equations and an explicit finite-difference solver for viscous
//! Burgers.

use std::io::Write;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::problems::oscillatory_rhs;

/// Literal reading of the reference step: `h = 1/499` as a step length.
pub const RK4_STEP: f64 = 1.0 / 499.0;
pub const BURGERS_NU: f64 = 0.1;
pub const BURGERS_DX: f64 = 1.0 / 499.0;
pub const BURGERS_DT: f64 = 1.0 / 99_999.0;
/// Stored Burgers time levels `t = m/100`, `m = 0..=100`.
pub const BURGERS_LEVELS: usize = 101;

/// How the reference step `1/499` is interpreted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepConvention {
    /// `h = 1/499` as a step length.
    #[default]
    Literal,
    /// `499` equal sub-intervals of the integration span.
    SpanOver499,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTable1D {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub dys: Option<Vec<f64>>,
}

impl ReferenceTable1D {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Sample index whose abscissa is closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|&s| s < x);
        if i == 0 {
            0
        } else if i == self.xs.len() || x - self.xs[i - 1] <= self.xs[i] - x {
            i - 1
        } else {
            i
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        match &self.dys {
            Some(d) => {
                writeln!(w, "x,y,dy")?;
                for ((x, y), dy) in self.xs.iter().zip(&self.ys).zip(d) {
                    writeln!(w, "{x:e},{y:e},{dy:e}")?;
                }
            }
            None => {
                writeln!(w, "x,y")?;
                for (x, y) in self.xs.iter().zip(&self.ys) {
                    writeln!(w, "{x:e},{y:e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Values on a uniform `(x, t)` grid, stored by time level: `u[it·nx + ix]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTable2D {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub u: Vec<f64>,
}

impl ReferenceTable2D {
    pub fn at(&self, ix: usize, it: usize) -> f64 {
        self.u[it * self.xs.len() + ix]
    }

    pub fn level(&self, it: usize) -> &[f64] {
        let nx = self.xs.len();
        &self.u[it * nx..(it + 1) * nx]
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,t,u")?;
        for (it, t) in self.ts.iter().enumerate() {
            for (ix, x) in self.xs.iter().enumerate() {
                writeln!(w, "{x:e},{t:e},{:e}", self.at(ix, it))?;
            }
        }
        Ok(())
    }
}

/// Classic four-stage Runge–Kutta for `y′ = f(x, y)` with a fixed step.
///
/// `rhs(x, y, dy)` writes the derivative into `dy`. Negative `h` integrates
/// leftward. Returns the abscissae and the state at each of the
/// `n_steps + 1` samples.
pub fn rk4_integrate<F>(rhs: F, y0: &[f64], x0: f64, h: f64, n_steps: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    if h == 0.0 || !h.is_finite() {
        return Err(config(format!("invalid RK4 step {h}")));
    }
    let m = y0.len();
    let mut xs = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    xs.push(x0);
    states.push(y.clone());
    for step in 0..n_steps {
        let x = x0 + step as f64 * h;
        rhs(x, &y, &mut k1);
        for i in 0..m {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        rhs(x + 0.5 * h, &tmp, &mut k2);
        for i in 0..m {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        rhs(x + 0.5 * h, &tmp, &mut k3);
        for i in 0..m {
            tmp[i] = y[i] + h * k3[i];
        }
        rhs(x + h, &tmp, &mut k4);
        for i in 0..m {
            y[i] += h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                step: step + 1,
                message: "non-finite RK4 state".into(),
            });
        }
        xs.push(x0 + (step + 1) as f64 * h);
        states.push(y.clone());
    }
    Ok((xs, states))
}

/// RK4 trajectory as a table. For a two-component state the second
/// component is reported as the derivative; for a scalar state the
/// derivative is the right-hand side at each sample.
pub fn rk4_solve<F>(rhs: F, y0: &[f64], x0: f64, h: f64, n_steps: usize) -> Result<ReferenceTable1D>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let (xs, states) = rk4_integrate(&rhs, y0, x0, h, n_steps)?;
    let ys = states.iter().map(|s| s[0]).collect();
    let dys = match y0.len() {
        1 => {
            let mut d = [0.0];
            xs.iter()
                .zip(&states)
                .map(|(&x, s)| {
                    rhs(x, s, &mut d);
                    d[0]
                })
                .collect()
        }
        _ => states.iter().map(|s| s[1]).collect(),
    };
    let mut table = ReferenceTable1D {
        xs,
        ys,
        dys: Some(dys),
    };
    if h < 0.0 {
        table.xs.reverse();
        table.ys.reverse();
        if let Some(d) = table.dys.as_mut() {
            d.reverse();
        }
    }
    Ok(table)
}

fn step_count(span: f64, h: f64) -> usize {
    (span / h).round() as usize
}

/// Oscillatory reference on `[0, 2]` from `y(0) = 1`.
pub fn reference_oscillatory_with(conv: StepConvention, refine: usize) -> Result<ReferenceTable1D> {
    let h = match conv {
        StepConvention::Literal => RK4_STEP,
        StepConvention::SpanOver499 => 2.0 / 499.0,
    } / refine.max(1) as f64;
    rk4_solve(
        |x, y, dy| dy[0] = oscillatory_rhs(x, y[0]),
        &[1.0],
        0.0,
        h,
        step_count(2.0, h),
    )
}

pub fn reference_oscillatory() -> ReferenceTable1D {
    reference_oscillatory_with(StepConvention::Literal, 1).expect("oscillatory reference")
}

/// Airy reference: `y″ = x·y` from `(y, y′)(0) = (1, 0)`, integrated to 3
/// and to −2 and joined into one ascending table.
///
/// Under [`StepConvention::SpanOver499`] the 499 intervals are split between
/// the two sides in proportion to their length, so each side is uniform.
pub fn reference_airy_with(conv: StepConvention, refine: usize) -> Result<ReferenceTable1D> {
    let r = refine.max(1);
    let (h_right, n_right, h_left, n_left) = match conv {
        StepConvention::Literal => {
            let h = RK4_STEP / r as f64;
            (h, step_count(3.0, h), h, step_count(2.0, h))
        }
        StepConvention::SpanOver499 => {
            let nr = (499.0 * 3.0 / 5.0f64).round() as usize * r;
            let nl = 499 * r - nr;
            (3.0 / nr as f64, nr, 2.0 / nl as f64, nl)
        }
    };
    let rhs = |x: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = x * y[0];
    };
    let right = rk4_solve(rhs, &[1.0, 0.0], 0.0, h_right, n_right)?;
    let left = rk4_solve(rhs, &[1.0, 0.0], 0.0, -h_left, n_left)?;
    let mut table = left;
    table.xs.pop();
    table.ys.pop();
    table.dys.as_mut().unwrap().pop();
    table.xs.extend(right.xs);
    table.ys.extend(right.ys);
    table.dys.as_mut().unwrap().extend(right.dys.unwrap());
    Ok(table)
}

pub fn reference_airy() -> ReferenceTable1D {
    reference_airy_with(StepConvention::Literal, 1).expect("airy reference")
}

/// Diffusion number `ν·k/h²` of the explicit scheme.
pub fn diffusion_number(nu: f64, h: f64, k_t: f64) -> f64 {
    nu * k_t / (h * h)
}

/// Forward-time, central-space solution of `u_t + u·u_x = ν·u_xx` on
/// `[0,1]×[0,1]` with `u(x,0) = −sin πx` and zero boundaries.
///
/// Time levels `t = m/100` are linearly interpolated between the two
/// bracketing steps when `k_t` does not divide them.
pub fn burgers_fd(nu: f64, h: f64, k_t: f64) -> Result<ReferenceTable2D> {
    let d = diffusion_number(nu, h, k_t);
    if !(d <= 0.5) || h <= 0.0 || k_t <= 0.0 {
        return Err(config(format!(
            "explicit scheme unstable: diffusion number {d:.4} exceeds 0.5"
        )));
    }
    let intervals = (1.0 / h).round() as usize;
    let nx = intervals + 1;
    let n_steps = (1.0 / k_t).round() as usize;
    let xs: Vec<f64> = (0..nx).map(|j| j as f64 / intervals as f64).collect();
    let ts: Vec<f64> = (0..BURGERS_LEVELS)
        .map(|m| m as f64 / (BURGERS_LEVELS - 1) as f64)
        .collect();

    let mut u: Vec<f64> = xs.iter().map(|&x| -(std::f64::consts::PI * x).sin()).collect();
    u[0] = 0.0;
    u[nx - 1] = 0.0;
    let mut next = u.clone();
    let mut out = Vec::with_capacity(BURGERS_LEVELS * nx);
    out.extend_from_slice(&u);
    let mut level = 1;

    let adv = k_t / (2.0 * h);
    for n in 0..n_steps {
        for j in 1..nx - 1 {
            let (l, c, r) = (u[j - 1], u[j], u[j + 1]);
            next[j] = c - adv * c * (r - l) + d * (r - 2.0 * c + l);
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                step: n + 1,
                message: "non-finite Burgers state".into(),
            });
        }
        let t0 = n as f64 * k_t;
        let t1 = (n + 1) as f64 * k_t;
        while level < BURGERS_LEVELS && (ts[level] <= t1 || n + 1 == n_steps) {
            let w = ((ts[level] - t0) / (t1 - t0)).clamp(0.0, 1.0);
            out.extend(u.iter().zip(&next).map(|(a, b)| a + w * (b - a)));
            level += 1;
        }
        std::mem::swap(&mut u, &mut next);
    }
    while level < BURGERS_LEVELS {
        out.extend_from_slice(&u);
        level += 1;
    }
    Ok(ReferenceTable2D { xs, ts, u: out })
}

pub fn reference_burgers() -> ReferenceTable2D {
    burgers_fd(BURGERS_NU, BURGERS_DX, BURGERS_DT).expect("burgers reference")
}

/// Process-wide cached reference tables.
pub fn oscillatory_table() -> &'static ReferenceTable1D {
    static T: OnceLock<ReferenceTable1D> = OnceLock::new();
    T.get_or_init(reference_oscillatory)
}

pub fn airy_table() -> &'static ReferenceTable1D {
    static T: OnceLock<ReferenceTable1D> = OnceLock::new();
    T.get_or_init(reference_airy)
}

pub fn burgers_table() -> &'static ReferenceTable2D {
    static T: OnceLock<ReferenceTable2D> = OnceLock::new();
    T.get_or_init(reference_burgers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rhs_is_constant() {
        let t = rk4_solve(|_, _, dy| dy[0] = 0.0, &[1.0], 0.0, 0.1, 10).unwrap();
        assert!(t.ys.iter().all(|&y| y == 1.0));
    }

    #[test]
    fn single_step_matches_taylor_polynomial() {
        let h: f64 = 0.1;
        let t = rk4_solve(|_, y, dy| dy[0] = y[0], &[1.0], 0.0, h, 1).unwrap();
        let expect = 1.0 + h + h * h / 2.0 + h.powi(3) / 6.0 + h.powi(4) / 24.0;
        assert!((t.ys[1] - expect).abs() < 1e-15);
    }

    #[test]
    fn divergence_is_reported() {
        let r = rk4_solve(|_, y, dy| dy[0] = y[0] * y[0], &[1.0], 0.0, 0.5, 100);
        assert!(matches!(r, Err(Error::Divergence { .. })));
        assert!(rk4_solve(|_, _, dy| dy[0] = 0.0, &[1.0], 0.0, 0.0, 1).is_err());
    }

    #[test]
    fn oscillatory_grid() {
        let t = oscillatory_table();
        assert_eq!(t.len(), 999);
        assert_eq!((t.xs[0], t.ys[0]), (0.0, 1.0));
        assert!((t.xs[998] - 2.0).abs() < 1e-12);
        assert_eq!(t.dys.as_ref().unwrap()[0], 0.5);
        assert_eq!(oscillatory_rhs(0.0, 1.0), 0.5);
    }

    #[test]
    fn airy_grid() {
        let t = airy_table();
        assert_eq!(t.len(), 2496);
        let i0 = t.nearest(0.0);
        assert_eq!((t.xs[i0], t.ys[i0], t.dys.as_ref().unwrap()[i0]), (0.0, 1.0, 0.0));
        assert!((t.xs[0] + 2.0).abs() < 1e-12 && (t.xs[2495] - 3.0).abs() < 1e-12);
        assert!(t.xs.windows(2).all(|w| (w[1] - w[0] - RK4_STEP).abs() < 1e-12));
    }

    #[test]
    fn span_convention_tables() {
        let o = reference_oscillatory_with(StepConvention::SpanOver499, 1).unwrap();
        assert_eq!(o.len(), 500);
        let a = reference_airy_with(StepConvention::SpanOver499, 1).unwrap();
        assert_eq!(a.len(), 500);
        assert!(a.xs.contains(&0.0));
    }

    #[test]
    fn stability_number() {
        let d = diffusion_number(BURGERS_NU, BURGERS_DX, BURGERS_DT);
        assert!((d - 0.249).abs() < 1e-3);
        assert!(matches!(burgers_fd(0.1, 0.01, 0.01), Err(Error::Config(_))));
    }

    #[test]
    fn small_burgers_grid() {
        let t = burgers_fd(0.1, 0.05, 0.005).unwrap();
        assert_eq!(t.ts.len(), BURGERS_LEVELS);
        assert_eq!(t.xs.len(), 21);
        assert!((t.at(10, 0) + 1.0).abs() < 1e-15);
        for it in 0..BURGERS_LEVELS {
            assert_eq!(t.at(0, it), 0.0);
            assert_eq!(t.at(20, it), 0.0);
        }
    }
}
