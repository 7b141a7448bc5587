//! Relative L² and L∞ errors of solutions and gradients, multi-seed
//! aggregation and loss-curve smoothing.

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::networks::Model;
use crate::problems::{linspace, Problem, ProblemId};
use crate::refsolve::{airy_table, burgers_table, oscillatory_table};

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Usage(format!("length mismatch: {a} vs {b}")));
    }
    if a == 0 {
        return Err(Error::Usage("empty input".into()));
    }
    Ok(())
}

/// `100·‖pred − truth‖₂ / ‖truth‖₂`.
pub fn rel_l2_percent(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred.len(), truth.len())?;
    let num: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    let den: f64 = truth.iter().map(|t| t * t).sum();
    if den == 0.0 {
        return Err(Error::UndefinedMetric("reference values are identically zero".into()));
    }
    Ok(100.0 * num.sqrt() / den.sqrt())
}

/// `max |pred − truth|`.
pub fn linf(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred.len(), truth.len())?;
    Ok(pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).abs())
        .fold(0.0, f64::max))
}

/// Relative L² (percent) and L∞ errors of vector fields under the
/// pointwise Euclidean norm.
pub fn gradient_errors(pred: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<(f64, f64)> {
    check_lengths(pred.len(), truth.len())?;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut worst: f64 = 0.0;
    for (p, t) in pred.iter().zip(truth) {
        if p.len() != t.len() {
            return Err(Error::Usage(format!("dimension mismatch: {} vs {}", p.len(), t.len())));
        }
        let d2: f64 = p.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum();
        num += d2;
        den += t.iter().map(|b| b * b).sum::<f64>();
        worst = worst.max(d2.sqrt());
    }
    if den == 0.0 {
        return Err(Error::UndefinedMetric("reference gradients are identically zero".into()));
    }
    Ok((100.0 * num.sqrt() / den.sqrt(), worst))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub rel_l2_pct: f64,
    pub linf: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_rel_l2_pct: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_linf: Option<f64>,
    pub n_eval_points: usize,
}

/// Points at which a problem is scored, with reference values and, for
/// closed-form problems, reference gradients.
#[derive(Clone, Debug)]
pub struct EvaluationGrid {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub gradients: Option<Vec<Vec<f64>>>,
}

pub const ODE_EVAL_POINTS: usize = 500;
pub const PDE_EVAL_SIDE: usize = 100;

pub fn evaluation_grid(problem: &Problem) -> Result<EvaluationGrid> {
    let from_table = |t: &crate::refsolve::ReferenceTable1D| EvaluationGrid {
        points: t.xs.iter().map(|&x| vec![x]).collect(),
        values: t.ys.clone(),
        gradients: None,
    };
    match problem.id {
        ProblemId::Oscillatory => return Ok(from_table(oscillatory_table())),
        ProblemId::Airy => return Ok(from_table(airy_table())),
        ProblemId::Burgers => {
            let t = burgers_table();
            let mut points = Vec::with_capacity(t.len());
            for &tt in &t.ts {
                for &x in &t.xs {
                    points.push(vec![x, tt]);
                }
            }
            return Ok(EvaluationGrid {
                points,
                values: t.u.clone(),
                gradients: None,
            });
        }
        _ => {}
    }
    let domain = problem.domain();
    let points: Vec<Vec<f64>> = if problem.is_ode() {
        linspace(domain[0].0, domain[0].1, ODE_EVAL_POINTS)
            .into_iter()
            .map(|x| vec![x])
            .collect()
    } else {
        let xs = linspace(domain[0].0, domain[0].1, PDE_EVAL_SIDE);
        let ys = linspace(domain[1].0, domain[1].1, PDE_EVAL_SIDE);
        ys.iter()
            .flat_map(|&y| xs.iter().map(move |&x| vec![x, y]))
            .collect()
    };
    let values = points
        .iter()
        .map(|p| problem.exact_solution(p))
        .collect::<Result<_>>()?;
    let gradients = points
        .iter()
        .map(|p| problem.exact_gradient(p))
        .collect::<Result<_>>()?;
    Ok(EvaluationGrid {
        points,
        values,
        gradients: Some(gradients),
    })
}

/// Scores `model` at `params` on the problem's evaluation grid. Gradient
/// errors use the model's first-derivative jets and exist only for
/// closed-form problems.
pub fn evaluate_model<M: Model>(model: &M, params: &[f64], problem: &Problem) -> Result<ErrorReport> {
    let grid = evaluation_grid(problem)?;
    let pred: Vec<f64> = grid
        .points
        .iter()
        .map(|p| model.eval::<f64>(params, p, None).v)
        .collect();
    let (grad_rel_l2_pct, grad_linf) = match &grid.gradients {
        Some(truth) => {
            let dim = problem.dim();
            let pg: Vec<Vec<f64>> = grid
                .points
                .iter()
                .map(|p| (0..dim).map(|d| model.eval::<f64>(params, p, Some(d)).d1).collect())
                .collect();
            let (r, l) = gradient_errors(&pg, truth)?;
            (Some(r), Some(l))
        }
        None => (None, None),
    };
    Ok(ErrorReport {
        rel_l2_pct: rel_l2_percent(&pred, &grid.values)?,
        linf: linf(&pred, &grid.values)?,
        grad_rel_l2_pct,
        grad_linf,
        n_eval_points: grid.points.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Mean and population standard deviation.
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Usage("no values to aggregate".into()));
        }
        if values.iter().all(|&v| v == values[0]) {
            return Ok(Self {
                mean: values[0],
                std: 0.0,
            });
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Ok(Self {
            mean,
            std: var.sqrt(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub rel_l2_pct: MeanStd,
    pub linf: MeanStd,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_rel_l2_pct: Option<MeanStd>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_linf: Option<MeanStd>,
}

/// Field-wise mean and population standard deviation over seeds.
pub fn aggregate(reports: &[ErrorReport]) -> Result<AggregateStats> {
    let field = |f: fn(&ErrorReport) -> f64| MeanStd::of(&reports.iter().map(f).collect::<Vec<_>>());
    let optional = |f: fn(&ErrorReport) -> Option<f64>| -> Result<Option<MeanStd>> {
        let vals: Option<Vec<f64>> = reports.iter().map(f).collect();
        vals.map(|v| MeanStd::of(&v)).transpose()
    };
    Ok(AggregateStats {
        rel_l2_pct: field(|r| r.rel_l2_pct)?,
        linf: field(|r| r.linf)?,
        grad_rel_l2_pct: optional(|r| r.grad_rel_l2_pct)?,
        grad_linf: optional(|r| r.grad_linf)?,
    })
}

/// `s₀ = x₀`, `sᵢ = α·xᵢ + (1 − α)·sᵢ₋₁`.
pub fn ema_smooth(series: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(config(format!("smoothing factor {alpha} outside (0, 1]")));
    }
    let mut out = Vec::with_capacity(series.len());
    let mut s = match series.first() {
        Some(&x) => x,
        None => return Ok(out),
    };
    out.push(s);
    for &x in &series[1..] {
        s = alpha * x + (1.0 - alpha) * s;
        out.push(s);
    }
    Ok(out)
}
