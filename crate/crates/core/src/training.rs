//! Collocation sets, the composite physics-informed loss, Adam, and the
//! seeded full-batch training loop with best-loss checkpointing.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::diffengine::{param_gradient, Jet2, Scalar, Tape};
use crate::error::{config, Result};
use crate::metrics::{evaluate_model, ErrorReport};
use crate::networks::{ForwardCache, Model, Network, NetworkSpec, ParameterVector};
use crate::problems::{linspace, Condition, Problem};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda_data: f64,
    pub lambda_pde: f64,
    pub lambda_bcic: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_data: 1.0,
            lambda_pde: 1.0,
            lambda_bcic: 1.0,
        }
    }
}

/// Points of one condition together with their targets.
#[derive(Clone, Debug)]
pub struct ConditionPoints {
    pub condition: Condition,
    pub points: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct CollocationSet {
    pub interior: Vec<Vec<f64>>,
    pub conditions: Vec<ConditionPoints>,
}

fn condition_points(problem: &Problem, n_segment: usize) -> Vec<ConditionPoints> {
    let domain = problem.domain();
    problem
        .conditions()
        .into_iter()
        .map(|condition| {
            let points = condition.points(&domain, n_segment);
            let targets = points.iter().map(|p| condition.target_at(p)).collect();
            ConditionPoints {
                condition,
                points,
                targets,
            }
        })
        .collect()
}

/// `n` equally spaced residual points over an ODE domain, endpoints included.
pub fn collocation_ode(problem: &Problem, n: usize) -> Result<CollocationSet> {
    if !problem.is_ode() {
        return Err(config(format!("{} is not an ODE problem", problem.id)));
    }
    if n < 2 {
        return Err(config(format!("need at least 2 collocation points, got {n}")));
    }
    let (lo, hi) = problem.domain()[0];
    Ok(CollocationSet {
        interior: linspace(lo, hi, n).into_iter().map(|x| vec![x]).collect(),
        conditions: condition_points(problem, 1),
    })
}

/// `√n × √n` tensor grid over the unit square, boundary included; every
/// condition segment receives the `√n` grid points lying on it.
pub fn collocation_pde(problem: &Problem, n: usize) -> Result<CollocationSet> {
    if problem.is_ode() {
        return Err(config(format!("{} is not a PDE problem", problem.id)));
    }
    let side = (n as f64).sqrt().round() as usize;
    if side * side != n || side < 2 {
        return Err(config(format!("{n} collocation points do not form a square grid")));
    }
    let domain = problem.domain();
    let xs = linspace(domain[0].0, domain[0].1, side);
    let ys = linspace(domain[1].0, domain[1].1, side);
    let interior = ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| vec![x, y]))
        .collect();
    Ok(CollocationSet {
        interior,
        conditions: condition_points(problem, side),
    })
}

pub fn collocation(problem: &Problem, n: usize) -> Result<CollocationSet> {
    if problem.is_ode() {
        collocation_ode(problem, n)
    } else {
        collocation_pde(problem, n)
    }
}

#[derive(Clone, Copy, Debug)]
enum ItemKind {
    Residual,
    Condition { index: usize, target: f64 },
}

#[derive(Clone, Copy, Debug)]
struct LossItem {
    point: [f64; 2],
    kind: ItemKind,
    weight: f64,
}

/// The loss flattened into weighted squared terms `Σ wᵢ·qᵢ²` in a fixed order.
#[derive(Clone, Debug)]
pub struct LossPlan {
    problem: Problem,
    conditions: Vec<Condition>,
    items: Vec<LossItem>,
}

fn as_point(p: &[f64]) -> [f64; 2] {
    [p[0], p.get(1).copied().unwrap_or(0.0)]
}

impl LossPlan {
    pub fn new(problem: &Problem, colloc: &CollocationSet, weights: &LossWeights) -> Self {
        let mut items = Vec::new();
        if !colloc.interior.is_empty() {
            let w = weights.lambda_pde / colloc.interior.len() as f64;
            items.extend(colloc.interior.iter().map(|p| LossItem {
                point: as_point(p),
                kind: ItemKind::Residual,
                weight: w,
            }));
        }
        for (index, cp) in colloc.conditions.iter().enumerate() {
            if cp.points.is_empty() {
                continue;
            }
            let w = weights.lambda_bcic / cp.points.len() as f64;
            items.extend(cp.points.iter().zip(&cp.targets).map(|(p, &target)| LossItem {
                point: as_point(p),
                kind: ItemKind::Condition { index, target },
                weight: w,
            }));
        }
        Self {
            problem: *problem,
            conditions: colloc.conditions.iter().map(|c| c.condition.clone()).collect(),
            items,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn term<S: Scalar, M: Model>(&self, model: &M, params: &[S], item: &LossItem) -> S {
        let point = &item.point[..self.problem.dim()];
        match item.kind {
            ItemKind::Residual => {
                let mut jets = [Jet2::<S>::zero(); 2];
                for &d in self.problem.residual_directions() {
                    jets[d] = model.eval(params, point, Some(d));
                }
                self.problem.residual_unchecked(point, &jets)
            }
            ItemKind::Condition { index, target } => {
                let c = &self.conditions[index];
                let jet = model.eval(params, point, c.direction());
                c.quantity(&jet).offset(-target)
            }
        }
    }

    /// Weighted sum of squares over `items`, recorded as one fused node.
    fn partial<S: Scalar, M: Model>(&self, model: &M, params: &[S], items: &[LossItem]) -> S {
        let terms: Vec<(S, f64)> = items
            .iter()
            .map(|it| (self.term(model, params, it), it.weight))
            .collect();
        let value = terms.iter().map(|&(q, w)| w * q.value() * q.value()).sum();
        S::compose(value, terms.iter().map(|&(q, w)| (q, 2.0 * w * q.value())))
    }
}

/// λ_PDE·mean(residual²) + λ_BC/IC·Σ_conditions mean((quantity − target)²).
///
/// Forward problems carry no data points, so the data term is zero.
pub fn total_loss<S: Scalar, M: Model>(
    model: &M,
    params: &[S],
    problem: &Problem,
    colloc: &CollocationSet,
    weights: &LossWeights,
) -> S {
    let plan = LossPlan::new(problem, colloc, weights);
    plan.partial(model, params, &plan.items)
}

/// Loss value and parameter gradient, evaluated chunk by chunk on one
/// reused tape and summed in a fixed order.
pub fn loss_and_gradient<M: Model>(
    model: &M,
    theta: &[f64],
    plan: &LossPlan,
    tape: &mut Tape,
    chunk: usize,
) -> Result<(f64, Vec<f64>)> {
    let mut loss = 0.0;
    let mut grad = vec![0.0; theta.len()];
    for items in plan.items.chunks(chunk.max(1)) {
        tape.clear();
        let params = tape.vars(theta);
        let part = plan.partial(model, &params, items);
        loss += part.value();
        for (g, d) in grad.iter_mut().zip(param_gradient(part, &params)?) {
            *g += d;
        }
    }
    Ok((loss, grad))
}

/// Scratch space for [`network_loss_and_gradient`].
#[derive(Default)]
pub struct GradientWorkspace {
    caches: [ForwardCache; 2],
    tape: Tape,
}

impl GradientWorkspace {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Residual value and its partials with respect to each direction's jet.
fn residual_adjoint(
    problem: &Problem,
    point: &[f64],
    jets: &[Jet2; 2],
    tape: &mut Tape,
) -> Result<(f64, [[f64; 3]; 2])> {
    tape.clear();
    let leaves: Vec<Jet2<crate::Var<'_>>> = jets
        .iter()
        .map(|j| Jet2 {
            v: tape.var(j.v),
            d1: tape.var(j.d1),
            d2: tape.var(j.d2),
        })
        .collect();
    let r = problem.residual_unchecked(point, &leaves);
    let adj = tape.gradient(r)?;
    let mut out = [[0.0; 3]; 2];
    for (o, l) in out.iter_mut().zip(&leaves) {
        *o = [adj.wrt(l.v), adj.wrt(l.d1), adj.wrt(l.d2)];
    }
    Ok((r.value(), out))
}

/// Loss value and parameter gradient of a [`Network`] via its hand-derived
/// reverse pass. Agrees with [`loss_and_gradient`] to rounding.
pub fn network_loss_and_gradient(
    net: &Network,
    theta: &[f64],
    plan: &LossPlan,
    ws: &mut GradientWorkspace,
) -> Result<(f64, Vec<f64>)> {
    let mut loss = 0.0;
    let mut grad = vec![0.0; theta.len()];
    let dim = plan.problem.dim();
    for item in &plan.items {
        let point = &item.point[..dim];
        match item.kind {
            ItemKind::Residual => {
                let mut jets = [Jet2::zero(); 2];
                for &d in plan.problem.residual_directions() {
                    jets[d] = net.forward_cached(theta, point, Some(d), &mut ws.caches[d]);
                }
                let (q, dq) = residual_adjoint(&plan.problem, point, &jets, &mut ws.tape)?;
                loss += item.weight * q * q;
                let f = 2.0 * item.weight * q;
                for &d in plan.problem.residual_directions() {
                    let a = dq[d].map(|x| f * x);
                    net.backward_cached(theta, &mut ws.caches[d], a, &mut grad);
                }
            }
            ItemKind::Condition { index, target } => {
                let c = &plan.conditions[index];
                let jet = net.forward_cached(theta, point, c.direction(), &mut ws.caches[0]);
                let q = c.quantity(&jet) - target;
                loss += item.weight * q * q;
                let f = 2.0 * item.weight * q;
                let a = match c.direction() {
                    None => [f, 0.0, 0.0],
                    Some(_) => [0.0, f, 0.0],
                };
                net.backward_cached(theta, &mut ws.caches[0], a, &mut grad);
            }
        }
    }
    Ok((loss, grad))
}

/// Loss value only, without recording a tape.
pub fn loss_value<M: Model>(model: &M, theta: &[f64], plan: &LossPlan) -> f64 {
    plan.partial(model, theta, &plan.items)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        assert_eq!(params.len(), grads.len());
        assert_eq!(params.len(), self.m.len());
        self.t += 1;
        let t = self.t as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

pub fn adam_step(state: &mut AdamState, grads: &[f64], params: &mut [f64], lr: f64) {
    state.step(params, grads, lr);
}

/// Everything that determines a training run apart from the seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub problem: crate::problems::ProblemId,
    pub spec: NetworkSpec,
    pub learning_rate: f64,
    pub iterations: usize,
    pub n_collocation: usize,
    pub weights: LossWeights,
}

impl TrainConfig {
    /// Protocol defaults of `problem` for the given architecture.
    pub fn new(problem: &Problem, spec: NetworkSpec) -> Self {
        let s = problem.schedule();
        Self {
            problem: problem.id,
            spec,
            learning_rate: s.learning_rate,
            iterations: s.iterations,
            n_collocation: s.n_collocation,
            weights: LossWeights::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let problem = Problem::new(self.problem);
        if self.spec.widths[0] != problem.dim() {
            return Err(config(format!(
                "{} takes {} input(s) but the network has {}",
                self.problem,
                problem.dim(),
                self.spec.widths[0]
            )));
        }
        if self.spec.input_domain != problem.domain() {
            return Err(config("network input ranges differ from the problem domain"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(config("learning rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub loss_history: Vec<f64>,
    pub best_iteration: usize,
    pub best_loss: f64,
    pub best_params: ParameterVector,
    pub metrics: ErrorReport,
    /// Set when a non-finite loss stopped the run early.
    pub aborted: Option<String>,
}

/// Full-batch training: each iteration evaluates the loss on the complete
/// collocation set, records it, snapshots the parameters if it is a new
/// minimum, and takes one Adam step.
pub fn train(cfg: &TrainConfig, seed: u64) -> Result<RunResult> {
    cfg.validate()?;
    let problem = Problem::new(cfg.problem);
    let network = Network::new(cfg.spec.clone())?;
    let colloc = collocation(&problem, cfg.n_collocation)?;
    let plan = LossPlan::new(&problem, &colloc, &cfg.weights);

    let mut theta = network.init(seed).theta;
    let mut adam = AdamState::new(theta.len());
    let mut ws = GradientWorkspace::new();
    let mut history = Vec::with_capacity(cfg.iterations);
    let mut best_loss = f64::INFINITY;
    let mut best_iteration = 0;
    let mut best_params = theta.clone();
    let mut aborted = None;

    for it in 0..cfg.iterations {
        let (loss, grad) = network_loss_and_gradient(&network, &theta, &plan, &mut ws)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            aborted = Some(format!("non-finite loss at iteration {it}"));
            break;
        }
        history.push(loss);
        if loss < best_loss {
            best_loss = loss;
            best_iteration = it;
            best_params.copy_from_slice(&theta);
        }
        adam.step(&mut theta, &grad, cfg.learning_rate);
    }
    if history.is_empty() {
        best_loss = loss_value(&network, &best_params, &plan);
    }

    let metrics = evaluate_model(&network, &best_params, &problem)?;
    Ok(RunResult {
        seed,
        loss_history: history,
        best_iteration,
        best_loss,
        best_params: ParameterVector::new(best_params),
        metrics,
        aborted,
    })
}

/// Seeds `0..n_seeds` in order. Configuration errors fail the whole call;
/// a diverging seed is flagged in its own result.
pub fn run_config(cfg: &TrainConfig, n_seeds: usize) -> Result<Vec<RunResult>> {
    if n_seeds == 0 {
        return Err(config("need at least one seed"));
    }
    (0..n_seeds as u64).map(|s| train(cfg, s)).collect()
}

pub fn write_loss_csv<W: Write>(history: &[f64], mut w: W) -> Result<()> {
    writeln!(w, "iteration,loss")?;
    for (i, l) in history.iter().enumerate() {
        writeln!(w, "{i},{l:e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::networks::NetworkKind;
    use crate::problems::{ExactModel, ProblemId};

    fn logistic() -> Problem {
        Problem::new(ProblemId::Logistic)
    }

    struct Linear;

    impl Model for Linear {
        fn input_dim(&self) -> usize {
            1
        }
        fn param_count(&self) -> usize {
            0
        }
        fn eval<S: Scalar>(&self, _: &[S], point: &[f64], dir: Option<usize>) -> crate::Jet2<S> {
            crate::diffengine::seed_input(point[0], dir == Some(0))
        }
    }

    #[test]
    fn collocation_examples() {
        let c = collocation_ode(&logistic(), 100).unwrap();
        assert_eq!(c.interior.len(), 100);
        assert_eq!((c.interior[0][0], c.interior[99][0]), (0.0, 5.0));
        let h = Problem::new(ProblemId::Harmonic);
        let c = collocation_ode(&h, 3).unwrap();
        assert_eq!(c.interior, vec![vec![0.0], vec![1.0], vec![2.0]]);
        assert!(collocation_ode(&h, 1).is_err());

        let airy = Problem::new(ProblemId::Airy);
        let c = collocation_ode(&airy, 100).unwrap();
        assert!(!c.interior.iter().any(|p| p[0] == 0.0));
        assert!(c.conditions.iter().all(|cp| cp.points == vec![vec![0.0]]));

        let heat = Problem::new(ProblemId::Heat);
        let c = collocation_pde(&heat, 10_000).unwrap();
        assert_eq!(c.interior.len(), 10_000);
        assert!(c.conditions.iter().all(|cp| cp.points.len() == 100));
        assert!(c.interior.contains(&vec![1.0, 1.0]));
        assert_eq!(collocation_pde(&heat, 4).unwrap().interior.len(), 4);
        assert!(collocation_pde(&heat, 10).is_err());
    }

    #[test]
    fn loss_hand_examples() {
        let p = logistic();
        let w = LossWeights::default();
        let zero = Network::new(NetworkSpec::mlp(vec![1, 3, 1], p.domain()).unwrap()).unwrap();
        let theta = vec![0.0; zero.param_count()];
        let c = collocation_ode(&p, 100).unwrap();
        let l: f64 = total_loss(&zero, &theta, &p, &c, &w);
        assert!((l - 0.01).abs() < 1e-15);

        let toy = CollocationSet {
            interior: vec![vec![0.0], vec![1.0]],
            conditions: c.conditions.clone(),
        };
        let l: f64 = total_loss(&Linear, &[], &p, &toy, &w);
        assert!((l - 1.01).abs() < 1e-15);
    }

    #[test]
    fn exact_model_has_negligible_loss() {
        for p in Problem::all().filter(|p| p.has_closed_form()) {
            let n = if p.is_ode() { 100 } else { 400 };
            let c = collocation(&p, n).unwrap();
            let m = ExactModel::new(p).unwrap();
            let l: f64 = total_loss(&m, &[], &p, &c, &LossWeights::default());
            assert!((0.0..1e-10).contains(&l), "{}: {l}", p.id);
        }
    }

    #[test]
    fn chunked_gradient_matches_single_tape() {
        let p = Problem::new(ProblemId::Harmonic);
        let net = Network::new(NetworkSpec::kan(vec![1, 2, 1], 3, 3, p.domain()).unwrap()).unwrap();
        let theta = net.init(1).theta;
        let c = collocation_ode(&p, 20).unwrap();
        let plan = LossPlan::new(&p, &c, &LossWeights::default());
        let mut tape = Tape::new();
        let (l1, g1) = loss_and_gradient(&net, &theta, &plan, &mut tape, 7).unwrap();
        let t2 = Tape::new();
        let vars = t2.vars(&theta);
        let l = total_loss(&net, &vars, &p, &c, &LossWeights::default());
        let g2 = param_gradient(l, &vars).unwrap();
        assert!((l1 - l.value()).abs() < 1e-14 * l1.max(1.0));
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn network_gradient_matches_tape() {
        for id in ProblemId::ALL {
            let p = Problem::new(id);
            for kind in [NetworkKind::Mlp, NetworkKind::Kan] {
                let spec = NetworkSpec::with_hidden(kind, 2, 3, 4, 3, p.domain()).unwrap();
                let net = Network::new(spec).unwrap();
                let theta = net.init(7).theta;
                let c = collocation(&p, if p.is_ode() { 9 } else { 16 }).unwrap();
                let plan = LossPlan::new(&p, &c, &LossWeights::default());
                let (l1, g1) = loss_and_gradient(&net, &theta, &plan, &mut Tape::new(), 5).unwrap();
                let (l2, g2) =
                    network_loss_and_gradient(&net, &theta, &plan, &mut GradientWorkspace::new()).unwrap();
                assert!((l1 - l2).abs() <= 1e-12 * l1.max(1.0), "{id} {kind}");
                for (a, b) in g1.iter().zip(&g2) {
                    assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{id} {kind}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn adam_examples() {
        let mut s = AdamState::new(2);
        let mut p = vec![1.0, -2.0];
        s.step(&mut p, &[0.0, 0.0], 0.1);
        assert_eq!((p.clone(), s.t), (vec![1.0, -2.0], 1));

        let mut s = AdamState::new(1);
        let mut p = vec![0.0];
        s.step(&mut p, &[3.0], 0.01);
        assert!((p[0] + 0.01).abs() < 1e-10);
        s.step(&mut p, &[3.0], 0.01);
        assert!((p[0] + 0.02).abs() < 1e-10);

        let mut s = AdamState::new(1);
        let mut p = vec![1.0];
        let g = [2.0 * p[0]];
        s.step(&mut p, &g, 0.5);
        assert!(p[0] * p[0] < 1.0);
    }

    fn tiny(kind: NetworkKind, iterations: usize) -> TrainConfig {
        let p = logistic();
        let spec = NetworkSpec::with_hidden(kind, 1, 3, 3, 3, p.domain()).unwrap();
        TrainConfig {
            iterations,
            n_collocation: 10,
            ..TrainConfig::new(&p, spec)
        }
    }

    #[test]
    fn zero_iterations_keep_initial_params() {
        let cfg = tiny(NetworkKind::Kan, 0);
        let r = train(&cfg, 3).unwrap();
        assert!(r.loss_history.is_empty());
        assert_eq!(r.best_params, Network::new(cfg.spec.clone()).unwrap().init(3));
        assert!(r.best_loss.is_finite() && r.best_loss > 0.0);
    }

    #[test]
    fn training_is_deterministic_and_tracks_minimum() {
        for kind in [NetworkKind::Mlp, NetworkKind::Kan] {
            let cfg = tiny(kind, 30);
            let a = train(&cfg, 5).unwrap();
            let b = train(&cfg, 5).unwrap();
            assert_eq!(a, b);
            let min = a.loss_history.iter().copied().fold(f64::INFINITY, f64::min);
            assert_eq!(a.best_loss, min);
            assert_eq!(a.loss_history[a.best_iteration], min);
            assert!(a.loss_history.last().unwrap() < &a.loss_history[0]);
        }
    }

    #[test]
    fn run_config_orders_seeds() {
        let cfg = tiny(NetworkKind::Mlp, 3);
        let rs = run_config(&cfg, 2).unwrap();
        assert_eq!(rs.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![0, 1]);
        assert_ne!(rs[0].loss_history, rs[1].loss_history);
        assert!(run_config(&cfg, 0).is_err());
    }

    #[test]
    fn mismatched_network_is_rejected() {
        let mut cfg = tiny(NetworkKind::Mlp, 1);
        cfg.problem = ProblemId::Heat;
        assert!(train(&cfg, 0).is_err());
    }
}
