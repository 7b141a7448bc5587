//! Parameter-matched MLP and KAN backbones evaluated over [`Jet2`] inputs.
//!
//! Parameters live in one flat vector. For an MLP each layer stores its
//! weight matrix row-major (`[out][in]`) followed by its biases. For a KAN
//! each layer stores its edges in `(out, in)` row-major order, and every edge
//! is the contiguous block `[w_b, w_s, c_0, …, c_{G+k-1}]` describing
//! `φ(x) = w_b·silu(x) + w_s·Σ cᵢ·Bᵢ(x)`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::diffengine::{seed_input, Jet2, Scalar};
use crate::error::{config, Error, Result};
use crate::rng::SeededRng;
use crate::splines::{KnotVector, LocalBasis};

mod backprop;

pub use backprop::ForwardCache;

/// Nominal range of every KAN spline grid; inputs are mapped onto it.
pub const SPLINE_RANGE: (f64, f64) = (-1.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Mlp,
    Kan,
}

impl NetworkKind {
    /// Name used by the physics-informed literature for the trained model.
    pub fn method_name(self) -> &'static str {
        match self {
            NetworkKind::Mlp => "PINN",
            NetworkKind::Kan => "PIKAN",
        }
    }
}

impl std::fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NetworkKind::Mlp => "mlp",
            NetworkKind::Kan => "kan",
        })
    }
}

impl std::str::FromStr for NetworkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mlp" | "pinn" => Ok(NetworkKind::Mlp),
            "kan" | "pikan" => Ok(NetworkKind::Kan),
            other => Err(config(format!("unknown network kind '{other}'"))),
        }
    }
}

/// Architecture descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub kind: NetworkKind,
    /// Input dimension, hidden widths…, output dimension.
    pub widths: Vec<usize>,
    /// Spline grid intervals (KAN only).
    pub grid: usize,
    /// Spline polynomial order (KAN only).
    pub order: usize,
    /// Raw coordinate range per input, used for normalization.
    pub input_domain: Vec<(f64, f64)>,
}

impl NetworkSpec {
    pub fn mlp(widths: Vec<usize>, input_domain: Vec<(f64, f64)>) -> Result<Self> {
        let spec = Self {
            kind: NetworkKind::Mlp,
            widths,
            grid: 0,
            order: 0,
            input_domain,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn kan(
        widths: Vec<usize>,
        grid: usize,
        order: usize,
        input_domain: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let spec = Self {
            kind: NetworkKind::Kan,
            widths,
            grid,
            order,
            input_domain,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `hidden` layers of equal `width` between the domain's inputs and one output.
    pub fn with_hidden(
        kind: NetworkKind,
        hidden: usize,
        width: usize,
        grid: usize,
        order: usize,
        input_domain: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let mut widths = vec![input_domain.len()];
        widths.extend(std::iter::repeat(width).take(hidden));
        widths.push(1);
        match kind {
            NetworkKind::Mlp => Self::mlp(widths, input_domain),
            NetworkKind::Kan => Self::kan(widths, grid, order, input_domain),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = &self.widths;
        if w.len() < 2 {
            return Err(config("network needs at least an input and an output layer"));
        }
        if !(1..=2).contains(&w[0]) {
            return Err(config(format!("input dimension must be 1 or 2, got {}", w[0])));
        }
        if *w.last().unwrap() != 1 {
            return Err(config("output dimension must be 1"));
        }
        if w.iter().any(|&n| n == 0) {
            return Err(config("layer widths must be positive"));
        }
        if self.input_domain.len() != w[0] {
            return Err(config(format!(
                "{} input ranges for input dimension {}",
                self.input_domain.len(),
                w[0]
            )));
        }
        if let Some((lo, hi)) = self.input_domain.iter().find(|(lo, hi)| !(lo < hi)) {
            return Err(config(format!("invalid input range [{lo}, {hi}]")));
        }
        if self.kind == NetworkKind::Kan && self.grid == 0 {
            return Err(config("KAN needs at least one grid interval"));
        }
        Ok(())
    }

    /// Number of hidden layers (H).
    pub fn hidden_layers(&self) -> usize {
        self.widths.len() - 2
    }

    /// Width of the first hidden layer (W), or 0 without hidden layers.
    pub fn hidden_width(&self) -> usize {
        if self.widths.len() > 2 {
            self.widths[1]
        } else {
            0
        }
    }

    pub fn param_count(&self) -> usize {
        match self.kind {
            NetworkKind::Mlp => mlp_param_count(&self.widths),
            NetworkKind::Kan => kan_param_count(&self.widths, self.grid, self.order),
        }
    }

    fn edge_size(&self) -> usize {
        self.grid + self.order + 2
    }
}

/// Σ (n_in + 1)·n_out over consecutive layers.
pub fn mlp_param_count(widths: &[usize]) -> usize {
    widths.windows(2).map(|p| (p[0] + 1) * p[1]).sum()
}

/// (Σ n_in·n_out over consecutive layers)·(G + k + 2).
pub fn kan_param_count(widths: &[usize], grid: usize, order: usize) -> usize {
    widths.windows(2).map(|p| p[0] * p[1]).sum::<usize>() * (grid + order + 2)
}

/// Slots of one KAN edge inside the flat parameter vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSlots {
    pub base_weight: usize,
    pub spline_weight: usize,
    pub coefs: std::ops::Range<usize>,
}

/// Deterministic map from (layer, unit/edge, slot) to flat parameter index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamLayout {
    kind: NetworkKind,
    widths: Vec<usize>,
    edge_size: usize,
    offsets: Vec<usize>,
    len: usize,
}

impl ParamLayout {
    pub fn new(spec: &NetworkSpec) -> Self {
        let edge_size = spec.edge_size();
        let mut offsets = Vec::with_capacity(spec.widths.len() - 1);
        let mut off = 0;
        for p in spec.widths.windows(2) {
            offsets.push(off);
            off += match spec.kind {
                NetworkKind::Mlp => (p[0] + 1) * p[1],
                NetworkKind::Kan => p[0] * p[1] * edge_size,
            };
        }
        Self {
            kind: spec.kind,
            widths: spec.widths.clone(),
            edge_size,
            offsets,
            len: off,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn layers(&self) -> usize {
        self.offsets.len()
    }

    /// MLP weight connecting input `inp` to unit `out` of `layer`.
    pub fn weight(&self, layer: usize, out: usize, inp: usize) -> usize {
        debug_assert_eq!(self.kind, NetworkKind::Mlp);
        self.offsets[layer] + out * self.widths[layer] + inp
    }

    /// MLP bias of unit `out` in `layer`.
    pub fn bias(&self, layer: usize, out: usize) -> usize {
        debug_assert_eq!(self.kind, NetworkKind::Mlp);
        let n_in = self.widths[layer];
        let n_out = self.widths[layer + 1];
        self.offsets[layer] + n_in * n_out + out
    }

    /// KAN edge from input `inp` to node `out` of `layer`.
    pub fn edge(&self, layer: usize, out: usize, inp: usize) -> EdgeSlots {
        debug_assert_eq!(self.kind, NetworkKind::Kan);
        let base = self.offsets[layer] + (out * self.widths[layer] + inp) * self.edge_size;
        EdgeSlots {
            base_weight: base,
            spline_weight: base + 1,
            coefs: base + 2..base + self.edge_size,
        }
    }
}

/// Flat trainable parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector {
    pub theta: Vec<f64>,
}

impl ParameterVector {
    pub fn new(theta: Vec<f64>) -> Self {
        Self { theta }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }
}

/// Deterministic initialization from `(spec, seed)`.
///
/// MLP weights are Glorot-uniform with zero biases. KAN edges start with
/// `w_b ~ U(−1, 1)/√n_in`, `w_s = 1` and spline coefficients drawn from
/// `N(0, (0.1/√(G+k))²)`.
pub fn init_params(spec: &NetworkSpec, seed: u64) -> ParameterVector {
    let layout = ParamLayout::new(spec);
    let mut theta = vec![0.0; layout.len()];
    let mut rng = SeededRng::new(seed);
    for (layer, p) in spec.widths.windows(2).enumerate() {
        let (n_in, n_out) = (p[0], p[1]);
        match spec.kind {
            NetworkKind::Mlp => {
                let limit = (6.0 / (n_in + n_out) as f64).sqrt();
                for out in 0..n_out {
                    for inp in 0..n_in {
                        theta[layout.weight(layer, out, inp)] = rng.uniform_in(-limit, limit);
                    }
                }
            }
            NetworkKind::Kan => {
                let sigma = 0.1 / ((spec.grid + spec.order) as f64).sqrt();
                let base = 1.0 / (n_in as f64).sqrt();
                for out in 0..n_out {
                    for inp in 0..n_in {
                        let e = layout.edge(layer, out, inp);
                        theta[e.base_weight] = base * rng.uniform_in(-1.0, 1.0);
                        theta[e.spline_weight] = 1.0;
                        for c in e.coefs {
                            theta[c] = sigma * rng.normal();
                        }
                    }
                }
            }
        }
    }
    ParameterVector { theta }
}

/// Affine map of `[lo, hi]` onto the spline range `[-1, 1]`, applied to a jet.
///
/// Derivative coefficients scale by the slope, so the chain rule keeps every
/// downstream derivative relative to the raw coordinate.
pub fn normalize_input<S: Scalar>(domain: (f64, f64), x: Jet2<S>) -> Jet2<S> {
    let (lo, hi) = domain;
    let slope = 2.0 / (hi - lo);
    let v = x.v.value();
    Jet2 {
        v: S::compose(2.0 * (v - lo) / (hi - lo) - 1.0, [(x.v, slope)]),
        d1: x.d1.scale(slope),
        d2: x.d2.scale(slope),
    }
}

/// Anything that maps a point to an output jet given a parameter slice.
///
/// Networks implement it, and so do closed-form oracles used in tests.
pub trait Model: Sync {
    fn input_dim(&self) -> usize;

    fn param_count(&self) -> usize;

    /// Output at `point` (raw coordinates) with jets along coordinate
    /// `direction`; `None` seeds nothing and yields a plain value.
    fn eval<S: Scalar>(&self, params: &[S], point: &[f64], direction: Option<usize>) -> Jet2<S>;
}

/// A network ready for evaluation: spec plus derived layout and knots.
#[derive(Clone, Debug)]
pub struct Network {
    spec: NetworkSpec,
    layout: ParamLayout,
    knots: Option<KnotVector>,
}

impl Network {
    pub fn new(spec: NetworkSpec) -> Result<Self> {
        spec.validate()?;
        let knots = match spec.kind {
            NetworkKind::Kan => Some(KnotVector::uniform(
                spec.grid,
                spec.order,
                SPLINE_RANGE.0,
                SPLINE_RANGE.1,
            )?),
            NetworkKind::Mlp => None,
        };
        Ok(Self {
            layout: ParamLayout::new(&spec),
            spec,
            knots,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn init(&self, seed: u64) -> ParameterVector {
        init_params(&self.spec, seed)
    }

    /// Forward pass on already-normalized input jets.
    pub fn forward<S: Scalar>(&self, params: &[S], inputs: &[Jet2<S>]) -> Jet2<S> {
        assert_eq!(params.len(), self.layout.len(), "parameter vector length");
        assert_eq!(inputs.len(), self.spec.widths[0], "input dimension");
        match self.spec.kind {
            NetworkKind::Mlp => self.forward_mlp(params, inputs),
            NetworkKind::Kan => self.forward_kan(params, inputs),
        }
    }

    fn forward_mlp<S: Scalar>(&self, params: &[S], inputs: &[Jet2<S>]) -> Jet2<S> {
        let layers = self.layout.layers();
        let mut x: Vec<Jet2<S>> = inputs.to_vec();
        for layer in 0..layers {
            let n_in = self.spec.widths[layer];
            let n_out = self.spec.widths[layer + 1];
            let last = layer + 1 == layers;
            x = (0..n_out)
                .map(|out| {
                    let w0 = self.layout.weight(layer, out, 0);
                    let z = Jet2::affine(
                        &params[w0..w0 + n_in],
                        &x,
                        Some(params[self.layout.bias(layer, out)]),
                    );
                    if last {
                        z
                    } else {
                        z.tanh()
                    }
                })
                .collect();
        }
        x[0]
    }

    fn forward_kan<S: Scalar>(&self, params: &[S], inputs: &[Jet2<S>]) -> Jet2<S> {
        let knots = self.knots.as_ref().expect("KAN knots");
        let mut x: Vec<Jet2<S>> = inputs.to_vec();
        let mut bases: Vec<Option<LocalBasis>> = Vec::new();
        let mut silu: Vec<Jet2<S>> = Vec::new();
        for layer in 0..self.layout.layers() {
            let n_out = self.spec.widths[layer + 1];
            bases.clear();
            bases.extend(x.iter().map(|xi| knots.locate(xi.v.value())));
            silu.clear();
            silu.extend(x.iter().map(|xi| xi.silu()));
            x = (0..n_out)
                .map(|out| self.kan_node(params, layer, out, &x, &silu, &bases))
                .collect();
        }
        x[0]
    }

    /// One KAN output node `Σᵢ w_b·silu(xᵢ) + w_s·Σ c·B(xᵢ)` recorded as three
    /// fused nodes with partials straight to the edge parameters.
    fn kan_node<S: Scalar>(
        &self,
        params: &[S],
        layer: usize,
        out: usize,
        x: &[Jet2<S>],
        silu: &[Jet2<S>],
        bases: &[Option<LocalBasis>],
    ) -> Jet2<S> {
        let edges: SmallVec<[(usize, [f64; 4], f64, f64); 8]> = (0..x.len())
            .map(|i| {
                let e = self.layout.edge(layer, out, i);
                let s = bases[i]
                    .as_ref()
                    .map_or([0.0; 4], |b| b.sums(&params[e.coefs]));
                (e.base_weight, s, x[i].d1.value(), x[i].d2.value())
            })
            .collect();
        let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for (i, &(b, s, xd1, xd2)) in edges.iter().enumerate() {
            let (wb, ws) = (params[b].value(), params[b + 1].value());
            v += wb * silu[i].v.value() + ws * s[0];
            d1 += wb * silu[i].d1.value() + ws * s[1] * xd1;
            d2 += wb * silu[i].d2.value() + ws * (s[2] * xd1 * xd1 + s[1] * xd2);
        }
        let edges_ref = &edges;
        let coef_parents = move |i: usize, f: fn(&[f64; 4], f64, f64) -> f64| {
            let (b, _, xd1, xd2) = edges_ref[i];
            let ws = params[b + 1].value();
            bases[i].iter().flat_map(move |basis| {
                basis
                    .entries()
                    .iter()
                    .map(move |(j, bd)| (params[b + 2 + j], ws * f(bd, xd1, xd2)))
            })
        };
        let n = x.len();
        let v = S::compose(
            v,
            (0..n).flat_map(|i| {
                let (b, s, _, _) = edges[i];
                let (wb, ws) = (params[b], params[b + 1]);
                [
                    (wb, silu[i].v.value()),
                    (silu[i].v, wb.value()),
                    (ws, s[0]),
                    (x[i].v, ws.value() * s[1]),
                ]
                .into_iter()
                .chain(coef_parents(i, |bd, _, _| bd[0]))
            }),
        );
        let d1 = S::compose(
            d1,
            (0..n).flat_map(|i| {
                let (b, s, xd1, _) = edges[i];
                let (wb, ws) = (params[b], params[b + 1]);
                [
                    (wb, silu[i].d1.value()),
                    (silu[i].d1, wb.value()),
                    (ws, s[1] * xd1),
                    (x[i].v, ws.value() * s[2] * xd1),
                    (x[i].d1, ws.value() * s[1]),
                ]
                .into_iter()
                .chain(coef_parents(i, |bd, xd1, _| bd[1] * xd1))
            }),
        );
        let d2 = S::compose(
            d2,
            (0..n).flat_map(|i| {
                let (b, s, xd1, xd2) = edges[i];
                let (wb, ws) = (params[b], params[b + 1]);
                let w = ws.value();
                [
                    (wb, silu[i].d2.value()),
                    (silu[i].d2, wb.value()),
                    (ws, s[2] * xd1 * xd1 + s[1] * xd2),
                    (x[i].v, w * (s[3] * xd1 * xd1 + s[2] * xd2)),
                    (x[i].d1, w * 2.0 * s[2] * xd1),
                    (x[i].d2, w * s[1]),
                ]
                .into_iter()
                .chain(coef_parents(i, |bd, xd1, xd2| bd[2] * xd1 * xd1 + bd[1] * xd2))
            }),
        );
        Jet2 { v, d1, d2 }
    }
}

impl Model for Network {
    fn input_dim(&self) -> usize {
        self.spec.widths[0]
    }

    fn param_count(&self) -> usize {
        self.layout.len()
    }

    fn eval<S: Scalar>(&self, params: &[S], point: &[f64], direction: Option<usize>) -> Jet2<S> {
        let inputs: SmallVec<[Jet2<S>; 2]> = point
            .iter()
            .zip(&self.spec.input_domain)
            .enumerate()
            .map(|(c, (&x, &dom))| normalize_input(dom, seed_input(x, direction == Some(c))))
            .collect();
        self.forward(params, &inputs)
    }
}

/// A parameter vector together with the spec it indexes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub spec: NetworkSpec,
    pub theta: Vec<f64>,
}

const CHECKPOINT_MAGIC: &[u8; 8] = b"PIKANCK1";

impl Checkpoint {
    pub fn new(spec: NetworkSpec, params: &ParameterVector) -> Result<Self> {
        if spec.param_count() != params.len() {
            return Err(config(format!(
                "spec expects {} parameters, got {}",
                spec.param_count(),
                params.len()
            )));
        }
        Ok(Self {
            spec,
            theta: params.theta.clone(),
        })
    }

    pub fn params(&self) -> ParameterVector {
        ParameterVector::new(self.theta.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Self = serde_json::from_str(text)?;
        ck.check()?;
        Ok(ck)
    }

    /// Binary layout: magic, u32 header length, JSON spec header, u64 count,
    /// then the parameters as little-endian f64.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let header = serde_json::to_vec(&self.spec)?;
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&(header.len() as u32).to_le_bytes())?;
        w.write_all(&header)?;
        w.write_all(&(self.theta.len() as u64).to_le_bytes())?;
        for t in &self.theta {
            w.write_all(&t.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(Error::Usage("not a parameter checkpoint".into()));
        }
        let mut len4 = [0u8; 4];
        r.read_exact(&mut len4)?;
        let mut header = vec![0u8; u32::from_le_bytes(len4) as usize];
        r.read_exact(&mut header)?;
        let spec: NetworkSpec = serde_json::from_slice(&header)?;
        let mut len8 = [0u8; 8];
        r.read_exact(&mut len8)?;
        let n = u64::from_le_bytes(len8) as usize;
        let mut theta = Vec::with_capacity(n);
        let mut buf = [0u8; 8];
        for _ in 0..n {
            r.read_exact(&mut buf)?;
            theta.push(f64::from_le_bytes(buf));
        }
        let ck = Self { spec, theta };
        ck.check()?;
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            std::fs::write(path, self.to_json()?)?;
        } else {
            self.write_binary(std::io::BufWriter::new(file))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&std::fs::read_to_string(path)?)
        } else {
            Self::read_binary(std::io::BufReader::new(std::fs::File::open(path)?))
        }
    }

    fn check(&self) -> Result<()> {
        self.spec.validate()?;
        if self.spec.param_count() != self.theta.len() {
            return Err(config(format!(
                "checkpoint holds {} parameters, spec expects {}",
                self.theta.len(),
                self.spec.param_count()
            )));
        }
        Ok(())
    }
}
