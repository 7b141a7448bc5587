//! Hand-derived reverse pass through jet-valued forward evaluations.
//!
//! Produces the same parameter gradients as recording the forward pass on a
//! [`crate::Tape`], without the per-node bookkeeping.

use super::{normalize_input, Network, NetworkKind};
use crate::diffengine::{seed_input, silu_derivs, tanh_derivs, Jet2};
use crate::splines::LocalBasis;

/// Intermediate values of one forward evaluation, reused across calls.
#[derive(Clone, Debug, Default)]
pub struct ForwardCache {
    /// Input jets of every layer.
    inputs: Vec<Vec<Jet2>>,
    /// KAN: silu derivatives at each layer input. MLP: tanh derivatives at
    /// each hidden pre-activation.
    act: Vec<Vec<[f64; 4]>>,
    /// MLP pre-activation jets.
    pre: Vec<Vec<Jet2>>,
    bases: Vec<Vec<Option<LocalBasis>>>,
    adj: Vec<[f64; 3]>,
    adj_next: Vec<[f64; 3]>,
}

impl ForwardCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self, layers: usize) {
        for v in [&mut self.inputs, &mut self.pre] {
            v.resize_with(layers, Vec::new);
            v.iter_mut().for_each(Vec::clear);
        }
        self.act.resize_with(layers, Vec::new);
        self.act.iter_mut().for_each(Vec::clear);
        self.bases.resize_with(layers, Vec::new);
        self.bases.iter_mut().for_each(Vec::clear);
    }
}

#[inline]
fn chain(f: &[f64; 4], x: &Jet2) -> Jet2 {
    Jet2 {
        v: f[0],
        d1: f[1] * x.d1,
        d2: f[2] * x.d1 * x.d1 + f[1] * x.d2,
    }
}

/// Adjoint of a jet input given the adjoint `g` of `f(x)` as a jet.
#[inline]
fn chain_adjoint(f: &[f64; 4], x: &Jet2, g: [f64; 3]) -> [f64; 3] {
    [
        g[0] * f[1] + g[1] * f[2] * x.d1 + g[2] * (f[3] * x.d1 * x.d1 + f[2] * x.d2),
        g[1] * f[1] + g[2] * 2.0 * f[2] * x.d1,
        g[2] * f[1],
    ]
}

#[inline]
fn dot(g: [f64; 3], j: &Jet2) -> f64 {
    g[0] * j.v + g[1] * j.d1 + g[2] * j.d2
}

impl Network {
    /// Output jet at `point` along `direction`, keeping what the reverse
    /// pass needs in `cache`.
    pub fn forward_cached(
        &self,
        params: &[f64],
        point: &[f64],
        direction: Option<usize>,
        cache: &mut ForwardCache,
    ) -> Jet2 {
        let layers = self.layout.layers();
        cache.reset(layers);
        cache.inputs[0].extend(
            point
                .iter()
                .zip(&self.spec.input_domain)
                .enumerate()
                .map(|(c, (&x, &dom))| normalize_input(dom, seed_input(x, direction == Some(c)))),
        );
        for layer in 0..layers {
            let next = match self.spec.kind {
                NetworkKind::Mlp => self.mlp_layer(params, layer, cache),
                NetworkKind::Kan => self.kan_layer(params, layer, cache),
            };
            if layer + 1 < layers {
                cache.inputs[layer + 1] = next;
            } else {
                return next[0];
            }
        }
        unreachable!("networks have at least one layer")
    }

    fn mlp_layer(&self, params: &[f64], layer: usize, cache: &mut ForwardCache) -> Vec<Jet2> {
        let n_in = self.spec.widths[layer];
        let n_out = self.spec.widths[layer + 1];
        let last = layer + 1 == self.layout.layers();
        let x = &cache.inputs[layer];
        let mut out = Vec::with_capacity(n_out);
        for j in 0..n_out {
            let w0 = self.layout.weight(layer, j, 0);
            let w = &params[w0..w0 + n_in];
            let mut z = Jet2::constant(params[self.layout.bias(layer, j)]);
            for (wi, xi) in w.iter().zip(x) {
                z.v += wi * xi.v;
                z.d1 += wi * xi.d1;
                z.d2 += wi * xi.d2;
            }
            if last {
                out.push(z);
            } else {
                let t = tanh_derivs(z.v);
                out.push(chain(&t, &z));
                cache.act[layer].push(t);
                cache.pre[layer].push(z);
            }
        }
        out
    }

    fn kan_layer(&self, params: &[f64], layer: usize, cache: &mut ForwardCache) -> Vec<Jet2> {
        let knots = self.knots.as_ref().expect("KAN knots");
        let n_out = self.spec.widths[layer + 1];
        let x = &cache.inputs[layer];
        let act = &mut cache.act[layer];
        let bases = &mut cache.bases[layer];
        act.extend(x.iter().map(|xi| silu_derivs(xi.v)));
        bases.extend(x.iter().map(|xi| knots.locate(xi.v)));
        let mut out = Vec::with_capacity(n_out);
        for j in 0..n_out {
            let mut y = Jet2::zero();
            for (i, xi) in x.iter().enumerate() {
                let e = self.layout.edge(layer, j, i);
                let s = chain(&act[i], xi);
                let wb = params[e.base_weight];
                y.v += wb * s.v;
                y.d1 += wb * s.d1;
                y.d2 += wb * s.d2;
                if let Some(b) = &bases[i] {
                    let sp = chain(&b.sums(&params[e.coefs]), xi);
                    let ws = params[e.spline_weight];
                    y.v += ws * sp.v;
                    y.d1 += ws * sp.d1;
                    y.d2 += ws * sp.d2;
                }
            }
            out.push(y);
        }
        out
    }

    /// Adds `Σ_c out_adj[c] · ∂(output jet component c)/∂θ` to `grad`, using
    /// the intermediates recorded by the last [`Network::forward_cached`]
    /// call on `cache`.
    pub fn backward_cached(
        &self,
        params: &[f64],
        cache: &mut ForwardCache,
        out_adj: [f64; 3],
        grad: &mut [f64],
    ) {
        let mut adj = std::mem::take(&mut cache.adj);
        let mut adj_next = std::mem::take(&mut cache.adj_next);
        adj.clear();
        adj.push(out_adj);
        for layer in (0..self.layout.layers()).rev() {
            adj_next.clear();
            adj_next.resize(self.spec.widths[layer], [0.0; 3]);
            let need_inputs = layer > 0;
            match self.spec.kind {
                NetworkKind::Mlp => {
                    self.mlp_backward(params, layer, cache, &adj, &mut adj_next, grad, need_inputs)
                }
                NetworkKind::Kan => {
                    self.kan_backward(params, layer, cache, &adj, &mut adj_next, grad, need_inputs)
                }
            }
            std::mem::swap(&mut adj, &mut adj_next);
        }
        cache.adj = adj;
        cache.adj_next = adj_next;
    }

    #[allow(clippy::too_many_arguments)]
    fn mlp_backward(
        &self,
        params: &[f64],
        layer: usize,
        cache: &ForwardCache,
        adj_out: &[[f64; 3]],
        adj_in: &mut [[f64; 3]],
        grad: &mut [f64],
        need_inputs: bool,
    ) {
        let n_in = self.spec.widths[layer];
        let last = layer + 1 == self.layout.layers();
        let x = &cache.inputs[layer];
        for (j, &g) in adj_out.iter().enumerate() {
            let zb = if last {
                g
            } else {
                chain_adjoint(&cache.act[layer][j], &cache.pre[layer][j], g)
            };
            if zb == [0.0; 3] {
                continue;
            }
            grad[self.layout.bias(layer, j)] += zb[0];
            let w0 = self.layout.weight(layer, j, 0);
            for i in 0..n_in {
                grad[w0 + i] += dot(zb, &x[i]);
                if need_inputs {
                    let w = params[w0 + i];
                    for c in 0..3 {
                        adj_in[i][c] += w * zb[c];
                    }
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn kan_backward(
        &self,
        params: &[f64],
        layer: usize,
        cache: &ForwardCache,
        adj_out: &[[f64; 3]],
        adj_in: &mut [[f64; 3]],
        grad: &mut [f64],
        need_inputs: bool,
    ) {
        let x = &cache.inputs[layer];
        let act = &cache.act[layer];
        let bases = &cache.bases[layer];
        for (j, &g) in adj_out.iter().enumerate() {
            if g == [0.0; 3] {
                continue;
            }
            for (i, xi) in x.iter().enumerate() {
                let e = self.layout.edge(layer, j, i);
                let wb = params[e.base_weight];
                grad[e.base_weight] += dot(g, &chain(&act[i], xi));
                if need_inputs {
                    let a = chain_adjoint(&act[i], xi, [wb * g[0], wb * g[1], wb * g[2]]);
                    for c in 0..3 {
                        adj_in[i][c] += a[c];
                    }
                }
                let Some(basis) = &bases[i] else { continue };
                let ws = params[e.spline_weight];
                let s = basis.sums(&params[e.coefs.clone()]);
                grad[e.spline_weight] += dot(g, &chain(&s, xi));
                for (m, bd) in basis.entries() {
                    grad[e.coefs.start + m] += ws * dot(g, &chain(bd, xi));
                }
                if need_inputs {
                    let a = chain_adjoint(&s, xi, [ws * g[0], ws * g[1], ws * g[2]]);
                    for c in 0..3 {
                        adj_in[i][c] += a[c];
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffengine::{param_gradient, Scalar, Tape};
    use crate::networks::{Model, NetworkSpec};
    use crate::rng::SeededRng;

    fn compare(net: &Network, theta: &[f64], point: &[f64]) {
        let mut cache = ForwardCache::new();
        let adj = [0.7, -1.3, 0.4];
        for dir in [None, Some(0), Some(point.len() - 1)] {
            let fast = net.forward_cached(theta, point, dir, &mut cache);
            let slow: Jet2 = net.eval(theta, point, dir);
            for (a, b) in [(fast.v, slow.v), (fast.d1, slow.d1), (fast.d2, slow.d2)] {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
            }
            let mut grad = vec![0.0; theta.len()];
            net.backward_cached(theta, &mut cache, adj, &mut grad);

            let tape = Tape::new();
            let vars = tape.vars(theta);
            let j = net.eval(&vars, point, dir);
            let out = j.v.scale(adj[0]) + j.d1.scale(adj[1]) + j.d2.scale(adj[2]);
            let reference = param_gradient(out, &vars).unwrap();
            for (a, b) in grad.iter().zip(&reference) {
                assert!((a - b).abs() <= 1e-11 * b.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn matches_tape_for_kan() {
        let net = Network::new(NetworkSpec::kan(vec![2, 3, 4, 1], 5, 3, vec![(0.0, 1.0); 2]).unwrap()).unwrap();
        let mut theta = net.init(4).theta;
        let mut rng = SeededRng::new(1);
        theta.iter_mut().for_each(|t| *t += 0.3 * rng.normal());
        for point in [[0.1, 0.9], [0.55, 0.2], [1.0, 0.0]] {
            compare(&net, &theta, &point);
        }
    }

    #[test]
    fn matches_tape_for_mlp() {
        let net = Network::new(NetworkSpec::mlp(vec![1, 6, 5, 1], vec![(-2.0, 3.0)]).unwrap()).unwrap();
        let theta = net.init(9).theta;
        for x in [-2.0, 0.0, 1.7, 3.0] {
            compare(&net, &theta, &[x]);
        }
    }

    #[test]
    fn extrapolating_kan_inputs() {
        let net = Network::new(NetworkSpec::kan(vec![1, 2, 1], 3, 3, vec![(0.0, 5.0)]).unwrap()).unwrap();
        let mut theta = net.init(0).theta;
        theta.iter_mut().for_each(|t| *t *= 40.0);
        compare(&net, &theta, &[2.5]);
    }
}
