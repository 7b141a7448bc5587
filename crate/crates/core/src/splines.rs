//! Uniform B-spline machinery behind every KAN edge.
//!
//! Knot vectors are extended by `k` uniformly spaced knots on each side of the
//! nominal range, giving `G + k` basis functions of order `k` that form a
//! partition of unity on `[lo, hi]`. Two evaluation routes exist: the full
//! Cox–de Boor table ([`KnotVector::basis_all`], [`KnotVector::basis_derivative`])
//! and a local evaluator returning only the `k + 1` non-zero functions with
//! derivatives ([`KnotVector::locate`]), which the networks use.

use smallvec::SmallVec;

use crate::diffengine::{Jet2, Scalar};
use crate::error::{config, Result};

/// Highest derivative order tracked by the local evaluator.
const MAX_DERIV: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    grid: usize,
    order: usize,
    lo: f64,
    hi: f64,
    /// Polynomial pieces of the cardinal B-spline in the local coordinate.
    pieces: Vec<Vec<f64>>,
}

/// Builds the uniform extended knot vector for `grid` intervals on `[lo, hi]`.
pub fn make_grid(grid: usize, order: usize, lo: f64, hi: f64) -> Result<KnotVector> {
    KnotVector::uniform(grid, order, lo, hi)
}

impl KnotVector {
    pub fn uniform(grid: usize, order: usize, lo: f64, hi: f64) -> Result<Self> {
        if grid == 0 {
            return Err(config("spline grid needs at least one interval"));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(config(format!("invalid spline range [{lo}, {hi}]")));
        }
        let g = grid as f64;
        let knots = (0..grid + 2 * order + 1)
            .map(|i| {
                let s = i as f64 - order as f64;
                (lo * (g - s) + hi * s) / g
            })
            .collect();
        Ok(Self {
            knots,
            grid,
            order,
            lo,
            hi,
            pieces: cardinal_pieces(order),
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.grid as f64
    }

    pub fn num_basis(&self) -> usize {
        self.grid + self.order
    }

    /// Knot `j` of the uniform lattice, extended beyond the stored vector.
    fn virtual_knot(&self, j: isize) -> f64 {
        let g = self.grid as f64;
        let s = j as f64 - self.order as f64;
        (self.lo * (g - s) + self.hi * s) / g
    }

    /// Span index `i` with `t_i <= x < t_{i+1}`, or `None` outside the knot span.
    pub fn span(&self, x: f64) -> Option<usize> {
        let t = &self.knots;
        let last = t.len() - 1;
        if !(x >= t[0] && x < t[last]) {
            return None;
        }
        let mut i = (((x - t[0]) / self.step()).floor() as usize).min(last - 1);
        while i > 0 && t[i] > x {
            i -= 1;
        }
        while i + 1 < last && t[i + 1] <= x {
            i += 1;
        }
        Some(i)
    }

    /// Values of all `G + k` basis functions at `x` via the Cox–de Boor recursion.
    pub fn basis_all(&self, x: f64) -> Vec<f64> {
        self.basis_of_order(x, self.order)
    }

    /// All basis functions of order `p <= k` on this knot vector.
    fn basis_of_order(&self, x: f64, p: usize) -> Vec<f64> {
        let t = &self.knots;
        let m = t.len() - 1;
        let mut b: Vec<f64> = (0..m)
            .map(|i| if t[i] <= x && x < t[i + 1] { 1.0 } else { 0.0 })
            .collect();
        for q in 1..=p {
            let next: Vec<f64> = (0..m - q)
                .map(|i| {
                    let left = (x - t[i]) / (t[i + q] - t[i]) * b[i];
                    let right = (t[i + q + 1] - x) / (t[i + q + 1] - t[i + 1]) * b[i + 1];
                    left + right
                })
                .collect();
            b = next;
        }
        b
    }

    /// `order`-th derivative of every basis function at `x`, by the recurrence
    /// B′ᵢ,ₚ = p/(tᵢ₊ₚ − tᵢ)·Bᵢ,ₚ₋₁ − p/(tᵢ₊ₚ₊₁ − tᵢ₊₁)·Bᵢ₊₁,ₚ₋₁.
    pub fn basis_derivative(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        if order == 0 {
            return Ok(self.basis_all(x));
        }
        if order > self.order {
            return Err(config(format!(
                "derivative order {order} exceeds spline order {}",
                self.order
            )));
        }
        Ok(self.derivs_of_order(x, self.order, order))
    }

    fn derivs_of_order(&self, x: f64, p: usize, m: usize) -> Vec<f64> {
        if m == 0 {
            return self.basis_of_order(x, p);
        }
        let t = &self.knots;
        let lower = self.derivs_of_order(x, p - 1, m - 1);
        let pf = p as f64;
        (0..t.len() - 1 - p)
            .map(|i| {
                pf / (t[i + p] - t[i]) * lower[i] - pf / (t[i + p + 1] - t[i + 1]) * lower[i + 1]
            })
            .collect()
    }

    /// Non-zero basis functions at `x` with derivatives up to third order.
    ///
    /// On a uniform lattice every basis function is a shifted cardinal
    /// B-spline, so the pieces are evaluated directly as polynomials.
    pub fn locate(&self, x: f64) -> Option<LocalBasis> {
        let span = self.span(x)?;
        let p = self.order;
        let h = self.step();
        let u = (x - self.knots[span]) / h;
        let nb = self.num_basis() as isize;
        let mut entries = SmallVec::new();
        for r in 0..=p {
            let index = span as isize - p as isize + r as isize;
            if index < 0 || index >= nb {
                continue;
            }
            let c = &self.pieces[p - r];
            let mut d = [0.0; MAX_DERIV + 1];
            let mut scale = 1.0;
            for (m, dm) in d.iter_mut().enumerate().take(p.min(MAX_DERIV) + 1) {
                let mut acc = 0.0;
                for deg in (m..=p).rev() {
                    let falling: f64 = (deg + 1 - m..=deg).map(|f| f as f64).product();
                    acc = acc * u + c[deg] * falling;
                }
                *dm = acc * scale;
                scale /= h;
            }
            entries.push((index as usize, d));
        }
        Some(LocalBasis { entries })
    }

    /// Evaluates the polynomial pieces of span `i` at `x` (which may lie on
    /// the span's closed boundary, giving one-sided limits at knots).
    pub fn basis_in_span(&self, x: f64, span: usize) -> LocalBasis {
        let p = self.order;
        let i = span as isize;
        let nders = MAX_DERIV.min(p);
        let w = p + 1;

        // ndu holds basis values (upper triangle) and knot differences (lower).
        let mut ndu: SmallVec<[f64; 16]> = SmallVec::from_elem(0.0, w * w);
        let mut left: SmallVec<[f64; 4]> = SmallVec::from_elem(0.0, w);
        let mut right: SmallVec<[f64; 4]> = SmallVec::from_elem(0.0, w);
        let at = |r: usize, c: usize| r * w + c;
        ndu[at(0, 0)] = 1.0;
        for j in 1..=p {
            left[j] = x - self.virtual_knot(i + 1 - j as isize);
            right[j] = self.virtual_knot(i + j as isize) - x;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[at(j, r)] = right[r + 1] + left[j - r];
                let temp = ndu[at(r, j - 1)] / ndu[at(j, r)];
                ndu[at(r, j)] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[at(j, j)] = saved;
        }

        let mut ders_vec: SmallVec<[[f64; MAX_DERIV + 1]; 4]> =
            SmallVec::from_elem([0.0; MAX_DERIV + 1], w);
        for j in 0..=p {
            ders_vec[j][0] = ndu[at(j, p)];
        }
        let mut a: [SmallVec<[f64; 4]>; 2] =
            [SmallVec::from_elem(0.0, w), SmallVec::from_elem(0.0, w)];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=nders {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    let rk = rk as usize;
                    a[s2][0] = a[s1][0] / ndu[at(pk + 1, rk)];
                    d = a[s2][0] * ndu[at(rk, pk)];
                }
                let j1: usize = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2: usize = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[at(pk + 1, idx)];
                    d += a[s2][j] * ndu[at(idx, pk)];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[at(pk + 1, r)];
                    d += a[s2][k] * ndu[at(r, pk)];
                }
                ders_vec[r][k] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for k in 1..=nders {
            for row in ders_vec.iter_mut() {
                row[k] *= factor;
            }
            factor *= (p - k) as f64;
        }

        let nb = self.num_basis() as isize;
        let entries = ders_vec
            .into_iter()
            .enumerate()
            .filter_map(|(j, d)| {
                let index = i - p as isize + j as isize;
                (index >= 0 && index < nb).then_some((index as usize, d))
            })
            .collect();
        LocalBasis { entries }
    }
}

/// Pieces `N_k|[j, j+1)` of the cardinal B-spline of order `k` as ascending
/// polynomial coefficients in `u = t − j`.
fn cardinal_pieces(k: usize) -> Vec<Vec<f64>> {
    let mut pieces = vec![vec![1.0]];
    for p in 1..=k {
        let pf = p as f64;
        let mut next = vec![vec![0.0; p + 1]; p + 1];
        for (j, piece) in next.iter_mut().enumerate() {
            if j < p {
                for (d, &c) in pieces[j].iter().enumerate() {
                    piece[d] += c * j as f64 / pf;
                    piece[d + 1] += c / pf;
                }
            }
            if j >= 1 {
                for (d, &c) in pieces[j - 1].iter().enumerate() {
                    piece[d] += c * (p + 1 - j) as f64 / pf;
                    piece[d + 1] -= c / pf;
                }
            }
        }
        pieces = next;
    }
    pieces
}

/// The non-zero basis functions at one abscissa: `(index, [B, B′, B″, B‴])`.
#[derive(Clone, Debug)]
pub struct LocalBasis {
    entries: SmallVec<[(usize, [f64; MAX_DERIV + 1]); 4]>,
}

impl LocalBasis {
    pub fn entries(&self) -> &[(usize, [f64; MAX_DERIV + 1])] {
        &self.entries
    }

    /// Σ cⱼ·Bⱼ⁽ᵐ⁾ for m = 0..=3.
    pub(crate) fn sums<S: Scalar>(&self, coefs: &[S]) -> [f64; MAX_DERIV + 1] {
        let mut s = [0.0; MAX_DERIV + 1];
        for (j, d) in &self.entries {
            let c = coefs[*j].value();
            for m in 0..=MAX_DERIV {
                s[m] += c * d[m];
            }
        }
        s
    }

    /// Spline value as a jet, with partials towards both `x` and the coefficients.
    pub fn eval_jet<S: Scalar>(&self, coefs: &[S], x: Jet2<S>) -> Jet2<S> {
        let [s0, s1, s2, s3] = self.sums(coefs);
        let (d1, d2) = (x.d1.value(), x.d2.value());
        let e = &self.entries;
        Jet2 {
            v: S::compose(
                s0,
                std::iter::once((x.v, s1)).chain(e.iter().map(|(j, b)| (coefs[*j], b[0]))),
            ),
            d1: S::compose(
                s1 * d1,
                [(x.v, s2 * d1), (x.d1, s1)]
                    .into_iter()
                    .chain(e.iter().map(|(j, b)| (coefs[*j], b[1] * d1))),
            ),
            d2: S::compose(
                s2 * d1 * d1 + s1 * d2,
                [(x.v, s3 * d1 * d1 + s2 * d2), (x.d1, 2.0 * s2 * d1), (x.d2, s1)]
                    .into_iter()
                    .chain(e.iter().map(|(j, b)| (coefs[*j], b[2] * d1 * d1 + b[1] * d2))),
            ),
        }
    }
}

/// Σ cᵢ·Bᵢ(x) propagated through a jet. Zero outside the knot span.
pub fn spline_eval<S: Scalar>(coefs: &[S], kv: &KnotVector, x: Jet2<S>) -> Result<Jet2<S>> {
    if coefs.len() != kv.num_basis() {
        return Err(config(format!(
            "{} spline coefficients for {} basis functions",
            coefs.len(),
            kv.num_basis()
        )));
    }
    Ok(match kv.locate(x.v.value()) {
        Some(basis) => basis.eval_jet(coefs, x),
        None => Jet2::zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffengine::seed_input;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn grid_examples() {
        let kv = make_grid(3, 3, -1.0, 1.0).unwrap();
        assert_eq!(kv.knots().len(), 10);
        assert_eq!(kv.num_basis(), 6);
        assert!(close(kv.knots()[0], -3.0, 1e-15));
        assert!(close(kv.knots()[9], 3.0, 1e-15));
        for w in kv.knots().windows(2) {
            assert!(close(w[1] - w[0], 2.0 / 3.0, 1e-12));
        }
        assert_eq!(kv.knots()[3], -1.0);
        assert_eq!(kv.knots()[6], 1.0);

        let kv = make_grid(1, 0, 0.0, 1.0).unwrap();
        assert_eq!(kv.knots(), &[0.0, 1.0]);
        assert_eq!(kv.num_basis(), 1);

        let kv = make_grid(5, 3, -1.0, 1.0).unwrap();
        assert_eq!(kv.knots().len(), 12);
        assert_eq!(kv.num_basis(), 8);
    }

    #[test]
    fn invalid_grids() {
        assert!(make_grid(0, 3, -1.0, 1.0).is_err());
        assert!(make_grid(3, 3, 1.0, 1.0).is_err());
        assert!(make_grid(3, 3, 2.0, -1.0).is_err());
    }

    #[test]
    fn order_zero_is_indicator() {
        let kv = make_grid(3, 0, -1.0, 1.0).unwrap();
        assert_eq!(kv.basis_all(0.1), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn cubic_at_interior_knot() {
        let kv = make_grid(3, 3, -1.0, 1.0).unwrap();
        let x = kv.knots()[4];
        let nonzero: Vec<f64> = kv.basis_all(x).into_iter().filter(|v| v.abs() > 1e-15).collect();
        assert_eq!(nonzero.len(), 3);
        for (got, want) in nonzero.iter().zip([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) {
            assert!(close(*got, want, 1e-14), "{nonzero:?}");
        }
    }

    #[test]
    fn outside_span_is_zero() {
        let kv = make_grid(3, 3, -1.0, 1.0).unwrap();
        assert!(kv.basis_all(3.5).iter().all(|&v| v == 0.0));
        assert!(kv.basis_all(-3.0001).iter().all(|&v| v == 0.0));
        assert!(kv.locate(3.0).is_none());
        let c = vec![1.0; 6];
        let y = spline_eval(&c, &kv, seed_input::<f64>(4.0, true)).unwrap();
        assert_eq!(y.values(), (0.0, 0.0, 0.0));
    }

    #[test]
    fn hat_function_slope() {
        let kv = KnotVector {
            knots: vec![0.0, 1.0, 2.0],
            grid: 1,
            order: 1,
            lo: 1.0,
            hi: 2.0,
            pieces: cardinal_pieces(1),
        };
        assert_eq!(kv.basis_derivative(0.5, 1).unwrap(), vec![1.0]);
    }

    #[test]
    fn derivative_order_above_k_rejected() {
        let kv = make_grid(3, 1, -1.0, 1.0).unwrap();
        assert!(kv.basis_derivative(0.0, 2).is_err());
    }

    #[test]
    fn cardinal_pieces_match_span_tables() {
        for (g, k) in [(3, 3), (5, 3), (1, 0), (4, 2), (2, 1), (3, 5), (6, 4)] {
            let kv = make_grid(g, k, -1.0, 1.0).unwrap();
            let (a, b) = (kv.knots()[0], *kv.knots().last().unwrap());
            for s in 0..=200 {
                let x = a + (b - a) * s as f64 / 201.0;
                let fast = kv.locate(x).unwrap();
                let table = kv.basis_in_span(x, kv.span(x).unwrap());
                assert_eq!(fast.entries().len(), table.entries().len());
                for ((i, d), (j, e)) in fast.entries().iter().zip(table.entries()) {
                    assert_eq!(i, j);
                    for m in 0..=MAX_DERIV {
                        let scale = kv.step().powi(-(m as i32));
                        assert!(close(d[m], e[m], 1e-11 * scale), "G={g} k={k} x={x} m={m}");
                    }
                }
            }
        }
    }

    #[test]
    fn local_route_matches_full_recursion() {
        for (g, k) in [(3, 3), (5, 3), (1, 0), (4, 2), (2, 1), (3, 5)] {
            let kv = make_grid(g, k, -1.0, 1.0).unwrap();
            let (a, b) = (kv.knots()[0], *kv.knots().last().unwrap());
            for s in 0..97 {
                let x = a + (b - a) * (s as f64 + 0.37) / 97.0;
                let local = kv.locate(x).unwrap();
                for m in 0..=k.min(2) {
                    let full = kv.basis_derivative(x, m).unwrap();
                    let mut dense = vec![0.0; kv.num_basis()];
                    for (j, d) in local.entries() {
                        dense[*j] = d[m];
                    }
                    for (u, v) in full.iter().zip(&dense) {
                        assert!(close(*u, *v, 1e-10), "G={g} k={k} m={m} x={x}: {u} vs {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn cubic_derivatives_match_finite_differences() {
        let kv = make_grid(3, 3, -1.0, 1.0).unwrap();
        let h = 1e-6;
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..50 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = -1.0 + 2.0 * (state >> 11) as f64 / (1u64 << 53) as f64;
            let d1 = kv.basis_derivative(x, 1).unwrap();
            let d2 = kv.basis_derivative(x, 2).unwrap();
            let (p, m) = (kv.basis_all(x + h), kv.basis_all(x - h));
            let (dp, dm) = (
                kv.basis_derivative(x + h, 1).unwrap(),
                kv.basis_derivative(x - h, 1).unwrap(),
            );
            for i in 0..kv.num_basis() {
                let fd1 = (p[i] - m[i]) / (2.0 * h);
                let fd2 = (dp[i] - dm[i]) / (2.0 * h);
                assert!((fd1 - d1[i]).abs() <= 1e-6 * d1[i].abs().max(1.0));
                assert!((fd2 - d2[i]).abs() <= 1e-6 * d2[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn spline_eval_examples() {
        let kv = make_grid(3, 3, -1.0, 1.0).unwrap();
        let ones = vec![1.0; 6];
        let y = spline_eval(&ones, &kv, seed_input::<f64>(0.3, true)).unwrap();
        assert!(close(y.v, 1.0, 1e-12) && y.d1.abs() < 1e-12 && y.d2.abs() < 1e-12);

        let x = 0.41;
        let basis = kv.basis_all(x);
        for j in 0..6 {
            let mut c = vec![0.0; 6];
            c[j] = 1.0;
            let y = spline_eval(&c, &kv, seed_input::<f64>(x, true)).unwrap();
            assert!(close(y.v, basis[j], 1e-14));
        }
        assert!(spline_eval(&[1.0; 5], &kv, seed_input::<f64>(x, true)).is_err());
    }

    #[test]
    fn spline_jet_matches_finite_differences() {
        let kv = make_grid(3, 3, -1.0, 1.0).unwrap();
        let c = [0.3, -1.2, 0.8, 0.05, -0.6, 1.4];
        let f = |x: f64| spline_eval(&c, &kv, Jet2::constant(x)).unwrap().v;
        let h = 1e-4;
        for &x in &[-0.93, -0.5, 0.01, 0.3, 0.77] {
            let y = spline_eval(&c, &kv, seed_input::<f64>(x, true)).unwrap();
            let fd1 = (f(x + h) - f(x - h)) / (2.0 * h);
            let fd2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            assert!((fd1 - y.d1).abs() < 1e-6 * y.d1.abs().max(1.0));
            assert!((fd2 - y.d2).abs() < 1e-5 * y.d2.abs().max(1.0));
        }
    }
}
