//! Panelised adaptive Gauss–Legendre quadrature for complex integrands on
//! finite intervals.

use std::cell::Cell;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Tuning knobs for [`Integrator`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadSpec<T> {
    /// Gauss–Legendre order per panel.
    pub order: usize,
    /// Absolute error target for one call of [`Integrator::integrate`].
    pub tol: T,
    /// Maximum bisection depth of a single panel.
    pub max_depth: usize,
    /// Minimum number of uniform panels per interval between breakpoints.
    pub min_panels: usize,
    /// Cap on bisections per call.
    pub max_subdivisions: usize,
}

impl<T: Real> Default for QuadSpec<T> {
    fn default() -> Self {
        Self {
            order: 32,
            tol: T::lit(1e-12),
            max_depth: 40,
            min_panels: 8,
            max_subdivisions: 200_000,
        }
    }
}

impl<T: Real> QuadSpec<T> {
    pub fn with_tol(tol: T) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 2 || self.order > 256 {
            return Err(Error::InvalidParameter(format!(
                "quadrature order {} outside 2..=256",
                self.order
            )));
        }
        let tol = self.tol.to_f64().unwrap_or(f64::NAN);
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::InvalidParameter(format!("quadrature tolerance {tol} must be positive")));
        }
        if self.min_panels == 0 {
            return Err(Error::InvalidParameter("min_panels must be positive".into()));
        }
        Ok(())
    }
}

/// Nodes and weights of the Gauss–Legendre rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Newton iteration on P_n seeded by the Chebyshev-like asymptotic guess.
    /// The iteration always runs in `f64` and is rounded to `T` at the end.
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, 0.0);
                for j in 0..n {
                    let p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
                }
                dp = nf * (z * p0 - p1) / (z * z - 1.0);
                let dz = p0 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = T::lit(-z);
            nodes[n - 1 - i] = T::lit(z);
            weights[i] = T::lit(w);
            weights[n - 1 - i] = T::lit(w);
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Fixed rule on [a, b]; returns the integral and the integral of |f|.
    pub fn apply<F>(&self, f: &F, a: T, b: T) -> (C<T>, T)
    where
        F: Fn(T) -> C<T> + ?Sized,
    {
        let half = (b - a) * T::half();
        let mid = (a + b) * T::half();
        let mut acc = C::<T>::zero();
        let mut abs = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * *x);
            acc = acc + v * *w;
            abs = abs + v.norm() * *w;
        }
        (acc * half, abs * half.abs())
    }
}

/// Reusable integrator bundling a rule with its [`QuadSpec`].
#[derive(Clone, Debug)]
pub struct Integrator<T> {
    spec: QuadSpec<T>,
    rule: GaussLegendre<T>,
}

struct Leaf<T> {
    value: C<T>,
    unresolved: T,
}

impl<T: Real> Integrator<T> {
    pub fn new(spec: QuadSpec<T>) -> Result<Self> {
        spec.validate()?;
        Ok(Self { rule: GaussLegendre::new(spec.order), spec })
    }

    pub fn spec(&self) -> &QuadSpec<T> {
        &self.spec
    }

    pub fn rule(&self) -> &GaussLegendre<T> {
        &self.rule
    }

    /// Integrates over the consecutive intervals defined by `edges`, which
    /// must be sorted ascending. Each interval is refined adaptively.
    pub fn integrate<F>(&self, f: &F, edges: &[T]) -> Result<C<T>>
    where
        F: Fn(T) -> C<T> + ?Sized,
    {
        if edges.len() < 2 {
            return Ok(C::zero());
        }
        let total = (edges[edges.len() - 1] - edges[0]).abs();
        let mut sum = C::<T>::zero();
        let mut unresolved = T::zero();
        let budget = Cell::new(self.spec.max_subdivisions);
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let local = self.spec.tol * (b - a) / total;
            let leaf = self.adapt(f, a, b, self.rule.apply(f, a, b), local, 0, &budget);
            sum = sum + leaf.value;
            unresolved = unresolved + leaf.unresolved;
        }
        if unresolved > self.spec.tol {
            return Err(Error::QuadratureFailed {
                achieved: unresolved.to_f64().unwrap_or(f64::NAN),
                requested: self.spec.tol.to_f64().unwrap_or(f64::NAN),
                lo: edges[0].to_f64().unwrap_or(f64::NAN),
                hi: edges[edges.len() - 1].to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(sum)
    }

    /// Real-valued convenience wrapper.
    pub fn integrate_real<F>(&self, f: &F, edges: &[T]) -> Result<T>
    where
        F: Fn(T) -> T + ?Sized,
    {
        let g = |x: T| Complex::new(f(x), T::zero());
        self.integrate(&g, edges).map(|z| z.re)
    }

    fn adapt<F>(&self, f: &F, a: T, b: T, whole: (C<T>, T), tol: T, depth: usize, budget: &Cell<usize>) -> Leaf<T>
    where
        F: Fn(T) -> C<T> + ?Sized,
    {
        let mid = (a + b) * T::half();
        let left = self.rule.apply(f, a, mid);
        let right = self.rule.apply(f, mid, b);
        let value = left.0 + right.0;
        let diff = (value - whole.0).norm();
        let floor = T::lit(64.0) * T::epsilon() * (left.1 + right.1);
        if diff <= tol.max(floor) {
            return Leaf { value, unresolved: T::zero() };
        }
        if depth >= self.spec.max_depth || mid <= a || mid >= b || budget.get() == 0 {
            return Leaf { value, unresolved: diff };
        }
        budget.set(budget.get() - 1);
        let half = tol * T::half();
        let l = self.adapt(f, a, mid, left, half, depth + 1, budget);
        let r = self.adapt(f, mid, b, right, half, depth + 1, budget);
        Leaf { value: l.value + r.value, unresolved: l.unresolved + r.unresolved }
    }
}

/// Panel edges for [a, b]: `uniform` equal panels, refined geometrically
/// toward an endpoint whose feature scale is given.
pub fn graded_edges<T: Real>(a: T, b: T, uniform: usize, grade_lo: Option<T>, grade_hi: Option<T>) -> Vec<T> {
    let n = uniform.max(1);
    let h = (b - a) / T::from_int(n as i64);
    let mut edges: Vec<T> = (0..=n).map(|i| a + h * T::from_int(i as i64)).collect();
    edges[n] = b;
    let two = T::two();
    let mut extra = Vec::new();
    if let Some(s) = grade_lo {
        let mut d = s.max(T::epsilon() * (b - a));
        while d < h {
            extra.push(a + d);
            d = d * two;
        }
    }
    if let Some(s) = grade_hi {
        let mut d = s.max(T::epsilon() * (b - a));
        while d < h {
            extra.push(b - d);
            d = d * two;
        }
    }
    if !extra.is_empty() {
        edges.extend(extra);
        edges.sort_by(|x, y| x.partial_cmp(y).expect("finite panel edges"));
        edges.dedup_by(|x, y| (*x - *y).abs() <= T::epsilon() * (b - a));
    }
    edges
}

/// Concatenates graded edges over consecutive breakpoints, grading both sides
/// of every breakpoint by `scale` when given.
pub fn breakpoint_edges<T: Real>(breaks: &[T], uniform: usize, scale: Option<T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for w in breaks.windows(2) {
        let e = graded_edges(w[0], w[1], uniform, scale, scale);
        if out.is_empty() {
            out.extend(e);
        } else {
            out.extend(e.into_iter().skip(1));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [2, 5, 16, 32, 64] {
            let r = GaussLegendre::<f64>::new(n);
            let s: f64 = r.weights.iter().sum();
            assert_abs_diff_eq!(s, 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let r = GaussLegendre::<f64>::new(8);
        for p in 0..16 {
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            let got: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(p)).sum();
            assert_abs_diff_eq!(got, exact, epsilon = 1e-14);
        }
    }

    #[test]
    fn adaptive_resolves_narrow_lorentzian() {
        let q = Integrator::new(QuadSpec::<f64>::default()).unwrap();
        let eps = 1e-5;
        let f = |x: f64| Complex::new(eps / (x * x + eps * eps), 0.0);
        let edges = graded_edges(0.0, 1.0, 8, Some(eps), None);
        let got = q.integrate(&f, &edges).unwrap().re;
        assert_abs_diff_eq!(got, (1.0 / eps).atan(), epsilon = 1e-11);
    }

    #[test]
    fn oscillatory_coefficient() {
        let q = Integrator::new(QuadSpec::<f64>::default()).unwrap();
        let f = |k: f64| Complex::new((37.0 * k).cos().powi(2), 0.0);
        let edges = breakpoint_edges(&[-PI, 0.0, PI], 8, None);
        let got = q.integrate(&f, &edges).unwrap();
        assert_abs_diff_eq!(got.re, PI, epsilon = 1e-12);
    }

    #[test]
    fn failure_reports_estimate() {
        let spec = QuadSpec { max_depth: 2, ..QuadSpec::<f64>::default() };
        let q = Integrator::new(spec).unwrap();
        let f = |x: f64| Complex::new(1.0 / x.abs().sqrt(), 0.0);
        match q.integrate(&f, &[-1.0, 1.0]) {
            Err(Error::QuadratureFailed { achieved, .. }) => assert!(achieved > 0.0),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn noisy_integrand_terminates() {
        let spec = QuadSpec { max_subdivisions: 1000, ..QuadSpec::<f64>::default() };
        let q = Integrator::new(spec).unwrap();
        let f = |x: f64| Complex::new((1.0 / x).sin() / x, 0.0);
        assert!(q.integrate(&f, &[-1.0, 1.0]).is_err());
    }

    #[test]
    fn rejects_bad_spec() {
        assert!(QuadSpec::<f64>::with_tol(0.0).validate().is_err());
        assert!(QuadSpec::<f64> { order: 1, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn f32_smoke() {
        let q = Integrator::new(QuadSpec::<f32>::with_tol(1e-5)).unwrap();
        let got = q.integrate_real(&|x: f32| x.cos(), &[0.0, 1.0]).unwrap();
        assert!((got - 1f32.sin()).abs() < 1e-5);
    }
}
