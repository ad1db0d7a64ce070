//! Bound state of the impurity Hamiltonian and its overlap with the initial
//! density.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigen;
use crate::model::{ChainParams, Pm};
use crate::quadrature::{graded_edges, Integrator};
use crate::scalar::{Real, C};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundState<T> {
    pub kappa: T,
    pub e_b: T,
    pub lambda_b: T,
    pub n_b: T,
}

impl<T: Real> BoundState<T> {
    pub fn new(kappa: T) -> Result<Self> {
        if !(kappa > T::zero()) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("bound state needs kappa > 0, got {kappa}")));
        }
        let e_b = (T::one() + kappa * kappa).sqrt();
        let lambda_b = kappa.asinh();
        let n_b = (e_b / kappa).sqrt();
        Ok(Self { kappa, e_b, lambda_b, n_b })
    }

    /// f_B(x) = e^{−λ_B |x|} / n_B.
    pub fn eigenfunction(&self, x: i64) -> T {
        (-self.lambda_b * T::from_int(x.abs())).exp() / self.n_b
    }

    /// f̂_B(k) = κ / (n_B (e_B − cos k)).
    pub fn eigenfunction_hat(&self, k: T) -> T {
        self.kappa / (self.n_b * (self.e_b - k.cos()))
    }

    /// Quadrature value of i e_B (1/2π)∫ e^{−ikx} / (sin k + iκ) dk.
    pub fn exp_fourier_identity(&self, x: u64, quad: &Integrator<T>) -> Result<C<T>> {
        let xf = T::from_int(x as i64);
        let kap = self.kappa;
        let f = |k: T| crate::scalar::cis(-k * xf) / Complex::new(k.sin(), kap);
        let edges = circle_edges(kap, x as usize, quad.spec().min_panels);
        let v = quad.integrate(&f, &edges)?;
        Ok(Complex::new(T::zero(), self.e_b) * v / (T::two() * T::PI()))
    }
}

/// Panel edges on (−π, π] with breakpoints at −π, 0, π, graded by `scale`
/// toward each breakpoint and subdivided for oscillation frequency `freq`.
pub fn circle_edges<T: Real>(scale: T, freq: usize, min_panels: usize) -> Vec<T> {
    let pi = T::PI();
    let n = min_panels.max(freq.div_ceil(4));
    let s = if scale < T::one() { Some(scale) } else { None };
    let mut e = graded_edges(-pi, T::zero(), n, s, s);
    e.extend(graded_edges(T::zero(), pi, n, s, s).into_iter().skip(1));
    e
}

/// Smallest admissible window for `initial_overlap` at tolerance `tol`.
pub fn overlap_window<T: Real>(params: &ChainParams<T>, tol: T) -> Result<usize> {
    let bs = BoundState::new(params.kappa)?;
    let need = (T::one() / tol).ln() / (T::two() * bs.lambda_b);
    need.ceil()
        .to_usize()
        .map(|w| w + params.sample_radius + 10)
        .ok_or_else(|| Error::InvalidParameter(format!("window for tolerance {tol} is not representable")))
}

fn fermi_weight<T: Real>(energy: T, sign: Pm) -> T {
    T::one() / (T::one() + (sign.value::<T>() * energy).exp())
}

/// (f_B, s_{0,sign} f_B) on the lattice [−window, window], with the matrix
/// function evaluated by diagonalising the reservoir blocks of k_0.
pub fn initial_overlap<T: Real>(params: &ChainParams<T>, sign: Pm, window: usize, tol: T) -> Result<T> {
    let bs = BoundState::new(params.kappa)?;
    let nr = params.sample_radius;
    if window < nr + 10 {
        return Err(Error::WindowTooSmall { window, bound: f64::INFINITY, tol: tol.to_f64().unwrap_or(f64::NAN) });
    }
    let bound = (-T::two() * bs.lambda_b * T::from_int((window - nr) as i64)).exp();
    if bound > tol {
        return Err(Error::WindowTooSmall {
            window,
            bound: bound.to_f64().unwrap_or(f64::NAN),
            tol: tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut total = T::zero();
    for x in -(nr as i64)..=(nr as i64) {
        total = total + T::half() * bs.eigenfunction(x).powi(2);
    }
    let len = window - nr;
    for (beta, orient) in [(params.beta_left, -1i64), (params.beta_right, 1i64)] {
        // block sites orient*(nr+1) ... orient*window; the overlap depends only on |x|
        let diag = vec![T::zero(); len];
        let off = vec![T::half() * beta; len.saturating_sub(1)];
        let eig = tridiagonal_eigen(&diag, &off, true);
        let z = eig.vectors.expect("vectors requested");
        let f: Vec<T> = (0..len).map(|i| bs.eigenfunction(orient * (nr + 1 + i) as i64)).collect();
        for (a, &e) in eig.values.iter().enumerate() {
            let proj: T = (0..len).map(|i| z[(i, a)] * f[i]).sum();
            total = total + fermi_weight(e, sign) * proj * proj;
        }
    }
    Ok(total)
}

/// Same overlap on the infinite lattice, from the Dirichlet sine basis of the
/// two half-line reservoirs.
pub fn half_line_overlap<T: Real>(params: &ChainParams<T>, sign: Pm, quad: &Integrator<T>) -> Result<T> {
    let bs = BoundState::new(params.kappa)?;
    let nr = params.sample_radius as i64;
    let mut total = T::zero();
    for x in -nr..=nr {
        total = total + T::half() * bs.eigenfunction(x).powi(2);
    }
    let r = (-bs.lambda_b).exp();
    let gap = -(-bs.lambda_b).exp_m1();
    let pref = (-bs.lambda_b * T::from_int(nr)).exp() / bs.n_b;
    let four = T::lit(4.0);
    let g = move |q: T| pref * r * q.sin() / (gap * gap + four * r * (q * T::half()).sin().powi(2));
    let scale = bs.lambda_b.min(T::one());
    let edges = graded_edges(T::zero(), T::PI(), quad.spec().min_panels, Some(scale), None);
    let norm = T::two() / T::PI();
    for beta in [params.beta_left, params.beta_right] {
        let f = |q: T| norm * g(q).powi(2) * fermi_weight(beta * q.cos(), sign);
        total = total + quad.integrate_real(&f, &edges)?;
    }
    Ok(total)
}
