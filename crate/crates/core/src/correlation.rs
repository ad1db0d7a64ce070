//! Reduced correlation matrix Θ_n of the steady state and the emptiness
//! formation probability P(n) = det Θ_n.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{ness_density, toeplitz_symbol, ChainParams, Pm};
use crate::pfaffian::{logdet, LogScaled, SkewMatrix};
use crate::quadrature::{Integrator, QuadSpec};
use crate::scalar::{Real, C};
use crate::scattering::wave_action;
use crate::spectral::{circle_edges, half_line_overlap, BoundState};
use crate::szego::{hankel_from_table, hankel_symbol, toeplitz_from_table, FourierTable, HankelMode};

/// Largest tolerated |arg P(n)|.
pub const PHASE_TOL: f64 = 1e-8;

/// Everything the steady-state formulas need, computed once per parameter set.
#[derive(Clone, Debug)]
pub struct NessModel<T> {
    params: ChainParams<T>,
    bound: BoundState<T>,
    overlap_minus: T,
    overlap_plus: T,
    quad: Integrator<T>,
}

impl<T: Real> NessModel<T> {
    pub fn new(params: ChainParams<T>, spec: QuadSpec<T>) -> Result<Self> {
        let quad = Integrator::new(spec)?;
        let bound = BoundState::new(params.kappa)?;
        let overlap_minus = half_line_overlap(&params, Pm::Minus, &quad)?;
        let overlap_plus = half_line_overlap(&params, Pm::Plus, &quad)?;
        Ok(Self { params, bound, overlap_minus, overlap_plus, quad })
    }

    pub fn params(&self) -> &ChainParams<T> {
        &self.params
    }

    pub fn bound_state(&self) -> &BoundState<T> {
        &self.bound
    }

    pub fn integrator(&self) -> &Integrator<T> {
        &self.quad
    }

    /// (f_B, s_{0,±} f_B).
    pub fn overlap(&self, sign: Pm) -> T {
        match sign {
            Pm::Minus => self.overlap_minus,
            Pm::Plus => self.overlap_plus,
        }
    }

    /// Same model with the string moved to start at `x0`.
    pub fn with_x0(&self, x0: i64) -> Self {
        Self { params: self.params.with_x0(x0), ..self.clone() }
    }

    fn site(&self, i: usize) -> i64 {
        i as i64 + self.params.x0 - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Direct,
    Structured(HankelMode),
    Oracle,
}

/// How Θ_n is assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssemblyPath {
    Direct,
    Structured(HankelMode),
}

#[derive(Clone, Debug)]
pub struct ReducedCorrelation<T> {
    pub matrix: Matrix<C<T>>,
    pub provenance: Provenance,
}

impl<T: Real> ReducedCorrelation<T> {
    pub fn order(&self) -> usize {
        self.matrix.rows()
    }

    pub fn determinant(&self) -> Result<LogScaled<T>> {
        logdet(&self.matrix)
    }
}

/// (1/2π)∫ conj(ŵ_σ e_x) ŝ_σ ŵ_σ e_y dk + f_B(x) f_B(y) (f_B, s_{0,σ} f_B).
fn omega<T: Real>(model: &NessModel<T>, x: i64, y: i64, sign: Pm) -> Result<C<T>> {
    let bs = &model.bound;
    let p = &model.params;
    let f = |k: T| wave_action(k, x, sign, bs).conj() * ness_density(p, k, sign) * wave_action(k, y, sign, bs);
    let freq = (x.unsigned_abs() + y.unsigned_abs()) as usize;
    let edges = circle_edges(p.kappa, freq, model.quad.spec().min_panels);
    let ac = model.quad.integrate(&f, &edges)? / (T::two() * T::PI());
    let pp = bs.eigenfunction(x) * bs.eigenfunction(y) * model.overlap(sign);
    Ok(ac + C::new(pp, T::zero()))
}

/// θ_ij from the wave-operator representation; indices start at 1.
pub fn theta_entry_direct<T: Real>(model: &NessModel<T>, i: usize, j: usize) -> Result<C<T>> {
    if i == 0 || j == 0 {
        return Err(Error::InvalidParameter("correlation indices start at 1".into()));
    }
    let (xi, xj) = (model.site(i), model.site(j));
    let r = if i <= j { omega(model, xi, xj, Pm::Minus) } else { omega(model, xj, xi, Pm::Plus).map(|c| -c) };
    r.map_err(|e| Error::Entry { i, j, source: Box::new(e) })
}

fn direct_matrix<T: Real>(model: &NessModel<T>, n: usize, skip: impl Fn(usize, usize) -> bool + Sync) -> Result<Matrix<C<T>>> {
    let entries: Vec<C<T>> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n + 1, idx % n + 1);
            if skip(i, j) {
                Ok(C::new(T::zero(), T::zero()))
            } else {
                theta_entry_direct(model, i, j)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Matrix::from_vec(n, n, entries))
}

pub fn assemble_theta<T: Real>(model: &NessModel<T>, n: usize) -> Result<ReducedCorrelation<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    Ok(ReducedCorrelation { matrix: direct_matrix(model, n, |_, _| false)?, provenance: Provenance::Direct })
}

fn toeplitz_hankel_block<T: Real>(model: &NessModel<T>, m: usize, mode: HankelMode, shift: i64) -> Result<Matrix<C<T>>> {
    let a = toeplitz_symbol(&model.params);
    let mut b = hankel_symbol(&model.params, mode, model.overlap(Pm::Minus))?;
    if shift != 0 {
        b = b.shifted(shift);
    }
    let mm = m as i64;
    let ta = FourierTable::new(&a, -(mm - 1), mm - 1, &model.quad)?;
    let tb = FourierTable::new(&b, 1, 2 * mm - 1, &model.quad)?;
    let t = toeplitz_from_table(&ta, m);
    let h = hankel_from_table(&tb, m);
    Ok(Matrix::from_fn(m, m, |i, j| t[(i, j)] + h[(i, j)]))
}

/// Θ_n = T_n[a] + H_n[b] for x0 ≥ 0. For x0 = −n0 < 0 the trailing
/// (n − n0) block is T[a] + H[e_{−2n0} b] and the leading n0 rows and
/// columns come from [`theta_entry_direct`].
pub fn assemble_theta_structured<T: Real>(model: &NessModel<T>, n: usize, mode: HankelMode) -> Result<ReducedCorrelation<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let x0 = model.params.x0;
    let matrix = if x0 >= 0 {
        toeplitz_hankel_block(model, n, mode, 0)?
    } else {
        let n0 = x0.unsigned_abs() as usize;
        if n <= n0 {
            return Err(Error::InvalidParameter(format!("need n > {n0} for x0 = {x0}")));
        }
        let block = toeplitz_hankel_block(model, n - n0, mode, -2 * n0 as i64)?;
        let mut m = direct_matrix(model, n, |i, j| i > n0 && j > n0)?;
        for i in 0..n - n0 {
            for j in 0..n - n0 {
                m[(n0 + i, n0 + j)] = block[(i, j)];
            }
        }
        m
    };
    Ok(ReducedCorrelation { matrix, provenance: Provenance::Structured(mode) })
}

/// Direct Θ_n minus the embedded Toeplitz-plus-Hankel block for x0 < 0.
pub fn structured_remainder<T: Real>(model: &NessModel<T>, n: usize, mode: HankelMode) -> Result<Matrix<C<T>>> {
    let x0 = model.params.x0;
    if x0 >= 0 {
        return Err(Error::InvalidParameter("the remainder is defined for x0 < 0".into()));
    }
    let n0 = x0.unsigned_abs() as usize;
    if n <= n0 {
        return Err(Error::InvalidParameter(format!("need n > {n0} for x0 = {x0}")));
    }
    let mut d = assemble_theta(model, n)?.matrix;
    let block = toeplitz_hankel_block(model, n - n0, mode, -2 * n0 as i64)?;
    for i in 0..n - n0 {
        for j in 0..n - n0 {
            d[(n0 + i, n0 + j)] = d[(n0 + i, n0 + j)] - block[(i, j)];
        }
    }
    Ok(d)
}

pub fn assemble_path<T: Real>(model: &NessModel<T>, n: usize, path: AssemblyPath) -> Result<ReducedCorrelation<T>> {
    match path {
        AssemblyPath::Direct => assemble_theta(model, n),
        AssemblyPath::Structured(mode) => assemble_theta_structured(model, n, mode),
    }
}

fn checked<T: Real>(det: LogScaled<T>) -> Result<LogScaled<T>> {
    let dev = det.arg().abs();
    if det.is_zero() || dev.to_f64().unwrap_or(f64::INFINITY) > PHASE_TOL {
        return Err(Error::PhaseCheck { deviation: dev.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(det)
}

/// P(n) = det Θ_n in log-scaled form, with the phase verified.
pub fn efp<T: Real>(model: &NessModel<T>, n: usize) -> Result<LogScaled<T>> {
    checked(assemble_theta(model, n)?.determinant()?)
}

/// P(1), …, P(n_max) from the leading minors of a single Θ_{n_max}.
pub fn efp_profile<T: Real>(model: &NessModel<T>, n_max: usize, path: AssemblyPath) -> Result<Vec<LogScaled<T>>> {
    let theta = assemble_path(model, n_max, path)?;
    minors(&theta.matrix)
}

/// Determinants of the leading principal minors, each phase-checked.
pub fn minors<T: Real>(m: &Matrix<C<T>>) -> Result<Vec<LogScaled<T>>> {
    (1..=m.rows()).into_par_iter().map(|k| checked(logdet(&m.leading(k))?)).collect()
}

/// 2n × 2n skew correlation matrix with Ω_{2i−1,2j} = b_ij (i ≤ j),
/// Ω_{2i,2j−1} = c_ij (i < j) and zeros on the (odd, odd) and (even, even)
/// positions, rebuilt from Θ_n via b_ij = θ_ij and c_ij = −θ_ji.
pub fn full_skew_from_theta<T: Real>(theta: &Matrix<C<T>>) -> Result<SkewMatrix<T>> {
    let n = theta.rows();
    SkewMatrix::from_upper(2 * n, |r, c| {
        let (i, j) = (r / 2, c / 2);
        match (r % 2, c % 2) {
            (0, 1) if i <= j => theta[(i, j)],
            (1, 0) if i < j => -theta[(j, i)],
            _ => C::new(T::zero(), T::zero()),
        }
    })
}

pub fn assemble_full_skew<T: Real>(model: &NessModel<T>, n: usize) -> Result<SkewMatrix<T>> {
    full_skew_from_theta(&assemble_theta(model, n)?.matrix)
}
