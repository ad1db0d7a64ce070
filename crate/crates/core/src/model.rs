//! Physical parameters and closed-form functions of momentum.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{sign0, Real, C};

/// Reservoir side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Sign label carried by densities, wave operator branches and overlaps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pm {
    Plus,
    Minus,
}

impl Pm {
    pub fn value<T: Real>(self) -> T {
        match self {
            Pm::Plus => T::one(),
            Pm::Minus => -T::one(),
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Pm::Plus => Pm::Minus,
            Pm::Minus => Pm::Plus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainParams<T> {
    pub beta_left: T,
    pub beta_right: T,
    pub kappa: T,
    pub x0: i64,
    pub sample_radius: usize,
    /// Set for the β_L = β_R = 0 test configuration.
    pub infinite_temperature: bool,
}

impl<T: Real> ChainParams<T> {
    pub fn new(beta_left: T, beta_right: T, kappa: T, x0: i64, sample_radius: usize) -> Result<Self> {
        if !(kappa > T::zero()) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa = {kappa} must be positive and finite")));
        }
        if !beta_left.is_finite() || !beta_right.is_finite() {
            return Err(Error::InvalidParameter("inverse temperatures must be finite".into()));
        }
        let infinite_temperature = beta_left == T::zero() && beta_right == T::zero();
        if !infinite_temperature && !(beta_left > T::zero() && beta_left <= beta_right) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < beta_left <= beta_right, got beta_left = {beta_left}, beta_right = {beta_right}"
            )));
        }
        Ok(Self { beta_left, beta_right, kappa, x0, sample_radius, infinite_temperature })
    }

    pub fn infinite_temperature(kappa: T, x0: i64, sample_radius: usize) -> Result<Self> {
        Self::new(T::zero(), T::zero(), kappa, x0, sample_radius)
    }

    pub fn beta(&self, side: Side) -> T {
        match side {
            Side::Left => self.beta_left,
            Side::Right => self.beta_right,
        }
    }

    pub fn beta_bar(&self) -> T {
        (self.beta_right + self.beta_left) * T::half()
    }

    pub fn delta(&self) -> T {
        (self.beta_right - self.beta_left) * T::half()
    }

    /// Errors for the infinite-temperature test configuration.
    pub fn require_physical(&self) -> Result<()> {
        if self.infinite_temperature {
            return Err(Error::InvalidParameter("infinite-temperature configuration is test-only".into()));
        }
        Ok(())
    }

    pub fn with_kappa(&self, kappa: T) -> Result<Self> {
        Self::new(self.beta_left, self.beta_right, kappa, self.x0, self.sample_radius)
    }

    pub fn with_x0(&self, x0: i64) -> Self {
        Self { x0, ..*self }
    }
}

/// Reservoir occupation ½(1 ± tanh(½ β_α cos k)).
pub fn fermi_side<T: Real>(k: T, beta: T, sign: Pm) -> T {
    let t = (T::half() * beta * k.cos()).tanh();
    T::half() * (T::one() + sign.value::<T>() * t)
}

/// Occupation of side `side` of `params`.
pub fn fermi<T: Real>(params: &ChainParams<T>, k: T, side: Side, sign: Pm) -> T {
    fermi_side(k, params.beta(side), sign)
}

/// sign(sin k) on (−π, π], exactly zero at k ∈ {0, ±π}.
pub fn sin_sign<T: Real>(k: T) -> T {
    let pi = T::PI();
    if k == pi || k == -pi {
        T::zero()
    } else {
        sign0(wrap(k))
    }
}

/// ρ_±(k) = tanh(½(β̄ ± sign(sin k) δ) cos k), with sign(0) = 0.
pub fn rho<T: Real>(params: &ChainParams<T>, k: T, sign: Pm) -> T {
    rho_with(params, k, sign, sin_sign(k))
}

/// ρ_± with an explicit value for sign(sin k).
pub fn rho_with<T: Real>(params: &ChainParams<T>, k: T, sign: Pm, sin_sign: T) -> T {
    let s = sin_sign * sign.value::<T>();
    (T::half() * (params.beta_bar() + s * params.delta()) * k.cos()).tanh()
}

/// Momentum-space steady-state density ŝ_±(k) = ½(1 ∓ ρ_±(k)).
///
/// For 0 < k < π the hole density ŝ_− is the left reservoir's ½(1 + tanh(½β_L cos k)).
pub fn ness_density<T: Real>(params: &ChainParams<T>, k: T, sign: Pm) -> T {
    T::half() * (T::one() - sign.value::<T>() * rho(params, k, sign))
}

/// σ_B(k) = sin²k / (sin²k + κ²).
pub fn sigma_b<T: Real>(k: T, kappa: T) -> T {
    let s2 = k.sin().powi(2);
    s2 / (s2 + kappa * kappa)
}

/// φ_B(k) = σ_B(k) on [0, π], zero on (−π, 0).
pub fn phi_b<T: Real>(k: T, kappa: T) -> T {
    if k >= T::zero() {
        sigma_b(k, kappa)
    } else {
        T::zero()
    }
}

/// Pair (σ_B(k), φ_B(k)).
pub fn transmission<T: Real>(k: T, kappa: T) -> (T, T) {
    (sigma_b(k, kappa), phi_b(k, kappa))
}

/// Maps any real momentum into (−π, π].
pub fn wrap<T: Real>(k: T) -> T {
    let pi = T::PI();
    let tau = pi + pi;
    let mut r = k - tau * ((k + pi) / tau).floor();
    if r <= -pi {
        r = r + tau;
    }
    if r > pi {
        r = r - tau;
    }
    r
}

type Eval<T> = Arc<dyn Fn(T) -> C<T> + Send + Sync>;

/// Piecewise-smooth complex function on (−π, π] with declared breakpoints.
#[derive(Clone)]
pub struct ScalarSymbol<T> {
    evaluator: Eval<T>,
    breakpoints: Vec<T>,
    feature_scale: Option<T>,
}

impl<T: Real> fmt::Debug for ScalarSymbol<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarSymbol")
            .field("breakpoints", &self.breakpoints)
            .field("feature_scale", &self.feature_scale)
            .finish_non_exhaustive()
    }
}

impl<T: Real> ScalarSymbol<T> {
    /// Builds a symbol; `−π`, `0` and `π` are always added to the breakpoints.
    /// `feature_scale` is the width of sharp features sitting on breakpoints.
    pub fn new<F>(f: F, breakpoints: &[T], feature_scale: Option<T>) -> Self
    where
        F: Fn(T) -> C<T> + Send + Sync + 'static,
    {
        let pi = T::PI();
        let mut b: Vec<T> = breakpoints.iter().copied().filter(|x| *x > -pi && *x < pi).collect();
        b.extend([-pi, T::zero(), pi]);
        b.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
        b.dedup();
        Self { evaluator: Arc::new(f), breakpoints: b, feature_scale }
    }

    pub fn real<F>(f: F, breakpoints: &[T], feature_scale: Option<T>) -> Self
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        Self::new(move |k| Complex::new(f(k), T::zero()), breakpoints, feature_scale)
    }

    pub fn constant(c: C<T>) -> Self {
        Self::new(move |_| c, &[], None)
    }

    /// Evaluates at `k`, wrapped into (−π, π].
    pub fn eval(&self, k: T) -> C<T> {
        let pi = T::PI();
        let k = if k >= -pi && k <= pi { k } else { wrap(k) };
        (self.evaluator)(k)
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn feature_scale(&self) -> Option<T> {
        self.feature_scale
    }

    /// Pointwise product with another symbol.
    pub fn times(&self, other: &Self) -> Self {
        let (f, g) = (self.evaluator.clone(), other.evaluator.clone());
        let mut b = self.breakpoints.clone();
        b.extend_from_slice(&other.breakpoints);
        let scale = match (self.feature_scale, other.feature_scale) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Self::new(move |k| f(k) * g(k), &b, scale)
    }

    /// Multiplies by e^{i m k}.
    pub fn shifted(&self, m: i64) -> Self {
        let f = self.evaluator.clone();
        let mf = T::from_int(m);
        Self::new(move |k| f(k) * crate::scalar::cis(mf * k), &self.breakpoints, self.feature_scale)
    }
}

/// Toeplitz symbol a = φ_B ŝ_{+,L} + (1 − φ_B) ŝ_{+,R} of the steady state.
pub fn toeplitz_value<T: Real>(params: &ChainParams<T>, k: T) -> T {
    let right = fermi(params, k, Side::Right, Pm::Plus);
    if k >= T::zero() {
        let s = sigma_b(k, params.kappa);
        s * fermi(params, k, Side::Left, Pm::Plus) + (T::one() - s) * right
    } else {
        right
    }
}

pub fn toeplitz_symbol<T: Real>(params: &ChainParams<T>) -> ScalarSymbol<T> {
    let p = *params;
    ScalarSymbol::real(move |k| toeplitz_value(&p, k), &[], Some(p.kappa))
}

/// One-sided derivative a′(k ± 0); `from_right` selects k + 0. At ±π the
/// right limit is taken on the (−π, 0) branch.
pub fn toeplitz_derivative<T: Real>(params: &ChainParams<T>, k: T, from_right: bool) -> T {
    let pi = T::PI();
    let upper = if k == T::zero() {
        from_right
    } else if k == pi || k == -pi {
        !from_right
    } else {
        wrap(k) > T::zero()
    };
    let k = wrap(k);
    let ds = |beta: T| -> T {
        let c = (T::half() * beta * k.cos()).cosh();
        -beta * k.sin() / (T::lit(4.0) * c * c)
    };
    let (bl, br, kap) = (params.beta_left, params.beta_right, params.kappa);
    if !upper {
        return ds(br);
    }
    let (s, c) = (k.sin(), k.cos());
    let den = s * s + kap * kap;
    let sigma = s * s / den;
    let dsigma = T::two() * s * c * kap * kap / (den * den);
    let (fl, fr) = (fermi_side(k, bl, Pm::Plus), fermi_side(k, br, Pm::Plus));
    dsigma * (fl - fr) + sigma * ds(bl) + (T::one() - sigma) * ds(br)
}
