//! Fourier coefficients, Toeplitz and Hankel sections, geometric means and
//! the exponential decay rates of the emptiness formation probability.

use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;

use crate::correlation::{efp_profile, AssemblyPath, NessModel};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{fermi_side, sigma_b, toeplitz_derivative, ChainParams, Pm, ScalarSymbol};
use crate::quadrature::{breakpoint_edges, Integrator};
use crate::scalar::{cis, Real, C};
use crate::spectral::BoundState;

/// (1/2π)∫ s(k) e^{−ikm} dk, panelised between the symbol's breakpoints.
pub fn fourier_coefficient<T: Real>(s: &ScalarSymbol<T>, m: i64, quad: &Integrator<T>) -> Result<C<T>> {
    let mf = T::from_int(m);
    let per_panel = (m.unsigned_abs() as usize).div_ceil(4);
    let uniform = quad.spec().min_panels.max(per_panel / (s.breakpoints().len() - 1).max(1));
    let scale = s.feature_scale().filter(|x| *x < T::one());
    let edges = breakpoint_edges(s.breakpoints(), uniform, scale);
    let f = |k: T| s.eval(k) * cis(-mf * k);
    Ok(quad.integrate(&f, &edges)? / (T::two() * T::PI()))
}

/// Coefficients ŝ_m for m in `lo..=hi`, computed in parallel.
#[derive(Clone, Debug)]
pub struct FourierTable<T> {
    lo: i64,
    values: Vec<C<T>>,
}

impl<T: Real> FourierTable<T> {
    pub fn new(s: &ScalarSymbol<T>, lo: i64, hi: i64, quad: &Integrator<T>) -> Result<Self> {
        let values = (lo..=hi).into_par_iter().map(|m| fourier_coefficient(s, m, quad)).collect::<Result<Vec<_>>>()?;
        Ok(Self { lo, values })
    }

    pub fn get(&self, m: i64) -> C<T> {
        self.values[(m - self.lo) as usize]
    }

    pub fn range(&self) -> (i64, i64) {
        (self.lo, self.lo + self.values.len() as i64 - 1)
    }
}

/// T_n[s]_{ij} = ŝ_{i−j}.
pub fn toeplitz_section<T: Real>(s: &ScalarSymbol<T>, n: usize, quad: &Integrator<T>) -> Result<Matrix<C<T>>> {
    let nn = n as i64;
    let tab = FourierTable::new(s, -(nn - 1), nn - 1, quad)?;
    Ok(toeplitz_from_table(&tab, n))
}

/// H_n[s]_{ij} = ŝ_{i+j−1} (indices from 1).
pub fn hankel_section<T: Real>(s: &ScalarSymbol<T>, n: usize, quad: &Integrator<T>) -> Result<Matrix<C<T>>> {
    let tab = FourierTable::new(s, 1, (2 * n as i64 - 1).max(1), quad)?;
    Ok(hankel_from_table(&tab, n))
}

pub fn toeplitz_from_table<T: Real>(tab: &FourierTable<T>, n: usize) -> Matrix<C<T>> {
    Matrix::from_fn(n, n, |i, j| tab.get(i as i64 - j as i64))
}

pub fn hankel_from_table<T: Real>(tab: &FourierTable<T>, n: usize) -> Matrix<C<T>> {
    Matrix::from_fn(n, n, |i, j| tab.get((i + j + 1) as i64))
}

/// Variant of the Hankel symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HankelMode {
    /// Bound-state overlap divided by e_B².
    A,
    /// Bound-state overlap as is.
    B,
}

impl FromStr for HankelMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Self::A),
            "B" | "b" => Ok(Self::B),
            other => Err(Error::InvalidParameter(format!("hankel mode `{other}` is neither A nor B"))),
        }
    }
}

impl std::fmt::Display for HankelMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::A => "A",
            Self::B => "B",
        })
    }
}

/// b(k) = iκ e^{−ik(2x0−1)} / (sin k + iκ) · [Q − ŝ_{+,R}(k)], with Q the
/// bound-state overlap (f_B, s_{0,−} f_B), divided by e_B² in mode A.
pub fn hankel_symbol<T: Real>(params: &ChainParams<T>, mode: HankelMode, overlap_minus: T) -> Result<ScalarSymbol<T>> {
    let bs = BoundState::new(params.kappa)?;
    let q = match mode {
        HankelMode::A => overlap_minus / (bs.e_b * bs.e_b),
        HankelMode::B => overlap_minus,
    };
    let kap = params.kappa;
    let br = params.beta_right;
    let shift = T::from_int(2 * params.x0 - 1);
    let f = move |k: T| {
        let pole = Complex::new(T::zero(), kap) / Complex::new(k.sin(), kap);
        pole * cis(-shift * k) * (q - fermi_side(k, br, Pm::Plus))
    };
    Ok(ScalarSymbol::new(f, &[], Some(kap)))
}

/// Translation-invariant symbol χ_{[0,π]} ŝ_{sign,L} + χ_{[−π,0)} ŝ_{sign,R}.
pub fn zero_coupling_symbol<T: Real>(params: &ChainParams<T>, sign: Pm) -> ScalarSymbol<T> {
    let (bl, br) = (params.beta_left, params.beta_right);
    ScalarSymbol::real(
        move |k| if k >= T::zero() { fermi_side(k, bl, sign) } else { fermi_side(k, br, sign) },
        &[],
        None,
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometricMean<T> {
    pub value: T,
    /// −log G.
    pub rate: T,
}

/// G(s) = exp((1/2π)∫ log s dk) for a real, strictly positive symbol.
pub fn geometric_mean<T: Real>(s: &ScalarSymbol<T>, quad: &Integrator<T>) -> Result<GeometricMean<T>> {
    let pi = T::PI();
    let grid = 4096;
    let mut min = T::infinity();
    for i in 0..=grid {
        let k = -pi + T::two() * pi * T::from_int(i) / T::from_int(grid);
        min = min.min(s.eval(k).re);
    }
    for &b in s.breakpoints() {
        min = min.min(s.eval(b).re);
    }
    if !(min > T::zero()) {
        return Err(Error::NonPositiveSymbol { min: min.to_f64().unwrap_or(f64::NAN) });
    }
    let log_s = ScalarSymbol::real(
        {
            let s = s.clone();
            move |k| s.eval(k).re.ln()
        },
        s.breakpoints(),
        s.feature_scale(),
    );
    let mean = fourier_coefficient(&log_s, 0, quad)?.re;
    Ok(GeometricMean { value: mean.exp(), rate: -mean })
}

/// Exponential decay rates in nats per site.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayRates<T> {
    pub gamma_l: T,
    pub gamma_r: T,
    pub gamma_b: T,
    pub gamma_total: T,
    /// Largest difference between the defining and the rewritten forms.
    pub rewrite_defect: T,
}

impl<T: Real> DecayRates<T> {
    /// 0 < Γ_L < Γ_B < Γ_R.
    pub fn strictly_ordered(&self) -> bool {
        T::zero() < self.gamma_l && self.gamma_l < self.gamma_b && self.gamma_b < self.gamma_r
    }
}

fn circle_integral<T: Real>(f: &(dyn Fn(T) -> T + Sync), breaks: &[T], scale: T, quad: &Integrator<T>) -> Result<T> {
    let s = if scale < T::one() { Some(scale) } else { None };
    let edges = breakpoint_edges(breaks, quad.spec().min_panels, s);
    Ok(quad.integrate_real(f, &edges)? / (T::two() * T::PI()))
}

pub fn decay_rates<T: Real>(params: &ChainParams<T>, quad: &Integrator<T>) -> Result<DecayRates<T>> {
    let (bl, br, kap) = (params.beta_left, params.beta_right, params.kappa);
    let pi = T::PI();
    let full = [-pi, T::zero(), pi];
    let half = [-pi * T::half(), T::zero(), pi * T::half()];
    let quarter = T::lit(0.25);

    let side = |beta: T| -> Result<(T, T)> {
        let def = circle_integral(&|k: T| fermi_side(k, beta, Pm::Minus).ln(), &full, kap, quad)?;
        let rew = circle_integral(
            &|k: T| (quarter * (T::one() - (T::half() * beta * k.cos()).tanh().powi(2))).ln(),
            &half,
            kap,
            quad,
        )?;
        Ok((-T::half() * def, -T::half() * rew))
    };
    let (gl, gl2) = side(bl)?;
    let (gr, gr2) = side(br)?;

    let mix = |k: T| {
        let s = sigma_b(k, kap);
        (s * fermi_side(k, bl, Pm::Minus) + (T::one() - s) * fermi_side(k, br, Pm::Minus)).ln()
    };
    let gb = -T::half() * circle_integral(&mix, &full, kap, quad)?;
    let mix2 = |k: T| {
        let s = sigma_b(k, kap);
        let c = T::half() * k.cos();
        let m = (T::one() - s) * (c * br).tanh() + s * (c * bl).tanh();
        (quarter * (T::one() - m * m)).ln()
    };
    let gb2 = -T::half() * circle_integral(&mix2, &half, kap, quad)?;
    let defect = (gl - gl2).abs().max((gr - gr2).abs()).max((gb - gb2).abs());
    Ok(DecayRates { gamma_l: gl, gamma_r: gr, gamma_b: gb, gamma_total: gr + gb, rewrite_defect: defect })
}

/// One-sided second derivatives of the Toeplitz symbol at 0 and π.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpDiagnostic<T> {
    pub measured_zero: T,
    pub measured_pi: T,
    pub predicted_zero: T,
    pub predicted_pi: T,
}

impl<T: Real> JumpDiagnostic<T> {
    pub fn relative_errors(&self) -> (T, T) {
        let rel = |m: T, p: T| if p == T::zero() { m.abs() } else { ((m - p) / p).abs() };
        (rel(self.measured_zero, self.predicted_zero), rel(self.measured_pi, self.predicted_pi))
    }
}

/// J = (1/κ²) sinh(½(β_R−β_L)) / (cosh(½β_R) cosh(½β_L)).
pub fn jump_magnitude<T: Real>(params: &ChainParams<T>) -> T {
    let (bl, br, kap) = (params.beta_left, params.beta_right, params.kappa);
    (T::half() * (br - bl)).sinh() / ((T::half() * br).cosh() * (T::half() * bl).cosh()) / (kap * kap)
}

/// Jumps D₊a′ − D₋a′ at 0 and π from fourth-order one-sided differences of
/// a′ with step 1e−3, next to the closed form +J at 0 and −J at π.
pub fn symbol_jump_diagnostic<T: Real>(params: &ChainParams<T>) -> JumpDiagnostic<T> {
    let h = T::lit(1e-3);
    let c = [T::lit(-25.0), T::lit(48.0), T::lit(-36.0), T::lit(16.0), T::lit(-3.0)];
    let twelve_h = T::lit(12.0) * h;
    let one_sided = |k0: T, right: bool| -> T {
        let dir = if right { T::one() } else { -T::one() };
        let mut acc = T::zero();
        for (i, ci) in c.iter().enumerate() {
            let f = if i == 0 {
                toeplitz_derivative(params, k0, right)
            } else {
                toeplitz_derivative(params, k0 + dir * h * T::from_int(i as i64), right)
            };
            acc = acc + *ci * f;
        }
        dir * acc / twelve_h
    };
    let pi = T::PI();
    let j = jump_magnitude(params);
    JumpDiagnostic {
        measured_zero: one_sided(T::zero(), true) - one_sided(T::zero(), false),
        measured_pi: one_sided(pi, true) - one_sided(pi, false),
        predicted_zero: j,
        predicted_pi: -j,
    }
}

/// Log-domain profile of P(n) / G(a)^n.
#[derive(Clone, Debug)]
pub struct AsymptoticProfile<T> {
    pub log_p: Vec<T>,
    pub log_ratio: Vec<T>,
    pub geometric_mean: GeometricMean<T>,
}

impl<T: Real> AsymptoticProfile<T> {
    /// |r_{n+1} − r_n| / |r_n| for n = 1..n_max−1, r_n = P(n)/G(a)^n.
    pub fn increments(&self) -> Vec<T> {
        self.log_ratio.windows(2).map(|w| (w[1] - w[0]).exp_m1().abs()).collect()
    }

    pub fn last_ratio(&self) -> T {
        self.log_ratio.last().map(|r| r.exp()).unwrap_or_else(T::nan)
    }

    /// Least-squares slope of −ln P(n) for n in `lo..=hi`.
    pub fn fitted_slope(&self, lo: usize, hi: usize) -> T {
        let pts: Vec<(T, T)> =
            (lo..=hi.min(self.log_p.len())).map(|n| (T::from_int(n as i64), -self.log_p[n - 1])).collect();
        linear_slope(&pts)
    }
}

pub fn linear_slope<T: Real>(pts: &[(T, T)]) -> T {
    let n = T::from_int(pts.len() as i64);
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    let sxx = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
    sxy / sxx
}

pub fn asymptotic_profile<T: Real>(model: &NessModel<T>, n_max: usize, path: AssemblyPath) -> Result<AsymptoticProfile<T>> {
    if n_max == 0 || n_max > 400 {
        return Err(Error::InvalidParameter(format!("n_max = {n_max} outside 1..=400")));
    }
    let g = geometric_mean(&crate::model::toeplitz_symbol(model.params()), model.integrator())?;
    let values = efp_profile(model, n_max, path)?;
    let log_p: Vec<T> = values.iter().map(|v| v.ln_real()).collect();
    let log_ratio = log_p.iter().enumerate().map(|(i, lp)| *lp + g.rate * T::from_int(i as i64 + 1)).collect();
    Ok(AsymptoticProfile { log_p, log_ratio, geometric_mean: g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::toeplitz_symbol;
    use crate::quadrature::QuadSpec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn quad() -> Integrator<f64> {
        Integrator::new(QuadSpec::default()).unwrap()
    }

    fn fig() -> ChainParams<f64> {
        ChainParams::new(0.5, 2.0, 0.2, 1, 0).unwrap()
    }

    #[test]
    fn coefficients_of_simple_symbols() {
        let q = quad();
        let half = ScalarSymbol::constant(Complex::new(0.5, 0.0));
        assert_abs_diff_eq!(fourier_coefficient(&half, 0, &q).unwrap().re, 0.5, epsilon = 1e-15);
        assert!(fourier_coefficient(&half, 3, &q).unwrap().norm() < 1e-15);
        let e1 = ScalarSymbol::new(|k: f64| cis(k), &[], None);
        assert!((fourier_coefficient(&e1, 1, &q).unwrap() - Complex::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn poisson_kernel_coefficient() {
        let q = quad();
        let b = BoundState::new(0.2f64).unwrap();
        let eb = b.e_b;
        let s = ScalarSymbol::real(move |k: f64| 1.0 / (eb - k.cos()), &[], None);
        let got = fourier_coefficient(&s, 3, &q).unwrap();
        assert_abs_diff_eq!(got.re, (-3.0 * b.lambda_b).exp() / 0.2, epsilon = 1e-11);
        assert!(got.im.abs() < 1e-13);
    }

    #[test]
    fn sections() {
        let q = quad();
        let c = ScalarSymbol::constant(Complex::new(0.3, 0.0));
        let t = toeplitz_section(&c, 4, &q).unwrap();
        let h = hankel_section(&c, 4, &q).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 0.3 } else { 0.0 };
                assert!((t[(i, j)] - Complex::new(want, 0.0)).norm() < 1e-15);
                assert!(h[(i, j)].norm() < 1e-15);
            }
        }
        let a = toeplitz_symbol(&fig());
        let t = toeplitz_section(&a, 4, &q).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let direct = fourier_coefficient(&a, i as i64 - j as i64, &q).unwrap();
                assert!((t[(i, j)] - direct).norm() < 1e-15);
            }
        }
        let p = ChainParams::new(1.0, 1.0, 0.2, 1, 0).unwrap();
        let t = toeplitz_section(&toeplitz_symbol(&p), 5, &q).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert!(t[(i, j)].im.abs() < 1e-13);
                assert!((t[(i, j)] - t[(j, i)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn hankel_mode_parsing() {
        assert_eq!("A".parse::<HankelMode>().unwrap(), HankelMode::A);
        assert_eq!("b".parse::<HankelMode>().unwrap(), HankelMode::B);
        assert!("C".parse::<HankelMode>().is_err());
    }

    #[test]
    fn hankel_symbol_infinite_temperature_vanishes() {
        let p = ChainParams::<f64>::infinite_temperature(0.3, 1, 0).unwrap();
        let b = hankel_symbol(&p, HankelMode::B, 0.5).unwrap();
        for i in 0..33 {
            let k = -PI + 2.0 * PI * i as f64 / 32.0;
            assert_eq!(b.eval(k).norm(), 0.0);
        }
    }

    #[test]
    fn hankel_symbol_bound_and_decay() {
        let p = fig();
        let qm = 0.6711564186449481;
        let b = hankel_symbol(&p, HankelMode::B, qm).unwrap();
        let sup = (0..2001)
            .map(|i| {
                let k = -PI + 2.0 * PI * i as f64 / 2000.0;
                (qm - fermi_side(k, 2.0, Pm::Plus)).abs()
            })
            .fold(0.0f64, f64::max);
        for i in 0..200 {
            let k = -PI + 2.0 * PI * (i as f64 + 0.5) / 200.0;
            let bound = 0.2 / (k.sin().powi(2) + 0.04).sqrt() * sup;
            assert!(b.eval(k).norm() <= bound + 1e-14);
        }
        let q = quad();
        let tab = FourierTable::new(&b, 1, 64, &q).unwrap();
        let w: Vec<f64> = (1..=64).map(|m| tab.get(m).norm() * (m as f64).powi(4)).collect();
        let c = w.iter().cloned().fold(0.0, f64::max);
        assert!(w.windows(2).skip(24).all(|p| p[1] < p[0]));
        assert!(w[63] < 0.1 * c);
    }

    #[test]
    fn geometric_mean_values() {
        let q = quad();
        let g = geometric_mean(&ScalarSymbol::constant(Complex::new(0.5, 0.0)), &q).unwrap();
        assert_abs_diff_eq!(g.value, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.rate, 2f64.ln(), epsilon = 1e-15);
        let g = geometric_mean(&ScalarSymbol::real(|k: f64| k.cos().exp(), &[], None), &q).unwrap();
        assert_abs_diff_eq!(g.value, 1.0, epsilon = 1e-14);
        let bad = ScalarSymbol::real(|k: f64| k.cos(), &[], None);
        assert!(matches!(geometric_mean(&bad, &q), Err(Error::NonPositiveSymbol { .. })));
    }

    #[test]
    fn rates_reference_point() {
        let r = decay_rates(&fig(), &quad()).unwrap();
        assert!(r.strictly_ordered());
        assert!(r.rewrite_defect < 1e-10);
        assert_abs_diff_eq!(r.gamma_l, 0.354326, epsilon = 1e-6);
        assert_abs_diff_eq!(r.gamma_b, 0.376960, epsilon = 1e-6);
        assert_abs_diff_eq!(r.gamma_r, 0.458704, epsilon = 1e-6);
        let g = geometric_mean(&toeplitz_symbol(&fig()), &quad()).unwrap();
        assert!((g.rate - r.gamma_total).abs() < 1e-10);
    }

    #[test]
    fn rates_degenerate_cases() {
        let q = quad();
        let inf = ChainParams::<f64>::infinite_temperature(0.4, 1, 0).unwrap();
        let r = decay_rates(&inf, &q).unwrap();
        assert_abs_diff_eq!(r.gamma_r, 0.5 * 2f64.ln(), epsilon = 1e-13);
        assert_abs_diff_eq!(r.gamma_total, 2f64.ln(), epsilon = 1e-13);
        for kappa in [0.05, 1.0, 7.0] {
            let p = ChainParams::new(1.3, 1.3, kappa, 0, 0).unwrap();
            let r = decay_rates(&p, &q).unwrap();
            assert_abs_diff_eq!(r.gamma_b, r.gamma_l, epsilon = 1e-13);
            assert_abs_diff_eq!(r.gamma_r, r.gamma_l, epsilon = 1e-13);
        }
    }

    #[test]
    fn gamma_b_monotone_in_kappa() {
        let q = quad();
        let mut last = 0.0;
        for kappa in [0.05, 0.2, 1.0, 5.0] {
            let r = decay_rates(&fig().with_kappa(kappa).unwrap(), &q).unwrap();
            assert!(r.gamma_b >= last);
            last = r.gamma_b;
        }
    }

    #[test]
    fn jumps_vanish_at_equal_temperatures() {
        let p = ChainParams::<f64>::new(1.0, 1.0, 0.2, 1, 0).unwrap();
        let d = symbol_jump_diagnostic(&p);
        assert!(d.measured_zero.abs() < 1e-7 && d.measured_pi.abs() < 1e-7);
        assert_eq!(d.predicted_zero, 0.0);
    }

    #[test]
    fn jump_magnitudes_match_closed_form() {
        let d = symbol_jump_diagnostic(&fig());
        let j = 25.0 * 0.75f64.sinh() / (1f64.cosh() * 0.25f64.cosh());
        assert_abs_diff_eq!(d.predicted_zero, j, epsilon = 1e-12);
        assert_abs_diff_eq!(j, 12.917, epsilon = 1e-3);
        assert!((d.measured_zero.abs() / j - 1.0).abs() < 1e-6);
        assert!((d.measured_pi.abs() / j - 1.0).abs() < 1e-6);
    }

    #[test]
    fn range_of_symbol() {
        let p = fig();
        let a = toeplitz_symbol(&p);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=20000 {
            let v = a.eval(-PI + 2.0 * PI * i as f64 / 20000.0).re;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        assert!((lo - fermi_side(0.0, 2.0, Pm::Minus)).abs() < 1e-10);
        assert!((hi - fermi_side(0.0, 2.0, Pm::Plus)).abs() < 1e-10);
    }

    #[test]
    fn slope_of_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 * i as f64 - 1.0)).collect();
        assert_abs_diff_eq!(linear_slope(&pts), 3.0, epsilon = 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn rate_identity_and_ordering(bl in 0.1f64..3.0, extra in 0.05f64..3.0, kappa in 0.05f64..3.0) {
            let q = quad();
            let p = ChainParams::new(bl, bl + extra, kappa, 1, 0).unwrap();
            let r = decay_rates(&p, &q).unwrap();
            let g = geometric_mean(&toeplitz_symbol(&p), &q).unwrap();
            prop_assert!((r.gamma_total - g.rate).abs() <= 1e-10);
            prop_assert!(r.rewrite_defect <= 1e-10);
            prop_assert!(r.strictly_ordered());
        }
    }
}
