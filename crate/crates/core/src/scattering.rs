//! Resolvent boundary values, the energy representation of the free hopping
//! Hamiltonian and the wave operators of the impurity problem.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::Pm;
use crate::quadrature::{graded_edges, Integrator};
use crate::scalar::{cis, Real, C};
use crate::spectral::BoundState;

/// Value of an energy-space function: one complex number per fiber.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiberPair<T> {
    pub first: C<T>,
    pub second: C<T>,
}

impl<T: Real> FiberPair<T> {
    pub fn new(first: C<T>, second: C<T>) -> Self {
        Self { first, second }
    }

    /// Fiber scalar product ⟨self, other⟩, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> C<T> {
        self.first.conj() * other.first + self.second.conj() * other.second
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self::new(self.first * s, self.second * s)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        (self.first - other.first).norm().max((self.second - other.second).norm())
    }
}

fn check_energy<T: Real>(e: T) -> Result<T> {
    if e.abs() < T::one() {
        Ok((T::one() - e * e).sqrt())
    } else {
        Err(Error::EnergyOutOfRange(e.to_f64().unwrap_or(f64::NAN)))
    }
}

/// Boundary value ρ_{δ0,δx}(e ± i0) = ±i (e ∓ i√(1−e²))^{|x|} / √(1−e²).
pub fn resolvent_boundary<T: Real>(e: T, x: i64, side: Pm) -> Result<C<T>> {
    let root = check_energy(e)?;
    let s = side.value::<T>();
    let base = Complex::new(e, -s * root);
    Ok(Complex::new(T::zero(), s) * base.powi(x.abs() as i32) / root)
}

/// Matrix element (δ_0, (h − z)^{−1} δ_x) for Im z ≠ 0 by momentum quadrature.
pub fn resolvent_quadrature<T: Real>(z: C<T>, x: i64, quad: &Integrator<T>) -> Result<C<T>> {
    let xf = T::from_int(x);
    let pi = T::PI();
    let scale = z.im.abs().min(T::one());
    let e = z.re.max(-T::one()).min(T::one());
    let k0 = e.acos();
    let f = |k: T| cis(k * xf) / (Complex::new(k.cos(), T::zero()) - z);
    let n = quad.spec().min_panels.max((x.unsigned_abs() as usize).div_ceil(4));
    let mut edges = graded_edges(-pi, -k0, n, None, Some(scale));
    edges.extend(graded_edges(-k0, T::zero(), n, Some(scale), None).into_iter().skip(1));
    edges.extend(graded_edges(T::zero(), k0, n, None, Some(scale)).into_iter().skip(1));
    edges.extend(graded_edges(k0, pi, n, Some(scale), None).into_iter().skip(1));
    edges.dedup();
    Ok(quad.integrate(&f, &edges)? / (T::two() * pi))
}

/// Momentum representation (ŵ_± e_x)(k) of the wave operator w_±(h, h_B)
/// applied to the localized state at `x`.
pub fn wave_action<T: Real>(k: T, x: i64, branch: Pm, bs: &BoundState<T>) -> C<T> {
    let ak = k.abs();
    let xa = T::from_int(x.abs());
    let s = branch.value::<T>();
    let kap = bs.kappa;
    let corr = Complex::new(T::zero(), s * kap) * cis(-s * ak * xa) / Complex::new(ak.sin(), s * kap);
    cis(k * T::from_int(x)) - corr
}

/// (f̃φ)(e) = (2π)^{−1/2} (1−e²)^{−1/4} [φ(arccos e), φ(−arccos e)].
pub fn energy_transform<T: Real, F>(phi: &F, e: T) -> Result<FiberPair<T>>
where
    F: Fn(T) -> C<T> + ?Sized,
{
    let root = check_energy(e)?;
    let theta = e.acos();
    let pref = T::one() / ((T::two() * T::PI()).sqrt() * root.sqrt());
    Ok(FiberPair::new(phi(theta) * pref, phi(-theta) * pref))
}

/// Inverse of [`energy_transform`] evaluated at momentum `k`.
pub fn energy_transform_inverse<T: Real, F>(eta: &F, k: T) -> Result<C<T>>
where
    F: Fn(T) -> Result<FiberPair<T>> + ?Sized,
{
    let c = k.cos();
    let s = k.sin().abs();
    if s == T::zero() {
        return Ok(C::zero());
    }
    let pair = eta(c)?;
    let pref = (T::two() * T::PI()).sqrt() * s.sqrt();
    let v = if k >= T::zero() { pair.first } else { pair.second };
    Ok(v * pref)
}

/// f̃φ at energy cos θ, θ ∈ (0, π), with the weight taken from sin θ.
pub fn energy_transform_at_angle<T: Real, F>(phi: &F, theta: T) -> FiberPair<T>
where
    F: Fn(T) -> C<T> + ?Sized,
{
    let pref = T::one() / ((T::two() * T::PI()).sqrt() * theta.sin().sqrt());
    FiberPair::new(phi(theta) * pref, phi(-theta) * pref)
}

/// ∫_{−1}^{1} g(e) de through the substitution e = cos θ; `g` receives
/// θ ∈ (0, π) rather than the energy.
pub fn energy_integral<T: Real, G>(g: &G, quad: &Integrator<T>) -> Result<C<T>>
where
    G: Fn(T) -> C<T> + ?Sized,
{
    let f = |theta: T| g(theta) * theta.sin();
    let edges = graded_edges(T::zero(), T::PI(), quad.spec().min_panels, None, None);
    quad.integrate(&f, &edges)
}

/// Squared norm ∫ ⟨f̃φ, f̃φ⟩ de of the energy-space image of `phi`.
pub fn energy_norm_sq<T: Real, F>(phi: &F, quad: &Integrator<T>) -> Result<T>
where
    F: Fn(T) -> C<T> + ?Sized,
{
    let g = |theta: T| {
        let p = energy_transform_at_angle(phi, theta);
        Complex::new(p.inner(&p).re, T::zero())
    };
    energy_integral(&g, quad).map(|z| z.re)
}

/// Energy representation of w_±(h, h_B) δ_x.
pub fn wave_action_energy<T: Real>(e: T, x: i64, branch: Pm, bs: &BoundState<T>) -> Result<FiberPair<T>> {
    let root = check_energy(e)?;
    let s = branch.value::<T>();
    let kap = bs.kappa;
    let pref = T::one() / ((T::two() * T::PI()).sqrt() * root.sqrt());
    let up = Complex::new(e, root);
    let down = Complex::new(e, -root);
    let tilt = if s > T::zero() { down } else { up };
    let corr = Complex::new(T::zero(), s * kap) * tilt.powi(x.abs() as i32) / Complex::new(root, s * kap);
    Ok(FiberPair::new((up.powi(x as i32) - corr) * pref, (down.powi(x as i32) - corr) * pref))
}

/// Gram entry (1/2π)∫ conj(ŵ e_x) ŵ e_y dk.
pub fn wave_gram<T: Real>(x: i64, y: i64, branch: Pm, bs: &BoundState<T>, quad: &Integrator<T>) -> Result<C<T>> {
    let f = |k: T| wave_action(k, x, branch, bs).conj() * wave_action(k, y, branch, bs);
    let freq = (x.unsigned_abs() + y.unsigned_abs()) as usize;
    let edges = crate::spectral::circle_edges(bs.kappa, freq, quad.spec().min_panels);
    Ok(quad.integrate(&f, &edges)? / (T::two() * T::PI()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadSpec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn quad() -> Integrator<f64> {
        Integrator::new(QuadSpec::default()).unwrap()
    }

    #[test]
    fn resolvent_values() {
        let v = resolvent_boundary(0.0f64, 0, Pm::Minus).unwrap();
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, -1.0, epsilon = 1e-15);
        for e in [-0.9f64, -0.3, 0.0, 0.5, 0.99] {
            for x in -4..=4 {
                let p = resolvent_boundary(e, x, Pm::Plus).unwrap();
                let m = resolvent_boundary(e, x, Pm::Minus).unwrap();
                assert_abs_diff_eq!((p - m.conj()).norm(), 0.0, epsilon = 1e-14);
                assert_abs_diff_eq!(p.norm() * (1.0 - e * e).sqrt(), 1.0, epsilon = 1e-13);
            }
        }
        assert!(resolvent_boundary(1.0f64, 0, Pm::Plus).is_err());
        assert!(resolvent_boundary(-1.5f64, 0, Pm::Plus).is_err());
    }

    #[test]
    fn resolvent_small_epsilon_oracle() {
        let q = Integrator::new(QuadSpec::with_tol(1e-9)).unwrap();
        let exact = resolvent_boundary(0.3f64, 2, Pm::Minus).unwrap();
        let mut last = f64::INFINITY;
        for eps in [1e-3, 1e-4, 1e-5] {
            let z = Complex::new(0.3, -eps);
            let err = (resolvent_quadrature(z, 2, &q).unwrap() - exact).norm();
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-3);
        let err3 = (resolvent_quadrature(Complex::new(0.3, -1e-3), 2, &q).unwrap() - exact).norm();
        let err4 = (resolvent_quadrature(Complex::new(0.3, -1e-4), 2, &q).unwrap() - exact).norm();
        assert!((err3 / err4 - 10.0).abs() < 1.0);
    }

    #[test]
    fn wave_action_values() {
        let b = BoundState::new(0.2f64).unwrap();
        let v = wave_action(PI / 2.0, 0, Pm::Plus, &b);
        assert_abs_diff_eq!(v.re, 0.9615385, epsilon = 1e-7);
        assert_abs_diff_eq!(v.im, -0.1923077, epsilon = 1e-7);
        let tiny = BoundState::new(1e-12f64).unwrap();
        for k in [-2.0, -0.5, 0.7, 3.0] {
            let v = wave_action(k, 3, Pm::Minus, &tiny);
            assert_abs_diff_eq!((v - cis(3.0 * k)).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn gram_completeness_defect() {
        let q = quad();
        for kappa in [0.2, 1.0] {
            let b = BoundState::new(kappa).unwrap();
            for branch in [Pm::Plus, Pm::Minus] {
                for x in -3i64..=3 {
                    for y in -3i64..=3 {
                        let g = wave_gram(x, y, branch, &b, &q).unwrap();
                        let want = if x == y { 1.0 } else { 0.0 } - b.eigenfunction(x) * b.eigenfunction(y);
                        assert!((g - Complex::new(want, 0.0)).norm() <= 1e-8, "{x} {y}: {g}");
                    }
                }
            }
            let g00 = wave_gram(0, 0, Pm::Plus, &b, &q).unwrap();
            assert_abs_diff_eq!(g00.re, 1.0 - kappa / b.e_b, epsilon = 1e-10);
        }
    }

    #[test]
    fn energy_norm_of_delta() {
        let q = quad();
        let one = |_: f64| Complex::new(1.0, 0.0);
        assert_abs_diff_eq!(energy_norm_sq(&one, &q).unwrap(), 1.0, epsilon = 1e-10);
        let g = |k: f64| cis(2.0 * k) + cis(-5.0 * k) * 0.5;
        assert_abs_diff_eq!(energy_norm_sq(&g, &q).unwrap(), 1.25, epsilon = 1e-10);
    }

    #[test]
    fn energy_round_trip() {
        let phi = |k: f64| cis(3.0 * k);
        let eta = |e: f64| energy_transform(&phi, e);
        for i in 1..40 {
            let k = -PI + 2.0 * PI * i as f64 / 40.0;
            if k.sin().abs() < 1e-9 {
                continue;
            }
            let back = energy_transform_inverse(&eta, k).unwrap();
            assert!((back - phi(k)).norm() < 1e-10, "k {k}");
        }
    }

    #[test]
    fn energy_diagonalises_hopping() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let coeffs: Vec<C<f64>> = (0..7).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let phi = |k: f64| coeffs.iter().enumerate().fold(C::zero(), |s, (m, c)| s + c * cis((m as f64 - 3.0) * k));
            let hphi = |k: f64| phi(k) * k.cos();
            for e in [-0.8, -0.1, 0.35, 0.9] {
                let lhs = energy_transform(&hphi, e).unwrap();
                let rhs = energy_transform(&phi, e).unwrap().scale(Complex::new(e, 0.0));
                assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            }
        }
    }

    #[test]
    fn wave_energy_consistency() {
        let b = BoundState::new(0.2f64).unwrap();
        for branch in [Pm::Plus, Pm::Minus] {
            for x in [-3i64, 0, 1, 4] {
                for e in [-0.7, 0.0, 0.4, 0.95] {
                    let phi = |k: f64| wave_action(k, x, branch, &b);
                    let a = energy_transform(&phi, e).unwrap();
                    let d = wave_action_energy(e, x, branch, &b).unwrap();
                    assert!(a.max_abs_diff(&d) < 1e-9, "x {x} e {e}");
                }
            }
        }
        assert!(wave_action_energy(1.0, 0, Pm::Plus, &b).is_err());
    }

    #[test]
    fn wave_energy_zero_coupling_and_origin() {
        let tiny = BoundState::new(1e-13f64).unwrap();
        let e: f64 = 0.3;
        let root = (1.0 - e * e).sqrt();
        let pref = 1.0 / ((2.0 * PI).sqrt() * root.sqrt());
        let v = wave_action_energy(e, 2, Pm::Minus, &tiny).unwrap();
        let want = FiberPair::new(Complex::new(e, root).powi(2) * pref, Complex::new(e, -root).powi(2) * pref);
        assert!(v.max_abs_diff(&want) < 1e-10);
        let b = BoundState::new(0.2f64).unwrap();
        for branch in [Pm::Plus, Pm::Minus] {
            let s = branch.value::<f64>();
            let v = wave_action_energy(e, 0, branch, &b).unwrap();
            let c = (Complex::new(1.0, 0.0) - Complex::new(0.0, s * 0.2) / Complex::new(root, s * 0.2)) * pref;
            assert!((v.first - c).norm() < 1e-14 && (v.second - c).norm() < 1e-14);
        }
    }

    #[test]
    fn f32_smoke() {
        let b = BoundState::new(0.2f32).unwrap();
        let v = wave_action(1.0f32, 2, Pm::Plus, &b);
        assert!(v.norm().is_finite());
    }

    proptest! {
        #[test]
        fn branch_conjugation(k in -PI..PI, x in -30i64..30, kappa in 1e-3f64..10.0) {
            let b = BoundState::new(kappa).unwrap();
            let p = wave_action(k, x, Pm::Plus, &b);
            let m = wave_action(-k, x, Pm::Minus, &b).conj();
            prop_assert!((p - m).norm() <= 1e-14);
        }

        #[test]
        fn correction_bounded(k in -PI..PI, x in -30i64..30, kappa in 1e-3f64..10.0) {
            let b = BoundState::new(kappa).unwrap();
            for branch in [Pm::Plus, Pm::Minus] {
                let corr = wave_action(k, x, branch, &b) - cis(k * x as f64);
                prop_assert!(corr.norm() <= kappa / (k.sin().powi(2) + kappa * kappa).sqrt() + 1e-14);
                prop_assert!(corr.norm() <= 1.0 + 1e-14);
            }
        }

        #[test]
        fn resolvent_modulus(e in -0.999f64..0.999, x in -20i64..20) {
            for side in [Pm::Plus, Pm::Minus] {
                let r = resolvent_boundary(e, x, side).unwrap();
                prop_assert!((r.norm() * (1.0 - e * e).sqrt() - 1.0).abs() <= 1e-12);
            }
        }
    }
}
