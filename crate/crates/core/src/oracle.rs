//! Finite-volume brute force: the quasifree dynamics on [−M, M] with a
//! Cesàro mean over a deterministic time grid.

use rayon::prelude::*;

use crate::correlation::{minors, Provenance, ReducedCorrelation};
use crate::error::{Error, Result};
use crate::linalg::{tridiagonal_eigen, Matrix};
use crate::model::{ChainParams, Pm};
use crate::pfaffian::LogScaled;
use crate::scalar::{Real, C};

/// Largest tolerated |Im| of the averaged determinant.
pub const AVERAGE_PHASE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteVolumeSpec<T> {
    pub window_radius: usize,
    pub horizon: T,
    pub samples: usize,
    pub averaging_start: T,
}

impl<T: Real> Default for FiniteVolumeSpec<T> {
    fn default() -> Self {
        Self { window_radius: 300, horizon: T::lit(150.0), samples: 256, averaging_start: T::half() }
    }
}

impl<T: Real> FiniteVolumeSpec<T> {
    pub fn new(window_radius: usize, horizon: T, samples: usize, averaging_start: T) -> Result<Self> {
        let s = Self { window_radius, horizon, samples, averaging_start };
        if window_radius == 0 || !(horizon > T::zero()) || samples < 2 {
            return Err(Error::InvalidParameter(format!(
                "window {window_radius}, horizon {horizon}, samples {samples}: need M ≥ 1, T > 0, at least 2 samples"
            )));
        }
        if !(averaging_start >= T::zero() && averaging_start < T::one()) {
            return Err(Error::InvalidParameter(format!("averaging start {averaging_start} outside [0, 1)")));
        }
        Ok(s)
    }

    pub fn dimension(&self) -> usize {
        2 * self.window_radius + 1
    }

    /// Distance the front may travel before wall reflections reach the string.
    pub fn light_cone(&self, params: &ChainParams<T>, n: usize) -> T {
        T::from_int(self.window_radius as i64 - n as i64 - params.x0.abs())
    }

    fn check_window(&self, params: &ChainParams<T>) -> Result<()> {
        let need = 10 * params.sample_radius.max(1);
        if self.window_radius < need {
            return Err(Error::WindowTooSmall { window: self.window_radius, bound: need as f64, tol: 0.0 });
        }
        Ok(())
    }

    fn check_time(&self, params: &ChainParams<T>, n: usize, t: T) -> Result<()> {
        let bound = self.light_cone(params, n);
        if !(t.abs() < bound) {
            return Err(Error::LightCone {
                horizon: t.to_f64().unwrap_or(f64::NAN),
                bound: bound.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    /// Sample times on [start·T, T] with trapezoid weights summing to one.
    pub fn time_grid(&self) -> Vec<(T, T)> {
        let t0 = self.averaging_start * self.horizon;
        let s = self.samples;
        let dt = (self.horizon - t0) / T::from_int(s as i64 - 1);
        let norm = T::from_int(s as i64 - 1);
        (0..s)
            .map(|i| {
                let w = if i == 0 || i + 1 == s { T::half() } else { T::one() };
                (t0 + dt * T::from_int(i as i64), w / norm)
            })
            .collect()
    }
}

/// Symmetric tridiagonal matrix on [−M, M], index 0 ↔ site −M.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn dimension(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> Matrix<T> {
        let n = self.dimension();
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if i + 1 == j {
                self.off[i]
            } else if j + 1 == i {
                self.off[j]
            } else {
                T::zero()
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct Hamiltonians<T> {
    pub h: Tridiagonal<T>,
    pub h0: Tridiagonal<T>,
    pub hb: Tridiagonal<T>,
}

pub fn build_hamiltonians<T: Real>(spec: &FiniteVolumeSpec<T>, params: &ChainParams<T>) -> Hamiltonians<T> {
    let m = spec.window_radius;
    let d = spec.dimension();
    let h = Tridiagonal { diag: vec![T::zero(); d], off: vec![T::half(); d - 1] };
    let mut h0 = h.clone();
    let nr = params.sample_radius;
    // bond (x, x+1) sits at off[x + M]
    for x in [-(nr as i64) - 1, nr as i64] {
        let idx = x + m as i64;
        if idx >= 0 && (idx as usize) < d - 1 {
            h0.off[idx as usize] = T::zero();
        }
    }
    let mut hb = h.clone();
    hb.diag[m] = params.kappa;
    Hamiltonians { h, h0, hb }
}

/// s_{0,sign} = (1 + e^{sign·k_0})^{−1} with k_0 = β_L h_L ⊕ 0 ⊕ β_R h_R.
pub fn initial_density<T: Real>(spec: &FiniteVolumeSpec<T>, params: &ChainParams<T>, sign: Pm) -> Matrix<T> {
    let m = spec.window_radius;
    let nr = params.sample_radius.min(m);
    let d = spec.dimension();
    let mut s = Matrix::zeros(d, d);
    for i in (m - nr)..=(m + nr) {
        s[(i, i)] = T::half();
    }
    let len = m - nr;
    for (beta, start) in [(params.beta_left, 0), (params.beta_right, m + nr + 1)] {
        if len == 0 {
            continue;
        }
        let eig = tridiagonal_eigen(&vec![T::zero(); len], &vec![T::half() * beta; len - 1], true);
        let z = eig.vectors.expect("vectors requested");
        let w: Vec<T> = eig.values.iter().map(|&e| T::one() / (T::one() + (sign.value::<T>() * e).exp())).collect();
        for i in 0..len {
            for j in 0..len {
                let v: T = (0..len).map(|a| z[(i, a)] * w[a] * z[(j, a)]).sum();
                s[(start + i, start + j)] = v;
            }
        }
    }
    s
}

/// Eigenbasis of h_B and the initial density expressed in it, computed once.
#[derive(Clone, Debug)]
pub struct FiniteVolume<T> {
    spec: FiniteVolumeSpec<T>,
    params: ChainParams<T>,
    energies: Vec<T>,
    modes: Matrix<T>,
    density: Matrix<T>,
}

impl<T: Real> FiniteVolume<T> {
    pub fn new(spec: FiniteVolumeSpec<T>, params: ChainParams<T>) -> Result<Self> {
        let spec = FiniteVolumeSpec::new(spec.window_radius, spec.horizon, spec.samples, spec.averaging_start)?;
        spec.check_window(&params)?;
        let hb = build_hamiltonians(&spec, &params).hb;
        let eig = tridiagonal_eigen(&hb.diag, &hb.off, true);
        let v = eig.vectors.expect("vectors requested");
        let s = initial_density(&spec, &params, Pm::Minus);
        let d = spec.dimension();
        // Vᵀ s V
        let sv: Vec<Vec<T>> = (0..d).into_par_iter().map(|q| (0..d).map(|a| (0..d).map(|b| s[(a, b)] * v[(b, q)]).sum()).collect()).collect();
        let rows: Vec<Vec<T>> = (0..d).into_par_iter().map(|p| (0..d).map(|q| (0..d).map(|a| v[(a, p)] * sv[q][a]).sum()).collect()).collect();
        let density = Matrix::from_vec(d, d, rows.into_iter().flatten().collect());
        Ok(Self { spec, params, energies: eig.values, modes: v, density })
    }

    pub fn spec(&self) -> &FiniteVolumeSpec<T> {
        &self.spec
    }

    pub fn params(&self) -> &ChainParams<T> {
        &self.params
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    /// Θ_n(t) with θ_ij = (e^{ith_B}δ_{i′}, s_{0,−}e^{ith_B}δ_{j′}) for i ≤ j and
    /// −(e^{−ith_B}δ_{j′}, s_{0,+}e^{−ith_B}δ_{i′}) for i > j.
    pub fn theta_at_time(&self, t: T, n: usize) -> Result<ReducedCorrelation<T>> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        self.spec.check_time(&self.params, n, t)?;
        let d = self.spec.dimension();
        let m = self.spec.window_radius as i64;
        let sites: Vec<usize> = (0..n).map(|i| (self.params.x0 + i as i64 + m) as usize).collect();
        let phase: Vec<C<T>> = self.energies.iter().map(|&e| C::from_polar(T::one(), t * e)).collect();
        // y[i][p] = V[i′,p] e^{itE_p}, x = conj(y)
        let y: Vec<Vec<C<T>>> = sites.iter().map(|&r| (0..d).map(|p| phase[p] * self.modes[(r, p)]).collect()).collect();
        // z[j][p] = Σ_q S̃_pq y[j][q]
        let z: Vec<Vec<C<T>>> = y
            .iter()
            .map(|yj| {
                (0..d)
                    .map(|p| {
                        let row = self.density.row(p);
                        let (mut re, mut im) = (T::zero(), T::zero());
                        for q in 0..d {
                            re = re + row[q] * yj[q].re;
                            im = im + row[q] * yj[q].im;
                        }
                        C::new(re, im)
                    })
                    .collect()
            })
            .collect();
        let matrix = Matrix::from_fn(n, n, |i, j| {
            if i <= j {
                (0..d).map(|p| y[i][p].conj() * z[j][p]).fold(C::new(T::zero(), T::zero()), |a, b| a + b)
            } else {
                // c_ji = Σ y[j] (1 − S̃) conj(y[i])
                let c = (0..d)
                    .map(|p| y[j][p] * (y[i][p].conj() - z[i][p].conj()))
                    .fold(C::new(T::zero(), T::zero()), |a, b| a + b);
                -c
            }
        });
        Ok(ReducedCorrelation { matrix, provenance: Provenance::Oracle })
    }

    /// Cesàro means of det Θ_m(t) for m = 1..=n over the time grid.
    pub fn efp_time_average_profile(&self, n: usize) -> Result<Vec<T>> {
        self.spec.check_time(&self.params, n, self.spec.horizon)?;
        let grid = self.spec.time_grid();
        let per_time: Vec<Vec<C<T>>> = grid
            .par_iter()
            .map(|&(t, _)| {
                let theta = self.theta_at_time(t, n)?;
                raw_minors(&theta.matrix)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut acc = vec![C::new(T::zero(), T::zero()); n];
        for ((_, w), dets) in grid.iter().zip(&per_time) {
            for (a, d) in acc.iter_mut().zip(dets) {
                *a = *a + *d * *w;
            }
        }
        acc.into_iter()
            .map(|a| {
                let dev = a.im.abs().to_f64().unwrap_or(f64::INFINITY);
                if dev > AVERAGE_PHASE_TOL {
                    Err(Error::PhaseCheck { deviation: dev })
                } else {
                    Ok(a.re)
                }
            })
            .collect()
    }

    pub fn efp_time_average(&self, n: usize) -> Result<T> {
        Ok(*self.efp_time_average_profile(n)?.last().expect("n ≥ 1"))
    }

    /// Cesàro mean of Θ_n(t) itself.
    pub fn theta_time_average(&self, n: usize) -> Result<ReducedCorrelation<T>> {
        let grid = self.spec.time_grid();
        let mut acc = Matrix::zeros(n, n);
        for &(t, w) in &grid {
            let th = self.theta_at_time(t, n)?;
            acc = Matrix::from_fn(n, n, |i, j| acc[(i, j)] + th.matrix[(i, j)] * w);
        }
        Ok(ReducedCorrelation { matrix: acc, provenance: Provenance::Oracle })
    }
}

fn raw_minors<T: Real>(m: &Matrix<C<T>>) -> Result<Vec<C<T>>> {
    (1..=m.rows()).map(|k| crate::pfaffian::logdet(&m.leading(k)).map(|d: LogScaled<T>| d.value())).collect()
}

pub fn theta_at_time<T: Real>(t: T, n: usize, spec: &FiniteVolumeSpec<T>, params: &ChainParams<T>) -> Result<ReducedCorrelation<T>> {
    FiniteVolume::new(*spec, *params)?.theta_at_time(t, n)
}

pub fn efp_time_average<T: Real>(n: usize, spec: &FiniteVolumeSpec<T>, params: &ChainParams<T>) -> Result<T> {
    FiniteVolume::new(*spec, *params)?.efp_time_average(n)
}

/// Phase-checked determinants of the leading minors of a time-averaged Θ.
pub fn averaged_theta_minors<T: Real>(fv: &FiniteVolume<T>, n: usize) -> Result<Vec<LogScaled<T>>> {
    minors(&fv.theta_time_average(n)?.matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{assemble_theta, NessModel};
    use crate::model::fermi_side;
    use crate::quadrature::{Integrator, QuadSpec};
    use crate::szego::toeplitz_section;
    use approx::assert_abs_diff_eq;

    fn spec(m: usize, t: f64, s: usize) -> FiniteVolumeSpec<f64> {
        FiniteVolumeSpec::new(m, t, s, 0.5).unwrap()
    }

    fn fig() -> ChainParams<f64> {
        ChainParams::new(0.5, 2.0, 0.2, 1, 0).unwrap()
    }

    #[test]
    fn hamiltonian_structure() {
        let p = ChainParams::new(0.5, 2.0, 0.2, 1, 0).unwrap();
        let hs = build_hamiltonians(&spec(20, 5.0, 4), &p);
        let h = hs.h.to_dense();
        let d = h.rows();
        for i in 0..d {
            let s: f64 = h.row(i).iter().sum();
            let want = if i == 0 || i == d - 1 { 0.5 } else { 1.0 };
            assert_eq!(s, want);
        }
        let diff = hs.h.off.iter().zip(&hs.h0.off).filter(|(a, b)| a != b).count();
        assert_eq!(diff, 2);
        assert_eq!(hs.h0.off[19], 0.0);
        assert_eq!(hs.h0.off[20], 0.0);
        let rank_b = hs.hb.diag.iter().zip(&hs.h.diag).filter(|(a, b)| a != b).count();
        assert_eq!(rank_b, 1);
        assert_eq!(hs.hb.diag[20], 0.2);
    }

    #[test]
    fn bound_state_energy_converges() {
        let p = ChainParams::new(1.0, 1.0, 0.5, 1, 0).unwrap();
        let hb = build_hamiltonians(&spec(500, 1.0, 2), &p).hb;
        let e = tridiagonal_eigen(&hb.diag, &hb.off, false).values;
        let top = e.iter().cloned().filter(|&x| x > 1.0).fold(f64::INFINITY, f64::min);
        assert!((top - 1.25f64.sqrt()).abs() <= 1e-6);
    }

    #[test]
    fn density_properties() {
        let p = ChainParams::new(0.5, 2.0, 0.2, 1, 2).unwrap();
        let sp = spec(30, 5.0, 4);
        let sm = initial_density(&sp, &p, Pm::Minus);
        let spl = initial_density(&sp, &p, Pm::Plus);
        let d = sm.rows();
        for i in 0..d {
            for j in 0..d {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((sm[(i, j)] + spl[(i, j)] - id).abs() <= 1e-12);
                assert!((sm[(i, j)] - sm[(j, i)]).abs() <= 1e-14);
            }
        }
        for i in 28..=32 {
            for j in 0..d {
                assert_eq!(sm[(i, j)], if i == j { 0.5 } else { 0.0 });
            }
        }
        let mut k0 = build_hamiltonians(&sp, &p).h0.to_dense();
        for i in 0..d {
            for j in 0..d {
                let beta = if i < 28 && j < 28 { 0.5 } else if i > 32 && j > 32 { 2.0 } else { 0.0 };
                k0[(i, j)] *= beta;
            }
        }
        let a = k0.matmul(&sm);
        let b = sm.matmul(&k0);
        for i in 0..d {
            for j in 0..d {
                assert!((a[(i, j)] - b[(i, j)]).abs() <= 1e-12);
            }
        }
        let hot = initial_density(&sp, &ChainParams::infinite_temperature(0.2, 1, 2).unwrap(), Pm::Minus);
        for i in 0..d {
            for j in 0..d {
                assert!((hot[(i, j)] - if i == j { 0.5 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn time_zero_is_initial_density() {
        let p = fig();
        let sp = spec(40, 10.0, 4);
        let fv = FiniteVolume::new(sp, p).unwrap();
        let th = fv.theta_at_time(0.0, 4).unwrap();
        let s = initial_density(&sp, &p, Pm::Minus);
        for i in 0..4 {
            for j in i..4 {
                let (a, b) = (40 + 1 + i, 40 + 1 + j);
                assert!((th.matrix[(i, j)] - C::new(s[(a, b)], 0.0)).norm() < 1e-12);
            }
        }
        let hot = FiniteVolume::new(sp, ChainParams::infinite_temperature(0.2, 1, 0).unwrap()).unwrap();
        assert!((hot.theta_at_time(0.0, 1).unwrap().matrix[(0, 0)] - C::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn infinite_temperature_average() {
        let fv = FiniteVolume::new(spec(60, 30.0, 32), ChainParams::infinite_temperature(0.2, 1, 0).unwrap()).unwrap();
        let prof = fv.efp_time_average_profile(5).unwrap();
        for (m, v) in prof.iter().enumerate() {
            assert_abs_diff_eq!(*v, 0.5f64.powi(m as i32 + 1), epsilon = 1e-6);
        }
    }

    #[test]
    fn determinants_real_at_each_time() {
        let fv = FiniteVolume::new(spec(80, 40.0, 8), fig()).unwrap();
        for &(t, _) in &fv.spec().time_grid() {
            for d in raw_minors(&fv.theta_at_time(t, 5).unwrap().matrix).unwrap() {
                assert!(d.im.abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn light_cone_refusal() {
        let fv = FiniteVolume::new(spec(40, 38.0, 8), fig()).unwrap();
        assert!(matches!(fv.theta_at_time(38.5, 2), Err(Error::LightCone { .. })));
        assert!(matches!(fv.efp_time_average(2), Err(Error::LightCone { .. })));
        assert!(fv.theta_at_time(30.0, 2).is_ok());
        let wide = ChainParams::new(0.5, 2.0, 0.2, 1, 5).unwrap();
        assert!(matches!(FiniteVolume::new(spec(40, 10.0, 4), wide), Err(Error::WindowTooSmall { .. })));
    }

    #[test]
    fn equilibrium_toeplitz_oracle() {
        let p = ChainParams::new(1.0, 1.0, 1e-6, 1, 0).unwrap();
        let fv = FiniteVolume::new(FiniteVolumeSpec::default(), p).unwrap();
        let prof = fv.efp_time_average_profile(4).unwrap();
        let q = Integrator::new(QuadSpec::default()).unwrap();
        let s = crate::model::ScalarSymbol::real(|k: f64| fermi_side(k, 1.0, Pm::Minus), &[], None);
        for (m, v) in prof.iter().enumerate() {
            let want = crate::pfaffian::logdet(&toeplitz_section(&s, m + 1, &q).unwrap()).unwrap().value().re;
            assert!((v - want).abs() <= 5e-3, "n {} {v} {want}", m + 1);
        }
    }

    #[test]
    fn late_entries_approach_steady_state() {
        let p = fig();
        let sp = FiniteVolumeSpec::new(300, 110.0, 21, 90.0 / 110.0).unwrap();
        let fv = FiniteVolume::new(sp, p).unwrap();
        let avg = fv.theta_time_average(3).unwrap();
        let ness = assemble_theta(&NessModel::new(p, QuadSpec::default()).unwrap(), 3).unwrap();
        assert!(avg.matrix.max_abs_diff(&ness.matrix) <= 5e-3);
    }

    #[test]
    fn doubling_horizon_shrinks_fluctuation() {
        let p = ChainParams::new(0.5, 2.0, 1.0, 1, 0).unwrap();
        let ness = NessModel::new(p, QuadSpec::default()).unwrap();
        let want = crate::correlation::efp(&ness, 2).unwrap().value().re;
        let envelope = |t1: f64| {
            (0..8)
                .map(|k| {
                    let t = t1 * (1.0 + k as f64 / 8.0);
                    let sp = FiniteVolumeSpec::new(200, t, (4.0 * t) as usize, 0.5).unwrap();
                    let fv = FiniteVolume::new(sp, p).unwrap();
                    (fv.efp_time_average(2).unwrap() - want).abs()
                })
                .fold(0.0, f64::max)
        };
        let e: Vec<f64> = [20.0, 40.0, 80.0].into_iter().map(envelope).collect();
        assert!(e[1] <= 0.5 * e[0] && e[2] <= 0.5 * e[1], "{e:?}");
    }
}
