//! Invariant suites, one per module; a failing suite never stops the others.

use ness_efp::correlation::{
    assemble_theta, assemble_theta_structured, efp_profile, full_skew_from_theta, AssemblyPath, NessModel,
};
use ness_efp::linalg::{tridiagonal_eigen, Matrix};
use ness_efp::model::{fermi, fermi_side, ness_density, sigma_b, toeplitz_value, wrap, ChainParams, Pm, Side};
use ness_efp::oracle::{initial_density, FiniteVolume, FiniteVolumeSpec};
use ness_efp::pfaffian::{logdet, pfaffian, pfaffian_block_identity, pfaffian_congruence_identity, SkewMatrix};
use ness_efp::scattering::{resolvent_boundary, wave_action, wave_gram};
use ness_efp::spectral::{half_line_overlap, initial_overlap, overlap_window, BoundState};
use ness_efp::szego::{decay_rates, geometric_mean};
use ness_efp::{Integrator, QuadSpec, C};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::config::{Format, RunConfig};
use crate::output::{float, Cell, Table};

#[derive(Clone, Debug)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

struct Suite {
    name: &'static str,
    checks: Vec<Check>,
}

impl Suite {
    fn bound(&mut self, name: &str, measured: f64, tolerance: f64) {
        let pass = measured <= tolerance;
        self.checks.push(Check { suite: self.name, name: name.into(), measured, tolerance, pass });
    }

    fn holds(&mut self, name: &str, measured: f64, pass: bool) {
        self.checks.push(Check { suite: self.name, name: name.into(), measured, tolerance: 0.0, pass });
    }
}

type Step = Result<(), ness_efp::Error>;

fn run(name: &'static str, cfg: &RunConfig, body: fn(&mut Suite, &RunConfig) -> Step) -> Vec<Check> {
    let mut s = Suite { name, checks: Vec::new() };
    if let Err(e) = body(&mut s, cfg) {
        s.checks.push(Check { suite: name, name: format!("error: {e}"), measured: f64::NAN, tolerance: 0.0, pass: false });
    }
    s.checks
}

fn grid(points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| -PI + 2.0 * PI * (i as f64 + 0.37) / points as f64)
}

fn quad(cfg: &RunConfig) -> Result<Integrator<f64>, ness_efp::Error> {
    Integrator::new(QuadSpec::with_tol(cfg.quad_tol))
}

fn params(cfg: &RunConfig) -> Result<ChainParams<f64>, ness_efp::Error> {
    ChainParams::new(cfg.beta_left, cfg.beta_right, cfg.kappa, cfg.x0, cfg.sample_radius)
}

fn model_suite(s: &mut Suite, cfg: &RunConfig) -> Step {
    let p = params(cfg)?;
    let (mut dual, mut mix, mut even) = (0.0f64, 0.0f64, 0.0f64);
    for k in grid(1000) {
        dual = dual.max((ness_density(&p, k, Pm::Plus) + ness_density(&p, -k, Pm::Minus) - 1.0).abs());
        let (l, r) = (fermi(&p, k, Side::Left, Pm::Plus), fermi(&p, k, Side::Right, Pm::Plus));
        let a = toeplitz_value(&p, k);
        mix = mix.max(l.min(r) - a).max(a - l.max(r));
        for beta in [p.beta_left, p.beta_right] {
            for sign in [Pm::Plus, Pm::Minus] {
                even = even.max((fermi_side(k, beta, sign) - fermi_side(-k, beta, sign)).abs());
            }
        }
        even = even.max((sigma_b(k, p.kappa) - sigma_b(-k, p.kappa)).abs());
    }
    s.bound("particle-hole duality", dual, 1e-14);
    s.bound("mixture bounds", mix.max(0.0), 1e-15);
    let mut gap = 0.0f64;
    for k0 in [0.0, PI] {
        gap = gap.max((toeplitz_value(&p, wrap(k0 - 1e-9)) - toeplitz_value(&p, wrap(k0 + 1e-9))).abs());
    }
    s.bound("continuity at 0 and pi", gap, 1e-12);
    s.bound("evenness", even, 1e-15);
    Ok(())
}

fn spectral_suite(s: &mut Suite, cfg: &RunConfig) -> Step {
    let q = quad(cfg)?;
    let (mut closed, mut residual, mut fourier) = (0.0f64, 0.0f64, 0.0f64);
    for kappa in [0.1f64, 0.5, 1.0, 2.0] {
        let b = BoundState::new(kappa)?;
        closed = closed.max(((-b.lambda_b).exp() * (kappa + b.e_b) - 1.0).abs());
        for x in -20i64..=20 {
            let pot = if x == 0 { kappa * b.eigenfunction(0) } else { 0.0 };
            let r = 0.5 * (b.eigenfunction(x - 1) + b.eigenfunction(x + 1)) + pot - b.e_b * b.eigenfunction(x);
            residual = residual.max(r.abs());
        }
        if kappa <= 1.0 {
            for x in 0..=10u64 {
                let v = b.exp_fourier_identity(x, &q)?;
                fourier = fourier.max((v - C::new((-b.lambda_b * x as f64).exp(), 0.0)).norm());
            }
        }
    }
    s.bound("exp(-lambda_B)(kappa + e_B) = 1", closed, 1e-15);
    s.bound("eigen-residual", residual, 1e-13);
    s.bound("Fourier identity", fourier, 1e-10);
    let p = ChainParams::<f64>::new(0.5, 1.5, 0.5, 0, cfg.sample_radius.min(3))?;
    let w = overlap_window(&p, 1e-12)?;
    let a = initial_overlap(&p, Pm::Minus, w, 1e-12)?;
    let b = initial_overlap(&p, Pm::Minus, w + 10, 1e-12)?;
    let lam = BoundState::new(0.5)?.lambda_b;
    let bound = 10.0 * (-2.0 * lam * (w - p.sample_radius) as f64).exp();
    s.bound("initial_overlap window convergence", (a - b).abs(), bound.max(1e-14));
    s.bound("initial_overlap vs half-line integral", (a - half_line_overlap(&p, Pm::Minus, &q)?).abs(), 1e-12);
    Ok(())
}

fn scattering_suite(s: &mut Suite, cfg: &RunConfig) -> Step {
    let q = quad(cfg)?;
    let (mut gram, mut spot, mut conj, mut modulus) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for kappa in [0.2, 1.0] {
        let b = BoundState::new(kappa)?;
        for branch in [Pm::Plus, Pm::Minus] {
            for x in -3i64..=3 {
                for y in -3i64..=3 {
                    let g = wave_gram(x, y, branch, &b, &q)?;
                    let want = if x == y { 1.0 } else { 0.0 } - b.eigenfunction(x) * b.eigenfunction(y);
                    gram = gram.max((g - C::new(want, 0.0)).norm());
                }
            }
        }
        spot = spot.max((wave_gram(0, 0, Pm::Plus, &b, &q)?.re - (1.0 - kappa / b.e_b)).abs());
        for k in grid(200) {
            for x in -6i64..=6 {
                let d = wave_action(k, x, Pm::Plus, &b) - wave_action(-k, x, Pm::Minus, &b).conj();
                conj = conj.max(d.norm());
            }
        }
    }
    for e in [-0.9, -0.3, 0.0, 0.4, 0.95] {
        for x in 0..6i64 {
            for side in [Pm::Plus, Pm::Minus] {
                let r = resolvent_boundary(e, x, side)?;
                modulus = modulus.max((r.norm() * (1.0f64 - e * e).sqrt() - 1.0).abs());
            }
        }
    }
    s.bound("completeness defect", gram, 1e-8);
    s.bound("G00 = 1 - kappa/e_B", spot, 1e-8);
    s.bound("branch conjugation", conj, 1e-14);
    s.bound("resolvent boundary modulus", modulus, 1e-12);
    Ok(())
}

fn rand_c(rng: &mut ChaCha8Rng) -> C<f64> {
    C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn pfaffian_suite(s: &mut Suite, _cfg: &RunConfig) -> Step {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut sq = 0.0f64;
    for t in 0..200 {
        let a = SkewMatrix::from_upper(2 + 2 * (t % 6), |_, _| rand_c(&mut rng))?;
        sq = sq.max(pfaffian(&a).powi(2).rel_diff(&logdet(&a.to_dense())?));
    }
    let (mut block, mut cong) = (0.0f64, 0.0f64);
    for t in 0..100 {
        let n = 1 + t % 6;
        let x = Matrix::from_fn(n, n, |_, _| rand_c(&mut rng));
        let (l, r) = pfaffian_block_identity(&x)?;
        block = block.max(l.rel_diff(&r));
        let order = 2 * (1 + t % 5);
        let x = Matrix::from_fn(order, order, |_, _| rand_c(&mut rng));
        let y = SkewMatrix::from_upper(order, |_, _| rand_c(&mut rng))?;
        let (l, r) = pfaffian_congruence_identity(&x, &y)?;
        cong = cong.max(l.rel_diff(&r));
    }
    let mut perm = 0.0f64;
    for t in 0..20 {
        let order = 4 + 2 * (t % 4);
        let a = SkewMatrix::from_upper(order, |_, _| rand_c(&mut rng))?;
        let mut idx: Vec<usize> = (0..order).collect();
        idx.shuffle(&mut rng);
        let p = Matrix::from_fn(order, order, |i, j| C::new(if idx[i] == j { 1.0 } else { 0.0 }, 0.0));
        let (l, r) = pfaffian_congruence_identity(&p, &a)?;
        perm = perm.max(l.rel_diff(&r));
    }
    s.bound("pf^2 = det", sq, 1e-10);
    s.bound("block identity", block, 1e-10);
    s.bound("congruence identity", cong, 1e-10);
    s.bound("permutation similarity", perm, 1e-12);
    Ok(())
}

fn correlation_suite(s: &mut Suite, cfg: &RunConfig) -> Step {
    let p = params(cfg)?;
    let model = NessModel::new(p, QuadSpec::with_tol(cfg.quad_tol))?;
    let n0 = if cfg.x0 < 0 { cfg.x0.unsigned_abs() as usize } else { 0 };
    let n = cfg.n_max.min(12).max(n0 + 4);
    let d = assemble_theta(&model, n)?;
    let st = assemble_theta_structured(&model, n, cfg.hankel_mode)?;
    s.bound(&format!("path equivalence (hankel mode {})", cfg.hankel_mode), d.matrix.max_abs_diff(&st.matrix), 1e-8);
    let mut pf = 0.0f64;
    for m in 1..=6.min(n) {
        let lead = d.matrix.leading(m);
        pf = pf.max(pfaffian(&full_skew_from_theta(&lead)?).rel_diff(&logdet(&lead)?));
    }
    s.bound("pf(full skew) = det(theta)", pf, 1e-10);
    let prof = efp_profile(&model, n, AssemblyPath::Direct)?;
    let vals: Vec<f64> = prof.iter().map(|v| v.value().re).collect();
    let range = vals.iter().map(|&v| (-v).max(v - 1.0)).fold(0.0f64, f64::max);
    s.bound("0 <= P(n) <= 1", range, 0.0);
    let worst_step = vals.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    s.holds("P(n+1) < P(n)", worst_step, worst_step < 0.0);
    s.bound("Hermitian symmetry", d.matrix.hermitian_defect(), 1e-12);
    Ok(())
}

fn szego_suite(s: &mut Suite, cfg: &RunConfig) -> Step {
    let q = quad(cfg)?;
    let p = params(cfg)?;
    let mut identity = 0.0f64;
    for (bl, br, kappa) in [(p.beta_left, p.beta_right, p.kappa), (0.5, 2.0, 0.2), (1.0, 3.0, 1.0), (0.2, 0.7, 5.0)] {
        let pp = ChainParams::new(bl, br, kappa, 0, 0)?;
        let r = decay_rates(&pp, &q)?;
        let g = geometric_mean(&ness_efp::model::toeplitz_symbol(&pp), &q)?;
        identity = identity.max((r.gamma_total - g.rate).abs()).max(r.rewrite_defect);
    }
    s.bound("rate identity", identity, 1e-10);
    let r = decay_rates(&p, &q)?;
    if p.delta() > 0.0 {
        let ok = 0.0 < r.gamma_l && r.gamma_l < r.gamma_b && r.gamma_b < r.gamma_r;
        s.holds("0 < Gamma_L < Gamma_B < Gamma_R", r.gamma_b, ok);
    } else {
        let spread = (r.gamma_l - r.gamma_b).abs().max((r.gamma_b - r.gamma_r).abs());
        s.bound("Gamma_L = Gamma_B = Gamma_R", spread, 1e-12);
    }
    let mut last = f64::NEG_INFINITY;
    let mut drop = 0.0f64;
    for kappa in [0.05, 0.2, 1.0, 5.0] {
        let g = decay_rates(&p.with_kappa(kappa)?, &q)?.gamma_b;
        drop = drop.max(last - g);
        last = g;
    }
    s.bound("Gamma_B nondecreasing in kappa", drop.max(0.0), 1e-12);
    let small = decay_rates(&p.with_kappa(1e-4)?, &q)?;
    let large = decay_rates(&p.with_kappa(1e4)?, &q)?;
    s.bound("Gamma_B -> Gamma_L as kappa -> 0", (small.gamma_b - small.gamma_l).abs(), 1e-3);
    s.bound("Gamma_B -> Gamma_R as kappa -> infinity", (large.gamma_b - large.gamma_r).abs(), 1e-3);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=20_000 {
        let a = toeplitz_value(&p, -PI + 2.0 * PI * i as f64 / 20_000.0);
        lo = lo.min(a);
        hi = hi.max(a);
    }
    let ends = (lo - fermi_side(0.0, p.beta_right, Pm::Minus)).abs().max((hi - fermi_side(0.0, p.beta_right, Pm::Plus)).abs());
    s.bound("range of a", ends, 1e-10);
    Ok(())
}

fn oracle_suite(s: &mut Suite, cfg: &RunConfig) -> Step {
    let p = params(cfg)?;
    let small = FiniteVolumeSpec::new(40.max(10 * cfg.sample_radius), 10.0, 4, 0.5)?;
    let (sm, sp) = (initial_density(&small, &p, Pm::Minus), initial_density(&small, &p, Pm::Plus));
    let d = sm.rows();
    let mut id = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            id = id.max((sm[(i, j)] + sp[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    s.bound("s0+ + s0- = identity", id, 1e-12);
    let n = cfg.n_max.min(4);
    let short = FiniteVolume::new(FiniteVolumeSpec::new(80.max(10 * cfg.sample_radius), 30.0, 8, 0.5)?, p)?;
    let mut imag = 0.0f64;
    for &(t, _) in &short.spec().time_grid() {
        let th = short.theta_at_time(t, n)?;
        for m in 1..=n {
            imag = imag.max(logdet(&th.matrix.leading(m))?.value().im.abs());
        }
    }
    s.bound("det theta(t) real", imag, 1e-10);
    let fv = FiniteVolume::new(FiniteVolumeSpec::new(cfg.oracle_window, cfg.oracle_horizon, cfg.oracle_samples, 0.5)?, p)?;
    let brute = fv.efp_time_average_profile(n)?;
    let exact = efp_profile(&NessModel::new(p, QuadSpec::with_tol(cfg.quad_tol))?, n, AssemblyPath::Direct)?;
    let worst = brute.iter().zip(&exact).map(|(b, e)| (b - e.value().re).abs()).fold(0.0f64, f64::max);
    s.bound("Cesaro mean vs steady state", worst, 5e-3);
    // the gap e_B - 1 must be O(1) for short horizons to be asymptotic
    let pk = p.with_kappa(1.0)?;
    let want = efp_profile(&NessModel::new(pk, QuadSpec::with_tol(cfg.quad_tol))?, 2, AssemblyPath::Direct)?[1].value().re;
    let mut env = Vec::new();
    for t1 in [20.0, 40.0, 80.0] {
        let mut e = 0.0f64;
        for k in 0..8 {
            let t = t1 * (1.0 + k as f64 / 8.0);
            let fv = FiniteVolume::new(FiniteVolumeSpec::new(200, t, (4.0 * t) as usize, 0.5)?, pk.with_x0(1))?;
            e = e.max((fv.efp_time_average(2)? - want).abs());
        }
        env.push(e);
    }
    let ratio = (env[1] / env[0]).max(env[2] / env[1]);
    s.bound("doubling T halves the Cesaro fluctuation", ratio, 0.5);
    let hb = ness_efp::oracle::build_hamiltonians(&FiniteVolumeSpec::new(500, 1.0, 2, 0.0)?, &p.with_kappa(0.5)?).hb;
    let top = tridiagonal_eigen(&hb.diag, &hb.off, false).values.into_iter().filter(|&e| e > 1.0).fold(f64::INFINITY, f64::min);
    s.bound("bound-state eigenvalue at M = 500", (top - 1.25f64.sqrt()).abs(), 1e-6);
    Ok(())
}

fn cli_suite(s: &mut Suite, _cfg: &RunConfig) -> Step {
    let mut t = Table::new(&["x"]);
    for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
        t.push(vec![Cell::Float(v)]);
    }
    let a = t.render(Format::Csv);
    let b = t.render(Format::Csv);
    s.holds("byte-identical output", 0.0, a == b && t.render(Format::Json) == t.render(Format::Json));
    let mut bad = 0.0;
    for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
        let f = float(v);
        let digits = f.split('e').next().unwrap_or("").chars().filter(char::is_ascii_digit).count();
        if digits != 17 || f.parse::<f64>().map(f64::to_bits) != Ok(v.to_bits()) {
            bad += 1.0;
        }
    }
    s.bound("17 significant digits", bad, 0.0);
    Ok(())
}

pub const SUITES: [&str; 8] = ["model", "spectral", "scattering", "pfaffian", "correlation", "szego", "oracle", "cli"];

pub fn verify(cfg: &RunConfig) -> Vec<Check> {
    let bodies: [fn(&mut Suite, &RunConfig) -> Step; 8] = [
        model_suite,
        spectral_suite,
        scattering_suite,
        pfaffian_suite,
        correlation_suite,
        szego_suite,
        oracle_suite,
        cli_suite,
    ];
    SUITES.iter().zip(bodies).flat_map(|(name, body)| run(name, cfg, body)).collect()
}

pub fn report(checks: &[Check]) -> Table {
    let mut t = Table::new(&["suite", "check", "measured", "tolerance", "pass"]);
    for c in checks {
        t.push(vec![c.suite.into(), c.name.clone().into(), c.measured.into(), c.tolerance.into(), c.pass.into()]);
    }
    t
}
