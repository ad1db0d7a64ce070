use ness_efp::correlation::{efp_profile, AssemblyPath, NessModel};
use ness_efp::model::{toeplitz_symbol, Pm};
use ness_efp::oracle::FiniteVolume;
use ness_efp::szego::{asymptotic_profile, decay_rates, hankel_symbol};
use ness_efp::Error;
use std::f64::consts::{LN_10, PI};

use crate::config::{ConfigError, RunConfig};
use crate::output::Table;
use crate::verify;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::WindowTooSmall { .. } | Error::LightCone { .. } => {
                Failure::Config(e.to_string())
            }
            other => Failure::Numeric(other.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Params(inner) => inner.into(),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn model(cfg: &RunConfig) -> Result<NessModel<f64>, Failure> {
    Ok(NessModel::new(cfg.params()?, cfg.quad()?)?)
}

pub fn compute(cfg: &RunConfig) -> Result<Table, Failure> {
    let prof = asymptotic_profile(&model(cfg)?, cfg.n_max, cfg.assembly())?;
    let mut t = Table::new(&["n", "P", "log10_P", "ratio_to_G_power"]);
    for (i, (lp, lr)) in prof.log_p.iter().zip(&prof.log_ratio).enumerate() {
        t.push(vec![(i + 1).into(), lp.exp().into(), (lp / LN_10).into(), lr.exp().into()]);
    }
    Ok(t)
}

pub fn rates(cfg: &RunConfig) -> Result<Table, Failure> {
    let m = model(cfg)?;
    let r = decay_rates(m.params(), m.integrator())?;
    Ok(Table::record(vec![
        ("gamma_l", r.gamma_l.into()),
        ("gamma_r", r.gamma_r.into()),
        ("gamma_b", r.gamma_b.into()),
        ("gamma_total", r.gamma_total.into()),
        ("rewrite_defect", r.rewrite_defect.into()),
        ("ordered", r.strictly_ordered().into()),
    ]))
}

pub fn symbol(cfg: &RunConfig) -> Result<Table, Failure> {
    let m = model(cfg)?;
    let a = toeplitz_symbol(m.params());
    let b = hankel_symbol(m.params(), cfg.hankel_mode, m.overlap(Pm::Minus))?;
    let mut t = Table::new(&["k", "a", "b_re", "b_im"]);
    let last = (cfg.points - 1) as f64;
    for i in 0..cfg.points {
        let k = -PI + 2.0 * PI * i as f64 / last;
        let bk = b.eval(k);
        t.push(vec![k.into(), a.eval(k).re.into(), bk.re.into(), bk.im.into()]);
    }
    Ok(t)
}

pub fn oracle(cfg: &RunConfig) -> Result<Table, Failure> {
    if cfg.n_max > 8 {
        return Err(Failure::Config(format!("oracle runs need n_max <= 8, got {}", cfg.n_max)));
    }
    let fv = FiniteVolume::new(cfg.oracle()?, cfg.params()?)?;
    let brute = fv.efp_time_average_profile(cfg.n_max)?;
    let exact = efp_profile(&model(cfg)?, cfg.n_max, AssemblyPath::Direct)?;
    let mut t = Table::new(&["n", "P_oracle", "P", "abs_diff"]);
    for (i, (b, e)) in brute.iter().zip(&exact).enumerate() {
        let e = e.value().re;
        t.push(vec![(i + 1).into(), (*b).into(), e.into(), (b - e).abs().into()]);
    }
    Ok(t)
}

pub fn fit(cfg: &RunConfig) -> Result<Table, Failure> {
    if cfg.n_max < 4 {
        return Err(Failure::Config(format!("fit needs n_max >= 4, got {}", cfg.n_max)));
    }
    let m = model(cfg)?;
    let r = decay_rates(m.params(), m.integrator())?;
    let prof = asymptotic_profile(&m, cfg.n_max, cfg.assembly())?;
    let (lo, hi) = (cfg.n_max / 2, cfg.n_max);
    let slope = prof.fitted_slope(lo, hi);
    Ok(Table::record(vec![
        ("n_lo", lo.into()),
        ("n_hi", hi.into()),
        ("slope", slope.into()),
        ("gamma_total", r.gamma_total.into()),
        ("relative_error", ((slope - r.gamma_total) / r.gamma_total).abs().into()),
        ("last_increment", prof.increments().last().copied().unwrap_or(f64::NAN).into()),
        ("last_ratio", prof.last_ratio().into()),
    ]))
}

/// Report plus the overall verdict.
pub fn verify(cfg: &RunConfig) -> Result<(Table, bool), Failure> {
    cfg.validate()?;
    let checks = verify::verify(cfg);
    let ok = checks.iter().all(|c| c.pass);
    Ok((verify::report(&checks), ok))
}
