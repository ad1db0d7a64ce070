//! `ness-efp`: tables of the steady-state emptiness formation probability,
//! decay rates, symbol samples, finite-volume comparisons and invariant
//! reports.

mod commands;
mod config;
mod output;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Failure;
use config::RunConfig;

const COLUMNS: &str = "\
Output columns (CSV header order; JSON uses the same keys):
  compute  n, P, log10_P, ratio_to_G_power
  rates    gamma_l, gamma_r, gamma_b, gamma_total, rewrite_defect, ordered
  symbol   k, a, b_re, b_im
  oracle   n, P_oracle, P, abs_diff
  fit      n_lo, n_hi, slope, gamma_total, relative_error, last_increment, last_ratio
  verify   suite, check, measured, tolerance, pass

Config files hold `key = value` lines with the flag names in snake_case
(beta_left, n_max, ...); `#` starts a comment. Flags override the file.

Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 verification failure.";

#[derive(Parser)]
#[command(name = "ness-efp", version, about = "Steady-state emptiness formation probability of the XY chain with a magnetic impurity", after_help = COLUMNS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate P(n) for n = 1..n_max.
    Compute(Opts),
    /// Decay rates and their ordering.
    Rates(Opts),
    /// Run every invariant suite; exit 4 if any check fails.
    Verify(Opts),
    /// Sample the Toeplitz and Hankel symbols on [-pi, pi].
    Symbol(Opts),
    /// Compare P(n) with the finite-volume time average (n_max <= 8).
    Oracle(Opts),
    /// Fit the decay slope of -ln P(n) on [n_max/2, n_max].
    Fit(Opts),
}

#[derive(Args, Default)]
struct Opts {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_name = "BETA")]
    beta_left: Option<String>,
    #[arg(long, value_name = "BETA")]
    beta_right: Option<String>,
    #[arg(long)]
    kappa: Option<String>,
    /// First site of the string.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long, value_name = "N")]
    sample_radius: Option<String>,
    #[arg(long, value_name = "N")]
    n_max: Option<String>,
    #[arg(long, value_name = "TOL")]
    quad_tol: Option<String>,
    /// A or B.
    #[arg(long, value_name = "MODE")]
    hankel_mode: Option<String>,
    /// direct or structured.
    #[arg(long)]
    path: Option<String>,
    #[arg(long, value_name = "M")]
    oracle_window: Option<String>,
    #[arg(long, value_name = "T")]
    oracle_horizon: Option<String>,
    #[arg(long, value_name = "S")]
    oracle_samples: Option<String>,
    /// Grid size for `symbol`.
    #[arg(long)]
    points: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Opts {
    fn resolve(&self) -> Result<RunConfig, Failure> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags = [
            ("beta_left", &self.beta_left),
            ("beta_right", &self.beta_right),
            ("kappa", &self.kappa),
            ("x0", &self.x0),
            ("sample_radius", &self.sample_radius),
            ("n_max", &self.n_max),
            ("quad_tol", &self.quad_tol),
            ("hankel_mode", &self.hankel_mode),
            ("path", &self.path),
            ("oracle_window", &self.oracle_window),
            ("oracle_horizon", &self.oracle_horizon),
            ("oracle_samples", &self.oracle_samples),
            ("points", &self.points),
            ("format", &self.format),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v).map_err(Failure::Config)?;
            }
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), Failure> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure::Config(format!("cannot write to stdout: {e}")))
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let (opts, job): (&Opts, fn(&RunConfig) -> Result<output::Table, Failure>) = match &cli.command {
        Command::Compute(o) => (o, commands::compute),
        Command::Rates(o) => (o, commands::rates),
        Command::Symbol(o) => (o, commands::symbol),
        Command::Oracle(o) => (o, commands::oracle),
        Command::Fit(o) => (o, commands::fit),
        Command::Verify(o) => {
            let cfg = o.resolve()?;
            let (table, ok) = commands::verify(&cfg)?;
            emit(&cfg, &table.render(cfg.format))?;
            return Ok(ok);
        }
    };
    let cfg = opts.resolve()?;
    let table = job(&cfg)?;
    emit(&cfg, &table.render(cfg.format))?;
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
