//! `adeheat`: kernel tables, shell masses, CDFs, sampling and path runs,
//! eigenvalue tables, the Archimedean factor, the adelic product, and the
//! verification battery.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage/config error,
//! 3 precision/resource error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use adeheat::Error;
use clap::{Parser, Subcommand};

use commands::AdelicMode;
use config::{parse_f64_list, RunConfig};

#[derive(Parser)]
#[command(name = "adeheat", version, about = "Heat kernels and jump processes on the adele rings")]
struct Cli {
    /// JSON config file; flags override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Filtration config as inline JSON, e.g. '{"type":"prime_power","p":2}'
    #[arg(long, global = true)]
    filtration: Option<String>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Kernel values with bound checks, one row per (m, t)
    Kernel {
        #[arg(long, value_parser = parse_f64_list)]
        t_grid: Option<Vec<f64>>,
        #[arg(long)]
        m_lo: Option<i64>,
        #[arg(long)]
        m_hi: Option<i64>,
    },
    /// Shell masses and the radial CDF at one time
    Shells {
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        m_lo: Option<i64>,
        #[arg(long)]
        m_hi: Option<i64>,
    },
    /// Radial CDF table with tail bounds
    Cdf {
        #[arg(long, value_parser = parse_f64_list)]
        t_grid: Option<Vec<f64>>,
        #[arg(long)]
        k_lo: Option<i64>,
        #[arg(long)]
        k_hi: Option<i64>,
    },
    /// Ensemble of increment draws with a goodness-of-fit summary
    Sample {
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        draws: Option<u64>,
    },
    /// One trajectory on a uniform time grid
    Path {
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Run the verification battery (all checks, or --check by name)
    Verify {
        /// Run only the named check (repeatable)
        #[arg(long = "check")]
        checks: Vec<String>,
        /// Monte-Carlo draws for the law checks
        #[arg(long, default_value_t = 1_000_000)]
        mc_draws: u64,
        /// Path count for the two-step marginal check
        #[arg(long, default_value_t = 100_000)]
        mc_paths: u64,
    },
    /// Eigenvalue table of the generator
    Spectrum {
        #[arg(long)]
        n_lo: Option<i64>,
        #[arg(long)]
        n_hi: Option<i64>,
    },
    /// Archimedean β-stable kernel table with the fitted bound
    Arch {
        #[arg(long, value_parser = parse_f64_list)]
        t_grid: Option<Vec<f64>>,
        #[arg(long)]
        x_lo: Option<f64>,
        #[arg(long)]
        x_hi: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Adelic product kernel: eval table, sample ensemble, or path
    Adelic {
        #[arg(long, value_enum, default_value = "eval")]
        mode: AdelicMode,
        #[arg(long, value_parser = parse_f64_list)]
        t_grid: Option<Vec<f64>>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        draws: Option<u64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        m_lo: Option<i64>,
        #[arg(long)]
        m_hi: Option<i64>,
    },
}

fn merge(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(f) = &cli.filtration {
        cfg.filtration = serde_json::from_str(f)
            .map_err(|e| Error::usage(format!("malformed --filtration JSON: {e}")))?;
    }
    if let Some(a) = cli.alpha {
        cfg.alpha = a;
    }
    if let Some(b) = cli.beta {
        cfg.beta = b;
    }
    if let Some(tol) = cli.tolerance {
        cfg.tolerance = tol;
    }
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }

    match &cli.cmd {
        Cmd::Kernel { t_grid, m_lo, m_hi } => {
            if let Some(g) = t_grid {
                cfg.t_grid = g.clone();
            }
            cfg.m_lo = m_lo.unwrap_or(cfg.m_lo);
            cfg.m_hi = m_hi.unwrap_or(cfg.m_hi);
        }
        Cmd::Shells { t, m_lo, m_hi } => {
            cfg.t = t.unwrap_or(cfg.t);
            cfg.m_lo = m_lo.unwrap_or(cfg.m_lo);
            cfg.m_hi = m_hi.unwrap_or(cfg.m_hi);
        }
        Cmd::Cdf { t_grid, k_lo, k_hi } => {
            if let Some(g) = t_grid {
                cfg.t_grid = g.clone();
            }
            cfg.k_lo = k_lo.unwrap_or(cfg.k_lo);
            cfg.k_hi = k_hi.unwrap_or(cfg.k_hi);
        }
        Cmd::Sample { t, draws } => {
            cfg.t = t.unwrap_or(cfg.t);
            cfg.draws = draws.unwrap_or(cfg.draws);
        }
        Cmd::Path { t_max, steps } => {
            cfg.t_max = t_max.unwrap_or(cfg.t_max);
            cfg.steps = steps.unwrap_or(cfg.steps);
        }
        Cmd::Verify { checks, .. } => {
            if !checks.is_empty() {
                cfg.checks = checks.clone();
            }
        }
        Cmd::Spectrum { n_lo, n_hi } => {
            cfg.n_lo = n_lo.unwrap_or(cfg.n_lo);
            cfg.n_hi = n_hi.unwrap_or(cfg.n_hi);
        }
        Cmd::Arch {
            t_grid,
            x_lo,
            x_hi,
            points,
        } => {
            if let Some(g) = t_grid {
                cfg.t_grid = g.clone();
            }
            cfg.x_lo = x_lo.unwrap_or(cfg.x_lo);
            cfg.x_hi = x_hi.unwrap_or(cfg.x_hi);
            cfg.points = points.unwrap_or(cfg.points);
        }
        Cmd::Adelic {
            t_grid,
            t,
            draws,
            t_max,
            steps,
            m_lo,
            m_hi,
            ..
        } => {
            if let Some(g) = t_grid {
                cfg.t_grid = g.clone();
            }
            cfg.t = t.unwrap_or(cfg.t);
            cfg.draws = draws.unwrap_or(cfg.draws);
            cfg.t_max = t_max.unwrap_or(cfg.t_max);
            cfg.steps = steps.unwrap_or(cfg.steps);
            cfg.m_lo = m_lo.unwrap_or(cfg.m_lo);
            cfg.m_hi = m_hi.unwrap_or(cfg.m_hi);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let cfg = merge(cli)?;
    match &cli.cmd {
        Cmd::Kernel { .. } => commands::cmd_kernel(&cfg),
        Cmd::Shells { .. } => commands::cmd_shells(&cfg).map(|_| true),
        Cmd::Cdf { .. } => commands::cmd_cdf(&cfg),
        Cmd::Sample { .. } => commands::cmd_sample(&cfg).map(|_| true),
        Cmd::Path { .. } => commands::cmd_path(&cfg).map(|_| true),
        Cmd::Verify {
            mc_draws, mc_paths, ..
        } => commands::cmd_verify(&cfg, *mc_draws, *mc_paths),
        Cmd::Spectrum { .. } => commands::cmd_spectrum(&cfg).map(|_| true),
        Cmd::Arch { .. } => commands::cmd_arch(&cfg).map(|_| true),
        Cmd::Adelic { mode, .. } => commands::cmd_adelic(&cfg, *mode).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            match e {
                Error::Usage(_) => ExitCode::from(2),
                Error::Precision(_) | Error::Resource(_) => ExitCode::from(3),
            }
        }
    }
}
