//! Command bodies. Every command writes CSV (or a JSON report) to the
//! configured output and is byte-reproducible from (config, seed).

use std::fs::File;
use std::io::{BufWriter, Write};

use adeheat::adelic::{simulate_adelic_path, AdelicKernel, AdelicSampler};
use adeheat::markov::{derive_stream, goodness_of_fit, FiniteAdeleSampler, ShellFrequencies};
use adeheat::verify::{run_named, VerifyConfig};
use adeheat::{Error, Filtration, FiniteAdele, HeatKernelFin, Result, StableKernel};

use crate::config::RunConfig;

fn writer(cfg: &RunConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(path) => {
            let f = File::create(path)
                .map_err(|e| Error::usage(format!("cannot create {path:?}: {e}")))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn io_err(e: std::io::Error) -> Error {
    Error::usage(format!("write failed: {e}"))
}

fn kernel_of(cfg: &RunConfig) -> Result<HeatKernelFin> {
    let filt = Filtration::from_config(&cfg.filtration)?;
    HeatKernelFin::new(&filt, cfg.alpha, None, Some(cfg.tolerance))
}

fn digits_prefix(x: &FiniteAdele) -> String {
    x.digits()
        .iter()
        .take(8)
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("|")
}

fn state_row(t: f64, x: &FiniteAdele) -> String {
    match x.norm_index() {
        Some(m) => format!(
            "{t},{m},{},{},{}",
            x.norm_f64(),
            x.order().unwrap(),
            digits_prefix(x)
        ),
        None => format!("{t},-inf,0,inf,"),
    }
}

/// `kernel`: one row per (m, t); returns whether every bound held.
pub fn cmd_kernel(cfg: &RunConfig) -> Result<bool> {
    let hk = kernel_of(cfg)?;
    let mut w = writer(cfg)?;
    writeln!(
        w,
        "m,t,radius,Z,lower_bound_check,upper_bound_check,shell_mass"
    )
    .map_err(io_err)?;
    let mut all_ok = true;
    for m in cfg.m_lo..=cfg.m_hi {
        for &t in &cfg.t_grid {
            let z = hk.kernel_radial(m, t)?;
            let radius = hk.filtration().value_f64(m)?;
            let lower_ok = z >= 0.0;
            let ptw = hk.pointwise_bound_check(m, t)?;
            let upper_ok = ptw.holds && z <= hk.gamma_sup_bound(t) * (1.0 + 1e-9);
            all_ok &= lower_ok && upper_ok;
            let mass = hk.shell_mass(m, t)?;
            writeln!(
                w,
                "{m},{t},{radius},{z},{},{},{mass}",
                if lower_ok { "pass" } else { "fail" },
                if upper_ok { "pass" } else { "fail" },
            )
            .map_err(io_err)?;
        }
    }
    Ok(all_ok)
}

/// `shells`: shell-mass table at one time.
pub fn cmd_shells(cfg: &RunConfig) -> Result<()> {
    let hk = kernel_of(cfg)?;
    let t = cfg.t;
    let mut w = writer(cfg)?;
    writeln!(w, "m,radius,shell_mass,cdf").map_err(io_err)?;
    for m in cfg.m_lo..=cfg.m_hi {
        let radius = hk.filtration().value_f64(m)?;
        let mass = hk.shell_mass(m, t)?;
        let cdf = hk.radial_cdf(m, t)?;
        writeln!(w, "{m},{radius},{mass},{cdf}").map_err(io_err)?;
    }
    Ok(())
}

/// `cdf`: radial CDF with its tail bound; returns whether the bound held.
pub fn cmd_cdf(cfg: &RunConfig) -> Result<bool> {
    let hk = kernel_of(cfg)?;
    let mut w = writer(cfg)?;
    writeln!(w, "k,t,cdf,complement,tail_bound,pass").map_err(io_err)?;
    let mut all_ok = true;
    for k in cfg.k_lo..=cfg.k_hi {
        for &t in &cfg.t_grid {
            let cdf = hk.radial_cdf(k, t)?;
            let comp = hk.complement_cdf(k, t)?;
            let bound = hk.tail_bound(k, t)?;
            let ok = comp <= bound * (1.0 + 1e-9) + 1e-300;
            all_ok &= ok;
            writeln!(
                w,
                "{k},{t},{cdf},{comp},{bound},{}",
                if ok { "pass" } else { "fail" }
            )
            .map_err(io_err)?;
        }
    }
    Ok(all_ok)
}

fn write_summary(cfg: &RunConfig, summary: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    match &cfg.out {
        Some(path) => {
            let mut p = path.clone();
            p.set_extension("summary.json");
            std::fs::write(&p, text).map_err(|e| Error::usage(format!("write {p:?}: {e}")))?;
        }
        None => eprintln!("{text}"),
    }
    Ok(())
}

/// `sample`: an ensemble of increments at one time, plus a goodness-of-fit
/// summary against the exact shell masses.
pub fn cmd_sample(cfg: &RunConfig) -> Result<()> {
    let seed = cfg.require_seed()?;
    let hk = kernel_of(cfg)?;
    let sampler = FiniteAdeleSampler::new(&hk, cfg.t, None)?;
    let mut rng = derive_stream(seed, 0);

    let mut w = writer(cfg)?;
    writeln!(w, "t,norm_index,norm,gamma,digits_prefix").map_err(io_err)?;
    let shells: Vec<i64> = sampler.shell_masses().map(|(m, _)| m).collect();
    let probs: Vec<f64> = sampler.shell_masses().map(|(_, p)| p).collect();
    let lo = shells[0];
    let mut counts = vec![0u64; shells.len()];
    for _ in 0..cfg.draws {
        let x = sampler.sample(&mut rng)?;
        counts[(x.norm_index().unwrap() - lo) as usize] += 1;
        writeln!(w, "{}", state_row(cfg.t, &x)).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;

    let gof = goodness_of_fit(&counts, &probs, cfg.draws)?;
    let freq = ShellFrequencies {
        shells,
        counts,
        draws: cfg.draws,
    };
    let summary = serde_json::json!({
        "schema_version": 1,
        "command": "sample",
        "t": cfg.t,
        "draws": cfg.draws,
        "seed": seed,
        "shell_frequencies": freq,
        "goodness_of_fit": gof,
    });
    write_summary(cfg, &summary)
}

/// `path`: one trajectory on a uniform grid.
pub fn cmd_path(cfg: &RunConfig) -> Result<()> {
    let seed = cfg.require_seed()?;
    let hk = kernel_of(cfg)?;
    if cfg.steps == 0 || !(cfg.t_max > 0.0) {
        return Err(Error::usage("path needs steps >= 1 and t_max > 0"));
    }
    let times: Vec<f64> = (0..=cfg.steps)
        .map(|i| cfg.t_max * i as f64 / cfg.steps as f64)
        .collect();
    let mut rng = derive_stream(seed, 0);
    let path = adeheat::markov::simulate_path(&hk, &times, None, None, &mut rng)?;
    let mut w = writer(cfg)?;
    writeln!(w, "t,norm_index,norm,gamma,digits_prefix").map_err(io_err)?;
    for (t, x) in path.times.iter().zip(&path.states) {
        writeln!(w, "{}", state_row(*t, x)).map_err(io_err)?;
    }
    Ok(())
}

/// `verify`: the check battery; returns the overall pass flag.
pub fn cmd_verify(cfg: &RunConfig, mc_draws: u64, path_count: u64) -> Result<bool> {
    let vcfg = VerifyConfig {
        seed: cfg.seed.unwrap_or(7),
        mc_draws,
        path_count,
        tolerance: cfg.tolerance,
    };
    let report = run_named(&vcfg, &cfg.checks)?;
    for c in &report.checks {
        eprintln!(
            "{:<22} {}  measured {:.3e}  tolerance {:.1e}",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.measured,
            c.tolerance
        );
    }
    let mut w = writer(cfg)?;
    writeln!(
        w,
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    )
    .map_err(io_err)?;
    Ok(report.pass)
}

/// `spectrum`: eigenvalue table `e^{αψ(n)}` with eigenfunction data.
pub fn cmd_spectrum(cfg: &RunConfig) -> Result<()> {
    let hk = kernel_of(cfg)?;
    let filt = hk.filtration().clone();
    let mut w = writer(cfg)?;
    writeln!(w, "n,psi_ln,eigenvalue,eigenfunction_at_zero").map_err(io_err)?;
    for n in cfg.n_lo..=cfg.n_hi {
        let psi = filt.ln_value(n)?;
        let lam = (cfg.alpha * psi).exp();
        let at_zero = filt.sphere_measure_f64(n)?;
        writeln!(w, "{n},{psi},{lam},{at_zero}").map_err(io_err)?;
    }
    Ok(())
}

/// `arch`: stable-kernel table with the fitted classical bound.
pub fn cmd_arch(cfg: &RunConfig) -> Result<()> {
    let kernel = StableKernel::new(cfg.beta)?;
    let xs: Vec<f64> = (0..cfg.points)
        .map(|i| cfg.x_lo + (cfg.x_hi - cfg.x_lo) * i as f64 / (cfg.points - 1) as f64)
        .collect();
    let c = kernel.fit_bound_constant(&xs, &cfg.t_grid)?;
    let mut w = writer(cfg)?;
    writeln!(w, "x,t,beta,Z_inf,bound_rhs").map_err(io_err)?;
    for &t in &cfg.t_grid {
        for &x in &xs {
            let z = kernel.eval(x, t)?;
            let rhs = kernel.bound_rhs(x, t, c);
            writeln!(w, "{x},{t},{},{z},{rhs}", cfg.beta).map_err(io_err)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum AdelicMode {
    Eval,
    Sample,
    Path,
}

/// `adelic`: product-kernel tables, ensembles, or paths on `A`.
pub fn cmd_adelic(cfg: &RunConfig, mode: AdelicMode) -> Result<()> {
    let hk = kernel_of(cfg)?;
    let arch = StableKernel::new(cfg.beta)?;
    let kernel = AdelicKernel::new(hk.clone(), arch);
    match mode {
        AdelicMode::Eval => {
            let xs: Vec<f64> = (0..cfg.points)
                .map(|i| cfg.x_lo + (cfg.x_hi - cfg.x_lo) * i as f64 / (cfg.points - 1) as f64)
                .collect();
            let mut w = writer(cfg)?;
            writeln!(w, "t,x_real,norm_index,Z_A").map_err(io_err)?;
            for &t in &cfg.t_grid {
                for m in cfg.m_lo..=cfg.m_hi {
                    let zf = hk.kernel_radial(m, t)?;
                    for &x in &xs {
                        let z = zf * kernel.archimedean().eval(x, t)?;
                        writeln!(w, "{t},{x},{m},{z}").map_err(io_err)?;
                    }
                }
            }
        }
        AdelicMode::Sample => {
            let seed = cfg.require_seed()?;
            let mut sampler = AdelicSampler::new(&kernel, cfg.t, seed)?;
            let mut w = writer(cfg)?;
            writeln!(w, "t,norm_index,norm,gamma,digits_prefix,x_real").map_err(io_err)?;
            for _ in 0..cfg.draws {
                let p = sampler.sample()?;
                writeln!(w, "{},{}", state_row(cfg.t, &p.finite), p.real).map_err(io_err)?;
            }
        }
        AdelicMode::Path => {
            let seed = cfg.require_seed()?;
            if cfg.steps == 0 || !(cfg.t_max > 0.0) {
                return Err(Error::usage("path needs steps >= 1 and t_max > 0"));
            }
            let times: Vec<f64> = (0..=cfg.steps)
                .map(|i| cfg.t_max * i as f64 / cfg.steps as f64)
                .collect();
            let path = simulate_adelic_path(&kernel, &times, seed)?;
            let mut w = writer(cfg)?;
            writeln!(w, "t,norm_index,norm,gamma,digits_prefix,x_real").map_err(io_err)?;
            for (t, p) in path.times.iter().zip(&path.states) {
                writeln!(w, "{},{}", state_row(*t, &p.finite), p.real).map_err(io_err)?;
            }
        }
    }
    Ok(())
}
