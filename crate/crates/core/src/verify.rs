//! The verification battery: every identity and bound the kernels satisfy,
//! as machine-checkable reports.
//!
//! Each check runs a fixed grid, pins its tolerance in code, and reports
//! the measured quantity next to it. The CLI `verify` subcommand and the
//! acceptance test suite both run through this module, so there is exactly
//! one implementation of each criterion.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::adele::FiniteAdele;
use crate::adelic::{dirac_limit_report, AdelicKernel, AdelicSampler};
use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::heat::{convolve_radial, HeatKernelFin};
use crate::markov::{derive_stream, goodness_of_fit, FiniteAdeleSampler, ShellFrequencies};
use crate::schwartz::{char_integral_sphere, space_dim, NormValue, RadialProfile, TestFunction};
use crate::stable::StableKernel;

/// Sizes and seeds of the randomized checks.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub mc_draws: u64,
    pub path_count: u64,
    pub tolerance: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 7,
            mc_draws: 1_000_000,
            path_count: 100_000,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// The measured quantity; its meaning (max defect, p-value, …) is in
    /// `detail`.
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

type CheckFn = fn(&VerifyConfig) -> Result<CheckResult>;

/// Registry of all named checks, in report order.
pub const CHECK_NAMES: &[&str] = &[
    "normalization",
    "series_oracle",
    "bound_gamma",
    "bound_pointwise",
    "bound_tail",
    "chapman_kolmogorov",
    "spectral",
    "parseval",
    "padic_oracle",
    "mc_shell_law",
    "mc_tv",
    "arch_closed_form",
    "arch_sampler_gauss",
    "arch_sampler_cauchy",
    "arch_bound",
    "adelic_product",
    "adelic_two_step",
    "dirac_limit",
];

fn registry(name: &str) -> Option<CheckFn> {
    Some(match name {
        "normalization" => check_normalization,
        "series_oracle" => check_series_oracle,
        "bound_gamma" => check_bound_gamma,
        "bound_pointwise" => check_bound_pointwise,
        "bound_tail" => check_bound_tail,
        "chapman_kolmogorov" => check_chapman_kolmogorov,
        "spectral" => check_spectral,
        "parseval" => check_parseval,
        "padic_oracle" => check_padic_oracle,
        "mc_shell_law" => check_mc_shell_law,
        "mc_tv" => check_mc_tv,
        "arch_closed_form" => check_arch_closed_form,
        "arch_sampler_gauss" => check_arch_sampler_gauss,
        "arch_sampler_cauchy" => check_arch_sampler_cauchy,
        "arch_bound" => check_arch_bound,
        "adelic_product" => check_adelic_product,
        "adelic_two_step" => check_adelic_two_step,
        "dirac_limit" => check_dirac_limit,
        _ => return None,
    })
}

/// Runs the named checks (all of them for an empty list).
pub fn run_named(cfg: &VerifyConfig, names: &[String]) -> Result<VerifyReport> {
    let selected: Vec<&str> = if names.is_empty() {
        CHECK_NAMES.to_vec()
    } else {
        let mut v = Vec::new();
        for n in names {
            if registry(n).is_none() {
                return Err(Error::usage(format!(
                    "unknown check {n:?}; available: {}",
                    CHECK_NAMES.join(", ")
                )));
            }
            v.push(n.as_str());
        }
        v
    };
    let mut checks = Vec::with_capacity(selected.len());
    for name in selected {
        let f = registry(name).expect("validated above");
        checks.push(f(cfg)?);
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        schema_version: 1,
        checks,
        pass,
    })
}

pub fn run_all(cfg: &VerifyConfig) -> Result<VerifyReport> {
    run_named(cfg, &[])
}

fn builtin_filtrations() -> Vec<Filtration> {
    vec![
        Filtration::factorial(),
        Filtration::prime_power(2).expect("2 is prime"),
        Filtration::lcm(),
    ]
}

const ALPHAS: [f64; 3] = [0.5, 1.0, 2.0];
const TIMES: [f64; 4] = [0.01, 0.1, 1.0, 10.0];

/// Σ shell masses + certified tails = 1 within 1e−10, for every built-in
/// filtration × α × t.
fn check_normalization(cfg: &VerifyConfig) -> Result<CheckResult> {
    let tol = 1e-10;
    let mut worst = 0.0f64;
    let mut at = String::new();
    for filt in builtin_filtrations() {
        for alpha in ALPHAS {
            let hk = HeatKernelFin::new(&filt, alpha, None, Some(cfg.tolerance))?;
            for t in TIMES {
                let mb = hk.mass_balance(t)?;
                let defect =
                    (mb.defect() - mb.tail_low_bound - mb.tail_high_bound).max(0.0);
                if defect > worst {
                    worst = defect;
                    at = format!("{} α={alpha} t={t}", filt.name());
                }
            }
        }
    }
    Ok(CheckResult {
        name: "normalization".into(),
        measured: worst,
        tolerance: tol,
        pass: worst <= tol,
        detail: format!("max normalization defect beyond certified tails, worst at {at}"),
    })
}

/// Independent sphere-decomposition oracle for the radial series:
/// `Z(x,t) = Σ_n exp(−t e^{αψ(n)}) ∫_{S_n} χ(−xξ) dξ`.
fn oracle_sphere_decomposition(
    filt: &Filtration,
    alpha: f64,
    n_lo: i64,
    m: i64,
    t: f64,
) -> Result<f64> {
    let mut acc = 0.0;
    for n in n_lo..=(-m + 1) {
        let weight = (-t * (alpha * filt.ln_value(n)?).exp()).exp();
        if weight == 0.0 {
            continue;
        }
        acc += weight * char_integral_sphere(filt, n, NormValue::Index(m))?;
    }
    Ok(acc)
}

/// kernel_radial against the sphere-decomposition oracle on a 20×10 grid.
fn check_series_oracle(cfg: &VerifyConfig) -> Result<CheckResult> {
    let tol = 1e-10;
    let filt = Filtration::factorial();
    let mut worst = 0.0f64;
    let mut at = String::new();
    for alpha in ALPHAS {
        let hk = HeatKernelFin::new(&filt, alpha, None, Some(cfg.tolerance))?;
        let (n_lo, _) = hk.window();
        for mi in 0..20 {
            let m = -10 + mi as i64;
            for ti in 0..10 {
                let t = 10f64.powf(-2.0 + 3.0 * ti as f64 / 9.0);
                let a = hk.kernel_radial(m, t)?;
                let b = oracle_sphere_decomposition(&filt, alpha, n_lo, m, t)?;
                let d = (a - b).abs();
                if d > worst {
                    worst = d;
                    at = format!("α={alpha} m={m} t={t:.4}");
                }
            }
        }
    }
    Ok(CheckResult {
        name: "series_oracle".into(),
        measured: worst,
        tolerance: tol,
        pass: worst <= tol,
        detail: format!("max |series − sphere-decomposition oracle| on 20×10 grid ×3 α, worst at {at}"),
    })
}

fn max_relative_excess(
    mut probe: impl FnMut(&HeatKernelFin, i64, f64) -> Result<(f64, f64)>,
) -> Result<(f64, String)> {
    let mut worst = f64::NEG_INFINITY;
    let mut at = String::new();
    for filt in builtin_filtrations() {
        for alpha in ALPHAS {
            let hk = HeatKernelFin::new(&filt, alpha, None, None)?;
            for t in TIMES {
                for m in -6..=6 {
                    let (value, bound) = probe(&hk, m, t)?;
                    let excess = (value - bound) / bound.max(1e-300);
                    if excess > worst {
                        worst = excess;
                        at = format!("{} α={alpha} t={t} m={m}", filt.name());
                    }
                }
            }
        }
    }
    Ok((worst, at))
}

/// `Z ≤ Γ(1/α+1) t^{−1/α}` at every evaluated point.
fn check_bound_gamma(_cfg: &VerifyConfig) -> Result<CheckResult> {
    let (worst, at) =
        max_relative_excess(|hk, m, t| Ok((hk.kernel_radial(m, t)?, hk.gamma_sup_bound(t))))?;
    Ok(CheckResult {
        name: "bound_gamma".into(),
        measured: worst.max(0.0),
        tolerance: 1e-9,
        pass: worst <= 1e-9,
        detail: format!("max relative excess over the Γ sup bound, worst at {at}"),
    })
}

/// `Z(x,t) ≤ ‖x‖^{−1}(1 − exp(−t e^{αψ(−m+1)}))` at every evaluated point.
fn check_bound_pointwise(_cfg: &VerifyConfig) -> Result<CheckResult> {
    let (worst, at) = max_relative_excess(|hk, m, t| {
        let chk = hk.pointwise_bound_check(m, t)?;
        Ok((chk.value, chk.bound))
    })?;
    Ok(CheckResult {
        name: "bound_pointwise".into(),
        measured: worst.max(0.0),
        tolerance: 1e-9,
        pass: worst <= 1e-9,
        detail: format!("max relative excess over the pointwise bound, worst at {at}"),
    })
}

/// `∫_{A_f∖B_k} Z ≤ 1 − exp(−t e^{αψ(−k)})` at every evaluated point.
fn check_bound_tail(_cfg: &VerifyConfig) -> Result<CheckResult> {
    let (worst, at) =
        max_relative_excess(|hk, k, t| Ok((hk.complement_cdf(k, t)?, hk.tail_bound(k, t)?)))?;
    Ok(CheckResult {
        name: "bound_tail".into(),
        measured: worst.max(0.0),
        tolerance: 1e-9,
        pass: worst <= 1e-9,
        detail: format!("max relative excess over the tail bound, worst at {at}"),
    })
}

/// `|Z(·, t+s) − Z(·,t) * Z(·,s)| < 1e−8` by exact radial convolution.
fn check_chapman_kolmogorov(cfg: &VerifyConfig) -> Result<CheckResult> {
    let tol = 1e-8;
    let mut worst = 0.0f64;
    let mut at = String::new();
    for filt in builtin_filtrations() {
        let hk = HeatKernelFin::new(&filt, 1.0, None, Some(cfg.tolerance))?;
        for t in [0.1, 1.0] {
            for s in [0.1, 1.0] {
                let zt = hk.kernel_table(t)?;
                let zs = hk.kernel_table(s)?;
                for m in -6..=6 {
                    let conv = convolve_radial(&filt, &zt, &zs, m)?;
                    let direct = hk.kernel_radial(m, t + s)?;
                    let d = (conv - direct).abs();
                    if d > worst {
                        worst = d;
                        at = format!("{} t={t} s={s} m={m}", filt.name());
                    }
                }
            }
        }
    }
    Ok(CheckResult {
        name: "chapman_kolmogorov".into(),
        measured: worst,
        tolerance: tol,
        pass: worst < tol,
        detail: format!("max |Z(t+s) − Z(t)*Z(s)| over (t,s) ∈ {{0.1,1}}², worst at {at}"),
    })
}

/// The semigroup scales `1_{S_n}` eigenfunctions by `exp(−t e^{αψ(n)})` to
/// rounding.
fn check_spectral(_cfg: &VerifyConfig) -> Result<CheckResult> {
    let tol = 1e-12;
    let filt = Filtration::factorial();
    let alpha = 1.0;
    let mut worst = 0.0f64;
    let mut at = String::new();
    for n in -5..=5 {
        let profile = RadialProfile::single(n);
        for t in [0.1, 1.0] {
            let acted = profile.apply_semigroup(&filt, alpha, t)?;
            let factor = (-t * (alpha * filt.ln_value(n)?).exp()).exp();
            for m in [-n - 1, -n, -n + 1] {
                let base = profile.eval_physical(&filt, NormValue::Index(m))?;
                let lhs = acted.eval_physical(&filt, NormValue::Index(m))?;
                let rhs = base * factor;
                let denom = rhs.norm().max(1e-300);
                let rel = (lhs - rhs).norm() / denom;
                if base.norm() > 0.0 && rel > worst {
                    worst = rel;
                    at = format!("n={n} t={t} m={m}");
                }
            }
        }
    }
    Ok(CheckResult {
        name: "spectral".into(),
        measured: worst,
        tolerance: tol,
        pass: worst < tol,
        detail: format!("max relative defect of the eigenvalue relation, worst at {at}"),
    })
}

/// Parseval on random test functions in spaces of dimension ≤ 720.
fn check_parseval(cfg: &VerifyConfig) -> Result<CheckResult> {
    let tol = 1e-12;
    let mut rng = derive_stream(cfg.seed, 40);
    let mut worst = 0.0f64;
    let mut at = String::new();
    let cases = [
        (Filtration::factorial(), 3i64, -3i64), // dim 576
        (Filtration::prime_power(2)?, 4, -4),   // dim 256
        (Filtration::lcm(), 2, -2),             // dim 36
    ];
    for (filt, k, l) in cases {
        let dim = space_dim(&filt, k, l)?;
        assert!(dim <= 720);
        for _ in 0..3 {
            let mk = |rng: &mut crate::markov::Stream| -> Result<TestFunction> {
                let coeffs = (0..dim)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                TestFunction::new(&filt, k, l, coeffs)
            };
            let a = mk(&mut rng)?;
            let b = mk(&mut rng)?;
            let lhs = a.inner_product(&b)?;
            let rhs = a.fourier()?.inner_product(&b.fourier()?)?;
            let rel = (lhs - rhs).norm() / lhs.norm().max(1e-300);
            if rel > worst {
                worst = rel;
                at = format!("{} D_{k}^{l} (dim {dim})", filt.name());
            }
        }
    }
    Ok(CheckResult {
        name: "parseval".into(),
        measured: worst,
        tolerance: tol,
        pass: worst < tol,
        detail: format!("max relative Parseval defect, worst at {at}"),
    })
}

/// prime_power(2) kernel against a separately coded Vladimirov-type
/// brute-force series in plain floating point.
fn check_padic_oracle(cfg: &VerifyConfig) -> Result<CheckResult> {
    let tol = 1e-12;
    let p = 2.0f64;
    let filt = Filtration::prime_power(2)?;
    let alpha = 1.0;
    let hk = HeatKernelFin::new(&filt, alpha, None, Some(cfg.tolerance))?;
    let (n_lo, _) = hk.window();
    let mut worst = 0.0f64;
    let mut at = String::new();
    for m in -5..5i64 {
        for t in [0.1, 0.5, 1.0, 5.0, 10.0] {
            let mut brute = 0.0;
            let mut n = -m;
            while n >= n_lo {
                let pa = p.powf(alpha * n as f64);
                let pa1 = p.powf(alpha * (n as f64 + 1.0));
                brute += p.powi(n as i32) * ((-t * pa).exp() - (-t * pa1).exp());
                n -= 1;
            }
            let z = hk.kernel_radial(m, t)?;
            let d = (z - brute).abs();
            if d > worst {
                worst = d;
                at = format!("m={m} t={t}");
            }
        }
    }
    Ok(CheckResult {
        name: "padic_oracle".into(),
        measured: worst,
        tolerance: tol,
        pass: worst < tol,
        detail: format!("max |kernel − brute-force p-adic series| on 10×5 grid, worst at {at}"),
    })
}

fn mc_frequencies(cfg: &VerifyConfig) -> Result<(ShellFrequencies, Vec<f64>)> {
    let filt = Filtration::factorial();
    let hk = HeatKernelFin::new(&filt, 1.0, None, Some(cfg.tolerance))?;
    let sampler = FiniteAdeleSampler::new(&hk, 1.0, None)?;
    let mut rng = derive_stream(cfg.seed, 41);
    let freqs = ShellFrequencies::collect(&sampler, cfg.mc_draws, &mut rng);
    let probs = sampler.shell_masses().map(|(_, w)| w).collect();
    Ok((freqs, probs))
}

/// Chi-squared of 10⁶ increment draws against exact shell masses.
fn check_mc_shell_law(cfg: &VerifyConfig) -> Result<CheckResult> {
    let (freqs, probs) = mc_frequencies(cfg)?;
    let gof = goodness_of_fit(&freqs.counts, &probs, freqs.draws)?;
    Ok(CheckResult {
        name: "mc_shell_law".into(),
        measured: gof.p_value,
        tolerance: 0.001,
        pass: gof.p_value > 0.001,
        detail: format!(
            "chi-squared p-value over {} draws (statistic {:.2}, dof {}); pass iff p > tolerance",
            freqs.draws, gof.statistic, gof.dof
        ),
    })
}

/// Total-variation distance of the same ensemble below 0.005.
fn check_mc_tv(cfg: &VerifyConfig) -> Result<CheckResult> {
    let (freqs, probs) = mc_frequencies(cfg)?;
    let gof = goodness_of_fit(&freqs.counts, &probs, freqs.draws)?;
    Ok(CheckResult {
        name: "mc_tv".into(),
        measured: gof.total_variation,
        tolerance: 0.005,
        pass: gof.total_variation < 0.005,
        detail: format!("TV distance between empirical and exact shell law, {} draws", freqs.draws),
    })
}

/// β = 1, 2 closed forms against the oscillatory quadrature.
fn check_arch_closed_form(_cfg: &VerifyConfig) -> Result<CheckResult> {
    let tol = 1e-8;
    let mut worst = 0.0f64;
    let mut at = String::new();
    for beta in [1.0, 2.0] {
        let k = StableKernel::new(beta)?;
        for t in [0.1, 1.0, 10.0] {
            for i in 0..20 {
                let x = -5.0 + 0.5 * i as f64;
                let cf = k.closed_form(x, t).expect("closed form");
                let q = k.eval_quadrature(x, t)?;
                let d = (cf - q.value).abs();
                if d > worst {
                    worst = d;
                    at = format!("β={beta} t={t} x={x}");
                }
            }
        }
    }
    Ok(CheckResult {
        name: "arch_closed_form".into(),
        measured: worst,
        tolerance: tol,
        pass: worst < tol,
        detail: format!("max |closed form − quadrature|, worst at {at}"),
    })
}

/// Gaussian sampler: empirical variance within 1% of t/(2π²).
fn check_arch_sampler_gauss(cfg: &VerifyConfig) -> Result<CheckResult> {
    let k = StableKernel::new(2.0)?;
    let t = 1.0;
    let mut rng = derive_stream(cfg.seed, 42);
    let n = cfg.mc_draws;
    let mut sum2 = 0.0;
    for _ in 0..n {
        let x = k.sample(t, &mut rng);
        sum2 += x * x;
    }
    let var = sum2 / n as f64;
    let expect = t / (2.0 * std::f64::consts::PI * std::f64::consts::PI);
    let rel = (var / expect - 1.0).abs();
    Ok(CheckResult {
        name: "arch_sampler_gauss".into(),
        measured: rel,
        tolerance: 0.01,
        pass: rel < 0.01,
        detail: format!("relative error of the β=2 sampler variance over {n} draws"),
    })
}

/// Cauchy sampler: empirical IQR within 2% of t/π.
fn check_arch_sampler_cauchy(cfg: &VerifyConfig) -> Result<CheckResult> {
    let k = StableKernel::new(1.0)?;
    let t = 1.0;
    let mut rng = derive_stream(cfg.seed, 43);
    let n = cfg.mc_draws as usize;
    let mut xs: Vec<f64> = (0..n).map(|_| k.sample(t, &mut rng)).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let iqr = xs[3 * n / 4] - xs[n / 4];
    let expect = t / std::f64::consts::PI;
    let rel = (iqr / expect - 1.0).abs();
    Ok(CheckResult {
        name: "arch_sampler_cauchy".into(),
        measured: rel,
        tolerance: 0.02,
        pass: rel < 0.02,
        detail: format!("relative error of the β=1 sampler IQR over {n} draws"),
    })
}

/// The classical bound with its fitted constant holds across the grid.
fn check_arch_bound(_cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut worst = f64::NEG_INFINITY;
    let mut at = String::new();
    for beta in [0.5, 1.0, 1.5, 2.0] {
        let k = StableKernel::new(beta)?;
        let xs: Vec<f64> = (0..41).map(|i| -6.0 + 0.3 * i as f64).collect();
        let ts = [0.1, 0.5, 1.0, 5.0];
        let c = k.fit_bound_constant(&xs, &ts)?;
        for &t in &ts {
            for &x in &xs {
                let z = k.eval(x, t)?;
                let rhs = k.bound_rhs(x, t, c);
                let excess = (z - rhs) / rhs.max(1e-300);
                if excess > worst {
                    worst = excess;
                    at = format!("β={beta} t={t} x={x:.2} (C={c:.4})");
                }
            }
        }
    }
    Ok(CheckResult {
        name: "arch_bound".into(),
        measured: worst.max(0.0),
        tolerance: 1e-9,
        pass: worst <= 1e-9,
        detail: format!("max relative excess over the fitted bound, worst at {at}"),
    })
}

/// Product normalization of `Z_A` within the combined certified tolerance.
fn check_adelic_product(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut budget = 0.0f64;
    let mut at = String::new();
    for (alpha, beta) in [(1.0, 2.0), (0.5, 1.0), (2.0, 1.5)] {
        let filt = Filtration::factorial();
        let hk = HeatKernelFin::new(&filt, alpha, None, Some(cfg.tolerance))?;
        let arch = StableKernel::new(beta)?;
        let t = 1.0;
        let mb = hk.mass_balance(t)?;
        let x_cut = if beta < 1.0 { 1e4 } else { 300.0 };
        let body = arch.interval_mass(-x_cut, x_cut, t)?;
        let (tail, tail_err) = arch.tail_mass_estimate(x_cut, t);
        let product = mb.in_window * (body + tail);
        let defect = (product - 1.0).abs();
        let combined = 1e-6 + mb.tail_low_bound + mb.tail_high_bound + tail_err;
        if defect > worst {
            worst = defect;
            budget = combined;
            at = format!("α={alpha} β={beta}");
        }
    }
    Ok(CheckResult {
        name: "adelic_product".into(),
        measured: worst,
        tolerance: budget,
        pass: worst <= budget,
        detail: format!("max |∫ Z_A − 1| against the combined certificate, worst at {at}"),
    })
}

/// Two-step vs one-step marginals at 10⁵ paths, within 3 standard errors.
fn check_adelic_two_step(cfg: &VerifyConfig) -> Result<CheckResult> {
    let filt = Filtration::factorial();
    let hk = HeatKernelFin::new(&filt, 1.0, None, Some(cfg.tolerance))?;
    let arch = StableKernel::new(2.0)?;
    let kernel = AdelicKernel::new(hk.clone(), arch.clone());
    let n = cfg.path_count;
    let (t1, t2) = (0.4, 1.0);

    let mut one = AdelicSampler::new(&kernel, t2, cfg.seed.wrapping_add(1))?;
    let sampler_a = FiniteAdeleSampler::new(&hk, t1, None)?;
    let sampler_b = FiniteAdeleSampler::new(&hk, t2 - t1, None)?;
    let mut rng_fin = derive_stream(cfg.seed, 44);
    let mut rng_arch = derive_stream(cfg.seed, 45);

    let mut shell_one = std::collections::BTreeMap::new();
    let mut shell_two = std::collections::BTreeMap::new();
    let mut var_one = 0.0;
    let mut var_two = 0.0;
    for _ in 0..n {
        let p = one.sample()?;
        *shell_one.entry(p.finite.norm_index()).or_insert(0u64) += 1;
        var_one += p.real * p.real;

        let xa = sampler_a.sample(&mut rng_fin)?;
        let xb = sampler_b.sample(&mut rng_fin)?;
        *shell_two
            .entry(xa.add(&xb)?.norm_index())
            .or_insert(0u64) += 1;
        let r = arch.sample(t1, &mut rng_arch) + arch.sample(t2 - t1, &mut rng_arch);
        var_two += r * r;
    }
    let nf = n as f64;
    let mut max_z = 0.0f64;
    let mut at = String::new();
    let keys: std::collections::BTreeSet<_> =
        shell_one.keys().chain(shell_two.keys()).cloned().collect();
    let mut pool_one = 0u64;
    let mut pool_two = 0u64;
    for key in keys {
        let c1 = *shell_one.get(&key).unwrap_or(&0);
        let c2 = *shell_two.get(&key).unwrap_or(&0);
        if c1 + c2 < 20 {
            pool_one += c1;
            pool_two += c2;
            continue;
        }
        let p = (c1 + c2) as f64 / (2.0 * nf);
        let se = (2.0 * p * (1.0 - p) / nf).sqrt();
        let z = ((c1 as f64 - c2 as f64) / nf).abs() / se;
        if z > max_z {
            max_z = z;
            at = format!("finite shell {key:?}");
        }
    }
    if pool_one + pool_two >= 20 {
        let p = (pool_one + pool_two) as f64 / (2.0 * nf);
        let se = (2.0 * p * (1.0 - p) / nf).sqrt();
        let z = ((pool_one as f64 - pool_two as f64) / nf).abs() / se;
        if z > max_z {
            max_z = z;
            at = "pooled rare shells".into();
        }
    }
    // real coordinate: β=2 variances are additive, compare the estimates
    let (v1, v2) = (var_one / nf, var_two / nf);
    let se = v1 * (4.0 / nf).sqrt();
    let zv = (v1 - v2).abs() / se;
    if zv > max_z {
        max_z = zv;
        at = "real-coordinate variance".into();
    }
    Ok(CheckResult {
        name: "adelic_two_step".into(),
        measured: max_z,
        tolerance: 3.0,
        pass: max_z < 3.0,
        detail: format!(
            "max z-score between one-step and two-step marginals over {n} paths, worst at {at}"
        ),
    })
}

/// Dirac limit for `f = 1_{B_l}`: deviation bounded by the tail lemma at
/// every t and monotone along t = 10^{−j}.
fn check_dirac_limit(cfg: &VerifyConfig) -> Result<CheckResult> {
    let filt = Filtration::factorial();
    let hk = HeatKernelFin::new(&filt, 1.0, None, Some(cfg.tolerance))?;
    let arch = StableKernel::new(2.0)?;
    let kernel = AdelicKernel::new(hk.clone(), arch);
    let l = 0i64;
    let ts: Vec<f64> = (0..=6).map(|j| 10f64.powi(-j)).collect();

    // finite factor exactly: deviation = 1 − ∫_{B_l} Z dx = complement CDF
    let mut max_excess = f64::NEG_INFINITY;
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    for &t in &ts {
        let dev = hk.complement_cdf(l, t)?;
        let bound = hk.tail_bound(l, t)?;
        max_excess = max_excess.max((dev - bound) / bound.max(1e-300));
        if dev > prev * (1.0 + 1e-9) {
            monotone = false;
        }
        prev = dev;
    }

    // and the separable product version through the adelic kernel
    let center = FiniteAdele::zero(&filt, 8);
    let rep = dirac_limit_report(&kernel, (-1.0, 1.0), &center, l, &ts)?;

    let pass = max_excess <= 1e-9 && monotone && rep.monotone_deviation;
    Ok(CheckResult {
        name: "dirac_limit".into(),
        measured: max_excess.max(0.0),
        tolerance: 1e-9,
        pass,
        detail: format!(
            "max relative excess of |∫Z·1_B − 1| over the tail-lemma rate; monotone finite: \
             {monotone}, monotone product: {}",
            rep.monotone_deviation
        ),
    })
}
