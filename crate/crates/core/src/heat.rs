//! The finite-adelic heat kernel `Z(x, t)` and its transition function.
//!
//! For `α > 0` the kernel is the inverse Fourier transform of
//! `exp(−t‖ξ‖^α)` and collapses to a radial series: with `‖x‖ = e^{ψ(m)}`,
//!
//! ```text
//! Z(x, t) = Σ_{n ≤ −m} e^{ψ(n)} { exp(−t e^{αψ(n)}) − exp(−t e^{αψ(n+1)}) }
//! ```
//!
//! The series is two-sided infinite only through `n → −∞`; evaluation
//! truncates it to a window `[n_lo, n_hi]` and certifies the remainder:
//! the dropped lower tail is at most
//! `e^{ψ(L)} (1 − exp(−t e^{αψ(L+1)}))` with `L = min(n_lo − 1, −m)`, and
//! all shell-mass and CDF sums control their upper tails through the
//! telescoped exponential mass `exp(−t e^{αψ(n_hi+1)})` and the tail bound
//! `∫_{A_f∖B_k} Z ≤ 1 − exp(−t e^{αψ(−k)})`.
//!
//! Exponentials of chain values are evaluated in the log domain
//! (`e^{αψ(n)} = exp(α ψ(n))` from exact big-integer logarithms), since the
//! chain itself overflows doubles almost immediately; underflow clamps to
//! zero and certified evaluations count those clamps.
//!
//! Index convention: this module always indexes a radial point by its norm
//! index `m`, meaning `‖x‖ = e^{ψ(m)}`. The pointwise bound of the
//! literature is stated for `‖x‖ = e^{−ψ(m')}`; that `m'` is `−m` here, so
//! the bound reads `Z ≤ e^{ψ(−m)}(1 − exp(−t e^{αψ(−m+1)}))`.

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::adele::FiniteAdele;
use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::schwartz::{NormValue, RadialProfile};

/// Exponent cutoff beyond which `exp(−a)` is flushed to zero.
const EXP_UNDERFLOW: f64 = 745.0;
/// Chain logarithms above this make `e^{ψ(n)}` overflow a double.
const MAX_PSI_LN: f64 = 690.0;
/// Hard cap on the default half-window.
const DEFAULT_HALF_WINDOW: i64 = 128;

/// Certified evaluation of the radial series at one point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelValue {
    pub value: f64,
    /// Certified bound on the dropped lower tail of the series.
    pub tail_bound: f64,
    /// Number of terms whose exponential underflowed to exact zero.
    pub clamped_terms: usize,
}

/// Window mass and certified tail bounds for `∫ Z(x,t) dx`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MassBalance {
    pub in_window: f64,
    pub tail_low_bound: f64,
    pub tail_high_bound: f64,
}

impl MassBalance {
    /// |window mass − 1| ≤ residual + certified tails is the normalization
    /// certificate; this returns the residual.
    pub fn defect(&self) -> f64 {
        (self.in_window - 1.0).abs()
    }
}

/// Both sides of a pointwise inequality.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundCheck {
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

fn check(value: f64, bound: f64) -> BoundCheck {
    BoundCheck {
        value,
        bound,
        holds: value <= bound * (1.0 + 1e-9) + 1e-300,
    }
}

/// Radial values over a norm-index window, used by the exact ultrametric
/// convolution.
#[derive(Debug, Clone)]
pub struct RadialTable {
    n_lo: i64,
    values: Vec<f64>,
}

impl RadialTable {
    pub fn new(n_lo: i64, values: Vec<f64>) -> RadialTable {
        RadialTable { n_lo, values }
    }

    pub fn n_lo(&self) -> i64 {
        self.n_lo
    }

    pub fn n_hi(&self) -> i64 {
        self.n_lo + self.values.len() as i64 - 1
    }

    pub fn value(&self, m: i64) -> f64 {
        if m < self.n_lo {
            0.0
        } else {
            self.values
                .get((m - self.n_lo) as usize)
                .copied()
                .unwrap_or(0.0)
        }
    }
}

/// Ultrametric radial convolution `(f * g)(x)` at `‖x‖ = e^{ψ(m)}`.
///
/// The ultrametric makes `‖x − y‖` constant on every sphere except `S_m`
/// itself, where the sphere splits into `B_m ∖ (x + B_{m−1})`; the
/// convolution therefore reduces to exact shell sums:
///
/// ```text
/// (f*g)(m) = f(m) Σ_{j<m} g_j μ_j + g(m) Σ_{j<m} f_j μ_j
///          + f(m) g(m) (μ(S_m) − e^{ψ(m−1)}) + Σ_{j>m} f_j g_j μ_j
/// ```
///
/// Tables must share their window; mass below `n_lo` is treated as zero,
/// which callers account for through their kernel tail certificates.
pub fn convolve_radial(
    filt: &Filtration,
    f: &RadialTable,
    g: &RadialTable,
    m: i64,
) -> Result<f64> {
    if f.n_lo != g.n_lo || f.values.len() != g.values.len() {
        return Err(Error::usage("radial tables must share their window"));
    }
    if m < f.n_lo() || m > f.n_hi() {
        return Err(Error::usage(format!("norm index {m} outside the table window")));
    }
    let mut f_below = 0.0;
    let mut g_below = 0.0;
    for j in f.n_lo()..m {
        let mu = filt.sphere_measure_f64(j)?;
        f_below += f.value(j) * mu;
        g_below += g.value(j) * mu;
    }
    let mut above = 0.0;
    for j in (m + 1)..=f.n_hi() {
        above += f.value(j) * g.value(j) * filt.sphere_measure_f64(j)?;
    }
    let self_shell = filt.sphere_measure_f64(m)? - filt.ball_measure_f64(m - 1)?;
    Ok(f.value(m) * g_below + g.value(m) * f_below + f.value(m) * g.value(m) * self_shell + above)
}

/// Evaluator for the heat kernel of one filtration and exponent.
#[derive(Debug, Clone)]
pub struct HeatKernelFin {
    filt: Filtration,
    alpha: f64,
    n_lo: i64,
    n_hi: i64,
    tolerance: f64,
}

impl HeatKernelFin {
    /// Builds an evaluator. Without an explicit window the largest
    /// symmetric float-safe window inside the filtration cache is used;
    /// an explicit window that cannot produce finite chain floats is
    /// rejected rather than silently clamped.
    pub fn new(
        filt: &Filtration,
        alpha: f64,
        window: Option<(i64, i64)>,
        tolerance: Option<f64>,
    ) -> Result<HeatKernelFin> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::usage(format!("alpha must be positive, got {alpha}")));
        }
        let tolerance = tolerance.unwrap_or(1e-10);
        if !(tolerance > 0.0) {
            return Err(Error::usage("tolerance must be positive"));
        }
        let (f_lo, f_hi) = filt.window();
        let (n_lo, n_hi) = match window {
            Some((lo, hi)) => {
                if lo >= hi {
                    return Err(Error::usage(format!("empty series window [{lo}, {hi}]")));
                }
                if lo - 1 < f_lo || hi + 1 > f_hi {
                    return Err(Error::usage(format!(
                        "series window [{lo}, {hi}] needs chain indices [{}, {}] beyond the \
                         filtration cache [{f_lo}, {f_hi}]",
                        lo - 1,
                        hi + 1
                    )));
                }
                if filt.ln_value(hi + 1)? > MAX_PSI_LN {
                    return Err(Error::usage(format!(
                        "chain value at index {} overflows doubles; shrink the window",
                        hi + 1
                    )));
                }
                (lo, hi)
            }
            None => {
                let mut n = DEFAULT_HALF_WINDOW.min(-f_lo - 1).min(f_hi - 1);
                while n > 1 && filt.ln_value(n + 1)? > MAX_PSI_LN {
                    n -= 1;
                }
                (-n, n)
            }
        };
        Ok(HeatKernelFin {
            filt: filt.clone(),
            alpha,
            n_lo,
            n_hi,
            tolerance,
        })
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filt
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn window(&self) -> (i64, i64) {
        (self.n_lo, self.n_hi)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `exp(−t e^{αψ(n)})`, flushed to exact zero past the underflow cliff.
    pub fn exp_factor(&self, n: i64, t: f64) -> Result<f64> {
        let a = t * (self.alpha * self.filt.ln_value(n)?).exp();
        Ok(if a > EXP_UNDERFLOW { 0.0 } else { (-a).exp() })
    }

    /// `Δ_n(t) = exp(−t e^{αψ(n)}) − exp(−t e^{αψ(n+1)})`, evaluated through
    /// `expm1` so nearby exponentials do not cancel.
    pub fn delta(&self, n: i64, t: f64) -> Result<f64> {
        let a = t * (self.alpha * self.filt.ln_value(n)?).exp();
        if !a.is_finite() || a > EXP_UNDERFLOW {
            return Ok(0.0);
        }
        let b = t * (self.alpha * self.filt.ln_value(n + 1)?).exp();
        let d = b - a; // >= 0, possibly infinite
        Ok((-a).exp() * (-(-d).exp_m1()))
    }

    fn require_t_positive(t: f64) -> Result<()> {
        if t > 0.0 && t.is_finite() {
            Ok(())
        } else {
            Err(Error::usage(format!("time must be positive, got {t}")))
        }
    }

    /// Certified lower-tail bound for the series cut at `L` (all terms with
    /// `n ≤ L` dropped): `e^{ψ(L)} (1 − exp(−t e^{αψ(L+1)}))`.
    fn lower_tail_bound(&self, cut: i64, t: f64) -> Result<f64> {
        let scale = self.filt.ln_value(cut)?;
        let a = t * (self.alpha * self.filt.ln_value(cut + 1)?).exp();
        let factor = -(-a).exp_m1();
        Ok(scale.exp() * factor)
    }

    /// `Z(x, t)` for any `x` with `‖x‖ = e^{ψ(m)}`, with the certificate.
    pub fn kernel_radial_certified(&self, m: i64, t: f64) -> Result<KernelValue> {
        Self::require_t_positive(t)?;
        if -m > self.n_hi {
            return Err(Error::precision(format!(
                "norm index {m} needs series terms above n_hi = {}; enlarge the window",
                self.n_hi
            )));
        }
        let hi = (-m).min(self.n_hi);
        let mut value = 0.0;
        let mut clamped = 0usize;
        for n in self.n_lo..=hi {
            let d = self.delta(n, t)?;
            if d == 0.0 {
                let a = t * (self.alpha * self.filt.ln_value(n)?).exp();
                if a > EXP_UNDERFLOW {
                    clamped += 1;
                }
                continue;
            }
            value += self.filt.ln_value(n)?.exp() * d;
        }
        let cut = (self.n_lo - 1).min(-m);
        let tail = self.lower_tail_bound(cut, t)?;
        if tail > self.tolerance {
            return Err(Error::precision(format!(
                "lower-tail bound {tail:.3e} at n_lo = {} exceeds tolerance {:.1e}; \
                 enlarge the window downward",
                self.n_lo, self.tolerance
            )));
        }
        Ok(KernelValue {
            value,
            tail_bound: tail,
            clamped_terms: clamped,
        })
    }

    /// `Z(x, t)` at `‖x‖ = e^{ψ(m)}`; nonnegative.
    pub fn kernel_radial(&self, m: i64, t: f64) -> Result<f64> {
        Ok(self.kernel_radial_certified(m, t)?.value)
    }

    /// `Z(0, t)`: the series over every shell, certified on both sides.
    pub fn kernel_at_zero(&self, t: f64) -> Result<KernelValue> {
        Self::require_t_positive(t)?;
        let mut value = 0.0;
        let mut clamped = 0usize;
        for n in self.n_lo..=self.n_hi {
            let d = self.delta(n, t)?;
            if d == 0.0 {
                let a = t * (self.alpha * self.filt.ln_value(n)?).exp();
                if a > EXP_UNDERFLOW {
                    clamped += 1;
                }
                continue;
            }
            value += self.filt.ln_value(n)?.exp() * d;
        }
        let low = self.lower_tail_bound(self.n_lo - 1, t)?;
        // upper tail: once t e^{αψ(n)} dominates 2ψ(n), the terms
        // e^{ψ(n)} exp(−t e^{αψ(n)}) are below e^{−ψ(n)}, which sums
        // geometrically (ratios are at least 2)
        let u = self.filt.ln_value(self.n_hi + 1)?;
        let a = t * (self.alpha * u).exp();
        if !(a >= 2.0 * u + 2.0 && self.alpha * a >= 2.0) {
            return Err(Error::precision(format!(
                "cannot certify the upper tail of Z(0, t) at n_hi = {}; enlarge the window",
                self.n_hi
            )));
        }
        let high = 2.0 * (-u).exp();
        let tail = low + high;
        if tail > self.tolerance {
            return Err(Error::precision(format!(
                "tail bound {tail:.3e} for Z(0, t) exceeds tolerance {:.1e}",
                self.tolerance
            )));
        }
        Ok(KernelValue {
            value,
            tail_bound: tail,
            clamped_terms: clamped,
        })
    }

    /// Shell mass `w_m(t) = μ(S_m) Z(e^{ψ(m)}, t)`; these sum to one.
    pub fn shell_mass(&self, m: i64, t: f64) -> Result<f64> {
        Ok(self.filt.sphere_measure_f64(m)? * self.kernel_radial(m, t)?)
    }

    /// Window shell-mass sum together with certified bounds for both tails:
    /// below the window via the Γ sup bound, above it via the tail lemma.
    pub fn mass_balance(&self, t: f64) -> Result<MassBalance> {
        Self::require_t_positive(t)?;
        let mut in_window = 0.0;
        for m in self.n_lo..=self.n_hi {
            in_window += self.shell_mass(m, t)?;
        }
        let tail_low = self.filt.ln_value(self.n_lo - 1)?.exp() * self.gamma_sup_bound(t);
        let tail_high = self.tail_bound(self.n_hi, t)?;
        Ok(MassBalance {
            in_window,
            tail_low_bound: tail_low,
            tail_high_bound: tail_high,
        })
    }

    /// `P(‖X_t‖ ≤ e^{ψ(k)}) = Σ_n e^{ψ(n)} Δ_n e^{ψ(min(k,−n))}`, the radial
    /// CDF of the kernel law. Monotone nondecreasing in `k`.
    pub fn radial_cdf(&self, k: i64, t: f64) -> Result<f64> {
        Self::require_t_positive(t)?;
        if k < -self.n_hi {
            return Err(Error::precision(format!(
                "radius index {k} below the window resolution −n_hi = {}",
                -self.n_hi
            )));
        }
        let mut acc = 0.0;
        for n in self.n_lo..=self.n_hi {
            let d = self.delta(n, t)?;
            if d == 0.0 {
                continue;
            }
            let expo = self.filt.ln_value(n)? + self.filt.ln_value(k.min(-n))?;
            acc += d * expo.exp();
        }
        // terms above the window all have min(k, −n) = −n and contribute
        // exactly the telescoped exponential mass
        acc += self.exp_factor(self.n_hi + 1, t)?;
        // dropped terms below the window are bounded by the telescoped mass
        // below n_lo
        let tail_lo = -(-t * (self.alpha * self.filt.ln_value(self.n_lo)?).exp()).exp_m1();
        if tail_lo > self.tolerance {
            return Err(Error::precision(format!(
                "lower CDF tail {tail_lo:.3e} exceeds tolerance; enlarge the window"
            )));
        }
        Ok(acc.clamp(0.0, 1.0))
    }

    /// `P(‖X_t‖ > e^{ψ(k)})` as a direct positive sum (no cancellation
    /// against 1), bounded by `1 − exp(−t e^{αψ(−k)})`.
    pub fn complement_cdf(&self, k: i64, t: f64) -> Result<f64> {
        Self::require_t_positive(t)?;
        if k + 1 < self.n_lo {
            return Err(Error::precision(format!(
                "radius index {k} below the window; enlarge it"
            )));
        }
        let mut acc = 0.0;
        for m in (k + 1)..=self.n_hi {
            acc += self.shell_mass(m, t)?;
        }
        // mass above the window, bounded by the telescoped exponential tail
        acc += self.tail_bound(self.n_hi, t)?;
        Ok(acc.min(1.0))
    }

    /// Sup bound of the kernel: `Z(x,t) ≤ Γ(1/α + 1) t^{−1/α}` everywhere.
    pub fn gamma_sup_bound(&self, t: f64) -> f64 {
        gamma(1.0 / self.alpha + 1.0) * t.powf(-1.0 / self.alpha)
    }

    /// Tail mass bound `∫_{A_f ∖ B_k} Z(x,t) dx ≤ 1 − exp(−t e^{αψ(−k)})`.
    pub fn tail_bound(&self, k: i64, t: f64) -> Result<f64> {
        let a = t * (self.alpha * self.filt.ln_value(-k)?).exp();
        if a > EXP_UNDERFLOW {
            return Ok(1.0);
        }
        Ok(-(-a).exp_m1())
    }

    /// Checks the pointwise bound
    /// `Z(x,t) ≤ ‖x‖^{−1} (1 − exp(−t e^{αψ(−m+1)}))` at `‖x‖ = e^{ψ(m)}`,
    /// reporting both sides.
    pub fn pointwise_bound_check(&self, m: i64, t: f64) -> Result<BoundCheck> {
        let z = self.kernel_radial(m, t)?;
        let a = t * (self.alpha * self.filt.ln_value(-m + 1)?).exp();
        let factor = if a > EXP_UNDERFLOW { 1.0 } else { -(-a).exp_m1() };
        let bound = self.filt.ln_value(-m)?.exp() * factor;
        Ok(check(z, bound))
    }

    /// The comparison kernel of the isotropic Laplacian of the same
    /// ultrametric: the index-shifted series
    /// `Σ_{n ≤ −m} e^{ψ(n)} { exp(−t e^{αψ(n−1)}) − exp(−t e^{αψ(n)}) }`.
    /// It integrates to one by the same telescoping but differs from
    /// `Z(x,t)` pointwise.
    pub fn isotropic_kernel_radial(&self, m: i64, t: f64) -> Result<f64> {
        Self::require_t_positive(t)?;
        if -m > self.n_hi {
            return Err(Error::precision(format!(
                "norm index {m} needs series terms above n_hi = {}",
                self.n_hi
            )));
        }
        let hi = (-m).min(self.n_hi);
        let mut value = 0.0;
        for n in self.n_lo..=hi {
            let d = self.delta(n - 1, t)?;
            if d == 0.0 {
                continue;
            }
            value += self.filt.ln_value(n)?.exp() * d;
        }
        let cut = (self.n_lo - 1).min(-m);
        let tail = self.lower_tail_bound(cut, t)?; // same domination as Z
        if tail > self.tolerance {
            return Err(Error::precision(format!(
                "lower-tail bound {tail:.3e} exceeds tolerance for the isotropic kernel"
            )));
        }
        Ok(value)
    }

    /// Radial values of `Z(·, t)` over the whole window.
    pub fn kernel_table(&self, t: f64) -> Result<RadialTable> {
        let values = (self.n_lo..=self.n_hi)
            .map(|m| self.kernel_radial(m, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(RadialTable::new(self.n_lo, values))
    }

    /// Compares the diagonal semigroup action on a radial profile with the
    /// physical-space convolution of its eigenfunction expansion against
    /// `Z(·, t)`, on a grid of norm indices.
    pub fn semigroup_vs_convolution(
        &self,
        profile: &RadialProfile,
        t: f64,
        grid: Option<&[i64]>,
    ) -> Result<DiscrepancyReport> {
        Self::require_t_positive(t)?;
        for n in profile.support() {
            if n < self.n_lo + 2 || n > self.n_hi - 1 {
                return Err(Error::precision(format!(
                    "profile support index {n} leaves the quadrature window [{}, {}]",
                    self.n_lo + 2,
                    self.n_hi - 1
                )));
            }
        }
        let default_grid: Vec<i64> = ((-8).max(self.n_lo)..=8.min(self.n_hi)).collect();
        let grid = grid.unwrap_or(&default_grid);

        let spectral = profile.apply_semigroup(&self.filt, self.alpha, t)?;

        let mut f_re = Vec::new();
        let mut f_im = Vec::new();
        for m in self.n_lo..=self.n_hi {
            let v = profile.eval_physical(&self.filt, NormValue::Index(m))?;
            f_re.push(v.re);
            f_im.push(v.im);
        }
        let f_re = RadialTable::new(self.n_lo, f_re);
        let f_im = RadialTable::new(self.n_lo, f_im);
        let z = self.kernel_table(t)?;

        let mut rows = Vec::with_capacity(grid.len());
        let mut max_abs = 0.0f64;
        for &m in grid {
            let a = spectral.eval_physical(&self.filt, NormValue::Index(m))?;
            let b = Complex64::new(
                convolve_radial(&self.filt, &f_re, &z, m)?,
                convolve_radial(&self.filt, &f_im, &z, m)?,
            );
            let diff = (a - b).norm();
            max_abs = max_abs.max(diff);
            rows.push(DiscrepancyRow {
                m,
                spectral_re: a.re,
                spectral_im: a.im,
                convolution_re: b.re,
                convolution_im: b.im,
                abs_diff: diff,
            });
        }
        Ok(DiscrepancyReport { rows, max_abs })
    }

    /// Numerically demonstrates Conditions LB and MB of the transition
    /// function, with the bounding sequences of the pointwise and tail
    /// lemmas next to the measured values.
    pub fn markov_conditions_report(
        &self,
        t_grid: &[f64],
        x_norm_indices: &[i64],
        k: i64,
    ) -> Result<MarkovConditionsReport> {
        if t_grid.is_empty() || x_norm_indices.is_empty() {
            return Err(Error::usage("grids must be nonempty"));
        }
        let s = t_grid.iter().cloned().fold(f64::MIN, f64::max);

        let mut mb_rows = Vec::new();
        for &t in t_grid {
            let measured = self.complement_cdf(k, t)?;
            let majorant = self.tail_bound(k, t)?;
            mb_rows.push(MbRow {
                t,
                measured,
                majorant,
                holds: measured <= majorant * (1.0 + 1e-9) + 1e-300,
            });
        }

        let ball = self.filt.ln_value(k)?;
        let mut lb_rows = Vec::new();
        for &mx in x_norm_indices {
            if mx <= k {
                return Err(Error::usage(format!(
                    "LB grid point m = {mx} is not outside the ball of radius index {k}"
                )));
            }
            let mut measured: f64 = 0.0;
            for &t in t_grid {
                measured = measured.max((ball.exp()) * self.kernel_radial(mx, t)?);
            }
            let a = s * (self.alpha * self.filt.ln_value(-mx + 1)?).exp();
            let factor = if a > EXP_UNDERFLOW { 1.0 } else { -(-a).exp_m1() };
            let majorant = (self.filt.ln_value(-mx)? + ball).exp() * factor;
            lb_rows.push(LbRow {
                x_norm_index: mx,
                measured_sup: measured,
                majorant,
                holds: measured <= majorant * (1.0 + 1e-9) + 1e-300,
            });
        }

        let all_below =
            mb_rows.iter().all(|r| r.holds) && lb_rows.iter().all(|r| r.holds);
        Ok(MarkovConditionsReport {
            k,
            sup_time: s,
            mb_rows,
            lb_rows,
            all_below,
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiscrepancyRow {
    pub m: i64,
    pub spectral_re: f64,
    pub spectral_im: f64,
    pub convolution_re: f64,
    pub convolution_im: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyReport {
    pub rows: Vec<DiscrepancyRow>,
    pub max_abs: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MbRow {
    pub t: f64,
    pub measured: f64,
    pub majorant: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LbRow {
    pub x_norm_index: i64,
    pub measured_sup: f64,
    pub majorant: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MarkovConditionsReport {
    pub k: i64,
    pub sup_time: f64,
    pub mb_rows: Vec<MbRow>,
    pub lb_rows: Vec<LbRow>,
    pub all_below: bool,
}

/// The normal transition function `P(t, x, B)` of the kernel: the identity
/// at `t = 0` and `∫_B Z(x − y, t) dy` for `t > 0`.
#[derive(Debug, Clone)]
pub struct TransitionFunction {
    kernel: HeatKernelFin,
}

impl TransitionFunction {
    pub fn new(kernel: HeatKernelFin) -> TransitionFunction {
        TransitionFunction { kernel }
    }

    pub fn kernel(&self) -> &HeatKernelFin {
        &self.kernel
    }

    /// `P(t, x, B_k(center))`. For `t = 0` this is the indicator; for
    /// `t > 0` ultrametric invariance collapses the integral to either the
    /// radial CDF (when `x` is inside the ball) or `μ(B_k) Z(‖x−c‖, t)`
    /// (when outside, where `‖x−z‖` is constant over the ball).
    pub fn prob_ball(&self, t: f64, x: &FiniteAdele, center: &FiniteAdele, k: i64) -> Result<f64> {
        if t < 0.0 || !t.is_finite() {
            return Err(Error::usage(format!("time must be nonnegative, got {t}")));
        }
        let inside = x.in_ball(center, k)?;
        if t == 0.0 {
            return Ok(if inside { 1.0 } else { 0.0 });
        }
        if inside {
            self.kernel.radial_cdf(k, t)
        } else {
            let diff = x.sub(center)?;
            let m = diff
                .norm_index()
                .expect("outside the ball, so the difference has an order");
            let z = self.kernel.kernel_radial(m, t)?;
            Ok((self.kernel.filt.ln_value(k)?.exp() * z).clamp(0.0, 1.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::FiltrationConfig;

    fn kernel(filt: &Filtration, alpha: f64) -> HeatKernelFin {
        HeatKernelFin::new(filt, alpha, None, None).unwrap()
    }

    fn all_filtrations() -> Vec<Filtration> {
        vec![
            Filtration::factorial(),
            Filtration::prime_power(2).unwrap(),
            Filtration::lcm(),
        ]
    }

    #[test]
    fn kernel_is_nonnegative_and_bounded() {
        for filt in all_filtrations() {
            for alpha in [0.5, 1.0, 2.0] {
                let hk = kernel(&filt, alpha);
                for t in [0.01, 0.1, 1.0, 10.0] {
                    let sup = hk.gamma_sup_bound(t);
                    for m in -6..=6 {
                        let z = hk.kernel_radial(m, t).unwrap();
                        assert!(z >= 0.0, "{} α={alpha} t={t} m={m}", filt.name());
                        assert!(
                            z <= sup * (1.0 + 1e-12),
                            "Γ bound fails: {} α={alpha} t={t} m={m}: {z} > {sup}",
                            filt.name()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn kernel_is_nonincreasing_in_norm() {
        let hk = kernel(&Filtration::factorial(), 1.0);
        for t in [0.1, 1.0, 10.0] {
            let mut prev = f64::INFINITY;
            for m in -8..=8 {
                let z = hk.kernel_radial(m, t).unwrap();
                assert!(z <= prev * (1.0 + 1e-12), "m={m}");
                prev = z;
            }
        }
    }

    #[test]
    fn pointwise_bound_holds_and_reports_both_sides() {
        for filt in all_filtrations() {
            for alpha in [0.5, 1.0, 2.0] {
                let hk = kernel(&filt, alpha);
                for t in [0.01, 0.1, 1.0, 10.0] {
                    for m in -5..=5 {
                        let chk = hk.pointwise_bound_check(m, t).unwrap();
                        assert!(chk.holds, "{} α={alpha} t={t} m={m}: {chk:?}", filt.name());
                        assert!(chk.bound > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn shell_masses_normalize() {
        for filt in all_filtrations() {
            for alpha in [0.5, 1.0, 2.0] {
                let hk = kernel(&filt, alpha);
                for t in [0.01, 1.0, 10.0] {
                    let mb = hk.mass_balance(t).unwrap();
                    assert!(
                        mb.defect() <= 1e-10 + mb.tail_low_bound + mb.tail_high_bound,
                        "{} α={alpha} t={t}: {mb:?}",
                        filt.name()
                    );
                }
            }
        }
    }

    #[test]
    fn telescoped_deltas_sum_to_one() {
        let hk = kernel(&Filtration::factorial(), 1.0);
        let t = 0.7;
        let mut acc = 0.0;
        for n in hk.window().0..=hk.window().1 {
            acc += hk.delta(n, t).unwrap();
        }
        // add both telescoped tails exactly: exp(−t e^{αψ(n_hi+1)}) above and
        // 1 − exp(−t e^{αψ(n_lo)}) below
        acc += hk.exp_factor(hk.window().1 + 1, t).unwrap();
        acc += -(-t * hk.filtration().ln_value(hk.window().0).unwrap().exp()).exp_m1();
        assert!((acc - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cdf_matches_cumulative_shell_masses() {
        let hk = kernel(&Filtration::factorial(), 1.0);
        for t in [0.1, 1.0] {
            for k in -4..=6 {
                let cdf = hk.radial_cdf(k, t).unwrap();
                let mut acc = 0.0;
                for m in hk.window().0..=k {
                    acc += hk.shell_mass(m, t).unwrap();
                }
                assert!(
                    (cdf - acc).abs() < 1e-10,
                    "k={k} t={t}: cdf {cdf} vs shells {acc}"
                );
            }
        }
    }

    #[test]
    fn cdf_monotone_and_exhausts_mass() {
        let hk = kernel(&Filtration::lcm(), 0.7);
        let t = 0.5;
        let mut prev = 0.0;
        for k in -6..=20 {
            let c = hk.radial_cdf(k, t).unwrap();
            assert!(c + 1e-12 >= prev, "monotone at k={k}");
            prev = c;
        }
        assert!((prev - 1.0).abs() < 1e-10, "mass exhausted, got {prev}");
    }

    #[test]
    fn complement_bounded_by_tail_lemma() {
        for filt in all_filtrations() {
            let hk = kernel(&filt, 1.0);
            for t in [0.01, 0.1, 1.0] {
                for k in 0..=6 {
                    let c = hk.complement_cdf(k, t).unwrap();
                    let bound = hk.tail_bound(k, t).unwrap();
                    assert!(
                        c <= bound * (1.0 + 1e-9) + 1e-300,
                        "{} t={t} k={k}: {c} > {bound}",
                        filt.name()
                    );
                    assert!((1.0 - hk.radial_cdf(k, t).unwrap() - c).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn transition_function_identity_at_zero_time() {
        let filt = Filtration::factorial();
        let hk = kernel(&filt, 1.0);
        let tf = TransitionFunction::new(hk);
        let x = FiniteAdele::from_digits(&filt, 0, &[1, 2], 8).unwrap();
        let center = FiniteAdele::zero(&filt, 8);
        // ord(x) = 0, so x ∈ B_0(0)
        assert_eq!(tf.prob_ball(0.0, &x, &center, 0).unwrap(), 1.0);
        assert_eq!(tf.prob_ball(0.0, &x, &center, -1).unwrap(), 0.0);
    }

    #[test]
    fn transition_probability_cases() {
        let filt = Filtration::factorial();
        let hk = kernel(&filt, 1.0);
        let t = 0.8;
        let tf = TransitionFunction::new(hk.clone());
        let center = FiniteAdele::zero(&filt, 8);

        // inside: equals the radial CDF, independently of which inside
        // point is used (translation invariance)
        let x1 = FiniteAdele::from_digits(&filt, 1, &[1], 8).unwrap();
        let x2 = FiniteAdele::from_digits(&filt, 0, &[1, 1], 8).unwrap();
        let p1 = tf.prob_ball(t, &x1, &center, 2).unwrap();
        let p2 = tf.prob_ball(t, &x2, &center, 2).unwrap();
        assert!((p1 - p2).abs() < 1e-15);
        assert!((p1 - hk.radial_cdf(2, t).unwrap()).abs() < 1e-15);

        // outside: μ(B_k) Z(‖x−c‖, t)
        let far = FiniteAdele::from_digits(&filt, -2, &[1], 8).unwrap();
        let p = tf.prob_ball(t, &far, &center, 0).unwrap();
        let expect = hk.kernel_radial(2, t).unwrap(); // μ(B_0) = 1, ‖far‖ = e^{ψ(2)}
        assert!((p - expect).abs() < 1e-15);
    }

    #[test]
    fn isotropic_kernel_properties() {
        let hk = kernel(&Filtration::factorial(), 1.0);
        for t in [0.1, 1.0] {
            // nonnegative and numerically distinct from Z
            let mut total = 0.0;
            for m in hk.window().0..=hk.window().1 {
                let v = hk.isotropic_kernel_radial(m, t).unwrap();
                assert!(v >= 0.0);
                total += hk.filtration().sphere_measure_f64(m).unwrap() * v;
            }
            assert!((total - 1.0).abs() < 1e-10, "isotropic mass at t={t}: {total}");
            let a = hk.kernel_radial(0, t).unwrap();
            let b = hk.isotropic_kernel_radial(0, t).unwrap();
            assert!((a - b).abs() > 1e-6, "kernels should differ: {a} vs {b}");
        }
    }

    #[test]
    fn chapman_kolmogorov_via_radial_convolution() {
        let filt = Filtration::factorial();
        let hk = kernel(&filt, 1.0);
        let (t, s) = (0.4, 0.9);
        let zt = hk.kernel_table(t).unwrap();
        let zs = hk.kernel_table(s).unwrap();
        for m in -4..=4 {
            let conv = convolve_radial(&filt, &zt, &zs, m).unwrap();
            let direct = hk.kernel_radial(m, t + s).unwrap();
            assert!(
                (conv - direct).abs() < 1e-10,
                "m={m}: {conv} vs {direct}"
            );
        }
    }

    #[test]
    fn semigroup_matches_convolution_on_profiles() {
        use num_complex::Complex64;
        let filt = Filtration::factorial();
        let hk = kernel(&filt, 1.0);

        // single sphere: convolution scales the eigenfunction by
        // exp(−t e^{αψ(n)})
        let rep = hk
            .semigroup_vs_convolution(&RadialProfile::single(1), 0.6, None)
            .unwrap();
        assert!(rep.max_abs < 1e-10, "single sphere: {}", rep.max_abs);

        // small random profile
        let profile = RadialProfile::new([
            (-2, Complex64::new(0.3, 0.0)),
            (0, Complex64::new(-1.1, 0.4)),
            (1, Complex64::new(0.7, -0.2)),
            (3, Complex64::new(0.05, 0.0)),
        ]);
        let rep = hk.semigroup_vs_convolution(&profile, 1.3, None).unwrap();
        assert!(rep.max_abs < 1e-8, "profile: {}", rep.max_abs);

        // t → 0 strong continuity: discrepancy between e^{−tD} f and f
        let p = RadialProfile::single(0);
        let mut prev = f64::INFINITY;
        for t in [1.0, 0.1, 0.01, 0.001] {
            let sp = p.apply_semigroup(&filt, 1.0, t).unwrap();
            let d = (sp.eval_physical(&filt, NormValue::Zero).unwrap()
                - p.eval_physical(&filt, NormValue::Zero).unwrap())
            .norm();
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn markov_conditions_bounded_by_majorants() {
        let hk = kernel(&Filtration::factorial(), 1.0);
        let report = hk
            .markov_conditions_report(&[0.001, 0.01, 0.1, 1.0], &[2, 3, 4, 5, 6], 1)
            .unwrap();
        assert!(report.all_below);
        // MB majorant vanishes as t → 0
        let m0 = report.mb_rows.first().unwrap();
        let m1 = report.mb_rows.last().unwrap();
        assert!(m0.majorant < m1.majorant);
        assert!(m0.measured < 1e-3);
        // LB majorant decays with distance
        let l_first = report.lb_rows.first().unwrap();
        let l_last = report.lb_rows.last().unwrap();
        assert!(l_last.majorant < l_first.majorant);
    }

    #[test]
    fn usage_and_precision_errors() {
        let filt = Filtration::factorial();
        assert!(HeatKernelFin::new(&filt, 0.0, None, None).is_err());
        assert!(HeatKernelFin::new(&filt, 1.0, Some((4, 2)), None).is_err());

        let hk = kernel(&filt, 1.0);
        assert!(matches!(hk.kernel_radial(0, 0.0), Err(Error::Usage(_))));
        assert!(matches!(hk.kernel_radial(0, -1.0), Err(Error::Usage(_))));

        // norm index beyond the window: the series needs terms above n_hi
        let (_, n_hi) = hk.window();
        assert!(matches!(
            hk.kernel_radial(-(n_hi + 1), 1.0),
            Err(Error::Precision(_))
        ));

        // unreachable tolerance on a narrow window
        let narrow =
            Filtration::from_config(&FiltrationConfig::prime_power(2).with_window(-5, 5)).unwrap();
        let hk = HeatKernelFin::new(&narrow, 1.0, Some((-3, 3)), Some(1e-10)).unwrap();
        assert!(matches!(hk.kernel_radial(0, 10.0), Err(Error::Precision(_))));
    }

    #[test]
    fn padic_kernel_matches_brute_force() {
        // prime-power chain against a directly coded p-adic series
        let p = 2u64;
        let filt = Filtration::prime_power(p).unwrap();
        let hk = kernel(&filt, 1.0);
        let (n_lo, _) = hk.window();
        for t in [0.1, 1.0, 5.0] {
            for m in -4..=4i64 {
                let mut brute = 0.0;
                for n in n_lo..=(-m) {
                    let pn = (p as f64).powi(n as i32);
                    let pn1 = (p as f64).powi(n as i32 + 1);
                    brute += pn * ((-t * pn).exp() - (-t * pn1).exp());
                }
                let z = hk.kernel_radial(m, t).unwrap();
                assert!(
                    (z - brute).abs() < 1e-12,
                    "p-adic oracle at m={m} t={t}: {z} vs {brute}"
                );
            }
        }
    }
}
