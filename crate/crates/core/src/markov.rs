//! Exact sampling from `Z(·, t)` and simulation of the associated jump
//! process.
//!
//! The kernel law is radial: the norm index of an increment has the shell
//! masses `w_m(t) = μ(S_m) Z(e^{ψ(m)}, t)` as its distribution, and
//! conditionally on landing in `S_m` the increment is Haar-uniform on the
//! sphere. A sampler therefore draws the shell by inverse CDF over a
//! precomputed table and fills digits uniformly. Both certified tails of
//! the table are checked at construction — a draw never fails — and draws
//! falling into the tail region are rejected back into the window, i.e.
//! the sampled law is the kernel law conditioned on the window, at total
//! variation distance below the construction tolerance.
//!
//! Streams are splittable ChaCha streams: every worker derives its own
//! stream from a root seed, so ensembles are reproducible under
//! parallelism and two samplers with equal seeds produce identical output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::adele::{sample_uniform_sphere, FiniteAdele};
use crate::error::{Error, Result};
use crate::heat::HeatKernelFin;

/// The RNG stream type used everywhere in this crate.
pub type Stream = ChaCha12Rng;

/// Root stream for a seed.
pub fn root_stream(seed: u64) -> Stream {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Derives worker stream `worker` from a root seed. Distinct workers get
/// statistically independent streams.
pub fn derive_stream(seed: u64, worker: u64) -> Stream {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(worker);
    rng
}

/// Default number of digit positions kept past the leading digit.
pub const DEFAULT_DIGIT_DEPTH: i64 = 24;

/// Inverse-CDF sampler for one increment law `Z(·, t)`.
#[derive(Debug, Clone)]
pub struct FiniteAdeleSampler {
    kernel: HeatKernelFin,
    t: f64,
    shells: Vec<i64>,
    masses: Vec<f64>,
    cumulative: Vec<f64>,
    in_window: f64,
    tail_low: f64,
    tail_high: f64,
    digit_depth: i64,
}

impl FiniteAdeleSampler {
    /// Precomputes the shell CDF table. Fails here — not at draw time —
    /// when the certified tails exceed the kernel tolerance, suggesting a
    /// wider window.
    pub fn new(
        kernel: &HeatKernelFin,
        t: f64,
        digit_depth: Option<i64>,
    ) -> Result<FiniteAdeleSampler> {
        let digit_depth = digit_depth.unwrap_or(DEFAULT_DIGIT_DEPTH);
        if digit_depth < 1 {
            return Err(Error::usage("digit depth must be at least 1"));
        }
        let balance = kernel.mass_balance(t)?;
        let tol = kernel.tolerance();
        if balance.tail_low_bound > tol / 2.0 || balance.tail_high_bound > tol / 2.0 {
            let (lo, hi) = kernel.window();
            return Err(Error::precision(format!(
                "certified tails ({:.3e} below, {:.3e} above) exceed half the tolerance \
                 {:.1e}; enlarge the series window beyond [{lo}, {hi}]",
                balance.tail_low_bound, balance.tail_high_bound, tol
            )));
        }
        let (n_lo, n_hi) = kernel.window();
        let mut shells = Vec::new();
        let mut masses = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for m in n_lo..=n_hi {
            let w = kernel.shell_mass(m, t)?;
            if w > 0.0 {
                shells.push(m);
                masses.push(w);
                acc += w;
                cumulative.push(acc);
            }
        }
        if shells.is_empty() {
            return Err(Error::precision("no shell carries mass inside the window"));
        }
        Ok(FiniteAdeleSampler {
            kernel: kernel.clone(),
            t,
            shells,
            masses,
            cumulative,
            in_window: acc,
            tail_low: balance.tail_low_bound,
            tail_high: balance.tail_high_bound,
            digit_depth,
        })
    }

    pub fn kernel(&self) -> &HeatKernelFin {
        &self.kernel
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn digit_depth(&self) -> i64 {
        self.digit_depth
    }

    /// Shells with positive window mass and their exact masses.
    pub fn shell_masses(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.shells.iter().copied().zip(self.masses.iter().copied())
    }

    /// Certified mass bounds outside the sampling window.
    pub fn tail_bounds(&self) -> (f64, f64) {
        (self.tail_low, self.tail_high)
    }

    /// Draws the shell index by inverse CDF; uniform draws beyond the
    /// in-window mass (the tail region) are rejected and retried.
    pub fn sample_norm_index<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        loop {
            let u: f64 = rng.gen();
            if u < self.in_window {
                let pos = self.cumulative.partition_point(|&c| c <= u);
                return self.shells[pos.min(self.shells.len() - 1)];
            }
        }
    }

    /// One increment distributed as `Z(·, t)` (conditioned on the certified
    /// window), truncated `digit_depth` positions past the leading digit.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FiniteAdele> {
        let m = self.sample_norm_index(rng);
        let gamma = -m;
        sample_uniform_sphere(self.kernel.filtration(), m, gamma + self.digit_depth, rng)
    }
}

/// A simulated trajectory: states at a strictly increasing time grid, with
/// increments drawn independently from `Z(·, Δt)`.
#[derive(Debug, Clone)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub states: Vec<FiniteAdele>,
}

impl PathSample {
    /// Norm-index trace `‖X_{t_i}‖` (as chain indices, `None` at zero).
    pub fn norm_indices(&self) -> Vec<Option<i64>> {
        self.states.iter().map(|s| s.norm_index()).collect()
    }
}

/// Simulates the process at the given times by stationary independent
/// increments: `X_{t_{i+1}} = X_{t_i} + ΔX` with `ΔX ~ Z(·, t_{i+1} − t_i)`.
/// The start state defaults to zero; `t_0 ≥ 0` and strict monotonicity are
/// required.
pub fn simulate_path<R: Rng + ?Sized>(
    kernel: &HeatKernelFin,
    times: &[f64],
    start: Option<FiniteAdele>,
    digit_depth: Option<i64>,
    rng: &mut R,
) -> Result<PathSample> {
    if times.is_empty() {
        return Err(Error::usage("time grid is empty"));
    }
    if times[0] < 0.0 {
        return Err(Error::usage("times must start at t >= 0"));
    }
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::usage(format!(
                "time grid must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    let depth = digit_depth.unwrap_or(DEFAULT_DIGIT_DEPTH);
    let x0 = match start {
        Some(x) => {
            if x.filtration() != kernel.filtration() {
                return Err(Error::usage("start state uses a different filtration"));
            }
            x
        }
        None => FiniteAdele::zero(kernel.filtration(), depth),
    };

    // one sampler per distinct time step
    let mut samplers: Vec<(u64, FiniteAdeleSampler)> = Vec::new();
    let mut states = Vec::with_capacity(times.len());
    states.push(x0);
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        let key = dt.to_bits();
        let sampler = match samplers.iter().find(|(k, _)| *k == key) {
            Some((_, s)) => s.clone(),
            None => {
                let s = FiniteAdeleSampler::new(kernel, dt, Some(depth))?;
                samplers.push((key, s.clone()));
                s
            }
        };
        let inc = sampler.sample(rng)?;
        let next = states.last().unwrap().add(&inc)?;
        states.push(next);
    }
    Ok(PathSample {
        times: times.to_vec(),
        states,
    })
}

/// Observed shell counts of an ensemble of draws.
#[derive(Debug, Clone, Serialize)]
pub struct ShellFrequencies {
    pub shells: Vec<i64>,
    pub counts: Vec<u64>,
    pub draws: u64,
}

impl ShellFrequencies {
    pub fn collect(sampler: &FiniteAdeleSampler, draws: u64, rng: &mut impl Rng) -> Self {
        let shells: Vec<i64> = sampler.shell_masses().map(|(m, _)| m).collect();
        let lo = shells[0];
        let mut counts = vec![0u64; shells.len()];
        for _ in 0..draws {
            let m = sampler.sample_norm_index(rng);
            counts[(m - lo) as usize] += 1;
        }
        ShellFrequencies {
            shells,
            counts,
            draws,
        }
    }

    pub fn frequency(&self, m: i64) -> f64 {
        match self.shells.iter().position(|&s| s == m) {
            Some(i) => self.counts[i] as f64 / self.draws as f64,
            None => 0.0,
        }
    }
}

/// Goodness-of-fit summary of observed counts against exact probabilities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GofSummary {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub total_variation: f64,
}

/// Pearson chi-squared of the observed counts against expected
/// probabilities, pooling cells with expected count below 5 into one; also
/// reports the total-variation distance `½ Σ |p̂ − p|` over the unpooled
/// cells plus the unobserved remainder.
pub fn goodness_of_fit(observed: &[u64], expected_prob: &[f64], draws: u64) -> Result<GofSummary> {
    if observed.len() != expected_prob.len() {
        return Err(Error::usage("observed/expected length mismatch"));
    }
    let n = draws as f64;
    let mut tv = 0.0;
    let mut remainder = 1.0;
    for (&o, &p) in observed.iter().zip(expected_prob) {
        tv += (o as f64 / n - p).abs();
        remainder -= p;
    }
    tv = 0.5 * (tv + remainder.max(0.0));

    let mut stat = 0.0;
    let mut cells = 0usize;
    let mut pool_obs = 0.0;
    let mut pool_exp = remainder.max(0.0) * n;
    for (&o, &p) in observed.iter().zip(expected_prob) {
        let e = p * n;
        if e < 5.0 {
            pool_obs += o as f64;
            pool_exp += e;
        } else {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    if pool_exp > 0.0 {
        stat += (pool_obs - pool_exp).powi(2) / pool_exp;
        cells += 1;
    }
    if cells < 2 {
        return Err(Error::usage("too few cells for a chi-squared test"));
    }
    let dof = cells - 1;
    let dist = ChiSquared::new(dof as f64)
        .map_err(|e| Error::usage(format!("chi-squared setup: {e}")))?;
    let p_value = 1.0 - dist.cdf(stat);
    Ok(GofSummary {
        statistic: stat,
        dof,
        p_value,
        total_variation: tv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::{Filtration, FiltrationConfig};

    fn kernel() -> HeatKernelFin {
        HeatKernelFin::new(&Filtration::factorial(), 1.0, None, None).unwrap()
    }

    #[test]
    fn equal_seeds_equal_streams() {
        let hk = kernel();
        let s1 = FiniteAdeleSampler::new(&hk, 1.0, None).unwrap();
        let s2 = FiniteAdeleSampler::new(&hk, 1.0, None).unwrap();
        let mut r1 = derive_stream(42, 0);
        let mut r2 = derive_stream(42, 0);
        for _ in 0..200 {
            assert_eq!(s1.sample(&mut r1).unwrap(), s2.sample(&mut r2).unwrap());
        }
        // distinct workers diverge
        let mut r3 = derive_stream(42, 1);
        let diverges = (0..50).any(|_| {
            s1.sample(&mut r1).unwrap().norm_index() != s1.sample(&mut r3).unwrap().norm_index()
        });
        assert!(diverges);
    }

    #[test]
    fn empirical_shell_law_matches_masses() {
        let hk = kernel();
        let sampler = FiniteAdeleSampler::new(&hk, 1.0, None).unwrap();
        let mut rng = derive_stream(7, 0);
        let freqs = ShellFrequencies::collect(&sampler, 100_000, &mut rng);
        let probs: Vec<f64> = sampler.shell_masses().map(|(_, w)| w).collect();
        let gof = goodness_of_fit(&freqs.counts, &probs, freqs.draws).unwrap();
        assert!(gof.p_value > 0.001, "{gof:?}");
        assert!(gof.total_variation < 0.01, "{gof:?}");
    }

    #[test]
    fn empirical_cdf_matches_radial_cdf() {
        let hk = kernel();
        let t = 0.5;
        let sampler = FiniteAdeleSampler::new(&hk, t, None).unwrap();
        let mut rng = derive_stream(11, 0);
        let draws = 50_000u64;
        let k = 1i64;
        let mut inside = 0u64;
        for _ in 0..draws {
            if sampler.sample_norm_index(&mut rng) <= k {
                inside += 1;
            }
        }
        let p = hk.radial_cdf(k, t).unwrap();
        let got = inside as f64 / draws as f64;
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((got - p).abs() < 3.0 * sigma + 1e-9, "{got} vs {p}");
    }

    #[test]
    fn sampled_increment_digits_are_deep_enough() {
        let hk = kernel();
        let sampler = FiniteAdeleSampler::new(&hk, 1.0, Some(10)).unwrap();
        let mut rng = derive_stream(3, 0);
        for _ in 0..100 {
            let x = sampler.sample(&mut rng).unwrap();
            let g = x.order().unwrap();
            assert_eq!(x.truncation(), g + 10);
        }
    }

    #[test]
    fn construction_fails_loudly_on_narrow_window() {
        let filt =
            Filtration::from_config(&FiltrationConfig::prime_power(2).with_window(-6, 6)).unwrap();
        let hk = HeatKernelFin::new(&filt, 0.5, Some((-4, 4)), Some(1e-10)).unwrap();
        let err = FiniteAdeleSampler::new(&hk, 1.0, None).unwrap_err();
        assert!(matches!(err, Error::Precision(_)), "{err}");
        assert!(err.to_string().contains("enlarge"), "{err}");
    }

    #[test]
    fn path_simulation_contracts() {
        let hk = kernel();
        let mut rng = derive_stream(5, 0);
        let times = [0.0, 0.5, 1.0, 1.5, 2.5];
        let path = simulate_path(&hk, &times, None, None, &mut rng).unwrap();
        assert_eq!(path.states.len(), times.len());
        assert!(path.states[0].is_zero());

        // nonmonotone grids are rejected
        assert!(simulate_path(&hk, &[0.0, 1.0, 1.0], None, None, &mut rng).is_err());
        assert!(simulate_path(&hk, &[-1.0, 1.0], None, None, &mut rng).is_err());
    }

    #[test]
    fn small_jumps_leave_the_norm_unchanged() {
        // ultrametric equality case: ‖x + δ‖ = ‖x‖ whenever ‖δ‖ < ‖x‖
        let filt = Filtration::factorial();
        let mut rng = derive_stream(13, 0);
        for _ in 0..100 {
            let x = crate::adele::sample_uniform_sphere(&filt, 3, 12, &mut rng).unwrap();
            let small = crate::adele::sample_uniform_sphere(&filt, 1, 12, &mut rng).unwrap();
            let y = x.add(&small).unwrap();
            assert_eq!(y.norm_index(), x.norm_index());
        }
    }

    #[test]
    fn one_step_exit_probability_respects_tail_bound() {
        let hk = kernel();
        let t = 0.25;
        let k = 2i64;
        let sampler = FiniteAdeleSampler::new(&hk, t, None).unwrap();
        let mut rng = derive_stream(17, 0);
        let draws = 50_000u64;
        let mut exits = 0u64;
        for _ in 0..draws {
            if sampler.sample_norm_index(&mut rng) > k {
                exits += 1;
            }
        }
        let bound = hk.tail_bound(k, t).unwrap();
        let got = exits as f64 / draws as f64;
        let sigma = (bound * (1.0 - bound) / draws as f64).sqrt().max(1e-5);
        assert!(got <= bound + 3.0 * sigma, "{got} vs bound {bound}");
    }

    #[test]
    fn two_step_marginal_matches_one_step() {
        let hk = kernel();
        let mut rng = derive_stream(23, 0);
        let draws = 30_000;
        let t2 = 1.0;
        let t1 = 0.4;
        let one = FiniteAdeleSampler::new(&hk, t2, None).unwrap();
        let a = FiniteAdeleSampler::new(&hk, t1, None).unwrap();
        let b = FiniteAdeleSampler::new(&hk, t2 - t1, None).unwrap();

        let mut count_one = std::collections::BTreeMap::new();
        let mut count_two = std::collections::BTreeMap::new();
        for _ in 0..draws {
            *count_one.entry(one.sample_norm_index(&mut rng)).or_insert(0u64) += 1;
            let x = a.sample(&mut rng).unwrap();
            let y = b.sample(&mut rng).unwrap();
            let idx = x.add(&y).unwrap().norm_index();
            *count_two.entry(idx).or_insert(0u64) += 1;
        }
        // compare the three heaviest shells within sampling error
        let n = draws as f64;
        let mut heavy: Vec<(i64, u64)> = count_one.iter().map(|(&m, &c)| (m, c)).collect();
        heavy.sort_by_key(|&(_, c)| std::cmp::Reverse(c));
        for &(m, c1) in heavy.iter().take(3) {
            let c2 = *count_two.get(&Some(m)).unwrap_or(&0);
            let p = c1 as f64 / n;
            let sigma = (2.0 * p * (1.0 - p) / n).sqrt();
            assert!(
                ((c1 as f64 - c2 as f64) / n).abs() < 4.0 * sigma,
                "shell {m}: {c1} vs {c2}"
            );
        }
    }
}
