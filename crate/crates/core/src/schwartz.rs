//! Bruhat–Schwartz spaces, character integrals, and the Fourier transform.
//!
//! `D_k^l` is the finite-dimensional space of functions supported in the
//! ball `B_k` and constant on cosets of `B_l` (`l ≤ k`); its dimension is
//! the group index `e^{ψ(k)}/e^{ψ(l)}`. Under the canonical digit
//! enumeration of coset representatives the quotient `B_k/B_l` is cyclic,
//! and the adelic Fourier transform `Fφ(ξ) = ∫ φ(x) χ(ξx) dx` becomes a
//! plain DFT of that order, scaled by the coset measure `e^{ψ(l)}`. The
//! transform maps `D_k^l` onto `D_{−l}^{−k}`.
//!
//! The character integrals over balls and spheres have closed forms:
//!
//! ```text
//! ∫_{B_n} χ(−ξx) dx = e^{ψ(n)}                 if ‖ξ‖ ≤ e^{−ψ(n)}, else 0
//! ∫_{S_n} χ(−ξx) dx = e^{ψ(n)} − e^{ψ(n−1)}    if ‖ξ‖ ≤ e^{−ψ(n)}
//!                   = −e^{ψ(n−1)}              if ‖ξ‖ = e^{−ψ(n−1)}
//!                   = 0                        if ‖ξ‖ ≥ e^{−ψ(n−2)}
//! ```
//!
//! These drive the radial eigenfunctions `F^{−1}(1_{S_n})` of the heat
//! operator and the sphere-decomposition oracle used by the test suites.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use rustfft::FftPlanner;

use crate::adele::FiniteAdele;
use crate::error::{Error, Result};
use crate::filtration::Filtration;

/// Fourier matrices are materialized only up to this dimension; beyond it
/// the closed-form action (FFT on ranks) is the only interface.
pub const MATRIX_CAP: usize = 4096;
/// Hard cap on coefficient vectors.
pub const DIM_CAP: usize = 1 << 20;

/// An ultrametric norm value: either `0` (norm of zero) or a chain value
/// `e^{ψ(n)}` identified by its index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormValue {
    Zero,
    Index(i64),
}

impl NormValue {
    pub fn of(x: &FiniteAdele) -> NormValue {
        match x.norm_index() {
            None => NormValue::Zero,
            Some(m) => NormValue::Index(m),
        }
    }

    /// Interprets an exact rational as a norm value on the chain.
    pub fn from_rational(filt: &Filtration, q: &BigRational) -> Result<NormValue> {
        use num_traits::Zero;
        if q.is_zero() {
            return Ok(NormValue::Zero);
        }
        filt.norm_index_of(q)
            .map(NormValue::Index)
            .ok_or_else(|| Error::usage(format!("{q} is not a norm value of chain {}", filt.name())))
    }
}

/// `∫_{B_n} χ(−ξx) dx` as a function of `‖ξ‖`.
pub fn char_integral_ball(filt: &Filtration, n: i64, xi_norm: NormValue) -> Result<f64> {
    let inside = match xi_norm {
        NormValue::Zero => true,
        NormValue::Index(j) => j <= -n,
    };
    if inside {
        filt.ball_measure_f64(n)
    } else {
        Ok(0.0)
    }
}

/// `∫_{S_n} χ(−ξx) dx` as a function of `‖ξ‖`.
pub fn char_integral_sphere(filt: &Filtration, n: i64, xi_norm: NormValue) -> Result<f64> {
    let j = match xi_norm {
        NormValue::Zero => return filt.sphere_measure_f64(n),
        NormValue::Index(j) => j,
    };
    if j <= -n {
        filt.sphere_measure_f64(n)
    } else if j == -n + 1 {
        Ok(-filt.ball_measure_f64(n - 1)?)
    } else {
        Ok(0.0)
    }
}

/// Evaluates the radial eigenfunction `F^{−1}(1_{S_n})` at `x`. Real by the
/// symmetry of the sphere integrals; equals `μ(S_n)` at `x = 0` and
/// vanishes for `‖x‖ ≥ e^{−ψ(n−2)}`.
pub fn eigenfunction_eval(filt: &Filtration, n: i64, x: &FiniteAdele) -> Result<f64> {
    char_integral_sphere(filt, n, NormValue::of(x))
}

/// Element of `D_k^l`: coefficients over the canonical coset enumeration of
/// `B_k/B_l` (digit positions `[−k, −l)`, lowest position least
/// significant).
#[derive(Debug, Clone)]
pub struct TestFunction {
    filt: Filtration,
    k: i64,
    l: i64,
    coeffs: Vec<Complex64>,
}

/// Dimension `e^{ψ(k)}/e^{ψ(l)}` of `D_k^l`, as the product of the digit
/// radices over `[−k, −l)`.
pub fn space_dim(filt: &Filtration, k: i64, l: i64) -> Result<usize> {
    if l > k {
        return Err(Error::usage(format!("constancy index l = {l} exceeds support index k = {k}")));
    }
    let mut dim: usize = 1;
    for pos in -k..-l {
        let r = filt.radix(pos)? as usize;
        dim = dim
            .checked_mul(r)
            .filter(|&d| d <= DIM_CAP)
            .ok_or_else(|| {
                Error::resource(format!("dim of D_{k}^{l} exceeds the cap {DIM_CAP}"))
            })?;
    }
    Ok(dim)
}

impl TestFunction {
    pub fn new(filt: &Filtration, k: i64, l: i64, coeffs: Vec<Complex64>) -> Result<TestFunction> {
        let dim = space_dim(filt, k, l)?;
        if coeffs.len() != dim {
            return Err(Error::usage(format!(
                "D_{k}^{l} has dimension {dim}, got {} coefficients",
                coeffs.len()
            )));
        }
        Ok(TestFunction {
            filt: filt.clone(),
            k,
            l,
            coeffs,
        })
    }

    pub fn zero(filt: &Filtration, k: i64, l: i64) -> Result<TestFunction> {
        let dim = space_dim(filt, k, l)?;
        Ok(TestFunction {
            filt: filt.clone(),
            k,
            l,
            coeffs: vec![Complex64::new(0.0, 0.0); dim],
        })
    }

    /// The indicator `1_{c + B_l}` inside `D_k^l`.
    pub fn indicator(filt: &Filtration, k: i64, l: i64, c: &FiniteAdele) -> Result<TestFunction> {
        let mut tf = TestFunction::zero(filt, k, l)?;
        let rank = tf
            .rank_of(c)?
            .ok_or_else(|| Error::usage("indicator center lies outside B_k"))?;
        tf.coeffs[rank] = Complex64::new(1.0, 0.0);
        Ok(tf)
    }

    pub fn support_index(&self) -> i64 {
        self.k
    }

    pub fn constancy_index(&self) -> i64 {
        self.l
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filt
    }

    /// Canonical representative of the coset with the given rank: the rank's
    /// mixed-radix digits laid out over positions `[−k, −l)`.
    pub fn coset_rep(&self, mut rank: usize) -> Result<FiniteAdele> {
        if rank >= self.coeffs.len() {
            return Err(Error::usage(format!("rank {rank} out of range")));
        }
        let mut digits = Vec::new();
        for pos in -self.k..-self.l {
            let r = self.filt.radix(pos)? as usize;
            digits.push((rank % r) as u64);
            rank /= r;
        }
        FiniteAdele::from_digits(&self.filt, -self.k, &digits, -self.l)
    }

    /// Rank of the coset of `x` in `B_k/B_l`; `None` when `x ∉ B_k`. The
    /// digits of `x` must be resolved at least to position `−l`.
    pub fn rank_of(&self, x: &FiniteAdele) -> Result<Option<usize>> {
        match x.order() {
            Some(g) if g < -self.k => return Ok(None),
            _ => {}
        }
        if x.truncation() < -self.l && !x.is_zero() {
            return Err(Error::precision(format!(
                "digits of x resolved only to {}, need {}",
                x.truncation(),
                -self.l
            )));
        }
        let mut rank = 0usize;
        let mut stride = 1usize;
        for pos in -self.k..-self.l {
            let r = self.filt.radix(pos)? as usize;
            rank += stride * x.digit_at(pos) as usize;
            stride *= r;
        }
        Ok(Some(rank))
    }

    pub fn value_at(&self, x: &FiniteAdele) -> Result<Complex64> {
        Ok(match self.rank_of(x)? {
            None => Complex64::new(0.0, 0.0),
            Some(r) => self.coeffs[r],
        })
    }

    fn fft(&self, inverse: bool) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        let mut planner = FftPlanner::new();
        let fft = if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        };
        fft.process(&mut buf);
        buf
    }

    /// The Fourier transform `Fφ(ξ) = ∫ φ(x) χ(ξx) dx`, an element of
    /// `D_{−l}^{−k}`. On coset ranks this is the cyclic DFT with kernel
    /// `e^{2πi AB/D}` times the coset measure `e^{ψ(l)}`.
    pub fn fourier(&self) -> Result<TestFunction> {
        let scale = self.filt.value_f64(self.l)?;
        let mut buf = self.fft(true);
        for v in &mut buf {
            *v *= scale;
        }
        TestFunction::new(&self.filt, -self.l, -self.k, buf)
    }

    /// The inverse transform `F^{−1}φ(x) = ∫ φ(ξ) χ(−xξ) dξ`, also landing
    /// in `D_{−l}^{−k}`; satisfies `F^{−1} ∘ F = id`.
    pub fn inverse_fourier(&self) -> Result<TestFunction> {
        let scale = self.filt.value_f64(self.l)?;
        let mut buf = self.fft(false);
        for v in &mut buf {
            *v *= scale;
        }
        TestFunction::new(&self.filt, -self.l, -self.k, buf)
    }

    /// `⟨φ, ψ⟩ = ∫ φ ψ̄ dx = e^{ψ(l)} Σ_A φ_A ψ̄_A` on a common space.
    pub fn inner_product(&self, other: &TestFunction) -> Result<Complex64> {
        if self.k != other.k || self.l != other.l || self.filt != other.filt {
            return Err(Error::usage("inner product requires a common D_k^l"));
        }
        let scale = self.filt.value_f64(self.l)?;
        let sum: Complex64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(sum * scale)
    }

    pub fn l2_norm(&self) -> Result<f64> {
        Ok(self.inner_product(self)?.re.max(0.0).sqrt())
    }

    /// Averages the coefficients over each sphere of representatives,
    /// keyed by the representative's norm index (`None` for the `B_l`
    /// cell). Radial functions are fixed points of this averaging.
    pub fn radialize(&self) -> Result<BTreeMap<Option<i64>, Complex64>> {
        let mut sums: BTreeMap<Option<i64>, (Complex64, usize)> = BTreeMap::new();
        for rank in 0..self.dim() {
            let rep = self.coset_rep(rank)?;
            let e = sums
                .entry(rep.norm_index())
                .or_insert((Complex64::new(0.0, 0.0), 0));
            e.0 += self.coeffs[rank];
            e.1 += 1;
        }
        Ok(sums
            .into_iter()
            .map(|(k, (s, n))| (k, s / n as f64))
            .collect())
    }

    /// JSON form `{"k":…, "l":…, "coeffs":[{"rep":"γ:[…]@T","re":…,"im":…}]}`
    /// listing nonzero coefficients only.
    pub fn to_json(&self) -> Result<serde_json::Value> {
        let mut coeffs = Vec::new();
        for (rank, c) in self.coeffs.iter().enumerate() {
            if c.norm_sqr() > 0.0 {
                coeffs.push(serde_json::json!({
                    "rep": self.coset_rep(rank)?.to_string(),
                    "re": c.re,
                    "im": c.im,
                }));
            }
        }
        Ok(serde_json::json!({ "k": self.k, "l": self.l, "coeffs": coeffs }))
    }

    pub fn from_json(filt: &Filtration, v: &serde_json::Value) -> Result<TestFunction> {
        let bad = |what: &str| Error::usage(format!("test function JSON: {what}"));
        let k = v["k"].as_i64().ok_or_else(|| bad("missing k"))?;
        let l = v["l"].as_i64().ok_or_else(|| bad("missing l"))?;
        let mut tf = TestFunction::zero(filt, k, l)?;
        let items = v["coeffs"].as_array().ok_or_else(|| bad("missing coeffs"))?;
        for item in items {
            let rep_s = item["rep"].as_str().ok_or_else(|| bad("missing rep"))?;
            let rep = crate::adele::parse_adele(filt, rep_s)?;
            let rank = tf
                .rank_of(&rep)?
                .ok_or_else(|| bad("rep outside the support ball"))?;
            let re = item["re"].as_f64().unwrap_or(0.0);
            let im = item["im"].as_f64().unwrap_or(0.0);
            tf.coeffs[rank] = Complex64::new(re, im);
        }
        Ok(tf)
    }
}

/// Dense Fourier matrix on `D_k^l` (entry `[B][A] = e^{ψ(l)} ω^{AB}`),
/// available only up to [`MATRIX_CAP`].
pub fn fourier_matrix(filt: &Filtration, k: i64, l: i64) -> Result<Vec<Vec<Complex64>>> {
    let dim = space_dim(filt, k, l)?;
    if dim > MATRIX_CAP {
        return Err(Error::resource(format!(
            "dim {dim} exceeds the dense-matrix cap {MATRIX_CAP}"
        )));
    }
    let scale = filt.value_f64(l)?;
    let omega = 2.0 * std::f64::consts::PI / dim as f64;
    let mut rows = Vec::with_capacity(dim);
    for b in 0..dim {
        let mut row = Vec::with_capacity(dim);
        for a in 0..dim {
            let theta = omega * ((a * b) % dim) as f64;
            row.push(Complex64::new(theta.cos(), theta.sin()) * scale);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// A finitely supported radial function on the Fourier side,
/// `Σ_n c_n 1_{S_n}`. This is the widest class on which the spectral
/// action of `D^α` is well defined pointwise — the multiplier `‖ξ‖^α` is
/// not locally constant at 0, so general test functions are not closed
/// under it.
#[derive(Debug, Clone, Default)]
pub struct RadialProfile {
    coeffs: BTreeMap<i64, Complex64>,
}

impl RadialProfile {
    pub fn new(pairs: impl IntoIterator<Item = (i64, Complex64)>) -> RadialProfile {
        RadialProfile {
            coeffs: pairs
                .into_iter()
                .filter(|(_, c)| c.norm_sqr() > 0.0)
                .collect(),
        }
    }

    pub fn single(n: i64) -> RadialProfile {
        RadialProfile::new([(n, Complex64::new(1.0, 0.0))])
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        self.coeffs
            .get(&n)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    /// Diagonal action of the multiplier `‖ξ‖^α`: `c_n ↦ e^{αψ(n)} c_n`.
    pub fn apply_multiplier(&self, filt: &Filtration, alpha: f64) -> Result<RadialProfile> {
        let mut out = BTreeMap::new();
        for (&n, &c) in &self.coeffs {
            out.insert(n, c * (alpha * filt.ln_value(n)?).exp());
        }
        Ok(RadialProfile { coeffs: out })
    }

    /// Diagonal action of the heat semigroup: `c_n ↦ exp(−t e^{αψ(n)}) c_n`.
    pub fn apply_semigroup(&self, filt: &Filtration, alpha: f64, t: f64) -> Result<RadialProfile> {
        if t < 0.0 {
            return Err(Error::usage("semigroup time must be nonnegative"));
        }
        let mut out = BTreeMap::new();
        for (&n, &c) in &self.coeffs {
            let lam = (alpha * filt.ln_value(n)?).exp();
            out.insert(n, c * (-t * lam).exp());
        }
        Ok(RadialProfile { coeffs: out })
    }

    /// Physical-space value of `F^{−1}(Σ c_n 1_{S_n})` at any point of the
    /// given norm.
    pub fn eval_physical(&self, filt: &Filtration, x_norm: NormValue) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&n, &c) in &self.coeffs {
            acc += c * char_integral_sphere(filt, n, x_norm)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adele::{character, sample_uniform_sphere};
    use num_traits::One;
    use rand::{Rng, SeedableRng};

    fn factorial() -> Filtration {
        Filtration::factorial()
    }

    #[test]
    fn ball_integral_regimes() {
        let f = factorial();
        assert_eq!(char_integral_ball(&f, 0, NormValue::Zero).unwrap(), 1.0);
        // ‖ξ‖ = e^{ψ(1)} = 2 > 1 = e^{−ψ(0)}
        assert_eq!(
            char_integral_ball(&f, 0, NormValue::Index(1)).unwrap(),
            0.0
        );
        assert_eq!(
            char_integral_ball(&f, 2, NormValue::Index(-2)).unwrap(),
            6.0
        );
    }

    #[test]
    fn sphere_integral_regimes() {
        let f = factorial();
        // μ(S_1) = 2 − 1 = 1 at ‖ξ‖ ≤ e^{−ψ(1)}
        assert_eq!(
            char_integral_sphere(&f, 1, NormValue::Index(-1)).unwrap(),
            1.0
        );
        // middle regime: ‖ξ‖ = e^{−ψ(0)} = 1 gives −e^{ψ(0)} = −1
        assert_eq!(
            char_integral_sphere(&f, 1, NormValue::Index(0)).unwrap(),
            -1.0
        );
        // outer regime
        assert_eq!(
            char_integral_sphere(&f, 1, NormValue::Index(1)).unwrap(),
            0.0
        );
    }

    #[test]
    fn sphere_integrals_telescope_to_ball() {
        let f = factorial();
        for xi in [NormValue::Zero, NormValue::Index(-4), NormValue::Index(0), NormValue::Index(2)]
        {
            for n in -3..=3 {
                let mut acc = 0.0;
                for m in -20..=n {
                    acc += char_integral_sphere(&f, m, xi).unwrap();
                }
                let ball = char_integral_ball(&f, n, xi).unwrap();
                let low = char_integral_ball(&f, -21, xi).unwrap();
                assert!(
                    (acc + low - ball).abs() < 1e-12,
                    "telescoping at n={n}, xi={xi:?}"
                );
            }
        }
    }

    #[test]
    fn unit_ball_indicator_is_self_dual() {
        let f = factorial();
        let tf = TestFunction::indicator(&f, 0, 0, &FiniteAdele::zero(&f, 0)).unwrap();
        let ft = tf.fourier().unwrap();
        assert_eq!(ft.support_index(), 0);
        assert_eq!(ft.constancy_index(), 0);
        assert!((ft.coeffs()[0] - Complex64::one()).norm() < 1e-15);
    }

    fn random_tf(filt: &Filtration, k: i64, l: i64, rng: &mut impl Rng) -> TestFunction {
        let dim = space_dim(filt, k, l).unwrap();
        let coeffs = (0..dim)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        TestFunction::new(filt, k, l, coeffs).unwrap()
    }

    #[test]
    fn fourier_agrees_with_character_sum_dft() {
        let f = factorial();
        let (k, l) = (2i64, -2i64);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        let tf = random_tf(&f, k, l, &mut rng);
        let ft = tf.fourier().unwrap();
        assert_eq!(ft.support_index(), -l);
        assert_eq!(ft.constancy_index(), -k);

        // naive oracle: e^{ψ(l)} Σ_A φ(c_A) χ(ξ_B c_A) with the exact adele
        // character, O(dim²)
        let scale = f.value_f64(l).unwrap();
        for b in 0..ft.dim() {
            let xi = ft.coset_rep(b).unwrap();
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..tf.dim() {
                let c = tf.coset_rep(a).unwrap();
                acc += tf.coeffs()[a] * character(&xi, &c).unwrap();
            }
            acc *= scale;
            assert!(
                (acc - ft.coeffs()[b]).norm() < 1e-10,
                "rank {b}: {acc} vs {}",
                ft.coeffs()[b]
            );
        }
    }

    #[test]
    fn fourier_matrix_matches_fft_action() {
        let f = factorial();
        let (k, l) = (1i64, -2i64);
        let mat = fourier_matrix(&f, k, l).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(9);
        let tf = random_tf(&f, k, l, &mut rng);
        let ft = tf.fourier().unwrap();
        for (b, row) in mat.iter().enumerate() {
            let acc: Complex64 = row.iter().zip(tf.coeffs()).map(|(m, c)| m * c).sum();
            assert!((acc - ft.coeffs()[b]).norm() < 1e-10);
        }
    }

    #[test]
    fn inversion_and_double_transform() {
        let f = factorial();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(13);
        let tf = random_tf(&f, 2, -1, &mut rng);

        let back = tf.fourier().unwrap().inverse_fourier().unwrap();
        for (a, b) in tf.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).norm() < 1e-12, "F^{{-1}}F should be the identity");
        }

        // F² is reflection: (FFφ)(x) = φ(−x)
        let twice = tf.fourier().unwrap().fourier().unwrap();
        for rank in 0..tf.dim() {
            let rep = tf.coset_rep(rank).unwrap();
            let neg_rank = tf.rank_of(&rep.neg()).unwrap().unwrap();
            assert!(
                (twice.coeffs()[rank] - tf.coeffs()[neg_rank]).norm() < 1e-12,
                "rank {rank}"
            );
        }
    }

    #[test]
    fn parseval_identity() {
        let f = factorial();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(17);
        for (k, l) in [(2, -2), (3, -1), (1, -3)] {
            let a = random_tf(&f, k, l, &mut rng);
            let b = random_tf(&f, k, l, &mut rng);
            let lhs = a.inner_product(&b).unwrap();
            let rhs = a
                .fourier()
                .unwrap()
                .inner_product(&b.fourier().unwrap())
                .unwrap();
            assert!(
                (lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()),
                "D_{k}^{l}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn eigenfunction_values() {
        let f = factorial();
        let zero = FiniteAdele::zero(&f, 8);
        for n in -3..=3 {
            let at_zero = eigenfunction_eval(&f, n, &zero).unwrap();
            assert!(
                (at_zero - f.sphere_measure_f64(n).unwrap()).abs() < 1e-12,
                "value at 0 is μ(S_n)"
            );
        }
        // vanishing for ‖x‖ ≥ e^{−ψ(n−2)}
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(23);
        let n = 1i64;
        for m in (-n + 2)..=(-n + 4) {
            let x = sample_uniform_sphere(&f, m, m.abs() + 6, &mut rng).unwrap();
            assert_eq!(eigenfunction_eval(&f, n, &x).unwrap(), 0.0);
        }
    }

    #[test]
    fn radial_profile_physical_side() {
        let f = factorial();
        let profile = RadialProfile::new([
            (0, Complex64::new(1.0, 0.0)),
            (2, Complex64::new(-0.5, 0.25)),
        ]);
        let v = profile.eval_physical(&f, NormValue::Zero).unwrap();
        let expect = Complex64::new(1.0, 0.0) * f.sphere_measure_f64(0).unwrap()
            + Complex64::new(-0.5, 0.25) * f.sphere_measure_f64(2).unwrap();
        assert!((v - expect).norm() < 1e-12);

        // multiplier action scales a single-sphere profile globally
        let single = RadialProfile::single(2);
        let scaled = single.apply_multiplier(&f, 1.5).unwrap();
        let lam = (1.5 * f.ln_value(2).unwrap()).exp();
        for m in [NormValue::Zero, NormValue::Index(-2), NormValue::Index(-1)] {
            let a = single.eval_physical(&f, m).unwrap();
            let b = scaled.eval_physical(&f, m).unwrap();
            assert!((b - a * lam).norm() < 1e-9 * (1.0 + a.norm() * lam));
        }
    }

    #[test]
    fn radialization_fixes_radial_functions() {
        let f = factorial();
        // build the physical-side eigenfunction F^{-1}(1_{S_1}) inside D_2^{-2}
        let (k, l) = (2i64, -2i64);
        let mut tf = TestFunction::zero(&f, k, l).unwrap();
        let dim = tf.dim();
        for rank in 0..dim {
            let rep = tf.coset_rep(rank).unwrap();
            let v = eigenfunction_eval(&f, 1, &rep).unwrap();
            tf.coeffs_mut()[rank] = Complex64::new(v, 0.0);
        }
        let radial = tf.radialize().unwrap();
        for (key, avg) in radial {
            let probe = match key {
                None => FiniteAdele::zero(&f, -l),
                Some(m) => {
                    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(29);
                    sample_uniform_sphere(&f, m, -l, &mut rng).unwrap()
                }
            };
            let direct = tf.value_at(&probe).unwrap();
            assert!((avg - direct).norm() < 1e-12, "cell {key:?}");
        }
    }

    #[test]
    fn json_round_trip() {
        let f = factorial();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(31);
        let tf = random_tf(&f, 1, -1, &mut rng);
        let v = tf.to_json().unwrap();
        let back = TestFunction::from_json(&f, &v).unwrap();
        for (a, b) in tf.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn dimension_matches_group_index() {
        let f = factorial();
        for (k, l) in [(0i64, 0i64), (2, -2), (3, 0), (0, -3), (-1, -2)] {
            let dim = space_dim(&f, k, l).unwrap();
            let index = f.value(k).unwrap() / f.value(l).unwrap();
            assert_eq!(
                BigRational::from_integer((dim as i64).into()),
                index,
                "D_{k}^{l}"
            );
        }
        assert!(space_dim(&f, -2, -1).is_err());
    }
}
