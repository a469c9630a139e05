//! Division chains `e^{ψ(n)}` and the ultrametric structure they induce.
//!
//! A filtration is a strictly increasing sequence of natural numbers
//! `1 = e^{ψ(0)} | e^{ψ(1)} | e^{ψ(2)} | …`, each dividing the next, with
//! integer ratios `e^{Λ(n)} = e^{ψ(n)}/e^{ψ(n−1)} ≥ 2`. Extended to negative
//! indices by `e^{ψ(−n)} = 1/e^{ψ(n)}`, the chain fixes everything else in
//! this crate: digit radices, ball and sphere measures, norms, and the point
//! spectrum of the heat operator.
//!
//! Chain values are exact big integers (rationals for negative indices);
//! floating point enters only at the kernel-evaluation layer, through the
//! cached logarithms `ψ(n)`.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default index window when a config does not specify one.
pub const DEFAULT_WINDOW: [i64; 2] = [-96, 96];
/// Default cap on the bit size of any cached chain value.
pub const DEFAULT_MAX_BITS: u64 = 1 << 16;

/// Families of built-in chains plus user-supplied ratio lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiltrationKind {
    /// Ratio at index `n` is `n+1`, so `e^{ψ(n)} = (n+1)!`. Cofinal.
    Factorial,
    /// Constant ratio `p`; recovers the `p`-adic chain `p^n`. Not cofinal.
    PrimePower,
    /// Deduplicated `lcm(1..k)` chain; equal consecutive values are skipped
    /// so every ratio stays ≥ 2. Cofinal.
    Lcm,
    /// Explicit ratio list, optionally repeated periodically.
    Custom,
}

/// JSON-facing configuration:
/// `{"type": "factorial" | "prime_power" | "lcm" | "custom",
///   "p": int?, "ratios": [int]?, "window": [n_min, n_max]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiltrationConfig {
    #[serde(rename = "type")]
    pub kind: FiltrationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[i64; 2]>,
    /// Whether a custom ratio list repeats beyond its length. When false,
    /// indices past the list are rejected at construction.
    #[serde(default)]
    pub periodic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_bits: Option<u64>,
}

impl FiltrationConfig {
    pub fn factorial() -> Self {
        FiltrationConfig {
            kind: FiltrationKind::Factorial,
            p: None,
            ratios: None,
            window: None,
            periodic: false,
            max_bits: None,
        }
    }

    pub fn prime_power(p: u64) -> Self {
        FiltrationConfig {
            kind: FiltrationKind::PrimePower,
            p: Some(p),
            ratios: None,
            window: None,
            periodic: false,
            max_bits: None,
        }
    }

    pub fn lcm() -> Self {
        FiltrationConfig {
            kind: FiltrationKind::Lcm,
            p: None,
            ratios: None,
            window: None,
            periodic: false,
            max_bits: None,
        }
    }

    pub fn custom(ratios: Vec<u64>, periodic: bool) -> Self {
        FiltrationConfig {
            kind: FiltrationKind::Custom,
            p: None,
            ratios: Some(ratios),
            window: None,
            periodic,
            max_bits: None,
        }
    }

    pub fn with_window(mut self, n_min: i64, n_max: i64) -> Self {
        self.window = Some([n_min, n_max]);
        self
    }
}

struct Inner {
    name: String,
    n_min: i64,
    n_max: i64,
    /// `e^{ψ(n)}` for `n = 0..=n_max`.
    values: Vec<BigUint>,
    /// `e^{Λ(n)}` for `n = 1..=n_max`; slot 0 holds 1 and is never read.
    ratios: Vec<u64>,
    /// `ψ(n) = ln e^{ψ(n)}` for `n = 0..=n_max`.
    ln_values: Vec<f64>,
}

/// An immutable division chain with all values precomputed over its window.
///
/// Cloning is cheap (shared storage) and all accessors are lock-free, so a
/// filtration can be read from any number of threads.
#[derive(Clone)]
pub struct Filtration {
    inner: Arc<Inner>,
}

impl fmt::Debug for Filtration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Filtration({}, window [{}, {}])",
            self.inner.name, self.inner.n_min, self.inner.n_max
        )
    }
}

impl PartialEq for Filtration {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n_min == other.inner.n_min
                && self.inner.n_max == other.inner.n_max
                && self.inner.ratios == other.inner.ratios)
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Natural log of a big integer, accurate to within a few ulps.
pub(crate) fn ln_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 53 {
        return v.to_f64().expect("small biguint").ln();
    }
    let shift = bits - 53;
    let top: BigUint = v >> shift;
    let m = top.to_f64().expect("53-bit mantissa");
    m.ln() + shift as f64 * std::f64::consts::LN_2
}

impl Filtration {
    pub fn from_config(cfg: &FiltrationConfig) -> Result<Filtration> {
        let [n_min, n_max] = cfg.window.unwrap_or(DEFAULT_WINDOW);
        if n_min > 0 || n_max < 1 {
            return Err(Error::usage(format!(
                "filtration window [{n_min}, {n_max}] must satisfy n_min <= 0 < 1 <= n_max"
            )));
        }
        let max_bits = cfg.max_bits.unwrap_or(DEFAULT_MAX_BITS);
        let count = n_max as usize;

        let (name, ratios): (String, Vec<u64>) = match cfg.kind {
            FiltrationKind::Factorial => (
                "factorial".to_string(),
                (1..=count as u64).map(|n| n + 1).collect(),
            ),
            FiltrationKind::PrimePower => {
                let p = cfg
                    .p
                    .ok_or_else(|| Error::usage("prime_power filtration requires field \"p\""))?;
                if !is_prime(p) {
                    return Err(Error::usage(format!("p = {p} is not prime")));
                }
                (format!("prime_power({p})"), vec![p; count])
            }
            FiltrationKind::Lcm => ("lcm".to_string(), lcm_ratios(count, max_bits)?),
            FiltrationKind::Custom => {
                let list = cfg
                    .ratios
                    .clone()
                    .ok_or_else(|| Error::usage("custom filtration requires field \"ratios\""))?;
                if list.is_empty() {
                    return Err(Error::usage("custom ratio list is empty"));
                }
                if let Some(bad) = list.iter().find(|&&r| r < 2) {
                    return Err(Error::usage(format!("ratio {bad} < 2 is not allowed")));
                }
                if !cfg.periodic && count > list.len() {
                    return Err(Error::usage(format!(
                        "custom ratio list has {} entries but the window needs {count}; \
                         set \"periodic\": true or shrink the window",
                        list.len()
                    )));
                }
                let ratios = (0..count).map(|i| list[i % list.len()]).collect();
                ("custom".to_string(), ratios)
            }
        };

        let mut values = Vec::with_capacity(count + 1);
        let mut ln_values = Vec::with_capacity(count + 1);
        values.push(BigUint::one());
        ln_values.push(0.0);
        for (i, &r) in ratios.iter().enumerate() {
            let next = values[i].clone() * BigUint::from(r);
            if next.bits() > max_bits {
                return Err(Error::resource(format!(
                    "e^psi({}) exceeds the {max_bits}-bit budget",
                    i + 1
                )));
            }
            ln_values.push(ln_biguint(&next));
            values.push(next);
        }

        let mut ratios_full = Vec::with_capacity(count + 1);
        ratios_full.push(1);
        ratios_full.extend(ratios);

        Ok(Filtration {
            inner: Arc::new(Inner {
                name,
                n_min,
                n_max,
                values,
                ratios: ratios_full,
                ln_values,
            }),
        })
    }

    pub fn factorial() -> Filtration {
        Filtration::from_config(&FiltrationConfig::factorial()).expect("factorial default")
    }

    pub fn prime_power(p: u64) -> Result<Filtration> {
        Filtration::from_config(&FiltrationConfig::prime_power(p))
    }

    pub fn lcm() -> Filtration {
        Filtration::from_config(&FiltrationConfig::lcm()).expect("lcm default")
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    /// Index window `[n_min, n_max]` inside which chain values are cached.
    pub fn window(&self) -> (i64, i64) {
        (self.inner.n_min, self.inner.n_max)
    }

    pub fn contains_index(&self, n: i64) -> bool {
        n >= self.inner.n_min && n <= self.inner.n_max
    }

    fn check_index(&self, n: i64) -> Result<()> {
        if self.contains_index(n) {
            Ok(())
        } else {
            Err(Error::resource(format!(
                "index {n} outside the cached window [{}, {}] of filtration {}",
                self.inner.n_min, self.inner.n_max, self.inner.name
            )))
        }
    }

    /// `e^{ψ(n)}` as an exact big integer; requires `0 <= n <= n_max`.
    pub fn value_uint(&self, n: i64) -> Result<&BigUint> {
        self.check_index(n)?;
        if n < 0 {
            return Err(Error::usage(format!(
                "value_uint called with negative index {n}"
            )));
        }
        Ok(&self.inner.values[n as usize])
    }

    /// `e^{ψ(n)}` as an exact rational, valid for any window index. The
    /// identity `e^{ψ(n)} · e^{ψ(−n)} = 1` holds exactly.
    pub fn value(&self, n: i64) -> Result<BigRational> {
        self.check_index(n)?;
        let mag = BigInt::from(self.inner.values[n.unsigned_abs() as usize].clone());
        Ok(if n >= 0 {
            BigRational::from_integer(mag)
        } else {
            BigRational::new(BigInt::one(), mag)
        })
    }

    /// `ψ(n) = ln e^{ψ(n)}`, with `ψ(−n) = −ψ(n)`.
    pub fn ln_value(&self, n: i64) -> Result<f64> {
        self.check_index(n)?;
        let l = self.inner.ln_values[n.unsigned_abs() as usize];
        Ok(if n >= 0 { l } else { -l })
    }

    /// `e^{ψ(n)}` as a float, computed through the cached logarithm.
    pub fn value_f64(&self, n: i64) -> Result<f64> {
        Ok(self.ln_value(n)?.exp())
    }

    /// `e^{Λ(n)} = e^{ψ(n)}/e^{ψ(n−1)}`. Defined for every integer through
    /// `ψ(−n) = −ψ(n)`, which gives `Λ(−n) = Λ(n+1)`.
    pub fn ratio(&self, n: i64) -> Result<u64> {
        let idx = if n >= 1 { n } else { 1 - n };
        self.check_index(idx)?;
        Ok(self.inner.ratios[idx as usize])
    }

    /// Digit radix at position `l`: digits of an adele at position `l` run
    /// over `{0, …, e^{Λ(l+1)} − 1}`.
    pub fn radix(&self, l: i64) -> Result<u64> {
        self.ratio(l + 1)
    }

    /// Haar measure (= radius) of the ball `B_n`, i.e. `e^{ψ(n)}`.
    pub fn ball_measure(&self, n: i64) -> Result<BigRational> {
        self.value(n)
    }

    /// Haar measure of the sphere `S_n`, i.e. `e^{ψ(n)} − e^{ψ(n−1)}`.
    pub fn sphere_measure(&self, n: i64) -> Result<BigRational> {
        Ok(self.value(n)? - self.value(n - 1)?)
    }

    pub fn ball_measure_f64(&self, n: i64) -> Result<f64> {
        self.value_f64(n)
    }

    /// `μ(S_n)` as a float, evaluated as `e^{ψ(n)}(1 − 1/e^{Λ(n)})` to avoid
    /// cancellation between two huge values.
    pub fn sphere_measure_f64(&self, n: i64) -> Result<f64> {
        let r = self.ratio(n)? as f64;
        Ok(self.value_f64(n)? * (1.0 - 1.0 / r))
    }

    /// Maps an exact norm value back to its chain index: returns `n` with
    /// `q = e^{ψ(n)}`, `None` if `q` is not on the chain. `q = 0` is the norm
    /// of zero and has no index.
    pub fn norm_index_of(&self, q: &BigRational) -> Option<i64> {
        if q.is_zero() || q.numer().sign() == num_bigint::Sign::Minus {
            return None;
        }
        let (target, sign): (BigUint, i64) = if q.denom().is_one() {
            (q.numer().magnitude().clone(), 1)
        } else if q.numer().is_one() {
            (q.denom().magnitude().clone(), -1)
        } else {
            return None;
        };
        if target.is_one() {
            return Some(0);
        }
        self.inner
            .values
            .iter()
            .position(|v| *v == target)
            .map(|i| sign * i as i64)
    }

    /// Least cached index `n ≥ 0` such that `m` divides `e^{ψ(n)}`.
    pub fn least_index_divisible_by(&self, m: u64) -> Option<i64> {
        if m == 0 {
            return None;
        }
        let m = BigUint::from(m);
        self.inner
            .values
            .iter()
            .position(|v| (v % &m).is_zero())
            .map(|i| i as i64)
    }

    /// Checks how much of `{1, …, bound}` the cached prefix covers by
    /// division. Uncovered entries are a warning, not an error: prime-power
    /// chains legitimately fail cofinality and give `Q_p`-type completions.
    pub fn validate_cofinality(&self, bound: u64) -> Result<CofinalityReport> {
        if bound < 1 {
            return Err(Error::usage("cofinality bound must be >= 1"));
        }
        let entries: Vec<CofinalityEntry> = (1..=bound)
            .map(|m| CofinalityEntry {
                m,
                least_index: self.least_index_divisible_by(m),
            })
            .collect();
        let uncovered = entries.iter().filter(|e| e.least_index.is_none()).count();
        Ok(CofinalityReport { entries, uncovered })
    }
}

fn lcm_ratios(count: usize, max_bits: u64) -> Result<Vec<u64>> {
    let mut ratios = Vec::with_capacity(count);
    let mut value = BigUint::one();
    let mut k = BigUint::from(2u32);
    while ratios.len() < count {
        let next = value.lcm(&k);
        if next > value {
            let r = (&next / &value)
                .to_u64()
                .ok_or_else(|| Error::resource("lcm chain ratio exceeds u64"))?;
            ratios.push(r);
            value = next;
            if value.bits() > max_bits {
                return Err(Error::resource(format!(
                    "e^psi({}) exceeds the {max_bits}-bit budget",
                    ratios.len()
                )));
            }
        }
        k += 1u32;
    }
    Ok(ratios)
}

#[derive(Debug, Clone, Serialize)]
pub struct CofinalityEntry {
    pub m: u64,
    /// Least `n` with `m | e^{ψ(n)}`, or `None` if uncovered in the cache.
    pub least_index: Option<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CofinalityReport {
    pub entries: Vec<CofinalityEntry>,
    pub uncovered: usize,
}

impl CofinalityReport {
    pub fn all_covered(&self) -> bool {
        self.uncovered == 0
    }
}
