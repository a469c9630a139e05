//! Exact finite-adele arithmetic.
//!
//! A nonzero finite adele has a unique series expansion
//! `x = Σ_{l≥γ} x_l e^{ψ(l)}` with mixed-radix digits
//! `x_l ∈ {0, …, e^{Λ(l+1)} − 1}` and leading digit `x_γ ≠ 0`; the starting
//! index `γ = ord(x)` is the adelic order and `‖x‖ = e^{−ψ(γ)}`.
//!
//! A [`FiniteAdele`] here stores digits up to a truncation index `T` and is
//! an exact representative of the coset `x + B_{−T}`: every operation is
//! exact on the digit window it reports. Rationals whose denominator divides
//! a cached chain value embed by greedy mixed-radix expansion; negative
//! rationals embed via radix complement, so their trailing top digits are
//! truncated together with everything else at `T`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::filtration::Filtration;

/// A truncated digit expansion over a fixed filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteAdele {
    filt: Filtration,
    /// Adelic order; `None` encodes `γ = +∞`, i.e. zero (up to truncation).
    gamma: Option<i64>,
    /// `digits[i]` sits at position `gamma + i`; empty iff zero.
    digits: Vec<u64>,
    /// Positions `>= trunc` are unspecified (zero by convention).
    trunc: i64,
}

fn check_position(filt: &Filtration, l: i64) -> Result<()> {
    // digit radix at position l is e^{Λ(l+1)}
    filt.radix(l).map(|_| ())
}

impl FiniteAdele {
    /// The zero coset representative at truncation `trunc`.
    pub fn zero(filt: &Filtration, trunc: i64) -> FiniteAdele {
        FiniteAdele {
            filt: filt.clone(),
            gamma: None,
            digits: Vec::new(),
            trunc,
        }
    }

    /// Builds an adele from digits starting at position `gamma`. Shorter
    /// digit slices are padded with zeros up to `trunc`; leading zeros are
    /// normalized away.
    pub fn from_digits(
        filt: &Filtration,
        gamma: i64,
        digits: &[u64],
        trunc: i64,
    ) -> Result<FiniteAdele> {
        if gamma >= trunc {
            return Err(Error::usage(format!(
                "digit window [{gamma}, {trunc}) is empty"
            )));
        }
        let len = (trunc - gamma) as usize;
        if digits.len() > len {
            return Err(Error::usage(format!(
                "{} digits exceed the window [{gamma}, {trunc})",
                digits.len()
            )));
        }
        check_position(filt, gamma)?;
        check_position(filt, trunc - 1)?;
        let mut full = vec![0u64; len];
        full[..digits.len()].copy_from_slice(digits);
        for (i, &d) in full.iter().enumerate() {
            let r = filt.radix(gamma + i as i64)?;
            if d >= r {
                return Err(Error::usage(format!(
                    "digit {d} at position {} exceeds radix {r}",
                    gamma + i as i64
                )));
            }
        }
        Ok(Self::normalized(filt.clone(), gamma, full, trunc))
    }

    /// Strips leading zeros and collapses all-zero digit strings to zero.
    fn normalized(filt: Filtration, gamma: i64, mut digits: Vec<u64>, trunc: i64) -> FiniteAdele {
        let lead = digits.iter().position(|&d| d != 0);
        match lead {
            None => FiniteAdele {
                filt,
                gamma: None,
                digits: Vec::new(),
                trunc,
            },
            Some(k) => {
                digits.drain(..k);
                FiniteAdele {
                    filt,
                    gamma: Some(gamma + k as i64),
                    digits,
                    trunc,
                }
            }
        }
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filt
    }

    pub fn is_zero(&self) -> bool {
        self.gamma.is_none()
    }

    /// The adelic order `γ`; `None` stands for `+∞` (zero). Satisfies
    /// `ord(x+y) ≥ min(ord(x), ord(y))`.
    pub fn order(&self) -> Option<i64> {
        self.gamma
    }

    /// Norm index `m` with `‖x‖ = e^{ψ(m)}`, i.e. `m = −γ`; `None` for zero.
    pub fn norm_index(&self) -> Option<i64> {
        self.gamma.map(|g| -g)
    }

    /// `‖x‖ = e^{−ψ(ord x)}` as an exact rational; `‖0‖ = 0`.
    pub fn norm(&self) -> BigRational {
        match self.gamma {
            None => BigRational::zero(),
            Some(g) => self.filt.value(-g).expect("order inside window"),
        }
    }

    pub fn norm_f64(&self) -> f64 {
        match self.gamma {
            None => 0.0,
            Some(g) => self.filt.value_f64(-g).expect("order inside window"),
        }
    }

    pub fn truncation(&self) -> i64 {
        self.trunc
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    /// Digit at position `l` (zero outside the stored window).
    pub fn digit_at(&self, l: i64) -> u64 {
        match self.gamma {
            None => 0,
            Some(g) => {
                if l < g || l >= self.trunc {
                    0
                } else {
                    self.digits[(l - g) as usize]
                }
            }
        }
    }

    fn require_same_filtration(&self, other: &FiniteAdele) -> Result<()> {
        if self.filt == other.filt {
            Ok(())
        } else {
            Err(Error::usage("operands live over different filtrations"))
        }
    }

    /// Re-truncates to a coarser window, dropping digits at positions `>= t`.
    pub fn truncated(&self, t: i64) -> FiniteAdele {
        match self.gamma {
            None => FiniteAdele::zero(&self.filt, t.min(self.trunc)),
            Some(g) => {
                let t = t.min(self.trunc);
                if t <= g {
                    return FiniteAdele::zero(&self.filt, t);
                }
                let digits = self.digits[..(t - g) as usize].to_vec();
                Self::normalized(self.filt.clone(), g, digits, t)
            }
        }
    }

    /// Digitwise sum with carry. The result is truncated to the coarser of
    /// the two windows; the carry leaving that window is dropped, which is
    /// exactly the coset semantics of the representatives.
    pub fn add(&self, other: &FiniteAdele) -> Result<FiniteAdele> {
        self.require_same_filtration(other)?;
        let t = self.trunc.min(other.trunc);
        let lo = match (self.gamma, other.gamma) {
            (None, None) => return Ok(FiniteAdele::zero(&self.filt, t)),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (Some(a), Some(b)) => a.min(b),
        };
        if lo >= t {
            return Ok(FiniteAdele::zero(&self.filt, t));
        }
        let mut digits = Vec::with_capacity((t - lo) as usize);
        let mut carry = 0u64;
        for l in lo..t {
            let r = self.filt.radix(l)?;
            let s = self.digit_at(l) + other.digit_at(l) + carry;
            digits.push(s % r);
            carry = s / r;
        }
        Ok(Self::normalized(self.filt.clone(), lo, digits, t))
    }

    /// Additive inverse via radix complement; same order and truncation.
    pub fn neg(&self) -> FiniteAdele {
        let g = match self.gamma {
            None => return self.clone(),
            Some(g) => g,
        };
        let mut digits = Vec::with_capacity(self.digits.len());
        for (i, &d) in self.digits.iter().enumerate() {
            let r = self.filt.radix(g + i as i64).expect("valid position");
            if i == 0 {
                digits.push(r - d);
            } else {
                digits.push(r - 1 - d);
            }
        }
        FiniteAdele {
            filt: self.filt.clone(),
            gamma: Some(g),
            digits,
            trunc: self.trunc,
        }
    }

    pub fn sub(&self, other: &FiniteAdele) -> Result<FiniteAdele> {
        self.add(&other.neg())
    }

    /// The canonical (nonnegative) rational value of the stored digits.
    pub fn to_rational(&self) -> BigRational {
        let g = match self.gamma {
            None => return BigRational::zero(),
            Some(g) => g,
        };
        let mut acc = BigUint::zero();
        let mut stride = BigUint::one();
        for (i, &d) in self.digits.iter().enumerate() {
            acc += &stride * BigUint::from(d);
            let r = self.filt.radix(g + i as i64).expect("valid position");
            stride *= BigUint::from(r);
        }
        BigRational::from_integer(BigInt::from(acc)) * self.filt.value(g).expect("window")
    }

    /// The fractional part `{x} = Σ_{k=γ}^{−1} x_k e^{ψ(k)}`; zero when
    /// `γ ≥ 0`. Always a rational in `[0, 1)` with denominator dividing
    /// `e^{ψ(−γ)}`.
    pub fn fractional_part(&self) -> BigRational {
        let g = match self.gamma {
            None => return BigRational::zero(),
            Some(g) if g >= 0 => return BigRational::zero(),
            Some(g) => g,
        };
        let mut acc = BigRational::zero();
        for (i, &d) in self.digits.iter().enumerate() {
            let l = g + i as i64;
            if l >= 0 {
                break;
            }
            if d != 0 {
                acc += BigRational::from_integer(d.into()) * self.filt.value(l).expect("window");
            }
        }
        acc
    }

    /// Embeds a rational whose denominator divides a cached chain value.
    ///
    /// Positive values must fit below `e^{ψ(trunc)}` (loud error otherwise);
    /// negative values are encoded modulo that scale via radix complement.
    /// Rationals whose denominator divides no cached chain value are
    /// rejected — on a non-cofinal chain they lie outside the ring.
    pub fn from_rational(filt: &Filtration, q: &BigRational, trunc: i64) -> Result<FiniteAdele> {
        if q.is_zero() {
            return Ok(FiniteAdele::zero(filt, trunc));
        }
        let denom = q.denom().magnitude();
        let m = chain_index_for_denominator(filt, denom).ok_or_else(|| {
            Error::usage(format!(
                "denominator {} divides no cached chain value of {} (non-cofinal chain?)",
                denom,
                filt.name()
            ))
        })?;
        let start = -m;
        if start >= trunc {
            return Err(Error::usage(format!(
                "truncation {trunc} too small: expansion starts at position {start}"
            )));
        }
        check_position(filt, start)?;
        check_position(filt, trunc - 1)?;
        let scale = filt.value_uint(m)? / denom;
        let n_abs = q.numer().magnitude() * &scale;
        // modulus of the digit window [start, trunc)
        let mut modulus = BigUint::one();
        for l in start..trunc {
            modulus *= BigUint::from(filt.radix(l)?);
        }
        let n = if q.is_negative() {
            let rem = &n_abs % &modulus;
            if rem.is_zero() {
                BigUint::zero()
            } else {
                &modulus - rem
            }
        } else {
            if n_abs >= modulus {
                return Err(Error::usage(format!(
                    "value {q} does not fit in the digit window [{start}, {trunc})"
                )));
            }
            n_abs
        };
        let mut digits = Vec::with_capacity((trunc - start) as usize);
        let mut cur = n;
        for l in start..trunc {
            let r = BigUint::from(filt.radix(l)?);
            let d = (&cur % &r).to_u64().expect("digit below u64 radix");
            digits.push(d);
            cur /= r;
        }
        Ok(Self::normalized(filt.clone(), start, digits, trunc))
    }

    /// Membership of `self` in the ball of radius `e^{ψ(k)}` around
    /// `center`, decided from the exact digit difference. Errors when the
    /// difference vanishes on the whole shared window but the window is too
    /// coarse to certify membership.
    pub fn in_ball(&self, center: &FiniteAdele, k: i64) -> Result<bool> {
        let diff = self.sub(center)?;
        match diff.order() {
            Some(g) => Ok(g >= -k),
            None => {
                if -k <= diff.truncation() {
                    Ok(true)
                } else {
                    Err(Error::precision(format!(
                        "difference vanishes up to truncation {}, cannot decide membership at \
                         radius index {k}",
                        diff.truncation()
                    )))
                }
            }
        }
    }

    /// Exact rational value of the product `self · other`, with the
    /// truncation contract that makes the digit window of the product
    /// trustworthy: each factor must be resolved finely enough that the
    /// unknown tails land in `Ẑ` after multiplication.
    pub fn product_value(&self, other: &FiniteAdele) -> Result<BigRational> {
        self.require_same_filtration(other)?;
        // a zero representative still carries an unknown tail in B_{-T};
        // treating its order as the truncation covers it in the contract
        let g_self = self.gamma.unwrap_or(self.trunc);
        let g_other = other.gamma.unwrap_or(other.trunc);
        let ok = self.trunc + g_other >= 0
            && other.trunc + g_self >= 0
            && self.trunc + other.trunc >= 0;
        if !ok {
            return Err(Error::precision(format!(
                "product not determined by truncations (T = {}, {} against orders {:?}, {:?}); \
                 refine the digit windows",
                self.trunc, other.trunc, self.gamma, other.gamma
            )));
        }
        Ok(self.to_rational() * other.to_rational())
    }
}

/// Least `j ≥ 0` in the window with `d | e^{ψ(j)}`.
fn chain_index_for_denominator(filt: &Filtration, d: &BigUint) -> Option<i64> {
    if d.is_one() {
        return Some(0);
    }
    let (_, n_max) = filt.window();
    (0..=n_max).find(|&j| (filt.value_uint(j).expect("window") % d).is_zero())
}

/// The canonical character `χ_ξ(x) = exp(2πi {ξx})`.
///
/// `χ_ξ` is trivial on `Ẑ`, multiplicative in `x`, and every character of
/// `A_f` arises this way. The product `ξx` is formed through
/// [`FiniteAdele::product_value`], so the same truncation contract applies;
/// additionally the product's denominator must itself divide a cached chain
/// value for the fractional part to be exact.
pub fn character(xi: &FiniteAdele, x: &FiniteAdele) -> Result<Complex64> {
    let v = xi.product_value(x)?;
    let frac = &v - v.floor();
    if !frac.is_zero() {
        let filt = xi.filtration();
        if chain_index_for_denominator(filt, frac.denom().magnitude()).is_none() {
            return Err(Error::precision(format!(
                "fractional part denominator {} leaves the cached chain of {}",
                frac.denom(),
                filt.name()
            )));
        }
    }
    let theta = 2.0 * std::f64::consts::PI * frac.to_f64().unwrap_or(0.0);
    Ok(Complex64::new(theta.cos(), theta.sin()))
}

/// Draws a Haar-uniform point on the sphere `S_n`, truncated at `trunc`.
///
/// The order is `γ = −n`; the leading digit is uniform on
/// `{1, …, e^{Λ(−n+1)} − 1}` and later digits are independent and uniform
/// on their radix ranges, which is exactly the normalized Haar measure of
/// `S_n` pushed down to the digit window.
pub fn sample_uniform_sphere<R: Rng + ?Sized>(
    filt: &Filtration,
    n: i64,
    trunc: i64,
    rng: &mut R,
) -> Result<FiniteAdele> {
    let gamma = -n;
    if trunc <= gamma {
        return Err(Error::usage(format!(
            "truncation {trunc} must exceed the leading position {gamma}"
        )));
    }
    check_position(filt, gamma)?;
    check_position(filt, trunc - 1)?;
    let mut digits = Vec::with_capacity((trunc - gamma) as usize);
    let lead_radix = filt.radix(gamma)?;
    digits.push(rng.gen_range(1..lead_radix));
    for l in (gamma + 1)..trunc {
        digits.push(rng.gen_range(0..filt.radix(l)?));
    }
    Ok(FiniteAdele {
        filt: filt.clone(),
        gamma: Some(gamma),
        digits,
        trunc,
    })
}

/// Ball `center + B_n` of radius (= Haar measure) `e^{ψ(n)}`.
#[derive(Debug, Clone)]
pub struct Ball {
    pub center: FiniteAdele,
    pub radius_index: i64,
}

impl Ball {
    pub fn measure(&self) -> Result<BigRational> {
        self.center.filtration().ball_measure(self.radius_index)
    }

    pub fn measure_f64(&self) -> Result<f64> {
        self.center.filtration().ball_measure_f64(self.radius_index)
    }

    pub fn contains(&self, x: &FiniteAdele) -> Result<bool> {
        x.in_ball(&self.center, self.radius_index)
    }
}

/// Sphere `center + S_n` of measure `e^{ψ(n)} − e^{ψ(n−1)}`.
#[derive(Debug, Clone)]
pub struct Sphere {
    pub center: FiniteAdele,
    pub radius_index: i64,
}

impl Sphere {
    pub fn measure(&self) -> Result<BigRational> {
        self.center.filtration().sphere_measure(self.radius_index)
    }

    pub fn measure_f64(&self) -> Result<f64> {
        self.center
            .filtration()
            .sphere_measure_f64(self.radius_index)
    }

    pub fn contains(&self, x: &FiniteAdele) -> Result<bool> {
        let diff = x.sub(&self.center)?;
        Ok(diff.norm_index() == Some(self.radius_index))
    }
}

impl fmt::Display for FiniteAdele {
    /// Text form `γ:[d0,d1,…]@T`, with `inf:[]@T` for zero.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.gamma {
            None => write!(f, "inf:[]@{}", self.trunc),
            Some(g) => {
                write!(f, "{g}:[")?;
                for (i, d) in self.digits.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{d}")?;
                }
                write!(f, "]@{}", self.trunc)
            }
        }
    }
}

/// Parses the `γ:[d0,d1,…]@T` text form against a filtration.
pub fn parse_adele(filt: &Filtration, s: &str) -> Result<FiniteAdele> {
    let bad = || Error::usage(format!("malformed adele literal {s:?}"));
    let (head, tail) = s.split_once(":[").ok_or_else(bad)?;
    let (body, trunc) = tail.split_once("]@").ok_or_else(bad)?;
    let trunc: i64 = trunc.trim().parse().map_err(|_| bad())?;
    if head.trim() == "inf" {
        if !body.trim().is_empty() {
            return Err(bad());
        }
        return Ok(FiniteAdele::zero(filt, trunc));
    }
    let gamma: i64 = head.trim().parse().map_err(|_| bad())?;
    let digits: Vec<u64> = if body.trim().is_empty() {
        Vec::new()
    } else {
        body.split(',')
            .map(|d| d.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if digits.first() == Some(&0) || digits.is_empty() {
        return Err(Error::usage(format!(
            "leading digit of {s:?} must be nonzero; use inf:[]@T for zero"
        )));
    }
    FiniteAdele::from_digits(filt, gamma, &digits, trunc)
}
