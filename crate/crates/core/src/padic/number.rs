use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::{NormValue, Prime};
use crate::error::{Error, Result};

/// Relative precision (unit digits) used when nothing else is specified.
pub const DEFAULT_PRECISION: u32 = 64;

/// Exact rationals larger than this (numerator + denominator bits) are
/// demoted to truncated expansions after arithmetic.
const EXACT_BITS_LIMIT: u64 = 2048;

/// An element of `Q_p` known to a guaranteed number of unit digits.
///
/// Three states are kept apart:
/// * exact zero, produced symbolically;
/// * indeterminate zero, where every known digit cancelled and only a lower
///   bound on the valuation survives;
/// * a nonzero value `p^v * u` with `u` a unit known modulo `p^N`.
///
/// A nonzero value may additionally carry the exact rational it came from.
/// Exact operands have unbounded precision; arithmetic between two exact
/// operands stays exact while the rational remains small.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PAdicNumber {
    prime: Prime,
    repr: Repr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    ExactZero,
    /// Known only to be divisible by `p^bound`.
    IndeterminateZero {
        bound: i64,
    },
    Unit(UnitPart),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct UnitPart {
    valuation: i64,
    /// Unit residue modulo `p^precision`; never divisible by `p`.
    residue: BigUint,
    precision: u32,
    exact: Option<Arc<BigRational>>,
}

pub(crate) fn p_pow(p: u32, k: u32) -> BigUint {
    BigUint::from(p).pow(k)
}

/// Splits off the p-part of a nonzero integer.
fn strip_p(n: &BigInt, p: u32) -> (i64, BigInt) {
    let pb = BigInt::from(p);
    let mut m = n.clone();
    let mut v = 0i64;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return (v, m);
        }
        m = q;
        v += 1;
    }
}

fn strip_p_unsigned(n: &BigUint, p: u32) -> (u32, BigUint) {
    let pb = BigUint::from(p);
    let mut m = n.clone();
    let mut v = 0u32;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return (v, m);
        }
        m = q;
        v += 1;
    }
}

/// `num / den mod p^k` for a p-unit denominator.
fn unit_ratio_mod(num: &BigInt, den: &BigInt, p: u32, k: u32) -> BigUint {
    let m = p_pow(p, k);
    let mi = BigInt::from(m.clone());
    let n = num.mod_floor(&mi).to_biguint().unwrap_or_default();
    let d = den.mod_floor(&mi).to_biguint().unwrap_or_default();
    let d_inv = d.modinv(&m).expect("denominator is a p-unit");
    (n * d_inv) % m
}

fn rational_unit_part(r: &BigRational, p: u32) -> (i64, BigInt, BigInt) {
    let (vn, n) = strip_p(r.numer(), p);
    let (vd, d) = strip_p(r.denom(), p);
    (vn - vd, n, d)
}

fn rational_bits(r: &BigRational) -> u64 {
    r.numer().bits() + r.denom().bits()
}

impl UnitPart {
    /// Unit residue to `digits` digits; exact values regenerate extra digits.
    fn residue_to(&self, p: u32, digits: u32) -> BigUint {
        if digits <= self.precision {
            return &self.residue % p_pow(p, digits);
        }
        match &self.exact {
            Some(r) => {
                let (_, n, d) = rational_unit_part(r, p);
                unit_ratio_mod(&n, &d, p, digits)
            }
            None => self.residue.clone(),
        }
    }

    fn abs_bound(&self) -> Option<i64> {
        match self.exact {
            Some(_) => None,
            None => Some(self.valuation + i64::from(self.precision)),
        }
    }
}

impl PAdicNumber {
    pub fn zero(prime: Prime) -> Self {
        PAdicNumber { prime, repr: Repr::ExactZero }
    }

    pub fn one(prime: Prime, precision: u32) -> Self {
        Self::from_integer(1, prime, precision)
    }

    pub fn from_integer(n: impl Into<BigInt>, prime: Prime, precision: u32) -> Self {
        Self::from_ratio(BigRational::from_integer(n.into()), prime, precision)
    }

    /// Canonical p-adic expansion of `num/den`, kept exact.
    pub fn from_rational(
        num: impl Into<BigInt>,
        den: impl Into<BigInt>,
        prime: Prime,
        precision: u32,
    ) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::from_ratio(BigRational::new(num.into(), den), prime, precision))
    }

    pub fn from_ratio(r: BigRational, prime: Prime, precision: u32) -> Self {
        if r.is_zero() {
            return Self::zero(prime);
        }
        let precision = precision.max(1);
        let p = prime.get();
        let (valuation, n, d) = rational_unit_part(&r, p);
        let residue = unit_ratio_mod(&n, &d, p, precision);
        PAdicNumber {
            prime,
            repr: Repr::Unit(UnitPart {
                valuation,
                residue,
                precision,
                exact: Some(Arc::new(r)),
            }),
        }
    }

    /// A truncated expansion `p^v * (d0 + d1 p + ...)` with `N = digits.len()`.
    pub fn from_unit_digits(valuation: i64, digits: &[u32], prime: Prime) -> Result<Self> {
        let p = prime.get();
        match digits.first() {
            None => return Err(Error::Parse("empty digit list".into())),
            Some(0) => return Err(Error::Parse("leading unit digit must be nonzero".into())),
            _ => {}
        }
        if let Some(d) = digits.iter().find(|&&d| d >= p) {
            return Err(Error::Parse(format!("digit {d} out of range for p = {p}")));
        }
        let residue = digits
            .iter()
            .rev()
            .fold(BigUint::zero(), |acc, &d| acc * p + d);
        Ok(PAdicNumber {
            prime,
            repr: Repr::Unit(UnitPart {
                valuation,
                residue,
                precision: digits.len() as u32,
                exact: None,
            }),
        })
    }

    /// `p^base * s` where `s` is known modulo `p^width`; normalizes the
    /// valuation and caps the relative precision at `cap`.
    pub(crate) fn from_scaled_residue(
        prime: Prime,
        base: i64,
        s: BigUint,
        width: u32,
        cap: u32,
    ) -> Self {
        let p = prime.get();
        let s = s % p_pow(p, width);
        if s.is_zero() {
            return PAdicNumber {
                prime,
                repr: Repr::IndeterminateZero { bound: base + i64::from(width) },
            };
        }
        let (k, unit) = strip_p_unsigned(&s, p);
        let precision = (width - k).min(cap.max(1));
        PAdicNumber {
            prime,
            repr: Repr::Unit(UnitPart {
                valuation: base + i64::from(k),
                residue: unit % p_pow(p, precision),
                precision,
                exact: None,
            }),
        }
    }

    pub(crate) fn indeterminate_zero(prime: Prime, bound: i64) -> Self {
        PAdicNumber { prime, repr: Repr::IndeterminateZero { bound } }
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::ExactZero)
    }

    pub fn is_indeterminate_zero(&self) -> bool {
        matches!(self.repr, Repr::IndeterminateZero { .. })
    }

    /// Exact zero or indeterminate zero.
    pub fn is_zero_to_precision(&self) -> bool {
        !matches!(self.repr, Repr::Unit(_))
    }

    /// True when the value is a known rational (including exact zero).
    pub fn is_exact(&self) -> bool {
        match &self.repr {
            Repr::ExactZero => true,
            Repr::IndeterminateZero { .. } => false,
            Repr::Unit(u) => u.exact.is_some(),
        }
    }

    pub fn exact_value(&self) -> Option<BigRational> {
        match &self.repr {
            Repr::ExactZero => Some(BigRational::zero()),
            Repr::IndeterminateZero { .. } => None,
            Repr::Unit(u) => u.exact.as_deref().cloned(),
        }
    }

    pub fn valuation(&self) -> Result<i64> {
        match &self.repr {
            Repr::ExactZero => Err(Error::ZeroValuation),
            Repr::IndeterminateZero { bound } => Err(Error::IndeterminateZero { bound: *bound }),
            Repr::Unit(u) => Ok(u.valuation),
        }
    }

    pub fn norm(&self) -> Result<NormValue> {
        match &self.repr {
            Repr::ExactZero => Ok(NormValue::Zero),
            Repr::IndeterminateZero { bound } => Err(Error::IndeterminateZero { bound: *bound }),
            Repr::Unit(u) => Ok(NormValue::Pow(-u.valuation)),
        }
    }

    /// The norm, or for an indeterminate zero the bound `p^-bound` it is known to respect.
    pub fn norm_upper_bound(&self) -> NormValue {
        match &self.repr {
            Repr::ExactZero => NormValue::Zero,
            Repr::IndeterminateZero { bound } => NormValue::Pow(-bound),
            Repr::Unit(u) => NormValue::Pow(-u.valuation),
        }
    }

    /// Guaranteed unit digits (0 for zeros). Exact values report their working precision.
    pub fn precision(&self) -> u32 {
        match &self.repr {
            Repr::Unit(u) => u.precision,
            _ => 0,
        }
    }

    /// `v + N`: the value is known modulo `p^(v+N)`. `None` when exact.
    pub fn absolute_precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::ExactZero => None,
            Repr::IndeterminateZero { bound } => Some(*bound),
            Repr::Unit(u) => u.abs_bound(),
        }
    }

    /// Unit residue modulo `p^N`.
    pub fn unit_residue(&self) -> Option<&BigUint> {
        match &self.repr {
            Repr::Unit(u) => Some(&u.residue),
            _ => None,
        }
    }

    /// Unit residue modulo `p^digits`.
    pub fn unit_residue_to(&self, digits: u32) -> Result<BigUint> {
        match &self.repr {
            Repr::ExactZero => Err(Error::ZeroValuation),
            Repr::IndeterminateZero { bound } => Err(Error::IndeterminateZero { bound: *bound }),
            Repr::Unit(u) => {
                if digits > u.precision && u.exact.is_none() {
                    return Err(Error::InsufficientPrecision {
                        needed: digits,
                        available: u.precision,
                    });
                }
                Ok(u.residue_to(self.prime.get(), digits))
            }
        }
    }

    /// All guaranteed unit digits, least significant first.
    pub fn unit_digits(&self) -> Vec<u32> {
        match &self.repr {
            Repr::Unit(u) => residue_digits(&u.residue, self.prime.get(), u.precision),
            _ => Vec::new(),
        }
    }

    /// The first `k` digits `x_0..x_{k-1}` of the canonical expansion.
    pub fn canonical_digits(&self, k: u32) -> Result<Vec<u32>> {
        let r = self.unit_residue_to(k)?;
        Ok(residue_digits(&r, self.prime.get(), k))
    }

    pub fn leading_digit(&self) -> Option<u32> {
        self.unit_residue()
            .map(|r| (r % self.prime.get()).to_u32().unwrap_or(0))
    }

    /// Truncates to at most `n` unit digits. Exact values keep their rational.
    pub fn with_precision(&self, n: u32) -> Self {
        let n = n.max(1);
        match &self.repr {
            Repr::Unit(u) => {
                let p = self.prime.get();
                let (residue, precision) = match &u.exact {
                    Some(_) => (u.residue_to(p, n), n),
                    None => {
                        let k = n.min(u.precision);
                        (&u.residue % p_pow(p, k), k)
                    }
                };
                PAdicNumber {
                    prime: self.prime,
                    repr: Repr::Unit(UnitPart {
                        valuation: u.valuation,
                        residue,
                        precision,
                        exact: u.exact.clone(),
                    }),
                }
            }
            _ => self.clone(),
        }
    }

    /// Drops the exact rational, keeping the current digits.
    pub fn forget_exact(&self) -> Self {
        match &self.repr {
            Repr::Unit(u) if u.exact.is_some() => {
                let mut u = u.clone();
                u.exact = None;
                PAdicNumber { prime: self.prime, repr: Repr::Unit(u) }
            }
            _ => self.clone(),
        }
    }

    /// Multiplication by `p^k`, which only shifts the valuation.
    pub fn mul_p_power(&self, k: i64) -> Self {
        let p = self.prime.get();
        match &self.repr {
            Repr::ExactZero => self.clone(),
            Repr::IndeterminateZero { bound } => Self::indeterminate_zero(self.prime, bound + k),
            Repr::Unit(u) => {
                // Shifts too large for the exact size limit drop the rational.
                let small = k.unsigned_abs().saturating_mul(u64::from(32 - p.leading_zeros())) <= EXACT_BITS_LIMIT;
                let exact = u.exact.as_ref().filter(|_| small).map(|r| {
                    let pk = BigInt::from(p_pow(p, k.unsigned_abs() as u32));
                    let scaled = if k >= 0 {
                        r.as_ref() * BigRational::from_integer(pk)
                    } else {
                        r.as_ref() / BigRational::from_integer(pk)
                    };
                    Arc::new(scaled)
                });
                PAdicNumber {
                    prime: self.prime,
                    repr: Repr::Unit(UnitPart {
                        valuation: u.valuation + k,
                        residue: u.residue.clone(),
                        precision: u.precision,
                        exact,
                    }),
                }
            }
        }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::from_integer(1, self.prime, self.precision().max(1));
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = base.square();
            }
        }
        acc
    }

    pub fn inverse(&self) -> Result<Self> {
        Self::one(self.prime, self.precision().max(1)).try_div(self)
    }

    fn check_prime(&self, other: &Self) {
        assert_eq!(
            self.prime, other.prime,
            "cannot combine elements of Q_{} and Q_{}",
            self.prime, other.prime
        );
    }

    fn exact_pair(&self, other: &Self) -> Option<(BigRational, BigRational)> {
        Some((self.exact_value()?, other.exact_value()?))
    }

    fn working_precision(&self, other: &Self) -> u32 {
        self.precision().max(other.precision()).max(1)
    }

    /// Builds an exact result if the rational is still small enough.
    fn exact_result(prime: Prime, r: BigRational, precision: u32) -> Option<Self> {
        (rational_bits(&r) <= EXACT_BITS_LIMIT).then(|| Self::from_ratio(r, prime, precision))
    }

    fn add_impl(&self, rhs: &Self) -> Self {
        self.check_prime(rhs);
        match (&self.repr, &rhs.repr) {
            (Repr::ExactZero, _) => return rhs.clone(),
            (_, Repr::ExactZero) => return self.clone(),
            _ => {}
        }
        let cap = self.working_precision(rhs);
        let both_exact = if let Some((a, b)) = self.exact_pair(rhs) {
            if let Some(r) = Self::exact_result(self.prime, a + b, cap) {
                return r;
            }
            true
        } else {
            false
        };
        // Exact operands whose combination grew too large fall back to their stored digits.
        let bound_of = |x: &Self| -> Option<i64> {
            match &x.repr {
                Repr::Unit(u) if both_exact => Some(u.valuation + i64::from(u.precision)),
                _ => x.absolute_precision(),
            }
        };
        let abs = match (bound_of(self), bound_of(rhs)) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => unreachable!("non-exact operand always bounds the sum"),
        };
        let units: Vec<&UnitPart> = [self, rhs]
            .iter()
            .filter_map(|x| match &x.repr {
                Repr::Unit(u) => Some(u),
                _ => None,
            })
            .collect();
        let Some(vmin) = units.iter().map(|u| u.valuation).min() else {
            return Self::indeterminate_zero(self.prime, abs);
        };
        // A single leading term cannot cancel, so digits beyond `cap` are never kept.
        let abs = if units.iter().filter(|u| u.valuation == vmin).count() == 1 {
            abs.min(vmin + i64::from(cap))
        } else {
            abs
        };
        if abs <= vmin {
            return Self::indeterminate_zero(self.prime, abs);
        }
        let p = self.prime.get();
        let width = (abs - vmin) as u32;
        let modulus = p_pow(p, width);
        let mut s = BigUint::zero();
        for u in units {
            let needed = abs - u.valuation;
            if needed <= 0 {
                continue;
            }
            let r = u.residue_to(p, needed as u32);
            s += r * p_pow(p, (u.valuation - vmin) as u32);
        }
        s %= &modulus;
        Self::from_scaled_residue(self.prime, vmin, s, width, cap)
    }

    fn neg_impl(&self) -> Self {
        match &self.repr {
            Repr::Unit(u) => {
                let p = self.prime.get();
                let residue = p_pow(p, u.precision) - &u.residue;
                PAdicNumber {
                    prime: self.prime,
                    repr: Repr::Unit(UnitPart {
                        valuation: u.valuation,
                        residue,
                        precision: u.precision,
                        exact: u.exact.as_ref().map(|r| Arc::new(-r.as_ref())),
                    }),
                }
            }
            _ => self.clone(),
        }
    }

    /// Relative precision shared by a product or quotient of two units.
    fn product_precision(a: &UnitPart, b: &UnitPart, both_exact: bool) -> u32 {
        if both_exact {
            return a.precision.min(b.precision);
        }
        match (a.exact.is_some(), b.exact.is_some()) {
            (true, false) => b.precision,
            (false, true) => a.precision,
            _ => a.precision.min(b.precision),
        }
    }

    fn mul_impl(&self, rhs: &Self) -> Self {
        self.check_prime(rhs);
        let prime = self.prime;
        match (&self.repr, &rhs.repr) {
            (Repr::ExactZero, _) | (_, Repr::ExactZero) => return Self::zero(prime),
            (Repr::IndeterminateZero { bound: a }, Repr::IndeterminateZero { bound: b }) => {
                return Self::indeterminate_zero(prime, a + b)
            }
            (Repr::IndeterminateZero { bound }, Repr::Unit(u))
            | (Repr::Unit(u), Repr::IndeterminateZero { bound }) => {
                return Self::indeterminate_zero(prime, bound + u.valuation)
            }
            (Repr::Unit(_), Repr::Unit(_)) => {}
        }
        let cap = self.working_precision(rhs);
        let mut both_exact = false;
        if let Some((a, b)) = self.exact_pair(rhs) {
            if let Some(r) = Self::exact_result(prime, a * b, cap) {
                return r;
            }
            both_exact = true;
        }
        let (Repr::Unit(a), Repr::Unit(b)) = (&self.repr, &rhs.repr) else {
            unreachable!()
        };
        let p = prime.get();
        let n = Self::product_precision(a, b, both_exact);
        let residue = (a.residue_to(p, n) * b.residue_to(p, n)) % p_pow(p, n);
        PAdicNumber {
            prime,
            repr: Repr::Unit(UnitPart {
                valuation: a.valuation + b.valuation,
                residue,
                precision: n,
                exact: None,
            }),
        }
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        if self.prime != rhs.prime {
            return Err(Error::PrimeMismatch(self.prime.get(), rhs.prime.get()));
        }
        let prime = self.prime;
        let b = match &rhs.repr {
            Repr::ExactZero => return Err(Error::DivisionByZero),
            Repr::IndeterminateZero { bound } => {
                return Err(Error::IndeterminateZero { bound: *bound })
            }
            Repr::Unit(b) => b,
        };
        let a = match &self.repr {
            Repr::ExactZero => return Ok(Self::zero(prime)),
            Repr::IndeterminateZero { bound } => {
                return Ok(Self::indeterminate_zero(prime, bound - b.valuation))
            }
            Repr::Unit(a) => a,
        };
        let cap = self.working_precision(rhs);
        let mut both_exact = false;
        if let Some((x, y)) = self.exact_pair(rhs) {
            if let Some(r) = Self::exact_result(prime, x / y, cap) {
                return Ok(r);
            }
            both_exact = true;
        }
        let p = prime.get();
        let n = Self::product_precision(a, b, both_exact);
        let m = p_pow(p, n);
        let inv = b
            .residue_to(p, n)
            .modinv(&m)
            .expect("unit residue is invertible");
        let residue = (a.residue_to(p, n) * inv) % &m;
        Ok(PAdicNumber {
            prime,
            repr: Repr::Unit(UnitPart {
                valuation: a.valuation - b.valuation,
                residue,
                precision: n,
                exact: None,
            }),
        })
    }

    /// True when `self - other` vanishes modulo `p^(v_min + digits)`, i.e. both
    /// agree on their first `digits` digits at the common scale.
    pub fn agrees_with(&self, other: &Self, digits: u32) -> bool {
        let diff = self - other;
        let scale = match (self.valuation(), other.valuation()) {
            (Ok(a), Ok(b)) => a.min(b),
            (Ok(a), Err(_)) | (Err(_), Ok(a)) => a,
            (Err(_), Err(_)) => 0,
        };
        let target = scale + i64::from(digits);
        match &diff.repr {
            Repr::ExactZero => true,
            Repr::IndeterminateZero { bound } => *bound >= target,
            Repr::Unit(u) => u.valuation >= target,
        }
    }

    /// Compact digit form `v; d0,d1,...` (used in JSON reports).
    ///
    /// Exact values whose expansion ends in a repeated digit are cut after
    /// the first repeat, matching [`PAdicNumber::parse`]; everything else
    /// lists all known digits.
    pub fn to_compact(&self) -> String {
        match &self.repr {
            Repr::ExactZero => "0".to_string(),
            Repr::IndeterminateZero { bound } => format!("O({}^{})", self.prime, bound),
            Repr::Unit(u) => {
                let mut digits = residue_digits(&u.residue, self.prime.get(), u.precision);
                if let Some(r) = &u.exact {
                    let last = *digits.last().expect("precision >= 1");
                    let keep = digits.iter().rposition(|&d| d != last).map_or(1, |i| i + 2);
                    let short = &digits[..keep.min(digits.len())];
                    let same = Self::from_periodic_digits(u.valuation, short, self.prime, 1)
                        .ok()
                        .and_then(|x| x.exact_value())
                        .is_some_and(|x| x == **r);
                    if same {
                        digits.truncate(short.len());
                    }
                }
                let digits: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
                format!("{}; {}", u.valuation, digits.join(","))
            }
        }
    }

    /// Parses a rational (`-3`, `1/25`), a digit string `v; d0,d1,...,dk`
    /// whose last digit repeats forever, or `0`.
    pub fn parse(s: &str, prime: Prime, precision: u32) -> Result<Self> {
        let s = s.trim();
        if let Some((v, digits)) = s.split_once(';') {
            let valuation: i64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad valuation in `{s}`")))?;
            let digits: Vec<u32> = digits
                .split(',')
                .map(|d| {
                    d.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::Parse(format!("bad digit `{d}` in `{s}`")))
                })
                .collect::<Result<_>>()?;
            return Self::from_periodic_digits(valuation, &digits, prime, precision);
        }
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num: BigInt = num
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in `{s}`")))?;
        let den: BigInt = den
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in `{s}`")))?;
        Self::from_rational(num, den, prime, precision)
    }

    /// `p^v (d0 + d1 p + ... + d_k p^k + d_k p^(k+1) + ...)`: the last digit
    /// repeats, which makes the value an exact rational.
    pub fn from_periodic_digits(
        valuation: i64,
        digits: &[u32],
        prime: Prime,
        precision: u32,
    ) -> Result<Self> {
        let p = prime.get();
        let Some((&last, head)) = digits.split_last() else {
            return Err(Error::Parse("empty digit list".into()));
        };
        if digits[0] == 0 {
            return Err(Error::Parse("leading unit digit must be nonzero".into()));
        }
        if let Some(d) = digits.iter().find(|&&d| d >= p) {
            return Err(Error::Parse(format!("digit {d} out of range for p = {p}")));
        }
        let head_value = head
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, &d| acc * p + d);
        let pk = BigInt::from(p_pow(p, head.len() as u32));
        // d * p^k / (1 - p)
        let tail = BigRational::new(BigInt::from(last) * pk, BigInt::one() - BigInt::from(p));
        let unit = BigRational::from_integer(head_value) + tail;
        let scale = BigRational::from_integer(BigInt::from(p_pow(p, valuation.unsigned_abs() as u32)));
        let value = if valuation >= 0 { unit * scale } else { unit / scale };
        Ok(Self::from_ratio(value, prime, precision))
    }
}

fn residue_digits(r: &BigUint, p: u32, k: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(k as usize);
    let mut m = r.clone();
    let pb = BigUint::from(p);
    for _ in 0..k {
        let (q, d) = m.div_rem(&pb);
        out.push(d.to_u32().unwrap_or(0));
        m = q;
    }
    out
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl<'a> $tr<&'a PAdicNumber> for &'a PAdicNumber {
            type Output = PAdicNumber;
            fn $method(self, rhs: &'a PAdicNumber) -> PAdicNumber {
                let f: fn(&PAdicNumber, &PAdicNumber) -> PAdicNumber = $body;
                f(self, rhs)
            }
        }
        impl $tr<PAdicNumber> for PAdicNumber {
            type Output = PAdicNumber;
            fn $method(self, rhs: PAdicNumber) -> PAdicNumber {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a PAdicNumber> for PAdicNumber {
            type Output = PAdicNumber;
            fn $method(self, rhs: &'a PAdicNumber) -> PAdicNumber {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<PAdicNumber> for &'a PAdicNumber {
            type Output = PAdicNumber;
            fn $method(self, rhs: PAdicNumber) -> PAdicNumber {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| a.add_impl(b));
forward_binop!(Sub, sub, |a, b| a.add_impl(&b.neg_impl()));
forward_binop!(Mul, mul, |a, b| a.mul_impl(b));
// Panics on division by (indeterminate) zero; use `try_div` to handle it.
forward_binop!(Div, div, |a, b| a.try_div(b).expect("p-adic division"));

impl Neg for &PAdicNumber {
    type Output = PAdicNumber;
    fn neg(self) -> PAdicNumber {
        self.neg_impl()
    }
}

impl Neg for PAdicNumber {
    type Output = PAdicNumber;
    fn neg(self) -> PAdicNumber {
        self.neg_impl()
    }
}

/// `p^v * (d0 + d1*p + ...) [N digits]`, showing the first few terms.
impl fmt::Display for PAdicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 6;
        let p = self.prime.get();
        match &self.repr {
            Repr::ExactZero => f.write_str("0"),
            Repr::IndeterminateZero { bound } => write!(f, "O({p}^{bound})"),
            Repr::Unit(u) => {
                let digits = residue_digits(&u.residue, p, u.precision);
                let terms: Vec<String> = digits
                    .iter()
                    .take(SHOWN)
                    .enumerate()
                    .map(|(i, d)| match i {
                        0 => d.to_string(),
                        1 => format!("{d}*{p}"),
                        _ => format!("{d}*{p}^{i}"),
                    })
                    .collect();
                let more = if digits.len() > SHOWN { " + ..." } else { "" };
                write!(
                    f,
                    "{p}^{} * ({}{more}) [{} digits{}]",
                    u.valuation,
                    terms.join(" + "),
                    u.precision,
                    if u.exact.is_some() { ", exact" } else { "" }
                )
            }
        }
    }
}

/// Serialized in compact digit form.
impl Serialize for PAdicNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_compact())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prime(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn q(n: i64, d: i64, p: u64, prec: u32) -> PAdicNumber {
        PAdicNumber::from_rational(n, d, prime(p), prec).unwrap()
    }

    #[test]
    fn from_rational_examples() {
        let x = q(9, 1, 3, 4);
        assert_eq!(x.valuation().unwrap(), 2);
        assert_eq!(x.unit_digits(), vec![1, 0, 0, 0]);

        let y = q(1, 3, 3, 2);
        assert_eq!(y.valuation().unwrap(), -1);
        assert_eq!(y.unit_digits(), vec![1, 0]);

        // -3 mod 7^3 = 340 = 4 + 6*7 + 6*49
        let z = q(-3, 1, 7, 3);
        assert_eq!(z.valuation().unwrap(), 0);
        assert_eq!(z.unit_digits(), vec![4, 6, 6]);
    }

    #[test]
    fn zero_denominator_is_rejected() {
        assert_eq!(
            PAdicNumber::from_rational(1, 0, prime(5), 8),
            Err(Error::ZeroDenominator)
        );
        assert!(q(0, 7, 5, 8).is_exact_zero());
    }

    #[test]
    fn cancellation_drops_precision() {
        // 1 + (-1 + 3^5) at N = 10, both truncated
        let x = q(1, 1, 3, 10).forget_exact();
        let y = q(-1 + 243, 1, 3, 10).forget_exact();
        let s = &x + &y;
        assert_eq!(s.valuation().unwrap(), 5);
        assert_eq!(s.precision(), 5);
        assert_eq!(s.canonical_digits(1).unwrap(), vec![1]);
    }

    #[test]
    fn full_cancellation_is_indeterminate_unless_exact() {
        let x = q(1, 1, 5, 8);
        let y = q(-1, 1, 5, 8);
        assert!((&x + &y).is_exact_zero());

        let s = &x.forget_exact() + &y.forget_exact();
        assert!(s.is_indeterminate_zero());
        assert_eq!(s.norm(), Err(Error::IndeterminateZero { bound: 8 }));
        assert_eq!(s.absolute_precision(), Some(8));
    }

    #[test]
    fn mixed_exact_and_truncated_keep_truncated_precision() {
        let x = q(2, 3, 7, 20).forget_exact();
        let y = q(5, 1, 7, 64);
        let s = &x * &y;
        assert_eq!(s.precision(), 20);
        assert!(!s.is_exact());
        assert!(s.agrees_with(&q(10, 3, 7, 64), 20));
    }

    #[test]
    fn multiplication_examples() {
        let one = &q(1, 3, 3, 16) * &q(3, 1, 3, 16);
        assert_eq!(one.valuation().unwrap(), 0);
        assert_eq!(one.canonical_digits(3).unwrap(), vec![1, 0, 0]);

        let x = q(25, 2, 5, 16);
        let y = q(3, 125, 5, 16);
        assert_eq!((&x * &y).norm().unwrap(), NormValue::Pow(1));

        let four = &q(2, 1, 2, 8) * &q(2, 1, 2, 8);
        assert_eq!(four.valuation().unwrap(), 2);
        assert_eq!(four.leading_digit(), Some(1));
    }

    #[test]
    fn division_checks() {
        let x = q(7, 1, 5, 8);
        assert_eq!(x.try_div(&PAdicNumber::zero(prime(5))), Err(Error::DivisionByZero));
        let iz = &x.forget_exact() - &x.forget_exact();
        assert!(matches!(x.try_div(&iz), Err(Error::IndeterminateZero { .. })));
        let r = q(3, 1, 5, 8).forget_exact().try_div(&q(4, 1, 5, 8)).unwrap();
        assert!(r.agrees_with(&q(3, 4, 5, 8), 8));
    }

    #[test]
    fn norms() {
        assert_eq!(q(3i64.pow(5) * 2, 1, 3, 8).norm().unwrap(), NormValue::Pow(-5));
        assert_eq!(PAdicNumber::zero(prime(3)).norm().unwrap(), NormValue::Zero);
        assert_eq!(q(1, 25, 5, 8).norm().unwrap(), NormValue::Pow(2));
    }

    #[test]
    fn canonical_digit_examples() {
        // -3 = 13 mod 16 = 1 + 0*2 + 1*4 + 1*8
        assert_eq!(q(-3, 1, 2, 8).canonical_digits(4).unwrap(), vec![1, 0, 1, 1]);
        let four = q(4, 1, 2, 8);
        assert_eq!(four.valuation().unwrap(), 2);
        assert_eq!(four.canonical_digits(3).unwrap(), vec![1, 0, 0]);
        let a = PAdicNumber::parse("0; 1,2,2", prime(5), 16).unwrap();
        assert_eq!(a.canonical_digits(3).unwrap(), vec![1, 2, 2]);
    }

    #[test]
    fn canonical_digits_beyond_precision_fail() {
        let x = q(2, 1, 5, 4).forget_exact();
        assert_eq!(
            x.canonical_digits(5),
            Err(Error::InsufficientPrecision { needed: 5, available: 4 })
        );
        // exact values regenerate digits on demand
        assert_eq!(q(2, 1, 5, 4).canonical_digits(6).unwrap(), vec![2, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn periodic_digit_strings_are_exact_rationals() {
        // 1 + 2*5 + 2*5^2 + ... = 1 + 10/(1-5)... = -3/2
        let a = PAdicNumber::parse("0;1,2,2", prime(5), 32).unwrap();
        assert_eq!(a.exact_value().unwrap(), BigRational::new((-3).into(), 2.into()));
        let b = PAdicNumber::parse("0;1,2,1,0", prime(5), 32).unwrap();
        assert_eq!(b.exact_value().unwrap(), BigRational::from_integer(36.into()));
        let c = PAdicNumber::parse("-1;3", prime(7), 8).unwrap();
        assert_eq!(c.valuation().unwrap(), -1);
        assert_eq!(c.unit_digits(), vec![3; 8]);
    }

    #[test]
    fn compact_round_trip() {
        let x = q(-22, 15, 5, 12);
        let s = x.to_compact();
        assert!(s.starts_with("-1; "));
        let y = PAdicNumber::parse(&s, prime(5), 12).unwrap();
        assert!(x.agrees_with(&y, 12));
    }

    #[test]
    fn display_shows_digits_and_precision() {
        let x = q(9, 1, 3, 4);
        assert_eq!(x.to_string(), "3^2 * (1 + 0*3 + 0*3^2 + 0*3^3) [4 digits, exact]");
        assert_eq!(x.to_compact(), "2; 1,0");
    }

    #[test]
    fn exact_rationals_are_demoted_when_they_grow() {
        let mut x = q(2, 3, 5, 16);
        for _ in 0..12 {
            x = x.square();
        }
        assert!(!x.is_exact());
        assert_eq!(x.precision(), 16);
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let x = q(10, 7, 5, 20).forget_exact();
        let cube = &(&x * &x) * &x;
        assert!(x.pow(3).agrees_with(&cube, 20));
    }

    #[test]
    fn compact_form_of_exact_values_is_periodic() {
        let one = q(1, 1, 5, 64);
        assert_eq!(one.to_compact(), "0; 1,0");
        let r = q(-3, 2, 5, 64);
        assert_eq!(r.to_compact(), "0; 1,2");
        assert_eq!(PAdicNumber::parse(&r.to_compact(), prime(5), 64).unwrap(), r);
    }

    #[test]
    fn sum_with_far_apart_valuations_keeps_the_leading_term() {
        let big = q(1, 1, 3, 16).mul_p_power(1_000_000_000);
        assert!(!big.is_exact());
        let s = &q(2, 1, 3, 16).forget_exact() + &big;
        assert_eq!(s.valuation().unwrap(), 0);
        assert_eq!(s.precision(), 16);
        assert!(s.agrees_with(&q(2, 1, 3, 16), 16));
    }
}
