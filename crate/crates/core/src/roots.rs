//! Quadratic residues, square-root existence in `Q_p`, Hensel lifting, and
//! the fixed-point quadratic `x^2 + a x - 1 = 0`.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{p_pow, NormValue, PAdicNumber, Prime};

/// Smallest `x` in `[1, p-1]` with `x^2 = r (mod p)`, by enumeration.
pub fn sqrt_mod_p(r: u64, p: Prime) -> Option<u64> {
    let pp = u64::from(p.get());
    let r = r % pp;
    (1..pp).find(|x| (x * x) % pp == r)
}

/// Whether the unit residue `a0` is a square modulo `p`.
pub fn is_quadratic_residue(a0: u64, p: Prime) -> Result<bool> {
    if a0.is_multiple_of(u64::from(p.get())) {
        return Err(Error::NotAUnitResidue(a0));
    }
    Ok(sqrt_mod_p(a0, p).is_some())
}

/// Square-root criterion for a nonzero `x = p^v (x0 + x1 p + ...)`: `v` even,
/// and `x0` a square mod `p` (odd `p`) or `x1 = x2 = 0` (`p = 2`).
pub fn sqrt_exists(x: &PAdicNumber) -> Result<bool> {
    let v = x.valuation()?;
    if v.rem_euclid(2) == 1 {
        return Ok(false);
    }
    let p = x.prime();
    if p.is_two() {
        let d = x.canonical_digits(3)?;
        Ok(d[1] == 0 && d[2] == 0)
    } else {
        let d0 = x.leading_digit().expect("nonzero value has a leading digit");
        is_quadratic_residue(u64::from(d0), p)
    }
}

/// Both square roots of a radicand; `neg_root = -root`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SqrtPair {
    pub root: PAdicNumber,
    pub neg_root: PAdicNumber,
}

/// Square root by Hensel lifting to `precision` unit digits.
///
/// `root` is the branch whose unit part starts with the smallest residue in
/// `[1, p-1]`; for `p = 2` it is the branch congruent to 1 mod 4. For
/// `p = 2` the root of a truncated radicand carries one digit fewer than
/// the radicand.
pub fn padic_sqrt(x: &PAdicNumber, precision: u32) -> Result<SqrtPair> {
    let prime = x.prime();
    if x.is_exact_zero() {
        return Ok(SqrtPair { root: x.clone(), neg_root: x.clone() });
    }
    if !sqrt_exists(x)? {
        return Err(Error::NoSquareRoot { p: prime.get() });
    }
    if let Some(pair) = exact_rational_sqrt(x, precision) {
        return Ok(pair);
    }
    let half_v = x.valuation()? / 2;
    let digits = if x.is_exact() {
        precision + u32::from(prime.is_two())
    } else {
        precision.min(x.precision())
    };
    let root = if prime.is_two() {
        if digits < 3 {
            return Err(Error::InsufficientPrecision { needed: 3, available: digits });
        }
        let u = x.unit_residue_to(digits)?;
        let r = lift_sqrt_two(&u, digits);
        PAdicNumber::from_scaled_residue(prime, half_v, r, digits - 1, digits - 1)
    } else {
        let u = x.unit_residue_to(digits)?;
        let u0 = (&u % prime.get()).to_u64().unwrap_or(0);
        let seed = sqrt_mod_p(u0, prime).expect("criterion guarantees a residue root");
        let r = lift_sqrt_odd(&u, seed, prime.get(), digits);
        PAdicNumber::from_scaled_residue(prime, half_v, r, digits, digits)
    };
    let neg_root = -&root;
    Ok(SqrtPair { root, neg_root })
}

/// Newton lifting `r <- r - (r^2 - u) / 2r`, doubling the modulus each step.
fn lift_sqrt_odd(u: &BigUint, seed: u64, p: u32, digits: u32) -> BigUint {
    let mut r = BigUint::from(seed);
    let mut k = 1u32;
    while k < digits {
        k = (2 * k).min(digits);
        let m = p_pow(p, k);
        let u_k = u % &m;
        let f = (&r * &r + &m - u_k) % &m;
        let inv = ((&r * 2u32) % &m).modinv(&m).expect("2r is a unit");
        r = (&r + &m - (f * inv) % &m) % &m;
    }
    r
}

/// Bitwise lifting for `u = 1 (mod 8)`: after step `k`, `r^2 = u (mod 2^(k+1))`.
/// Returns `r mod 2^(digits-1)` normalized to `r = 1 (mod 4)`.
fn lift_sqrt_two(u: &BigUint, digits: u32) -> BigUint {
    let mut r = BigUint::from(1u32);
    for k in 3..digits {
        let m = p_pow(2, k + 1);
        if (&r * &r) % &m != u % &m {
            r += p_pow(2, k - 1);
        }
    }
    let m = p_pow(2, digits - 1);
    r %= &m;
    if (&r % 4u32) == BigUint::from(3u32) {
        r = &m - r;
    }
    r
}

/// Exact root when the radicand is the square of a rational.
fn exact_rational_sqrt(x: &PAdicNumber, precision: u32) -> Option<SqrtPair> {
    let r = x.exact_value()?;
    if r.numer().is_negative() {
        return None;
    }
    let (n, d) = (r.numer().sqrt(), r.denom().sqrt());
    if &(&n * &n) != r.numer() || &(&d * &d) != r.denom() {
        return None;
    }
    let prime = x.prime();
    let plus = PAdicNumber::from_ratio(BigRational::new(n, d), prime, precision);
    let minus = -&plus;
    let plus_first = if prime.is_two() {
        plus.unit_residue_to(2).ok()? == BigUint::from(1u32)
    } else {
        let u0 = u64::from(x.leading_digit()?);
        u64::from(plus.leading_digit()?) == sqrt_mod_p(u0, prime)?
    };
    Some(if plus_first {
        SqrtPair { root: plus, neg_root: minus }
    } else {
        SqrtPair { root: minus, neg_root: plus }
    })
}

/// Which branch of the existence analysis for `sqrt(a^2 + 4)` applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CaseTag {
    #[serde(rename = "P_GE_3_SMALL_A")]
    OddPrimeSmallA,
    #[serde(rename = "P2_K_GE_3")]
    TwoAdicDeep,
    #[serde(rename = "P2_K_EQ_2")]
    TwoAdicValuationTwo,
    #[serde(rename = "P2_K_EQ_1")]
    TwoAdicValuationOne,
    #[serde(rename = "A_LARGE")]
    LargeA,
    #[serde(rename = "UNIT_A_P2")]
    UnitATwo,
    #[serde(rename = "UNIT_A_P3")]
    UnitAThree,
    #[serde(rename = "UNIT_A_RESIDUE")]
    UnitAResidue,
    #[serde(rename = "UNIT_A_DEGENERATE")]
    UnitADegenerate,
    #[serde(rename = "UNIT_A_UNDETERMINED")]
    UnitAUndetermined,
}

impl CaseTag {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::OddPrimeSmallA => "P_GE_3_SMALL_A",
            CaseTag::TwoAdicDeep => "P2_K_GE_3",
            CaseTag::TwoAdicValuationTwo => "P2_K_EQ_2",
            CaseTag::TwoAdicValuationOne => "P2_K_EQ_1",
            CaseTag::LargeA => "A_LARGE",
            CaseTag::UnitATwo => "UNIT_A_P2",
            CaseTag::UnitAThree => "UNIT_A_P3",
            CaseTag::UnitAResidue => "UNIT_A_RESIDUE",
            CaseTag::UnitADegenerate => "UNIT_A_DEGENERATE",
            CaseTag::UnitAUndetermined => "UNIT_A_UNDETERMINED",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExistenceVerdict {
    pub exists: bool,
    pub case_tag: CaseTag,
    /// Residue `w` with `w^2` congruent to the leading unit digit of `a^2 + 4`.
    pub witness: Option<u64>,
}

/// `a^2 + 4` at the working precision of `a`.
pub fn a_squared_plus_four(a: &PAdicNumber) -> PAdicNumber {
    let four = PAdicNumber::from_integer(4, a.prime(), a.precision().max(1));
    &a.square() + &four
}

/// Existence of `sqrt(a^2 + 4)` in `Q_p`, dispatched on `|a|_p`.
///
/// For `|a| = 1`, `p >= 5` and `a0^2 + 4 = 0 (mod p)` the digit conditions
/// only select the tag; `exists` is read off `a^2 + 4` directly, since the
/// unit digit of `a^2 + 4` also depends on the carry out of `a0^2 + 4`.
pub fn sqrt_a2p4_verdict(a: &PAdicNumber) -> Result<ExistenceVerdict> {
    let prime = a.prime();
    let p = u64::from(prime.get());
    let t = a_squared_plus_four(a);
    let (case_tag, exists) = match a.norm()? {
        NormValue::Zero => {
            let tag = if prime.is_two() { CaseTag::TwoAdicDeep } else { CaseTag::OddPrimeSmallA };
            (tag, true)
        }
        NormValue::Pow(e) if e < 0 => {
            if !prime.is_two() {
                (CaseTag::OddPrimeSmallA, true)
            } else {
                match -e {
                    1 => (CaseTag::TwoAdicValuationOne, false),
                    2 => (CaseTag::TwoAdicValuationTwo, false),
                    _ => (CaseTag::TwoAdicDeep, true),
                }
            }
        }
        NormValue::Pow(e) if e > 0 => (CaseTag::LargeA, true),
        NormValue::Pow(_) => match p {
            2 => (CaseTag::UnitATwo, false),
            3 => (CaseTag::UnitAThree, false),
            _ => {
                let a0 = u64::from(a.leading_digit().expect("unit"));
                let c0 = (a0 * a0 + 4) % p;
                if c0 != 0 {
                    (CaseTag::UnitAResidue, is_quadratic_residue(c0, prime)?)
                } else {
                    let d = a.canonical_digits(3)?;
                    let (a1, a2) = (u64::from(d[1]), u64::from(d[2]));
                    let carry = (a0 * a0 + 4) / p;
                    let second = (carry + 2 * a0 * a1) % p == 0;
                    let third = (a1 * a1 + 2 * a0 * a2) % p != 0;
                    let tag = if second && third {
                        CaseTag::UnitADegenerate
                    } else {
                        CaseTag::UnitAUndetermined
                    };
                    (tag, sqrt_exists(&t)?)
                }
            }
        },
    };
    let witness = if exists {
        t.leading_digit().and_then(|d| sqrt_mod_p(u64::from(d), prime))
    } else {
        None
    };
    Ok(ExistenceVerdict { exists, case_tag, witness })
}

/// Roots `(x+, x-) = ((-a + s)/2, (-a - s)/2)` of `x^2 + a x - 1 = 0`, where
/// `s` is the `root` branch of `sqrt(a^2 + 4)`.
///
/// When one root suffers cancellation it is recomputed as `-1 / other`.
pub fn solve_fixed_quadratic(
    a: &PAdicNumber,
    precision: u32,
) -> Result<(PAdicNumber, PAdicNumber)> {
    let verdict = sqrt_a2p4_verdict(a)?;
    if !verdict.exists {
        return Err(Error::NoSquareRoot { p: a.prime().get() });
    }
    let prime = a.prime();
    let s = padic_sqrt(&a_squared_plus_four(a), precision)?.root;
    let two = PAdicNumber::from_integer(2, prime, precision);
    let minus_one = PAdicNumber::from_integer(-1, prime, precision);
    let neg_a = -a;
    let plus = (&neg_a + &s).try_div(&two)?;
    let minus = (&neg_a - &s).try_div(&two)?;
    let repair = |weak: PAdicNumber, strong: &PAdicNumber| -> Result<PAdicNumber> {
        if strong.is_zero_to_precision() {
            return Ok(weak);
        }
        let alt = minus_one.try_div(strong)?;
        let weak_is_worse = weak.is_zero_to_precision() || weak.precision() < alt.precision();
        Ok(if weak_is_worse { alt } else { weak })
    };
    if plus.precision() <= minus.precision() {
        let plus = repair(plus, &minus)?;
        Ok((plus, minus))
    } else {
        let minus = repair(minus, &plus)?;
        Ok((plus, minus))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prime(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn q(n: i64, d: i64, p: u64) -> PAdicNumber {
        PAdicNumber::from_rational(n, d, prime(p), 64).unwrap()
    }

    #[test]
    fn residue_examples() {
        assert!(is_quadratic_residue(9, prime(11)).unwrap());
        assert!(is_quadratic_residue(5, prime(11)).unwrap());
        assert!(!is_quadratic_residue(2, prime(5)).unwrap());
        assert_eq!(is_quadratic_residue(10, prime(5)), Err(Error::NotAUnitResidue(10)));
    }

    #[test]
    fn minus_three_is_a_square_exactly_at_seven_and_thirteen() {
        for (p, expected) in [(2, false), (5, false), (7, true), (11, false), (13, true)] {
            assert_eq!(sqrt_exists(&q(-3, 1, p)).unwrap(), expected, "p = {p}");
        }
        assert!(!sqrt_exists(&q(2, 1, 2)).unwrap());
    }

    #[test]
    fn two_adic_criterion_needs_three_digits() {
        let x = PAdicNumber::from_unit_digits(0, &[1, 0], prime(2)).unwrap();
        assert_eq!(
            sqrt_exists(&x),
            Err(Error::InsufficientPrecision { needed: 3, available: 2 })
        );
    }

    #[test]
    fn sqrt_of_four_in_q2_is_plus_minus_two() {
        let pair = padic_sqrt(&q(4, 1, 2), 16).unwrap();
        assert!(pair.root.is_exact());
        assert_eq!(pair.root.exact_value().unwrap(), BigRational::from_integer(2.into()));
        assert_eq!(pair.neg_root.exact_value().unwrap(), BigRational::from_integer((-2).into()));
    }

    #[test]
    fn sqrt_of_minus_three_mod_49() {
        // squares mod 49 congruent to -3 whose root is 2 mod 7: 37^2 = 1369 = 46 (mod 49)
        let oracle: Vec<u32> = (0..49u32)
            .filter(|y| (y * y) % 49 == 46 && y % 7 == 2)
            .collect();
        assert_eq!(oracle, vec![37]);
        let pair = padic_sqrt(&q(-3, 1, 7), 64).unwrap();
        assert_eq!(pair.root.unit_residue_to(2).unwrap(), BigUint::from(37u32));
        let sq = pair.root.square();
        assert!(sq.agrees_with(&q(-3, 1, 7), 64));
    }

    #[test]
    fn sqrt_of_four_when_a_is_zero() {
        let t = a_squared_plus_four(&PAdicNumber::zero(prime(7)));
        let pair = padic_sqrt(&t, 64).unwrap();
        assert_eq!(pair.root.exact_value().unwrap(), BigRational::from_integer(2.into()));
    }

    #[test]
    fn two_adic_lift_squares_back() {
        // 17 = 1 mod 8
        let x = q(17, 1, 2);
        let pair = padic_sqrt(&x, 64).unwrap();
        assert_eq!(pair.root.precision(), 64);
        assert_eq!(pair.root.unit_residue_to(2).unwrap(), BigUint::from(1u32));
        assert!(pair.root.square().agrees_with(&x, 64));
    }

    #[test]
    fn two_adic_root_of_truncated_radicand_loses_a_digit() {
        let x = q(17, 1, 2).forget_exact().with_precision(40);
        let pair = padic_sqrt(&x, 64).unwrap();
        assert_eq!(pair.root.precision(), 39);
        assert!(pair.root.square().agrees_with(&x, 39));
    }

    #[test]
    fn nonexistent_root_is_an_error() {
        assert_eq!(padic_sqrt(&q(2, 1, 5), 16), Err(Error::NoSquareRoot { p: 5 }));
    }

    #[test]
    fn verdict_examples() {
        let v = sqrt_a2p4_verdict(&q(4, 1, 2)).unwrap();
        assert_eq!((v.exists, v.case_tag), (false, CaseTag::TwoAdicValuationTwo));

        let v = sqrt_a2p4_verdict(&q(4, 1, 11)).unwrap();
        assert!(v.exists);
        assert_eq!(v.case_tag, CaseTag::UnitAResidue);
        // 4^2 + 4 = 20 = 9 (mod 11), witness 3
        assert_eq!(v.witness, Some(3));

        let a = PAdicNumber::parse("0;1,2,2", prime(5), 64).unwrap();
        let v = sqrt_a2p4_verdict(&a).unwrap();
        assert_eq!((v.exists, v.case_tag), (true, CaseTag::UnitADegenerate));
    }

    #[test]
    fn degenerate_digit_conditions_are_not_sufficient() {
        // a = 36 = 1 + 2*5 + 1*25: a0^2+4 = 5, 1 + 2*1*2 = 5 = 0, 2^2 + 2*1*1 = 6 != 0,
        // yet a^2 + 4 = 1300 = 5^2 * 52 and 52 = 2 (mod 5) is not a square.
        let a = q(36, 1, 5);
        let v = sqrt_a2p4_verdict(&a).unwrap();
        assert_eq!(v.case_tag, CaseTag::UnitADegenerate);
        assert!(!v.exists);
        assert!(!sqrt_exists(&q(1300, 1, 5)).unwrap());
    }

    #[test]
    fn unit_a_at_small_primes_has_no_root() {
        assert_eq!(sqrt_a2p4_verdict(&q(3, 1, 2)).unwrap().case_tag, CaseTag::UnitATwo);
        assert_eq!(sqrt_a2p4_verdict(&q(2, 1, 3)).unwrap().case_tag, CaseTag::UnitAThree);
        assert!(!sqrt_a2p4_verdict(&q(5, 1, 3)).unwrap().exists);
    }

    #[test]
    fn quadratic_for_zero_parameter() {
        let (x2, x3) = solve_fixed_quadratic(&PAdicNumber::zero(prime(5)), 32).unwrap();
        assert_eq!(x2.exact_value().unwrap(), BigRational::from_integer(1.into()));
        assert_eq!(x3.exact_value().unwrap(), BigRational::from_integer((-1).into()));
    }

    #[test]
    fn quadratic_roots_satisfy_vieta() {
        for (p, n, d) in [(11u64, 4i64, 1i64), (3, 3, 1), (5, 1, 5), (2, 8, 1), (7, 7, 1)] {
            let a = q(n, d, p);
            let (x2, x3) = solve_fixed_quadratic(&a, 64).unwrap();
            let sum = &x2 + &x3;
            let prod = &x2 * &x3;
            assert!(sum.agrees_with(&-&a, 40), "sum p={p}");
            assert!(prod.agrees_with(&q(-1, 1, p), 40), "product p={p}");
        }
        let a = q(3, 1, 3);
        let (x2, x3) = solve_fixed_quadratic(&a, 64).unwrap();
        assert_eq!(x2.norm().unwrap(), NormValue::ONE);
        assert_eq!(x3.norm().unwrap(), NormValue::ONE);
    }

    #[test]
    fn quadratic_for_eleven_and_four() {
        // s = sqrt(20) = 3 (mod 11), roots (-4 + 3)/2 = 5 and (-4 - 3)/2 = 2 (mod 11)
        let a = q(4, 1, 11);
        let (x2, x3) = solve_fixed_quadratic(&a, 64).unwrap();
        assert_eq!(x2.leading_digit(), Some(5));
        assert_eq!(x3.leading_digit(), Some(2));
        assert_eq!(x2.norm().unwrap(), NormValue::ONE);
        assert_eq!(x3.norm().unwrap(), NormValue::ONE);
    }

    #[test]
    fn large_a_small_root_keeps_precision() {
        let a = q(1, 5, 5);
        let (x2, x3) = solve_fixed_quadratic(&a, 64).unwrap();
        let (small, big) = if x2.norm().unwrap() < x3.norm().unwrap() { (x2, x3) } else { (x3, x2) };
        assert_eq!(small.norm().unwrap(), NormValue::Pow(-1));
        assert_eq!(big.norm().unwrap(), NormValue::Pow(1));
        assert!(small.precision() >= 60);
    }
}
