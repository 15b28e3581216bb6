//! Existence of square roots and of the fixed points `x2`, `x3`.

use super::{Checker, ClaimReport, Ctx};
use crate::error::Result;
use crate::padic::{NormValue, PAdicNumber};
use crate::roots::{a_squared_plus_four, padic_sqrt, sqrt_a2p4_verdict, sqrt_exists};

const RANDOM_PER_VALUATION: usize = 20;
const RANDOM_UNITS: usize = 200;

/// Whether the nonzero integer `n` is a square in `Q_p`, read off its
/// valuation and its unit part by brute force.
pub(crate) fn integer_is_padic_square(n: u128, p: u64) -> bool {
    assert!(n != 0);
    let p = u128::from(p);
    let (mut u, mut v) = (n, 0u32);
    while u % p == 0 {
        u /= p;
        v += 1;
    }
    if v % 2 == 1 {
        return false;
    }
    if p == 2 {
        u % 8 == 1
    } else {
        (1..p).any(|x| x * x % p == u % p)
    }
}

/// Checks `root^2 = radicand` on `digits` digits.
fn check_hensel(c: &mut Checker, radicand: &PAdicNumber, digits: u32) -> Result<()> {
    let pair = padic_sqrt(radicand, digits)?;
    for r in [&pair.root, &pair.neg_root] {
        c.check(r.square().agrees_with(radicand, digits), Some(radicand), || {
            format!("root {} does not square back on {digits} digits", r.to_compact())
        });
    }
    c.count("hensel_checked");
    Ok(())
}

/// The square-root criterion against squares modulo `p^6`, for every unit
/// `u mod p^4` and `v in {0, 1, 2}`.
pub(crate) fn lem_2_1(ctx: &Ctx<'_>) -> Result<ClaimReport> {
    let p = u64::from(ctx.p.get());
    let m6 = p.pow(6);
    let mut squares = vec![false; usize::try_from(m6).expect("small modulus")];
    for x in 0..m6 {
        squares[usize::try_from(x * x % m6).expect("in range")] = true;
    }
    let mut c = Checker::new(ctx);
    for v in 0..=2u32 {
        for u in (1..p.pow(4)).filter(|u| u % p != 0) {
            let n = u * p.pow(v);
            let oracle = squares[usize::try_from(n).expect("in range")];
            let x = PAdicNumber::from_integer(n, ctx.p, ctx.cfg.precision);
            let got = sqrt_exists(&x)?;
            c.add_samples(1);
            c.count(if oracle { "square" } else { "non_square" });
            c.check(got == oracle, Some(&x), || {
                format!("criterion says {got}, squares mod {p}^6 say {oracle}")
            });
        }
    }
    Ok(c.finish())
}

/// `|a| < 1`: `sqrt(a^2 + 4)` exists iff `p >= 3`, or `p = 2` and `|a| <= 2^-3`.
pub(crate) fn prop_3_1(ctx: &Ctx<'_>) -> Result<ClaimReport> {
    let p = u64::from(ctx.p.get());
    let valuations = if ctx.p.is_two() { 1..=5 } else { 1..=3 };
    let mut rng = ctx.rng(0x31);
    let mut c = Checker::new(ctx);
    for v in valuations {
        let expected = !ctx.p.is_two() || v >= 3;
        for _ in 0..RANDOM_PER_VALUATION {
            let eps = ctx.random_unit_int(&mut rng, 8);
            let a_int = u128::from(eps) * u128::from(p).pow(v);
            let a = PAdicNumber::from_integer(a_int, ctx.p, ctx.cfg.precision);
            let verdict = sqrt_a2p4_verdict(&a)?;
            let oracle = integer_is_padic_square(a_int * a_int + 4, p);
            c.add_samples(1);
            c.count(format!("v={v}:{}", if verdict.exists { "exists" } else { "absent" }));
            c.check(verdict.exists == expected && oracle == expected, Some(&a), || {
                format!(
                    "v(a) = {v}: verdict {} ({}), integer oracle {oracle}, expected {expected}",
                    verdict.exists,
                    verdict.case_tag.as_str()
                )
            });
            if verdict.exists {
                check_hensel(&mut c, &a_squared_plus_four(&a), ctx.cfg.precision)?;
            }
        }
    }
    Ok(c.finish())
}

/// `|a| > 1`: `sqrt(a^2 + 4)` always exists.
pub(crate) fn prop_3_2(ctx: &Ctx<'_>) -> Result<ClaimReport> {
    let mut rng = ctx.rng(0x32);
    let mut c = Checker::new(ctx);
    for k in 1..=3i64 {
        for _ in 0..RANDOM_PER_VALUATION {
            let a = ctx.random_unit(&mut rng, 8).mul_p_power(-k);
            let verdict = sqrt_a2p4_verdict(&a)?;
            let t = a_squared_plus_four(&a);
            c.add_samples(1);
            c.check(verdict.exists && sqrt_exists(&t)?, Some(&a), || {
                format!("no square root reported for |a| = p^{k}")
            });
            check_hensel(&mut c, &t, ctx.cfg.precision)?;
        }
    }
    Ok(c.finish())
}

/// `|a| = 1`: never for `p = 2, 3`; for `p >= 5` and `a0^2 + 4` a unit,
/// exactly when `a0^2 + 4` is a square mod `p`.
pub(crate) fn prop_3_3(ctx: &Ctx<'_>) -> Result<ClaimReport> {
    let p = u64::from(ctx.p.get());
    let mut rng = ctx.rng(0x33);
    let mut c = Checker::new(ctx);
    for _ in 0..RANDOM_UNITS {
        let a_int = ctx.random_unit_int(&mut rng, 8);
        let a = PAdicNumber::from_integer(a_int, ctx.p, ctx.cfg.precision);
        let verdict = sqrt_a2p4_verdict(&a)?;
        let oracle = integer_is_padic_square(u128::from(a_int).pow(2) + 4, p);
        c.add_samples(1);
        c.check(verdict.exists == oracle, Some(&a), || {
            format!("verdict {} disagrees with the integer oracle", verdict.exists)
        });
        let a0 = a_int % p;
        let c0 = (a0 * a0 + 4) % p;
        let expected = match p {
            2 | 3 => Some(false),
            _ if c0 != 0 => Some((1..p).any(|x| x * x % p == c0)),
            _ => None,
        };
        match expected {
            Some(e) => {
                c.count(verdict.case_tag.as_str());
                c.check(verdict.exists == e, Some(&a), || {
                    format!("residue criterion predicts {e}, verdict {}", verdict.exists)
                });
            }
            None => c.count("degenerate"),
        }
        if verdict.exists {
            check_hensel(&mut c, &a_squared_plus_four(&a), ctx.cfg.precision)?;
        }
    }
    Ok(c.finish())
}

/// The sufficient digit condition for `a0^2 + 4 = 0 (mod p)`:
/// `(a0^2 + 4)/p + 2 a0 a1 = 0` and `a1^2 + 2 a0 a2 != 0 (mod p)` should give
/// a square root. Every digit triple meeting it is tested on the integer
/// `a0 + a1 p + a2 p^2`.
pub(crate) fn prop_3_3_degenerate(ctx: &Ctx<'_>) -> Result<ClaimReport> {
    let p = u64::from(ctx.p.get());
    if p < 5 {
        return Ok(ctx.skipped("needs p >= 5"));
    }
    let a0s: Vec<u64> = (1..p).filter(|a0| (a0 * a0 + 4) % p == 0).collect();
    if a0s.is_empty() {
        return Ok(ctx.skipped("-4 is not a square mod p, so a0^2 + 4 = 0 (mod p) has no solution"));
    }
    let mut c = Checker::new(ctx);
    for &a0 in &a0s {
        for a1 in 0..p {
            for a2 in 0..p {
                let second = ((a0 * a0 + 4) / p + 2 * a0 * a1) % p == 0;
                let third = (a1 * a1 + 2 * a0 * a2) % p != 0;
                if !(second && third) {
                    continue;
                }
                let a_int = u128::from(a0 + a1 * p + a2 * p * p);
                let a = PAdicNumber::from_integer(a_int, ctx.p, ctx.cfg.precision);
                let t = a_squared_plus_four(&a);
                let exists = integer_is_padic_square(a_int * a_int + 4, p);
                c.add_samples(1);
                c.count(if exists { "root_exists" } else { "no_root" });
                c.check(exists, Some(&a), || {
                    let detail = match t.valuation() {
                        Ok(v) if v % 2 != 0 => format!("v(a^2 + 4) = {v} is odd"),
                        Ok(v) => format!(
                            "v(a^2 + 4) = {v} but its unit digit {} is not a square mod {p}",
                            t.leading_digit().unwrap_or(0)
                        ),
                        Err(e) => e.to_string(),
                    };
                    format!(
                        "digits ({a0}, {a1}, {a2}) meet the condition, a = {a_int}, \
                         a^2 + 4 = {}: {detail}; the carry out of (a0^2 + 4)/p + 2 a0 a1 \
                         shifts the p^2 digit",
                        a_int * a_int + 4
                    )
                });
            }
        }
    }
    Ok(c.finish())
}

/// The worked element `a = 1 + 2*5 + 2*5^2 + ...` meets the digit condition
/// and has `sqrt(a^2 + 4)`.
pub(crate) fn prop_3_3_example(ctx: &Ctx<'_>) -> Result<ClaimReport> {
    let params = ctx.params()?;
    let a = &params.a;
    let p = u64::from(ctx.p.get());
    let mut c = Checker::new(ctx);
    if a.norm()? != NormValue::ONE {
        return Ok(ctx.skipped("needs |a| = 1"));
    }
    let d: Vec<u64> = a.canonical_digits(3)?.into_iter().map(u64::from).collect();
    let (a0, a1, a2) = (d[0], d[1], d[2]);
    let cond = (a0 * a0 + 4) % p == 0
        && ((a0 * a0 + 4) / p + 2 * a0 * a1) % p == 0
        && (a1 * a1 + 2 * a0 * a2) % p != 0;
    c.add_samples(1);
    c.check(cond, Some(a), || format!("digits ({a0}, {a1}, {a2}) do not meet the condition"));
    let t = a_squared_plus_four(a);
    let exists = sqrt_exists(&t)?;
    c.check(exists, Some(a), || "sqrt(a^2 + 4) does not exist".into());
    if exists {
        check_hensel(&mut c, &t, ctx.cfg.precision)?;
        c.note(Some(&t), format!("a^2 + 4 has valuation {}", t.valuation()?));
    }
    Ok(c.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_oracle() {
        assert!(integer_is_padic_square(4, 5));
        assert!(!integer_is_padic_square(2, 5));
        assert!(!integer_is_padic_square(5, 5));
        assert!(integer_is_padic_square(17, 2));
        assert!(!integer_is_padic_square(5, 2));
        assert!(!integer_is_padic_square(1300, 5));
        assert!(integer_is_padic_square(3725, 5));
    }
}
