//! Norms and multipliers of the fixed points.

use super::{Checker, ClaimReport, Ctx};
use crate::dynamics::{
    apply_f, fixed_points, FixedPointKind, FixedPointRecord, FixedPointSet, MapParams, Stratum, Which,
};
use crate::error::Result;
use crate::padic::{NormValue, PAdicNumber};

fn kind_of(set: &FixedPointSet, which: Which) -> Option<FixedPointKind> {
    set.get(which).map(|r| r.kind)
}

const MIN_RESIDUAL_DIGITS: u32 = 16;

/// `f(x*) = x*` on the digits that survive cancellation, for every fixed point.
pub(crate) fn check_residuals(c: &mut Checker, params: &MapParams, set: &FixedPointSet) {
    for r in &set.records {
        if r.value.is_exact_zero() {
            continue;
        }
        let fx = apply_f(params, &r.value);
        // Digits of f(x*) that survive cancellation, relative to |x*|.
        let known = match (fx.absolute_precision(), r.value.valuation()) {
            (Some(abs), Ok(v)) => (abs - v).clamp(0, i64::from(r.value.precision())) as u32,
            _ => r.value.precision(),
        };
        let digits = known.min(r.value.precision());
        let ok = digits >= MIN_RESIDUAL_DIGITS && fx.agrees_with(&r.value, digits);
        c.check(ok, Some(&r.value), || format!("f({}) != {} on {digits} digits", r.which, r.which));
    }
}

fn norm(x: &PAdicNumber) -> NormValue {
    x.norm().unwrap_or_else(|_| x.norm_upper_bound())
}

fn poly(params: &MapParams, c0: i64, c2: i64) -> PAdicNumber {
    &params.constant(c0) + &(&params.constant(c2) * &params.a.square())
}

/// `|f'(x2) f'(x3)| = |9 + 2a^2|` and `|f'(x2) + f'(x3)| = |6 + a^2|`.
fn check_multiplier_identities(c: &mut Checker, params: &MapParams, x2: &FixedPointRecord, x3: &FixedPointRecord) {
    let prod = norm(&(&x2.multiplier * &x3.multiplier));
    let sum = norm(&(&x2.multiplier + &x3.multiplier));
    let p9 = norm(&poly(params, 9, 2));
    let p6 = norm(&poly(params, 6, 1));
    c.check(prod == p9, None, || format!("|f'(x2) f'(x3)| = {prod} but |9 + 2a^2| = {p9}"));
    c.check(sum == p6, None, || format!("|f'(x2) + f'(x3)| = {sum} but |6 + a^2| = {p6}"));
}

pub(crate) fn pair(set: &FixedPointSet) -> Option<(&FixedPointRecord, &FixedPointRecord)> {
    Some((set.get(Which::X2)?, set.get(Which::X3)?))
}

pub(crate) fn missing_pair(ctx: &Ctx<'_>, set: &FixedPointSet) -> ClaimReport {
    let why = set.undecided.clone().unwrap_or_else(|| "sqrt(a^2 + 4) does not exist, so x2 and x3 are absent".into());
    ctx.skipped(why)
}

/// `|a| < 1`: `x1` attractive; `x2`, `x3` indifferent for `p != 3` and
/// attractive for `p = 3`; `|x2| = |x3| = 1`.
pub(crate) fn lem_4_1(ctx: &Ctx<'_>) -> Result<ClaimReport> {
    let params = ctx.params()?;
    if params.stratum() != Stratum::Small {
        return Ok(ctx.skipped("needs |a| < 1"));
    }
    let set = fixed_points(params)?;
    let Some((x2, x3)) = pair(&set) else { return Ok(missing_pair(ctx, &set)) };
    let mut c = Checker::new(ctx);
    check_residuals(&mut c, params, &set);
    let expected = if ctx.p.get() == 3 { FixedPointKind::Attractive } else { FixedPointKind::Indifferent };
    c.check(kind_of(&set, Which::X1) == Some(FixedPointKind::Attractive), None, || "x1 not attractive".into());
    for r in [x2, x3] {
        c.add_samples(1);
        c.count(format!("{}:{}", r.which, r.kind.as_str()));
        c.check(r.kind == expected, Some(&r.value), || {
            format!("{} is {}, expected {}", r.which, r.kind.as_str(), expected.as_str())
        });
        c.check(norm(&r.value) == NormValue::ONE, Some(&r.value), || format!("|{}| != 1", r.which));
    }
    Ok(c.finish())
}

/// `|a| = 1`: `|9 + 2a^2| < 1` and `|6 + a^2| < 1` never hold together,
/// checked on random units; the multiplier identities are checked whenever
/// the fixed points exist.
pub(crate) fn lem_4_2(ctx: &Ctx<'_>) -> Result<ClaimReport> {
    let mut rng = ctx.rng(0x42);
    let mut c = Checker::new(ctx);
    for _ in 0..200 {
        let a = ctx.random_unit(&mut rng, 8);
        let params = MapParams::new(a.clone(), ctx.cfg.precision)?;
        let small9 = norm(&poly(&params, 9, 2)) < NormValue::ONE;
        let small6 = norm(&poly(&params, 6, 1)) < NormValue::ONE;
        c.add_samples(1);
        c.check(!(small9 && small6), Some(&a), || "|9 + 2a^2| < 1 and |6 + a^2| < 1".into());
        let set = fixed_points(&params)?;
        if let (Some(x2), Some(x3)) = (set.get(Which::X2), set.get(Which::X3)) {
            c.count("fixed_points_exist");
            check_multiplier_identities(&mut c, &params, x2, x3);
            c.check(
                !(x2.kind == FixedPointKind::Attractive && x3.kind == FixedPointKind::Attractive),
                Some(&a),
                || "both x2 and x3 attractive".into(),
            );
        }
    }
    Ok(c.finish())
}

/// `|a| = 1`: `|x2| = |x3| = 1`, `x1` attractive, and the pair is either
/// both indifferent or one attractive and one indifferent.
pub(crate) fn lem_4_3(ctx: &Ctx<'_>) -> Result<ClaimReport> {
    let params = ctx.params()?;
    if params.stratum() != Stratum::Unit {
        return Ok(ctx.skipped("needs |a| = 1"));
    }
    let set = fixed_points(params)?;
    let Some((x2, x3)) = pair(&set) else { return Ok(missing_pair(ctx, &set)) };
    let mut c = Checker::new(ctx);
    check_residuals(&mut c, params, &set);
    check_multiplier_identities(&mut c, params, x2, x3);
    c.add_samples(2);
    for r in [x2, x3] {
        c.check(norm(&r.value) == NormValue::ONE, Some(&r.value), || format!("|{}| != 1", r.which));
        c.check(r.kind != FixedPointKind::Repelling, Some(&r.value), || format!("{} repelling", r.which));
    }
    use FixedPointKind::*;
    match (x2.kind, x3.kind) {
        (Indifferent, Indifferent) => c.count("case1:both_indifferent"),
        (Attractive, Indifferent) => c.count("case2:x2_attractive"),
        (Indifferent, Attractive) => c.count("case3:x3_attractive"),
        (k2, k3) => c.fail(None, format!("unexpected pair ({}, {})", k2.as_str(), k3.as_str())),
    }
    Ok(c.finish())
}

/// `|a| > 1`: `x1` attractive, one of `x2`, `x3` repelling with
/// `|lambda| = |a|^2` and norm `|a|`, the other indifferent with norm `1/|a|`.
pub(crate) fn lem_4_4(ctx: &Ctx<'_>) -> Result<ClaimReport> {
    let params = ctx.params()?;
    let Stratum::Large { m } = params.stratum() else { return Ok(ctx.skipped("needs |a| > 1")) };
    let set = fixed_points(params)?;
    let Some((x2, x3)) = pair(&set) else { return Ok(missing_pair(ctx, &set)) };
    let mut c = Checker::new(ctx);
    check_residuals(&mut c, params, &set);
    c.add_samples(2);
    c.check(kind_of(&set, Which::X1) == Some(FixedPointKind::Attractive), None, || "x1 not attractive".into());
    let (rep, ind) = if x2.kind == FixedPointKind::Repelling { (x2, x3) } else { (x3, x2) };
    c.check(rep.kind == FixedPointKind::Repelling, Some(&rep.value), || "no repelling fixed point".into());
    c.check(rep.multiplier_norm == NormValue::Pow(2 * m), Some(&rep.value), || {
        format!("|lambda| = {}, expected p^{}", rep.multiplier_norm, 2 * m)
    });
    c.check(norm(&rep.value) == NormValue::Pow(m), Some(&rep.value), || "repeller norm is not |a|".into());
    c.check(ind.kind == FixedPointKind::Indifferent, Some(&ind.value), || "no indifferent fixed point".into());
    c.check(norm(&ind.value) == NormValue::Pow(-m), Some(&ind.value), || "indifferent norm is not 1/|a|".into());
    c.note(
        Some(&rep.value),
        format!("{} repelling, |lambda| = p^{}; {} indifferent", rep.which, 2 * m, ind.which),
    );
    Ok(c.finish())
}

/// `p = 5`, `a0 in {1, 4}`: whenever `x2`, `x3` exist both are indifferent.
/// Checked on the instance and on random units with such a leading digit.
pub(crate) fn ex_4_1(ctx: &Ctx<'_>) -> Result<ClaimReport> {
    let params = ctx.params()?;
    if ctx.p.get() != 5 || params.stratum() != Stratum::Unit {
        return Ok(ctx.skipped("needs p = 5 and |a| = 1"));
    }
    let set = fixed_points(params)?;
    if pair(&set).is_none() {
        return Ok(missing_pair(ctx, &set));
    }
    let mut rng = ctx.rng(0x41);
    let mut c = Checker::new(ctx);
    let mut candidates = vec![params.clone()];
    while candidates.len() < 60 {
        let u = ctx.random_unit_int(&mut rng, 8);
        if matches!(u % 5, 1 | 4) {
            candidates.push(MapParams::new(PAdicNumber::from_integer(u, ctx.p, ctx.cfg.precision), ctx.cfg.precision)?);
        }
    }
    for m in &candidates {
        let set = fixed_points(m)?;
        let (Some(x2), Some(x3)) = (set.get(Which::X2), set.get(Which::X3)) else {
            c.count("no_fixed_points");
            continue;
        };
        c.add_samples(1);
        check_residuals(&mut c, m, &set);
        check_multiplier_identities(&mut c, m, x2, x3);
        c.check(
            x2.kind == FixedPointKind::Indifferent && x3.kind == FixedPointKind::Indifferent,
            Some(&m.a),
            || format!("kinds ({}, {})", x2.kind.as_str(), x3.kind.as_str()),
        );
        c.count("both_indifferent");
    }
    Ok(c.finish())
}

/// Norm pattern of an example: `(|9 + 2a^2| < 1, |6 + a^2| < 1)`, expected kinds.
fn example(ctx: &Ctx<'_>, small9: bool, small6: bool, kinds: [FixedPointKind; 2]) -> Result<ClaimReport> {
    let params = ctx.params()?;
    if params.stratum() != Stratum::Unit {
        return Ok(ctx.skipped("needs |a| = 1"));
    }
    let set = fixed_points(params)?;
    let Some((x2, x3)) = pair(&set) else { return Ok(missing_pair(ctx, &set)) };
    let mut c = Checker::new(ctx);
    c.add_samples(1);
    check_residuals(&mut c, params, &set);
    check_multiplier_identities(&mut c, params, x2, x3);
    let n9 = norm(&poly(params, 9, 2));
    let n6 = norm(&poly(params, 6, 1));
    let n4 = norm(&poly(params, 4, 1));
    c.check((n9 < NormValue::ONE) == small9, None, || format!("|9 + 2a^2| = {n9}"));
    c.check((n6 < NormValue::ONE) == small6, None, || format!("|6 + a^2| = {n6}"));
    c.check(n4 == NormValue::ONE, None, || format!("|a^2 + 4| = {n4}, expected 1"));
    c.check([x2.kind, x3.kind] == kinds, None, || {
        format!("kinds ({}, {}), expected ({}, {})", x2.kind.as_str(), x3.kind.as_str(), kinds[0].as_str(), kinds[1].as_str())
    });
    c.note(
        None,
        format!("x2 {} (|lambda| {}), x3 {} (|lambda| {})", x2.kind.as_str(), x2.multiplier_norm, x3.kind.as_str(), x3.multiplier_norm),
    );
    Ok(c.finish())
}

/// `p = 11`, `a = 4`: both indifferent, `|6 + a^2| < 1`, `|a^2 + 4| = 1`.
pub(crate) fn ex_4_2(ctx: &Ctx<'_>) -> Result<ClaimReport> {
    example(ctx, false, true, [FixedPointKind::Indifferent, FixedPointKind::Indifferent])
}

/// `p = 11`, `a = 1`: one attractive, one indifferent, `|9 + 2a^2| < 1`.
pub(crate) fn ex_4_3(ctx: &Ctx<'_>) -> Result<ClaimReport> {
    example(ctx, true, false, [FixedPointKind::Attractive, FixedPointKind::Indifferent])
}
