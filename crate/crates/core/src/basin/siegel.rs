use serde::Serialize;

use super::sampling::sphere_samples;
use crate::dynamics::{apply_f, FixedPointKind, FixedPointRecord, MapParams, Stratum};
use crate::error::{Error, Result};
use crate::padic::{NormValue, PAdicNumber};
use crate::roots::{padic_sqrt, sqrt_exists};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum RadiusVerdict {
    InvariantOnSamples,
    /// `|f(x) - x*| != |x - x*|` for this sample.
    CounterexampleFound { point: PAdicNumber, image_log_distance: Option<i64> },
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RadiusCheck {
    pub log_radius: i64,
    pub samples: usize,
    pub verdict: RadiusVerdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryConclusion {
    OpenBall,
    ClosedBall,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SiegelReport {
    pub fixed_point: FixedPointRecord,
    pub boundary_log_radius: i64,
    pub per_radius: Vec<RadiusCheck>,
    pub witness: Option<PAdicNumber>,
    pub boundary_conclusion: BoundaryConclusion,
}

/// Log-radius of the sphere where the maximal Siegel disc may stop: 0 for
/// `|a| <= 1`, `-m` for `|a| = p^m > 1`.
pub fn boundary_log_radius(params: &MapParams) -> i64 {
    match params.stratum() {
        Stratum::Large { m } => -m,
        _ => 0,
    }
}

/// Checks `|f(x) - x*| = |x - x*|` on samples of `S(x*, e)`.
pub fn check_sphere(
    params: &MapParams,
    fp: &FixedPointRecord,
    log_radius: i64,
    depth: u32,
    seed: u64,
) -> Result<RadiusCheck> {
    let samples = sphere_samples(&fp.value, log_radius, depth, seed)?;
    let mut undetermined = false;
    for x in &samples {
        let d = &apply_f(params, x) - &fp.value;
        let image = match d.norm() {
            Ok(n) => n,
            Err(_) => match d.norm_upper_bound() {
                NormValue::Pow(k) if k < log_radius => NormValue::Pow(k),
                _ => {
                    undetermined = true;
                    continue;
                }
            },
        };
        if image != NormValue::Pow(log_radius) {
            return Ok(RadiusCheck {
                log_radius,
                samples: samples.len(),
                verdict: RadiusVerdict::CounterexampleFound {
                    point: x.clone(),
                    image_log_distance: image.log(),
                },
            });
        }
    }
    let verdict = if undetermined {
        RadiusVerdict::Undetermined
    } else {
        RadiusVerdict::InvariantOnSamples
    };
    Ok(RadiusCheck { log_radius, samples: samples.len(), verdict })
}

/// Sphere-invariance scan around `fp` plus a verdict on whether the maximal
/// Siegel disc is the open or the closed ball at the boundary radius.
pub fn siegel_scan(
    params: &MapParams,
    fp: &FixedPointRecord,
    log_radii: &[i64],
    depth: u32,
    seed: u64,
) -> Result<SiegelReport> {
    let boundary = boundary_log_radius(params);
    let mut per_radius = log_radii
        .iter()
        .map(|&e| check_sphere(params, fp, e, depth, seed))
        .collect::<Result<Vec<_>>>()?;
    let boundary_check = match per_radius.iter().find(|c| c.log_radius == boundary) {
        Some(c) => c.clone(),
        None => {
            let c = check_sphere(params, fp, boundary, depth, seed)?;
            per_radius.push(c.clone());
            per_radius.sort_by_key(|c| c.log_radius);
            c
        }
    };
    let witness = boundary_escape_witness(params, fp);
    let counterexample = matches!(boundary_check.verdict, RadiusVerdict::CounterexampleFound { .. });
    let boundary_conclusion = match (&witness, &boundary_check.verdict) {
        (Ok(Some(_)), _) => BoundaryConclusion::OpenBall,
        _ if counterexample => BoundaryConclusion::OpenBall,
        (Ok(None), RadiusVerdict::InvariantOnSamples) => BoundaryConclusion::ClosedBall,
        _ => BoundaryConclusion::Undetermined,
    };
    Ok(SiegelReport {
        fixed_point: fp.clone(),
        boundary_log_radius: boundary,
        per_radius,
        witness: witness.ok().flatten(),
        boundary_conclusion,
    })
}

/// Discriminant `a^2 - 3 + a x*` of `z^2 + (3x* + a) z + 3 - a x* = 0`, whose
/// roots `z` give the points `x* + z` of `S_1(x*)` mapped onto `x*`.
pub fn boundary_discriminant(params: &MapParams, fp: &FixedPointRecord) -> PAdicNumber {
    let a = &params.a;
    &(&a.square() - &params.constant(3)) + &(a * &fp.value)
}

/// A point `x` of the unit sphere around an indifferent `x*` (`|a| <= 1`)
/// with `|f(x) - x*| < 1`, or `None` when there is none.
///
/// When the boundary discriminant has a square root the witness is an exact
/// preimage `x* + z` of `x*`, `z` a Hensel-lifted root of the boundary
/// quadratic. Otherwise the quadratic may still have a repeated unit root
/// modulo `p` (this happens when `p` divides the discriminant), and the
/// residues `x* + z0`, `z0 = 1..p-1`, are tried directly. No residue root
/// means every point of the unit sphere stays on it.
pub fn boundary_escape_witness(params: &MapParams, fp: &FixedPointRecord) -> Result<Option<PAdicNumber>> {
    if fp.kind != FixedPointKind::Indifferent {
        return Err(Error::NotApplicable(format!("{} is not indifferent", fp.which)));
    }
    if matches!(params.stratum(), Stratum::Large { .. }) {
        return Err(Error::NotApplicable("boundary witness needs |a| <= 1".into()));
    }
    let escapes = |x: &PAdicNumber| {
        (&apply_f(params, x) - &fp.value).norm_upper_bound() < NormValue::ONE
            && (x - &fp.value).norm().ok() == Some(NormValue::ONE)
    };
    let disc = boundary_discriminant(params, fp);
    if !disc.is_zero_to_precision() && sqrt_exists(&disc)? {
        let s = padic_sqrt(&disc, params.precision)?.root;
        let linear = &(&params.constant(3) * &fp.value) + &params.a;
        let z = (&s - &linear).try_div(&params.constant(2))?;
        let x = &fp.value + &z;
        if !escapes(&x) {
            return Err(Error::NotApplicable("boundary witness failed verification".into()));
        }
        return Ok(Some(x));
    }
    for z0 in 1..i64::from(params.p.get()) {
        let x = &fp.value + &params.constant(z0);
        if escapes(&x) {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{fixed_points, Which};
    use crate::padic::Prime;

    fn setup(a: &str, p: u64) -> (MapParams, FixedPointRecord) {
        let m = MapParams::parse(a, Prime::new(p).unwrap(), 64).unwrap();
        let fp = fixed_points(&m).unwrap().get(Which::X2).unwrap().clone();
        (m, fp)
    }

    #[test]
    fn open_ball_when_minus_three_is_a_square() {
        let (m, fp) = setup("7", 7);
        let w = boundary_escape_witness(&m, &fp).unwrap().unwrap();
        assert_eq!((&w - &fp.value).norm().unwrap(), NormValue::ONE);
        assert!((&apply_f(&m, &w) - &fp.value).norm_upper_bound() <= NormValue::Pow(-1));
        let r = siegel_scan(&m, &fp, &[-2, -1, 0], 2, 1).unwrap();
        assert_eq!(r.boundary_conclusion, BoundaryConclusion::OpenBall);
        assert_eq!(r.per_radius[1].verdict, RadiusVerdict::InvariantOnSamples);
    }

    #[test]
    fn closed_ball_otherwise() {
        for (a, p) in [("5", 5), ("11", 11)] {
            let (m, fp) = setup(a, p);
            assert_eq!(boundary_escape_witness(&m, &fp).unwrap(), None);
            let r = siegel_scan(&m, &fp, &[-1, 0], 2, 1).unwrap();
            assert_eq!(r.boundary_conclusion, BoundaryConclusion::ClosedBall, "p = {p}");
        }
    }

    #[test]
    fn spheres_beyond_the_boundary_are_not_invariant() {
        let (m, fp) = setup("5", 5);
        let c = check_sphere(&m, &fp, 1, 2, 1).unwrap();
        assert!(matches!(
            c.verdict,
            RadiusVerdict::CounterexampleFound { image_log_distance: Some(3), .. }
        ));
    }

    #[test]
    fn repeated_residue_root_opens_the_disc() {
        // a = -3/2: x3 = -1/2 is indifferent and f(1) = -1/2 although |1 - x3| = 1
        let m = MapParams::parse("-3/2", Prime::new(5).unwrap(), 64).unwrap();
        let set = fixed_points(&m).unwrap();
        for fp in &set.records[1..] {
            assert_eq!(fp.kind, FixedPointKind::Indifferent);
            let w = boundary_escape_witness(&m, fp).unwrap().expect("witness");
            assert!((&apply_f(&m, &w) - &fp.value).norm_upper_bound() < NormValue::ONE);
            let r = siegel_scan(&m, fp, &[-1, 0], 2, 1).unwrap();
            assert_eq!(r.boundary_conclusion, BoundaryConclusion::OpenBall);
        }
        let one = m.constant(1);
        let x3 = m.constant(-1).try_div(&m.constant(2)).unwrap();
        assert_eq!(apply_f(&m, &one).exact_value(), x3.exact_value());
    }
}
