use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{PAdicNumber, Prime, DEFAULT_PRECISION};

/// Seed used by the reproduction suite for random tails.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Digits appended after the enumerated ones by a random tail.
const TAIL_DIGITS: u32 = 6;

/// How sample points continue past the enumerated digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum Tail {
    Zero,
    SeededRandom { seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Sphere,
    Ball,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampleDescription {
    pub shape: Shape,
    pub center: PAdicNumber,
    pub log_radius: i64,
    pub depth: u32,
    pub tail: Tail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampleSet {
    pub description: SampleDescription,
    pub points: Vec<PAdicNumber>,
}

/// Points `c + p^(-e) (u + p^k t)` of the sphere `|x - c| = p^e`, one for
/// every unit residue `u mod p^k`, in increasing order of `u`.
pub fn enumerate_sphere(
    center: &PAdicNumber,
    log_radius: i64,
    depth: u32,
    tail: Tail,
) -> Result<SampleSet> {
    let p = center.prime();
    let residues = (0..residue_count(p, depth)?)
        .filter(|u| u % u64::from(p.get()) != 0)
        .collect::<Vec<_>>();
    sample(center, log_radius, depth, tail, Shape::Sphere, &residues)
}

/// Points `c + p^(-e) (w + p^k t)` of the closed ball `|x - c| <= p^e`, one
/// for every residue `w mod p^k`.
pub fn enumerate_ball(
    center: &PAdicNumber,
    log_radius: i64,
    depth: u32,
    tail: Tail,
) -> Result<SampleSet> {
    let p = center.prime();
    let residues = (0..residue_count(p, depth)?).collect::<Vec<_>>();
    sample(center, log_radius, depth, tail, Shape::Ball, &residues)
}

/// `p^k`, refusing enumerations that would not fit in memory anyway.
fn residue_count(p: Prime, depth: u32) -> Result<u64> {
    u64::from(p.get())
        .checked_pow(depth)
        .filter(|&n| n <= 1 << 24)
        .ok_or_else(|| Error::NotApplicable(format!("enumeration of {p}^{depth} residues is too large")))
}

fn sample(
    center: &PAdicNumber,
    log_radius: i64,
    depth: u32,
    tail: Tail,
    shape: Shape,
    residues: &[u64],
) -> Result<SampleSet> {
    if depth == 0 {
        return Err(Error::NotApplicable("enumeration depth must be at least 1".into()));
    }
    let prime = center.prime();
    let p = prime.get();
    let precision = center.precision().max(DEFAULT_PRECISION);
    let pk = BigUint::from(p).pow(depth);
    let tail_modulus = u64::from(p).pow(TAIL_DIGITS);
    let mut rng = match tail {
        Tail::Zero => None,
        Tail::SeededRandom { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let points = residues
        .iter()
        .map(|&u| {
            let t = rng.as_mut().map_or(0, |r| r.gen_range(0..tail_modulus));
            let offset = BigUint::from(u) + &pk * BigUint::from(t);
            let offset = if offset.is_zero() {
                PAdicNumber::zero(prime)
            } else {
                PAdicNumber::from_ratio(BigRational::from_integer(offset.into()), prime, precision)
                    .mul_p_power(-log_radius)
            };
            center + &offset
        })
        .collect();
    Ok(SampleSet {
        description: SampleDescription {
            shape,
            center: center.clone(),
            log_radius,
            depth,
            tail,
        },
        points,
    })
}

/// Zero-tail and seeded random-tail samples of a sphere, concatenated.
pub fn sphere_samples(center: &PAdicNumber, log_radius: i64, depth: u32, seed: u64) -> Result<Vec<PAdicNumber>> {
    let mut pts = enumerate_sphere(center, log_radius, depth, Tail::Zero)?.points;
    pts.extend(enumerate_sphere(center, log_radius, depth, Tail::SeededRandom { seed })?.points);
    Ok(pts)
}

/// Zero-tail and seeded random-tail samples of a closed ball, concatenated.
pub fn ball_samples(center: &PAdicNumber, log_radius: i64, depth: u32, seed: u64) -> Result<Vec<PAdicNumber>> {
    let mut pts = enumerate_ball(center, log_radius, depth, Tail::Zero)?.points;
    pts.extend(enumerate_ball(center, log_radius, depth, Tail::SeededRandom { seed })?.points);
    Ok(pts)
}

/// Default enumeration depth: 3 digits for `p <= 7`, 2 above.
pub fn default_depth(p: Prime) -> u32 {
    if p.get() <= 7 {
        3
    } else {
        2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{NormValue, Region, Sphere};

    fn zero(p: u64) -> PAdicNumber {
        PAdicNumber::zero(Prime::new(p).unwrap())
    }

    #[test]
    fn unit_sphere_mod_three() {
        let s = enumerate_sphere(&zero(3), 0, 1, Tail::Zero).unwrap();
        let vals: Vec<_> = s.points.iter().map(|x| x.exact_value().unwrap()).collect();
        assert_eq!(vals, vec![BigRational::from_integer(1.into()), BigRational::from_integer(2.into())]);
    }

    #[test]
    fn count_is_units_mod_p_to_the_k() {
        let s = enumerate_sphere(&zero(5), 0, 2, Tail::Zero).unwrap();
        assert_eq!(s.points.len(), 20);
        assert!(s.points.iter().all(|x| x.norm().unwrap() == NormValue::ONE));
    }

    #[test]
    fn two_adic_sphere_of_radius_two() {
        let s = enumerate_sphere(&zero(2), 1, 3, Tail::Zero).unwrap();
        let vals: Vec<String> = s.points.iter().map(|x| x.exact_value().unwrap().to_string()).collect();
        assert_eq!(vals, vec!["1/2", "3/2", "5/2", "7/2"]);
    }

    #[test]
    fn random_tails_stay_on_the_sphere_and_keep_residues() {
        let c = PAdicNumber::from_rational(2, 3, Prime::new(7).unwrap(), 64).unwrap();
        let s = enumerate_sphere(&c, -1, 2, Tail::SeededRandom { seed: DEFAULT_SEED }).unwrap();
        let z = enumerate_sphere(&c, -1, 2, Tail::Zero).unwrap();
        let sphere = Sphere::new(c.clone(), -1);
        for (x, y) in s.points.iter().zip(&z.points) {
            assert!(sphere.contains(x).unwrap());
            assert!((x - y).norm().unwrap() <= NormValue::Pow(-3));
        }
        let again = enumerate_sphere(&c, -1, 2, Tail::SeededRandom { seed: DEFAULT_SEED }).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn ball_enumeration_includes_the_center() {
        let b = enumerate_ball(&zero(3), -1, 2, Tail::Zero).unwrap();
        assert_eq!(b.points.len(), 9);
        assert!(b.points[0].is_exact_zero());
    }

    #[test]
    fn depth_zero_is_rejected() {
        assert!(enumerate_sphere(&zero(3), 0, 0, Tail::Zero).is_err());
    }
}
