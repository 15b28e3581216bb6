use padic_dyn::basin::{ball_samples, enumerate_ball, hitting_time, sphere_samples, HittingStatus, Tail};
use padic_dyn::dynamics::{
    apply_f, apply_g, derivative, fixed_points, norm_step_law, orbit, orbit_fate, taylor_image_offset,
    MapParams, OrbitConfig, Outcome, Which,
};
use padic_dyn::roots::{padic_sqrt, sqrt_exists, sqrt_mod_p};
use padic_dyn::{Ball, NormValue, PAdicNumber, Prime, Region, Sphere};
use proptest::prelude::*;

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];
const N: u32 = 48;

fn prime(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

fn q(n: i64, d: i64, p: u64) -> PAdicNumber {
    PAdicNumber::from_rational(n, d, prime(p), N).unwrap()
}

/// Valuation of a nonzero integer by trial division.
fn int_val(mut n: i64, p: u64) -> i64 {
    let p = p as i64;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

fn rat_val(n: i64, d: i64, p: u64) -> i64 {
    int_val(n, p) - int_val(d, p)
}

fn any_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(PRIMES.to_vec())
}

fn nonzero() -> impl Strategy<Value = i64> {
    (-100_000i64..100_000).prop_filter("nonzero", |n| *n != 0)
}

fn denom() -> impl Strategy<Value = i64> {
    1i64..2_000
}

fn small_num() -> impl Strategy<Value = i64> {
    (-400i64..400).prop_filter("nonzero", |n| *n != 0)
}

fn log_norm(x: &PAdicNumber) -> Option<i64> {
    x.norm().unwrap().log()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn valuation_matches_trial_division(p in any_prime(), n in nonzero(), d in denom()) {
        prop_assert_eq!(q(n, d, p).valuation().unwrap(), rat_val(n, d, p));
    }

    #[test]
    fn norm_is_multiplicative(p in any_prime(), a in nonzero(), b in denom(), c in nonzero(), d in denom()) {
        let x = q(a, b, p);
        let y = q(c, d, p);
        prop_assert_eq!((&x * &y).norm().unwrap(), x.norm().unwrap() * y.norm().unwrap());
    }

    #[test]
    fn ultrametric_inequality(p in any_prime(), a in nonzero(), b in denom(), c in nonzero(), d in denom()) {
        let x = q(a, b, p);
        let y = q(c, d, p);
        let s = (&x + &y).norm().unwrap();
        let (nx, ny) = (x.norm().unwrap(), y.norm().unwrap());
        prop_assert!(s <= nx.max(ny));
        if nx != ny {
            prop_assert_eq!(s, nx.max(ny));
        }
    }

    #[test]
    fn compact_form_round_trips(p in any_prime(), n in nonzero(), d in denom()) {
        // only eventually constant digit expansions are exact in this form
        let x = q(n, d, p);
        let back = PAdicNumber::parse(&x.to_compact(), prime(p), N).unwrap();
        prop_assert!(back.agrees_with(&x, N));
        let integer = q(n, 1, p);
        let back = PAdicNumber::parse(&integer.to_compact(), prime(p), N).unwrap();
        prop_assert_eq!(back.exact_value(), integer.exact_value());
    }

    #[test]
    fn truncated_compact_form_keeps_its_digits(p in any_prime(), n in nonzero(), d in denom()) {
        let x = q(n, d, p).forget_exact();
        let back = PAdicNumber::parse(&x.to_compact(), prime(p), N).unwrap();
        prop_assert!(back.agrees_with(&x, N));
    }

    #[test]
    fn every_point_of_a_ball_is_a_center(
        p in any_prime(), c in -500i64..500, e in -3i64..3, u in small_num(), w in -500i64..500,
    ) {
        let b = Ball::closed(q(c, 1, p), e);
        // c + p^-e u lies in b exactly when v(u) >= 0, which always holds
        let x = &q(c, 1, p) + &q(u, 1, p).mul_p_power(-e);
        prop_assert!(b.contains(&x).unwrap());
        let moved = Ball::closed(x, e);
        let y = q(w, 1, p);
        prop_assert_eq!(b.contains(&y).unwrap(), moved.contains(&y).unwrap());
    }

    #[test]
    fn sphere_membership_matches_valuation(p in any_prime(), c in -500i64..500, y in -500i64..500, e in -3i64..1) {
        let s = Sphere::new(q(c, 1, p), e);
        let expected = y != c && -int_val(y - c, p) == e;
        prop_assert_eq!(s.contains(&q(y, 1, p)).unwrap(), expected);
    }

    #[test]
    fn squares_have_roots_that_square_back(p in any_prime(), n in small_num(), d in 1i64..50, k in -3i64..3) {
        let r = q(n, d, p).mul_p_power(k);
        let x = r.square();
        prop_assert!(sqrt_exists(&x).unwrap());
        let pair = padic_sqrt(&x, N).unwrap();
        prop_assert!(pair.root.square().agrees_with(&x, N - 1));
        prop_assert!(pair.neg_root.square().agrees_with(&x, N - 1));
        prop_assert_eq!(pair.root.valuation().unwrap(), x.valuation().unwrap() / 2);
    }

    #[test]
    fn odd_valuation_has_no_root(p in any_prime(), n in small_num(), d in 1i64..50) {
        let x = q(n, d, p).square().mul_p_power(1);
        prop_assert!(!sqrt_exists(&x).unwrap());
        prop_assert!(padic_sqrt(&x, N).is_err());
    }

    #[test]
    fn sqrt_mod_p_agrees_with_brute_force(p in prop::sample::select(vec![3u64, 5, 7, 11, 13, 17, 19, 23]), r in 1u64..23) {
        let r = r % p;
        prop_assume!(r != 0);
        let brute = (1..p).find(|s| s * s % p == r);
        match sqrt_mod_p(r, prime(p)) {
            Some(s) => prop_assert_eq!(s * s % p, r),
            None => prop_assert!(brute.is_none()),
        }
    }

    #[test]
    fn f_is_conjugate_to_g(p in any_prime(), an in small_num(), ad in 1i64..40, xn in -400i64..400, xd in 1i64..40) {
        let m = MapParams::new(q(an, ad, p), N).unwrap();
        let x = q(xn, xd, p);
        // f(a x) = a G(x)
        let lhs = apply_f(&m, &(&m.a * &x));
        let rhs = &m.a * &apply_g(&m, &x);
        prop_assert_eq!(lhs.exact_value(), rhs.exact_value());
    }

    #[test]
    fn taylor_expansion_is_exact(p in any_prime(), an in small_num(), ad in 1i64..40, gn in -400i64..400, gd in 1i64..40) {
        let m = MapParams::new(q(an, ad, p), N).unwrap();
        let gamma = q(gn, gd, p);
        let zero = PAdicNumber::zero(m.p);
        let lhs = taylor_image_offset(&m, &zero, &gamma);
        prop_assert_eq!(lhs.exact_value(), apply_f(&m, &gamma).exact_value());
        let set = fixed_points(&m).unwrap();
        if let Some(x2) = set.get(Which::X2) {
            let lhs = taylor_image_offset(&m, &x2.value, &gamma);
            let rhs = &apply_f(&m, &(&x2.value + &gamma)) - &x2.value;
            prop_assert!(lhs.agrees_with(&rhs, 24) || (&lhs - &rhs).norm_upper_bound() <= NormValue::Pow(-24));
        }
    }

    #[test]
    fn fixed_points_satisfy_vieta_and_multiplier_identities(p in any_prime(), an in small_num(), ad in 1i64..40) {
        let m = MapParams::new(q(an, ad, p), N).unwrap();
        let set = fixed_points(&m).unwrap();
        let (Some(x2), Some(x3)) = (set.get(Which::X2), set.get(Which::X3)) else {
            return Ok(());
        };
        let small = |x: PAdicNumber| x.norm_upper_bound() <= NormValue::Pow(-20);
        for fp in [x2, x3] {
            prop_assert!(small(&apply_f(&m, &fp.value) - &fp.value));
            prop_assert!(small(&derivative(&m, &fp.value) - &fp.multiplier));
        }
        prop_assert!(small(&(&x2.value + &x3.value) + &m.a));
        prop_assert!(small(&(&x2.value * &x3.value) + &m.constant(1)));
        let a2 = m.a.square();
        let sum = &x2.multiplier + &x3.multiplier;
        let prod = &x2.multiplier * &x3.multiplier;
        prop_assert!(small(&sum - &(&a2 + &m.constant(6))));
        prop_assert!(small(&prod - &(&(&a2 * &m.constant(2)) + &m.constant(9))));
    }

    #[test]
    fn norm_step_law_matches_the_image(p in any_prime(), an in small_num(), ad in 1i64..40, xn in small_num(), xd in 1i64..40) {
        let m = MapParams::new(q(an, ad, p), N).unwrap();
        let x = q(xn, xd, p);
        let law = norm_step_law(&m, x.norm().unwrap());
        if x.norm().unwrap() != m.a_norm() {
            prop_assert_eq!(law, Some(apply_f(&m, &x).norm().unwrap()));
        } else {
            prop_assert_eq!(law, None);
        }
    }

    #[test]
    fn far_points_escape_monotonically(p in any_prime(), an in small_num(), ad in 1i64..40, xn in small_num(), xd in 1i64..40, k in 1i64..4) {
        let m = MapParams::new(q(an, ad, p), N).unwrap();
        let scale = log_norm(&m.a).unwrap().max(0) + k;
        let x = q(xn, xd, p);
        let x = x.mul_p_power(-scale - x.valuation().unwrap());
        let mut prev = log_norm(&x).unwrap();
        for y in orbit(&m, &x, 4).into_iter().skip(1) {
            let cur = log_norm(&y).unwrap();
            prop_assert_eq!(cur, 3 * prev);
            prev = cur;
        }
        let fate = orbit_fate(&m, &x, &OrbitConfig::default()).unwrap();
        prop_assert_eq!(fate.outcome, Outcome::Escaped);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hitting_time_is_the_first_entry(
        p in prop::sample::select(vec![3u64, 5, 7]), an in small_num(), xn in -200i64..200, xd in 1i64..30, e in -2i64..2,
    ) {
        let m = MapParams::new(q(an, 1, p), 32).unwrap();
        let x = q(xn, xd, p);
        let target = Ball::closed(PAdicNumber::zero(m.p), e);
        let rec = hitting_time(&m, &x, &target, 20);
        let path = orbit(&m, &x, 21);
        if let Some(t) = rec.t {
            prop_assert_eq!(rec.status, HittingStatus::Hit);
            prop_assert!(target.contains(&path[t as usize]).unwrap());
            for y in &path[..t as usize] {
                prop_assert!(!target.contains(y).unwrap_or(true));
            }
        } else if rec.status == HittingStatus::NeverHits || rec.status == HittingStatus::NotWithinBound {
            for y in &path {
                prop_assert!(!target.contains(y).unwrap_or(false));
            }
        }
    }

    #[test]
    fn samples_lie_in_their_region(p in prop::sample::select(vec![2u64, 3, 5, 7]), c in -100i64..100, e in -2i64..2, depth in 1u32..3, seed in any::<u64>()) {
        let center = q(c, 1, p);
        let sphere = Sphere::new(center.clone(), e);
        let points = sphere_samples(&center, e, depth, seed).unwrap();
        // zero-tail and random-tail enumerations
        prop_assert_eq!(points.len() as u64, 2 * (p - 1) * p.pow(depth - 1));
        for x in &points {
            prop_assert!(sphere.contains(x).unwrap());
        }
        let ball = Ball::closed(center.clone(), e);
        let points = ball_samples(&center, e, depth, seed).unwrap();
        prop_assert_eq!(points.len() as u64, 2 * p.pow(depth));
        for x in &points {
            prop_assert!(ball.contains(x).unwrap());
        }
        let points = enumerate_ball(&center, e, depth, Tail::Zero).unwrap().points;
        for (i, x) in points.iter().enumerate() {
            for y in &points[i + 1..] {
                prop_assert!(matches!((x - y).norm(), Ok(NormValue::Pow(_))));
            }
        }
    }
}
