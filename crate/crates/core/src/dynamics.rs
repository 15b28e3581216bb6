//! The cubic map `f(x) = x^3 + a x^2`, its conjugate `G(x) = (ax)^2 (x + 1)`,
//! fixed points, multiplier classification and certified orbit fates.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{p_pow, Ball, NormValue, PAdicNumber, Prime, Region};
use crate::roots::{sqrt_a2p4_verdict, solve_fixed_quadratic, ExistenceVerdict};

/// The parameter `a` together with the working precision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MapParams {
    pub p: Prime,
    pub a: PAdicNumber,
    pub precision: u32,
}

impl MapParams {
    pub fn new(a: PAdicNumber, precision: u32) -> Result<Self> {
        a.norm()?;
        Ok(MapParams { p: a.prime(), a, precision })
    }

    /// Parses `a` from a rational or digit string.
    pub fn parse(a: &str, p: Prime, precision: u32) -> Result<Self> {
        Self::new(PAdicNumber::parse(a, p, precision)?, precision)
    }

    pub fn a_norm(&self) -> NormValue {
        self.a.norm().expect("checked at construction")
    }

    pub fn stratum(&self) -> Stratum {
        match self.a_norm() {
            NormValue::Zero => Stratum::Small,
            NormValue::Pow(e) if e < 0 => Stratum::Small,
            NormValue::Pow(0) => Stratum::Unit,
            NormValue::Pow(m) => Stratum::Large { m },
        }
    }

    pub fn constant(&self, n: i64) -> PAdicNumber {
        PAdicNumber::from_integer(n, self.p, self.precision)
    }

    pub fn parse_point(&self, s: &str) -> Result<PAdicNumber> {
        PAdicNumber::parse(s, self.p, self.precision)
    }
}

/// Position of `|a|` relative to 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    /// `|a| < 1`, including `a = 0`.
    Small,
    Unit,
    /// `|a| = p^m` with `m > 0`.
    Large { m: i64 },
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stratum::Small => f.write_str("|a|<1"),
            Stratum::Unit => f.write_str("|a|=1"),
            Stratum::Large { m } => write!(f, "|a|=p^{m}"),
        }
    }
}

/// `f(x) = x^2 (x + a)`.
pub fn apply_f(params: &MapParams, x: &PAdicNumber) -> PAdicNumber {
    &x.square() * &(x + &params.a)
}

/// `G(x) = (a x)^2 (x + 1)`.
pub fn apply_g(params: &MapParams, x: &PAdicNumber) -> PAdicNumber {
    let one = params.constant(1);
    &(&params.a * x).square() * &(x + &one)
}

/// `f'(x) = 3x^2 + 2ax = x (3x + 2a)`.
pub fn derivative(params: &MapParams, x: &PAdicNumber) -> PAdicNumber {
    let three = params.constant(3);
    let two = params.constant(2);
    x * &(&(&three * x) + &(&two * &params.a))
}

/// `f(x) - x0 = gamma (lambda + (3 x0 + a) gamma + gamma^2)` around a fixed point `x0`.
pub fn taylor_image_offset(params: &MapParams, x0: &PAdicNumber, gamma: &PAdicNumber) -> PAdicNumber {
    let lambda = derivative(params, x0);
    let c = &(&params.constant(3) * x0) + &params.a;
    gamma * &(&(&lambda + &(&c * gamma)) + &gamma.square())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Which {
    X1,
    X2,
    X3,
}

impl fmt::Display for Which {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedPointKind {
    Attractive,
    Indifferent,
    Repelling,
}

impl FixedPointKind {
    pub fn from_norm(n: NormValue) -> Self {
        match n {
            NormValue::Zero => FixedPointKind::Attractive,
            NormValue::Pow(e) if e < 0 => FixedPointKind::Attractive,
            NormValue::Pow(0) => FixedPointKind::Indifferent,
            NormValue::Pow(_) => FixedPointKind::Repelling,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FixedPointKind::Attractive => "attractive",
            FixedPointKind::Indifferent => "indifferent",
            FixedPointKind::Repelling => "repelling",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedPointRecord {
    pub which: Which,
    pub value: PAdicNumber,
    /// `lambda = f'(x*)`.
    pub multiplier: PAdicNumber,
    pub multiplier_norm: NormValue,
    pub kind: FixedPointKind,
}

impl FixedPointRecord {
    fn new(params: &MapParams, which: Which, value: PAdicNumber) -> Result<Self> {
        let multiplier = derivative(params, &value);
        let multiplier_norm = multiplier.norm()?;
        Ok(FixedPointRecord {
            which,
            value,
            multiplier,
            multiplier_norm,
            kind: FixedPointKind::from_norm(multiplier_norm),
        })
    }
}

/// Fixed points of `f`. `x1 = 0` is always present.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedPointSet {
    pub records: Vec<FixedPointRecord>,
    pub verdict: Option<ExistenceVerdict>,
    /// Set when existence of `x2, x3` could not be decided at this precision.
    pub undecided: Option<String>,
}

impl FixedPointSet {
    pub fn get(&self, which: Which) -> Option<&FixedPointRecord> {
        self.records.iter().find(|r| r.which == which)
    }

    pub fn require(&self, which: Which) -> Result<&FixedPointRecord> {
        self.get(which).ok_or(Error::NoFixedPoints)
    }
}

/// `x1 = 0` and, when `sqrt(a^2 + 4)` exists, the two roots of `x^2 + ax - 1`.
///
/// When exactly one of `x2, x3` is indifferent, that one is labelled `X3`;
/// otherwise `X2` is the `+sqrt` branch.
pub fn fixed_points(params: &MapParams) -> Result<FixedPointSet> {
    let x1 = FixedPointRecord::new(params, Which::X1, PAdicNumber::zero(params.p))?;
    let verdict = match sqrt_a2p4_verdict(&params.a) {
        Ok(v) => v,
        Err(e @ (Error::InsufficientPrecision { .. } | Error::IndeterminateZero { .. })) => {
            return Ok(FixedPointSet {
                records: vec![x1],
                verdict: None,
                undecided: Some(format!("existence undecided at this precision: {e}")),
            })
        }
        Err(e) => return Err(e),
    };
    if !verdict.exists {
        return Ok(FixedPointSet { records: vec![x1], verdict: Some(verdict), undecided: None });
    }
    let (plus, minus) = solve_fixed_quadratic(&params.a, params.precision)?;
    let mut first = FixedPointRecord::new(params, Which::X2, plus)?;
    let mut second = FixedPointRecord::new(params, Which::X3, minus)?;
    if first.kind == FixedPointKind::Indifferent && second.kind != FixedPointKind::Indifferent {
        std::mem::swap(&mut first, &mut second);
        first.which = Which::X2;
        second.which = Which::X3;
    }
    Ok(FixedPointSet {
        records: vec![x1, first, second],
        verdict: Some(verdict),
        undecided: None,
    })
}

/// `log_p |3x* + a|`, `None` when it vanishes.
fn log_linear_coefficient(params: &MapParams, x: &PAdicNumber) -> Option<i64> {
    let c = &(&params.constant(3) * x) + &params.a;
    c.norm_upper_bound().log()
}

/// `max(|3x* + a| r, r^2) < 1` with `r = p^log_r`.
///
/// When it holds, every sphere of radius `<= r` around an indifferent `x*`
/// is invariant, and around an attractive `x*` the closed ball of radius `r`
/// contracts onto `x*`.
pub fn contraction_certificate(params: &MapParams, fp: &FixedPointRecord, log_r: i64) -> bool {
    if 2 * log_r >= 0 {
        return false;
    }
    match log_linear_coefficient(params, &fp.value) {
        None => true,
        Some(e) => e + log_r < 0,
    }
}

/// Largest closed log-radius passing [`contraction_certificate`].
pub fn certified_log_radius(params: &MapParams, fp: &FixedPointRecord) -> i64 {
    match log_linear_coefficient(params, &fp.value) {
        None => -1,
        Some(e) => (-1).min(-e - 1),
    }
}

/// `|f(x)|` when it is determined by `|x|` alone: `|x|^2 max(|x|, |a|)`
/// whenever `|x| != |a|`.
pub fn norm_step_law(params: &MapParams, x_norm: NormValue) -> Option<NormValue> {
    let a = params.a_norm();
    if x_norm.is_zero() {
        return Some(NormValue::Zero);
    }
    if x_norm == a {
        return None;
    }
    Some(x_norm.powi(2) * x_norm.max(a))
}

/// `gamma = x - x*` attached to a fixed point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalCoordinate {
    pub fixed_point: Which,
    pub gamma: PAdicNumber,
}

impl LocalCoordinate {
    pub fn new(fp: &FixedPointRecord, x: &PAdicNumber) -> Self {
        LocalCoordinate { fixed_point: fp.which, gamma: x - &fp.value }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UndecidedReason {
    MaxIterations,
    PrecisionExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "fate", rename_all = "snake_case")]
pub enum Outcome {
    ConvergedTo { fixed_point: Which },
    Escaped,
    SiegelTrapped { center: Which, log_radius: Option<i64> },
    Cycle { period: u32, entry_index: u32 },
    Undecided { reason: UndecidedReason },
}

impl Outcome {
    /// Short stable label used for aggregation.
    pub fn label(&self) -> String {
        match self {
            Outcome::ConvergedTo { fixed_point } => format!("converged:{fixed_point}"),
            Outcome::Escaped => "escaped".into(),
            Outcome::SiegelTrapped { center, .. } => format!("siegel:{center}"),
            Outcome::Cycle { .. } => "cycle".into(),
            Outcome::Undecided { reason: UndecidedReason::MaxIterations } => {
                "undecided:max_iterations".into()
            }
            Outcome::Undecided { reason: UndecidedReason::PrecisionExhausted } => {
                "undecided:precision".into()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitFate {
    pub outcome: Outcome,
    pub steps_used: u32,
    pub certificate: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitConfig {
    pub max_iter: u32,
    pub min_precision: u32,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig { max_iter: 200, min_precision: 16 }
    }
}

/// Digits of the truncated state used for cycle detection.
const CYCLE_KEY_DIGITS: u32 = 32;

/// Fixed points and their certified balls, reused across many orbits.
#[derive(Clone, Debug)]
pub struct OrbitClassifier {
    pub params: MapParams,
    pub fixed: FixedPointSet,
    attractors: Vec<(Which, Ball)>,
    siegel: Vec<(Which, Ball)>,
    escape_log: i64,
}

impl OrbitClassifier {
    pub fn new(params: &MapParams) -> Result<Self> {
        let fixed = fixed_points(params)?;
        let mut attractors = Vec::new();
        let mut siegel = Vec::new();
        for fp in &fixed.records {
            let ball = Ball::closed(fp.value.clone(), certified_log_radius(params, fp));
            match fp.kind {
                FixedPointKind::Attractive => attractors.push((fp.which, ball)),
                FixedPointKind::Indifferent => siegel.push((fp.which, ball)),
                FixedPointKind::Repelling => {}
            }
        }
        let escape_log = params.a_norm().log().unwrap_or(0).max(0);
        Ok(OrbitClassifier { params: params.clone(), fixed, attractors, siegel, escape_log })
    }

    pub fn attractor_balls(&self) -> &[(Which, Ball)] {
        &self.attractors
    }

    pub fn siegel_balls(&self) -> &[(Which, Ball)] {
        &self.siegel
    }

    pub fn fate(&self, x0: &PAdicNumber, config: &OrbitConfig) -> OrbitFate {
        let p = self.params.p;
        let mut seen: HashMap<(i64, BigUint), u32> = HashMap::new();
        let mut x = x0.clone();
        let mut step = 0u32;
        loop {
            for (which, ball) in &self.attractors {
                if ball.contains(&x).unwrap_or(false) {
                    return OrbitFate {
                        outcome: Outcome::ConvergedTo { fixed_point: *which },
                        steps_used: step,
                        certificate: format!(
                            "iterate {step} entered the contraction ball of log-radius {} around {which}",
                            ball.log_radius
                        ),
                    };
                }
            }
            if let Ok(NormValue::Pow(e)) = x.norm() {
                if e > self.escape_log {
                    return OrbitFate {
                        outcome: Outcome::Escaped,
                        steps_used: step,
                        certificate: format!(
                            "|x_{step}| = p^{e} > max(1, |a|), norms cube from here on"
                        ),
                    };
                }
            }
            for (which, ball) in &self.siegel {
                if ball.contains(&x).unwrap_or(false) {
                    let log_radius = (&x - &ball.center).norm().ok().and_then(NormValue::log);
                    return OrbitFate {
                        outcome: Outcome::SiegelTrapped { center: *which, log_radius },
                        steps_used: step,
                        certificate: format!(
                            "iterate {step} lies in the invariant ball of log-radius {} around {which}",
                            ball.log_radius
                        ),
                    };
                }
            }
            if x.is_indeterminate_zero() || (!x.is_exact() && x.precision() < config.min_precision) {
                return OrbitFate {
                    outcome: Outcome::Undecided { reason: UndecidedReason::PrecisionExhausted },
                    steps_used: step,
                    certificate: format!(
                        "iterate {step} keeps {} guaranteed digits, below {}",
                        x.precision(),
                        config.min_precision
                    ),
                };
            }
            let key = match x.valuation() {
                Ok(v) => {
                    let digits = CYCLE_KEY_DIGITS.min(x.precision().max(1));
                    let r = x.unit_residue_to(digits).unwrap_or_default() % p_pow(p.get(), digits);
                    (v, r)
                }
                Err(_) => (i64::MIN, BigUint::default()),
            };
            if let Some(&entry) = seen.get(&key) {
                return OrbitFate {
                    outcome: Outcome::Cycle { period: step - entry, entry_index: entry },
                    steps_used: step,
                    certificate: format!(
                        "truncated state (v and {CYCLE_KEY_DIGITS} digits) of iterate {step} repeats iterate {entry}"
                    ),
                };
            }
            seen.insert(key, step);
            if step >= config.max_iter {
                return OrbitFate {
                    outcome: Outcome::Undecided { reason: UndecidedReason::MaxIterations },
                    steps_used: step,
                    certificate: format!("no rule fired within {} iterations", config.max_iter),
                };
            }
            x = apply_f(&self.params, &x);
            step += 1;
        }
    }
}

pub fn orbit_fate(params: &MapParams, x0: &PAdicNumber, config: &OrbitConfig) -> Result<OrbitFate> {
    Ok(OrbitClassifier::new(params)?.fate(x0, config))
}

/// The first `n` iterates `x, f(x), ..., f^(n)(x)`.
pub fn orbit(params: &MapParams, x0: &PAdicNumber, n: usize) -> Vec<PAdicNumber> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(x0.clone());
    for i in 0..n {
        let next = apply_f(params, &out[i]);
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: &str, p: u64) -> MapParams {
        MapParams::parse(a, Prime::new(p).unwrap(), 64).unwrap()
    }

    fn kinds(set: &FixedPointSet) -> Vec<(Which, FixedPointKind)> {
        set.records.iter().map(|r| (r.which, r.kind)).collect()
    }

    #[test]
    fn f_vanishes_at_zero_and_minus_a() {
        let m = params("7/3", 5);
        assert!(apply_f(&m, &PAdicNumber::zero(m.p)).is_exact_zero());
        assert!(apply_f(&m, &-&m.a).is_exact_zero());
        assert!(derivative(&m, &PAdicNumber::zero(m.p)).is_exact_zero());
    }

    #[test]
    fn cube_dominates_for_large_x() {
        let m = params("1/5", 5);
        let x = m.parse_point("1/25").unwrap();
        assert_eq!(apply_f(&m, &x).norm().unwrap(), NormValue::Pow(6));
    }

    #[test]
    fn section_four_classifications() {
        use FixedPointKind::*;
        use Which::*;
        // a = 1 + 2*5 + 2*5^2 + ... = -3/2; a = 1 itself has a^2 + 4 = 5, no root
        assert_eq!(
            kinds(&fixed_points(&params("0;1,2", 5)).unwrap()),
            vec![(X1, Attractive), (X2, Indifferent), (X3, Indifferent)]
        );
        assert_eq!(fixed_points(&params("1", 5)).unwrap().records.len(), 1);
        assert_eq!(
            kinds(&fixed_points(&params("4", 11)).unwrap()),
            vec![(X1, Attractive), (X2, Indifferent), (X3, Indifferent)]
        );
        assert_eq!(
            kinds(&fixed_points(&params("1", 11)).unwrap()),
            vec![(X1, Attractive), (X2, Attractive), (X3, Indifferent)]
        );
        assert_eq!(
            kinds(&fixed_points(&params("3", 3)).unwrap()),
            vec![(X1, Attractive), (X2, Attractive), (X3, Attractive)]
        );
        let large = fixed_points(&params("1/5", 5)).unwrap();
        assert_eq!(kinds(&large), vec![(X1, Attractive), (X2, Repelling), (X3, Indifferent)]);
        assert_eq!(large.records[1].multiplier_norm, NormValue::Pow(2));
    }

    #[test]
    fn no_fixed_points_beyond_zero_when_root_missing() {
        let set = fixed_points(&params("1", 3)).unwrap();
        assert_eq!(set.records.len(), 1);
        assert!(!set.verdict.unwrap().exists);
    }

    #[test]
    fn derivative_at_fixed_points_is_three_minus_a_x() {
        let m = params("4", 11);
        for fp in &fixed_points(&m).unwrap().records[1..] {
            let expected = &m.constant(3) - &(&m.a * &fp.value);
            assert!(fp.multiplier.agrees_with(&expected, 50));
            assert!(apply_f(&m, &fp.value).agrees_with(&fp.value, 50));
        }
    }

    #[test]
    fn certificate_examples() {
        let small = params("7", 7);
        let set = fixed_points(&small).unwrap();
        assert!(contraction_certificate(&small, set.get(Which::X1).unwrap(), -1));
        assert!(contraction_certificate(&small, set.get(Which::X2).unwrap(), -1));
        assert!(!contraction_certificate(&small, set.get(Which::X2).unwrap(), 0));

        let large = params("1/125", 5);
        let x1 = fixed_points(&large).unwrap().records[0].clone();
        assert!(contraction_certificate(&large, &x1, -4));
        assert!(!contraction_certificate(&large, &x1, -3));
    }

    #[test]
    fn norm_step_examples() {
        let m = params("1/5", 5);
        assert_eq!(norm_step_law(&m, NormValue::Pow(2)), Some(NormValue::Pow(6)));
        assert_eq!(norm_step_law(&m, NormValue::Pow(1)), None);
        assert_eq!(norm_step_law(&params("5", 5), NormValue::ONE), Some(NormValue::ONE));
        assert_eq!(norm_step_law(&m, NormValue::Zero), Some(NormValue::Zero));
    }

    #[test]
    fn orbit_examples() {
        let cfg = OrbitConfig::default();
        let unit = params("3", 7);
        let fate = orbit_fate(&unit, &-&unit.a, &cfg).unwrap();
        assert_eq!(fate.outcome, Outcome::ConvergedTo { fixed_point: Which::X1 });
        assert_eq!(fate.steps_used, 1);

        let large = params("1/5", 5);
        let fate = orbit_fate(&large, &large.parse_point("1/25").unwrap(), &cfg).unwrap();
        assert_eq!(fate.outcome, Outcome::Escaped);

        let small = params("7", 7);
        let x2 = fixed_points(&small).unwrap().get(Which::X2).unwrap().value.clone();
        let x = &x2 + &small.constant(1);
        let fate = orbit_fate(&small, &x, &cfg).unwrap();
        assert_ne!(fate.outcome, Outcome::ConvergedTo { fixed_point: Which::X1 });
    }

    #[test]
    fn siegel_ball_captures_nearby_points() {
        let m = params("7", 7);
        let x2 = fixed_points(&m).unwrap().get(Which::X2).unwrap().value.clone();
        let x = &x2 + &m.constant(49);
        let fate = orbit_fate(&m, &x, &OrbitConfig::default()).unwrap();
        assert_eq!(fate.outcome, Outcome::SiegelTrapped { center: Which::X2, log_radius: Some(-2) });
    }

    #[test]
    fn conjugacy_on_a_sample() {
        let m = params("2/3", 5);
        let x = m.parse_point("7/2").unwrap();
        let lhs = apply_f(&m, &(&m.a * &x));
        let rhs = &m.a * &apply_g(&m, &x);
        assert_eq!(lhs.exact_value(), rhs.exact_value());
    }
}
