use serde::Serialize;

use crate::dynamics::{apply_f, MapParams};
use crate::padic::{NormValue, PAdicNumber, Region};

/// Iterates whose guaranteed digits fall below this are not trusted.
const MIN_DIGITS: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HittingStatus {
    Hit,
    /// No hit among `f^0(x), ..., f^kmax(x)`.
    NotWithinBound,
    /// The orbit escaped beyond the target's norm bound, or is trapped near 0
    /// below the target's smallest norm.
    NeverHits,
    /// Membership could not be decided at the available precision.
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HittingTimeRecord {
    pub point: PAdicNumber,
    /// First `k >= 0` with `f^k(x)` in the target.
    #[serde(rename = "T")]
    pub t: Option<u32>,
    pub bound_used: u32,
    pub status: HittingStatus,
}

/// `T(x) = min { k : f^k(x) in target }`, searched up to `kmax`.
pub fn hitting_time<R: Region + ?Sized>(
    params: &MapParams,
    x: &PAdicNumber,
    target: &R,
    kmax: u32,
) -> HittingTimeRecord {
    let escape_log = params.a_norm().log().unwrap_or(0).max(0);
    let bound = target.log_norm_bound();
    let floor = target.log_norm_floor();
    let a_log = params.a_norm().log().unwrap_or(i64::MIN / 4);
    let record = |t, status| HittingTimeRecord { point: x.clone(), t, bound_used: kmax, status };
    let mut y = x.clone();
    for k in 0..=kmax {
        match target.contains(&y) {
            Ok(true) => return record(Some(k), HittingStatus::Hit),
            Ok(false) => {}
            Err(_) => return record(None, HittingStatus::Undetermined),
        }
        if let (Ok(NormValue::Pow(e)), Some(b)) = (y.norm(), bound) {
            if e > escape_log && e > b {
                return record(None, HittingStatus::NeverHits);
            }
        }
        // |f(y)| = |y|^2 |y + a| < |y| once |y| max(|y|, |a|) < 1, so the orbit
        // stays in a ball around 0 that misses the target.
        let trapped = y.is_exact_zero()
            || match y.norm_upper_bound() {
                NormValue::Zero => false,
                NormValue::Pow(e) => e + e.max(a_log) < 0 && floor.is_some_and(|f| e < f),
            };
        if trapped {
            return record(None, HittingStatus::NeverHits);
        }
        if y.is_indeterminate_zero() || (!y.is_exact() && y.precision() < MIN_DIGITS) {
            return record(None, HittingStatus::Undetermined);
        }
        if k < kmax {
            y = apply_f(params, &y);
        }
    }
    record(None, HittingStatus::NotWithinBound)
}
