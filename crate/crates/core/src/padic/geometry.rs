use serde::Serialize;

use super::{NormValue, PAdicNumber};
use crate::error::Result;

/// Closed ball `{x : |x - c|_p <= p^e}`.
///
/// Radii live on the discrete scale, so the open ball `{|x - c| < p^e}` is
/// the closed ball of log-radius `e - 1`; see [`Ball::open`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ball {
    pub center: PAdicNumber,
    pub log_radius: i64,
}

/// Sphere `{x : |x - c|_p = p^e}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Sphere {
    pub center: PAdicNumber,
    pub log_radius: i64,
}

/// Something membership can be decided for.
pub trait Region {
    fn contains(&self, x: &PAdicNumber) -> Result<bool>;

    /// `log_p` of an upper bound on `|x|` over the region, if it is bounded
    /// and the bound is known.
    fn log_norm_bound(&self) -> Option<i64>;

    /// `log_p` of a lower bound on `|x|` over the region, when the region
    /// stays away from 0.
    fn log_norm_floor(&self) -> Option<i64>;
}

impl Ball {
    pub fn closed(center: PAdicNumber, log_radius: i64) -> Self {
        Ball { center, log_radius }
    }

    /// `{x : |x - c| < p^e}`.
    pub fn open(center: PAdicNumber, log_radius: i64) -> Self {
        Ball { center, log_radius: log_radius - 1 }
    }

    pub fn recenter(&self, center: PAdicNumber) -> Self {
        Ball { center, log_radius: self.log_radius }
    }
}

impl Sphere {
    pub fn new(center: PAdicNumber, log_radius: i64) -> Self {
        Sphere { center, log_radius }
    }
}

/// `|x - c| <= p^e`, deciding indeterminate differences when the known
/// bound already lands inside.
fn within(x: &PAdicNumber, c: &PAdicNumber, e: i64) -> Result<bool> {
    let d = x - c;
    match d.norm() {
        Ok(NormValue::Zero) => Ok(true),
        Ok(NormValue::Pow(k)) => Ok(k <= e),
        Err(err) => match d.norm_upper_bound() {
            NormValue::Pow(k) if k <= e => Ok(true),
            _ => Err(err),
        },
    }
}

impl Region for Ball {
    fn contains(&self, x: &PAdicNumber) -> Result<bool> {
        within(x, &self.center, self.log_radius)
    }

    fn log_norm_bound(&self) -> Option<i64> {
        match self.center.norm().ok()? {
            NormValue::Zero => Some(self.log_radius),
            NormValue::Pow(k) => Some(k.max(self.log_radius)),
        }
    }

    fn log_norm_floor(&self) -> Option<i64> {
        floor_from_center(&self.center, self.log_radius)
    }
}

/// `|x| = |c|` on every point of a ball or sphere whose radius is below `|c|`.
fn floor_from_center(center: &PAdicNumber, log_radius: i64) -> Option<i64> {
    match center.norm().ok()? {
        NormValue::Pow(k) if k > log_radius => Some(k),
        _ => None,
    }
}

impl Region for Sphere {
    fn contains(&self, x: &PAdicNumber) -> Result<bool> {
        let d = x - &self.center;
        match d.norm() {
            Ok(NormValue::Zero) => Ok(false),
            Ok(NormValue::Pow(k)) => Ok(k == self.log_radius),
            Err(err) => match d.norm_upper_bound() {
                NormValue::Pow(k) if k < self.log_radius => Ok(false),
                _ => Err(err),
            },
        }
    }

    fn log_norm_bound(&self) -> Option<i64> {
        match self.center.norm().ok()? {
            NormValue::Zero => Some(self.log_radius),
            NormValue::Pow(k) => Some(k.max(self.log_radius)),
        }
    }

    fn log_norm_floor(&self) -> Option<i64> {
        match self.center.norm().ok()? {
            NormValue::Zero => Some(self.log_radius),
            NormValue::Pow(k) if k == self.log_radius => None,
            NormValue::Pow(k) => Some(k.max(self.log_radius)),
        }
    }
}

pub fn ball_contains(ball: &Ball, x: &PAdicNumber) -> Result<bool> {
    ball.contains(x)
}

pub fn sphere_contains(sphere: &Sphere, x: &PAdicNumber) -> Result<bool> {
    sphere.contains(x)
}

/// `|x - y|_p`.
pub fn distance(x: &PAdicNumber, y: &PAdicNumber) -> Result<NormValue> {
    (x - y).norm()
}
