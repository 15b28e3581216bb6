use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::sampling::{ball_samples, default_depth, sphere_samples, DEFAULT_SEED};
use crate::dynamics::{MapParams, OrbitClassifier, OrbitConfig, OrbitFate};
use crate::error::Result;
use crate::padic::{Ball, PAdicNumber, Sphere};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ScanConfig {
    pub orbit: OrbitConfig,
    /// Enumeration depth; `None` picks [`default_depth`].
    pub depth: Option<u32>,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { orbit: OrbitConfig::default(), depth: None, seed: DEFAULT_SEED }
    }
}

/// A region that can be sampled.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum SampleRegion {
    Sphere(Sphere),
    Ball(Ball),
}

impl SampleRegion {
    pub fn samples(&self, depth: u32, seed: u64) -> Result<Vec<PAdicNumber>> {
        match self {
            SampleRegion::Sphere(s) => sphere_samples(&s.center, s.log_radius, depth, seed),
            SampleRegion::Ball(b) => ball_samples(&b.center, b.log_radius, depth, seed),
        }
    }
}

impl From<Sphere> for SampleRegion {
    fn from(s: Sphere) -> Self {
        SampleRegion::Sphere(s)
    }
}

impl From<Ball> for SampleRegion {
    fn from(b: Ball) -> Self {
        SampleRegion::Ball(b)
    }
}

impl fmt::Display for SampleRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleRegion::Sphere(s) => write!(f, "S({}, {})", s.center.to_compact(), s.log_radius),
            SampleRegion::Ball(b) => write!(f, "B({}, {})", b.center.to_compact(), b.log_radius),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScanEntry {
    pub region: String,
    pub point: PAdicNumber,
    pub valuation: Option<i64>,
    pub fate: OrbitFate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub depth: u32,
    pub entries: Vec<ScanEntry>,
    pub counts: BTreeMap<String, usize>,
}

/// Orbit fate of every sample of every region.
pub fn basin_scan(params: &MapParams, regions: &[SampleRegion], config: &ScanConfig) -> Result<ScanReport> {
    let classifier = OrbitClassifier::new(params)?;
    let depth = config.depth.unwrap_or_else(|| default_depth(params.p));
    let mut entries = Vec::new();
    let mut counts = BTreeMap::new();
    for region in regions {
        let label = region.to_string();
        for point in region.samples(depth, config.seed)? {
            let fate = classifier.fate(&point, &config.orbit);
            *counts.entry(fate.outcome.label()).or_insert(0) += 1;
            entries.push(ScanEntry {
                region: label.clone(),
                valuation: point.valuation().ok(),
                point,
                fate,
            });
        }
    }
    Ok(ScanReport { depth, entries, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Outcome, Which};
    use crate::padic::Prime;

    fn params(a: &str, p: u64) -> MapParams {
        MapParams::parse(a, Prime::new(p).unwrap(), 64).unwrap()
    }

    #[test]
    fn small_sphere_converges_to_zero() {
        let m = params("7", 7);
        let region = Sphere::new(PAdicNumber::zero(m.p), -1).into();
        let report = basin_scan(&m, &[region], &ScanConfig::default()).unwrap();
        assert_eq!(report.entries.len(), 2 * 294);
        assert_eq!(report.counts.keys().collect::<Vec<_>>(), vec!["converged:X1"]);
    }

    #[test]
    fn unit_sphere_never_converges_to_zero_for_small_a() {
        let m = params("5", 5);
        let region = Sphere::new(PAdicNumber::zero(m.p), 0).into();
        let config = ScanConfig { depth: Some(2), ..ScanConfig::default() };
        let report = basin_scan(&m, &[region], &config).unwrap();
        assert!(report
            .entries
            .iter()
            .all(|e| e.fate.outcome != Outcome::ConvergedTo { fixed_point: Which::X1 }));
    }

    #[test]
    fn intermediate_spheres_escape_for_large_a() {
        // |a| = 5^3; radii strictly between r1 and |a|, excluding 1
        let m = params("1/125", 5);
        let regions: Vec<SampleRegion> = [-2, -1, 1, 2]
            .into_iter()
            .map(|e| Sphere::new(PAdicNumber::zero(m.p), e).into())
            .collect();
        let config = ScanConfig { depth: Some(2), ..ScanConfig::default() };
        let report = basin_scan(&m, &regions, &config).unwrap();
        assert_eq!(report.counts.keys().collect::<Vec<_>>(), vec!["escaped"]);
    }
}
