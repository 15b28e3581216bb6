//! Executable checks of the statements about square roots, fixed points,
//! basins and Siegel discs, run on fixed instances and finite samples.

mod catalog;
mod output;
mod section3;
mod section4;
mod section5;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::basin::{default_depth, DEFAULT_SEED};
use crate::dynamics::{MapParams, OrbitConfig};
use crate::error::{Error, Result};
use crate::padic::{p_pow, PAdicNumber, Prime, DEFAULT_PRECISION};

pub use catalog::{claim_ids, instances, reproduce, ClaimInstance, ReproduceReport, Suite, Summary};
pub use output::{claims_csv, scan_csv};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClaimStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub point: Option<String>,
    pub observation: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClaimReport {
    pub claim_id: String,
    pub p: u32,
    /// Compact digit form of the parameter.
    pub a: Option<String>,
    pub status: ClaimStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub depth: Option<u32>,
    pub samples_checked: usize,
    pub counts: BTreeMap<String, usize>,
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyConfig {
    pub precision: u32,
    pub orbit: OrbitConfig,
    pub kmax: u32,
    /// Enumeration depth; `None` picks the per-prime default.
    pub depth: Option<u32>,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            precision: DEFAULT_PRECISION,
            orbit: OrbitConfig::default(),
            kmax: 100,
            depth: None,
            seed: DEFAULT_SEED,
        }
    }
}

/// Runs one claim on one instance. `a` may be omitted for claims that pick
/// their own parameters.
pub fn verify_claim(
    claim_id: &str,
    p: Prime,
    a: Option<&PAdicNumber>,
    config: &VerifyConfig,
) -> Result<ClaimReport> {
    let check = catalog::lookup(claim_id).ok_or_else(|| Error::UnknownClaim(claim_id.to_string()))?;
    let params = a.map(|a| MapParams::new(a.clone(), config.precision)).transpose()?;
    let ctx = Ctx {
        id: claim_id,
        p,
        params: params.as_ref(),
        cfg: config,
        depth: config.depth.unwrap_or_else(|| default_depth(p)),
    };
    Ok(match check(&ctx) {
        Ok(report) => report,
        Err(e) => {
            let mut c = Checker::new(&ctx);
            c.fail(None, format!("computation failed: {e}"));
            c.finish()
        }
    })
}

/// Everything a claim check sees.
pub(crate) struct Ctx<'a> {
    pub id: &'a str,
    pub p: Prime,
    pub params: Option<&'a MapParams>,
    pub cfg: &'a VerifyConfig,
    pub depth: u32,
}

impl<'a> Ctx<'a> {
    pub fn params(&self) -> Result<&'a MapParams> {
        self.params
            .ok_or_else(|| Error::NotApplicable(format!("{} needs a parameter a", self.id)))
    }

    pub fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.cfg.seed ^ (u64::from(self.p.get()) << 32) ^ salt)
    }

    /// A random integer unit `u`, `1 <= u < p^digits`, `p` not dividing `u`.
    pub fn random_unit_int(&self, rng: &mut ChaCha8Rng, digits: u32) -> u64 {
        let p = u64::from(self.p.get());
        let bound = u64::try_from(p_pow(self.p.get(), digits)).unwrap_or(u64::MAX);
        loop {
            let u = rng.gen_range(1..bound);
            if u % p != 0 {
                return u;
            }
        }
    }

    pub fn random_unit(&self, rng: &mut ChaCha8Rng, digits: u32) -> PAdicNumber {
        PAdicNumber::from_integer(self.random_unit_int(rng, digits), self.p, self.cfg.precision)
    }

    pub fn skipped(&self, reason: impl Into<String>) -> ClaimReport {
        ClaimReport {
            claim_id: self.id.to_string(),
            p: self.p.get(),
            a: self.params.map(|m| m.a.to_compact()),
            status: ClaimStatus::Skipped,
            reason: Some(reason.into()),
            depth: None,
            samples_checked: 0,
            counts: BTreeMap::new(),
            witnesses: Vec::new(),
        }
    }
}

const MAX_FAILURE_WITNESSES: usize = 5;
const MAX_NOTES: usize = 4;

/// Accumulates counts, failures and witnesses for one report.
pub(crate) struct Checker {
    id: String,
    p: u32,
    a: Option<String>,
    depth: Option<u32>,
    samples: usize,
    failures: usize,
    counts: BTreeMap<String, usize>,
    failure_witnesses: Vec<Witness>,
    notes: Vec<Witness>,
}

impl Checker {
    pub fn new(ctx: &Ctx<'_>) -> Self {
        Checker {
            id: ctx.id.to_string(),
            p: ctx.p.get(),
            a: ctx.params.map(|m| m.a.to_compact()),
            depth: None,
            samples: 0,
            failures: 0,
            counts: BTreeMap::new(),
            failure_witnesses: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Reports a parameter the claim built itself.
    pub fn set_a(&mut self, a: &PAdicNumber) {
        self.a = Some(a.to_compact());
    }

    pub fn set_depth(&mut self, depth: u32) {
        self.depth = Some(depth);
    }

    pub fn count(&mut self, key: impl Into<String>) {
        *self.counts.entry(key.into()).or_insert(0) += 1;
    }

    pub fn add_samples(&mut self, n: usize) {
        self.samples += n;
    }

    pub fn fail(&mut self, point: Option<&PAdicNumber>, observation: impl Into<String>) {
        self.failures += 1;
        if self.failure_witnesses.len() < MAX_FAILURE_WITNESSES {
            self.failure_witnesses.push(Witness {
                point: point.map(PAdicNumber::to_compact),
                observation: observation.into(),
            });
        }
    }

    /// Records a failure unless `ok`; the observation is only built on failure.
    pub fn check(
        &mut self,
        ok: bool,
        point: Option<&PAdicNumber>,
        observation: impl FnOnce() -> String,
    ) -> bool {
        if !ok {
            self.fail(point, observation());
        }
        ok
    }

    /// A supporting observation, kept when there is room.
    pub fn note(&mut self, point: Option<&PAdicNumber>, observation: impl Into<String>) {
        if self.notes.len() < MAX_NOTES {
            self.notes.push(Witness {
                point: point.map(PAdicNumber::to_compact),
                observation: observation.into(),
            });
        }
    }

    pub fn finish(self) -> ClaimReport {
        let status = if self.failures > 0 { ClaimStatus::Fail } else { ClaimStatus::Pass };
        let mut witnesses = self.failure_witnesses;
        witnesses.extend(self.notes);
        ClaimReport {
            claim_id: self.id,
            p: self.p,
            a: self.a,
            status,
            reason: None,
            depth: self.depth,
            samples_checked: self.samples,
            counts: self.counts,
            witnesses,
        }
    }
}
