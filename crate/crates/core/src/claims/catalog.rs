use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{section3, section4, section5, verify_claim, ClaimReport, ClaimStatus, Ctx, VerifyConfig};
use crate::error::{Error, Result};
use crate::padic::{PAdicNumber, Prime};

pub(crate) type Check = fn(&Ctx<'_>) -> Result<ClaimReport>;

const REGISTRY: &[(&str, Check)] = &[
    ("lem-2.1", section3::lem_2_1),
    ("prop-3.1", section3::prop_3_1),
    ("prop-3.2", section3::prop_3_2),
    ("prop-3.3", section3::prop_3_3),
    ("prop-3.3-degenerate", section3::prop_3_3_degenerate),
    ("prop-3.3-example", section3::prop_3_3_example),
    ("lem-4.1", section4::lem_4_1),
    ("lem-4.2", section4::lem_4_2),
    ("lem-4.3", section4::lem_4_3),
    ("lem-4.4", section4::lem_4_4),
    ("ex-4.1", section4::ex_4_1),
    ("ex-4.2", section4::ex_4_2),
    ("ex-4.3", section4::ex_4_3),
    ("lem-5.1", section5::lem_5_1),
    ("cor-5.1", section5::cor_5_1),
    ("step-I", section5::step_1),
    ("step-II", section5::step_2),
    ("step-III", section5::step_3),
    ("step-IV", section5::step_4),
    ("step-VI", section5::step_6),
    ("step-VII", section5::step_7),
    ("step-VIII", section5::step_8),
    ("step-IX", section5::step_9),
    ("thm-5.1", section5::thm_5_1),
    ("thm-5.2-i", section5::thm_5_2_i),
    ("thm-5.2-ii", section5::thm_5_2_ii),
    ("thm-5.2-iii", section5::thm_5_2_iii),
    ("thm-5.2-iv", section5::thm_5_2_iv),
    ("lem-5.3", section5::lem_5_3),
    ("thm-5.3", section5::thm_5_3),
    ("thm-5.4", section5::thm_5_4),
    ("cor-5.2", section5::cor_5_2),
    ("rem-5.1", section5::rem_5_1),
    ("cor-5.3", section5::cor_5_3),
    ("thm-5.5", section5::thm_5_5),
];

pub(crate) fn lookup(id: &str) -> Option<Check> {
    REGISTRY.iter().find(|(k, _)| *k == id).map(|(_, f)| *f)
}

/// Every known claim id.
pub fn claim_ids() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|(k, _)| *k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Section3,
    Section4,
    Section5,
}

impl Suite {
    fn includes(self, section: Suite) -> bool {
        self == Suite::All || self == section
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Suite::All),
            "section3" => Ok(Suite::Section3),
            "section4" => Ok(Suite::Section4),
            "section5" => Ok(Suite::Section5),
            _ => Err(Error::Parse(format!("unknown suite `{s}`"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::All => "all",
            Suite::Section3 => "section3",
            Suite::Section4 => "section4",
            Suite::Section5 => "section5",
        })
    }
}

/// One entry of the reproduction catalog. `a = None` lets the claim pick or
/// build its own parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClaimInstance {
    pub section: Suite,
    pub claim_id: &'static str,
    pub p: u64,
    pub a: Option<&'static str>,
}

const fn inst(section: Suite, claim_id: &'static str, p: u64, a: Option<&'static str>) -> ClaimInstance {
    ClaimInstance { section, claim_id, p, a }
}

use Suite::{Section3 as S3, Section4 as S4, Section5 as S5};

/// `1 + 2*5 + 2*5^2 + ...`, i.e. `-3/2` in `Q_5`.
const A_PERIODIC: &str = "0;1,2";

const CATALOG: &[ClaimInstance] = &[
    inst(S3, "lem-2.1", 2, None),
    inst(S3, "lem-2.1", 3, None),
    inst(S3, "lem-2.1", 5, None),
    inst(S3, "lem-2.1", 7, None),
    inst(S3, "lem-2.1", 11, None),
    inst(S3, "lem-2.1", 13, None),
    inst(S3, "prop-3.1", 2, None),
    inst(S3, "prop-3.1", 3, None),
    inst(S3, "prop-3.1", 5, None),
    inst(S3, "prop-3.1", 7, None),
    inst(S3, "prop-3.2", 2, None),
    inst(S3, "prop-3.2", 3, None),
    inst(S3, "prop-3.2", 5, None),
    inst(S3, "prop-3.2", 7, None),
    inst(S3, "prop-3.3", 2, None),
    inst(S3, "prop-3.3", 3, None),
    inst(S3, "prop-3.3", 5, None),
    inst(S3, "prop-3.3", 7, None),
    inst(S3, "prop-3.3", 11, None),
    inst(S3, "prop-3.3", 13, None),
    inst(S3, "prop-3.3-degenerate", 5, None),
    inst(S3, "prop-3.3-degenerate", 13, None),
    inst(S3, "prop-3.3-example", 5, Some(A_PERIODIC)),
    inst(S4, "lem-4.1", 2, Some("8")),
    inst(S4, "lem-4.1", 3, Some("3")),
    inst(S4, "lem-4.1", 5, Some("5")),
    inst(S4, "lem-4.1", 7, Some("7")),
    inst(S4, "lem-4.1", 11, Some("11")),
    inst(S4, "lem-4.2", 5, None),
    inst(S4, "lem-4.2", 7, None),
    inst(S4, "lem-4.2", 11, None),
    inst(S4, "lem-4.2", 13, None),
    inst(S4, "lem-4.3", 5, Some(A_PERIODIC)),
    inst(S4, "lem-4.3", 11, Some("4")),
    inst(S4, "lem-4.3", 11, Some("1")),
    inst(S4, "lem-4.4", 3, Some("1/3")),
    inst(S4, "lem-4.4", 5, Some("1/5")),
    inst(S4, "lem-4.4", 5, Some("1/125")),
    inst(S4, "ex-4.1", 5, Some(A_PERIODIC)),
    inst(S4, "ex-4.2", 11, Some("4")),
    inst(S4, "ex-4.3", 11, Some("1")),
    inst(S5, "lem-5.1", 3, Some("3")),
    inst(S5, "lem-5.1", 7, Some("7")),
    inst(S5, "lem-5.1", 11, Some("1")),
    inst(S5, "lem-5.1", 5, Some("1/5")),
    inst(S5, "cor-5.1", 3, Some("3")),
    inst(S5, "cor-5.1", 7, Some("7")),
    inst(S5, "cor-5.1", 11, Some("1")),
    inst(S5, "cor-5.1", 5, Some("1/5")),
    inst(S5, "step-I", 3, Some("1/3")),
    inst(S5, "step-I", 5, Some("1/5")),
    inst(S5, "step-II", 3, Some("1/3")),
    inst(S5, "step-II", 5, Some("1/5")),
    inst(S5, "step-III", 5, Some("1/125")),
    inst(S5, "step-III", 3, Some("1/27")),
    inst(S5, "step-IV", 3, Some("1/3")),
    inst(S5, "step-IV", 5, Some("1/5")),
    inst(S5, "step-VI", 3, Some("1/3")),
    inst(S5, "step-VI", 5, Some("1/5")),
    inst(S5, "step-VII", 5, Some("1/5")),
    inst(S5, "step-VIII", 5, Some("1/5")),
    inst(S5, "step-IX", 3, Some("1/3")),
    inst(S5, "step-IX", 5, Some("1/5")),
    inst(S5, "step-IX", 5, Some("1/125")),
    inst(S5, "thm-5.1", 3, Some("1/3")),
    inst(S5, "thm-5.1", 5, Some("1/5")),
    inst(S5, "thm-5.1", 5, Some("1/125")),
    inst(S5, "thm-5.2-i", 2, Some("8")),
    inst(S5, "thm-5.2-i", 3, Some("3")),
    inst(S5, "thm-5.2-i", 5, Some("5")),
    inst(S5, "thm-5.2-i", 7, Some("7")),
    inst(S5, "thm-5.2-i", 11, Some("11")),
    inst(S5, "thm-5.2-ii", 2, Some("8")),
    inst(S5, "thm-5.2-ii", 5, Some("5")),
    inst(S5, "thm-5.2-ii", 7, Some("7")),
    inst(S5, "thm-5.2-ii", 11, Some("11")),
    inst(S5, "thm-5.2-ii", 13, Some("13")),
    inst(S5, "thm-5.2-iii", 2, Some("8")),
    inst(S5, "thm-5.2-iii", 5, Some("5")),
    inst(S5, "thm-5.2-iii", 7, Some("7")),
    inst(S5, "thm-5.2-iii", 11, Some("11")),
    inst(S5, "thm-5.2-iv", 3, Some("3")),
    inst(S5, "thm-5.2-iv", 3, Some("9")),
    inst(S5, "lem-5.3", 2, Some("8")),
    inst(S5, "lem-5.3", 5, Some("5")),
    inst(S5, "lem-5.3", 7, Some("7")),
    inst(S5, "lem-5.3", 11, Some("11")),
    inst(S5, "lem-5.3", 13, Some("13")),
    inst(S5, "thm-5.3", 5, Some("1")),
    inst(S5, "thm-5.3", 7, Some("3")),
    inst(S5, "thm-5.4", 13, Some("6")),
    inst(S5, "thm-5.4", 19, Some("1")),
    inst(S5, "thm-5.4", 11, Some("4")),
    inst(S5, "thm-5.4", 5, Some(A_PERIODIC)),
    inst(S5, "cor-5.2", 5, None),
    inst(S5, "cor-5.2", 13, None),
    inst(S5, "cor-5.2", 29, None),
    inst(S5, "rem-5.1", 5, None),
    inst(S5, "rem-5.1", 5, Some(A_PERIODIC)),
    inst(S5, "cor-5.3", 11, Some("1")),
    inst(S5, "cor-5.3", 17, Some("15")),
    inst(S5, "thm-5.5", 11, Some("1")),
];

/// The fixed instances of a suite, in catalog order.
pub fn instances(suite: Suite) -> impl Iterator<Item = &'static ClaimInstance> {
    CATALOG.iter().filter(move |i| suite.includes(i.section))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReproduceReport {
    pub suite: Suite,
    pub config: VerifyConfig,
    pub summary: Summary,
    pub reports: Vec<ClaimReport>,
}

impl ReproduceReport {
    pub fn has_failures(&self) -> bool {
        self.summary.fail > 0
    }
}

/// Runs every instance of `suite`.
pub fn reproduce(suite: Suite, config: &VerifyConfig) -> Result<ReproduceReport> {
    let mut reports = Vec::new();
    let mut summary = Summary::default();
    for i in instances(suite) {
        let p = Prime::new(i.p)?;
        let a = i.a.map(|s| PAdicNumber::parse(s, p, config.precision)).transpose()?;
        let report = verify_claim(i.claim_id, p, a.as_ref(), config)?;
        match report.status {
            ClaimStatus::Pass => summary.pass += 1,
            ClaimStatus::Fail => summary.fail += 1,
            ClaimStatus::Skipped => summary.skipped += 1,
        }
        reports.push(report);
    }
    Ok(ReproduceReport { suite, config: *config, summary, reports })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_catalog_entry_is_registered() {
        for i in CATALOG {
            assert!(lookup(i.claim_id).is_some(), "{}", i.claim_id);
        }
    }

    #[test]
    fn every_registered_claim_has_an_instance() {
        for id in claim_ids() {
            assert!(CATALOG.iter().any(|i| i.claim_id == id), "{id}");
        }
    }

    #[test]
    fn suites_partition_the_catalog() {
        let n = |s| instances(s).count();
        assert_eq!(n(Suite::All), n(Suite::Section3) + n(Suite::Section4) + n(Suite::Section5));
        assert_eq!("section4".parse::<Suite>().unwrap(), Suite::Section4);
        assert!("section9".parse::<Suite>().is_err());
    }
}
