use super::ClaimReport;
use crate::basin::ScanReport;
use crate::error::{Error, Result};

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Parse(format!("csv output: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(csv_error)?;
    String::from_utf8(bytes).map_err(csv_error)
}

/// One row per report: `claim_id, p, a, status, samples_checked`.
pub fn claims_csv(reports: &[ClaimReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["claim_id", "p", "a", "status", "samples_checked"]).map_err(csv_error)?;
    for r in reports {
        let status = serde_json::to_value(r.status).map_err(csv_error)?;
        w.write_record([
            r.claim_id.as_str(),
            &r.p.to_string(),
            r.a.as_deref().unwrap_or(""),
            status.as_str().unwrap_or(""),
            &r.samples_checked.to_string(),
        ])
        .map_err(csv_error)?;
    }
    finish(w)
}

/// One row per sample: `point, valuation, fate, steps`.
pub fn scan_csv(report: &ScanReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["point", "valuation", "fate", "steps"]).map_err(csv_error)?;
    for e in &report.entries {
        w.write_record([
            e.point.to_compact(),
            e.valuation.map_or_else(String::new, |v| v.to_string()),
            e.fate.outcome.label(),
            e.fate.steps_used.to_string(),
        ])
        .map_err(csv_error)?;
    }
    finish(w)
}
