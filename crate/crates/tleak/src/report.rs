//! Leakage report documents (`tleak_report_v1`).

use serde::{Deserialize, Serialize};
use tleak_core::leakage::LeakageReport;

pub const REPORT_SCHEMA: &str = "tleak_report_v1";

/// Tolerance for recomputing a report's value from its pair matrices.
pub const CONSISTENCY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema: String,
    #[serde(flatten)]
    pub report: LeakageReport,
    /// Everything needed to rerun the command.
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
}

impl ReportDocument {
    pub fn new(report: LeakageReport, config: serde_json::Value, timestamp: bool) -> Self {
        let created_unix = timestamp.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs())
        });
        Self { schema: REPORT_SCHEMA.into(), report, config, created_unix }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("not a report document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("schema {0:?} is not {REPORT_SCHEMA}")]
    Schema(String),
    #[error("inconsistent report: {0}")]
    Inconsistent(tleak_core::Error),
}

/// Parses a report and checks that it re-derives its own value.
pub fn validate_report_json(text: &str) -> Result<ReportDocument, ReportError> {
    let doc: ReportDocument = serde_json::from_str(text)?;
    if doc.schema != REPORT_SCHEMA {
        return Err(ReportError::Schema(doc.schema));
    }
    doc.report.check_consistency(CONSISTENCY_TOL).map_err(ReportError::Inconsistent)?;
    Ok(doc)
}
