use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::ComparisonReport;
use crate::scoring::{ranking, GmiResult};

pub const STRUCTURED_FORMAT: &str = "gmi-comparison/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredDocument {
    pub format: String,
    pub programs: Vec<GmiResult>,
    /// Program names by descending composite.
    pub ranking: Vec<String>,
    pub notes: Vec<String>,
}

pub(super) fn render(report: &ComparisonReport) -> String {
    let programs: Vec<GmiResult> = report.results.iter().map(GmiResult::rounded).collect();
    let doc = StructuredDocument {
        format: STRUCTURED_FORMAT.to_string(),
        ranking: ranking(&programs).iter().map(|r| r.program.clone()).collect(),
        programs,
        notes: report.footnotes(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("results serialize");
    text.push('\n');
    text
}

/// Reads back a structured rendering. The results equal the rounded
/// originals.
pub fn parse_structured(text: &str) -> Result<Vec<GmiResult>> {
    let doc: StructuredDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    if doc.format != STRUCTURED_FORMAT {
        return Err(Error::Parse {
            line: 1,
            message: format!("unsupported format {:?}", doc.format),
        });
    }
    Ok(doc.programs)
}
