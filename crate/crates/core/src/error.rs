use thiserror::Error;

use crate::schema::Category;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine can report. The CLI maps these onto exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema error for {id}: {message}")]
    Schema { id: String, message: String },

    #[error("unknown indicator: {0}")]
    UnknownIndicator(String),

    #[error("duplicate indicator: {0}")]
    DuplicateIndicator(String),

    #[error("cannot parse value {raw:?} for indicator {indicator}")]
    Value { raw: String, indicator: String },

    #[error("cannot convert unit {from:?} to {to:?}")]
    Unit { from: String, to: String },

    #[error("rubric score {score} for {criterion} is outside the 1..5 scale")]
    RubricRange { criterion: String, score: i64 },

    #[error("unknown rubric criterion: {0}")]
    UnknownCriterion(String),

    #[error("duplicate rubric criterion: {0}")]
    DuplicateCriterion(String),

    #[error("category has no scorable input")]
    EmptyCategory,

    #[error("missing category data: {}", format_pairs(.missing))]
    PartialData { missing: Vec<(String, Category)> },

    #[error("program {0} has no scorable category")]
    NoScorableCategories(String),

    #[error("duplicate program: {0}")]
    DuplicateProgram(String),

    #[error("result is for {result} but validation is for {validation}")]
    MismatchedProgram { result: String, validation: String },
}

fn format_pairs(pairs: &[(String, Category)]) -> String {
    pairs
        .iter()
        .map(|(program, category)| format!("({program}, {})", category.code()))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    /// Stable name of the failure class, used in diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "ParseError",
            Error::Schema { .. } => "SchemaError",
            Error::UnknownIndicator(_) => "UnknownIndicator",
            Error::DuplicateIndicator(_) => "DuplicateIndicator",
            Error::Value { .. } => "ValueError",
            Error::Unit { .. } => "UnitError",
            Error::RubricRange { .. } => "RubricRangeError",
            Error::UnknownCriterion(_) => "UnknownCriterion",
            Error::DuplicateCriterion(_) => "DuplicateCriterion",
            Error::EmptyCategory => "EmptyCategory",
            Error::PartialData { .. } => "PartialDataError",
            Error::NoScorableCategories(_) => "NoScorableCategories",
            Error::DuplicateProgram(_) => "DuplicateProgram",
            Error::MismatchedProgram { .. } => "MismatchedProgram",
        }
    }

    /// Failures caused by the data rather than by malformed input.
    pub fn is_domain_failure(&self) -> bool {
        matches!(self, Error::PartialData { .. } | Error::NoScorableCategories(_))
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn schema(id: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            id: id.into(),
            message: message.into(),
        }
    }
}
