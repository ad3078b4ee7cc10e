//! Grant Maturity Index engine.
//!
//! Ingests typed indicator observations and rubric self-assessments for a set
//! of grant programs, normalizes them across programs, aggregates six category
//! scores into a composite in [0, 6] and classifies each program into a
//! maturity stage.

pub mod error;
pub mod ingest;
pub mod report;
pub mod rubric;
pub mod schema;
pub mod scoring;
mod table;

pub use error::{Error, Result};
pub use ingest::{
    load_category_table, load_program_dataset, load_rates, parse_value, validate_dataset,
    validate_dataset_with, CategoryTable, ConversionTable, Exclusion, ProgramDataset, TypedValue,
    ValidationReport, Value,
};
pub use report::{render_comparison, render_program_report, ComparisonReport, OutputFormat};
pub use rubric::{builtin_template, collect_responses, RubricTemplate};
pub use schema::{builtin_schema, load_schema, Category, Direction, IndicatorDef, Schema};
pub use scoring::{classify_maturity, compute_gmi, GmiOptions, GmiResult, Pipeline, Stage};

/// Kind of a `|`-delimited input document, read from its leading pragma.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocumentKind {
    Schema,
    Observations,
    Categories,
    Responses,
    RubricTemplate,
    Unknown,
}

pub fn document_kind(source: &str) -> DocumentKind {
    let Some(pragma) = table::leading_pragma(source) else {
        return DocumentKind::Unknown;
    };
    let name = pragma.split_whitespace().next().unwrap_or("");
    match name {
        schema::SCHEMA_PRAGMA => DocumentKind::Schema,
        ingest::dataset::OBSERVATIONS_PRAGMA => DocumentKind::Observations,
        ingest::categories::CATEGORIES_PRAGMA => DocumentKind::Categories,
        rubric::RESPONSES_PRAGMA => DocumentKind::Responses,
        rubric::TEMPLATE_PRAGMA => DocumentKind::RubricTemplate,
        _ => DocumentKind::Unknown,
    }
}
