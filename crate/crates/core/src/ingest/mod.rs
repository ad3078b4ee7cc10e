//! Observation ingestion: cell parsing, unit coercion, file loading and
//! pre-scoring validation.

pub mod categories;
pub mod dataset;
pub mod rates;
pub mod validate;
pub mod value;

pub use categories::{load_category_table, CategoryTable};
pub use dataset::{load_program_dataset, Observation, ProgramDataset};
pub use rates::{load_rates, ConversionTable};
pub use validate::{
    scorable_value, validate_dataset, validate_dataset_with, CategoryStatus, Exclusion,
    ExclusionEntry, QualifiedEntry, ValidationReport,
};
pub use value::{
    coerce_unit, country_code, format_value, parse_value, ParsedValue, Qualifier, TypedValue, Value,
    WEEKS_PER_MONTH, WEEKS_PER_YEAR,
};
