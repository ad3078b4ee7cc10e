//! Min-max normalization, category aggregation, the composite index and
//! maturity stages.

pub mod gmi;
pub mod normalize;
pub mod pipeline;

pub use gmi::{
    classify_maturity, compute_gmi, ranking, AuditRecord, GmiOptions, GmiResult, Stage,
    StageThresholds, MAX_GMI,
};
pub use normalize::{
    directional_score, minmax_normalize, rubric_category_score, rubric_to_unit, score_category,
    Normalization, Normalized, DEGENERATE_SCORE,
};
pub use pipeline::{Pipeline, ScoreMatrix, Scored};
