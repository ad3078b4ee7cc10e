use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Qualifier;
use crate::schema::Category;
use crate::scoring::normalize::{minmax_normalize, Normalized};

pub const MAX_GMI: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    Experimental,
    Foundational,
    Developmental,
    Advanced,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Experimental => "Experimental",
            Stage::Foundational => "Foundational",
            Stage::Developmental => "Developmental",
            Stage::Advanced => "Advanced",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lower bounds of the upper three stages. Intervals are half-open except the
/// last, which includes 6.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageThresholds {
    pub foundational: f64,
    pub developmental: f64,
    pub advanced: f64,
}

impl Default for StageThresholds {
    fn default() -> Self {
        StageThresholds {
            foundational: 1.5,
            developmental: 3.0,
            advanced: 4.5,
        }
    }
}

impl StageThresholds {
    pub fn new(foundational: f64, developmental: f64, advanced: f64) -> Option<Self> {
        let ordered = 0.0 < foundational
            && foundational < developmental
            && developmental < advanced
            && advanced <= MAX_GMI;
        ordered.then_some(StageThresholds {
            foundational,
            developmental,
            advanced,
        })
    }

    /// Panics if `gmi` is outside [0, 6].
    pub fn classify(&self, gmi: f64) -> Stage {
        assert!(
            (0.0..=MAX_GMI).contains(&gmi),
            "GMI {gmi} is outside [0, {MAX_GMI}]"
        );
        if gmi < self.foundational {
            Stage::Experimental
        } else if gmi < self.developmental {
            Stage::Foundational
        } else if gmi < self.advanced {
            Stage::Developmental
        } else {
            Stage::Advanced
        }
    }
}

/// Stage under the default quartile thresholds.
pub fn classify_maturity(gmi: f64) -> Stage {
    StageThresholds::default().classify(gmi)
}

/// One normalization step in the life of a result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    /// Indicator id, or the roll-up id for category-level records.
    pub indicator: String,
    pub raw: String,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub outcome: Normalized,
    pub qualifier: Qualifier,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmiResult {
    pub program: String,
    /// Category scores before cross-program normalization.
    pub category_scores: BTreeMap<Category, f64>,
    pub normalized_category_scores: BTreeMap<Category, f64>,
    pub gmi: f64,
    pub stage: Stage,
    pub audit: Vec<AuditRecord>,
}

impl GmiResult {
    pub fn missing_categories(&self) -> Vec<Category> {
        Category::ALL
            .into_iter()
            .filter(|c| !self.normalized_category_scores.contains_key(c))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GmiOptions {
    /// Rescale programs with absent categories instead of failing.
    pub allow_partial: bool,
    pub thresholds: StageThresholds,
}

/// Normalizes each category across programs and sums the six normalized
/// scores per program. Results come back in input order.
///
/// With `allow_partial`, absent categories are skipped and the sum is scaled
/// by `6 / present`; otherwise any absent category is a `PartialData` error.
pub fn compute_gmi(
    category_scores: &[(String, BTreeMap<Category, f64>)],
    options: &GmiOptions,
) -> Result<Vec<GmiResult>> {
    let mut names = BTreeSet::new();
    for (program, _) in category_scores {
        if !names.insert(program.as_str()) {
            return Err(Error::DuplicateProgram(program.clone()));
        }
    }
    let missing: Vec<(String, Category)> = category_scores
        .iter()
        .flat_map(|(program, scores)| {
            Category::ALL
                .into_iter()
                .filter(|c| !scores.contains_key(c))
                .map(move |c| (program.clone(), c))
        })
        .collect();
    if !missing.is_empty() && !options.allow_partial {
        return Err(Error::PartialData { missing });
    }

    let mut results: Vec<GmiResult> = category_scores
        .iter()
        .map(|(program, scores)| GmiResult {
            program: program.clone(),
            category_scores: scores.clone(),
            normalized_category_scores: BTreeMap::new(),
            gmi: 0.0,
            stage: Stage::Experimental,
            audit: Vec::new(),
        })
        .collect();

    for category in Category::ALL {
        let column: Vec<Option<f64>> = category_scores
            .iter()
            .map(|(_, scores)| scores.get(&category).copied())
            .collect();
        let norm = minmax_normalize(&column);
        for (result, (raw, outcome)) in results.iter_mut().zip(column.iter().zip(&norm.scores)) {
            if let (Some(raw), Normalized::Score(score)) = (raw, outcome) {
                result.normalized_category_scores.insert(category, *score);
                result.audit.push(AuditRecord {
                    indicator: category.rollup_id(),
                    raw: raw.to_string(),
                    min: norm.min,
                    max: norm.max,
                    outcome: *outcome,
                    qualifier: Qualifier::Exact,
                    degenerate: norm.degenerate,
                });
            }
        }
    }

    for result in &mut results {
        let present = result.normalized_category_scores.len();
        if present == 0 {
            return Err(Error::NoScorableCategories(result.program.clone()));
        }
        let sum: f64 = Category::ALL
            .iter()
            .filter_map(|c| result.normalized_category_scores.get(c))
            .sum();
        result.gmi = if present == Category::ALL.len() {
            sum
        } else {
            sum * MAX_GMI / present as f64
        };
        result.stage = options.thresholds.classify(result.gmi);
    }
    Ok(results)
}

/// Programs ordered by descending GMI; ties are broken by program name.
pub fn ranking(results: &[GmiResult]) -> Vec<&GmiResult> {
    let mut ranked: Vec<&GmiResult> = results.iter().collect();
    ranked.sort_by(|a, b| b.gmi.total_cmp(&a.gmi).then_with(|| a.program.cmp(&b.program)));
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(program: &str, values: [f64; 6]) -> (String, BTreeMap<Category, f64>) {
        (program.to_string(), Category::ALL.into_iter().zip(values).collect())
    }

    #[test]
    fn single_program_is_neutral() {
        let results = compute_gmi(&[row("Solo", [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])], &GmiOptions::default()).unwrap();
        assert_eq!(results[0].gmi, 3.0);
        assert_eq!(results[0].stage, Stage::Developmental);
    }

    #[test]
    fn strict_dominance_hits_both_endpoints() {
        let results = compute_gmi(
            &[row("Low", [1.0; 6]), row("High", [2.0; 6])],
            &GmiOptions::default(),
        )
        .unwrap();
        assert_eq!(results[0].gmi, 0.0);
        assert_eq!(results[1].gmi, 6.0);
        assert_eq!(results[0].stage, Stage::Experimental);
        assert_eq!(results[1].stage, Stage::Advanced);
    }

    #[test]
    fn partial_data() {
        let mut a = row("A", [1.0; 6]);
        a.1.remove(&Category::Gov);
        let b = row("B", [2.0; 6]);
        let err = compute_gmi(&[a.clone(), b.clone()], &GmiOptions::default()).unwrap_err();
        assert_eq!(
            err,
            Error::PartialData {
                missing: vec![("A".to_string(), Category::Gov)]
            }
        );
        let options = GmiOptions {
            allow_partial: true,
            ..Default::default()
        };
        let results = compute_gmi(&[a, b], &options).unwrap();
        assert_eq!(results[0].gmi, 0.0);
        // B: GOV is degenerate (only B present) → 0.5; others 1.0.
        assert_eq!(results[1].gmi, 5.5);
        assert_eq!(results[0].missing_categories(), vec![Category::Gov]);
    }

    #[test]
    fn empty_program_under_partial() {
        let options = GmiOptions {
            allow_partial: true,
            ..Default::default()
        };
        let err = compute_gmi(&[("Z".to_string(), BTreeMap::new())], &options).unwrap_err();
        assert_eq!(err, Error::NoScorableCategories("Z".into()));
    }

    #[test]
    fn duplicate_programs() {
        let err = compute_gmi(&[row("A", [1.0; 6]), row("A", [2.0; 6])], &GmiOptions::default());
        assert_eq!(err, Err(Error::DuplicateProgram("A".into())));
    }

    #[test]
    fn stage_boundaries() {
        assert_eq!(classify_maturity(0.0), Stage::Experimental);
        assert_eq!(classify_maturity(1.4999), Stage::Experimental);
        assert_eq!(classify_maturity(1.5), Stage::Foundational);
        assert_eq!(classify_maturity(3.0), Stage::Developmental);
        assert_eq!(classify_maturity(3.9312), Stage::Developmental);
        assert_eq!(classify_maturity(4.5), Stage::Advanced);
        assert_eq!(classify_maturity(6.0), Stage::Advanced);
        assert!(StageThresholds::new(2.0, 1.0, 3.0).is_none());
        let custom = StageThresholds::new(1.0, 2.0, 3.0).unwrap();
        assert_eq!(custom.classify(2.5), Stage::Developmental);
    }

    #[test]
    #[should_panic]
    fn out_of_range_gmi_panics() {
        classify_maturity(6.5);
    }

    #[test]
    fn ranking_breaks_ties_by_name() {
        let mk = |p: &str, gmi| GmiResult {
            program: p.into(),
            category_scores: BTreeMap::new(),
            normalized_category_scores: BTreeMap::new(),
            gmi,
            stage: classify_maturity(gmi),
            audit: vec![],
        };
        let results = vec![mk("b", 2.0), mk("a", 2.0), mk("c", 4.0)];
        let order: Vec<_> = ranking(&results).iter().map(|r| r.program.as_str()).collect();
        assert_eq!(order, ["c", "a", "b"]);
    }
}
