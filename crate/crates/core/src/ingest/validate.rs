//! Pre-scoring gate: what each category of a dataset can contribute.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ingest::dataset::{Observation, ProgramDataset};
use crate::ingest::rates::ConversionTable;
use crate::ingest::value::{Qualifier, Value};
use crate::rubric::{builtin_template, RubricTemplate};
use crate::schema::{Category, IndicatorDef, Schema};

/// Why an observation does not take part in normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exclusion {
    Missing,
    NonScorable,
    TokenUnconverted,
    /// Categorical code under an indicator with no explicit direction.
    NonOrdinal,
}

impl Exclusion {
    pub fn as_str(self) -> &'static str {
        match self {
            Exclusion::Missing => "missing",
            Exclusion::NonScorable => "non-scorable",
            Exclusion::TokenUnconverted => "token-unconverted",
            Exclusion::NonOrdinal => "non-ordinal",
        }
    }
}

impl fmt::Display for Exclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The magnitude an observation contributes to normalization, or why it
/// contributes nothing.
pub fn scorable_value(
    obs: &Observation,
    def: &IndicatorDef,
    rates: &ConversionTable,
) -> Result<f64, Exclusion> {
    if !def.is_scorable() {
        return Err(Exclusion::NonScorable);
    }
    if obs.value.is_missing() {
        return Err(Exclusion::Missing);
    }
    if obs.coded && def.unit == "scoring" && !def.direction_explicit {
        return Err(Exclusion::NonOrdinal);
    }
    match &obs.value.value {
        Value::TokenAmount { amount, symbol } => rates
            .rate(symbol)
            .map(|rate| amount * rate)
            .ok_or(Exclusion::TokenUnconverted),
        Value::Text(_) | Value::Country(_) => Err(Exclusion::NonScorable),
        _ => obs.value.magnitude().ok_or(Exclusion::NonScorable),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionEntry {
    pub indicator: String,
    pub category: Category,
    pub reason: Exclusion,
    pub raw: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualifiedEntry {
    pub indicator: String,
    pub qualifier: Qualifier,
    pub raw: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryStatus {
    pub category: Category,
    /// Scorable indicators with a usable value.
    pub scorable_present: Vec<String>,
    pub missing: usize,
    pub non_scorable: usize,
    pub token_unconverted: usize,
    pub non_ordinal: usize,
    pub rubric_responses: usize,
    pub precomputed: bool,
    pub scorable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub program: String,
    /// Always six entries in report order.
    pub categories: Vec<CategoryStatus>,
    pub exclusions: Vec<ExclusionEntry>,
    pub qualified: Vec<QualifiedEntry>,
    /// Rubric answers whose criterion is not in the template.
    pub unknown_criteria: Vec<String>,
}

impl ValidationReport {
    pub fn all_scorable(&self) -> bool {
        self.categories.iter().all(|c| c.scorable)
    }

    pub fn status(&self, category: Category) -> &CategoryStatus {
        self.categories
            .iter()
            .find(|c| c.category == category)
            .expect("report covers all categories")
    }

    pub fn exclusions_for(&self, reason: Exclusion) -> impl Iterator<Item = &ExclusionEntry> {
        self.exclusions.iter().filter(move |e| e.reason == reason)
    }
}

/// Validates against the builtin rubric template without conversion rates.
pub fn validate_dataset(ds: &ProgramDataset, schema: &Schema) -> ValidationReport {
    validate_dataset_with(ds, schema, &builtin_template(), &ConversionTable::empty())
}

/// A category is scorable when it has a usable indicator value, a rubric
/// answer, or a precomputed category score.
pub fn validate_dataset_with(
    ds: &ProgramDataset,
    schema: &Schema,
    template: &RubricTemplate,
    rates: &ConversionTable,
) -> ValidationReport {
    let mut categories: Vec<CategoryStatus> = Category::ALL
        .into_iter()
        .map(|category| CategoryStatus {
            category,
            scorable_present: Vec::new(),
            missing: 0,
            non_scorable: 0,
            token_unconverted: 0,
            non_ordinal: 0,
            rubric_responses: 0,
            precomputed: ds.categories.contains_key(&category),
            scorable: false,
        })
        .collect();
    let slot = |c: Category| Category::ALL.iter().position(|&x| x == c).unwrap();
    let mut exclusions = Vec::new();
    let mut qualified = Vec::new();
    let mut unknown_criteria = Vec::new();

    for obs in ds.observations.values() {
        // Loading already resolved every id against the schema.
        let Some(def) = schema.get(&obs.indicator_id) else {
            continue;
        };
        let status = &mut categories[slot(def.category)];
        if obs.value.qualifier.is_approximate() {
            qualified.push(QualifiedEntry {
                indicator: obs.indicator_id.clone(),
                qualifier: obs.value.qualifier,
                raw: obs.raw.clone(),
            });
        }
        match scorable_value(obs, def, rates) {
            Ok(_) => status.scorable_present.push(obs.indicator_id.clone()),
            Err(reason) => {
                match reason {
                    Exclusion::Missing => status.missing += 1,
                    Exclusion::NonScorable => status.non_scorable += 1,
                    Exclusion::TokenUnconverted => status.token_unconverted += 1,
                    Exclusion::NonOrdinal => status.non_ordinal += 1,
                }
                exclusions.push(ExclusionEntry {
                    indicator: obs.indicator_id.clone(),
                    category: def.category,
                    reason,
                    raw: obs.raw.clone(),
                });
            }
        }
    }
    for id in ds.rubric.keys() {
        match template.get(id) {
            Some(criterion) => categories[slot(criterion.category)].rubric_responses += 1,
            None => unknown_criteria.push(id.clone()),
        }
    }
    for status in &mut categories {
        status.scorable =
            !status.scorable_present.is_empty() || status.rubric_responses > 0 || status.precomputed;
    }
    ValidationReport {
        program: ds.program.clone(),
        categories,
        exclusions,
        qualified,
        unknown_criteria,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::builtin_schema;

    #[test]
    fn empty_dataset_has_nothing_scorable() {
        let report = validate_dataset(&ProgramDataset::new("Empty"), &builtin_schema());
        assert_eq!(report.categories.len(), 6);
        assert!(report.categories.iter().all(|c| !c.scorable));
        assert!(!report.all_scorable());
    }

    #[test]
    fn single_com_rubric_answer() {
        let mut ds = ProgramDataset::new("P");
        ds.rubric.insert("community-participation-and-engagement".into(), 4);
        let report = validate_dataset(&ds, &builtin_schema());
        for status in &report.categories {
            assert_eq!(status.scorable, status.category == Category::Com, "{:?}", status.category);
        }
    }

    #[test]
    fn classifies_exclusions() {
        let schema = builtin_schema();
        let mut ds = ProgramDataset::new("P");
        ds.observe(&schema, "COM-QN-14", "71.4M ARB", None).unwrap();
        ds.observe(&schema, "TAC-QN-6", "n.a.", None).unwrap();
        ds.observe(&schema, "FAO-QN-9", "2 (milestones)", None).unwrap();
        ds.observe(&schema, "GOV-QN-4", "Link", None).unwrap();
        ds.observe(&schema, "COM-QN-12", "2 (STIP & Backfund)", None).unwrap();
        ds.observe(&schema, "FAO-QN-2", "<50K OP", None).unwrap();
        let report = validate_dataset(&ds, &schema);

        let reasons: Vec<_> = report
            .exclusions
            .iter()
            .map(|e| (e.indicator.as_str(), e.reason))
            .collect();
        assert!(reasons.contains(&("COM-QN-14", Exclusion::TokenUnconverted)));
        assert!(reasons.contains(&("TAC-QN-6", Exclusion::Missing)));
        assert!(reasons.contains(&("FAO-QN-9", Exclusion::NonOrdinal)));
        assert!(reasons.contains(&("GOV-QN-4", Exclusion::NonScorable)));
        assert_eq!(report.status(Category::Com).scorable_present, vec!["COM-QN-12"]);
        assert_eq!(report.qualified.len(), 1);
        assert_eq!(report.status(Category::Tac).missing, 1);

        let mut rates = ConversionTable::empty();
        rates.insert("ARB", 0.5).unwrap();
        rates.insert("OP", 2.0).unwrap();
        let with_rates = validate_dataset_with(&ds, &schema, &builtin_template(), &rates);
        assert_eq!(with_rates.exclusions_for(Exclusion::TokenUnconverted).count(), 0);
    }

    #[test]
    fn explicit_direction_scores_codes() {
        let schema = builtin_schema();
        let mut def = schema.get("FAO-QN-9").unwrap().clone();
        let mut ds = ProgramDataset::new("P");
        ds.observe(&schema, "FAO-QN-9", "2 (milestones)", None).unwrap();
        let obs = &ds.observations["FAO-QN-9"];
        let rates = ConversionTable::empty();
        assert_eq!(scorable_value(obs, &def, &rates), Err(Exclusion::NonOrdinal));
        def.direction_explicit = true;
        assert_eq!(scorable_value(obs, &def, &rates), Ok(2.0));
    }

    #[test]
    fn validation_does_not_mutate() {
        let schema = builtin_schema();
        let mut ds = ProgramDataset::new("P");
        ds.observe(&schema, "EFI-QN-1", "1", None).unwrap();
        let before = ds.clone();
        let _ = validate_dataset(&ds, &schema);
        assert_eq!(ds, before);
    }
}
