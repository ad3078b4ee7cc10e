//! Raw-indicator scoring: datasets in, score matrix and composites out.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::ingest::{scorable_value, ConversionTable, Exclusion, ProgramDataset, Qualifier};
use crate::rubric::{builtin_template, collect_checked, RubricTemplate};
use crate::schema::{Category, Schema};
use crate::scoring::gmi::{compute_gmi, AuditRecord, GmiOptions, GmiResult};
use crate::scoring::normalize::{
    directional_score, mean_of_units, minmax_normalize, score_category, Normalized,
};

/// Per-program, per-indicator normalized scores.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreMatrix {
    pub programs: Vec<String>,
    /// Keyed by (program, indicator id). Directional scores in [0, 1].
    pub entries: BTreeMap<(String, String), Normalized>,
    /// Keyed by (program, category). Only categories with some input appear.
    pub category_scores: BTreeMap<(String, Category), f64>,
}

impl ScoreMatrix {
    pub fn entry(&self, program: &str, indicator: &str) -> Option<Normalized> {
        self.entries
            .get(&(program.to_string(), indicator.to_string()))
            .copied()
    }

    pub fn category_score(&self, program: &str, category: Category) -> Option<f64> {
        self.category_scores
            .get(&(program.to_string(), category))
            .copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub matrix: ScoreMatrix,
    pub results: Vec<GmiResult>,
}

/// Full scoring run over raw datasets.
#[derive(Debug, Clone)]
pub struct Pipeline<'a> {
    schema: &'a Schema,
    template: RubricTemplate,
    rates: ConversionTable,
    options: GmiOptions,
}

impl<'a> Pipeline<'a> {
    pub fn new(schema: &'a Schema) -> Self {
        Pipeline {
            schema,
            template: builtin_template(),
            rates: ConversionTable::empty(),
            options: GmiOptions::default(),
        }
    }

    pub fn template(mut self, template: RubricTemplate) -> Self {
        self.template = template;
        self
    }

    pub fn rates(mut self, rates: ConversionTable) -> Self {
        self.rates = rates;
        self
    }

    pub fn options(mut self, options: GmiOptions) -> Self {
        self.options = options;
        self
    }

    pub fn run(&self, datasets: &[ProgramDataset]) -> Result<Scored> {
        let mut seen = BTreeSet::new();
        for ds in datasets {
            if !seen.insert(ds.program.as_str()) {
                return Err(Error::DuplicateProgram(ds.program.clone()));
            }
        }
        let programs: Vec<String> = datasets.iter().map(|d| d.program.clone()).collect();
        let mut matrix = ScoreMatrix {
            programs: programs.clone(),
            ..Default::default()
        };
        let mut audits: Vec<Vec<AuditRecord>> = vec![Vec::new(); datasets.len()];
        let mut per_category: Vec<BTreeMap<Category, Vec<f64>>> = vec![BTreeMap::new(); datasets.len()];

        for def in self.schema.indicators().iter().filter(|d| d.is_observable()) {
            let observed: Vec<_> = datasets.iter().map(|d| d.observations.get(&def.id)).collect();
            if observed.iter().all(Option::is_none) {
                continue;
            }
            let classified: Vec<Option<std::result::Result<f64, Exclusion>>> = observed
                .iter()
                .map(|o| o.map(|obs| scorable_value(obs, def, &self.rates)))
                .collect();
            let present: Vec<Option<f64>> = classified
                .iter()
                .map(|c| c.and_then(|r| r.ok()))
                .collect();
            let norm = minmax_normalize(&present);

            for (idx, obs) in observed.iter().enumerate() {
                let Some(obs) = obs else { continue };
                let outcome = match classified[idx] {
                    Some(Err(reason)) => Normalized::Excluded(reason),
                    _ => match norm.scores[idx] {
                        Normalized::Score(s) => Normalized::Score(directional_score(s, def.direction)),
                        excluded => excluded,
                    },
                };
                if let Normalized::Score(s) = outcome {
                    per_category[idx].entry(def.category).or_default().push(s);
                }
                matrix
                    .entries
                    .insert((programs[idx].clone(), def.id.clone()), outcome);
                audits[idx].push(AuditRecord {
                    indicator: def.id.clone(),
                    raw: obs.raw.clone(),
                    min: norm.min,
                    max: norm.max,
                    outcome,
                    qualifier: if obs.value.is_missing() {
                        Qualifier::Unspecified
                    } else {
                        obs.value.qualifier
                    },
                    degenerate: norm.degenerate,
                });
            }
        }

        let mut table = Vec::with_capacity(datasets.len());
        for (idx, ds) in datasets.iter().enumerate() {
            let rubric = collect_checked(&self.template, &ds.rubric)?;
            let mut scores = BTreeMap::new();
            for category in Category::ALL {
                let indicator_scores = per_category[idx].get(&category).map_or(&[][..], Vec::as_slice);
                let rubric_score = rubric.get(&category).and_then(|u| mean_of_units(u));
                if let Ok(score) = score_category(indicator_scores, rubric_score) {
                    scores.insert(category, score);
                    matrix
                        .category_scores
                        .insert((ds.program.clone(), category), score);
                }
            }
            table.push((ds.program.clone(), scores));
        }

        let mut results = compute_gmi(&table, &self.options)?;
        for (result, audit) in results.iter_mut().zip(audits) {
            let category_records = std::mem::replace(&mut result.audit, audit);
            result.audit.extend(category_records);
        }
        Ok(Scored { matrix, results })
    }
}
