use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ingest::value::{coerce_unit, parse_value, time_unit, TypedValue};
use crate::rubric::{self, Responses, RESPONSES_HEADER};
use crate::schema::{Category, Schema};
use crate::table::{self, Item};

pub const OBSERVATIONS_PRAGMA: &str = "gmi-observations";
pub const OBSERVATION_HEADER: [&str; 3] = ["indicator_id", "raw_value", "unit"];
pub const CATEGORY_SECTION_HEADER: [&str; 2] = ["category", "score"];

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub indicator_id: String,
    /// Cell text exactly as written in the file.
    pub raw: String,
    /// Unit annotation column, if any.
    pub unit: Option<String>,
    /// Parsed value, already expressed in the indicator's declared unit.
    pub value: TypedValue,
    /// Leading-numeral categorical code such as `1 (DAO Treasury)`.
    pub coded: bool,
}

/// One program's observations, rubric answers and, optionally, precomputed
/// category scores.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProgramDataset {
    pub program: String,
    pub observations: BTreeMap<String, Observation>,
    pub rubric: Responses,
    pub categories: BTreeMap<Category, f64>,
}

impl ProgramDataset {
    pub fn new(program: impl Into<String>) -> Self {
        ProgramDataset {
            program: program.into(),
            ..Default::default()
        }
    }

    /// Parses `raw` for `indicator_id` and adds it as an observation.
    pub fn observe(
        &mut self,
        schema: &Schema,
        indicator_id: &str,
        raw: &str,
        unit: Option<&str>,
    ) -> Result<()> {
        let def = schema.resolve(indicator_id)?;
        if !def.is_observable() {
            return Err(Error::schema(
                indicator_id,
                format!("{} indicators are not observed directly", def.kind),
            ));
        }
        if self.observations.contains_key(indicator_id) {
            return Err(Error::DuplicateIndicator(indicator_id.to_string()));
        }
        let parsed = parse_value(raw, def)?;
        let from_unit = match (unit.filter(|u| !u.is_empty()), parsed.unit.as_deref()) {
            (Some(column), Some(cell)) if time_unit(column) != Some(cell) => {
                return Err(Error::Unit {
                    from: cell.to_string(),
                    to: column.to_string(),
                })
            }
            (_, Some(cell)) => Some(cell.to_string()),
            (Some(column), None) => Some(column.to_string()),
            (None, None) => None,
        };
        let value = match &from_unit {
            Some(u) => coerce_unit(&parsed.value, u, def)?,
            None => parsed.value,
        };
        self.observations.insert(
            indicator_id.to_string(),
            Observation {
                indicator_id: indicator_id.to_string(),
                raw: raw.to_string(),
                unit: unit.filter(|u| !u.is_empty()).map(str::to_string),
                value,
                coded: parsed.coded,
            },
        );
        Ok(())
    }

    /// Writes the dataset in observation-file format. Observations are written
    /// from their raw cells, so loading the output reproduces this dataset.
    pub fn to_text(&self) -> String {
        let mut out = format!("#!{OBSERVATIONS_PRAGMA} 1\nprogram|{}\n", self.program);
        out.push_str(&OBSERVATION_HEADER.join("|"));
        out.push('\n');
        for obs in self.observations.values() {
            out.push_str(&format!(
                "{}|{}|{}\n",
                obs.indicator_id,
                obs.raw,
                obs.unit.as_deref().unwrap_or("")
            ));
        }
        if !self.rubric.is_empty() {
            out.push_str(&format!("[rubric]\n{}\n", RESPONSES_HEADER.join("|")));
            for (id, score) in &self.rubric {
                out.push_str(&format!("{id}|{score}\n"));
            }
        }
        if !self.categories.is_empty() {
            out.push_str(&format!("[categories]\n{}\n", CATEGORY_SECTION_HEADER.join("|")));
            for (category, score) in &self.categories {
                out.push_str(&format!("{category}|{score}\n"));
            }
        }
        out
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Observations,
    Rubric,
    Categories,
}

/// Reads an observation file: program header, observation rows and the
/// optional `[rubric]` and `[categories]` sections.
pub fn load_program_dataset(source: &str, schema: &Schema) -> Result<ProgramDataset> {
    let mut ds: Option<ProgramDataset> = None;
    let mut section = Section::Preamble;
    let mut header_pending = false;

    for (line, item) in table::items(source) {
        let rec = match item {
            Item::Pragma(_) => continue,
            Item::Section(name) => {
                if ds.is_none() {
                    return Err(Error::parse(line, "section before program header"));
                }
                section = match name {
                    "rubric" => Section::Rubric,
                    "categories" => Section::Categories,
                    other => return Err(Error::parse(line, format!("unknown section [{other}]"))),
                };
                header_pending = true;
                continue;
            }
            Item::Record(rec) => rec,
        };
        let Some(dataset) = ds.as_mut() else {
            match rec.fields.as_slice() {
                ["program", name] if !name.is_empty() => {
                    ds = Some(ProgramDataset::new(*name));
                    section = Section::Observations;
                    header_pending = true;
                    continue;
                }
                _ => return Err(Error::parse(line, "expected program|<name> header")),
            }
        };
        if header_pending {
            let expected: &[&str] = match section {
                Section::Observations => &OBSERVATION_HEADER,
                Section::Rubric => &RESPONSES_HEADER,
                Section::Categories => &CATEGORY_SECTION_HEADER,
                Section::Preamble => unreachable!(),
            };
            if rec.fields != expected {
                return Err(Error::parse(line, format!("expected header {}", expected.join("|"))));
            }
            header_pending = false;
            continue;
        }
        match section {
            Section::Observations => {
                let (id, raw, unit) = match rec.fields.as_slice() {
                    [id, raw] => (*id, *raw, None),
                    [id, raw, unit] => (*id, *raw, Some(*unit)),
                    _ => return Err(Error::parse(line, "expected indicator_id|raw_value|unit")),
                };
                dataset.observe(schema, id, raw, unit)?;
            }
            Section::Rubric => {
                if let Some((id, score)) = rubric::parse_response_row(&rec)? {
                    rubric::insert_response(&mut dataset.rubric, id, score)?;
                }
            }
            Section::Categories => {
                let [key, raw] = rec.fields.as_slice() else {
                    return Err(Error::parse(line, "expected category|score"));
                };
                let category = Category::from_key(key)
                    .ok_or_else(|| Error::parse(line, format!("unknown category {key:?}")))?;
                let score = parse_score(line, raw)?;
                if dataset.categories.insert(category, score).is_some() {
                    return Err(Error::parse(line, format!("duplicate category {category}")));
                }
            }
            Section::Preamble => unreachable!(),
        }
    }
    let ds = ds.ok_or_else(|| Error::parse(0, "missing program header"))?;
    if header_pending && section == Section::Observations {
        return Err(Error::parse(0, "missing observation header row"));
    }
    Ok(ds)
}

pub(crate) fn parse_score(line: usize, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(line, format!("invalid score {raw:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::value::Value;
    use crate::schema::builtin_schema;

    const SMALL: &str = "#!gmi-observations 1
program|Demo
indicator_id|raw_value|unit
COM-QN-12|15|
COM-QN-8|6|months
COM-QN-7|7.9 weeks|
FAO-QN-2|<50K OP|
[rubric]
criterion_id|score
governance|4
clarity-of-objectives|
[categories]
category|score
GOV-QN|2.5
COM-QL|14.6587
";

    #[test]
    fn loads_all_sections() {
        let ds = load_program_dataset(SMALL, &builtin_schema()).unwrap();
        assert_eq!(ds.program, "Demo");
        assert_eq!(ds.observations["COM-QN-12"].value.value, Value::Number(15.0));
        match ds.observations["COM-QN-8"].value.value {
            Value::Number(w) => assert!((w - 26.07).abs() < 1e-9),
            ref other => panic!("{other:?}"),
        }
        assert_eq!(ds.observations["COM-QN-7"].value.value, Value::Number(7.9));
        assert_eq!(ds.rubric.len(), 1);
        assert_eq!(ds.categories[&Category::Com], 14.6587);
    }

    #[test]
    fn text_round_trip() {
        let schema = builtin_schema();
        let ds = load_program_dataset(SMALL, &schema).unwrap();
        assert_eq!(load_program_dataset(&ds.to_text(), &schema).unwrap(), ds);
    }

    #[test]
    fn duplicate_rows_are_rejected() {
        let src = "program|X\nindicator_id|raw_value|unit\nFAO-QN-2|$5,000|\nFAO-QN-2|$6,000|\n";
        assert_eq!(
            load_program_dataset(src, &builtin_schema()),
            Err(Error::DuplicateIndicator("FAO-QN-2".into()))
        );
    }

    #[test]
    fn unknown_indicator_is_rejected() {
        let src = "program|X\nindicator_id|raw_value|unit\nFAO-QN-99|1|\n";
        assert_eq!(
            load_program_dataset(src, &builtin_schema()),
            Err(Error::UnknownIndicator("FAO-QN-99".into()))
        );
    }

    #[test]
    fn rubric_score_out_of_range() {
        let src = "program|X\nindicator_id|raw_value|unit\n[rubric]\ncriterion_id|score\ngovernance|6\n";
        assert!(matches!(
            load_program_dataset(src, &builtin_schema()),
            Err(Error::RubricRange { score: 6, .. })
        ));
    }

    #[test]
    fn structural_errors() {
        let schema = builtin_schema();
        assert!(matches!(
            load_program_dataset("indicator_id|raw_value|unit\n", &schema),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            load_program_dataset("program|X\n", &schema),
            Err(Error::Parse { .. })
        ));
        let rollup = "program|X\nindicator_id|raw_value|unit\nFAO-QN|3|\n";
        assert!(matches!(load_program_dataset(rollup, &schema), Err(Error::Schema { .. })));
        let conflict = "program|X\nindicator_id|raw_value|unit\nCOM-QN-7|7.9 weeks|months\n";
        assert!(matches!(load_program_dataset(conflict, &schema), Err(Error::Unit { .. })));
        let bad_cell = "program|X\nindicator_id|raw_value|unit\nPSO-QN-3|DAO|\n";
        assert!(matches!(load_program_dataset(bad_cell, &schema), Err(Error::Value { .. })));
    }
}
