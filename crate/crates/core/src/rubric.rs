//! Self-assessment instrument: criterion template, response files and the
//! grouping of answers into per-category unit scores.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::schema::Category;
use crate::scoring::rubric_to_unit;
use crate::table::{self, Item, Record};

pub const SCALE_MIN: u8 = 1;
pub const SCALE_MAX: u8 = 5;
pub const SCALE_LOW_ANCHOR: &str = "Low";
pub const SCALE_HIGH_ANCHOR: &str = "High";

pub const TEMPLATE_PRAGMA: &str = "gmi-rubric-template";
pub const TEMPLATE_HEADER: [&str; 4] = ["criterion_id", "category", "name", "prompt"];
pub const RESPONSES_PRAGMA: &str = "gmi-responses";
pub const RESPONSES_HEADER: [&str; 2] = ["criterion_id", "score"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Criterion {
    pub id: String,
    pub category: Category,
    pub name: String,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RubricTemplate {
    criteria: Vec<Criterion>,
}

/// Answers keyed by criterion id. Scores are already range checked.
pub type Responses = BTreeMap<String, u8>;

impl RubricTemplate {
    pub fn new(criteria: Vec<Criterion>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for c in &criteria {
            if c.id.is_empty() || c.id.chars().any(char::is_whitespace) {
                return Err(Error::schema(&c.id, "criterion id must be a non-empty token"));
            }
            for field in [&c.id, &c.name, &c.prompt] {
                table::check_field(field).map_err(|m| Error::schema(&c.id, m))?;
            }
            if !seen.insert(c.id.as_str()) {
                return Err(Error::DuplicateCriterion(c.id.clone()));
            }
        }
        Ok(RubricTemplate { criteria })
    }

    pub fn criteria(&self) -> &[Criterion] {
        &self.criteria
    }

    pub fn get(&self, id: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.id == id)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("#!{TEMPLATE_PRAGMA} 1\n{}\n", TEMPLATE_HEADER.join("|"));
        for c in &self.criteria {
            out.push_str(&format!("{}|{}|{}|{}\n", c.id, c.category, c.name, c.prompt));
        }
        out
    }

    /// The blank instrument in response-file format.
    pub fn blank_responses(&self) -> String {
        let mut out = format!("#!{RESPONSES_PRAGMA} 1\n");
        out.push_str(&format!(
            "# Score each criterion from {SCALE_MIN} ({SCALE_LOW_ANCHOR}) to {SCALE_MAX} ({SCALE_HIGH_ANCHOR}). Leave a score blank to skip it.\n"
        ));
        out.push_str(&RESPONSES_HEADER.join("|"));
        out.push('\n');
        for c in &self.criteria {
            out.push_str(&format!("# {} [{}]: {}\n", c.name, c.category, c.prompt));
            out.push_str(&format!("{}|\n", c.id));
        }
        out
    }
}

pub fn builtin_template() -> RubricTemplate {
    let rows = [
        (
            "clarity-of-objectives",
            Category::Gov,
            "Clarity of Objectives",
            "Are the program's goals stated clearly enough for applicants and the community to act on?",
        ),
        (
            "alignment-with-ecosystem-needs",
            Category::Fao,
            "Alignment with Ecosystem Needs",
            "Does the program fund work that answers the current needs of its ecosystem?",
        ),
        (
            "diversity-of-supported-projects",
            Category::Fao,
            "Diversity of Supported Projects",
            "How broad is the range of verticals among the funded projects?",
        ),
        (
            "organizational-clarity",
            Category::Pso,
            "Organizational Clarity",
            "Are the program's roles, structure and processes clear and efficient?",
        ),
        (
            "governance",
            Category::Gov,
            "Governance",
            "How sound are the decision-making processes and the governance structure?",
        ),
        (
            "community-participation-and-engagement",
            Category::Com,
            "Community Participation and Engagement",
            "How actively is the community involved in the grant process?",
        ),
    ];
    let criteria = rows
        .into_iter()
        .map(|(id, category, name, prompt)| Criterion {
            id: id.into(),
            category,
            name: name.into(),
            prompt: prompt.into(),
        })
        .collect();
    RubricTemplate::new(criteria).expect("builtin template is valid")
}

pub fn load_template(source: &str) -> Result<RubricTemplate> {
    let mut header_seen = false;
    let mut criteria = Vec::new();
    for (line, item) in table::items(source) {
        let rec = match item {
            Item::Pragma(_) => continue,
            Item::Section(name) => {
                return Err(Error::parse(line, format!("unexpected section [{name}]")))
            }
            Item::Record(rec) => rec,
        };
        if !header_seen {
            if rec.fields != TEMPLATE_HEADER {
                return Err(Error::parse(
                    line,
                    format!("expected header {}", TEMPLATE_HEADER.join("|")),
                ));
            }
            header_seen = true;
            continue;
        }
        if rec.fields.len() != TEMPLATE_HEADER.len() {
            return Err(Error::parse(line, "expected 4 fields"));
        }
        let category = Category::from_key(rec.fields[1])
            .ok_or_else(|| Error::parse(line, format!("invalid category {:?}", rec.fields[1])))?;
        criteria.push(Criterion {
            id: rec.fields[0].to_string(),
            category,
            name: rec.fields[2].to_string(),
            prompt: rec.fields[3].to_string(),
        });
    }
    if !header_seen {
        return Err(Error::parse(0, "missing header row"));
    }
    RubricTemplate::new(criteria)
}

/// Parses one `criterion_id|score` row. A blank score means unanswered.
pub(crate) fn parse_response_row(rec: &Record<'_>) -> Result<Option<(String, u8)>> {
    if rec.fields.len() != 2 {
        return Err(Error::parse(rec.line, "expected criterion_id|score"));
    }
    let id = rec.fields[0];
    if id.is_empty() {
        return Err(Error::parse(rec.line, "empty criterion id"));
    }
    let raw = rec.fields[1];
    if raw.is_empty() {
        return Ok(None);
    }
    let score: i64 = raw
        .parse()
        .map_err(|_| Error::parse(rec.line, format!("score {raw:?} is not an integer")))?;
    let score = check_score(id, score)?;
    Ok(Some((id.to_string(), score)))
}

pub(crate) fn check_score(criterion: &str, score: i64) -> Result<u8> {
    if (i64::from(SCALE_MIN)..=i64::from(SCALE_MAX)).contains(&score) {
        Ok(score as u8)
    } else {
        Err(Error::RubricRange {
            criterion: criterion.to_string(),
            score,
        })
    }
}

pub(crate) fn insert_response(responses: &mut Responses, id: String, score: u8) -> Result<()> {
    if responses.contains_key(&id) {
        return Err(Error::DuplicateCriterion(id));
    }
    responses.insert(id, score);
    Ok(())
}

/// Reads a filled-in response file.
pub fn load_responses(source: &str) -> Result<Responses> {
    let mut header_seen = false;
    let mut responses = Responses::new();
    for (line, item) in table::items(source) {
        let rec = match item {
            Item::Pragma(_) => continue,
            Item::Section(name) => {
                return Err(Error::parse(line, format!("unexpected section [{name}]")))
            }
            Item::Record(rec) => rec,
        };
        if !header_seen {
            if rec.fields != RESPONSES_HEADER {
                return Err(Error::parse(line, "expected header criterion_id|score"));
            }
            header_seen = true;
            continue;
        }
        if let Some((id, score)) = parse_response_row(&rec)? {
            insert_response(&mut responses, id, score)?;
        }
    }
    if !header_seen {
        return Err(Error::parse(0, "missing header row"));
    }
    Ok(responses)
}

/// Groups answers by the category of their criterion as unit-interval scores.
/// Unanswered criteria contribute nothing.
pub fn collect_responses(
    template: &RubricTemplate,
    answers: &BTreeMap<String, i64>,
) -> Result<BTreeMap<Category, Vec<f64>>> {
    let mut grouped: BTreeMap<Category, Vec<f64>> = BTreeMap::new();
    // Template order keeps each category's list independent of answer order.
    for id in answers.keys() {
        if template.get(id).is_none() {
            return Err(Error::UnknownCriterion(id.clone()));
        }
    }
    for criterion in template.criteria() {
        if let Some(&score) = answers.get(&criterion.id) {
            let unit = rubric_to_unit(score).map_err(|_| Error::RubricRange {
                criterion: criterion.id.clone(),
                score,
            })?;
            grouped.entry(criterion.category).or_default().push(unit);
        }
    }
    Ok(grouped)
}

/// `collect_responses` over already range-checked answers.
pub fn collect_checked(
    template: &RubricTemplate,
    responses: &Responses,
) -> Result<BTreeMap<Category, Vec<f64>>> {
    let answers = responses
        .iter()
        .map(|(k, &v)| (k.clone(), i64::from(v)))
        .collect();
    collect_responses(template, &answers)
}
