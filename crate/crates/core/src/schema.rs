//! Indicator registry: the six categories, indicator definitions and the
//! `|`-delimited schema file format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{self, Item};

pub const SCHEMA_PRAGMA: &str = "gmi-schema";
pub const SCHEMA_HEADER: [&str; 7] = [
    "id",
    "category",
    "kind",
    "data_type",
    "unit",
    "direction",
    "description",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "FAO")]
    Fao,
    #[serde(rename = "PSO")]
    Pso,
    #[serde(rename = "GOV")]
    Gov,
    #[serde(rename = "EFI")]
    Efi,
    #[serde(rename = "TAC")]
    Tac,
    #[serde(rename = "COM")]
    Com,
}

impl Category {
    /// Report order: FAO, PSO, GOV, EFI, TAC, COM.
    pub const ALL: [Category; 6] = [
        Category::Fao,
        Category::Pso,
        Category::Gov,
        Category::Efi,
        Category::Tac,
        Category::Com,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Category::Fao => "FAO",
            Category::Pso => "PSO",
            Category::Gov => "GOV",
            Category::Efi => "EFI",
            Category::Tac => "TAC",
            Category::Com => "COM",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Category::Fao => "Focus Areas and Objectives",
            Category::Pso => "Program Structure and Organisation",
            Category::Gov => "Governance",
            Category::Efi => "Effectiveness and Impact",
            Category::Tac => "Transparency and Accountability",
            Category::Com => "Community Engagement",
        }
    }

    /// Id of the synthetic roll-up indicator, e.g. `FAO-QN`.
    pub fn rollup_id(self) -> String {
        format!("{}-QN", self.code())
    }

    /// Id of the rubric indicator, e.g. `FAO-QL`.
    pub fn rubric_id(self) -> String {
        format!("{}-QL", self.code())
    }

    /// Accepts a bare code (`GOV`) or a roll-up/rubric id (`GOV-QN`, `COM-QL`).
    pub fn from_key(key: &str) -> Option<Category> {
        let key = key.trim();
        let code = key
            .strip_suffix("-QN")
            .or_else(|| key.strip_suffix("-QL"))
            .unwrap_or(key);
        code.parse().ok()
    }
}

impl FromStr for Category {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        Category::ALL
            .into_iter()
            .find(|c| c.code().eq_ignore_ascii_case(s.trim()))
            .ok_or(())
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndicatorKind {
    Quantitative,
    Rubric,
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DataType {
    Numeric,
    Rational,
    Binary,
    Text,
    IsoAlpha3,
}

impl DataType {
    pub fn is_textual(self) -> bool {
        matches!(self, DataType::Text | DataType::IsoAlpha3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    HigherBetter,
    LowerBetter,
    NonScorable,
}

macro_rules! keyword_enum {
    ($ty:ty { $($variant:path => $text:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($variant => $text),+ }
            }
        }
        impl FromStr for $ty {
            type Err = ();
            fn from_str(s: &str) -> std::result::Result<Self, ()> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($text => Ok($variant),)+
                    _ => Err(()),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

keyword_enum!(IndicatorKind {
    IndicatorKind::Quantitative => "quantitative",
    IndicatorKind::Rubric => "rubric",
    IndicatorKind::Synthetic => "synthetic",
});

keyword_enum!(DataType {
    DataType::Numeric => "numeric",
    DataType::Rational => "rational",
    DataType::Binary => "binary",
    DataType::Text => "text",
    DataType::IsoAlpha3 => "iso-alpha-3",
});

keyword_enum!(Direction {
    Direction::HigherBetter => "higher-better",
    Direction::LowerBetter => "lower-better",
    Direction::NonScorable => "non-scorable",
});

/// Direction column keyword for a scorable indicator whose polarity was not
/// chosen by anyone; it scores as higher-better.
pub const DEFAULT_DIRECTION: &str = "default";

/// Data type / unit placeholder used by synthetic roll-ups.
pub const NOT_APPLICABLE: &str = "n.a.";

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorDef {
    pub id: String,
    pub category: Category,
    pub kind: IndicatorKind,
    /// `None` only for synthetic roll-ups.
    pub data_type: Option<DataType>,
    pub unit: String,
    pub direction: Direction,
    /// False when the direction is the implicit higher-better default.
    pub direction_explicit: bool,
    pub description: String,
}

impl IndicatorDef {
    pub fn is_scorable(&self) -> bool {
        self.kind == IndicatorKind::Quantitative && self.direction != Direction::NonScorable
    }

    pub fn is_observable(&self) -> bool {
        self.kind == IndicatorKind::Quantitative
    }

    fn direction_keyword(&self) -> &'static str {
        if self.direction == Direction::HigherBetter && !self.direction_explicit {
            DEFAULT_DIRECTION
        } else {
            self.direction.as_str()
        }
    }

    fn validate(&self) -> Result<()> {
        let err = |msg: &str| Err(Error::schema(&self.id, msg));
        let caps = id_pattern()
            .captures(&self.id)
            .ok_or_else(|| Error::schema(&self.id, "id does not match CAT-(QN|QL|AUX)(-n)?"))?;
        if caps[1] != *self.category.code() {
            return err("id prefix does not match category");
        }
        let band = &caps[2];
        let numbered = caps.get(3).is_some();
        match self.kind {
            IndicatorKind::Synthetic => {
                if band != "QN" || numbered {
                    return err("synthetic roll-up ids take the form CAT-QN");
                }
                if self.direction != Direction::NonScorable {
                    return err("synthetic roll-ups are non-scorable");
                }
            }
            IndicatorKind::Rubric => {
                if band != "QL" || numbered {
                    return err("rubric ids take the form CAT-QL");
                }
                if self.unit != "scoring" || self.data_type != Some(DataType::Numeric) {
                    return err("rubric indicators must be numeric with unit scoring");
                }
            }
            IndicatorKind::Quantitative => {
                if band == "QL" || !numbered {
                    return err("quantitative ids take the form CAT-QN-n or CAT-AUX-n");
                }
            }
        }
        if self.kind != IndicatorKind::Synthetic && self.data_type.is_none() {
            return err("only synthetic roll-ups may omit a data type");
        }
        if let Some(dt) = self.data_type {
            if dt.is_textual() && self.direction != Direction::NonScorable {
                return err("text and iso-alpha-3 indicators must be non-scorable");
            }
        }
        if self.direction == Direction::LowerBetter && !self.direction_explicit {
            return err("lower-better is always an explicit direction");
        }
        for field in [&self.unit, &self.description] {
            table::check_field(field).map_err(|m| Error::schema(&self.id, m))?;
        }
        Ok(())
    }
}

fn id_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(FAO|PSO|GOV|EFI|TAC|COM)-(QN|QL|AUX)(-[1-9][0-9]*)?$").unwrap())
}

/// A validated indicator registry. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    version: String,
    indicators: Vec<IndicatorDef>,
    index: BTreeMap<String, usize>,
}

impl Schema {
    pub fn new(version: impl Into<String>, indicators: Vec<IndicatorDef>) -> Result<Schema> {
        let version = version.into();
        if version.is_empty() || version.chars().any(char::is_whitespace) {
            return Err(Error::schema("<schema>", "version must be a single non-empty token"));
        }
        let mut index = BTreeMap::new();
        for (pos, def) in indicators.iter().enumerate() {
            def.validate()?;
            if index.insert(def.id.clone(), pos).is_some() {
                return Err(Error::schema(&def.id, "duplicate indicator id"));
            }
        }
        for def in &indicators {
            if def.kind != IndicatorKind::Synthetic && !index.contains_key(&def.category.rollup_id()) {
                return Err(Error::schema(
                    &def.id,
                    format!("category {} has no synthetic roll-up", def.category),
                ));
            }
        }
        let scorable: BTreeSet<Category> = indicators
            .iter()
            .filter(|d| d.is_scorable() || d.kind == IndicatorKind::Rubric)
            .map(|d| d.category)
            .collect();
        if let Some(c) = Category::ALL.into_iter().find(|c| !scorable.contains(c)) {
            return Err(Error::schema(c.rollup_id(), "category has no scorable indicator"));
        }
        Ok(Schema {
            version,
            indicators,
            index,
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn indicators(&self) -> &[IndicatorDef] {
        &self.indicators
    }

    pub fn get(&self, id: &str) -> Option<&IndicatorDef> {
        self.index.get(id).map(|&i| &self.indicators[i])
    }

    pub fn resolve(&self, id: &str) -> Result<&IndicatorDef> {
        self.get(id)
            .ok_or_else(|| Error::UnknownIndicator(id.to_string()))
    }

    pub fn in_category(&self, category: Category) -> impl Iterator<Item = &IndicatorDef> {
        self.indicators.iter().filter(move |d| d.category == category)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("#!{SCHEMA_PRAGMA} {}\n", self.version);
        out.push_str(&SCHEMA_HEADER.join("|"));
        out.push('\n');
        for d in &self.indicators {
            let data_type = d.data_type.map_or(NOT_APPLICABLE, DataType::as_str);
            out.push_str(&format!(
                "{}|{}|{}|{}|{}|{}|{}\n",
                d.id,
                d.category,
                d.kind,
                data_type,
                d.unit,
                d.direction_keyword(),
                d.description
            ));
        }
        out
    }
}

/// Reads and validates a schema document.
pub fn load_schema(source: &str) -> Result<Schema> {
    let mut version = None;
    let mut header_seen = false;
    let mut indicators = Vec::new();
    for (line, item) in table::items(source) {
        match item {
            Item::Pragma(p) => {
                if let Some(v) = p.strip_prefix(SCHEMA_PRAGMA) {
                    if version.is_some() {
                        return Err(Error::parse(line, "repeated schema pragma"));
                    }
                    version = Some(v.trim().to_string());
                }
            }
            Item::Section(name) => {
                return Err(Error::parse(line, format!("unexpected section [{name}]")));
            }
            Item::Record(rec) => {
                if !header_seen {
                    if rec.fields != SCHEMA_HEADER {
                        return Err(Error::parse(
                            line,
                            format!("expected header {}", SCHEMA_HEADER.join("|")),
                        ));
                    }
                    header_seen = true;
                    continue;
                }
                indicators.push(parse_indicator(line, &rec.fields)?);
            }
        }
    }
    if !header_seen {
        return Err(Error::parse(0, "missing header row"));
    }
    let version = version.ok_or_else(|| Error::parse(0, format!("missing #!{SCHEMA_PRAGMA} pragma")))?;
    Schema::new(version, indicators)
}

fn parse_indicator(line: usize, fields: &[&str]) -> Result<IndicatorDef> {
    if fields.len() != SCHEMA_HEADER.len() {
        return Err(Error::parse(
            line,
            format!("expected {} fields, found {}", SCHEMA_HEADER.len(), fields.len()),
        ));
    }
    let bad = |what: &str, value: &str| Error::parse(line, format!("invalid {what} {value:?}"));
    let id = fields[0].to_string();
    let category: Category = fields[1].parse().map_err(|_| bad("category", fields[1]))?;
    let kind: IndicatorKind = fields[2].parse().map_err(|_| bad("kind", fields[2]))?;
    let data_type = if fields[3] == NOT_APPLICABLE {
        None
    } else {
        Some(fields[3].parse::<DataType>().map_err(|_| bad("data_type", fields[3]))?)
    };
    let (direction, direction_explicit) = if fields[5].eq_ignore_ascii_case(DEFAULT_DIRECTION) {
        (Direction::HigherBetter, false)
    } else {
        let d: Direction = fields[5].parse().map_err(|_| bad("direction", fields[5]))?;
        (d, d != Direction::NonScorable)
    };
    Ok(IndicatorDef {
        id,
        category,
        kind,
        data_type,
        unit: fields[4].to_string(),
        direction,
        direction_explicit,
        description: fields[6].to_string(),
    })
}

/// Schema version of the builtin registry.
pub const BUILTIN_VERSION: &str = "1";

type Row = (&'static str, IndicatorKind, Option<DataType>, &'static str, &'static str);

/// The builtin registry. Scorable indicators carry the implicit default
/// direction; AUX ids hold dataset rows with no numbered counterpart.
pub fn builtin_schema() -> Schema {
    use DataType::*;
    use IndicatorKind::*;
    const SYN: Row = ("", Synthetic, None, NOT_APPLICABLE, "");
    const TEXT: Option<DataType> = Some(Text);
    const NUM: Option<DataType> = Some(Numeric);
    const RAT: Option<DataType> = Some(Rational);
    const BIN: Option<DataType> = Some(Binary);

    let rows: [(Category, &[Row]); 6] = [
        (
            Category::Fao,
            &[
                SYN,
                ("FAO-QL", Rubric, NUM, "scoring", "Rubric Scoring Focus Areas and Objectives"),
                ("FAO-QN-2", Quantitative, NUM, "USD", "Minimum Grant Size"),
                ("FAO-QN-3", Quantitative, NUM, "USD", "Maximum Grant Size"),
                ("FAO-QN-6", Quantitative, NUM, "weeks", "Evaluation Timeframe"),
                ("FAO-QN-7", Quantitative, TEXT, NOT_APPLICABLE, "Grant Platform"),
                ("FAO-QN-8", Quantitative, TEXT, NOT_APPLICABLE, "Link to Grant Round(s)"),
                ("FAO-QN-9", Quantitative, NUM, "scoring", "Grant types"),
                ("FAO-QN-10", Quantitative, NUM, "scoring", "Funding Type"),
                ("FAO-AUX-1", Quantitative, NUM, "USD", "Average Grant Size"),
                ("FAO-AUX-2", Quantitative, TEXT, NOT_APPLICABLE, "Funding Type (simplified)"),
                ("FAO-AUX-3", Quantitative, NUM, "USD", "Market capitalisation of funding asset at round start"),
                ("FAO-AUX-4", Quantitative, NUM, "USD", "Market capitalisation of funding asset at round start (repeated row)"),
            ],
        ),
        (
            Category::Pso,
            &[
                SYN,
                ("PSO-QL", Rubric, NUM, "scoring", "Rubric Scoring Program Structure and Organisation"),
                ("PSO-QN-1", Quantitative, NUM, "scoring", "Origin of Funds"),
                ("PSO-QN-2", Quantitative, BIN, "scoring", "Vesting Period for Fund Allocation"),
                ("PSO-QN-3", Quantitative, NUM, "scoring", "Organizational Structure of Grantor"),
                ("PSO-QN-4", Quantitative, NUM, "scoring", "Grant Program Principal"),
                ("PSO-QN-5", Quantitative, NUM, "signatories", "Grant Program Agents"),
                ("PSO-QN-6", Quantitative, TEXT, NOT_APPLICABLE, "Governance Structure"),
                ("PSO-AUX-1", Quantitative, TEXT, NOT_APPLICABLE, "Organizational Structure of Grantor (as described)"),
                ("PSO-AUX-2", Quantitative, TEXT, NOT_APPLICABLE, "Organizational Structure of Grantor (repeated row)"),
                ("PSO-AUX-3", Quantitative, TEXT, NOT_APPLICABLE, "Grant Program Principal (as described)"),
                ("PSO-AUX-4", Quantitative, TEXT, NOT_APPLICABLE, "Governance Structure (repeated row)"),
            ],
        ),
        (
            Category::Gov,
            &[
                SYN,
                ("GOV-QL", Rubric, NUM, "scoring", "Rubric Scoring Governance"),
                ("GOV-QN-1", Quantitative, NUM, "scoring", "Grant Program Objective"),
                ("GOV-QN-3", Quantitative, NUM, "scoring", "Existence of Program Objective Description"),
                ("GOV-QN-4", Quantitative, TEXT, NOT_APPLICABLE, "Link to Program Objective"),
            ],
        ),
        (
            Category::Efi,
            &[
                SYN,
                ("EFI-QL", Rubric, NUM, "scoring", "Rubric Scoring Effectiveness and Impact"),
                ("EFI-QN-1", Quantitative, BIN, "scoring", "Evaluation Criteria Public"),
                ("EFI-QN-2", Quantitative, BIN, "scoring", "Evaluation Shared with Applicants"),
                ("EFI-QN-3", Quantitative, TEXT, NOT_APPLICABLE, "Reference to Evaluation Criteria"),
                ("EFI-QN-4", Quantitative, BIN, "scoring", "Grant process explained"),
                ("EFI-QN-6", Quantitative, Some(IsoAlpha3), NOT_APPLICABLE, "Domicile Foundation"),
                ("EFI-QN-8", Quantitative, NUM, "scoring", "Program Audit"),
            ],
        ),
        (
            Category::Tac,
            &[
                SYN,
                ("TAC-QL", Rubric, NUM, "scoring", "Rubric Scoring Transparency and Accountability"),
                ("TAC-QN-4", Quantitative, RAT, "conversion rate", "Average Application to Allocation share"),
                ("TAC-QN-5", Quantitative, BIN, "scoring", "Operated by a Service Provider"),
                ("TAC-QN-6", Quantitative, RAT, "conversion rate", "Program Manager to Applicant Ratio"),
            ],
        ),
        (
            Category::Com,
            &[
                SYN,
                ("COM-QL", Rubric, NUM, "scoring", "Rubric Scoring Community Engagement"),
                ("COM-QN-1", Quantitative, NUM, "headcount", "Minimum Applicant Count per Round"),
                ("COM-QN-2", Quantitative, NUM, "headcount", "Maximum Applicant Count per Round"),
                ("COM-QN-4", Quantitative, NUM, "grant count", "Minimum Number of Grants Allocated per Round"),
                ("COM-QN-5", Quantitative, NUM, "grant count", "Maximum Number of Grants Allocated per Round"),
                ("COM-QN-7", Quantitative, NUM, "weeks", "Minimum Grant Duration"),
                ("COM-QN-8", Quantitative, NUM, "weeks", "Maximum Grant Duration"),
                ("COM-QN-11", Quantitative, RAT, "years", "Time of Existence"),
                ("COM-QN-12", Quantitative, NUM, "rounds", "Round Count since Inception"),
                ("COM-QN-13", Quantitative, NUM, "tracks", "Number of Tracks per Round"),
                ("COM-QN-14", Quantitative, RAT, "USD", "Overall Budget since Inception"),
                ("COM-QN-19", Quantitative, RAT, "USD", "Operations Budget per Round"),
                ("COM-QN-20", Quantitative, RAT, "ratio", "Operations Budget to Round Budget Ratio"),
                ("COM-QN-21", Quantitative, NUM, "headcount", "Program Management Team Size"),
                ("COM-QN-22", Quantitative, NUM, "scoring", "Impact Measurement"),
                ("COM-QN-23", Quantitative, BIN, "scoring", "Grant Size Standardisation"),
                ("COM-AUX-1", Quantitative, NUM, "headcount", "Average Applicant Count per Round"),
                ("COM-AUX-2", Quantitative, NUM, "grant count", "Average Number of Grants Allocated per Round"),
                ("COM-AUX-3", Quantitative, NUM, "weeks", "Average Grant Duration"),
            ],
        ),
    ];

    let mut defs = Vec::new();
    for (category, entries) in rows {
        for &(id, kind, data_type, unit, description) in entries {
            let def = if kind == Synthetic {
                IndicatorDef {
                    id: category.rollup_id(),
                    category,
                    kind,
                    data_type: None,
                    unit: NOT_APPLICABLE.to_string(),
                    direction: Direction::NonScorable,
                    direction_explicit: false,
                    description: category.label().to_string(),
                }
            } else {
                let textual = data_type.is_some_and(DataType::is_textual);
                // The second market-cap row repeats the first; scoring both would double count it.
                let repeated = description.ends_with("(repeated row)");
                IndicatorDef {
                    id: id.to_string(),
                    category,
                    kind,
                    data_type,
                    unit: unit.to_string(),
                    direction: if textual || repeated {
                        Direction::NonScorable
                    } else {
                        Direction::HigherBetter
                    },
                    direction_explicit: false,
                    description: description.to_string(),
                }
            };
            defs.push(def);
        }
    }
    Schema::new(BUILTIN_VERSION, defs).expect("builtin schema is valid")
}
