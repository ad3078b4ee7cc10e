//! Typed observation values and the cell grammar.
//!
//! Cells come in many shapes: `$276m`, `71.4M ARB`, `<50K OP`, `1:28`,
//! `2 (milestones)`, `7.9 weeks`, `n.a.`. Parsing is driven by the declared
//! data type of the indicator the cell belongs to.

use std::fmt;
use std::sync::OnceLock;

use isocountry::CountryCode;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{DataType, IndicatorDef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Qualifier {
    Exact,
    ApproximateLowerBound,
    ApproximateUpperBound,
    Unspecified,
}

impl Qualifier {
    pub fn as_str(self) -> &'static str {
        match self {
            Qualifier::Exact => "exact",
            Qualifier::ApproximateLowerBound => "approximate-lower-bound",
            Qualifier::ApproximateUpperBound => "approximate-upper-bound",
            Qualifier::Unspecified => "unspecified",
        }
    }

    pub fn is_approximate(self) -> bool {
        matches!(
            self,
            Qualifier::ApproximateLowerBound | Qualifier::ApproximateUpperBound
        )
    }

    fn prefix(self) -> &'static str {
        match self {
            Qualifier::ApproximateLowerBound => ">",
            Qualifier::ApproximateUpperBound => "<",
            _ => "",
        }
    }
}

impl fmt::Display for Qualifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    /// Strictly positive.
    Ratio(f64),
    /// Always USD.
    Money(f64),
    TokenAmount { amount: f64, symbol: String },
    Binary(u8),
    /// ISO 3166-1 alpha-3 code.
    Country(String),
    Text(String),
    Missing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedValue {
    pub value: Value,
    pub qualifier: Qualifier,
}

impl TypedValue {
    pub fn missing() -> Self {
        TypedValue {
            value: Value::Missing,
            qualifier: Qualifier::Unspecified,
        }
    }

    pub fn exact(value: Value) -> Self {
        TypedValue {
            value,
            qualifier: Qualifier::Exact,
        }
    }

    pub fn is_missing(&self) -> bool {
        self.value == Value::Missing
    }

    /// Magnitude of numeric variants; `None` for text, country and missing.
    pub fn magnitude(&self) -> Option<f64> {
        match &self.value {
            Value::Number(x) | Value::Ratio(x) | Value::Money(x) => Some(*x),
            Value::TokenAmount { amount, .. } => Some(*amount),
            Value::Binary(b) => Some(f64::from(*b)),
            _ => None,
        }
    }

    /// Whether this variant may be stored under an indicator of `data_type`.
    pub fn fits(&self, data_type: DataType) -> bool {
        matches!(
            (&self.value, data_type),
            (Value::Missing, _)
                | (
                    Value::Number(_) | Value::Ratio(_) | Value::Money(_) | Value::TokenAmount { .. },
                    DataType::Numeric | DataType::Rational,
                )
                | (Value::Binary(_), DataType::Binary)
                | (Value::Text(_), DataType::Text)
                | (Value::Country(_), DataType::IsoAlpha3)
        )
    }
}

/// Canonical text of a value. `parse_value(&format_value(v), def)` yields `v`
/// back for every non-missing value that fits `def`'s data type.
pub fn format_value(v: &TypedValue) -> String {
    let q = v.qualifier.prefix();
    match &v.value {
        Value::Number(x) => format!("{q}{x}"),
        Value::Ratio(x) => format!("{q}{x}:1"),
        Value::Money(x) => format!("{q}${x}"),
        Value::TokenAmount { amount, symbol } => format!("{q}{amount} {symbol}"),
        Value::Binary(b) => b.to_string(),
        Value::Country(code) => code.clone(),
        Value::Text(s) => s.clone(),
        Value::Missing => "n.a.".to_string(),
    }
}

impl fmt::Display for TypedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_value(self))
    }
}

/// Result of parsing one cell: the value plus what the cell said about itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedValue {
    pub value: TypedValue,
    /// Time unit written inside the cell (`7.9 weeks`), normalized to plural.
    pub unit: Option<String>,
    /// Leading-numeral categorical code such as `2 (milestones)`.
    pub coded: bool,
}

impl ParsedValue {
    fn plain(value: TypedValue) -> Self {
        ParsedValue {
            value,
            unit: None,
            coded: false,
        }
    }
}

const MISSING_SENTINELS: [&str; 3] = ["n.a.", "tbc", ""];
const LINK_PLACEHOLDER: &str = "link";

fn number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?x)^
            (?P<num>-?(?:\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?|\.\d+))
            (?P<suffix>[kKmMbB])?
            (?:\s+(?P<rest>.+))?
            $",
        )
        .unwrap()
    })
}

fn ratio_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^(?P<a>\d[\d,]*(?:\.\d+)?|\.\d+)\s*:\s*(?P<b>\d[\d,]*(?:\.\d+)?|\.\d+)$").unwrap()
    })
}

fn symbol_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[A-Za-z][A-Za-z0-9]{1,9}$").unwrap())
}

/// Normalizes a time unit word to `weeks`, `months` or `years`.
pub fn time_unit(word: &str) -> Option<&'static str> {
    match word.trim().to_ascii_lowercase().as_str() {
        "week" | "weeks" | "wk" | "wks" => Some("weeks"),
        "month" | "months" | "mo" => Some("months"),
        "year" | "years" | "yr" | "yrs" => Some("years"),
        _ => None,
    }
}

struct Amount {
    value: f64,
    scaled: bool,
    rest: Option<String>,
}

fn parse_amount(s: &str) -> Option<Amount> {
    let caps = number_re().captures(s)?;
    let digits = caps["num"].replace(',', "");
    let base: f64 = digits.parse().ok()?;
    let scale = match caps.name("suffix").map(|m| m.as_str().to_ascii_lowercase()) {
        None => 1.0,
        Some(s) if s == "k" => 1e3,
        Some(s) if s == "m" => 1e6,
        Some(_) => 1e9,
    };
    Some(Amount {
        value: base * scale,
        scaled: scale != 1.0,
        rest: caps.name("rest").map(|m| m.as_str().trim().to_string()),
    })
}

fn split_qualifier(s: &str) -> (Qualifier, &str) {
    if let Some(rest) = s.strip_prefix('<') {
        (Qualifier::ApproximateUpperBound, rest.trim_start())
    } else if let Some(rest) = s.strip_prefix('>') {
        (Qualifier::ApproximateLowerBound, rest.trim_start())
    } else {
        (Qualifier::Exact, s)
    }
}

/// Parses one raw cell against the indicator it belongs to.
pub fn parse_value(raw: &str, def: &IndicatorDef) -> Result<ParsedValue> {
    let fail = || Error::Value {
        raw: raw.to_string(),
        indicator: def.id.clone(),
    };
    let data_type = def.data_type.ok_or_else(fail)?;
    let s = raw.trim();
    let lower = s.to_ascii_lowercase();
    if MISSING_SENTINELS.contains(&lower.as_str()) {
        return Ok(ParsedValue::plain(TypedValue::missing()));
    }
    match data_type {
        DataType::Text => Ok(ParsedValue::plain(TypedValue {
            value: Value::Text(s.to_string()),
            qualifier: Qualifier::Unspecified,
        })),
        _ if lower == LINK_PLACEHOLDER => Ok(ParsedValue::plain(TypedValue::missing())),
        DataType::IsoAlpha3 => country_code(s)
            .map(|code| {
                ParsedValue::plain(TypedValue {
                    value: Value::Country(code),
                    qualifier: Qualifier::Unspecified,
                })
            })
            .ok_or_else(fail),
        DataType::Binary => {
            let bit = match lower.as_str() {
                "0" | "no" => 0,
                "1" | "yes" => 1,
                _ => return Err(fail()),
            };
            Ok(ParsedValue::plain(TypedValue::exact(Value::Binary(bit))))
        }
        DataType::Numeric | DataType::Rational => parse_quantity(s).ok_or_else(fail),
    }
}

fn parse_quantity(s: &str) -> Option<ParsedValue> {
    let (qualifier, body) = split_qualifier(s);
    let with = |value: Value| TypedValue { value, qualifier };

    if let Some(caps) = ratio_re().captures(body) {
        let a: f64 = caps["a"].replace(',', "").parse().ok()?;
        let b: f64 = caps["b"].replace(',', "").parse().ok()?;
        let ratio = a / b;
        if !(ratio.is_finite() && ratio > 0.0) {
            return None;
        }
        return Some(ParsedValue::plain(with(Value::Ratio(ratio))));
    }

    if let Some(money) = body.strip_prefix('$') {
        let amount = parse_amount(money.trim_start())?;
        if amount.value < 0.0 {
            return None;
        }
        // A trailing token symbol after a dollar amount is kept only in the raw cell.
        if let Some(rest) = &amount.rest {
            if !symbol_re().is_match(rest) {
                return None;
            }
        }
        return Some(ParsedValue::plain(with(Value::Money(amount.value))));
    }

    let amount = parse_amount(body)?;
    if !amount.value.is_finite() {
        return None;
    }
    let Some(rest) = amount.rest else {
        return Some(ParsedValue::plain(with(Value::Number(amount.value))));
    };
    if rest.starts_with('(') && rest.ends_with(')') && !amount.scaled {
        return Some(ParsedValue {
            value: with(Value::Number(amount.value)),
            unit: None,
            coded: true,
        });
    }
    if let Some(unit) = time_unit(&rest) {
        return Some(ParsedValue {
            value: with(Value::Number(amount.value)),
            unit: Some(unit.to_string()),
            coded: false,
        });
    }
    if symbol_re().is_match(&rest) && amount.value >= 0.0 {
        return Some(ParsedValue::plain(with(Value::TokenAmount {
            amount: amount.value,
            symbol: rest.to_ascii_uppercase(),
        })));
    }
    None
}

/// Common English names that differ from the ISO short names.
const COUNTRY_ALIASES: [(&str, &str); 8] = [
    ("british virgin islands", "VGB"),
    ("bvi", "VGB"),
    ("us virgin islands", "VIR"),
    ("united states", "USA"),
    ("usa", "USA"),
    ("united kingdom", "GBR"),
    ("uk", "GBR"),
    ("south korea", "KOR"),
];

/// Resolves an alpha-3 code or a country name (optionally followed by
/// `Foundation` or a parenthetical) to an alpha-3 code.
pub fn country_code(s: &str) -> Option<String> {
    let s = s.trim();
    if s.len() == 3 && s.chars().all(|c| c.is_ascii_alphabetic()) {
        if let Ok(code) = CountryCode::for_alpha3_caseless(s) {
            return Some(code.alpha3().to_string());
        }
    }
    let mut name = s.to_lowercase();
    if let Some(open) = name.find('(') {
        name.truncate(open);
    }
    let name = name.trim();
    let name = name.strip_suffix("foundation").unwrap_or(name).trim();
    if let Some((_, code)) = COUNTRY_ALIASES.iter().find(|(alias, _)| *alias == name) {
        return Some((*code).to_string());
    }
    CountryCode::iter()
        .find(|c| c.name().eq_ignore_ascii_case(name))
        .map(|c| c.alpha3().to_string())
}

/// Weeks per month and per year used for duration coercion.
pub const WEEKS_PER_MONTH: f64 = 4.345;
pub const WEEKS_PER_YEAR: f64 = 52.14;

fn weeks_per(unit: &str) -> Option<f64> {
    match time_unit(unit)? {
        "weeks" => Some(1.0),
        "months" => Some(WEEKS_PER_MONTH),
        _ => Some(WEEKS_PER_YEAR),
    }
}

fn same_unit(a: &str, b: &str) -> bool {
    let norm = |u: &str| time_unit(u).map_or_else(|| u.trim().to_ascii_lowercase(), str::to_string);
    norm(a) == norm(b)
}

/// Re-expresses `value`, written in `from_unit`, in the unit declared by `def`.
///
/// Identical units pass any value through. Otherwise only numbers between the
/// time units weeks, months and years are convertible.
pub fn coerce_unit(value: &TypedValue, from_unit: &str, def: &IndicatorDef) -> Result<TypedValue> {
    if value.is_missing() || same_unit(from_unit, &def.unit) {
        return Ok(value.clone());
    }
    let unit_error = || Error::Unit {
        from: from_unit.to_string(),
        to: def.unit.clone(),
    };
    let (Some(from), Some(to)) = (weeks_per(from_unit), weeks_per(&def.unit)) else {
        return Err(unit_error());
    };
    match value.value {
        Value::Number(x) => Ok(TypedValue {
            value: Value::Number(x * from / to),
            qualifier: value.qualifier,
        }),
        _ => Err(unit_error()),
    }
}
