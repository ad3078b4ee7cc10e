//! Precomputed category-score tables, the input of the precomputed scoring path.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::ingest::dataset::parse_score;
use crate::schema::Category;
use crate::table::{self, Item};

pub const CATEGORIES_PRAGMA: &str = "gmi-categories";
pub const REFERENCE_HEADER: [&str; 2] = ["program", "gmi"];

/// Category scores per program, in input order. Absent cells are simply not
/// present in a program's map.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CategoryTable {
    pub rows: Vec<(String, BTreeMap<Category, f64>)>,
    /// Published or expected composites to compare against.
    pub references: Vec<(String, f64)>,
}

impl CategoryTable {
    pub fn push(&mut self, program: impl Into<String>, scores: BTreeMap<Category, f64>) -> Result<()> {
        let program = program.into();
        if self.rows.iter().any(|(p, _)| *p == program) {
            return Err(Error::DuplicateProgram(program));
        }
        self.rows.push((program, scores));
        Ok(())
    }

    pub fn programs(&self) -> impl Iterator<Item = &str> {
        self.rows.iter().map(|(p, _)| p.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("#!{CATEGORIES_PRAGMA} 1\nprogram");
        for c in Category::ALL {
            out.push('|');
            out.push_str(c.code());
        }
        out.push('\n');
        for (program, scores) in &self.rows {
            out.push_str(program);
            for c in Category::ALL {
                out.push('|');
                if let Some(v) = scores.get(&c) {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        if !self.references.is_empty() {
            out.push_str(&format!("[reference]\n{}\n", REFERENCE_HEADER.join("|")));
            for (program, gmi) in &self.references {
                out.push_str(&format!("{program}|{gmi}\n"));
            }
        }
        out
    }
}

/// Reads a category table: a `program|<category>...` header followed by one
/// row per program, then an optional `[reference]` section of expected
/// composites. Empty or `n.a.` cells mark absent categories.
pub fn load_category_table(source: &str) -> Result<CategoryTable> {
    let mut table = CategoryTable::default();
    let mut columns: Option<Vec<Category>> = None;
    let mut in_reference = false;
    let mut reference_header = false;
    for (line, item) in table::items(source) {
        let rec = match item {
            Item::Pragma(_) => continue,
            Item::Section("reference") if !in_reference => {
                in_reference = true;
                continue;
            }
            Item::Section(name) => return Err(Error::parse(line, format!("unexpected section [{name}]"))),
            Item::Record(rec) => rec,
        };
        if in_reference {
            if !reference_header {
                if rec.fields != REFERENCE_HEADER {
                    return Err(Error::parse(line, "expected header program|gmi"));
                }
                reference_header = true;
                continue;
            }
            let [program, gmi] = rec.fields.as_slice() else {
                return Err(Error::parse(line, "expected program|gmi"));
            };
            table.references.push((program.to_string(), parse_score(line, gmi)?));
            continue;
        }
        let Some(cols) = &columns else {
            let Some((&"program", rest)) = rec.fields.split_first() else {
                return Err(Error::parse(line, "expected header program|<categories>"));
            };
            let mut seen = BTreeSet::new();
            let mut cols = Vec::new();
            for key in rest {
                let c = Category::from_key(key)
                    .ok_or_else(|| Error::parse(line, format!("unknown category column {key:?}")))?;
                if !seen.insert(c) {
                    return Err(Error::parse(line, format!("duplicate column {c}")));
                }
                cols.push(c);
            }
            columns = Some(cols);
            continue;
        };
        if rec.fields.len() != cols.len() + 1 {
            return Err(Error::parse(line, format!("expected {} fields", cols.len() + 1)));
        }
        let program = rec.fields[0];
        if program.is_empty() {
            return Err(Error::parse(line, "empty program name"));
        }
        let mut scores = BTreeMap::new();
        for (c, raw) in cols.iter().zip(&rec.fields[1..]) {
            if raw.is_empty() || raw.eq_ignore_ascii_case("n.a.") {
                continue;
            }
            scores.insert(*c, parse_score(line, raw)?);
        }
        table.push(program, scores)?;
    }
    if columns.is_none() {
        return Err(Error::parse(0, "missing header row"));
    }
    Ok(table)
}
