//! Line-oriented `|`-delimited record reader shared by every file format.
//!
//! Lines starting with `#!` are pragmas, other `#` lines are comments, blank
//! lines are skipped and `[name]` opens a section. Everything else is a record
//! whose fields are split on `|` and trimmed.

pub(crate) const DELIMITER: char = '|';

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Item<'a> {
    Pragma(&'a str),
    Section(&'a str),
    Record(Record<'a>),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Record<'a> {
    pub line: usize,
    pub fields: Vec<&'a str>,
}

pub(crate) fn items(source: &str) -> impl Iterator<Item = (usize, Item<'_>)> {
    source.lines().enumerate().filter_map(|(idx, line)| {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if let Some(pragma) = trimmed.strip_prefix("#!") {
            return Some((line_no, Item::Pragma(pragma.trim())));
        }
        if trimmed.is_empty() || trimmed.starts_with('#') {
            return None;
        }
        if trimmed.starts_with('[') && trimmed.ends_with(']') && !trimmed.contains(DELIMITER) {
            return Some((line_no, Item::Section(trimmed[1..trimmed.len() - 1].trim())));
        }
        let fields = trimmed.split(DELIMITER).map(str::trim).collect();
        Some((
            line_no,
            Item::Record(Record {
                line: line_no,
                fields,
            }),
        ))
    })
}

/// First pragma of a document, used to tell file kinds apart.
pub(crate) fn leading_pragma(source: &str) -> Option<&str> {
    source
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .and_then(|l| l.strip_prefix("#!"))
        .map(str::trim)
}

/// Returns an error message if `value` cannot be written as a single field.
pub(crate) fn check_field(value: &str) -> Result<(), String> {
    if value.contains(DELIMITER) || value.contains('\n') || value.contains('\r') {
        Err(format!("field {value:?} contains a reserved character"))
    } else {
        Ok(())
    }
}
