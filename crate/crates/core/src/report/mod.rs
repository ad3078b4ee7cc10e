//! Deterministic renderings of results and validation reports.
//!
//! All values are printed with four decimals; Rust's float formatting rounds
//! exact ties to even, which is what the golden files rely on.

mod structured;

use std::fmt::Write as _;
use std::str::FromStr;

pub use structured::{parse_structured, StructuredDocument, STRUCTURED_FORMAT};

use crate::error::{Error, Result};
use crate::ingest::{Exclusion, ValidationReport};
use crate::schema::Category;
use crate::scoring::{ranking, GmiResult, Normalized};

/// Four-decimal rounding, ties to even.
pub fn round4(x: f64) -> f64 {
    let r: f64 = format!("{x:.4}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn fmt4(x: f64) -> String {
    format!("{:.4}", round4(x))
}

impl GmiResult {
    /// The result as it appears in every report: scores rounded to four
    /// decimals. Raw bounds in the audit trail are kept as is.
    pub fn rounded(&self) -> GmiResult {
        let mut r = self.clone();
        r.gmi = round4(r.gmi);
        r.category_scores.values_mut().for_each(|v| *v = round4(*v));
        r.normalized_category_scores.values_mut().for_each(|v| *v = round4(*v));
        for rec in &mut r.audit {
            if let Normalized::Score(s) = rec.outcome {
                rec.outcome = Normalized::Score(round4(s));
            }
        }
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    /// Fixed-width table.
    Table,
    /// Tab-separated values.
    Delimited,
    /// JSON document.
    Structured,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "table" | "plain-table" => Ok(OutputFormat::Table),
            "delimited" => Ok(OutputFormat::Delimited),
            "structured" => Ok(OutputFormat::Structured),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

/// Expected composite for a program, as supplied alongside the inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub program: String,
    pub gmi: f64,
}

/// Tolerance used when comparing computed composites with references.
pub const REFERENCE_TOLERANCE: f64 = 1e-3;

/// Composite row followed by the six category rows, one column per program.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub results: Vec<GmiResult>,
    pub references: Vec<Reference>,
}

impl ComparisonReport {
    pub fn new(results: Vec<GmiResult>) -> Self {
        ComparisonReport {
            results,
            references: Vec::new(),
        }
    }

    pub fn with_references(mut self, references: Vec<Reference>) -> Self {
        self.references = references;
        self
    }

    /// Human-readable notes: rescaled partial composites, degenerate
    /// categories, approximate values, unconverted tokens, reference
    /// mismatches and the ranking.
    pub fn footnotes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        for r in &self.results {
            let missing = r.missing_categories();
            if !missing.is_empty() {
                let codes: Vec<_> = missing.iter().map(|c| c.code()).collect();
                notes.push(format!(
                    "{}: composite rescaled from {} of 6 categories (absent: {})",
                    r.program,
                    6 - missing.len(),
                    codes.join(", ")
                ));
            }
        }
        for category in Category::ALL {
            let rollup = category.rollup_id();
            let degenerate = self.results.iter().any(|r| {
                r.audit
                    .iter()
                    .any(|a| a.indicator == rollup && a.degenerate)
            });
            if degenerate {
                notes.push(format!(
                    "{}: fewer than two distinct category scores; every present score normalized to 0.5",
                    category.code()
                ));
            }
        }
        for r in &self.results {
            for a in &r.audit {
                if a.qualifier.is_approximate() && matches!(a.outcome, Normalized::Score(_)) {
                    notes.push(format!(
                        "{} {}: {:?} scored at face value ({})",
                        r.program, a.indicator, a.raw, a.qualifier
                    ));
                }
            }
        }
        for r in &self.results {
            for a in &r.audit {
                if a.outcome == Normalized::Excluded(Exclusion::TokenUnconverted) {
                    notes.push(format!(
                        "{} {}: {:?} excluded (token-unconverted, no rate supplied)",
                        r.program, a.indicator, a.raw
                    ));
                }
            }
        }
        notes.extend(self.reference_notes());
        if self.results.len() > 1 {
            notes.push(format!("Ranking: {}", self.ranking_line()));
        }
        notes
    }

    fn reference_notes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        for reference in &self.references {
            let Some(result) = self.results.iter().find(|r| r.program == reference.program) else {
                notes.push(format!(
                    "Reference composite {} for {} has no matching program",
                    fmt4(reference.gmi),
                    reference.program
                ));
                continue;
            };
            if (result.gmi - reference.gmi).abs() <= REFERENCE_TOLERANCE {
                continue;
            }
            let matched: Vec<&str> = self
                .references
                .iter()
                .filter(|other| (result.gmi - other.gmi).abs() <= REFERENCE_TOLERANCE)
                .map(|other| other.program.as_str())
                .collect();
            let tail = if matched.is_empty() {
                "no reference value matches".to_string()
            } else {
                format!("matches the reference listed for {}", matched.join(", "))
            };
            notes.push(format!(
                "{}: computed composite {} differs from reference {}; {}",
                result.program,
                fmt4(result.gmi),
                fmt4(reference.gmi),
                tail
            ));
        }
        notes
    }

    fn ranking_line(&self) -> String {
        let ranked = ranking(&self.results);
        let mut line = String::new();
        for (i, r) in ranked.iter().enumerate() {
            if i > 0 {
                let tie = fmt4(ranked[i - 1].gmi) == fmt4(r.gmi);
                line.push_str(if tie { " = " } else { " > " });
            }
            let _ = write!(line, "{} ({})", r.program, fmt4(r.gmi));
        }
        line
    }

    /// Excluded audit records as (program, indicator, reason, raw).
    pub fn exclusions(&self) -> Vec<(&str, &str, Exclusion, &str)> {
        let mut rows = Vec::new();
        for r in &self.results {
            for a in &r.audit {
                if let Normalized::Excluded(reason) = a.outcome {
                    rows.push((r.program.as_str(), a.indicator.as_str(), reason, a.raw.as_str()));
                }
            }
        }
        rows
    }

    fn grid(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        let mut header = vec!["ID".to_string(), "Description".to_string()];
        header.extend(self.results.iter().map(|r| r.program.clone()));
        rows.push(header);

        let mut composite = vec!["GMI".to_string(), "Composite (normalized category scores)".to_string()];
        composite.extend(self.results.iter().map(|r| fmt4(r.gmi)));
        rows.push(composite);

        for category in Category::ALL {
            let mut row = vec![category.code().to_string(), category.label().to_string()];
            row.extend(self.results.iter().map(|r| {
                r.normalized_category_scores
                    .get(&category)
                    .map_or_else(|| "-".to_string(), |v| fmt4(*v))
            }));
            rows.push(row);
        }

        let mut stage = vec!["Stage".to_string(), "Maturity stage".to_string()];
        stage.extend(self.results.iter().map(|r| r.stage.to_string()));
        rows.push(stage);
        rows
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Table => self.render_table(),
            OutputFormat::Delimited => self.render_delimited(),
            OutputFormat::Structured => structured::render(self),
        }
    }

    fn render_table(&self) -> String {
        let grid = self.grid();
        let columns = grid[0].len();
        let widths: Vec<usize> = (0..columns)
            .map(|c| grid.iter().map(|row| row[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &grid {
            let mut line = String::new();
            for (c, cell) in row.iter().enumerate() {
                if c > 0 {
                    line.push_str("  ");
                }
                if c < 2 {
                    let _ = write!(line, "{cell:<width$}", width = widths[c]);
                } else {
                    let _ = write!(line, "{cell:>width$}", width = widths[c]);
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        let notes = self.footnotes();
        if !notes.is_empty() {
            out.push_str("\nNotes:\n");
            for (i, note) in notes.iter().enumerate() {
                let _ = writeln!(out, "  {}. {note}", i + 1);
            }
        }
        let exclusions = self.exclusions();
        if !exclusions.is_empty() {
            out.push_str("\nExcluded values:\n");
            for (program, indicator, reason, raw) in exclusions {
                let _ = writeln!(out, "  {program}  {indicator}  {reason}  {raw:?}");
            }
        }
        out
    }

    fn render_delimited(&self) -> String {
        let mut out = String::new();
        for row in self.grid() {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        for note in self.footnotes() {
            let _ = writeln!(out, "# note\t{note}");
        }
        for (program, indicator, reason, raw) in self.exclusions() {
            let _ = writeln!(out, "# excluded\t{program}\t{indicator}\t{reason}\t{raw}");
        }
        out
    }
}

/// Renders a comparison of `results` without references.
pub fn render_comparison(results: &[GmiResult], format: OutputFormat) -> String {
    ComparisonReport::new(results.to_vec()).render(format)
}

/// Per-program findings: composite and stage, category scores, exclusions
/// from validation, qualifier notes and the normalization audit.
pub fn render_program_report(result: &GmiResult, validation: &ValidationReport) -> Result<String> {
    if result.program != validation.program {
        return Err(Error::MismatchedProgram {
            result: result.program.clone(),
            validation: validation.program.clone(),
        });
    }
    let mut out = String::new();
    let _ = writeln!(out, "Program: {}", result.program);
    let _ = writeln!(out, "Composite GMI: {}", fmt4(result.gmi));
    let _ = writeln!(out, "Maturity stage: {}", result.stage);

    out.push_str("\nCategory scores:\n");
    let label_width = Category::ALL.iter().map(|c| c.label().len()).max().unwrap_or(0);
    for category in Category::ALL {
        let raw = result.category_scores.get(&category).map_or("-".to_string(), |v| fmt4(*v));
        let norm = result
            .normalized_category_scores
            .get(&category)
            .map_or("-".to_string(), |v| fmt4(*v));
        let _ = writeln!(
            out,
            "  {}  {:<label_width$}  score {raw:>8}  normalized {norm:>6}",
            category.code(),
            category.label()
        );
    }

    let _ = writeln!(out, "\nExclusions ({}):", validation.exclusions.len());
    for e in &validation.exclusions {
        let _ = writeln!(out, "  {}  {}  {:?}", e.indicator, e.reason, e.raw);
    }

    if !validation.qualified.is_empty() {
        out.push_str("\nQualifier notes:\n");
        for q in &validation.qualified {
            let _ = writeln!(out, "  {}  {}  {:?} scored at face value", q.indicator, q.qualifier, q.raw);
        }
    }

    out.push_str("\nNormalization audit:\n");
    for a in &result.audit {
        let bounds = match (a.min, a.max) {
            (Some(lo), Some(hi)) => format!("min {lo} max {hi}"),
            _ => "no bounds".to_string(),
        };
        let outcome = match a.outcome {
            Normalized::Score(s) if a.degenerate => format!("score {} (degenerate range)", fmt4(s)),
            Normalized::Score(s) => format!("score {}", fmt4(s)),
            Normalized::Excluded(Exclusion::TokenUnconverted) => {
                "excluded: token-unconverted (no rate supplied)".to_string()
            }
            Normalized::Excluded(reason) => format!("excluded: {reason}"),
        };
        let _ = writeln!(out, "  {}  {:?}  {bounds}  {outcome}", a.indicator, a.raw);
    }
    Ok(out)
}

/// Text form of a validation report.
pub fn render_validation(report: &ValidationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Program: {}", report.program);
    let _ = writeln!(
        out,
        "  {:<8}  {:>8}  {:>6}  {:>7}  {:>12}  {:>17}  {:>11}  {:>6}  {:>11}",
        "Category", "Scorable", "Values", "Missing", "Non-scorable", "Token-unconverted", "Non-ordinal", "Rubric", "Precomputed"
    );
    for s in &report.categories {
        let _ = writeln!(
            out,
            "  {:<8}  {:>8}  {:>6}  {:>7}  {:>12}  {:>17}  {:>11}  {:>6}  {:>11}",
            s.category.code(),
            if s.scorable { "yes" } else { "no" },
            s.scorable_present.len(),
            s.missing,
            s.non_scorable,
            s.token_unconverted,
            s.non_ordinal,
            s.rubric_responses,
            if s.precomputed { "yes" } else { "no" }
        );
    }
    let listed: Vec<_> = report
        .exclusions
        .iter()
        .filter(|e| e.reason != Exclusion::NonScorable)
        .collect();
    if !listed.is_empty() {
        out.push_str("  Excluded values:\n");
        for e in listed {
            let _ = writeln!(out, "    {}  {}  {:?}", e.indicator, e.reason, e.raw);
        }
    }
    if !report.unknown_criteria.is_empty() {
        let _ = writeln!(out, "  Unknown rubric criteria: {}", report.unknown_criteria.join(", "));
    }
    out
}
