//! `gmi` command-line front end.
//!
//! Exit statuses: 0 success, 1 domain failure (missing category data, a
//! category with nothing to score), 2 input or usage failure.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gmi_core::report::{render_validation, Reference};
use gmi_core::rubric::{load_responses, load_template};
use gmi_core::scoring::StageThresholds;
use gmi_core::{
    builtin_schema, builtin_template, collect_responses, compute_gmi, document_kind, load_category_table,
    load_program_dataset, load_rates, load_schema, render_program_report, validate_dataset_with, ComparisonReport,
    ConversionTable, DocumentKind, GmiOptions, OutputFormat, Pipeline, ProgramDataset, RubricTemplate, Schema,
};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "gmi", version, about = "Score grant programs with the Grant Maturity Index")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that datasets load and that every category has something to score.
    Validate(ValidateArgs),
    /// Score programs and print the comparison report.
    #[command(visible_alias = "compare")]
    Score(ScoreArgs),
    /// Rubric self-assessment instrument.
    #[command(subcommand)]
    Survey(SurveyCommand),
    /// Indicator schema utilities.
    #[command(subcommand)]
    Schema(SchemaCommand),
}

#[derive(Debug, Subcommand)]
pub enum SurveyCommand {
    /// Print the blank response file.
    Template(TemplateArgs),
    /// Group a filled response file by category.
    Collect(CollectArgs),
}

#[derive(Debug, Subcommand)]
pub enum SchemaCommand {
    /// Print the active schema.
    Dump(SchemaArgs),
}

#[derive(Debug, Args)]
pub struct SchemaArgs {
    /// Schema file; the builtin schema when absent.
    #[arg(long, env = "GMI_SCHEMA")]
    pub schema: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TemplateArgs {
    /// Rubric template file; the builtin template when absent.
    #[arg(long)]
    pub template: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CollectArgs {
    #[command(flatten)]
    pub template: TemplateArgs,
    pub responses: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub schema: SchemaArgs,
    #[command(flatten)]
    pub template: TemplateArgs,
    /// Conversion table with USD rates for token symbols.
    #[arg(long)]
    pub rates: Option<PathBuf>,
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Program observation files through the full pipeline.
    Raw,
    /// Category scores supplied directly.
    Precomputed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Delimited,
    Structured,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Table => OutputFormat::Table,
            Format::Delimited => OutputFormat::Delimited,
            Format::Structured => OutputFormat::Structured,
        }
    }
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub schema: SchemaArgs,
    #[command(flatten)]
    pub template: TemplateArgs,
    #[arg(long, value_enum, default_value = "raw")]
    pub mode: Mode,
    /// Rescale programs with absent categories instead of failing.
    #[arg(long)]
    pub allow_partial: bool,
    /// Conversion table with USD rates for token symbols.
    #[arg(long)]
    pub rates: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Stage lower bounds as FOUNDATIONAL,DEVELOPMENTAL,ADVANCED.
    #[arg(long, value_parser = parse_thresholds)]
    pub thresholds: Option<StageThresholds>,
    /// Append a per-program report with exclusions and the normalization audit.
    #[arg(long)]
    pub details: bool,
    pub inputs: Vec<PathBuf>,
}

fn parse_thresholds(s: &str) -> Result<StageThresholds, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        &[f, d, a] => StageThresholds::new(f, d, a).ok_or_else(|| "thresholds must increase within (0, 6]".into()),
        _ => Err("expected three comma-separated values".into()),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {}: {source}", .path.display(), .source.kind())]
    Load { path: PathBuf, source: gmi_core::Error },
    #[error("{}: {source}", .source.kind())]
    Core {
        #[from]
        source: gmi_core::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source } if source.is_domain_failure() => EXIT_DOMAIN,
            _ => EXIT_INPUT,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load<T>(path: &Path, f: impl FnOnce(&str) -> gmi_core::Result<T>) -> CliResult<T> {
    let text = read(path)?;
    f(&text).map_err(|source| CliError::Load {
        path: path.to_path_buf(),
        source,
    })
}

fn schema(args: &SchemaArgs) -> CliResult<Schema> {
    match &args.schema {
        Some(path) => load(path, load_schema),
        None => Ok(builtin_schema()),
    }
}

fn template(args: &TemplateArgs) -> CliResult<RubricTemplate> {
    match &args.template {
        Some(path) => load(path, load_template),
        None => Ok(builtin_template()),
    }
}

fn rates(path: &Option<PathBuf>) -> CliResult<ConversionTable> {
    match path {
        Some(path) => load(path, load_rates),
        None => Ok(ConversionTable::empty()),
    }
}

fn require_inputs(inputs: &[PathBuf]) -> CliResult<()> {
    if inputs.is_empty() {
        return Err(CliError::Usage("at least one input file is required".into()));
    }
    Ok(())
}

/// Inputs of one invocation, in file order.
struct Loaded {
    datasets: Vec<ProgramDataset>,
    references: Vec<Reference>,
}

/// Observation files become datasets; category tables become datasets that
/// carry only precomputed category scores.
fn load_inputs(inputs: &[PathBuf], schema: &Schema, allow_tables: bool) -> CliResult<Loaded> {
    let mut loaded = Loaded {
        datasets: Vec::new(),
        references: Vec::new(),
    };
    for path in inputs {
        let text = read(path)?;
        let wrap = |source| CliError::Load {
            path: path.clone(),
            source,
        };
        match document_kind(&text) {
            DocumentKind::Categories if allow_tables => {
                let table = load_category_table(&text).map_err(wrap)?;
                for (program, categories) in table.rows {
                    let mut ds = ProgramDataset::new(program);
                    ds.categories = categories;
                    loaded.datasets.push(ds);
                }
                loaded
                    .references
                    .extend(table.references.into_iter().map(|(program, gmi)| Reference { program, gmi }));
            }
            DocumentKind::Categories => {
                return Err(CliError::Usage(format!(
                    "{}: category tables need --mode precomputed",
                    path.display()
                )))
            }
            _ => loaded.datasets.push(load_program_dataset(&text, schema).map_err(wrap)?),
        }
    }
    Ok(loaded)
}

pub fn cmd_validate(args: &ValidateArgs, out: &mut String) -> CliResult<i32> {
    require_inputs(&args.inputs)?;
    let schema = schema(&args.schema)?;
    let template = template(&args.template)?;
    let rates = rates(&args.rates)?;
    let loaded = load_inputs(&args.inputs, &schema, true)?;
    let mut status = EXIT_OK;
    for (i, ds) in loaded.datasets.iter().enumerate() {
        let report = validate_dataset_with(ds, &schema, &template, &rates);
        if !report.all_scorable() || !report.unknown_criteria.is_empty() {
            status = EXIT_DOMAIN;
        }
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&render_validation(&report));
    }
    Ok(status)
}

pub fn cmd_score(args: &ScoreArgs, out: &mut String) -> CliResult<i32> {
    require_inputs(&args.inputs)?;
    if args.mode == Mode::Precomputed && args.rates.is_some() {
        return Err(CliError::Usage("--rates cannot be used with --mode precomputed".into()));
    }
    let schema = schema(&args.schema)?;
    let template = template(&args.template)?;
    let rates = rates(&args.rates)?;
    let options = GmiOptions {
        allow_partial: args.allow_partial,
        thresholds: args.thresholds.unwrap_or_default(),
    };
    let precomputed = args.mode == Mode::Precomputed;
    let loaded = load_inputs(&args.inputs, &schema, precomputed)?;

    let results = if precomputed {
        let mut rows = Vec::with_capacity(loaded.datasets.len());
        for ds in &loaded.datasets {
            if ds.categories.is_empty() {
                return Err(CliError::Usage(format!(
                    "{}: no category scores for precomputed mode",
                    ds.program
                )));
            }
            rows.push((ds.program.clone(), ds.categories.clone()));
        }
        compute_gmi(&rows, &options)?
    } else {
        Pipeline::new(&schema)
            .template(template.clone())
            .rates(rates.clone())
            .options(options)
            .run(&loaded.datasets)?
            .results
    };

    let report = ComparisonReport::new(results).with_references(loaded.references);
    out.push_str(&report.render(args.format.into()));
    if args.details {
        for (result, ds) in report.results.iter().zip(&loaded.datasets) {
            let validation = validate_dataset_with(ds, &schema, &template, &rates);
            out.push('\n');
            out.push_str(&render_program_report(result, &validation)?);
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_survey_template(args: &TemplateArgs, out: &mut String) -> CliResult<i32> {
    out.push_str(&template(args)?.blank_responses());
    Ok(EXIT_OK)
}

pub fn cmd_survey_collect(args: &CollectArgs, out: &mut String) -> CliResult<i32> {
    let template = template(&args.template)?;
    let responses = load(&args.responses, load_responses)?;
    let answers = responses.into_iter().map(|(k, v)| (k, i64::from(v))).collect();
    let grouped = collect_responses(&template, &answers)?;
    out.push_str("category|answers|unit_scores|mean\n");
    for (category, units) in &grouped {
        let scores: Vec<String> = units.iter().map(|u| format!("{u:.4}")).collect();
        let mean = units.iter().sum::<f64>() / units.len() as f64;
        let _ = writeln!(out, "{category}|{}|{}|{mean:.4}", units.len(), scores.join(","));
    }
    Ok(EXIT_OK)
}

pub fn cmd_schema_dump(args: &SchemaArgs, out: &mut String) -> CliResult<i32> {
    out.push_str(&schema(args)?.to_text());
    Ok(EXIT_OK)
}

fn dispatch(cli: &Cli, out: &mut String) -> CliResult<i32> {
    match &cli.command {
        Command::Validate(args) => cmd_validate(args, out),
        Command::Score(args) => cmd_score(args, out),
        Command::Survey(SurveyCommand::Template(args)) => cmd_survey_template(args, out),
        Command::Survey(SurveyCommand::Collect(args)) => cmd_survey_collect(args, out),
        Command::Schema(SchemaCommand::Dump(args)) => cmd_schema_dump(args, out),
    }
}

fn output_path(cli: &Cli) -> Option<&Path> {
    match &cli.command {
        Command::Score(args) => args.out.as_deref(),
        _ => None,
    }
}

/// Runs one invocation and returns its exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let target: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = write!(target, "{}", e.render());
            return if code == EXIT_OK { EXIT_OK } else { EXIT_INPUT };
        }
    };
    let mut out = String::new();
    let status = match dispatch(&cli, &mut out) {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if matches!(e, CliError::Usage(_)) {
                let _ = writeln!(stderr, "run `gmi help` for usage");
            }
            return e.exit_code();
        }
    };
    let written = match output_path(&cli) {
        Some(path) => fs::write(path, &out).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => stdout.write_all(out.as_bytes()).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_INPUT;
    }
    status
}
