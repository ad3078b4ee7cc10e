//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use common::{oracle, Instance};
use gmi_cli::run;
use gmi_core::ingest::{load_category_table, load_program_dataset, Qualifier, TypedValue};
use gmi_core::report::{ComparisonReport, Reference};
use gmi_core::scoring::{
    directional_score, minmax_normalize, ranking, rubric_to_unit, Normalized, StageThresholds,
};
use gmi_core::{
    builtin_schema, builtin_template, classify_maturity, collect_responses, compute_gmi, parse_value, Category,
    Direction, Error, GmiOptions, OutputFormat, Pipeline, Stage, Value,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PUBLISHED: [f64; 4] = [1.1807, 1.8415, 3.2945, 3.9312];
const TOLERANCE: f64 = 1e-3;
const RANDOM_INSTANCES: usize = 1000;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn data_path(path: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(path)
}

fn data(path: &str) -> String {
    fs::read_to_string(data_path(path)).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let table = load_category_table(&data("table2.gmi")).map_err(|e| e.to_string())?;
    let results = compute_gmi(&table.rows, &GmiOptions::default()).map_err(|e| e.to_string())?;
    let report = ComparisonReport::new(results.clone()).with_references(
        table
            .references
            .iter()
            .map(|(program, gmi)| Reference {
                program: program.clone(),
                gmi: *gmi,
            })
            .collect(),
    );
    let rendered = report.render(OutputFormat::Table);
    let elapsed = start.elapsed();

    let mut got: Vec<f64> = results.iter().map(|r| r.gmi).collect();
    got.sort_by(f64::total_cmp);
    for (g, want) in got.iter().zip(PUBLISHED) {
        ensure((g - want).abs() <= TOLERANCE, || format!("composite {g:.4} vs {want}"))?;
    }
    ensure(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;

    let alignment = [
        ("Mantle", 1.8415),
        ("Arbitrum STIP", 1.1807),
        ("Taiko", 3.2945),
        ("Optimism", 3.9312),
    ];
    for (program, want) in alignment {
        let r = results
            .iter()
            .find(|r| r.program == program)
            .ok_or_else(|| format!("{program} missing"))?;
        ensure((r.gmi - want).abs() <= TOLERANCE, || format!("{program}: {:.4} vs {want}", r.gmi))?;
    }
    let discrepancies = report
        .footnotes()
        .iter()
        .filter(|n| n.contains("differs from reference") && n.contains("matches the reference listed for"))
        .count();
    ensure(discrepancies == 4 && rendered.contains("Notes:"), || {
        format!("{discrepancies} alignment footnotes")
    })?;
    Ok(format!(
        "composites {:?} within {TOLERANCE}, alignment footnoted, {:.1} ms",
        got.iter().map(|g| format!("{g:.4}")).collect::<Vec<_>>(),
        elapsed.as_secs_f64() * 1e3
    ))
}

fn criterion_2() -> Check {
    let schema = builtin_schema();
    let mut cells = 0;
    for program in ["taiko", "mantle", "arbitrum", "optimism"] {
        let ds = load_program_dataset(&data(&format!("programs/{program}.gmi")), &schema)
            .map_err(|e| format!("{program}: {} {e}", e.kind()))?;
        cells += ds.observations.len();
    }
    ensure(cells == 160, || format!("{cells} cells loaded"))?;

    let parse = |id: &str, raw: &str| {
        parse_value(raw, schema.get(id).unwrap())
            .map(|p| p.value)
            .map_err(|e| format!("{raw}: {e}"))
    };
    ensure(parse("COM-QN-14", "$276m")? == TypedValue::exact(Value::Money(276_000_000.0)), || {
        "$276m".into()
    })?;
    match parse("TAC-QN-6", "1:28")?.value {
        Value::Ratio(r) => ensure((r - 0.035714).abs() <= 1e-6, || format!("1:28 -> {r}"))?,
        other => return Err(format!("1:28 -> {other:?}")),
    }
    ensure(parse("TAC-QN-6", "n.a.")?.is_missing(), || "n.a.".into())?;
    let op = parse("FAO-QN-2", "<50K OP")?;
    ensure(
        op.value
            == Value::TokenAmount {
                amount: 50_000.0,
                symbol: "OP".into(),
            }
            && op.qualifier == Qualifier::ApproximateUpperBound,
        || format!("<50K OP -> {op:?}"),
    )?;
    Ok(format!("{cells} cells parsed with zero value errors; spot fixtures hold"))
}

/// Random pipeline instances against the brute-force oracle, plus seeded
/// runs of every invariant.
fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20240917);
    let options = GmiOptions {
        allow_partial: true,
        ..Default::default()
    };
    let mut compared = 0;
    for case in 0..RANDOM_INSTANCES {
        let instance = Instance::random(&mut rng);
        let schema = instance.schema();
        let datasets = instance.datasets(&schema);
        let expected = oracle(&instance);
        match Pipeline::new(&schema).options(options).run(&datasets) {
            Ok(scored) => {
                for (r, want) in scored.results.iter().zip(&expected) {
                    let want = want.ok_or_else(|| format!("case {case}: oracle has no composite"))?;
                    ensure((r.gmi - want).abs() <= 1e-9, || format!("case {case}: {} vs {want}", r.gmi))?;
                    compared += 1;
                }
                invariants_on_instance(case, &instance, &scored.results, &mut rng)?;
            }
            Err(Error::NoScorableCategories(_)) if expected.iter().any(Option::is_none) => {}
            Err(e) => return Err(format!("case {case}: {e}")),
        }
    }
    normalization_invariants(&mut rng)?;
    composite_invariants(&mut rng)?;
    Ok(format!(
        "{RANDOM_INSTANCES} instances, {compared} composites equal to the oracle within 1e-9; invariant suites pass"
    ))
}

fn invariants_on_instance(
    case: usize,
    instance: &Instance,
    results: &[gmi_core::GmiResult],
    rng: &mut ChaCha8Rng,
) -> Result<(), String> {
    let schema = instance.schema();
    let options = GmiOptions {
        allow_partial: true,
        ..Default::default()
    };
    for r in results {
        ensure((0.0..=6.0).contains(&r.gmi), || format!("case {case}: range {}", r.gmi))?;
        let sum: f64 = r.normalized_category_scores.values().sum();
        let present = r.normalized_category_scores.len() as f64;
        ensure((r.gmi - sum * 6.0 / present).abs() <= 1e-12, || format!("case {case}: additivity"))?;
    }

    // Permutation: reversing program order reverses the results.
    let mut reversed = instance.datasets(&schema);
    reversed.reverse();
    let again = Pipeline::new(&schema).options(options).run(&reversed).map_err(|e| e.to_string())?;
    for (a, b) in results.iter().zip(again.results.iter().rev()) {
        ensure(a.program == b.program && (a.gmi - b.gmi).abs() <= 1e-12, || {
            format!("case {case}: permutation")
        })?;
    }

    // Affine invariance: a positive affine map of one indicator's values.
    if !instance.indicators.is_empty() {
        let i = rng.gen_range(0..instance.indicators.len());
        let (a, b) = (f64::from(rng.gen_range(1..16u32)) / 4.0, f64::from(rng.gen_range(0..64u32)));
        let mut shifted = instance.clone();
        for row in &mut shifted.values {
            row[i] = row[i].map(|x| a * x + b);
        }
        let moved = Pipeline::new(&schema)
            .options(options)
            .run(&shifted.datasets(&schema))
            .map_err(|e| e.to_string())?;
        for (x, y) in results.iter().zip(&moved.results) {
            ensure((x.gmi - y.gmi).abs() <= 1e-9, || format!("case {case}: affine {} vs {}", x.gmi, y.gmi))?;
        }

        // Directional involution: flipping an indicator's polarity flips its scores.
        shifted.values = instance.values.clone();
        shifted.indicators[i].lower_better = !instance.indicators[i].lower_better;
        let flipped_schema = shifted.schema();
        let flipped = Pipeline::new(&flipped_schema)
            .options(options)
            .run(&shifted.datasets(&flipped_schema))
            .map_err(|e| e.to_string())?;
        let original = Pipeline::new(&schema)
            .options(options)
            .run(&instance.datasets(&schema))
            .map_err(|e| e.to_string())?;
        let id = &instance.indicators[i].id;
        for p in &instance.programs {
            match (original.matrix.entry(p, id), flipped.matrix.entry(p, id)) {
                (Some(Normalized::Score(s)), Some(Normalized::Score(t))) => {
                    ensure((s + t - 1.0).abs() <= 1e-12, || format!("case {case}: involution"))?
                }
                (x, y) => ensure(x == y, || format!("case {case}: involution {x:?} {y:?}"))?,
            }
        }
    }
    Ok(())
}

fn random_column(rng: &mut ChaCha8Rng) -> Vec<Option<f64>> {
    (0..rng.gen_range(1..8))
        .map(|_| rng.gen_bool(0.8).then(|| rng.gen_range(-1e6..1e6)))
        .collect()
}

fn normalization_invariants(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for case in 0..RANDOM_INSTANCES {
        let values = random_column(rng);
        let n = minmax_normalize(&values);
        let scores: Vec<Option<f64>> = n.scores.iter().map(|s| s.score()).collect();
        for (i, s) in scores.iter().enumerate() {
            if let Some(s) = s {
                ensure((0.0..=1.0).contains(s), || format!("column {case}: range"))?;
                if !n.degenerate && values[i] == n.min {
                    ensure(*s == 0.0, || format!("column {case}: lower anchor"))?;
                }
                if !n.degenerate && values[i] == n.max {
                    ensure(*s == 1.0, || format!("column {case}: upper anchor"))?;
                }
            }
            for (j, t) in scores.iter().enumerate() {
                if let (Some(a), Some(b), Some(s), Some(t)) = (values[i], values[j], s, t) {
                    if a <= b {
                        ensure(s <= t, || format!("column {case}: monotonicity"))?;
                    }
                }
            }
        }
        let (a, b) = (rng.gen_range(0.01..100.0), rng.gen_range(-1e3..1e3));
        let mapped: Vec<_> = values.iter().map(|v| v.map(|x| a * x + b)).collect();
        for (x, y) in scores.iter().zip(minmax_normalize(&mapped).scores.iter().map(|s| s.score())) {
            match (x, y) {
                (Some(x), Some(y)) => ensure((x - y).abs() <= 1e-9, || format!("column {case}: affine"))?,
                (x, y) => ensure(*x == y, || format!("column {case}: affine gaps"))?,
            }
        }
        let pos = rng.gen_range(0..=values.len());
        let mut gapped = values.clone();
        gapped.insert(pos, None);
        let mut after: Vec<Option<f64>> = minmax_normalize(&gapped).scores.iter().map(|s| s.score()).collect();
        ensure(after.remove(pos).is_none() && after == scores, || format!("column {case}: missing locality"))?;

        let x: f64 = rng.gen_range(0.0..=1.0);
        let twice = directional_score(directional_score(x, Direction::LowerBetter), Direction::LowerBetter);
        ensure((twice - x).abs() <= 1e-15, || format!("column {case}: involution"))?;
    }
    Ok(())
}

fn composite_invariants(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for case in 0..RANDOM_INSTANCES {
        let rows: Vec<(String, BTreeMap<Category, f64>)> = (0..rng.gen_range(1..6))
            .map(|p| {
                let scores = Category::ALL.into_iter().map(|c| (c, rng.gen_range(0.0..20.0))).collect();
                (format!("P{p}"), scores)
            })
            .collect();
        let before = compute_gmi(&rows, &GmiOptions::default()).map_err(|e| e.to_string())?;
        let category = Category::ALL[rng.gen_range(0..6)];
        let (a, b) = (rng.gen_range(0.1..10.0), rng.gen_range(-5.0..5.0));
        let mut scaled = rows.clone();
        for (_, scores) in &mut scaled {
            let v = scores.get_mut(&category).unwrap();
            *v = a * *v + b;
        }
        let after = compute_gmi(&scaled, &GmiOptions::default()).map_err(|e| e.to_string())?;
        for (x, y) in before.iter().zip(&after) {
            ensure((x.gmi - y.gmi).abs() <= 1e-9, || format!("table {case}: additivity under rescaling"))?;
        }
        let separated = before
            .iter()
            .all(|x| before.iter().all(|y| x.program == y.program || (x.gmi - y.gmi).abs() > 1e-6));
        if separated {
            let order = |rs: &[gmi_core::GmiResult]| ranking(rs).iter().map(|r| r.program.clone()).collect::<Vec<_>>();
            ensure(order(&before) == order(&after), || format!("table {case}: ranking"))?;
        }
    }
    Ok(())
}

fn criterion_4() -> Check {
    for (score, unit) in [(1, 0.0), (3, 0.5), (5, 1.0)] {
        let got = rubric_to_unit(score).map_err(|e| e.to_string())?;
        ensure(got == unit, || format!("{score} -> {got}"))?;
    }
    let template = builtin_template();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..RANDOM_INSTANCES {
        let mut answers = BTreeMap::new();
        for c in template.criteria() {
            if rng.gen_bool(0.5) {
                answers.insert(c.id.clone(), rng.gen_range(1..=5i64));
            }
        }
        let grouped = collect_responses(&template, &answers).map_err(|e| e.to_string())?;
        let total: usize = grouped.values().map(Vec::len).sum();
        ensure(total == answers.len(), || format!("case {case}: {total} vs {}", answers.len()))?;
    }
    Ok(format!("1->0, 3->0.5, 5->1 exact; counts preserved on {RANDOM_INSTANCES} response sets"))
}

fn gmi_stdout(args: &[String]) -> Result<Vec<u8>, String> {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let status = run(std::iter::once("gmi".to_string()).chain(args.iter().cloned()), &mut stdout, &mut stderr);
    if status != 0 {
        return Err(format!("exit {status}: {}", String::from_utf8_lossy(&stderr)));
    }
    Ok(stdout)
}

fn criterion_5() -> Check {
    let table2 = data_path("table2.gmi").to_string_lossy().into_owned();
    let mut raw: Vec<String> = ["score", "--allow-partial", "--details"].map(String::from).to_vec();
    raw.extend(["mantle", "taiko", "optimism", "arbitrum"].map(|p| {
        data_path(&format!("programs/{p}.gmi")).to_string_lossy().into_owned()
    }));
    let first = gmi_stdout(&raw)?;
    ensure(first == gmi_stdout(&raw)?, || "raw run output differs between runs".into())?;

    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut checked = 0;
    for (format, file) in [
        ("table", "table2.table.txt"),
        ("delimited", "table2.delimited.tsv"),
        ("structured", "table2.structured.json"),
    ] {
        let args: Vec<String> = vec!["score".into(), "--mode".into(), "precomputed".into(), "--format".into(), format.into(), table2.clone()];
        let out = gmi_stdout(&args)?;
        ensure(out == gmi_stdout(&args)?, || format!("{format} output differs between runs"))?;
        let expected = fs::read(golden.join(file)).map_err(|e| format!("{file}: {e}"))?;
        ensure(out == expected, || format!("{file} does not match"))?;
        checked += 1;
    }
    let expected = fs::read(golden.join("raw_partial_details.txt")).map_err(|e| e.to_string())?;
    ensure(first == expected, || "raw_partial_details.txt does not match".into())?;
    Ok(format!("repeat runs byte-identical; {} golden files match", checked + 1))
}

fn criterion_6() -> Check {
    let expected = [
        (1.1807, Stage::Experimental),
        (1.8415, Stage::Foundational),
        (3.2945, Stage::Developmental),
        (3.9312, Stage::Developmental),
    ];
    for (gmi, stage) in expected {
        let got = classify_maturity(gmi);
        ensure(got == stage, || format!("{gmi} -> {got}"))?;
    }
    let table = load_category_table(&data("table2.gmi")).map_err(|e| e.to_string())?;
    let thresholds = StageThresholds::default();
    let mut results = compute_gmi(&table.rows, &GmiOptions::default()).map_err(|e| e.to_string())?;
    results.sort_by(|a, b| a.gmi.total_cmp(&b.gmi));
    for (r, (_, stage)) in results.iter().zip(expected) {
        ensure(r.stage == stage && thresholds.classify(r.gmi) == stage, || {
            format!("{}: {:.4} -> {}", r.program, r.gmi, r.stage)
        })?;
    }
    Ok("Experimental, Foundational, Developmental, Developmental".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 6] = [
        ("composite reproduction from category scores", criterion_1),
        ("ingestion of every published indicator cell", criterion_2),
        ("randomized oracle equivalence and invariants", criterion_3),
        ("rubric anchors and response counts", criterion_4),
        ("determinism and golden files", criterion_5),
        ("stage classification", criterion_6),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
