//! Random scoring instances and a brute-force reference implementation.
#![allow(dead_code)]

use std::collections::BTreeMap;

use gmi_core::ingest::ProgramDataset;
use gmi_core::schema::SCHEMA_HEADER;
use gmi_core::{builtin_template, load_schema, Category, Schema};
use rand::Rng;

#[derive(Clone)]
pub struct Indicator {
    pub id: String,
    pub category: Category,
    pub lower_better: bool,
}

/// Up to five programs, up to four indicators per category, random gaps and
/// random rubric answers.
#[derive(Clone)]
pub struct Instance {
    pub indicators: Vec<Indicator>,
    pub programs: Vec<String>,
    /// `values[p][i]` for program `p` and indicator `i`.
    pub values: Vec<Vec<Option<f64>>>,
    pub answers: Vec<BTreeMap<String, u8>>,
}

impl Instance {
    pub fn random<R: Rng>(rng: &mut R) -> Instance {
        let mut indicators = Vec::new();
        for category in Category::ALL {
            for n in 1..=rng.gen_range(0..=4) {
                indicators.push(Indicator {
                    id: format!("{}-QN-{n}", category.code()),
                    category,
                    lower_better: rng.gen_bool(0.3),
                });
            }
        }
        let programs: Vec<String> = (0..rng.gen_range(1..=5)).map(|p| format!("P{p}")).collect();
        // A small value pool makes ties and degenerate ranges common.
        let pool: Vec<f64> = (0..rng.gen_range(1..=6))
            .map(|_| f64::from(rng.gen_range(0..4000u32)) / 8.0)
            .collect();
        let missing_rate = rng.gen_range(0.0..0.6);
        let values = programs
            .iter()
            .map(|_| {
                indicators
                    .iter()
                    .map(|_| (!rng.gen_bool(missing_rate)).then(|| pool[rng.gen_range(0..pool.len())]))
                    .collect()
            })
            .collect();
        let template = builtin_template();
        let answers = programs
            .iter()
            .map(|_| {
                let mut answered = BTreeMap::new();
                for c in template.criteria() {
                    if rng.gen_bool(0.4) {
                        answered.insert(c.id.clone(), rng.gen_range(1..=5u8));
                    }
                }
                answered
            })
            .collect();
        Instance {
            indicators,
            programs,
            values,
            answers,
        }
    }

    pub fn schema(&self) -> Schema {
        let mut text = format!("#!gmi-schema random\n{}\n", SCHEMA_HEADER.join("|"));
        for c in Category::ALL {
            text.push_str(&format!("{0}-QN|{0}|synthetic|n.a.|n.a.|non-scorable|roll-up\n", c.code()));
            text.push_str(&format!("{0}-QL|{0}|rubric|numeric|scoring|default|rubric\n", c.code()));
        }
        for ind in &self.indicators {
            let direction = if ind.lower_better { "lower-better" } else { "higher-better" };
            text.push_str(&format!(
                "{}|{}|quantitative|numeric|count|{direction}|random\n",
                ind.id,
                ind.category.code()
            ));
        }
        load_schema(&text).expect("generated schema is valid")
    }

    pub fn datasets(&self, schema: &Schema) -> Vec<ProgramDataset> {
        self.programs
            .iter()
            .enumerate()
            .map(|(p, name)| {
                let mut ds = ProgramDataset::new(name.clone());
                for (i, ind) in self.indicators.iter().enumerate() {
                    let raw = self.values[p][i].map_or_else(|| "n.a.".to_string(), |v| v.to_string());
                    ds.observe(schema, &ind.id, &raw, None).unwrap();
                }
                ds.rubric = self.answers[p].clone();
                ds
            })
            .collect()
    }
}

fn rescale(column: &[Option<f64>]) -> Vec<Option<f64>> {
    let present: Vec<f64> = column.iter().flatten().copied().collect();
    if present.is_empty() {
        return vec![None; column.len()];
    }
    let mut lo = present[0];
    let mut hi = present[0];
    for &v in &present {
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    column
        .iter()
        .map(|v| v.map(|x| if hi == lo { 0.5 } else { (x - lo) / (hi - lo) }))
        .collect()
}

/// Composite per program, or `None` when the program has no category with
/// any input. Absent categories are rescaled away.
pub fn oracle(instance: &Instance) -> Vec<Option<f64>> {
    let n = instance.programs.len();
    let template = builtin_template();
    let mut categories = vec![[None::<f64>; 6]; n];
    for (c, category) in Category::ALL.into_iter().enumerate() {
        let mut per_program: Vec<Vec<f64>> = vec![Vec::new(); n];
        for (i, ind) in instance.indicators.iter().enumerate() {
            if ind.category != category {
                continue;
            }
            let column: Vec<Option<f64>> = (0..n).map(|p| instance.values[p][i]).collect();
            for (p, s) in rescale(&column).into_iter().enumerate() {
                if let Some(s) = s {
                    per_program[p].push(if ind.lower_better { 1.0 - s } else { s });
                }
            }
        }
        for p in 0..n {
            let rubric: Vec<f64> = template
                .criteria()
                .iter()
                .filter(|cr| cr.category == category)
                .filter_map(|cr| instance.answers[p].get(&cr.id))
                .map(|&s| (f64::from(s) - 1.0) / 4.0)
                .collect();
            let mut parts = per_program[p].clone();
            if !rubric.is_empty() {
                parts.push(rubric.iter().sum::<f64>() / rubric.len() as f64);
            }
            if !parts.is_empty() {
                categories[p][c] = Some(parts.iter().sum::<f64>() / parts.len() as f64);
            }
        }
    }
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    for c in 0..Category::ALL.len() {
        let column: Vec<Option<f64>> = categories.iter().map(|row| row[c]).collect();
        for (p, s) in rescale(&column).into_iter().enumerate() {
            if let Some(s) = s {
                sums[p] += s;
                counts[p] += 1;
            }
        }
    }
    (0..n)
        .map(|p| (counts[p] > 0).then(|| sums[p] * 6.0 / counts[p] as f64))
        .collect()
}
