//! Synthetic inputs for the benchmarks.

use gmi_core::schema::DataType;
use gmi_core::{builtin_schema, IndicatorDef, ProgramDataset, Schema};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scorable(schema: &Schema) -> Vec<&IndicatorDef> {
    schema.indicators().iter().filter(|d| d.is_scorable()).collect()
}

fn cell(def: &IndicatorDef, rng: &mut ChaCha8Rng) -> String {
    if rng.gen_bool(0.1) {
        return "n.a.".to_string();
    }
    match (def.data_type, def.unit.as_str()) {
        (Some(DataType::Binary), _) => rng.gen_range(0..=1).to_string(),
        (_, "scoring") => rng.gen_range(0..=3).to_string(),
        _ => rng.gen_range(1..100_000).to_string(),
    }
}

/// `programs` datasets over the builtin schema: every scorable indicator
/// observed, roughly one cell in ten missing, every rubric criterion answered.
pub fn synthetic_datasets(programs: usize, seed: u64) -> (Schema, Vec<ProgramDataset>) {
    let schema = builtin_schema();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let template = gmi_core::builtin_template();
    let datasets = (0..programs)
        .map(|p| {
            let mut ds = ProgramDataset::new(format!("Program {p}"));
            for def in scorable(&schema) {
                let raw = cell(def, &mut rng);
                ds.observe(&schema, &def.id, &raw, None).expect("synthetic cell parses");
            }
            for c in template.criteria() {
                ds.rubric.insert(c.id.clone(), rng.gen_range(1..=5));
            }
            ds
        })
        .collect();
    (schema, datasets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gmi_core::Pipeline;

    #[test]
    fn synthetic_inputs_score() {
        let (schema, datasets) = synthetic_datasets(5, 1);
        let scored = Pipeline::new(&schema).run(&datasets).unwrap();
        assert_eq!(scored.results.len(), 5);
    }
}
