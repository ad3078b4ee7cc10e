mod common;

use common::{oracle, Instance};
use gmi_core::{Error, GmiOptions, Pipeline};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn pipeline_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d69);
    let options = GmiOptions {
        allow_partial: true,
        ..Default::default()
    };
    for case in 0..1000 {
        let instance = Instance::random(&mut rng);
        let schema = instance.schema();
        let datasets = instance.datasets(&schema);
        let expected = oracle(&instance);
        match Pipeline::new(&schema).options(options).run(&datasets) {
            Ok(scored) => {
                for (r, want) in scored.results.iter().zip(&expected) {
                    let want = want.unwrap_or_else(|| panic!("case {case}: oracle has no composite for {}", r.program));
                    assert!((r.gmi - want).abs() < 1e-9, "case {case} {}: {} vs {want}", r.program, r.gmi);
                }
            }
            Err(Error::NoScorableCategories(p)) => {
                let idx = instance.programs.iter().position(|n| *n == p).unwrap();
                assert_eq!(expected[idx], None, "case {case}");
            }
            Err(e) => panic!("case {case}: {e}"),
        }
    }
}
