use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Exclusion;
use crate::rubric::{SCALE_MAX, SCALE_MIN};
use crate::schema::Direction;

/// Value every present entry takes when all present values are equal.
pub const DEGENERATE_SCORE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalized {
    Score(f64),
    Excluded(Exclusion),
}

impl Normalized {
    pub fn score(self) -> Option<f64> {
        match self {
            Normalized::Score(s) => Some(s),
            Normalized::Excluded(_) => None,
        }
    }
}

/// Min-max scaling of one cross-program vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    /// Bounds over present values; `None` when nothing is present.
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Fewer than two distinct present values.
    pub degenerate: bool,
    /// Aligned with the input slice.
    pub scores: Vec<Normalized>,
}

/// `(x - min) / (max - min)` over the present values. Absent values are
/// excluded as missing and do not move the bounds; a degenerate range maps
/// every present value to 0.5.
pub fn minmax_normalize(values: &[Option<f64>]) -> Normalization {
    let present = values.iter().flatten().copied();
    let min = present.clone().reduce(f64::min);
    let max = present.reduce(f64::max);
    let degenerate = match (min, max) {
        (Some(lo), Some(hi)) => lo == hi,
        _ => true,
    };
    let scores = values
        .iter()
        .map(|v| match (v, min, max) {
            (None, ..) => Normalized::Excluded(Exclusion::Missing),
            (Some(_), ..) if degenerate => Normalized::Score(DEGENERATE_SCORE),
            (Some(x), Some(lo), Some(hi)) => Normalized::Score((x - lo) / (hi - lo)),
            _ => unreachable!("present value implies bounds"),
        })
        .collect();
    Normalization {
        min,
        max,
        degenerate,
        scores,
    }
}

/// Orients a normalized score so that larger is always better.
///
/// Panics on `NonScorable`: such indicators never reach normalization.
pub fn directional_score(normalized: f64, direction: Direction) -> f64 {
    match direction {
        Direction::HigherBetter => normalized,
        Direction::LowerBetter => 1.0 - normalized,
        Direction::NonScorable => panic!("directional_score called for a non-scorable indicator"),
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unweighted mean of the included indicator scores, with the rubric score
/// (when present) counted as one more element.
pub fn score_category(indicator_scores: &[f64], rubric_score: Option<f64>) -> Result<f64> {
    let mut all = indicator_scores.to_vec();
    all.extend(rubric_score);
    if all.is_empty() {
        return Err(Error::EmptyCategory);
    }
    Ok(mean(&all))
}

/// Maps a 1..5 rubric answer onto [0, 1].
pub fn rubric_to_unit(score: i64) -> Result<f64> {
    let (lo, hi) = (i64::from(SCALE_MIN), i64::from(SCALE_MAX));
    if !(lo..=hi).contains(&score) {
        return Err(Error::RubricRange {
            criterion: String::new(),
            score,
        });
    }
    Ok((score - lo) as f64 / (hi - lo) as f64)
}

pub fn rubric_category_score(responses: &[i64]) -> Result<f64> {
    if responses.is_empty() {
        return Err(Error::EmptyCategory);
    }
    let units = responses
        .iter()
        .map(|&s| rubric_to_unit(s))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(&units))
}

/// Mean of unit scores already produced by `rubric_to_unit`.
pub(crate) fn mean_of_units(units: &[f64]) -> Option<f64> {
    (!units.is_empty()).then(|| mean(units))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(n: &Normalization) -> Vec<Option<f64>> {
        n.scores.iter().map(|s| s.score()).collect()
    }

    #[test]
    fn table_row_example() {
        // Hand arithmetic: min 3.8364, range 1.6936.
        let n = minmax_normalize(&[Some(3.8764), Some(3.8364), Some(4.3498), Some(5.5300)]);
        let expected = [0.0236, 0.0, 0.3031, 1.0];
        for (got, want) in scores(&n).into_iter().zip(expected) {
            assert!((got.unwrap() - want).abs() < 1e-3, "{got:?} vs {want}");
        }
        assert_eq!((n.min, n.max), (Some(3.8364), Some(5.53)));
    }

    #[test]
    fn degenerate_and_endpoints() {
        let n = minmax_normalize(&[Some(7.0), Some(7.0), Some(7.0)]);
        assert!(n.degenerate);
        assert_eq!(scores(&n), vec![Some(0.5); 3]);
        assert_eq!(scores(&minmax_normalize(&[Some(0.0), Some(1.0)])), vec![Some(0.0), Some(1.0)]);
        assert_eq!(scores(&minmax_normalize(&[Some(42.0)])), vec![Some(0.5)]);
    }

    #[test]
    fn missing_is_excluded() {
        let n = minmax_normalize(&[Some(3.0), None, Some(5.0)]);
        assert_eq!(
            n.scores,
            vec![
                Normalized::Score(0.0),
                Normalized::Excluded(Exclusion::Missing),
                Normalized::Score(1.0)
            ]
        );
        let empty = minmax_normalize(&[None, None]);
        assert_eq!(empty.min, None);
        assert!(empty.scores.iter().all(|s| s.score().is_none()));
    }

    #[test]
    fn directions() {
        assert_eq!(directional_score(0.3, Direction::HigherBetter), 0.3);
        assert!((directional_score(0.3, Direction::LowerBetter) - 0.7).abs() < 1e-15);
        assert_eq!(directional_score(1.0, Direction::LowerBetter), 0.0);
    }

    #[test]
    #[should_panic]
    fn non_scorable_direction_is_a_contract_violation() {
        directional_score(0.5, Direction::NonScorable);
    }

    #[test]
    fn category_means() {
        assert_eq!(score_category(&[0.5, 0.5], Some(0.5)).unwrap(), 0.5);
        assert_eq!(score_category(&[0.0, 1.0], None).unwrap(), 0.5);
        // (0.2 + 0.4 + 0.9 + 0.5) / 4
        assert!((score_category(&[0.2, 0.4, 0.9], Some(0.5)).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(score_category(&[], Some(0.25)).unwrap(), 0.25);
        assert_eq!(score_category(&[], None), Err(Error::EmptyCategory));
    }

    #[test]
    fn rubric_scale() {
        assert_eq!(rubric_to_unit(1).unwrap(), 0.0);
        assert_eq!(rubric_to_unit(3).unwrap(), 0.5);
        assert_eq!(rubric_to_unit(5).unwrap(), 1.0);
        assert!(matches!(rubric_to_unit(0), Err(Error::RubricRange { score: 0, .. })));
        assert!(matches!(rubric_to_unit(6), Err(Error::RubricRange { score: 6, .. })));

        assert_eq!(rubric_category_score(&[3, 3, 3]).unwrap(), 0.5);
        assert_eq!(rubric_category_score(&[1, 5]).unwrap(), 0.5);
        // (0.25 + 0.75 + 1.0) / 3 = 2/3
        assert!((rubric_category_score(&[2, 4, 5]).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(rubric_category_score(&[]), Err(Error::EmptyCategory));
    }
}
