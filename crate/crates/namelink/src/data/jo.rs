use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::metrics::{jaro_winkler, JwParams};
use crate::text::{clean, CleanMode};

/// Per-class size of the adversarial test set.
pub const JO_PER_CLASS: usize = 100;

/// A JW-ordered adversarial test set and how it was drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoSet {
    pub dataset: LabeledDataset,
    /// Positions of the selected records in the source test set.
    pub indices: Vec<usize>,
    pub missing_positives: usize,
    pub missing_negatives: usize,
}

/// Jaro-Winkler similarity of a record's cleaned names.
pub fn jw_score(a: &str, b: &str) -> f64 {
    jaro_winkler(clean(a, CleanMode::Classic).as_str(), clean(b, CleanMode::Classic).as_str(), JwParams::default())
}

/// The `per_class` most JW-similar negatives and least JW-similar positives.
///
/// Ties keep the original order. A class with fewer members is taken whole
/// and the shortfall recorded.
pub fn build_jo_testset_sized(test: &LabeledDataset, per_class: usize) -> JoSet {
    let scored: Vec<(usize, f64, u8)> = test
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| (i, jw_score(&r.name_a, &r.name_b), r.label))
        .collect();
    let mut neg: Vec<&(usize, f64, u8)> = scored.iter().filter(|s| s.2 == 0).collect();
    let mut pos: Vec<&(usize, f64, u8)> = scored.iter().filter(|s| s.2 == 1).collect();
    neg.sort_by(|x, y| y.1.total_cmp(&x.1));
    pos.sort_by(|x, y| x.1.total_cmp(&y.1));
    let take_neg = neg.len().min(per_class);
    let take_pos = pos.len().min(per_class);
    let mut indices: Vec<usize> = neg[..take_neg].iter().chain(&pos[..take_pos]).map(|s| s.0).collect();
    indices.sort_unstable();
    JoSet {
        dataset: test.subset(&indices),
        indices,
        missing_positives: per_class - take_pos,
        missing_negatives: per_class - take_neg,
    }
}

pub fn build_jo_testset(test: &LabeledDataset) -> JoSet {
    build_jo_testset_sized(test, JO_PER_CLASS)
}
