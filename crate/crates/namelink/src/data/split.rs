use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::error::{Error, Result};

/// Fraction of the large training set kept in the medium one.
pub const MEDIUM_FRACTION: f64 = 1.0 / 3.0;
/// Fraction of the medium training set kept in the small one.
pub const SMALL_FRACTION: f64 = 1.0 / 20.0;

/// Index sets of one fold: the held-out test part and nested training sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub test: Vec<usize>,
    pub large: Vec<usize>,
    pub medium: Vec<usize>,
    pub small: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub k: usize,
    pub seed: u64,
    /// Fold of every record.
    pub fold_of: Vec<usize>,
    pub folds: Vec<FoldSplit>,
}

/// Stratified sample of about `fraction` of `pool`, keeping the class proportions.
///
/// Returns sorted indices; `rng` drives the choice within each class.
pub fn stratified_sample(pool: &[usize], labels: &[u8], fraction: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut pos: Vec<usize> = pool.iter().copied().filter(|&i| labels[i] == 1).collect();
    let mut neg: Vec<usize> = pool.iter().copied().filter(|&i| labels[i] == 0).collect();
    let total = (fraction * pool.len() as f64).round() as usize;
    let n_pos = ((fraction * pos.len() as f64).round() as usize).min(total).min(pos.len());
    let n_neg = (total - n_pos).min(neg.len());
    pos.shuffle(rng);
    neg.shuffle(rng);
    let mut out: Vec<usize> = pos[..n_pos].iter().chain(&neg[..n_neg]).copied().collect();
    out.sort_unstable();
    out
}

/// Stratified `k`-fold plan with nested large/medium/small training sets per fold.
pub fn stratified_folds(ds: &LabeledDataset, k: usize, seed: u64) -> Result<SplitPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument("k must be at least 2".into()));
    }
    let labels = ds.labels();
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 1).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 0).collect();
    if pos.len() < k || neg.len() < k {
        return Err(Error::InvalidArgument(format!(
            "each class needs at least {k} members (positives {}, negatives {})",
            pos.len(),
            neg.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut fold_of = vec![0; labels.len()];
    // deal positives, then negatives, continuing the same rotation
    for (n, &i) in pos.iter().chain(&neg).enumerate() {
        fold_of[i] = n % k;
    }
    let mut folds = Vec::with_capacity(k);
    for f in 0..k {
        let test: Vec<usize> = (0..labels.len()).filter(|&i| fold_of[i] == f).collect();
        let large: Vec<usize> = (0..labels.len()).filter(|&i| fold_of[i] != f).collect();
        let mut frng = ChaCha8Rng::seed_from_u64(seed);
        frng.set_stream(1 + f as u64);
        let medium = stratified_sample(&large, &labels, MEDIUM_FRACTION, &mut frng);
        let small = stratified_sample(&medium, &labels, SMALL_FRACTION, &mut frng);
        folds.push(FoldSplit { test, large, medium, small });
    }
    Ok(SplitPlan { k, seed, fold_of, folds })
}
