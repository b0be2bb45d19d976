//! Decision stumps over a single score and a class-balanced random forest
//! over the full feature vector, with Gini (MDI) feature importance.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{FeatureVector, MetricKind, N_FEATURES};

/// Per-class weights `n / (2 * n_class)`, indexed by label.
pub fn balanced_class_weights(labels: &[u8]) -> Result<[f64; 2]> {
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateTraining(format!(
            "need both classes, got {neg} negatives and {pos} positives"
        )));
    }
    let n = labels.len() as f64;
    Ok([n / (2.0 * neg as f64), n / (2.0 * pos as f64)])
}

fn gini(w_neg: f64, w_pos: f64) -> f64 {
    let total = w_neg + w_pos;
    if total <= 0.0 {
        return 0.0;
    }
    let p = w_pos / total;
    let q = w_neg / total;
    1.0 - p * p - q * q
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi {
        lo
    } else {
        mid
    }
}

/// Best weighted-Gini split of one feature. `order` must be sorted by value.
///
/// Returns `(child impurity, threshold)`; `None` when the values are constant.
fn best_split(values: &[f64], weights: &[[f64; 2]], order: &[usize]) -> Option<(f64, f64)> {
    let mut total = [0.0; 2];
    for &i in order {
        total[0] += weights[i][0];
        total[1] += weights[i][1];
    }
    let w_total = total[0] + total[1];
    let mut left = [0.0; 2];
    let mut best: Option<(f64, f64)> = None;
    for k in 0..order.len().saturating_sub(1) {
        let i = order[k];
        left[0] += weights[i][0];
        left[1] += weights[i][1];
        let (v, next) = (values[i], values[order[k + 1]]);
        if next <= v {
            continue;
        }
        let right = [total[0] - left[0], total[1] - left[1]];
        let wl = left[0] + left[1];
        let wr = right[0] + right[1];
        let impurity = (wl * gini(left[0], left[1]) + wr * gini(right[0], right[1])) / w_total;
        // strict comparison keeps the smallest threshold on ties
        if best.is_none_or(|(b, _)| impurity < b) {
            best = Some((impurity, midpoint(v, next)));
        }
    }
    best
}

/// A single-split tree over one score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionStump {
    pub feature_index: usize,
    pub threshold: f64,
    /// Positive-class probability for `x <= threshold`.
    pub left_prob: f64,
    /// Positive-class probability for `x > threshold`.
    pub right_prob: f64,
}

impl DecisionStump {
    /// Fits on raw scores, minimizing class-weighted Gini over midpoints.
    pub fn fit(scores: &[f64], labels: &[u8]) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} scores but {} labels",
                scores.len(),
                labels.len()
            )));
        }
        let cw = balanced_class_weights(labels)?;
        let weights: Vec<[f64; 2]> = labels
            .iter()
            .map(|&y| if y == 1 { [0.0, cw[1]] } else { [cw[0], 0.0] })
            .collect();
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
        let (_, threshold) = best_split(scores, &weights, &order).ok_or_else(|| {
            Error::DegenerateTraining("all scores identical, no split point".into())
        })?;
        let mut left = [0.0; 2];
        let mut right = [0.0; 2];
        for (&x, w) in scores.iter().zip(&weights) {
            let side = if x <= threshold { &mut left } else { &mut right };
            side[0] += w[0];
            side[1] += w[1];
        }
        Ok(Self {
            feature_index: 0,
            threshold,
            left_prob: left[1] / (left[0] + left[1]),
            right_prob: right[1] / (right[0] + right[1]),
        })
    }

    /// Fits on the column of `kind` inside each feature vector.
    pub fn fit_metric(features: &[FeatureVector], labels: &[u8], kind: MetricKind) -> Result<Self> {
        let scores: Vec<f64> = features.iter().map(|f| f.score(kind)).collect();
        let mut stump = Self::fit(&scores, labels)?;
        stump.feature_index = kind.feature_index();
        Ok(stump)
    }

    pub fn predict_score(&self, x: f64) -> f64 {
        if x <= self.threshold {
            self.left_prob
        } else {
            self.right_prob
        }
    }

    pub fn predict_proba(&self, features: &FeatureVector) -> f64 {
        self.predict_score(features.to_array()[self.feature_index])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeighting {
    Balanced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub max_depth: usize,
    pub n_trees: usize,
    pub class_weighting: ClassWeighting,
    /// Features examined per split (more are drawn if none of them can split).
    pub features_per_split: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            max_depth: 3,
            n_trees: 100,
            class_weighting: ClassWeighting::Balanced,
            features_per_split: (N_FEATURES as f64).sqrt().ceil() as usize,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        prob: f64,
        weight: f64,
        impurity: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        weight: f64,
        impurity: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn predict(&self, x: &[f64; N_FEATURES]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { prob, .. } => return *prob,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }

    fn weight(&self) -> f64 {
        match self {
            Node::Leaf { weight, .. } | Node::Split { weight, .. } => *weight,
        }
    }

    fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn impurity(&self) -> f64 {
        match self {
            Node::Leaf { impurity, .. } | Node::Split { impurity, .. } => *impurity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub root: Node,
}

impl Tree {
    pub fn predict_proba(&self, x: &[f64; N_FEATURES]) -> f64 {
        self.root.predict(x)
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Weighted impurity decrease per feature, divided by the root weight.
    fn impurity_decrease(&self) -> [f64; N_FEATURES] {
        fn walk(n: &Node, out: &mut [f64; N_FEATURES]) {
            if let Node::Split {
                feature,
                weight,
                impurity,
                left,
                right,
                ..
            } = n
            {
                out[*feature] += weight * impurity
                    - left.weight() * left.impurity()
                    - right.weight() * right.impurity();
                walk(left, out);
                walk(right, out);
            }
        }
        let mut out = [0.0; N_FEATURES];
        walk(&self.root, &mut out);
        let root_w = self.root.weight();
        if root_w > 0.0 {
            for v in &mut out {
                *v /= root_w;
            }
        }
        out
    }
}

struct Grower<'a> {
    x: &'a [[f64; N_FEATURES]],
    weights: Vec<[f64; 2]>,
    params: &'a ForestParams,
    rng: ChaCha8Rng,
    columns: &'a [Vec<f64>],
}

impl Grower<'_> {
    fn grow(&mut self, samples: Vec<usize>, depth: usize) -> Node {
        let mut w = [0.0; 2];
        for &i in &samples {
            w[0] += self.weights[i][0];
            w[1] += self.weights[i][1];
        }
        let weight = w[0] + w[1];
        let impurity = gini(w[0], w[1]);
        let leaf = Node::Leaf {
            prob: if weight > 0.0 { w[1] / weight } else { 0.5 },
            weight,
            impurity,
        };
        if depth >= self.params.max_depth || impurity <= f64::EPSILON || samples.len() < 2 {
            return leaf;
        }

        let mut features: Vec<usize> = (0..N_FEATURES).collect();
        features.shuffle(&mut self.rng);
        let mut best: Option<(f64, usize, f64)> = None;
        for (visited, &f) in features.iter().enumerate() {
            if visited >= self.params.features_per_split && best.is_some() {
                break;
            }
            let col = &self.columns[f];
            let mut order = samples.clone();
            order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
            if let Some((imp, thr)) = best_split(col, &self.weights, &order) {
                let better = match best {
                    None => true,
                    Some((bi, bf, bt)) => {
                        imp < bi || (imp == bi && (f < bf || (f == bf && thr < bt)))
                    }
                };
                if better {
                    best = Some((imp, f, thr));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return leaf;
        };
        let (left_s, right_s): (Vec<usize>, Vec<usize>) = samples
            .into_iter()
            .partition(|&i| self.x[i][feature] <= threshold);
        let left = self.grow(left_s, depth + 1);
        let right = self.grow(right_s, depth + 1);
        Node::Split {
            feature,
            threshold,
            weight,
            impurity,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub params: ForestParams,
    /// Per-feature importance averaged over trees, before final normalization.
    pub importance_raw: [f64; N_FEATURES],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub importance: [f64; N_FEATURES],
    /// Filled when several reports are aggregated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std: Option<[f64; N_FEATURES]>,
}

impl ImportanceReport {
    /// Mean and standard deviation across, e.g., cross-validation folds.
    pub fn aggregate(reports: &[ImportanceReport]) -> Option<ImportanceReport> {
        if reports.is_empty() {
            return None;
        }
        let n = reports.len() as f64;
        let mut mean = [0.0; N_FEATURES];
        for r in reports {
            for (m, v) in mean.iter_mut().zip(r.importance) {
                *m += v / n;
            }
        }
        let mut std = [0.0; N_FEATURES];
        for r in reports {
            for ((s, v), m) in std.iter_mut().zip(r.importance).zip(mean) {
                *s += (v - m).powi(2) / n;
            }
        }
        Some(ImportanceReport {
            importance: mean,
            std: Some(std.map(f64::sqrt)),
        })
    }
}

impl Forest {
    pub fn fit(x: &[[f64; N_FEATURES]], labels: &[u8], params: &ForestParams) -> Result<Self> {
        if x.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} rows but {} labels",
                x.len(),
                labels.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::DegenerateTraining("need at least 2 samples".into()));
        }
        if params.max_depth == 0 || params.n_trees == 0 || params.features_per_split == 0 {
            return Err(Error::InvalidArgument(
                "max_depth, n_trees and features_per_split must be >= 1".into(),
            ));
        }
        let class_w = match params.class_weighting {
            ClassWeighting::Balanced => balanced_class_weights(labels)?,
        };
        let columns: Vec<Vec<f64>> = (0..N_FEATURES)
            .map(|f| x.iter().map(|row| row[f]).collect())
            .collect();
        let n = x.len();

        let trees: Vec<Tree> = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                rng.set_stream(t as u64);
                let mut counts = vec![0u32; n];
                if params.bootstrap {
                    for _ in 0..n {
                        counts[rng.random_range(0..n)] += 1;
                    }
                } else {
                    counts.fill(1);
                }
                let weights: Vec<[f64; 2]> = labels
                    .iter()
                    .zip(&counts)
                    .map(|(&y, &c)| {
                        let w = class_w[y as usize] * c as f64;
                        if y == 1 {
                            [0.0, w]
                        } else {
                            [w, 0.0]
                        }
                    })
                    .collect();
                let samples: Vec<usize> = (0..n).filter(|&i| counts[i] > 0).collect();
                let mut grower = Grower {
                    x,
                    weights,
                    params,
                    rng,
                    columns: &columns,
                };
                Tree {
                    root: grower.grow(samples, 0),
                }
            })
            .collect();

        let mut forest = Forest {
            trees,
            params: params.clone(),
            importance_raw: [0.0; N_FEATURES],
        };
        forest.importance_raw = forest.tree_mean_importance();
        Ok(forest)
    }

    fn tree_mean_importance(&self) -> [f64; N_FEATURES] {
        let mut acc = [0.0; N_FEATURES];
        for tree in &self.trees {
            let dec = tree.impurity_decrease();
            let total: f64 = dec.iter().sum();
            if total > 0.0 {
                for (a, d) in acc.iter_mut().zip(dec) {
                    *a += d / total;
                }
            }
        }
        let n = self.trees.len() as f64;
        acc.map(|v| v / n)
    }

    /// Mean of the per-tree leaf probabilities.
    pub fn predict_row(&self, x: &[f64; N_FEATURES]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_proba(x)).sum();
        sum / self.trees.len() as f64
    }

    pub fn predict_proba(&self, features: &FeatureVector) -> f64 {
        self.predict_row(&features.to_array())
    }

    /// Gini importance normalized to sum to one.
    pub fn mdi_importance(&self) -> ImportanceReport {
        let total: f64 = self.importance_raw.iter().sum();
        let importance = if total > 0.0 {
            self.importance_raw.map(|v| v / total)
        } else {
            [0.0; N_FEATURES]
        };
        ImportanceReport {
            importance,
            std: None,
        }
    }
}
