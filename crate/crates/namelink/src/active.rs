//! Pool-based active learning with noisy least-confidence selection.
//!
//! A run is a state machine: [`AlRun::propose`] issues the next batch,
//! [`AlRun::commit`] takes its labels, retrains from scratch and evaluates.
//! [`AlRun::run_to_end`] drives both against a [`LabelSource`].

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::compute_metrics;
use crate::error::{Error, Result};
use crate::learner::{LearnerKind, Model, PairSet};

/// Noise level used when none is given.
pub const DEFAULT_SIGMA: f64 = 1.0 / 6.0;
/// Early-stopping tolerance used when stopping is enabled without one.
pub const DEFAULT_THETA: f64 = 0.01;
pub const CHECKPOINT_FORMAT: &str = "namelink-al-checkpoint-v1";

/// `1/2 - |1/2 - p|`: zero when confident, one half at `p = 0.5`.
pub fn uncertainty(p: f64) -> f64 {
    0.5 - (0.5 - p).abs()
}

/// [`uncertainty`] plus a fresh `Normal(0, sigma)` draw.
pub fn noisy_uncertainty(p: f64, sigma: f64, rng: &mut ChaCha8Rng) -> f64 {
    if sigma == 0.0 {
        return uncertainty(p);
    }
    let eps = Normal::new(0.0, sigma).expect("sigma is finite and non-negative").sample(rng);
    uncertainty(p) + eps
}

pub fn early_stop_check(acc_pre: f64, acc_post: f64, theta: f64) -> bool {
    (acc_post - acc_pre).abs() < theta
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSchedule {
    pub sizes: Vec<usize>,
}

impl BatchSchedule {
    /// Doubling from 100 up to 800, then 800, 800, 1400, 1400.
    pub fn standard() -> Self {
        Self { sizes: vec![100, 200, 400, 800, 800, 800, 1400, 1400] }
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn validate(&self, pool: usize) -> Result<()> {
        if self.sizes.contains(&0) {
            return Err(Error::InvalidArgument("batch sizes must be positive".into()));
        }
        if self.total() != pool {
            return Err(Error::InvalidArgument(format!("schedule covers {} pairs but the pool holds {pool}", self.total())));
        }
        Ok(())
    }
}

impl Default for BatchSchedule {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QueryStrategy {
    LeastConfident { sigma: f64 },
    Random,
}

impl Default for QueryStrategy {
    fn default() -> Self {
        QueryStrategy::LeastConfident { sigma: DEFAULT_SIGMA }
    }
}

impl QueryStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            QueryStrategy::LeastConfident { .. } => "lc",
            QueryStrategy::Random => "random",
        }
    }
}

/// Picks up to `b` positions of a pool whose match probabilities are `pool_probs`.
/// Returns `(position, uncertainty score)` in selection order.
pub fn select_batch(pool_probs: &[f64], b: usize, strategy: &QueryStrategy, rng: &mut ChaCha8Rng) -> Vec<(usize, f64)> {
    let b = b.min(pool_probs.len());
    match strategy {
        QueryStrategy::LeastConfident { sigma } => {
            let mut scored: Vec<(usize, f64)> =
                pool_probs.iter().enumerate().map(|(i, &p)| (i, noisy_uncertainty(p, *sigma, rng))).collect();
            // stable sort keeps pool order among ties
            scored.sort_by(|x, y| y.1.total_cmp(&x.1));
            scored.truncate(b);
            scored
        }
        QueryStrategy::Random => {
            let positions: Vec<usize> = (0..pool_probs.len()).collect();
            positions.choose_multiple(rng, b).map(|&i| (i, uncertainty(pool_probs[i]))).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlConfig {
    pub schedule: BatchSchedule,
    pub strategy: QueryStrategy,
    pub learner: LearnerKind,
    pub seed: u64,
    /// Stop once `|BA_post - BA_pre|` falls below this; off when `None`.
    #[serde(default)]
    pub early_stop: Option<f64>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    0.5
}

/// One labelled evaluation set, addressed by name in the history.
#[derive(Debug, Clone)]
pub struct EvalSet {
    pub name: String,
    pub pairs: PairSet,
    pub labels: Vec<u8>,
}

/// BA values recorded after each step. Step 0 is the seed model, which has no batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub step: usize,
    pub n_labelled: usize,
    pub ba_pre: Option<f64>,
    pub ba_post: Option<f64>,
    pub ba_pool: Option<f64>,
    pub ba_test: Vec<(String, f64)>,
}

pub fn history_csv(rows: &[HistoryRow]) -> String {
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from("step,n_labelled,ba_pre,ba_post,ba_pool");
    if let Some(first) = rows.first() {
        for (name, _) in &first.ba_test {
            out.push_str(&format!(",ba_test_{name}"));
        }
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{},{},{}", r.step, r.n_labelled, fmt(r.ba_pre), fmt(r.ba_post), fmt(r.ba_pool)));
        for (_, v) in &r.ba_test {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

/// A batch waiting for labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingBatch {
    pub step: usize,
    /// Universe indices, highest uncertainty first.
    pub indices: Vec<usize>,
    pub uncertainty: Vec<f64>,
    /// Predictions of the current model, kept for the pre-train evaluation.
    pub predictions: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    AwaitingLabels,
    Ready,
    Done,
}

/// Everything that evolves during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlState {
    /// Labelled universe indices in the order they were labelled.
    pub labelled: Vec<usize>,
    pub labels: BTreeMap<usize, u8>,
    /// Unlabelled universe indices, ascending.
    pub pool: Vec<usize>,
    pub step: usize,
    pub model: Model,
    pub history: Vec<HistoryRow>,
    pub pending: Option<PendingBatch>,
    pub stopped_early: bool,
}

impl AlState {
    pub fn status(&self, schedule: &BatchSchedule) -> RunStatus {
        if self.pending.is_some() {
            RunStatus::AwaitingLabels
        } else if self.stopped_early || self.step >= schedule.sizes.len() || self.pool.is_empty() {
            RunStatus::Done
        } else {
            RunStatus::Ready
        }
    }
}

/// Provides labels for universe indices.
pub trait LabelSource {
    fn labels(&mut self, indices: &[usize]) -> Result<Vec<u8>>;
}

/// Labels read from a pre-labelled dataset.
#[derive(Debug, Clone)]
pub struct StoredOracle {
    labels: Vec<u8>,
}

impl StoredOracle {
    pub fn new(labels: Vec<u8>) -> Self {
        Self { labels }
    }
}

impl LabelSource for StoredOracle {
    fn labels(&mut self, indices: &[usize]) -> Result<Vec<u8>> {
        indices
            .iter()
            .map(|&i| self.labels.get(i).copied().ok_or_else(|| Error::LabelSource(format!("no stored label for pair {i}"))))
            .collect()
    }
}

/// Labels submitted by a person. Fails while any requested label is missing.
#[derive(Debug, Clone, Default)]
pub struct HumanQueue {
    submitted: BTreeMap<usize, u8>,
}

impl HumanQueue {
    pub fn submit(&mut self, index: usize, label: u8) -> Result<()> {
        if label > 1 {
            return Err(Error::InvalidArgument(format!("label must be 0 or 1, got {label}")));
        }
        self.submitted.insert(index, label);
        Ok(())
    }

    pub fn has(&self, index: usize) -> bool {
        self.submitted.contains_key(&index)
    }
}

impl LabelSource for HumanQueue {
    fn labels(&mut self, indices: &[usize]) -> Result<Vec<u8>> {
        let missing = indices.iter().filter(|i| !self.submitted.contains_key(i)).count();
        if missing > 0 {
            return Err(Error::LabelSource(format!("{missing} labels still pending")));
        }
        Ok(indices.iter().map(|i| self.submitted[i]).collect())
    }
}

fn mix(seed: u64, j: u64) -> u64 {
    let mut z = seed ^ j.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the model trained after `step` batches.
pub fn learner_seed(seed: u64, step: usize) -> u64 {
    mix(seed, 2 * step as u64)
}

fn selection_rng(seed: u64, step: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, 2 * step as u64 + 1))
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    config: AlConfig,
    state: AlState,
}

/// A run bound to its data. Only `state` changes.
pub struct AlRun {
    pub config: AlConfig,
    pub universe: PairSet,
    pub tests: Vec<EvalSet>,
    /// Ground truth for the whole universe, used only to score the remaining pool.
    pub pool_truth: Option<Vec<u8>>,
    pub state: AlState,
}

impl AlRun {
    /// Trains the seed model on `seed_labels` (universe index, label) and records step 0.
    pub fn start(config: AlConfig, universe: PairSet, seed_labels: &[(usize, u8)], tests: Vec<EvalSet>) -> Result<Self> {
        let n = universe.len();
        let mut labels = BTreeMap::new();
        for &(i, y) in seed_labels {
            if i >= n {
                return Err(Error::InvalidArgument(format!("seed index {i} outside a universe of {n}")));
            }
            if y > 1 {
                return Err(Error::InvalidArgument(format!("label must be 0 or 1, got {y}")));
            }
            if labels.insert(i, y).is_some() {
                return Err(Error::InvalidArgument(format!("seed index {i} repeated")));
            }
        }
        if !(labels.values().any(|&y| y == 0) && labels.values().any(|&y| y == 1)) {
            return Err(Error::DegenerateTraining("the seed set needs both classes".into()));
        }
        let pool: Vec<usize> = (0..n).filter(|i| !labels.contains_key(i)).collect();
        config.schedule.validate(pool.len())?;
        let labelled: Vec<usize> = seed_labels.iter().map(|s| s.0).collect();
        let model = Self::train(&config, &universe, &labels, 0)?;
        let mut run = Self {
            config,
            universe,
            tests,
            pool_truth: None,
            state: AlState { labelled, labels, pool, step: 0, model, history: Vec::new(), pending: None, stopped_early: false },
        };
        let row = run.evaluate(None, None);
        run.state.history.push(row);
        Ok(run)
    }

    /// Supplies pool ground truth and rescores the latest history row.
    pub fn with_pool_truth(mut self, truth: Vec<u8>) -> Self {
        self.pool_truth = Some(truth);
        if let Some(last) = self.state.history.pop() {
            let row = self.evaluate(last.ba_pre, last.ba_post);
            self.state.history.push(row);
        }
        self
    }

    fn train(config: &AlConfig, universe: &PairSet, labels: &BTreeMap<usize, u8>, step: usize) -> Result<Model> {
        let idx: Vec<usize> = labels.keys().copied().collect();
        let y: Vec<u8> = labels.values().copied().collect();
        config.learner.with_seed(learner_seed(config.seed, step)).fit(universe, &idx, &y)
    }

    fn ba(&self, probs: &[f64], y: &[u8]) -> Option<f64> {
        if y.is_empty() {
            return None;
        }
        compute_metrics(probs, y, self.config.threshold).ok().map(|r| r.ba)
    }

    fn evaluate(&self, ba_pre: Option<f64>, ba_post: Option<f64>) -> HistoryRow {
        let s = &self.state;
        let ba_pool = match &self.pool_truth {
            Some(truth) if !s.pool.is_empty() => {
                let y: Vec<u8> = s.pool.iter().map(|&i| truth[i]).collect();
                self.ba(&s.model.predict(&self.universe, &s.pool), &y)
            }
            _ => None,
        };
        let ba_test = self
            .tests
            .iter()
            .map(|t| (t.name.clone(), self.ba(&s.model.predict_all(&t.pairs), &t.labels).unwrap_or(f64::NAN)))
            .collect();
        HistoryRow { step: s.step, n_labelled: s.labelled.len(), ba_pre, ba_post, ba_pool, ba_test }
    }

    pub fn status(&self) -> RunStatus {
        self.state.status(&self.config.schedule)
    }

    /// Issues the next batch, or returns the one already pending. `None` once the run is done.
    pub fn propose(&mut self) -> Option<&PendingBatch> {
        if self.state.pending.is_none() {
            if self.status() == RunStatus::Done {
                return None;
            }
            let s = &self.state;
            let probs = s.model.predict(&self.universe, &s.pool);
            let b = self.config.schedule.sizes[s.step];
            let mut rng = selection_rng(self.config.seed, s.step);
            let chosen = select_batch(&probs, b, &self.config.strategy, &mut rng);
            self.state.pending = Some(PendingBatch {
                step: s.step,
                indices: chosen.iter().map(|&(k, _)| s.pool[k]).collect(),
                uncertainty: chosen.iter().map(|c| c.1).collect(),
                predictions: chosen.iter().map(|&(k, _)| probs[k]).collect(),
            });
        }
        self.state.pending.as_ref()
    }

    /// Labels the pending batch, retrains from scratch and records the step.
    pub fn commit(&mut self, labels: &[u8]) -> Result<&HistoryRow> {
        let pending = self.state.pending.clone().ok_or_else(|| Error::InvalidArgument("no batch is pending".into()))?;
        if labels.len() != pending.indices.len() {
            return Err(Error::InvalidArgument(format!("{} labels for a batch of {}", labels.len(), pending.indices.len())));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidArgument(format!("label must be 0 or 1, got {bad}")));
        }
        let mut merged = self.state.labels.clone();
        for (&i, &y) in pending.indices.iter().zip(labels) {
            merged.insert(i, y);
        }
        let model = Self::train(&self.config, &self.universe, &merged, pending.step + 1)?;
        let ba_pre = self.ba(&pending.predictions, labels);
        let post_probs = model.predict(&self.universe, &pending.indices);
        let ba_post = self.ba(&post_probs, labels);

        let s = &mut self.state;
        let taken: std::collections::BTreeSet<usize> = pending.indices.iter().copied().collect();
        s.pool.retain(|i| !taken.contains(i));
        s.labelled.extend(&pending.indices);
        s.labels = merged;
        s.model = model;
        s.step += 1;
        s.pending = None;
        let row = self.evaluate(ba_pre, ba_post);
        if let (Some(theta), Some(pre), Some(post)) = (self.config.early_stop, ba_pre, ba_post) {
            if early_stop_check(pre, post, theta) {
                self.state.stopped_early = true;
            }
        }
        self.state.history.push(row);
        Ok(self.state.history.last().expect("row just pushed"))
    }

    /// Runs until done. If the source fails, the state is checkpointed (when a path is given)
    /// and the error returned; the run can be resumed from that file.
    pub fn run_to_end(&mut self, source: &mut dyn LabelSource, checkpoint: Option<&Path>) -> Result<()> {
        while let Some(batch) = self.propose() {
            let indices = batch.indices.clone();
            match source.labels(&indices) {
                Ok(y) => {
                    self.commit(&y)?;
                }
                Err(e) => {
                    if let Some(path) = checkpoint {
                        self.save_checkpoint(path)?;
                    }
                    return Err(e);
                }
            }
            if let Some(path) = checkpoint {
                self.save_checkpoint(path)?;
            }
        }
        Ok(())
    }

    pub fn history_csv(&self) -> String {
        history_csv(&self.state.history)
    }

    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        let file = Checkpoint { format: CHECKPOINT_FORMAT.into(), config: self.config.clone(), state: self.state.clone() };
        crate::checkpoint::write_atomic(path, serde_json::to_string(&file)?.as_bytes())
    }

    /// Rebinds a saved run to its data. Refuses files written by another format version.
    pub fn resume(path: &Path, universe: PairSet, tests: Vec<EvalSet>, pool_truth: Option<Vec<u8>>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        #[derive(Deserialize)]
        struct Header {
            format: String,
        }
        let header: Header = serde_json::from_str(&text)?;
        if header.format != CHECKPOINT_FORMAT {
            return Err(Error::VersionMismatch { found: header.format, expected: CHECKPOINT_FORMAT.into() });
        }
        let file: Checkpoint = serde_json::from_str(&text)?;
        let max = file.state.labelled.iter().chain(&file.state.pool).max().copied();
        if max.is_some_and(|m| m >= universe.len()) || file.state.labelled.len() + file.state.pool.len() != universe.len() {
            return Err(Error::InvalidArgument("checkpoint does not match the supplied pairs".into()));
        }
        Ok(Self { config: file.config, universe, tests, pool_truth, state: file.state })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricKind;

    #[test]
    fn uncertainty_values() {
        assert_eq!(uncertainty(0.5), 0.5);
        assert_eq!(uncertainty(1.0), 0.0);
        assert_eq!(uncertainty(0.0), 0.0);
        assert!((uncertainty(0.9) - 0.1).abs() < 1e-15);
        // two-class form of 1 - max_a p_a
        for p in [0.0, 0.13, 0.5, 0.77, 1.0] {
            assert!((uncertainty(p) - (1.0 - f64::max(p, 1.0 - p))).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_sigma_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for p in [0.1, 0.5, 0.93] {
            assert_eq!(noisy_uncertainty(p, 0.0, &mut rng), uncertainty(p));
        }
    }

    #[test]
    fn noise_mean_is_within_three_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let sigma = DEFAULT_SIGMA;
        let mean: f64 = (0..n).map(|_| noisy_uncertainty(0.3, sigma, &mut rng) - uncertainty(0.3)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 * sigma / (n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn lc_takes_the_most_uncertain_with_stable_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let lc = QueryStrategy::LeastConfident { sigma: 0.0 };
        assert_eq!(select_batch(&[0.5, 0.1, 0.0], 1, &lc, &mut rng)[0].0, 0);
        let picked: Vec<usize> = select_batch(&[0.9, 0.4, 0.6, 0.1], 2, &lc, &mut rng).iter().map(|c| c.0).collect();
        assert_eq!(picked, vec![1, 2]);
        assert_eq!(select_batch(&[0.2, 0.2, 0.2], 3, &lc, &mut rng).iter().map(|c| c.0).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(select_batch(&[0.2, 0.3], 10, &lc, &mut rng).len(), 2);
        assert!(select_batch(&[], 4, &lc, &mut rng).is_empty());
    }

    #[test]
    fn random_selection_is_seeded_and_distinct() {
        let probs = vec![0.5; 50];
        let a = select_batch(&probs, 10, &QueryStrategy::Random, &mut ChaCha8Rng::seed_from_u64(4));
        let b = select_batch(&probs, 10, &QueryStrategy::Random, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
        let mut idx: Vec<usize> = a.iter().map(|c| c.0).collect();
        idx.sort_unstable();
        idx.dedup();
        assert_eq!(idx.len(), 10);
    }

    #[test]
    fn early_stop_examples() {
        assert!(early_stop_check(0.80, 0.80, 0.01));
        assert!(!early_stop_check(0.60, 0.90, 0.01));
        assert!(early_stop_check(0.70, 0.705, 0.01));
    }

    #[test]
    fn standard_schedule_trajectory() {
        let s = BatchSchedule::standard();
        assert_eq!(s.total(), 5900);
        let mut n = 100;
        let mut traj = vec![n];
        for b in &s.sizes {
            n += b;
            traj.push(n);
        }
        assert_eq!(traj, vec![100, 200, 400, 800, 1600, 2400, 3200, 4600, 6000]);
        assert!(s.validate(5899).is_err());
        assert!(BatchSchedule { sizes: vec![0, 3] }.validate(3).is_err());
    }

    fn toy_run(strategy: QueryStrategy, early_stop: Option<f64>) -> (AlRun, Vec<u8>) {
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let base = format!("FIRM{i:02}X");
            a.push(base.clone());
            if i % 3 == 0 {
                b.push(format!("{base} SPA"));
                y.push(1);
            } else {
                b.push(format!("OTHER{}", i * 7));
                y.push(0);
            }
        }
        let universe = PairSet::new(a, b);
        let seed: Vec<(usize, u8)> = (0..4).map(|i| (i, y[i])).collect();
        let config = AlConfig {
            schedule: BatchSchedule { sizes: vec![6, 10, 20] },
            strategy,
            learner: LearnerKind::Stump { metric: MetricKind::JaroWinkler },
            seed: 9,
            early_stop,
            threshold: 0.5,
        };
        let run = AlRun::start(config, universe, &seed, Vec::new()).unwrap().with_pool_truth(y.clone());
        (run, y)
    }

    #[test]
    fn partition_and_accounting_hold_every_step() {
        let (mut run, y) = toy_run(QueryStrategy::default(), None);
        let mut oracle = StoredOracle::new(y);
        let mut prev: Vec<usize> = run.state.labelled.clone();
        while let Some(batch) = run.propose() {
            let idx = batch.indices.clone();
            let labels = oracle.labels(&idx).unwrap();
            run.commit(&labels).unwrap();
            let s = &run.state;
            assert!(prev.iter().all(|i| s.labelled.contains(i)));
            let mut all: Vec<usize> = s.labelled.iter().chain(&s.pool).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..40).collect::<Vec<_>>());
            prev = s.labelled.clone();
        }
        let n: Vec<usize> = run.state.history.iter().map(|r| r.n_labelled).collect();
        assert_eq!(n, vec![4, 10, 20, 40]);
        assert_eq!(run.status(), RunStatus::Done);
        assert!(run.state.history[0].ba_pre.is_none());
        assert!(run.state.history.last().unwrap().ba_pool.is_none());
    }

    #[test]
    fn propose_is_idempotent_until_commit() {
        let (mut run, _) = toy_run(QueryStrategy::default(), None);
        let first = run.propose().unwrap().clone();
        assert_eq!(run.propose().unwrap(), &first);
        assert_eq!(run.status(), RunStatus::AwaitingLabels);
        assert!(run.commit(&[1]).is_err());
        assert_eq!(run.propose().unwrap(), &first);
    }

    #[test]
    fn human_queue_blocks_until_complete() {
        let mut q = HumanQueue::default();
        q.submit(3, 1).unwrap();
        assert!(q.labels(&[3, 4]).is_err());
        q.submit(4, 0).unwrap();
        assert_eq!(q.labels(&[3, 4]).unwrap(), vec![1, 0]);
        assert!(q.submit(5, 2).is_err());
    }

    #[test]
    fn early_stop_ends_the_run() {
        let (mut run, y) = toy_run(QueryStrategy::Random, Some(1.01));
        run.run_to_end(&mut StoredOracle::new(y), None).unwrap();
        assert!(run.state.stopped_early);
        assert_eq!(run.state.history.len(), 2);
    }

    #[test]
    fn history_csv_shape() {
        let rows = vec![
            HistoryRow { step: 0, n_labelled: 4, ba_pre: None, ba_post: None, ba_pool: Some(0.5), ba_test: vec![("ro".into(), 0.75)] },
            HistoryRow { step: 1, n_labelled: 6, ba_pre: Some(1.0), ba_post: Some(0.5), ba_pool: None, ba_test: vec![("ro".into(), 1.0)] },
        ];
        assert_eq!(
            history_csv(&rows),
            "step,n_labelled,ba_pre,ba_post,ba_pool,ba_test_ro\n0,4,,,0.5,0.75\n1,6,1,0.5,,1\n"
        );
    }
}
