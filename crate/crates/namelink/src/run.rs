//! JSON run configuration shared by `al-run` and `serve`.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::active::{AlConfig, AlRun, BatchSchedule, EvalSet, QueryStrategy};
use crate::data::{load_pairs, split::stratified_sample};
use crate::error::{Error, Result};
use crate::learner::{LearnerKind, PairSet};
use crate::trees::ForestParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub name: String,
    pub path: PathBuf,
}

/// Paths are resolved against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Universe of pairs; every row needs a label, though a human-driven run only trains on the seed rows.
    pub pairs: PathBuf,
    #[serde(default)]
    pub tests: Vec<TestSpec>,
    #[serde(default = "default_seed_size")]
    pub seed_size: usize,
    #[serde(default)]
    pub schedule: BatchSchedule,
    #[serde(default)]
    pub strategy: QueryStrategy,
    #[serde(default = "default_learner")]
    pub learner: LearnerKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub early_stop: Option<f64>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Score the remaining pool against the stored labels after every step.
    #[serde(default = "default_true")]
    pub evaluate_pool: bool,
}

fn default_seed_size() -> usize {
    100
}
fn default_learner() -> LearnerKind {
    LearnerKind::Forest(ForestParams::default())
}
fn default_threshold() -> f64 {
    0.5
}
fn default_true() -> bool {
    true
}

/// A run ready to start, with the stored labels of its universe.
pub struct PreparedRun {
    pub run: AlRun,
    pub truth: Vec<u8>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.pairs = base.join(&cfg.pairs);
        for t in &mut cfg.tests {
            t.path = base.join(&t.path);
        }
        Ok(cfg)
    }

    pub fn al_config(&self) -> AlConfig {
        AlConfig {
            schedule: self.schedule.clone(),
            strategy: self.strategy.clone(),
            learner: self.learner.clone(),
            seed: self.seed,
            early_stop: self.early_stop,
            threshold: self.threshold,
        }
    }

    /// Stratified seed set of `seed_size` rows, drawn with `seed`.
    pub fn seed_indices(&self, labels: &[u8]) -> Vec<usize> {
        let all: Vec<usize> = (0..labels.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        stratified_sample(&all, labels, self.seed_size as f64 / labels.len().max(1) as f64, &mut rng)
    }

    pub fn load_data(&self) -> Result<(PairSet, Vec<u8>, Vec<EvalSet>)> {
        let ds = load_pairs(&self.pairs)?;
        let tests = self
            .tests
            .iter()
            .map(|t| {
                let d = load_pairs(&t.path)?;
                Ok(EvalSet { name: t.name.clone(), pairs: PairSet::from_dataset(&d), labels: d.labels() })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((PairSet::from_dataset(&ds), ds.labels(), tests))
    }

    pub fn prepare(&self) -> Result<PreparedRun> {
        let (universe, truth, tests) = self.load_data()?;
        let seed: Vec<(usize, u8)> = self.seed_indices(&truth).into_iter().map(|i| (i, truth[i])).collect();
        let mut run = AlRun::start(self.al_config(), universe, &seed, tests)?;
        if self.evaluate_pool {
            run = run.with_pool_truth(truth.clone());
        }
        Ok(PreparedRun { run, truth })
    }

    /// Rebinds a checkpoint to this config's data.
    pub fn resume(&self, checkpoint: &Path) -> Result<PreparedRun> {
        let (universe, truth, tests) = self.load_data()?;
        let run = AlRun::resume(checkpoint, universe, tests, self.evaluate_pool.then(|| truth.clone()))?;
        if run.config != self.al_config() {
            return Err(Error::InvalidArgument("checkpoint was written with a different run configuration".into()));
        }
        Ok(PreparedRun { run, truth })
    }
}
