//! A single interface over every classifier: fit on labelled pairs, predict match probabilities.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::metrics::{feature_vector, MetricKind, N_FEATURES};
use crate::siamese::{SiameseConfig, SiameseModel};
use crate::trees::{DecisionStump, Forest, ForestParams};

pub const MODEL_FILE_FORMAT: &str = "namelink-model-v1";

/// Name pairs with their classical features computed once.
#[derive(Debug, Clone, Default)]
pub struct PairSet {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub features: Vec<[f64; N_FEATURES]>,
}

impl PairSet {
    pub fn new(a: Vec<String>, b: Vec<String>) -> Self {
        let features = a.par_iter().zip(b.par_iter()).map(|(x, y)| feature_vector(x, y).to_array()).collect();
        Self { a, b, features }
    }

    pub fn from_dataset(ds: &LabeledDataset) -> Self {
        Self::new(ds.names_a(), ds.names_b())
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            a: idx.iter().map(|&i| self.a[i].clone()).collect(),
            b: idx.iter().map(|&i| self.b[i].clone()).collect(),
            features: idx.iter().map(|&i| self.features[i]).collect(),
        }
    }
}

/// What to train.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerKind {
    Stump { metric: MetricKind },
    Forest(ForestParams),
    Siamese(SiameseConfig),
    /// Always predicts `p`; a reference point for experiments.
    Constant { p: f64 },
}

impl LearnerKind {
    /// Same learner with its random seed replaced (no-op for deterministic learners).
    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            LearnerKind::Forest(p) => LearnerKind::Forest(ForestParams { seed, ..p.clone() }),
            LearnerKind::Siamese(c) => LearnerKind::Siamese(SiameseConfig { seed, ..c.clone() }),
            other => other.clone(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            LearnerKind::Stump { metric } => format!("stump-{}", metric.name()),
            LearnerKind::Forest(_) => "forest".into(),
            LearnerKind::Siamese(_) => "siamese".into(),
            LearnerKind::Constant { .. } => "constant".into(),
        }
    }

    /// Trains on the rows `idx` of `set` with matching `labels`.
    pub fn fit(&self, set: &PairSet, idx: &[usize], labels: &[u8]) -> Result<Model> {
        if idx.len() != labels.len() {
            return Err(Error::InvalidArgument(format!("{} rows but {} labels", idx.len(), labels.len())));
        }
        Ok(match self {
            LearnerKind::Stump { metric } => {
                let col = metric.feature_index();
                let scores: Vec<f64> = idx.iter().map(|&i| set.features[i][col]).collect();
                let mut stump = DecisionStump::fit(&scores, labels)?;
                stump.feature_index = col;
                Model::Stump { metric: *metric, stump }
            }
            LearnerKind::Forest(params) => {
                let x: Vec<[f64; N_FEATURES]> = idx.iter().map(|&i| set.features[i]).collect();
                Model::Forest(Forest::fit(&x, labels, params)?)
            }
            LearnerKind::Siamese(cfg) => {
                let a: Vec<String> = idx.iter().map(|&i| set.a[i].clone()).collect();
                let b: Vec<String> = idx.iter().map(|&i| set.b[i].clone()).collect();
                let (m, _) = SiameseModel::train(&a, &b, labels, cfg.clone())?;
                Model::Siamese(Box::new(m))
            }
            LearnerKind::Constant { p } => Model::Constant { p: *p },
        })
    }
}

/// A trained classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Stump { metric: MetricKind, stump: DecisionStump },
    Forest(Forest),
    Siamese(Box<SiameseModel>),
    Constant { p: f64 },
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    model: Model,
}

impl Model {
    /// Match probabilities for rows `idx` of `set`.
    pub fn predict(&self, set: &PairSet, idx: &[usize]) -> Vec<f64> {
        match self {
            Model::Stump { stump, .. } => idx.iter().map(|&i| stump.predict_score(set.features[i][stump.feature_index])).collect(),
            Model::Forest(f) => idx.iter().map(|&i| f.predict_row(&set.features[i])).collect(),
            Model::Siamese(m) => {
                let a: Vec<String> = idx.iter().map(|&i| set.a[i].clone()).collect();
                let b: Vec<String> = idx.iter().map(|&i| set.b[i].clone()).collect();
                m.predict_many(&a, &b)
            }
            Model::Constant { p } => vec![*p; idx.len()],
        }
    }

    pub fn predict_all(&self, set: &PairSet) -> Vec<f64> {
        let idx: Vec<usize> = (0..set.len()).collect();
        self.predict(set, &idx)
    }

    pub fn predict_pair(&self, a: &str, b: &str) -> f64 {
        match self {
            Model::Siamese(m) => m.predict(a, b),
            _ => self.predict_all(&PairSet::new(vec![a.to_string()], vec![b.to_string()]))[0],
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = ModelFile { format: MODEL_FILE_FORMAT.into(), model: self.clone() };
        crate::checkpoint::write_atomic(path, serde_json::to_string(&file)?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        #[derive(Deserialize)]
        struct Header {
            format: String,
        }
        let header: Header = serde_json::from_str(&text)?;
        if header.format != MODEL_FILE_FORMAT {
            return Err(Error::VersionMismatch { found: header.format, expected: MODEL_FILE_FORMAT.into() });
        }
        let file: ModelFile = serde_json::from_str(&text)?;
        Ok(file.model)
    }
}
