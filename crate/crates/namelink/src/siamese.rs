//! Siamese LSTM classifier: one shared encoder, a distance layer and a dense head.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{
    distance_vector, dropout_masks, forward_backward, head_forward_infer, lstm_encode, update_running_stats,
    Architecture, InputTable, NadamState, ParamStore, Readout,
};
use crate::text::{clean, Alphabet, CleanMode, EncodedName, ALPHABET_VERSION};

pub const MODEL_FORMAT: &str = "namelink-siamese-v1";

/// How the embedding matrix is applied: a learned per-symbol lookup table.
pub const EMBEDDING_READING: &str = "per-position lookup of a 63x63 table";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SiameseConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub dropout: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub hidden: usize,
    pub readout: Readout,
    pub threshold: f64,
}

impl Default for SiameseConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            epochs: 50,
            seed: 0,
            dropout: 0.2,
            learning_rate: 1e-4,
            beta1: 0.8,
            beta2: 0.9,
            hidden: 16,
            readout: Readout::LastToken,
            threshold: 0.5,
        }
    }
}

/// The five distance summaries of two encodings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceFeatures {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub cosine_distance: f64,
    pub abs_diff: Vec<f64>,
}

impl DistanceFeatures {
    pub fn new(u: &[f64], v: &[f64]) -> Self {
        let d = distance_vector(u, v);
        Self {
            l1: d[0],
            l2: d[1],
            linf: d[2],
            cosine_distance: d[3],
            abs_diff: d[4..].to_vec(),
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = vec![self.l1, self.l2, self.linf, self.cosine_distance];
        out.extend_from_slice(&self.abs_diff);
        out
    }
}

/// Per-epoch record of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Inference-mode mean loss on the training pairs: entry 0 before training, then after each epoch.
    pub loss_history: Vec<f64>,
    pub steps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiameseModel {
    pub format: String,
    pub alphabet_version: String,
    pub alphabet: Alphabet,
    pub embedding_reading: String,
    pub arch: Architecture,
    pub config: SiameseConfig,
    pub params: ParamStore,
}

impl SiameseModel {
    fn with_params(arch: Architecture, config: SiameseConfig, params: ParamStore) -> Self {
        Self {
            format: MODEL_FORMAT.to_string(),
            alphabet_version: ALPHABET_VERSION.to_string(),
            alphabet: Alphabet::default(),
            embedding_reading: EMBEDDING_READING.to_string(),
            arch,
            config,
            params,
        }
    }

    fn arch_for(config: &SiameseConfig) -> Architecture {
        Architecture { hidden: config.hidden, ..Architecture::default() }
    }

    /// Randomly initialized, untrained model.
    pub fn initialized(config: SiameseConfig) -> Self {
        let arch = Self::arch_for(&config);
        let params = ParamStore::init(&arch, &mut ChaCha8Rng::seed_from_u64(config.seed));
        Self::with_params(arch, config, params)
    }

    /// Model with every weight zero.
    pub fn zeroed(config: SiameseConfig) -> Self {
        let arch = Self::arch_for(&config);
        let params = ParamStore::zeros(&arch);
        Self::with_params(arch, config, params)
    }

    pub fn encode(&self, raw: &str) -> EncodedName {
        let cleaned = clean(raw, CleanMode::Neural);
        self.alphabet.encode_with_len(cleaned.as_str(), self.arch.max_len)
    }

    /// Encoder output for one name (inference mode).
    pub fn embed(&self, raw: &str) -> Vec<f64> {
        let table = InputTable::new(&self.params);
        let e = self.encode(raw);
        lstm_encode(&self.params, &table, self.config.readout.steps(&e))
    }

    pub fn distance_features(&self, a: &str, b: &str) -> DistanceFeatures {
        DistanceFeatures::new(&self.embed(a), &self.embed(b))
    }

    /// Match probability; symmetric in `a` and `b` bit for bit.
    pub fn predict(&self, a: &str, b: &str) -> f64 {
        head_forward_infer(&self.params, &self.distance_features(a, b).to_vec())
    }

    /// Match probabilities for many pairs, encoding each distinct name once.
    pub fn predict_many(&self, a: &[String], b: &[String]) -> Vec<f64> {
        let table = InputTable::new(&self.params);
        let mut cache: HashMap<&str, Vec<f64>> = HashMap::new();
        for name in a.iter().chain(b) {
            if !cache.contains_key(name.as_str()) {
                let e = self.encode(name);
                let h = lstm_encode(&self.params, &table, self.config.readout.steps(&e));
                cache.insert(name, h);
            }
        }
        a.iter()
            .zip(b)
            .map(|(x, y)| head_forward_infer(&self.params, &distance_vector(&cache[x.as_str()], &cache[y.as_str()])))
            .collect()
    }

    /// Trains a fresh model on labelled pairs.
    pub fn train(a: &[String], b: &[String], labels: &[u8], config: SiameseConfig) -> Result<(Self, TrainReport)> {
        if a.len() != b.len() || a.len() != labels.len() {
            return Err(Error::InvalidArgument("pair and label counts differ".into()));
        }
        let positives = labels.iter().filter(|&&y| y == 1).count();
        if positives == 0 || positives == labels.len() {
            return Err(Error::DegenerateTraining("Siamese training needs both classes".into()));
        }
        if config.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        let mut model = Self::initialized(config.clone());
        let left: Vec<EncodedName> = a.iter().map(|s| model.encode(s)).collect();
        let right: Vec<EncodedName> = b.iter().map(|s| model.encode(s)).collect();
        let readout = config.readout;
        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
        shuffle_rng.set_stream(1);
        let mut dropout_rng = ChaCha8Rng::seed_from_u64(config.seed);
        dropout_rng.set_stream(2);
        let mut opt = NadamState::new(&model.params, config.learning_rate, config.beta1, config.beta2);
        let mut history = vec![model.mean_loss(&left, &right, labels)?];
        let mut order: Vec<usize> = (0..labels.len()).collect();
        for _ in 0..config.epochs {
            order.shuffle(&mut shuffle_rng);
            for chunk in order.chunks(config.batch_size) {
                let l: Vec<&[u8]> = chunk.iter().map(|&i| readout.steps(&left[i])).collect();
                let r: Vec<&[u8]> = chunk.iter().map(|&i| readout.steps(&right[i])).collect();
                let y: Vec<u8> = chunk.iter().map(|&i| labels[i]).collect();
                let masks = dropout_masks(&mut dropout_rng, chunk.len(), &model.arch.head_widths, config.dropout);
                let pass = forward_backward(&model.params, &l, &r, &y, &masks)?;
                update_running_stats(&mut model.params, &pass.cache);
                opt.update(&mut model.params, &pass.grads);
            }
            if !model.params.is_finite() {
                return Err(Error::NonFinite("parameters diverged during training".into()));
            }
            history.push(model.mean_loss(&left, &right, labels)?);
        }
        Ok((model, TrainReport { loss_history: history, steps: opt.step }))
    }

    fn mean_loss(&self, left: &[EncodedName], right: &[EncodedName], labels: &[u8]) -> Result<f64> {
        let table = InputTable::new(&self.params);
        let readout = self.config.readout;
        let mut cache: HashMap<&[u8], Vec<f64>> = HashMap::new();
        let mut yhat = Vec::with_capacity(labels.len());
        for (l, r) in left.iter().zip(right) {
            for s in [readout.steps(l), readout.steps(r)] {
                if !cache.contains_key(s) {
                    cache.insert(s, lstm_encode(&self.params, &table, s));
                }
            }
            let d = distance_vector(&cache[readout.steps(l)], &cache[readout.steps(r)]);
            yhat.push(head_forward_infer(&self.params, &d));
        }
        crate::nn::bce(&yhat, labels)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            format: String,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.format != MODEL_FORMAT {
            return Err(Error::VersionMismatch { found: header.format, expected: MODEL_FORMAT.into() });
        }
        let model: Self = serde_json::from_str(text)?;
        if model.alphabet_version != ALPHABET_VERSION {
            return Err(Error::VersionMismatch { found: model.alphabet_version, expected: ALPHABET_VERSION.into() });
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::checkpoint::write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Vec<String>, Vec<String>, Vec<u8>) {
        let names = ["ACME SPA", "BETA SRL", "GAMMA LTD", "DELTA GMBH", "OMEGA AG", "SIGMA INC"];
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut y = Vec::new();
        for (i, n) in names.iter().enumerate() {
            a.push(n.to_string());
            b.push(n.to_string());
            y.push(1);
            a.push(n.to_string());
            b.push(names[(i + 1) % names.len()].to_string());
            y.push(0);
        }
        (a, b, y)
    }

    #[test]
    fn zero_model_is_neutral() {
        let m = SiameseModel::zeroed(SiameseConfig::default());
        assert_eq!(m.embed("ACME"), vec![0.0; 16]);
        assert_eq!(m.predict("ACME", "ACME"), 0.5);
    }

    #[test]
    fn embedding_has_sixteen_dims_and_is_deterministic() {
        let m = SiameseModel::initialized(SiameseConfig::default());
        let e = m.embed("Acme S.r.l.");
        assert_eq!(e.len(), 16);
        assert_eq!(e, m.embed("Acme S.r.l."));
    }

    #[test]
    fn prediction_is_commutative() {
        let m = SiameseModel::initialized(SiameseConfig { seed: 5, ..Default::default() });
        assert_eq!(m.predict("ACME SPA", "ACME S.P.A."), m.predict("ACME S.P.A.", "ACME SPA"));
    }

    #[test]
    fn encoder_is_shared_between_branches() {
        let mut m = SiameseModel::initialized(SiameseConfig::default());
        let (a0, b0) = (m.embed("ALPHA"), m.embed("BETA"));
        m.params.lstm_kernel.data[0] += 0.5;
        m.params.lstm_kernel.data[70] -= 0.5;
        assert_ne!(m.embed("ALPHA"), a0);
        assert_ne!(m.embed("BETA"), b0);
    }

    #[test]
    fn truncation_ignores_text_beyond_limit() {
        let m = SiameseModel::initialized(SiameseConfig { readout: Readout::Padded, ..Default::default() });
        let base = "X".repeat(300);
        assert_eq!(m.embed(&base), m.embed(&format!("{base}   TAIL")));
    }

    #[test]
    fn single_class_is_rejected() {
        let a = vec!["A".to_string(); 3];
        let r = SiameseModel::train(&a, &a, &[1, 1, 1], SiameseConfig::default());
        assert!(matches!(r, Err(Error::DegenerateTraining(_))));
    }

    #[test]
    fn training_is_reproducible_and_reduces_loss() {
        let (a, b, y) = toy();
        let cfg = SiameseConfig { epochs: 3, batch_size: 4, ..Default::default() };
        let (m1, r1) = SiameseModel::train(&a, &b, &y, cfg.clone()).unwrap();
        let (m2, r2) = SiameseModel::train(&a, &b, &y, cfg).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(m1.params, m2.params);
        assert_eq!(r1.loss_history.len(), 4);
        assert!(r1.loss_history[1] < r1.loss_history[0]);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = SiameseModel::initialized(SiameseConfig { seed: 3, ..Default::default() });
        let back = SiameseModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let bad = m.to_json().unwrap().replace(MODEL_FORMAT, "other-v9");
        assert!(matches!(SiameseModel::from_json(&bad), Err(Error::VersionMismatch { .. })));
    }
}
