//! Labelled pair datasets, splits, synthetic generation and evaluation metrics.

pub mod jo;
pub mod report;
pub mod split;
pub mod synth;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use jo::{build_jo_testset, JoSet};
pub use report::{compute_metrics, DegenerateFlag, MetricsReport};
pub use split::{stratified_folds, FoldSplit, SplitPlan};
pub use synth::{synth_generate, SynthConfig, SynthProfile};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub name_a: String,
    pub name_b: String,
    pub label: u8,
    #[serde(default)]
    pub source: String,
}

impl PairRecord {
    pub fn new(a: impl Into<String>, b: impl Into<String>, label: u8, source: impl Into<String>) -> Self {
        Self { name_a: a.into(), name_b: b.into(), label, source: source.into() }
    }

    /// Order-independent identity of the pair.
    pub fn key(&self) -> (String, String) {
        if self.name_a <= self.name_b {
            (self.name_a.clone(), self.name_b.clone())
        } else {
            (self.name_b.clone(), self.name_a.clone())
        }
    }
}

/// Pairs of names with binary match labels; no unordered pair appears twice.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LabeledDataset {
    records: Vec<PairRecord>,
}

impl LabeledDataset {
    pub fn new(records: Vec<PairRecord>) -> Result<Self> {
        let mut seen: HashMap<(String, String), usize> = HashMap::new();
        for (i, r) in records.iter().enumerate() {
            if r.label > 1 {
                return Err(Error::InvalidArgument(format!("record {i}: label {} is not 0 or 1", r.label)));
            }
            if let Some(j) = seen.insert(r.key(), i) {
                return Err(Error::InvalidArgument(format!("records {j} and {i} are the same pair")));
            }
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[PairRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.records.iter().filter(|r| r.label == 1).count()
    }

    pub fn positive_ratio(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.positives() as f64 / self.len() as f64
        }
    }

    pub fn labels(&self) -> Vec<u8> {
        self.records.iter().map(|r| r.label).collect()
    }

    pub fn names_a(&self) -> Vec<String> {
        self.records.iter().map(|r| r.name_a.clone()).collect()
    }

    pub fn names_b(&self) -> Vec<String> {
        self.records.iter().map(|r| r.name_b.clone()).collect()
    }

    /// Records at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self { records: indices.iter().map(|&i| self.records[i].clone()).collect() }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(["name_a", "name_b", "label", "source"])?;
            for r in &self.records {
                w.write_record([r.name_a.as_str(), r.name_b.as_str(), if r.label == 1 { "1" } else { "0" }, r.source.as_str()])?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        crate::checkpoint::write_atomic(path, &buf)
    }
}

/// Reads a pair CSV with header `name_a,name_b,label` and an optional `source` column.
///
/// Line numbers in errors count the header as line 1.
pub fn load_pairs(path: &Path) -> Result<LabeledDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: u64, message: String| Error::Parse { path: path.to_path_buf(), line, message };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (ia, ib, il) = match (col("name_a"), col("name_b"), col("label")) {
        (Some(a), Some(b), Some(l)) => (a, b, l),
        _ => return Err(parse_err(1, "header must contain name_a, name_b and label".into())),
    };
    let isrc = col("source");
    let mut records = Vec::new();
    let mut first_line: HashMap<(String, String), u64> = HashMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| row.get(i).ok_or_else(|| parse_err(line, format!("missing column {}", i + 1)));
        let label = match field(il)?.trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(parse_err(line, format!("label must be 0 or 1, got {other:?}"))),
        };
        let source = match isrc {
            Some(i) => row.get(i).unwrap_or("").to_string(),
            None => String::new(),
        };
        let rec = PairRecord::new(field(ia)?, field(ib)?, label, source);
        if let Some(&first) = first_line.get(&rec.key()) {
            return Err(Error::DuplicatePair { path: path.to_path_buf(), first, second: line });
        }
        first_line.insert(rec.key(), line);
        records.push(rec);
    }
    LabeledDataset::new(records)
}
