use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conditions under which a metric is undefined and reported by convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegenerateFlag {
    /// Only one true class is present; BA is the recall of that class.
    SingleClass,
    /// A marginal of the confusion matrix is zero; MCC is reported as 0.
    MccUndefined,
    /// No predicted and no actual positives; F1 is reported as 0.
    F1Undefined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
    pub ba: f64,
    pub f1: f64,
    pub mcc: f64,
    pub threshold: f64,
    pub flags: Vec<DegenerateFlag>,
}

impl MetricsReport {
    pub fn from_counts(tp: u64, tn: u64, fp: u64, fn_: u64, threshold: f64) -> Self {
        let mut flags = Vec::new();
        let (p, n) = (tp + fn_, tn + fp);
        let tpr = (p > 0).then(|| tp as f64 / p as f64);
        let tnr = (n > 0).then(|| tn as f64 / n as f64);
        let ba = match (tpr, tnr) {
            (Some(a), Some(b)) => (a + b) / 2.0,
            (Some(a), None) | (None, Some(a)) => {
                flags.push(DegenerateFlag::SingleClass);
                a
            }
            (None, None) => {
                flags.push(DegenerateFlag::SingleClass);
                0.0
            }
        };
        let f1 = if 2 * tp + fp + fn_ == 0 {
            flags.push(DegenerateFlag::F1Undefined);
            0.0
        } else {
            2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
        };
        let denom = ((tp + fp) as f64) * ((tp + fn_) as f64) * ((tn + fp) as f64) * ((tn + fn_) as f64);
        let mcc = if denom == 0.0 {
            flags.push(DegenerateFlag::MccUndefined);
            0.0
        } else {
            (tp as f64 * tn as f64 - fp as f64 * fn_ as f64) / denom.sqrt()
        };
        Self { tp, tn, fp, fn_, ba, f1, mcc, threshold, flags }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub const CSV_HEADER: &'static str = "tp,tn,fp,fn,ba,f1,mcc";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{},{},{},{}", self.tp, self.tn, self.fp, self.fn_, self.ba, self.f1, self.mcc)
    }
}

/// Confusion counts and BA/F1/MCC of `yhat >= threshold` against `y`.
pub fn compute_metrics(yhat: &[f64], y: &[u8], threshold: f64) -> Result<MetricsReport> {
    if yhat.len() != y.len() {
        return Err(Error::InvalidArgument(format!("{} predictions for {} labels", yhat.len(), y.len())));
    }
    if y.is_empty() {
        return Err(Error::InvalidArgument("no predictions to evaluate".into()));
    }
    let (mut tp, mut tn, mut fp, mut fn_) = (0, 0, 0, 0);
    for (&p, &t) in yhat.iter().zip(y) {
        match (p >= threshold, t == 1) {
            (true, true) => tp += 1,
            (false, false) => tn += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(MetricsReport::from_counts(tp, tn, fp, fn_, threshold))
}
