//! Classical string similarity scores and the 9-dimensional feature vector.
//!
//! All functions operate on Unicode scalar values, not bytes. Similarities
//! are reported in `[0, 1]`; the Levenshtein entry is a raw edit count.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{clean, CleanMode};

/// The five scores, in feature-vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Levenshtein,
    InDelRatio,
    JaroWinkler,
    TokenSetRatio,
    Jaccard,
}

impl MetricKind {
    pub const ALL: [MetricKind; 5] = [
        MetricKind::Levenshtein,
        MetricKind::InDelRatio,
        MetricKind::JaroWinkler,
        MetricKind::TokenSetRatio,
        MetricKind::Jaccard,
    ];

    /// Column of this score inside [`FeatureVector::to_array`].
    pub fn feature_index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Levenshtein => "levenshtein",
            MetricKind::InDelRatio => "indel_ratio",
            MetricKind::JaroWinkler => "jaro_winkler",
            MetricKind::TokenSetRatio => "token_set_ratio",
            MetricKind::Jaccard => "jaccard",
        }
    }

    /// Score a pair of already-cleaned strings.
    pub fn score(self, a: &str, b: &str) -> f64 {
        match self {
            MetricKind::Levenshtein => levenshtein(a, b) as f64,
            MetricKind::InDelRatio => indel_ratio(a, b),
            MetricKind::JaroWinkler => jaro_winkler(a, b, JwParams::default()),
            MetricKind::TokenSetRatio => token_set_ratio(a, b),
            MetricKind::Jaccard => jaccard(a, b),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace(['-', ' '], "_");
        match norm.as_str() {
            "levenshtein" | "lev" => Ok(MetricKind::Levenshtein),
            "indel_ratio" | "indel" => Ok(MetricKind::InDelRatio),
            "jaro_winkler" | "jw" => Ok(MetricKind::JaroWinkler),
            "token_set_ratio" | "token_set" | "tsr" => Ok(MetricKind::TokenSetRatio),
            "jaccard" => Ok(MetricKind::Jaccard),
            _ => Err(Error::InvalidArgument(format!("unknown metric {s:?}"))),
        }
    }
}

/// Jaro-Winkler prefix premium settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JwParams {
    pub prefix_weight: f64,
    pub max_prefix: usize,
}

impl Default for JwParams {
    fn default() -> Self {
        Self {
            prefix_weight: 0.1,
            max_prefix: 4,
        }
    }
}

impl JwParams {
    pub fn new(prefix_weight: f64, max_prefix: usize) -> Result<Self> {
        if !(prefix_weight >= 0.0) || prefix_weight * max_prefix as f64 > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "Jaro-Winkler needs p >= 0 and max_prefix * p <= 1 (p={prefix_weight}, max_prefix={max_prefix})"
            )));
        }
        Ok(Self {
            prefix_weight,
            max_prefix,
        })
    }
}

/// Edit distance with unit-cost insertions, deletions and substitutions.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let above = row[j + 1];
            let cost = if ca == cb { diag } else { diag + 1 };
            row[j + 1] = cost.min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[b.len()]
}

/// Length of the longest common subsequence (bit-parallel, any length).
fn lcs_len(a: &[char], b: &[char]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let words = a.len().div_ceil(64);
    let mut masks: HashMap<char, Vec<u64>> = HashMap::new();
    for (i, &c) in a.iter().enumerate() {
        masks.entry(c).or_insert_with(|| vec![0; words])[i / 64] |= 1 << (i % 64);
    }
    let tail_bits = a.len() % 64;
    let last_mask = if tail_bits == 0 {
        u64::MAX
    } else {
        (1u64 << tail_bits) - 1
    };
    let mut s = vec![u64::MAX; words];
    s[words - 1] = last_mask;
    let zeros = vec![0u64; words];
    for c in b {
        let pm = masks.get(c).unwrap_or(&zeros);
        let mut carry = 0u64;
        for w in 0..words {
            let u = s[w] & pm[w];
            let (sum1, c1) = s[w].overflowing_add(u);
            let (sum2, c2) = sum1.overflowing_add(carry);
            carry = (c1 || c2) as u64;
            s[w] = sum2 | (s[w] & !u);
        }
        s[words - 1] &= last_mask;
    }
    a.len() - s.iter().map(|w| w.count_ones() as usize).sum::<usize>()
}

/// Insert/delete-only edit distance, i.e. Levenshtein with substitution cost 2.
pub fn indel_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    a.len() + b.len() - 2 * lcs_len(&a, &b)
}

/// `1 - indel / (|a| + |b|)`; two empty strings score 1.
pub fn indel_ratio(a: &str, b: &str) -> f64 {
    let total = a.chars().count() + b.chars().count();
    if total == 0 {
        return 1.0;
    }
    1.0 - indel_distance(a, b) as f64 / total as f64
}

/// Jaro similarity with window `max(|a|,|b|)/2 - 1`.
pub fn jaro(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    jaro_chars(&a, &b)
}

fn jaro_chars(a: &[char], b: &[char]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut b_taken = vec![false; b.len()];
    let mut a_matched = Vec::with_capacity(a.len());
    for (i, &ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_taken[j] && b[j] == ca {
                b_taken[j] = true;
                a_matched.push(ca);
                break;
            }
        }
    }
    let c = a_matched.len();
    if c == 0 {
        return 0.0;
    }
    let out_of_order = b
        .iter()
        .zip(&b_taken)
        .filter(|(_, &taken)| taken)
        .zip(&a_matched)
        .filter(|((cb, _), ca)| cb != ca)
        .count();
    let t = out_of_order as f64 / 2.0;
    let c = c as f64;
    (c / a.len() as f64 + c / b.len() as f64 + (c - t) / c) / 3.0
}

/// Jaro similarity plus the common-prefix premium `l * p * (1 - jaro)`.
pub fn jaro_winkler(a: &str, b: &str, params: JwParams) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let sim = jaro_chars(&a, &b);
    let prefix = a
        .iter()
        .zip(&b)
        .take(params.max_prefix)
        .take_while(|(x, y)| x == y)
        .count();
    sim + prefix as f64 * params.prefix_weight * (1.0 - sim)
}

fn word_set(s: &str) -> BTreeSet<&str> {
    s.split_whitespace().collect()
}

/// Intersection-over-union of whitespace-delimited word sets.
pub fn jaccard(a: &str, b: &str) -> f64 {
    let wa = word_set(a);
    let wb = word_set(b);
    let union = wa.union(&wb).count();
    if union == 0 {
        return 1.0;
    }
    wa.intersection(&wb).count() as f64 / union as f64
}

fn join_nonempty(parts: &[&str]) -> String {
    parts
        .iter()
        .filter(|p| !p.is_empty())
        .copied()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Token Set Ratio: InDel ratios between the sorted word intersection and the
/// intersection extended with each side's leftover words; the best one wins.
pub fn token_set_ratio(a: &str, b: &str) -> f64 {
    let wa = word_set(a);
    let wb = word_set(b);
    match (wa.is_empty(), wb.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    // BTreeSet iteration is already sorted
    let common = wa.intersection(&wb).copied().collect::<Vec<_>>().join(" ");
    let only_a = wa.difference(&wb).copied().collect::<Vec<_>>().join(" ");
    let only_b = wb.difference(&wa).copied().collect::<Vec<_>>().join(" ");
    let combined_a = join_nonempty(&[&common, &only_a]);
    let combined_b = join_nonempty(&[&common, &only_b]);
    indel_ratio(&common, &combined_a)
        .max(indel_ratio(&common, &combined_b))
        .max(indel_ratio(&combined_a, &combined_b))
}

/// Number of features fed to the forest.
pub const N_FEATURES: usize = 9;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "levenshtein",
    "indel_ratio",
    "jaro_winkler",
    "token_set_ratio",
    "jaccard",
    "chars_a",
    "chars_b",
    "words_a",
    "words_b",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Scores ordered as [`MetricKind::ALL`].
    pub scores: [f64; 5],
    pub len_chars_a: usize,
    pub len_chars_b: usize,
    pub len_words_a: usize,
    pub len_words_b: usize,
}

impl FeatureVector {
    pub fn score(&self, kind: MetricKind) -> f64 {
        self.scores[kind.feature_index()]
    }

    pub fn to_array(&self) -> [f64; N_FEATURES] {
        [
            self.scores[0],
            self.scores[1],
            self.scores[2],
            self.scores[3],
            self.scores[4],
            self.len_chars_a as f64,
            self.len_chars_b as f64,
            self.len_words_a as f64,
            self.len_words_b as f64,
        ]
    }
}

/// Classic-cleans both names, then computes the five scores and four lengths.
pub fn feature_vector(a: &str, b: &str) -> FeatureVector {
    let a = clean(a, CleanMode::Classic);
    let b = clean(b, CleanMode::Classic);
    let (a, b) = (a.as_str(), b.as_str());
    let mut scores = [0.0; 5];
    for kind in MetricKind::ALL {
        scores[kind.feature_index()] = kind.score(a, b);
    }
    FeatureVector {
        scores,
        len_chars_a: a.chars().count(),
        len_chars_b: b.chars().count(),
        len_words_a: a.split_whitespace().count(),
        len_words_b: b.split_whitespace().count(),
    }
}

/// All five scores for a pair of raw names, keyed by metric name.
pub fn score_all(a: &str, b: &str) -> Vec<(MetricKind, f64)> {
    let fv = feature_vector(a, b);
    MetricKind::ALL.iter().map(|&k| (k, fv.score(k))).collect()
}
