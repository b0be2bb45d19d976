//! Seeded synthetic company-name pairs.
//!
//! Positives pair a name with a perturbed copy of itself; negatives pair two
//! distinct corpus entries, a share of them chosen for high string similarity.

use std::collections::{HashMap, HashSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{LabeledDataset, PairRecord};
use crate::data::jo::jw_score;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthProfile {
    #[default]
    Standard,
    /// Free-text style: appended addresses, heavier typos, irregular spacing.
    NoisyFreeText,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    /// Base company names; generated from `corpus_size` pseudo-words when empty.
    pub corpus: Vec<String>,
    pub corpus_size: usize,
    /// Probability that a generated entity shares its brand with the previous one.
    pub family_rate: f64,
    pub typo_rate: f64,
    pub deletion_rate: f64,
    pub abbreviation_rate: f64,
    pub acronym_rate: f64,
    pub suffix_swap_rate: f64,
    /// Share of suffix swaps that spell the legal form out in full.
    pub long_form_share: f64,
    pub negatives_per_positive: f64,
    /// Share of negatives whose partner is the most JW-similar of a candidate set.
    pub hard_negative_fraction: f64,
    /// Apply the same surface perturbations to the second name of negatives.
    pub perturb_negatives: bool,
    pub profile: SynthProfile,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            corpus: Vec::new(),
            corpus_size: 4000,
            family_rate: 0.35,
            typo_rate: 0.5,
            deletion_rate: 0.3,
            abbreviation_rate: 0.15,
            acronym_rate: 0.05,
            suffix_swap_rate: 0.4,
            long_form_share: 0.1,
            negatives_per_positive: 4.0,
            hard_negative_fraction: 0.5,
            perturb_negatives: true,
            profile: SynthProfile::Standard,
            seed: 0,
        }
    }
}

impl SynthConfig {
    /// Every perturbation rate set to zero.
    pub fn without_perturbations(self) -> Self {
        Self {
            typo_rate: 0.0,
            deletion_rate: 0.0,
            abbreviation_rate: 0.0,
            acronym_rate: 0.0,
            suffix_swap_rate: 0.0,
            ..self
        }
    }

    fn validate(&self) -> Result<()> {
        let rates = [
            ("family_rate", self.family_rate),
            ("typo_rate", self.typo_rate),
            ("deletion_rate", self.deletion_rate),
            ("abbreviation_rate", self.abbreviation_rate),
            ("acronym_rate", self.acronym_rate),
            ("suffix_swap_rate", self.suffix_swap_rate),
            ("long_form_share", self.long_form_share),
            ("hard_negative_fraction", self.hard_negative_fraction),
        ];
        for (name, r) in rates {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {r}")));
            }
        }
        if !(self.negatives_per_positive > 0.0) {
            return Err(Error::InvalidArgument("negatives_per_positive must be positive".into()));
        }
        if self.corpus.is_empty() && self.corpus_size < 2 {
            return Err(Error::InvalidArgument("corpus needs at least two entries".into()));
        }
        Ok(())
    }
}

const ONSETS: [&str; 20] = [
    "B", "C", "D", "F", "G", "K", "L", "M", "N", "P", "R", "S", "T", "V", "Z", "BR", "TR", "ST", "GR", "CH",
];
const VOWELS: [&str; 6] = ["A", "E", "I", "O", "U", "A"];
const CODAS: [&str; 8] = ["", "", "", "N", "R", "S", "L", "X"];

const INDUSTRY: [&str; 32] = [
    "ENERGY", "LOGISTICS", "CONSULTING", "TECHNOLOGIES", "SOLUTIONS", "SYSTEMS", "HOLDING", "CAPITAL",
    "INVESTMENTS", "PHARMA", "FOODS", "TRADING", "SERVICES", "CONSTRUCTION", "MOTORS", "TEXTILES", "FARM",
    "REAL ESTATE", "INTERNATIONAL", "GROUP", "MEDIA", "PARTNERS", "ENGINEERING", "CHEMICALS", "INDUSTRIES",
    "LABS", "FINANCE", "ITALIA", "EUROPE", "DIGITAL", "SHIPPING", "INSURANCE",
];

/// Canonical legal suffix and its alternative spellings.
const SUFFIXES: [(&str, &[&str]); 11] = [
    ("SRL", &["S.R.L.", "S.R.L"]),
    ("SPA", &["S.P.A.", "S.P.A"]),
    ("LTD", &["LIMITED", "LTD."]),
    ("INC", &["INCORPORATED", "INC."]),
    ("GMBH", &["G.M.B.H."]),
    ("AG", &["A.G."]),
    ("SA", &["S.A."]),
    ("LLC", &["L.L.C."]),
    ("SAS", &["S.A.S."]),
    ("BV", &["B.V."]),
    ("PLC", &["P.L.C."]),
];

/// Spelled-out legal forms, used by a share of suffix swaps.
const LONG_FORMS: [(&str, &str); 11] = [
    ("SRL", "SOCIETA A RESPONSABILITA LIMITATA"),
    ("SPA", "SOCIETA PER AZIONI"),
    ("LTD", "LIMITED"),
    ("INC", "INCORPORATED"),
    ("GMBH", "GESELLSCHAFT MIT BESCHRANKTER HAFTUNG"),
    ("AG", "AKTIENGESELLSCHAFT"),
    ("SA", "SOCIETE ANONYME"),
    ("LLC", "LIMITED LIABILITY COMPANY"),
    ("SAS", "SOCIETE PAR ACTIONS SIMPLIFIEE"),
    ("BV", "BESLOTEN VENNOOTSCHAP"),
    ("PLC", "PUBLIC LIMITED COMPANY"),
];

const ABBREVIATIONS: [(&str, &str); 16] = [
    ("INTERNATIONAL", "INTL"),
    ("TECHNOLOGIES", "TECH"),
    ("CONSULTING", "CONS."),
    ("ENGINEERING", "ENG."),
    ("SERVICES", "SVCS"),
    ("INVESTMENTS", "INV."),
    ("INDUSTRIES", "IND."),
    ("HOLDING", "HLDG"),
    ("CONSTRUCTION", "CONSTR."),
    ("LOGISTICS", "LOG."),
    ("SOLUTIONS", "SOL."),
    ("SYSTEMS", "SYS"),
    ("CHEMICALS", "CHEM."),
    ("INSURANCE", "INS."),
    ("COMPANY", "CO"),
    ("CORPORATION", "CORP"),
];

const STREETS: [&str; 10] = [
    "VIA ROMA", "VIA GARIBALDI", "CORSO ITALIA", "VIALE EUROPA", "HIGH STREET", "MAIN ST", "RUE DE LA PAIX",
    "HAUPTSTRASSE", "PIAZZA DUOMO", "KING ROAD",
];
const CITIES: [&str; 10] = [
    "MILANO", "TORINO", "ROMA", "LONDON", "PARIS", "BERLIN", "MADRID", "NAPOLI", "BOLOGNA", "ZURICH",
];

fn is_suffix(token: &str) -> bool {
    SUFFIXES.iter().any(|(c, alts)| *c == token || alts.contains(&token))
}

fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(2..=4);
    let mut w = String::new();
    for _ in 0..n {
        w.push_str(ONSETS.choose(rng).unwrap());
        w.push_str(VOWELS.choose(rng).unwrap());
    }
    w.push_str(CODAS.choose(rng).unwrap());
    w
}

/// Generated corpus of unique names, with brand families.
pub fn generate_corpus(size: usize, family_rate: f64, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(size);
    let mut brand = String::new();
    let mut attempts = 0;
    while out.len() < size {
        attempts += 1;
        if attempts > 100 * size + 1000 {
            break;
        }
        if brand.is_empty() || rng.random::<f64>() >= family_rate {
            brand = pseudo_word(rng);
            if rng.random::<f64>() < 0.3 {
                brand = format!("{brand} {}", pseudo_word(rng));
            }
        }
        let mut name = brand.clone();
        let n_ind = *[0usize, 1, 1, 1, 2].choose(rng).unwrap();
        let mut used = Vec::new();
        for _ in 0..n_ind {
            let w = INDUSTRY.choose(rng).unwrap();
            if !used.contains(w) {
                used.push(*w);
                name.push(' ');
                name.push_str(w);
            }
        }
        name.push(' ');
        name.push_str(SUFFIXES.choose(rng).unwrap().0);
        if seen.insert(name.clone()) {
            out.push(name);
        }
    }
    out
}

struct Perturber<'a> {
    cfg: &'a SynthConfig,
}

impl Perturber<'_> {
    fn typo(&self, s: &str, rng: &mut ChaCha8Rng) -> String {
        let mut chars: Vec<char> = s.chars().collect();
        let letters: Vec<usize> = (0..chars.len()).filter(|&i| chars[i].is_ascii_alphabetic()).collect();
        if let Some(&i) = letters.choose(rng) {
            let mut c = chars[i];
            while c == chars[i] {
                c = (b'A' + rng.random_range(0..26u8)) as char;
            }
            chars[i] = c;
        }
        chars.into_iter().collect()
    }

    fn deletion(&self, s: &str, rng: &mut ChaCha8Rng) -> String {
        let chars: Vec<char> = s.chars().collect();
        let candidates: Vec<usize> = (0..chars.len()).filter(|&i| chars[i] != ' ').collect();
        match candidates.choose(rng) {
            Some(&i) if chars.len() > 2 => chars.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, c)| *c).collect(),
            _ => s.to_string(),
        }
    }

    fn abbreviation(&self, s: &str, rng: &mut ChaCha8Rng) -> String {
        let mut words: Vec<String> = s.split(' ').map(str::to_string).collect();
        let known: Vec<usize> =
            (0..words.len()).filter(|&i| ABBREVIATIONS.iter().any(|(w, _)| *w == words[i])).collect();
        if let Some(&i) = known.choose(rng) {
            words[i] = ABBREVIATIONS.iter().find(|(w, _)| *w == words[i]).unwrap().1.to_string();
        } else {
            let long: Vec<usize> =
                (0..words.len()).filter(|&i| words[i].len() >= 6 && INDUSTRY.contains(&words[i].as_str())).collect();
            if let Some(&i) = long.choose(rng) {
                let keep = rng.random_range(3..=4);
                words[i] = format!("{}.", &words[i][..keep]);
            }
        }
        words.join(" ")
    }

    /// Initials of all non-suffix words, followed by the suffix: "RENOVARE ENERGY FARM SRL" -> "REF SRL".
    fn acronym(&self, s: &str) -> String {
        let words: Vec<&str> = s.split(' ').collect();
        let (body, suffix) = match words.last() {
            Some(w) if is_suffix(w) => (&words[..words.len() - 1], Some(*w)),
            _ => (&words[..], None),
        };
        if body.len() < 2 {
            return s.to_string();
        }
        let mut out: String = body.iter().filter_map(|w| w.chars().next()).collect();
        if let Some(sfx) = suffix {
            out.push(' ');
            out.push_str(sfx);
        }
        out
    }

    fn suffix_swap(&self, s: &str, rng: &mut ChaCha8Rng) -> String {
        let mut words: Vec<String> = s.split(' ').map(str::to_string).collect();
        let Some(last) = words.last().cloned() else { return s.to_string() };
        let Some((canon, alts)) = SUFFIXES.iter().find(|(c, alts)| *c == last || alts.contains(&last.as_str())) else {
            return s.to_string();
        };
        let draw = rng.random::<f64>();
        if words.len() > 1 && draw < 0.2 {
            words.pop();
        } else if draw < 0.2 + self.cfg.long_form_share * 0.8 {
            let long = LONG_FORMS.iter().find(|(c, _)| c == canon).map_or(*canon, |(_, l)| *l);
            *words.last_mut().unwrap() = long.to_string();
        } else {
            let mut options: Vec<&str> = alts.to_vec();
            options.push(canon);
            options.retain(|o| *o != last);
            *words.last_mut().unwrap() = options.choose(rng).unwrap().to_string();
        }
        words.join(" ")
    }

    fn address(&self, rng: &mut ChaCha8Rng) -> String {
        format!(
            "{} {} {} {}",
            STREETS.choose(rng).unwrap(),
            rng.random_range(1..200),
            rng.random_range(10000..99999),
            CITIES.choose(rng).unwrap()
        )
    }

    fn perturb(&self, s: &str, allow_acronym: bool, rng: &mut ChaCha8Rng) -> String {
        let c = self.cfg;
        let noisy = c.profile == SynthProfile::NoisyFreeText;
        let mut out = s.to_string();
        if allow_acronym && rng.random::<f64>() < c.acronym_rate {
            out = self.acronym(&out);
        } else if rng.random::<f64>() < c.abbreviation_rate {
            out = self.abbreviation(&out, rng);
        }
        if rng.random::<f64>() < c.suffix_swap_rate {
            out = self.suffix_swap(&out, rng);
        }
        if rng.random::<f64>() < c.typo_rate {
            let n = if noisy { rng.random_range(1..=3) } else { 1 };
            for _ in 0..n {
                out = self.typo(&out, rng);
            }
        }
        if rng.random::<f64>() < c.deletion_rate {
            out = self.deletion(&out, rng);
        }
        if noisy {
            if rng.random::<f64>() < 0.7 {
                out = format!("{out} {}", self.address(rng));
            }
            if rng.random::<f64>() < 0.3 {
                out = out.replace(' ', "  ");
            }
        }
        out
    }
}

/// Most JW-similar partner among entities sharing a word with `i` plus a few random ones.
fn hard_partner(
    i: usize,
    corpus: &[String],
    index: &HashMap<&str, Vec<usize>>,
    rng: &mut ChaCha8Rng,
) -> usize {
    let mut candidates: Vec<usize> = Vec::new();
    for w in corpus[i].split(' ').filter(|w| !is_suffix(w)) {
        if let Some(ids) = index.get(w) {
            candidates.extend(ids.iter().copied().filter(|&j| j != i).take(30));
        }
    }
    for _ in 0..10 {
        let j = rng.random_range(0..corpus.len());
        if j != i {
            candidates.push(j);
        }
    }
    candidates.sort_unstable();
    candidates.dedup();
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for &j in &candidates {
        let s = jw_score(&corpus[i], &corpus[j]);
        if s > best.0 {
            best = (s, j);
        }
    }
    if best.1 == usize::MAX {
        (i + 1) % corpus.len()
    } else {
        best.1
    }
}

/// Synthetic dataset together with the corpus entries behind each record.
pub struct SynthOutput {
    pub dataset: LabeledDataset,
    pub corpus: Vec<String>,
    /// Corpus indices of the entities behind `name_a` and `name_b`.
    pub provenance: Vec<(usize, usize)>,
}

pub fn synth_generate_detailed(config: &SynthConfig, n: usize) -> Result<SynthOutput> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let corpus = if config.corpus.is_empty() {
        generate_corpus(config.corpus_size, config.family_rate, &mut rng)
    } else {
        let mut seen = HashSet::new();
        config.corpus.iter().filter(|c| seen.insert(c.as_str())).cloned().collect()
    };
    if corpus.len() < 2 {
        return Err(Error::InvalidArgument("corpus needs at least two distinct entries".into()));
    }
    let mut index: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, name) in corpus.iter().enumerate() {
        for w in name.split(' ').filter(|w| !is_suffix(w)) {
            index.entry(w).or_default().push(i);
        }
    }
    let n_pos = (n as f64 / (1.0 + config.negatives_per_positive)).round() as usize;
    let n_neg = n - n_pos;
    let perturber = Perturber { cfg: config };
    let source = match config.profile {
        SynthProfile::Standard => "synth",
        SynthProfile::NoisyFreeText => "synth-noisy",
    };
    let max_attempts = 50 * n + 1000;
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut records = Vec::with_capacity(n);
    let mut provenance = Vec::with_capacity(n);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut rng);

    let mut attempts = 0;
    let mut t = 0;
    while records.len() < n_pos {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::InvalidArgument(format!(
                "cannot draw {n_pos} distinct positive pairs from {} entries",
                corpus.len()
            )));
        }
        let i = order[t % order.len()];
        t += 1;
        let b = perturber.perturb(&corpus[i], true, &mut rng);
        let rec = PairRecord::new(corpus[i].clone(), b, 1, source);
        if seen.insert(rec.key()) {
            records.push(rec);
            provenance.push((i, i));
        }
    }
    attempts = 0;
    while records.len() < n_pos + n_neg {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::InvalidArgument(format!(
                "cannot draw {n_neg} distinct negative pairs from {} entries",
                corpus.len()
            )));
        }
        let i = rng.random_range(0..corpus.len());
        let j = if rng.random::<f64>() < config.hard_negative_fraction {
            hard_partner(i, &corpus, &index, &mut rng)
        } else {
            let mut j = rng.random_range(0..corpus.len() - 1);
            if j >= i {
                j += 1;
            }
            j
        };
        let b = if config.perturb_negatives {
            perturber.perturb(&corpus[j], false, &mut rng)
        } else {
            corpus[j].clone()
        };
        let rec = PairRecord::new(corpus[i].clone(), b, 0, source);
        if seen.insert(rec.key()) {
            records.push(rec);
            provenance.push((i, j));
        }
    }
    let mut perm: Vec<usize> = (0..records.len()).collect();
    perm.shuffle(&mut rng);
    let records: Vec<PairRecord> = perm.iter().map(|&p| records[p].clone()).collect();
    let provenance = perm.iter().map(|&p| provenance[p]).collect();
    Ok(SynthOutput { dataset: LabeledDataset::new(records)?, corpus, provenance })
}

/// `n` labelled pairs drawn according to `config`; identical for identical seeds.
pub fn synth_generate(config: &SynthConfig, n: usize) -> Result<LabeledDataset> {
    synth_generate_detailed(config, n).map(|o| o.dataset)
}
