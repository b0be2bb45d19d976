//! Normalization and character-level encoding of raw name strings.
//!
//! Two cleaning modes exist. The classical metrics compare names after
//! stripping ASCII punctuation and upper-casing; the neural encoder sees the
//! upper-cased text with punctuation intact, then maps every character onto a
//! fixed 63-symbol alphabet and pads (or truncates) to a fixed length.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed sequence length fed to the encoder.
pub const MAX_LEN: usize = 300;

/// Number of symbols in the alphabet, padding included.
pub const ALPHABET_SIZE: usize = 63;

/// Index of the padding symbol.
pub const PAD_INDEX: u8 = 0;

/// Display glyph of the padding symbol (U+2797 HEAVY DIVISION SIGN).
pub const PAD_GLYPH: char = '\u{2797}';

/// Version tag of [`DEFAULT_SYMBOLS`]; bump whenever the list changes.
pub const ALPHABET_VERSION: &str = "namelink-alphabet-v1";

/// Pad, `A`-`Z`, `0`-`9`, space and 25 punctuation marks.
pub const DEFAULT_SYMBOLS: [char; ALPHABET_SIZE] = [
    PAD_GLYPH, 'A', 'B', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'J', 'K', 'L', 'M', 'N', 'O', 'P',
    'Q', 'R', 'S', 'T', 'U', 'V', 'W', 'X', 'Y', 'Z', '0', '1', '2', '3', '4', '5', '6', '7',
    '8', '9', ' ', '.', ',', '-', '&', '\'', '/', '(', ')', '+', '@', '#', '!', '?', ':', ';',
    '"', '*', '%', '$', '_', '=', '[', ']', '<', '>',
];

const SPACE_INDEX: u8 = 37;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CleanMode {
    /// Punctuation removed, upper-cased, whitespace collapsed.
    Classic,
    /// Upper-cased only.
    Neural,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CleanName {
    text: String,
    mode: CleanMode,
}

impl CleanName {
    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn mode(&self) -> CleanMode {
        self.mode
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

impl fmt::Display for CleanName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl AsRef<str> for CleanName {
    fn as_ref(&self) -> &str {
        &self.text
    }
}

pub fn clean(raw: &str, mode: CleanMode) -> CleanName {
    let text = match mode {
        CleanMode::Neural => raw.to_uppercase(),
        CleanMode::Classic => {
            let stripped: String = raw.chars().filter(|c| !c.is_ascii_punctuation()).collect();
            let upper = stripped.to_uppercase();
            upper.split_whitespace().collect::<Vec<_>>().join(" ")
        }
    };
    CleanName { text, mode }
}

/// An encoded name: symbol indices padded to a fixed length.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EncodedName {
    indices: Vec<u8>,
    true_length: usize,
}

impl EncodedName {
    pub fn indices(&self) -> &[u8] {
        &self.indices
    }

    /// Number of leading positions that carry real symbols.
    pub fn true_length(&self) -> usize {
        self.true_length
    }

    /// The non-pad prefix.
    pub fn symbols(&self) -> &[u8] {
        &self.indices[..self.true_length]
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// One row per position, one column per alphabet symbol.
    pub fn one_hot(&self) -> Vec<[u8; ALPHABET_SIZE]> {
        self.indices
            .iter()
            .map(|&ix| {
                let mut row = [0u8; ALPHABET_SIZE];
                row[ix as usize] = 1;
                row
            })
            .collect()
    }
}

/// The ordered symbol list used by the neural encoder.
///
/// Serialized as a JSON array of 63 single-character strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Alphabet {
    symbols: Vec<char>,
    #[serde(skip)]
    lookup: HashMap<char, u8>,
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::from_symbols(DEFAULT_SYMBOLS.to_vec()).expect("default alphabet is valid")
    }
}

impl Alphabet {
    pub fn from_symbols(symbols: Vec<char>) -> Result<Self> {
        if symbols.len() != ALPHABET_SIZE {
            return Err(Error::InvalidArgument(format!(
                "alphabet must have {ALPHABET_SIZE} symbols, got {}",
                symbols.len()
            )));
        }
        let mut lookup = HashMap::with_capacity(ALPHABET_SIZE);
        for (ix, &c) in symbols.iter().enumerate() {
            if lookup.insert(c, ix as u8).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate alphabet symbol {c:?}"
                )));
            }
        }
        // the pad glyph never appears in encoded text
        lookup.remove(&symbols[PAD_INDEX as usize]);
        if !lookup.contains_key(&' ') {
            return Err(Error::InvalidArgument(
                "alphabet must contain the space symbol".into(),
            ));
        }
        Ok(Self { symbols, lookup })
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Index of `c`; characters outside the list map to the space symbol.
    pub fn index_of(&self, c: char) -> u8 {
        match self.lookup.get(&c) {
            Some(&ix) => ix,
            None => self.lookup.get(&' ').copied().unwrap_or(SPACE_INDEX),
        }
    }

    pub fn encode(&self, name: &CleanName) -> EncodedName {
        self.encode_with_len(name.as_str(), MAX_LEN)
    }

    /// Encodes `text` into exactly `max_len` positions, truncating longer input.
    pub fn encode_with_len(&self, text: &str, max_len: usize) -> EncodedName {
        let mut indices: Vec<u8> = text
            .chars()
            .take(max_len)
            .map(|c| self.index_of(c))
            .collect();
        let true_length = indices.len();
        indices.resize(max_len, PAD_INDEX);
        EncodedName {
            indices,
            true_length,
        }
    }

    /// Inverse of [`Alphabet::encode`] on the non-pad prefix.
    pub fn decode(&self, encoded: &EncodedName) -> String {
        encoded
            .symbols()
            .iter()
            .map(|&ix| self.symbols[ix as usize])
            .collect()
    }
}

impl TryFrom<Vec<String>> for Alphabet {
    type Error = Error;

    fn try_from(value: Vec<String>) -> Result<Self> {
        let symbols = value
            .iter()
            .map(|s| {
                let mut chars = s.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => Ok(c),
                    _ => Err(Error::InvalidArgument(format!(
                        "alphabet entry {s:?} is not a single character"
                    ))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Alphabet::from_symbols(symbols)
    }
}

impl From<Alphabet> for Vec<String> {
    fn from(value: Alphabet) -> Self {
        value.symbols.iter().map(|c| c.to_string()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Character-filter oracle for classic cleaning.
    fn classic_oracle(raw: &str) -> String {
        let mut out = String::new();
        let mut pending_space = false;
        for c in raw.chars() {
            if c.is_ascii_punctuation() {
                continue;
            }
            if c.is_whitespace() {
                pending_space = !out.is_empty();
                continue;
            }
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.extend(c.to_uppercase());
        }
        out
    }

    #[test]
    fn classic_cleaning_examples() {
        assert_eq!(
            clean("Intesa Sanpaolo S.p.A.", CleanMode::Classic).as_str(),
            "INTESA SANPAOLO SPA"
        );
        assert_eq!(
            classic_oracle("Intesa Sanpaolo S.p.A."),
            "INTESA SANPAOLO SPA"
        );
        assert_eq!(clean("ACME", CleanMode::Classic).as_str(), "ACME");
        assert_eq!(clean("", CleanMode::Classic).as_str(), "");
        assert_eq!(
            clean("  a  - b\t c ", CleanMode::Classic).as_str(),
            "A B C"
        );
    }

    #[test]
    fn neural_cleaning_keeps_punctuation() {
        assert_eq!(clean("Acme S.r.l.", CleanMode::Neural).as_str(), "ACME S.R.L.");
        assert_eq!(clean("", CleanMode::Neural).as_str(), "");
    }

    #[test]
    fn default_alphabet_shape() {
        let alphabet = Alphabet::default();
        assert_eq!(alphabet.len(), 63);
        assert_eq!(alphabet.symbols()[0], PAD_GLYPH);
        assert_eq!(alphabet.index_of(' '), SPACE_INDEX);
        assert_eq!(alphabet.index_of('A'), 1);
        // OOV and the pad glyph itself both fall back to space
        assert_eq!(alphabet.index_of('é'), SPACE_INDEX);
        assert_eq!(alphabet.index_of(PAD_GLYPH), SPACE_INDEX);
    }

    #[test]
    fn alphabet_json_is_array_of_strings() {
        let alphabet = Alphabet::default();
        let json = serde_json::to_value(&alphabet).unwrap();
        let arr = json.as_array().unwrap();
        assert_eq!(arr.len(), 63);
        assert!(arr.iter().all(|v| v.as_str().unwrap().chars().count() == 1));
        let back: Alphabet = serde_json::from_value(json).unwrap();
        assert_eq!(back, alphabet);
        assert_eq!(back.index_of('Z'), 26);
    }

    #[test]
    fn alphabet_rejects_bad_lists() {
        let mut short = DEFAULT_SYMBOLS.to_vec();
        short.pop();
        assert!(Alphabet::from_symbols(short).is_err());
        let mut dup = DEFAULT_SYMBOLS.to_vec();
        dup[5] = 'A';
        assert!(Alphabet::from_symbols(dup).is_err());
        let strings = vec!["AB".to_string(); 63];
        assert!(Alphabet::try_from(strings).is_err());
    }

    #[test]
    fn encode_empty_is_all_pad() {
        let e = Alphabet::default().encode(&clean("", CleanMode::Neural));
        assert_eq!(e.true_length(), 0);
        assert_eq!(e.len(), MAX_LEN);
        assert!(e.indices().iter().all(|&i| i == PAD_INDEX));
        let oh = e.one_hot();
        assert!(oh.iter().all(|row| row[0] == 1));
    }

    #[test]
    fn encode_pads_and_truncates() {
        let alphabet = Alphabet::default();
        let name124 = "A".repeat(124);
        let e = alphabet.encode(&clean(&name124, CleanMode::Neural));
        assert_eq!(e.true_length(), 124);
        assert!(e.indices()[124..].iter().all(|&i| i == PAD_INDEX));
        assert!(e.indices()[..124].iter().all(|&i| i == 1));

        let name350: String = (0..350).map(|i| if i % 2 == 0 { 'X' } else { '7' }).collect();
        let e = alphabet.encode(&clean(&name350, CleanMode::Neural));
        assert_eq!(e.true_length(), 300);
        assert!(e.indices().iter().all(|&i| i != PAD_INDEX));
        assert_eq!(alphabet.decode(&e), name350[..300]);
    }

    #[test]
    fn one_hot_rows() {
        let e = Alphabet::default().encode(&clean("Acme S.r.l. #1", CleanMode::Neural));
        let oh = e.one_hot();
        assert_eq!(oh.len(), MAX_LEN);
        for (row, &ix) in oh.iter().zip(e.indices()) {
            assert_eq!(row.iter().map(|&v| v as u32).sum::<u32>(), 1);
            let argmax = row.iter().position(|&v| v == 1).unwrap();
            assert_eq!(argmax, ix as usize);
        }
    }

    fn name_strategy() -> impl Strategy<Value = String> {
        proptest::string::string_regex("[a-zA-Z0-9 .,&'()\\-éàÖß\\t]{0,40}").unwrap()
    }

    proptest! {
        #[test]
        fn cleaning_is_idempotent(raw in name_strategy()) {
            for mode in [CleanMode::Classic, CleanMode::Neural] {
                let once = clean(&raw, mode);
                let twice = clean(once.as_str(), mode);
                prop_assert_eq!(once, twice);
            }
        }

        #[test]
        fn classic_matches_filter_oracle(raw in name_strategy()) {
            prop_assert_eq!(clean(&raw, CleanMode::Classic).into_string(), classic_oracle(&raw));
        }

        #[test]
        fn classic_has_no_punctuation(raw in name_strategy()) {
            let c = clean(&raw, CleanMode::Classic);
            prop_assert!(!c.as_str().chars().any(|c| c.is_ascii_punctuation()));
            prop_assert!(!c.as_str().chars().any(|c| c.is_lowercase()));
        }

        #[test]
        fn pad_count_matches_true_length(raw in proptest::string::string_regex(".{0,320}").unwrap()) {
            let alphabet = Alphabet::default();
            let e = alphabet.encode(&clean(&raw, CleanMode::Neural));
            let pads = e.indices().iter().filter(|&&i| i == PAD_INDEX).count();
            prop_assert_eq!(e.len(), MAX_LEN);
            prop_assert_eq!(pads, MAX_LEN - e.true_length());
            prop_assert_eq!(e.clone(), alphabet.encode(&clean(&raw, CleanMode::Neural)));
        }
    }
}
