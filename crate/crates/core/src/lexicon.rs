//! Sentiment dictionaries: a valence map for compound scoring and
//! positive/negative word sets for polarity counting.
//!
//! Real dictionary releases carry varying redistribution terms, so the crate
//! bundles small test-sized word lists (see [`bundled`]) and loads
//! user-supplied files for production runs. Both paths go through the same
//! parsers.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Map from lowercase word to signed valence (polarity and intensity in one
/// number, typical magnitude at most 4).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValenceLexicon {
    entries: BTreeMap<String, f64>,
}

impl ValenceLexicon {
    /// Build from (word, valence) pairs; words are lowercased, later
    /// duplicates overwrite earlier ones.
    pub fn from_entries<I, S>(pairs: I) -> ValenceLexicon
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let entries = pairs
            .into_iter()
            .map(|(w, v)| (w.as_ref().to_lowercase(), v))
            .collect();
        ValenceLexicon { entries }
    }

    /// Valence of a lowercase token, if listed.
    pub fn valence(&self, token: &str) -> Option<f64> {
        self.entries.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Same words with every valence sign flipped. Scoring against the
    /// mirror negates the compound score exactly.
    pub fn negated(&self) -> ValenceLexicon {
        ValenceLexicon {
            entries: self.entries.iter().map(|(w, v)| (w.clone(), -v)).collect(),
        }
    }
}

/// Which positive/negative dictionary a [`CategoricalLexicon`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoricalKind {
    Hiv4,
    Lm,
}

/// Positive and negative word sets for count-based polarity scoring.
/// Disjoint by construction: a word listed on both sides is dropped from
/// both at load time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalLexicon {
    pub kind: CategoricalKind,
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
}

impl CategoricalLexicon {
    /// Build from word slices; lowercases everything and applies the
    /// drop-from-both conflict rule.
    pub fn from_words(kind: CategoricalKind, positive: &[&str], negative: &[&str]) -> Self {
        let pos: BTreeSet<String> = positive.iter().map(|w| w.to_lowercase()).collect();
        let neg: BTreeSet<String> = negative.iter().map(|w| w.to_lowercase()).collect();
        let conflicts: BTreeSet<String> = pos.intersection(&neg).cloned().collect();
        CategoricalLexicon {
            kind,
            positive: pos.difference(&conflicts).cloned().collect(),
            negative: neg.difference(&conflicts).cloned().collect(),
        }
    }

    pub fn is_positive(&self, token: &str) -> bool {
        self.positive.contains(token)
    }

    pub fn is_negative(&self, token: &str) -> bool {
        self.negative.contains(token)
    }

    pub fn positive_len(&self) -> usize {
        self.positive.len()
    }

    pub fn negative_len(&self) -> usize {
        self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty()
    }

    /// The same word sets with positive and negative swapped.
    pub fn swapped(&self) -> CategoricalLexicon {
        CategoricalLexicon {
            kind: self.kind,
            positive: self.negative.clone(),
            negative: self.positive.clone(),
        }
    }
}

/// Load a valence file: one `word<TAB>valence` or `word,valence` row per
/// line, delimiter detected per line. Duplicate words keep the last value
/// with a warning; rows with a missing delimiter or a non-finite valence are
/// skipped with a warning. An empty result is fatal because every downstream
/// score would be vacuously zero.
pub fn load_valence_lexicon(path: &Path) -> Result<(ValenceLexicon, Vec<String>)> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (lexicon, warnings) = parse_valence(&raw);
    if lexicon.is_empty() {
        return Err(Error::EmptyLexicon(format!(
            "no usable entries in {}",
            path.display()
        )));
    }
    Ok((lexicon, warnings))
}

fn parse_valence(raw: &str) -> (ValenceLexicon, Vec<String>) {
    let mut entries: BTreeMap<String, f64> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((word, value)) = split_valence_row(line) else {
            warnings.push(format!("line {line_no}: no tab or comma delimiter, skipped"));
            continue;
        };
        let word = word.trim().to_lowercase();
        let value = value.trim();
        if word.is_empty() {
            warnings.push(format!("line {line_no}: empty word, skipped"));
            continue;
        }
        match value.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                if entries.insert(word.clone(), v).is_some() {
                    warnings.push(format!(
                        "line {line_no}: duplicate word `{word}`, later value wins"
                    ));
                }
            }
            _ => warnings.push(format!(
                "line {line_no}: unparseable valence `{value}`, skipped"
            )),
        }
    }
    (ValenceLexicon { entries }, warnings)
}

fn split_valence_row(line: &str) -> Option<(&str, &str)> {
    line.split_once('\t').or_else(|| line.split_once(','))
}

/// Load a positive/negative pair of word-list files: one token per line,
/// `#` comments and blank lines ignored, everything lowercased. A word
/// listed in both files is dropped from both with a warning. Both sets
/// empty is fatal.
pub fn load_categorical_lexicon(
    path_pos: &Path,
    path_neg: &Path,
    kind: CategoricalKind,
) -> Result<(CategoricalLexicon, Vec<String>)> {
    let raw_pos = std::fs::read_to_string(path_pos).map_err(|e| Error::io(path_pos, e))?;
    let raw_neg = std::fs::read_to_string(path_neg).map_err(|e| Error::io(path_neg, e))?;
    let (lexicon, warnings) = parse_categorical(&raw_pos, &raw_neg, kind);
    if lexicon.is_empty() {
        return Err(Error::EmptyLexicon(format!(
            "no usable entries in {} or {}",
            path_pos.display(),
            path_neg.display()
        )));
    }
    Ok((lexicon, warnings))
}

fn parse_categorical(
    raw_pos: &str,
    raw_neg: &str,
    kind: CategoricalKind,
) -> (CategoricalLexicon, Vec<String>) {
    let mut warnings = Vec::new();
    let positive = parse_word_set(raw_pos, "positive", &mut warnings);
    let negative = parse_word_set(raw_neg, "negative", &mut warnings);
    let conflicts: BTreeSet<String> = positive.intersection(&negative).cloned().collect();
    for word in &conflicts {
        warnings.push(format!(
            "`{word}` listed as both positive and negative, dropped from both"
        ));
    }
    let lexicon = CategoricalLexicon {
        kind,
        positive: positive.difference(&conflicts).cloned().collect(),
        negative: negative.difference(&conflicts).cloned().collect(),
    };
    (lexicon, warnings)
}

fn parse_word_set(raw: &str, side: &str, warnings: &mut Vec<String>) -> BTreeSet<String> {
    let mut words = BTreeSet::new();
    for (idx, line) in raw.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.split_whitespace().nth(1).is_some() {
            warnings.push(format!(
                "{side} line {line_no}: `{line}` is not a single token, skipped"
            ));
            continue;
        }
        words.insert(line.to_lowercase());
    }
    words
}

/// The three dictionaries a full scoring run needs, loaded together.
#[derive(Debug, Clone)]
pub struct LexiconSet {
    pub vader: ValenceLexicon,
    pub hiv4: CategoricalLexicon,
    pub lm: CategoricalLexicon,
}

impl LexiconSet {
    pub fn new(vader: ValenceLexicon, hiv4: CategoricalLexicon, lm: CategoricalLexicon) -> Self {
        LexiconSet { vader, hiv4, lm }
    }
}

/// Small bundled word lists, parsed through the same code paths as
/// user-supplied files. Sized for tests and demos, not production scoring.
pub mod bundled {
    use super::*;

    const VADER: &str = include_str!("../assets/vader_valence.tsv");
    const HIV4_POS: &str = include_str!("../assets/hiv4_positive.txt");
    const HIV4_NEG: &str = include_str!("../assets/hiv4_negative.txt");
    const LM_POS: &str = include_str!("../assets/lm_positive.txt");
    const LM_NEG: &str = include_str!("../assets/lm_negative.txt");

    pub fn vader() -> ValenceLexicon {
        let (lexicon, warnings) = parse_valence(VADER);
        debug_assert!(warnings.is_empty(), "bundled valence list is clean");
        lexicon
    }

    pub fn hiv4() -> CategoricalLexicon {
        let (lexicon, warnings) = parse_categorical(HIV4_POS, HIV4_NEG, CategoricalKind::Hiv4);
        debug_assert!(warnings.is_empty(), "bundled word lists are clean");
        lexicon
    }

    pub fn lm() -> CategoricalLexicon {
        let (lexicon, warnings) = parse_categorical(LM_POS, LM_NEG, CategoricalKind::Lm);
        debug_assert!(warnings.is_empty(), "bundled word lists are clean");
        lexicon
    }

    pub fn lexicon_set() -> LexiconSet {
        LexiconSet::new(vader(), hiv4(), lm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn valence_two_line_file() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "good\t1.9").unwrap();
        writeln!(file, "bad,-2.5").unwrap();
        let (lex, warnings) = load_valence_lexicon(file.path()).unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.valence("good"), Some(1.9));
        assert_eq!(lex.valence("bad"), Some(-2.5));
        assert!(warnings.is_empty());
    }

    #[test]
    fn valence_duplicate_word_counts_once_last_wins() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "good\t1.9").unwrap();
        writeln!(file, "good\t0.5").unwrap();
        let (lex, warnings) = load_valence_lexicon(file.path()).unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.valence("good"), Some(0.5));
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn valence_bad_delimiter_warns_and_skips() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "good;1.9").unwrap();
        writeln!(file, "bad\t-2.5").unwrap();
        let (lex, warnings) = load_valence_lexicon(file.path()).unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("line 1"));
    }

    #[test]
    fn valence_empty_file_is_fatal() {
        let file = tempfile::NamedTempFile::new().unwrap();
        let err = load_valence_lexicon(file.path());
        assert!(matches!(err, Err(Error::EmptyLexicon(_))));
    }

    #[test]
    fn valence_non_finite_value_skipped() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "weird\tinf").unwrap();
        writeln!(file, "fine\t0.5").unwrap();
        let (lex, warnings) = load_valence_lexicon(file.path()).unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn categorical_basic_sizes() {
        let mut pos = tempfile::NamedTempFile::new().unwrap();
        writeln!(pos, "gain").unwrap();
        let mut neg = tempfile::NamedTempFile::new().unwrap();
        writeln!(neg, "loss").unwrap();
        let (lex, warnings) =
            load_categorical_lexicon(pos.path(), neg.path(), CategoricalKind::Lm).unwrap();
        assert_eq!((lex.positive_len(), lex.negative_len()), (1, 1));
        assert!(warnings.is_empty());
    }

    #[test]
    fn categorical_conflict_dropped_from_both() {
        let mut pos = tempfile::NamedTempFile::new().unwrap();
        writeln!(pos, "gain").unwrap();
        let mut neg = tempfile::NamedTempFile::new().unwrap();
        writeln!(neg, "gain").unwrap();
        writeln!(neg, "loss").unwrap();
        let (lex, warnings) =
            load_categorical_lexicon(pos.path(), neg.path(), CategoricalKind::Hiv4).unwrap();
        assert_eq!((lex.positive_len(), lex.negative_len()), (0, 1));
        assert!(!lex.is_positive("gain"));
        assert!(!lex.is_negative("gain"));
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn categorical_mixed_case_lowercased() {
        let mut pos = tempfile::NamedTempFile::new().unwrap();
        writeln!(pos, "Gain").unwrap();
        writeln!(pos, "STRONG").unwrap();
        let mut neg = tempfile::NamedTempFile::new().unwrap();
        writeln!(neg, "Loss").unwrap();
        let (lex, _) =
            load_categorical_lexicon(pos.path(), neg.path(), CategoricalKind::Hiv4).unwrap();
        assert!(lex.is_positive("gain"));
        assert!(lex.is_positive("strong"));
        assert!(lex.is_negative("loss"));
    }

    #[test]
    fn categorical_both_empty_is_fatal() {
        let pos = tempfile::NamedTempFile::new().unwrap();
        let mut neg = tempfile::NamedTempFile::new().unwrap();
        writeln!(neg, "# only a comment").unwrap();
        let err = load_categorical_lexicon(pos.path(), neg.path(), CategoricalKind::Lm);
        assert!(matches!(err, Err(Error::EmptyLexicon(_))));
    }

    #[test]
    fn loading_is_deterministic() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "good\t1.9\nbad\t-2.5\nup\t0.4").unwrap();
        let (a, _) = load_valence_lexicon(file.path()).unwrap();
        let (b, _) = load_valence_lexicon(file.path()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bundled_lists_are_nonempty_and_disjoint() {
        let set = bundled::lexicon_set();
        assert!(set.vader.len() >= 50);
        for lex in [&set.hiv4, &set.lm] {
            assert!(lex.positive_len() >= 20);
            assert!(lex.negative_len() >= 20);
        }
        // Conflict rule means nothing survives on both sides.
        for word in ["gain", "loss", "strong"] {
            assert!(!(set.hiv4.is_positive(word) && set.hiv4.is_negative(word)));
        }
    }

    #[test]
    fn negated_mirror_flips_values() {
        let lex = ValenceLexicon::from_entries([("good", 1.9), ("bad", -2.5)]);
        let neg = lex.negated();
        assert_eq!(neg.valence("good"), Some(-1.9));
        assert_eq!(neg.valence("bad"), Some(2.5));
    }
}
