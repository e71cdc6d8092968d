//! Word lists, viseme-labelled corpora, incremental training splits and
//! viseme distributions.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derived_rng, STREAM_SPLIT};
use crate::viseme::{
    phonemes_to_visemes, strip_comment, transliterate, LanguageId, Lexicon, MappingTables,
    Phoneme, VisemeClass, VisemeLabel,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordEntry {
    pub word: String,
    pub sample_count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordList {
    pub language: LanguageId,
    pub entries: Vec<WordEntry>,
}

impl WordList {
    /// Parses `<word> <sample_count>` records, preserving file order.
    pub fn parse(text: &str, language: LanguageId, source_name: &str) -> Result<WordList> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [word, count] = fields[..] else {
                return Err(Error::parse(
                    source_name,
                    line_no,
                    format!("expected `<word> <sample_count>`, found {} fields", fields.len()),
                ));
            };
            let sample_count: i64 = count.parse().map_err(|_| {
                Error::parse(source_name, line_no, format!("bad sample count `{count}`"))
            })?;
            if sample_count < 1 || sample_count > i64::from(u32::MAX) {
                return Err(Error::parse(
                    source_name,
                    line_no,
                    format!("sample count for `{word}` must be a positive integer, got {sample_count}"),
                ));
            }
            if !seen.insert(word.to_string()) {
                return Err(Error::parse(
                    source_name,
                    line_no,
                    format!("duplicate word `{word}`"),
                ));
            }
            entries.push(WordEntry {
                word: word.to_string(),
                sample_count: sample_count as u32,
            });
        }
        Ok(WordList { language, entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn load_word_list(path: impl AsRef<Path>, language: LanguageId) -> Result<WordList> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    WordList::parse(&text, language, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub word: String,
    pub phonemes: Vec<Phoneme>,
    pub visemes: Vec<VisemeLabel>,
    /// Identifiers of the recorded samples of this word that are in use.
    /// A fresh corpus uses `0..sample_count`; splits keep a subset.
    pub sample_ids: Vec<u32>,
}

impl CorpusEntry {
    pub fn sample_count(&self) -> u32 {
        self.sample_ids.len() as u32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledCorpus {
    pub language: LanguageId,
    pub entries: Vec<CorpusEntry>,
}

impl LabeledCorpus {
    pub fn total_samples(&self) -> u64 {
        self.entries.iter().map(|e| u64::from(e.sample_count())).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Copy of the corpus with every word's sample count replaced.
    pub fn with_uniform_samples(&self, samples_per_word: u32) -> LabeledCorpus {
        LabeledCorpus {
            language: self.language,
            entries: self
                .entries
                .iter()
                .map(|e| CorpusEntry {
                    sample_ids: (0..samples_per_word).collect(),
                    ..e.clone()
                })
                .collect(),
        }
    }
}

pub fn build_labeled_corpus(
    words: &WordList,
    lexicon: &Lexicon,
    tables: &MappingTables,
) -> Result<LabeledCorpus> {
    let entries = words
        .entries
        .iter()
        .map(|entry| {
            let phonemes = transliterate(&entry.word, words.language, lexicon)?;
            let visemes = phonemes_to_visemes(&phonemes, words.language, tables)?;
            if visemes.is_empty() {
                return Err(Error::EmptyInput(format!("`{}` has no visemes", entry.word)));
            }
            Ok(CorpusEntry {
                word: entry.word.clone(),
                phonemes,
                visemes,
                sample_ids: (0..entry.sample_count).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledCorpus {
        language: words.language,
        entries,
    })
}

pub const SPLIT_FRACTIONS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub fraction: f64,
    pub seed: u64,
    /// Permits fractions other than 25/50/75/100 %.
    #[serde(default)]
    pub allow_any_fraction: bool,
}

impl SplitSpec {
    pub fn new(fraction: f64, seed: u64) -> Result<SplitSpec> {
        let spec = SplitSpec {
            fraction,
            seed,
            allow_any_fraction: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let in_set = SPLIT_FRACTIONS.contains(&self.fraction);
        let in_range = self.fraction > 0.0 && self.fraction <= 1.0;
        if in_set || (self.allow_any_fraction && in_range) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "split fraction {} is not one of 0.25, 0.5, 0.75, 1.0",
                self.fraction
            )))
        }
    }
}

/// Samples kept for a word: `max(1, floor(count * fraction))`.
pub fn split_count(sample_count: u32, fraction: f64) -> u32 {
    ((f64::from(sample_count) * fraction).floor() as u32).clamp(1, sample_count.max(1))
}

/// Reduces samples per word, never the word set. For a fixed seed, the
/// samples kept at a smaller fraction are a subset of those kept at a larger
/// one: each word's samples are ranked by one seeded permutation and a split
/// keeps a prefix of it.
pub fn split_corpus(corpus: &LabeledCorpus, spec: &SplitSpec) -> Result<LabeledCorpus> {
    spec.validate()?;
    let entries = corpus
        .entries
        .iter()
        .enumerate()
        .map(|(word_idx, entry)| {
            let keep = split_count(entry.sample_count(), spec.fraction) as usize;
            let mut ranked = entry.sample_ids.clone();
            ranked.sort_unstable();
            ranked.shuffle(&mut derived_rng(spec.seed, &[STREAM_SPLIT, word_idx as u64]));
            let mut sample_ids = ranked[..keep.min(ranked.len())].to_vec();
            sample_ids.sort_unstable();
            CorpusEntry {
                sample_ids,
                ..entry.clone()
            }
        })
        .collect();
    Ok(LabeledCorpus {
        language: corpus.language,
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisemeDistribution {
    pub counts: BTreeMap<String, u64>,
    pub class_totals: BTreeMap<VisemeClass, u64>,
}

impl VisemeDistribution {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn class_total(&self, class: VisemeClass) -> u64 {
        self.class_totals.get(&class).copied().unwrap_or(0)
    }

    /// Labels sorted by descending count, ties by label.
    pub fn sorted_desc(&self) -> Vec<(&str, u64)> {
        let mut rows: Vec<(&str, u64)> = self.counts.iter().map(|(k, &v)| (k.as_str(), v)).collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        rows
    }
}

/// Viseme occurrences weighted by each word's sample count.
pub fn viseme_distribution(corpus: &LabeledCorpus) -> Result<VisemeDistribution> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("corpus has no words".into()));
    }
    let mut counts = BTreeMap::new();
    let mut class_totals: BTreeMap<VisemeClass, u64> =
        VisemeClass::ALL.iter().map(|&c| (c, 0)).collect();
    for entry in &corpus.entries {
        let weight = u64::from(entry.sample_count());
        for label in &entry.visemes {
            *counts.entry(label.rendered()).or_insert(0) += weight;
            *class_totals.entry(label.class).or_insert(0) += weight;
        }
    }
    Ok(VisemeDistribution {
        counts,
        class_totals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::viseme::Phoneme;

    fn toy_corpus(counts: &[u32]) -> LabeledCorpus {
        let label = |b: &str| VisemeLabel::parse_rendered(b).unwrap();
        LabeledCorpus {
            language: LanguageId::English,
            entries: counts
                .iter()
                .enumerate()
                .map(|(i, &c)| CorpusEntry {
                    word: format!("W{i}"),
                    phonemes: vec![Phoneme::new("p").unwrap()],
                    visemes: vec![label("p"), label("p"), label("a")],
                    sample_ids: (0..c).collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn word_list_single_line() {
        let wl = WordList::parse("ABOUT 1000\n", LanguageId::English, "x").unwrap();
        assert_eq!(wl.entries, vec![WordEntry { word: "ABOUT".into(), sample_count: 1000 }]);
    }

    #[test]
    fn word_list_rejects_duplicates_and_bad_counts() {
        assert!(WordList::parse("A 1\nA 2\n", LanguageId::English, "x").is_err());
        assert!(WordList::parse("A 0\n", LanguageId::English, "x").is_err());
        assert!(WordList::parse("A -3\n", LanguageId::English, "x").is_err());
        assert!(WordList::parse("A\n", LanguageId::English, "x").is_err());
    }

    #[test]
    fn split_arithmetic() {
        assert_eq!(split_count(4, 0.25), 1);
        assert_eq!(split_count(1, 0.25), 1);
        assert_eq!(split_count(7, 0.5), 3);
        assert_eq!(split_count(8, 1.0), 8);
    }

    #[test]
    fn full_split_is_identity() {
        let corpus = toy_corpus(&[4, 9, 1]);
        let split = split_corpus(&corpus, &SplitSpec::new(1.0, 3).unwrap()).unwrap();
        assert_eq!(split, corpus);
    }

    #[test]
    fn split_rejects_unlisted_fraction_without_override() {
        assert!(SplitSpec::new(0.3, 0).is_err());
        let spec = SplitSpec {
            fraction: 0.3,
            seed: 0,
            allow_any_fraction: true,
        };
        let split = split_corpus(&toy_corpus(&[10]), &spec).unwrap();
        assert_eq!(split.total_samples(), 3);
    }

    #[test]
    fn distribution_weights_by_samples() {
        let d = viseme_distribution(&toy_corpus(&[10])).unwrap();
        assert_eq!(d.counts["p"], 20);
        assert_eq!(d.counts["a"], 10);
        assert_eq!(d.class_total(VisemeClass::Common), 30);
        assert!(viseme_distribution(&toy_corpus(&[])).is_err());
    }
}
