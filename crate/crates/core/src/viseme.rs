//! Viseme taxonomy and transliteration: words → IPA phonemes → visemes.
//!
//! Visemes are classified by which language tables produce them. A viseme
//! symbol emitted by both the English and the Mandarin table is *common* and
//! renders bare (`p`); one emitted only by English renders `p_E`, only by
//! Mandarin `p_M`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LanguageId {
    English,
    Mandarin,
}

impl LanguageId {
    pub const ALL: [LanguageId; 2] = [LanguageId::English, LanguageId::Mandarin];

    /// Tag used in table files and on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            LanguageId::English => "en",
            LanguageId::Mandarin => "cmn",
        }
    }

    pub fn other(self) -> LanguageId {
        match self {
            LanguageId::English => LanguageId::Mandarin,
            LanguageId::Mandarin => LanguageId::English,
        }
    }

    /// Class of the visemes unique to this language.
    pub fn unique_class(self) -> VisemeClass {
        match self {
            LanguageId::English => VisemeClass::EnglishOnly,
            LanguageId::Mandarin => VisemeClass::MandarinOnly,
        }
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for LanguageId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "en" | "eng" | "english" => Ok(LanguageId::English),
            "cmn" | "zh" | "mandarin" => Ok(LanguageId::Mandarin),
            other => Err(Error::Config(format!("unknown language `{other}`"))),
        }
    }
}

/// One IPA segment, NFC-normalized.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Phoneme(String);

impl Phoneme {
    pub fn new(symbol: &str) -> Option<Phoneme> {
        let symbol: String = symbol.trim().nfc().collect();
        if symbol.is_empty() || symbol.chars().any(char::is_whitespace) {
            None
        } else {
            Some(Phoneme(symbol))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Phoneme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VisemeClass {
    Common,
    EnglishOnly,
    MandarinOnly,
}

impl VisemeClass {
    pub const ALL: [VisemeClass; 3] = [
        VisemeClass::Common,
        VisemeClass::EnglishOnly,
        VisemeClass::MandarinOnly,
    ];

    fn suffix(self) -> &'static str {
        match self {
            VisemeClass::Common => "",
            VisemeClass::EnglishOnly => "_E",
            VisemeClass::MandarinOnly => "_M",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VisemeClass::Common => "common",
            VisemeClass::EnglishOnly => "english-only",
            VisemeClass::MandarinOnly => "mandarin-only",
        }
    }
}

impl fmt::Display for VisemeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VisemeLabel {
    pub base: String,
    pub class: VisemeClass,
}

impl VisemeLabel {
    pub fn rendered(&self) -> String {
        format!("{}{}", self.base, self.class.suffix())
    }

    /// Inverse of [`VisemeLabel::rendered`].
    pub fn parse_rendered(label: &str) -> Option<VisemeLabel> {
        let (base, class) = if let Some(base) = label.strip_suffix("_E") {
            (base, VisemeClass::EnglishOnly)
        } else if let Some(base) = label.strip_suffix("_M") {
            (base, VisemeClass::MandarinOnly)
        } else {
            (label, VisemeClass::Common)
        };
        (!base.is_empty()).then(|| VisemeLabel {
            base: base.to_string(),
            class,
        })
    }
}

impl fmt::Display for VisemeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.base, self.class.suffix())
    }
}

impl PartialOrd for VisemeLabel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for VisemeLabel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.rendered()
            .cmp(&other.rendered())
            .then_with(|| (&self.base, self.class).cmp(&(&other.base, other.class)))
    }
}

/// Phoneme → viseme maps for both languages.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MappingTables {
    english: BTreeMap<Phoneme, String>,
    mandarin: BTreeMap<Phoneme, String>,
}

impl MappingTables {
    /// Parses `<language-tag> <ipa-phoneme> <viseme-symbol>` records.
    pub fn parse(text: &str, source_name: &str) -> Result<MappingTables> {
        let mut tables = MappingTables::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [tag, phoneme, viseme] = fields[..] else {
                return Err(Error::parse(
                    source_name,
                    line_no,
                    format!("expected 3 fields, found {}", fields.len()),
                ));
            };
            let language: LanguageId = tag
                .parse()
                .map_err(|_| Error::parse(source_name, line_no, format!("unknown language tag `{tag}`")))?;
            let phoneme = Phoneme::new(phoneme)
                .ok_or_else(|| Error::parse(source_name, line_no, "empty phoneme"))?;
            let map = tables.map_mut(language);
            if map.contains_key(&phoneme) {
                return Err(Error::Conflict {
                    source_name: source_name.to_string(),
                    line: line_no,
                    language,
                    phoneme: phoneme.0,
                });
            }
            map.insert(phoneme, viseme.nfc().collect());
        }
        Ok(tables)
    }

    pub fn map(&self, language: LanguageId) -> &BTreeMap<Phoneme, String> {
        match language {
            LanguageId::English => &self.english,
            LanguageId::Mandarin => &self.mandarin,
        }
    }

    fn map_mut(&mut self, language: LanguageId) -> &mut BTreeMap<Phoneme, String> {
        match language {
            LanguageId::English => &mut self.english,
            LanguageId::Mandarin => &mut self.mandarin,
        }
    }

    pub fn viseme_for(&self, phoneme: &Phoneme, language: LanguageId) -> Option<&str> {
        self.map(language).get(phoneme).map(String::as_str)
    }

    /// Viseme symbols emitted by one language's table.
    pub fn viseme_symbols(&self, language: LanguageId) -> BTreeSet<&str> {
        self.map(language).values().map(String::as_str).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.english.is_empty() && self.mandarin.is_empty()
    }
}

/// Reads a mapping-table file from disk.
pub fn load_mapping_tables(path: impl AsRef<Path>) -> Result<MappingTables> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    MappingTables::parse(&text, &path.display().to_string())
}

pub fn classify_viseme(base: &str, tables: &MappingTables) -> Result<VisemeLabel> {
    let in_english = tables.english.values().any(|v| v == base);
    let in_mandarin = tables.mandarin.values().any(|v| v == base);
    let class = match (in_english, in_mandarin) {
        (true, true) => VisemeClass::Common,
        (true, false) => VisemeClass::EnglishOnly,
        (false, true) => VisemeClass::MandarinOnly,
        (false, false) => return Err(Error::UnknownViseme(base.to_string())),
    };
    Ok(VisemeLabel {
        base: base.to_string(),
        class,
    })
}

const TONE_MARKS: [char; 4] = ['\u{0300}', '\u{0301}', '\u{0304}', '\u{030C}'];

/// Lexicon key normalization: trim, NFC, uppercase. Mandarin keys also lose
/// tone marks and tone digits, and whitespace-separated syllables are joined
/// with `_`.
pub fn normalize_word(word: &str, language: LanguageId) -> String {
    let word = word.trim();
    match language {
        LanguageId::English => word.nfc().collect::<String>().to_uppercase(),
        LanguageId::Mandarin => {
            let toneless: String = word
                .nfd()
                .filter(|c| !TONE_MARKS.contains(c) && !c.is_ascii_digit())
                .collect();
            let joined = toneless.split_whitespace().collect::<Vec<_>>().join("_");
            joined.nfc().collect::<String>().to_uppercase()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    language: LanguageId,
    entries: HashMap<String, Vec<Phoneme>>,
}

impl Lexicon {
    pub fn new(language: LanguageId) -> Lexicon {
        Lexicon {
            language,
            entries: HashMap::new(),
        }
    }

    /// Parses `<word> <ipa-phoneme>[ <ipa-phoneme>...]` records.
    pub fn parse(text: &str, language: LanguageId, source_name: &str) -> Result<Lexicon> {
        let mut lexicon = Lexicon::new(language);
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let word = fields.next().unwrap_or_default();
            let phonemes: Vec<Phoneme> = fields.filter_map(Phoneme::new).collect();
            if phonemes.is_empty() {
                return Err(Error::parse(
                    source_name,
                    line_no,
                    format!("`{word}` has no pronunciation"),
                ));
            }
            let key = normalize_word(word, language);
            if lexicon.entries.insert(key.clone(), phonemes).is_some() {
                return Err(Error::parse(
                    source_name,
                    line_no,
                    format!("duplicate lexicon entry `{key}`"),
                ));
            }
        }
        Ok(lexicon)
    }

    pub fn load(path: impl AsRef<Path>, language: LanguageId) -> Result<Lexicon> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Lexicon::parse(&text, language, &path.display().to_string())
    }

    pub fn insert(&mut self, word: &str, phonemes: Vec<Phoneme>) {
        self.entries
            .insert(normalize_word(word, self.language), phonemes);
    }

    pub fn language(&self) -> LanguageId {
        self.language
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[Phoneme]> {
        self.entries
            .get(&normalize_word(word, self.language))
            .map(Vec::as_slice)
    }
}

pub fn transliterate(word: &str, language: LanguageId, lexicon: &Lexicon) -> Result<Vec<Phoneme>> {
    if lexicon.language != language {
        return Err(Error::Config(format!(
            "{} lexicon used for {language} word `{word}`",
            lexicon.language
        )));
    }
    lexicon
        .get(word)
        .map(<[Phoneme]>::to_vec)
        .ok_or_else(|| Error::MissingEntry {
            word: word.trim().to_string(),
            language,
        })
}

/// Maps each phoneme to its classified viseme. Repeated visemes are kept.
pub fn phonemes_to_visemes(
    phonemes: &[Phoneme],
    language: LanguageId,
    tables: &MappingTables,
) -> Result<Vec<VisemeLabel>> {
    phonemes
        .iter()
        .map(|p| {
            let base = tables
                .viseme_for(p, language)
                .ok_or_else(|| Error::UnmappedPhoneme {
                    phoneme: p.to_string(),
                    language,
                })?;
            classify_viseme(base, tables)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Monolingual(LanguageId),
    Merged,
}

impl Scope {
    pub fn contains_class(self, class: VisemeClass) -> bool {
        match (self, class) {
            (Scope::Merged, _) | (_, VisemeClass::Common) => true,
            (Scope::Monolingual(lang), class) => lang.unique_class() == class,
        }
    }
}

/// Ordered output head of a classifier. Index order is lexicographic on the
/// rendered label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisemeInventory {
    scope: Scope,
    labels: Vec<VisemeLabel>,
    index: HashMap<String, usize>,
}

impl VisemeInventory {
    /// Builds an inventory from rendered labels, sorting and deduplicating.
    pub fn from_labels(scope: Scope, labels: impl IntoIterator<Item = VisemeLabel>) -> VisemeInventory {
        let labels: Vec<VisemeLabel> = labels
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.rendered(), i))
            .collect();
        VisemeInventory {
            scope,
            labels,
            index,
        }
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    pub fn labels(&self) -> &[VisemeLabel] {
        &self.labels
    }

    pub fn rendered(&self) -> Vec<String> {
        self.labels.iter().map(VisemeLabel::rendered).collect()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, rendered: &str) -> Option<usize> {
        self.index.get(rendered).copied()
    }

    pub fn class_of(&self, idx: usize) -> VisemeClass {
        self.labels[idx].class
    }

    pub fn count_class(&self, class: VisemeClass) -> usize {
        self.labels.iter().filter(|l| l.class == class).count()
    }

    /// Stable 64-bit digest of the rendered label order.
    pub fn hash(&self) -> u64 {
        inventory_hash(&self.rendered())
    }

    pub fn hash_hex(&self) -> String {
        format!("{:016x}", self.hash())
    }
}

pub fn inventory_hash(rendered: &[String]) -> u64 {
    let mut hasher = Sha256::new();
    for label in rendered {
        hasher.update(label.as_bytes());
        hasher.update(b"\n");
    }
    let digest = hasher.finalize();
    u64::from_be_bytes(digest[..8].try_into().expect("sha256 digest has 32 bytes"))
}

pub fn build_inventory(scope: Scope, tables: &MappingTables) -> Result<VisemeInventory> {
    let languages: &[LanguageId] = match scope {
        Scope::Monolingual(LanguageId::English) => &[LanguageId::English],
        Scope::Monolingual(LanguageId::Mandarin) => &[LanguageId::Mandarin],
        Scope::Merged => &LanguageId::ALL,
    };
    let mut labels = Vec::new();
    for &lang in languages {
        for base in tables.viseme_symbols(lang) {
            labels.push(classify_viseme(base, tables)?);
        }
    }
    Ok(VisemeInventory::from_labels(scope, labels))
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => line[..pos].trim(),
        None => line.trim(),
    }
}
