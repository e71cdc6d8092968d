//! Tables, lexicons and word lists shipped with the crate.
//!
//! The lexicons were generated offline (see `tools/build_lexicons.py`) and
//! are frozen; nothing here touches the network or an external G2P tool.

use crate::corpus::WordList;
use crate::viseme::{LanguageId, Lexicon, MappingTables};

pub const VISEME_TABLES: &str = include_str!("../data/viseme_tables.txt");
pub const LEXICON_EN: &str = include_str!("../data/lexicon_en.txt");
pub const LEXICON_CMN: &str = include_str!("../data/lexicon_cmn.txt");
pub const WORDS_LRW: &str = include_str!("../data/lrw_words.txt");
pub const WORDS_LRW1000: &str = include_str!("../data/lrw1000_words.txt");

pub fn tables() -> MappingTables {
    MappingTables::parse(VISEME_TABLES, "bundled:viseme_tables.txt")
        .expect("bundled viseme tables parse")
}

pub fn lexicon(language: LanguageId) -> Lexicon {
    let (text, name) = match language {
        LanguageId::English => (LEXICON_EN, "bundled:lexicon_en.txt"),
        LanguageId::Mandarin => (LEXICON_CMN, "bundled:lexicon_cmn.txt"),
    };
    Lexicon::parse(text, language, name).expect("bundled lexicon parses")
}

/// LRW (English, 500 words) or LRW-1000 (Mandarin, 1000 pinyin) labels.
pub fn word_list(language: LanguageId) -> WordList {
    let (text, name) = match language {
        LanguageId::English => (WORDS_LRW, "bundled:lrw_words.txt"),
        LanguageId::Mandarin => (WORDS_LRW1000, "bundled:lrw1000_words.txt"),
    };
    WordList::parse(text, language, name).expect("bundled word list parses")
}

/// Raw text of a bundled resource, for writing reference copies to disk.
pub fn raw(name: &str) -> Option<&'static str> {
    match name {
        "viseme_tables.txt" => Some(VISEME_TABLES),
        "lexicon_en.txt" => Some(LEXICON_EN),
        "lexicon_cmn.txt" => Some(LEXICON_CMN),
        "lrw_words.txt" => Some(WORDS_LRW),
        "lrw1000_words.txt" => Some(WORDS_LRW1000),
        _ => None,
    }
}

