use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use viseme_lab::analyzer::distribution_svg;
use viseme_lab::corpus::{build_labeled_corpus, load_word_list, viseme_distribution, VisemeDistribution};
use viseme_lab::viseme::{phonemes_to_visemes, transliterate, LanguageId};

use crate::config::DataPaths;
use crate::error::CliResult;
use crate::output::{print_json, write_atomic};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRecord {
    pub word: String,
    pub lang: String,
    pub phonemes: Vec<String>,
    pub visemes: Vec<String>,
}

pub fn map_word(data: &DataPaths, word: &str, language: LanguageId) -> CliResult<MapRecord> {
    let tables = data.tables()?;
    let lexicon = data.lexicon(language)?;
    let phonemes = transliterate(word, language, &lexicon)?;
    let visemes = phonemes_to_visemes(&phonemes, language, &tables)?;
    Ok(MapRecord {
        word: word.to_string(),
        lang: language.tag().to_string(),
        phonemes: phonemes.iter().map(|p| p.as_str().to_string()).collect(),
        visemes: visemes.iter().map(|v| v.rendered()).collect(),
    })
}

pub fn cmd_map(data: &DataPaths, word: &str, language: LanguageId, json: bool) -> CliResult<()> {
    let record = map_word(data, word, language)?;
    if json {
        print_json(&record);
    } else {
        println!("{}", record.phonemes.join(" "));
        println!("{}", record.visemes.join(" "));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelCount {
    pub label: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub lang: String,
    pub words: usize,
    pub total: u64,
    /// Descending by count.
    pub counts: Vec<LabelCount>,
    /// Keyed by class name.
    pub class_totals: BTreeMap<String, u64>,
}

impl CorpusStats {
    fn new(language: LanguageId, words: usize, dist: &VisemeDistribution) -> CorpusStats {
        CorpusStats {
            lang: language.tag().to_string(),
            words,
            total: dist.total(),
            counts: dist
                .sorted_desc()
                .into_iter()
                .map(|(label, count)| LabelCount { label: label.to_string(), count })
                .collect(),
            class_totals: dist.class_totals.iter().map(|(c, &n)| (c.name().to_string(), n)).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in &self.counts {
            out += &format!("{}\t{}\n", row.label, row.count);
        }
        for (class, total) in &self.class_totals {
            out += &format!("class:{class}\t{total}\n");
        }
        out += &format!("total\t{}\n", self.total);
        out
    }
}

/// Distribution of `language`'s corpus, optionally from another word list,
/// with an optional chart.
pub fn corpus_stats(
    data: &DataPaths,
    language: LanguageId,
    words: Option<&Path>,
    plot: Option<&Path>,
) -> CliResult<CorpusStats> {
    let list = match words {
        Some(p) => load_word_list(p, language)?,
        None => data.word_list(language)?,
    };
    let corpus = build_labeled_corpus(&list, &data.lexicon(language)?, &data.tables()?)?;
    let dist = viseme_distribution(&corpus)?;
    if let Some(path) = plot {
        write_atomic(path, distribution_svg(&dist).as_bytes())?;
    }
    Ok(CorpusStats::new(language, corpus.len(), &dist))
}

pub fn cmd_corpus_stats(
    data: &DataPaths,
    language: LanguageId,
    words: Option<&Path>,
    plot: Option<&Path>,
    json: bool,
) -> CliResult<()> {
    let stats = corpus_stats(data, language, words, plot)?;
    if json {
        print_json(&stats);
    } else {
        print!("{}", stats.to_text());
    }
    Ok(())
}
