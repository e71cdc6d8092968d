use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use viseme_lab::bundled;
use viseme_lab::corpus::{build_labeled_corpus, load_word_list, WordList, SPLIT_FRACTIONS};
use viseme_lab::features::GeneratorParams;
use viseme_lab::learner::{Corpora, Protocol, ProtocolKind, TrainingConfig};
use viseme_lab::viseme::{load_mapping_tables, LanguageId, Lexicon, MappingTables};

use crate::error::{CliError, CliResult};

pub const OUTPUT_ENV: &str = "VISEME_LAB_OUTPUT";
const DEFAULT_OUTPUT: &str = "viseme-lab-output";

/// Data files; any path left out falls back to the bundled copy.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataPaths {
    pub tables: Option<PathBuf>,
    pub lexicon_en: Option<PathBuf>,
    pub lexicon_cmn: Option<PathBuf>,
    pub words_en: Option<PathBuf>,
    pub words_cmn: Option<PathBuf>,
}

impl DataPaths {
    fn all(&self) -> [&Option<PathBuf>; 5] {
        [&self.tables, &self.lexicon_en, &self.lexicon_cmn, &self.words_en, &self.words_cmn]
    }

    fn resolve_against(&mut self, base: &Path) {
        for path in [
            &mut self.tables,
            &mut self.lexicon_en,
            &mut self.lexicon_cmn,
            &mut self.words_en,
            &mut self.words_cmn,
        ]
        .into_iter()
        .flatten()
        {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }

    pub fn tables(&self) -> CliResult<MappingTables> {
        match &self.tables {
            Some(p) => Ok(load_mapping_tables(p)?),
            None => Ok(bundled::tables()),
        }
    }

    pub fn lexicon(&self, language: LanguageId) -> CliResult<Lexicon> {
        let path = match language {
            LanguageId::English => &self.lexicon_en,
            LanguageId::Mandarin => &self.lexicon_cmn,
        };
        match path {
            Some(p) => Ok(Lexicon::load(p, language)?),
            None => Ok(bundled::lexicon(language)),
        }
    }

    pub fn word_list(&self, language: LanguageId) -> CliResult<WordList> {
        let path = match language {
            LanguageId::English => &self.words_en,
            LanguageId::Mandarin => &self.words_cmn,
        };
        match path {
            Some(p) => Ok(load_word_list(p, language)?),
            None => Ok(bundled::word_list(language)),
        }
    }

    pub fn corpora(&self) -> CliResult<Corpora> {
        let tables = self.tables()?;
        let build = |lang| -> CliResult<_> {
            Ok(build_labeled_corpus(&self.word_list(lang)?, &self.lexicon(lang)?, &tables)?)
        };
        Ok(Corpora {
            english: Some(build(LanguageId::English)?),
            mandarin: Some(build(LanguageId::Mandarin)?),
            tables,
        })
    }
}

/// A block of the run matrix: every family at every fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixBlock {
    pub families: Vec<String>,
    pub fractions: Vec<f64>,
}

/// Everything a train or reproduce invocation needs. The `seed` fields of
/// `generator` and `training` are replaced by each run's seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: Option<PathBuf>,
    pub seeds: Vec<u64>,
    pub data: DataPaths,
    pub generator: GeneratorParams,
    pub training: TrainingConfig,
    pub matrix: Vec<MatrixBlock>,
}

impl Default for RunConfig {
    /// Monolingual and bilingual families over all four fractions, the four
    /// sequential families on full data, ten seeds.
    fn default() -> Self {
        RunConfig {
            output_dir: None,
            seeds: (0..10).collect(),
            data: DataPaths::default(),
            generator: GeneratorParams::default(),
            training: TrainingConfig::default(),
            matrix: vec![
                MatrixBlock {
                    families: vec!["mono-en".into(), "mono-cmn".into(), "bilingual".into()],
                    fractions: SPLIT_FRACTIONS.to_vec(),
                },
                MatrixBlock {
                    families: vec!["seq-en-cp".into(), "seq-en-conv".into(), "seq-cmn-cp".into(), "seq-cmn-conv".into()],
                    fractions: vec![1.0],
                },
            ],
        }
    }
}

/// One cell of the run matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub protocol: Protocol,
    pub seed: u64,
}

impl RunSpec {
    /// e.g. `mono-en_f025_s3`.
    pub fn name(&self) -> String {
        run_name(&self.protocol, self.seed)
    }
}

pub fn run_name(protocol: &Protocol, seed: u64) -> String {
    let percent = (protocol.fraction_english * 100.0).round() as u32;
    format!("{}_f{percent:03}_s{seed}", protocol.family())
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<RunConfig> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("run config serializes")
    }

    /// Reads a config file; relative data paths are taken relative to it.
    pub fn load(path: &Path) -> CliResult<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let mut config = RunConfig::parse(&text)?;
        config.data.resolve_against(path.parent().unwrap_or(Path::new(".")));
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.seeds.is_empty() {
            return Err(CliError::Usage("config lists no seeds".into()));
        }
        if let Some(missing) = self.data.all().into_iter().flatten().find(|p| !p.is_file()) {
            return Err(CliError::Usage(format!("data file {} does not exist", missing.display())));
        }
        self.training.validate()?;
        for spec in self.runs()? {
            spec.protocol.validate()?;
        }
        Ok(())
    }

    /// Output root: the config value, else the environment, else a default.
    pub fn output_root(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT))
    }

    /// Matrix cells in block, family, fraction, seed order, without repeats.
    pub fn runs(&self) -> CliResult<Vec<RunSpec>> {
        let mut runs: Vec<RunSpec> = Vec::new();
        for block in &self.matrix {
            for family in &block.families {
                let kind = ProtocolKind::from_family(family)?;
                for &fraction in &block.fractions {
                    for &seed in &self.seeds {
                        let spec = RunSpec {
                            protocol: Protocol::with_kind(kind, fraction),
                            seed,
                        };
                        if !runs.contains(&spec) {
                            runs.push(spec);
                        }
                    }
                }
            }
        }
        Ok(runs)
    }

    pub fn generator_for(&self, seed: u64) -> GeneratorParams {
        GeneratorParams {
            seed,
            ..self.generator.clone()
        }
    }

    pub fn training_for(&self, seed: u64) -> TrainingConfig {
        TrainingConfig {
            seed,
            ..self.training.clone()
        }
    }
}
