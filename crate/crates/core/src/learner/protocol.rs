use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::analyzer::CriticalPeriodStream;
use crate::bundled;
use crate::corpus::{build_labeled_corpus, split_corpus, LabeledCorpus, SplitSpec};
use crate::error::{Error, Result};
use crate::features::{generate_features, ConfusabilityModel, FeatureDataset};
use crate::rng::{derive_seed, derived_rng, STREAM_BALANCE, STREAM_TEST_FEATURES, STREAM_TRAIN_FEATURES};
use crate::viseme::{build_inventory, LanguageId, MappingTables, Scope, VisemeInventory};

use super::model::{init_model_scaled, FrameSet, ModelParams};
use super::trace::{detect_convergence_online, EpochRecord, TrainingTrace};
use super::train::{evaluate_frames, train_epoch, SgdState, TrainingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchPoint {
    AtCriticalPeriod,
    AtConvergence,
}

impl SwitchPoint {
    pub fn tag(self) -> &'static str {
        match self {
            SwitchPoint::AtCriticalPeriod => "cp",
            SwitchPoint::AtConvergence => "conv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProtocolKind {
    Monolingual { language: LanguageId },
    Bilingual,
    Sequential { l1: LanguageId, switch: SwitchPoint },
}

impl ProtocolKind {
    /// Inverse of [`Protocol::family`].
    pub fn from_family(name: &str) -> Result<ProtocolKind> {
        let bad = || Error::Config(format!("unknown model family `{name}`"));
        let parts: Vec<&str> = name.trim().split('-').collect();
        Ok(match parts[..] {
            ["bilingual"] => ProtocolKind::Bilingual,
            ["mono", lang] => ProtocolKind::Monolingual {
                language: lang.parse().map_err(|_| bad())?,
            },
            ["seq", lang, switch] => ProtocolKind::Sequential {
                l1: lang.parse().map_err(|_| bad())?,
                switch: match switch {
                    "cp" => SwitchPoint::AtCriticalPeriod,
                    "conv" => SwitchPoint::AtConvergence,
                    _ => return Err(bad()),
                },
            },
            _ => return Err(bad()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub kind: ProtocolKind,
    pub fraction_english: f64,
    pub fraction_mandarin: f64,
}

impl Protocol {
    pub fn monolingual(language: LanguageId, fraction: f64) -> Protocol {
        Protocol::with_kind(ProtocolKind::Monolingual { language }, fraction)
    }

    pub fn bilingual(fraction: f64) -> Protocol {
        Protocol::with_kind(ProtocolKind::Bilingual, fraction)
    }

    pub fn sequential(l1: LanguageId, switch: SwitchPoint, fraction: f64) -> Protocol {
        Protocol::with_kind(ProtocolKind::Sequential { l1, switch }, fraction)
    }

    pub fn with_kind(kind: ProtocolKind, fraction: f64) -> Protocol {
        Protocol {
            kind,
            fraction_english: fraction,
            fraction_mandarin: fraction,
        }
    }

    pub fn fraction(&self, language: LanguageId) -> f64 {
        match language {
            LanguageId::English => self.fraction_english,
            LanguageId::Mandarin => self.fraction_mandarin,
        }
    }

    /// Training languages in the order they are used.
    pub fn languages(&self) -> Vec<LanguageId> {
        match self.kind {
            ProtocolKind::Monolingual { language } => vec![language],
            ProtocolKind::Bilingual => LanguageId::ALL.to_vec(),
            ProtocolKind::Sequential { l1, .. } => vec![l1, l1.other()],
        }
    }

    pub fn scope(&self) -> Scope {
        match self.kind {
            ProtocolKind::Monolingual { language } => Scope::Monolingual(language),
            _ => Scope::Merged,
        }
    }

    /// Short family name, e.g. `mono-en`, `bilingual`, `seq-cmn-cp`.
    pub fn family(&self) -> String {
        match self.kind {
            ProtocolKind::Monolingual { language } => format!("mono-{language}"),
            ProtocolKind::Bilingual => "bilingual".to_string(),
            ProtocolKind::Sequential { l1, switch } => format!("seq-{l1}-{}", switch.tag()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for lang in self.languages() {
            SplitSpec::new(self.fraction(lang), 0)?;
        }
        Ok(())
    }
}

/// Mapping tables plus the labelled corpora a protocol may draw on.
#[derive(Debug, Clone)]
pub struct Corpora {
    pub tables: MappingTables,
    pub english: Option<LabeledCorpus>,
    pub mandarin: Option<LabeledCorpus>,
}

impl Corpora {
    /// Both bundled corpora (LRW and LRW-1000 word lists).
    pub fn bundled() -> Result<Corpora> {
        let tables = bundled::tables();
        let build = |lang| build_labeled_corpus(&bundled::word_list(lang), &bundled::lexicon(lang), &tables);
        Ok(Corpora {
            english: Some(build(LanguageId::English)?),
            mandarin: Some(build(LanguageId::Mandarin)?),
            tables,
        })
    }

    pub fn get(&self, language: LanguageId) -> Result<&LabeledCorpus> {
        match language {
            LanguageId::English => self.english.as_ref(),
            LanguageId::Mandarin => self.mandarin.as_ref(),
        }
        .ok_or_else(|| Error::InsufficientData(format!("no {language} corpus loaded")))
    }
}

fn language_code(language: LanguageId) -> u64 {
    match language {
        LanguageId::English => 1,
        LanguageId::Mandarin => 2,
    }
}

/// Training features for one language at the protocol's fraction. Features
/// of a sample depend only on the seed, so smaller splits are subsets.
pub fn training_features(
    protocol: &Protocol,
    corpora: &Corpora,
    model: &ConfusabilityModel,
    inventory: &VisemeInventory,
    seed: u64,
    language: LanguageId,
) -> Result<FeatureDataset> {
    let spec = SplitSpec::new(protocol.fraction(language), seed)?;
    let split = split_corpus(corpora.get(language)?, &spec)?;
    generate_features(
        &split,
        model,
        inventory,
        derive_seed(seed, &[STREAM_TRAIN_FEATURES, language_code(language)]),
    )
}

/// Held-out set: `samples_per_word` fresh samples of every word.
pub fn test_features(
    corpora: &Corpora,
    model: &ConfusabilityModel,
    inventory: &VisemeInventory,
    seed: u64,
    samples_per_word: u32,
    language: LanguageId,
) -> Result<FeatureDataset> {
    let corpus = corpora.get(language)?.with_uniform_samples(samples_per_word);
    generate_features(
        &corpus,
        model,
        inventory,
        derive_seed(seed, &[STREAM_TEST_FEATURES, language_code(language)]),
    )
}

/// Subsamples the larger dataset (by sample count) so both match.
pub fn equalize_samples(a: &mut FeatureDataset, b: &mut FeatureDataset, seed: u64) {
    let target = a.items.len().min(b.items.len());
    for (tag, ds) in [(0u64, a), (1u64, b)] {
        if ds.items.len() > target {
            let mut keep: Vec<usize> = (0..ds.items.len()).collect();
            keep.shuffle(&mut derived_rng(seed, &[STREAM_BALANCE, tag]));
            keep.truncate(target);
            keep.sort_unstable();
            let items = std::mem::take(&mut ds.items);
            ds.items = keep.into_iter().map(|i| items[i].clone()).collect();
        }
    }
}

struct Runner<'a> {
    config: &'a TrainingConfig,
    params: ModelParams,
    sgd: SgdState,
    records: Vec<EpochRecord>,
}

impl Runner<'_> {
    fn epoch(&mut self, train: &FrameSet, test: &FrameSet, phase: u8) -> Result<&EpochRecord> {
        let epoch = self.records.len() as u32 + 1;
        self.params = train_epoch(&self.params, train, self.config, epoch, &mut self.sgd)?;
        let acc = evaluate_frames(&self.params, test)?;
        self.records.push(EpochRecord {
            epoch,
            phase,
            overall: acc.overall(),
            per_viseme: acc.accuracies(),
        });
        Ok(self.records.last().expect("just pushed"))
    }

    fn phase_overall(&self, phase: u8) -> Vec<f64> {
        self.records.iter().filter(|r| r.phase == phase).map(|r| r.overall).collect()
    }

    fn converged(&self, phase: u8) -> bool {
        detect_convergence_online(
            &self.phase_overall(phase),
            self.config.convergence_epsilon,
            self.config.convergence_patience,
        )
    }
}

/// Builds the split datasets, trains and evaluates after every epoch.
pub fn run_protocol(
    protocol: &Protocol,
    corpora: &Corpora,
    model: &ConfusabilityModel,
    config: &TrainingConfig,
) -> Result<TrainingTrace> {
    config.validate()?;
    protocol.validate()?;
    let inventory = build_inventory(protocol.scope(), &corpora.tables)?;
    let classes = inventory.len();
    let seed = config.seed;
    let train_for = |lang| training_features(protocol, corpora, model, &inventory, seed, lang);
    let test_for = |lang| test_features(corpora, model, &inventory, seed, config.test_samples_per_word, lang);
    let frames = |sets: &[&FeatureDataset]| FrameSet::from_datasets(sets, classes);

    let mut runner = Runner {
        config,
        params: init_model_scaled(
            &inventory,
            model.dim(),
            derive_seed(seed, &[crate::rng::STREAM_INIT]),
            config.init_scale,
        ),
        sgd: SgdState::default(),
        records: Vec::new(),
    };

    match protocol.kind {
        ProtocolKind::Monolingual { language } => {
            let train = frames(&[&train_for(language)?])?;
            let test = frames(&[&test_for(language)?])?;
            for _ in 0..config.max_epochs {
                runner.epoch(&train, &test, 1)?;
            }
        }
        ProtocolKind::Bilingual => {
            let mut en = train_for(LanguageId::English)?;
            let mut cmn = train_for(LanguageId::Mandarin)?;
            equalize_samples(&mut en, &mut cmn, seed);
            let train = frames(&[&en, &cmn])?;
            let test = frames(&[&test_for(LanguageId::English)?, &test_for(LanguageId::Mandarin)?])?;
            for _ in 0..config.max_epochs {
                runner.epoch(&train, &test, 1)?;
            }
        }
        ProtocolKind::Sequential { l1, switch } => {
            let l2 = l1.other();
            let train1 = frames(&[&train_for(l1)?])?;
            let test1 = frames(&[&test_for(l1)?])?;
            let mut stream = CriticalPeriodStream::new(config.detection);
            let mut switched = false;
            for _ in 0..config.max_epochs {
                let record = runner.epoch(&train1, &test1, 1)?;
                let fire = match switch {
                    SwitchPoint::AtCriticalPeriod => stream.push(&record.per_viseme).is_some(),
                    SwitchPoint::AtConvergence => runner.converged(1),
                };
                if fire {
                    switched = true;
                    break;
                }
            }
            if !switched && switch == SwitchPoint::AtCriticalPeriod {
                let epochs = runner.records.len() as u32;
                return Err(Error::NoCriticalPeriod {
                    epochs,
                    partial: Box::new(finish(protocol, config, &inventory, runner)),
                });
            }
            let train2 = frames(&[&train_for(l2)?])?;
            let test2 = frames(&[&test_for(l2)?])?;
            for _ in 0..config.max_epochs {
                runner.epoch(&train2, &test2, 2)?;
                if runner.converged(2) {
                    break;
                }
            }
        }
    }
    Ok(finish(protocol, config, &inventory, runner))
}

fn finish(protocol: &Protocol, config: &TrainingConfig, inventory: &VisemeInventory, runner: Runner<'_>) -> TrainingTrace {
    TrainingTrace {
        protocol: protocol.clone(),
        config: config.clone(),
        inventory: inventory.rendered(),
        params_digest: runner.params.digest(),
        records: runner.records,
        metadata: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names_parse_back() {
        for kind in [
            ProtocolKind::Bilingual,
            ProtocolKind::Monolingual { language: LanguageId::Mandarin },
            ProtocolKind::Sequential { l1: LanguageId::English, switch: SwitchPoint::AtConvergence },
            ProtocolKind::Sequential { l1: LanguageId::Mandarin, switch: SwitchPoint::AtCriticalPeriod },
        ] {
            assert_eq!(ProtocolKind::from_family(&Protocol::with_kind(kind, 1.0).family()).unwrap(), kind);
        }
        for bad in ["mono", "mono-fr", "seq-en-late", "bi", ""] {
            assert!(ProtocolKind::from_family(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn equalizing_trims_the_larger_set() {
        let item = |v: u32| crate::features::FeatureItem { labels: vec![v], frames: vec![0.0] };
        let ds = |n: u32| FeatureDataset { dim: 1, inventory_hash: 0, seed: 0, items: (0..n).map(item).collect() };
        let (mut a, mut b) = (ds(10), ds(4));
        equalize_samples(&mut a, &mut b, 3);
        assert_eq!((a.items.len(), b.items.len()), (4, 4));
        assert!(a.items.windows(2).all(|w| w[0].labels[0] < w[1].labels[0]));
        let (mut c, _) = (ds(10), ());
        equalize_samples(&mut c, &mut ds(4), 3);
        assert_eq!(c, a);
    }
}
