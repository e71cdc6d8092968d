use proptest::prelude::*;

use viseme_lab::analyzer::{bars_svg, detect_in_rows, gain_rows, heatmap_svg, CrossInferenceReport, DetectionParams, VisemeBars};
use viseme_lab::bundled;
use viseme_lab::corpus::{split_corpus, viseme_distribution, CorpusEntry, LabeledCorpus, SplitSpec, SPLIT_FRACTIONS};
use viseme_lab::learner::{EpochRecord, Protocol, TrainingConfig, TrainingTrace};
use viseme_lab::viseme::{
    build_inventory, phonemes_to_visemes, LanguageId, Phoneme, Scope, VisemeClass, VisemeLabel,
};

fn class_strategy() -> impl Strategy<Value = VisemeClass> {
    prop::sample::select(VisemeClass::ALL.to_vec())
}

fn language_strategy() -> impl Strategy<Value = LanguageId> {
    prop::sample::select(LanguageId::ALL.to_vec())
}

fn corpus_strategy() -> impl Strategy<Value = LabeledCorpus> {
    let labels = ["p", "f", "th_E", "zh_M", "a"];
    prop::collection::vec((1u32..40, prop::collection::vec(0usize..labels.len(), 1..6)), 1..12).prop_map(
        move |words| LabeledCorpus {
            language: LanguageId::English,
            entries: words
                .into_iter()
                .enumerate()
                .map(|(i, (count, seq))| CorpusEntry {
                    word: format!("w{i}"),
                    phonemes: Vec::new(),
                    visemes: seq.iter().map(|&k| VisemeLabel::parse_rendered(labels[k]).unwrap()).collect(),
                    sample_ids: (0..count).collect(),
                })
                .collect(),
        },
    )
}

fn rows_strategy(visemes: usize) -> impl Strategy<Value = Vec<Vec<Option<f64>>>> {
    prop::collection::vec(prop::collection::vec(prop::option::weighted(0.9, 0.0f64..=1.0), visemes), 3..15)
}

fn trace_of(rows: &[Vec<Option<f64>>]) -> TrainingTrace {
    TrainingTrace {
        protocol: Protocol::monolingual(LanguageId::English, 1.0),
        config: TrainingConfig::default(),
        inventory: (0..rows[0].len()).map(|i| format!("v{i}")).collect(),
        records: rows
            .iter()
            .enumerate()
            .map(|(i, r)| EpochRecord {
                epoch: i as u32 + 1,
                phase: 1,
                overall: 0.5,
                per_viseme: r.clone(),
            })
            .collect(),
        params_digest: String::new(),
        metadata: None,
    }
}

proptest! {
    #[test]
    fn rendered_labels_round_trip(base in "[a-zɕʂʐθðŋ]{1,4}", class in class_strategy()) {
        let label = VisemeLabel { base, class };
        let rendered = label.rendered();
        prop_assert_eq!(rendered.ends_with("_E"), class == VisemeClass::EnglishOnly);
        prop_assert_eq!(rendered.ends_with("_M"), class == VisemeClass::MandarinOnly);
        prop_assert_eq!(VisemeLabel::parse_rendered(&rendered), Some(label));
    }

    #[test]
    fn mapping_preserves_length(language in language_strategy(), picks in prop::collection::vec(any::<prop::sample::Index>(), 0..20)) {
        let tables = bundled::tables();
        let phonemes: Vec<Phoneme> = tables.map(language).keys().cloned().collect();
        let seq: Vec<Phoneme> = picks.iter().map(|i| i.get(&phonemes).clone()).collect();
        let visemes = phonemes_to_visemes(&seq, language, &tables).unwrap();
        prop_assert_eq!(visemes.len(), seq.len());
        prop_assert_eq!(&visemes, &phonemes_to_visemes(&seq, language, &tables).unwrap());
        let scope = Scope::Monolingual(language);
        prop_assert!(visemes.iter().all(|v| scope.contains_class(v.class)));
    }

    #[test]
    fn splits_are_nested_and_monotone(corpus in corpus_strategy(), seed in any::<u64>()) {
        let splits: Vec<LabeledCorpus> = SPLIT_FRACTIONS
            .iter()
            .map(|&f| split_corpus(&corpus, &SplitSpec::new(f, seed).unwrap()).unwrap())
            .collect();
        prop_assert_eq!(splits.last().unwrap(), &corpus);
        for pair in splits.windows(2) {
            prop_assert!(pair[0].total_samples() <= pair[1].total_samples());
            for (small, large) in pair[0].entries.iter().zip(&pair[1].entries) {
                prop_assert_eq!(&small.word, &large.word);
                prop_assert!(small.sample_count() >= 1);
                prop_assert!(small.sample_ids.iter().all(|id| large.sample_ids.contains(id)));
            }
        }
    }

    #[test]
    fn distribution_conserves_counts(corpus in corpus_strategy()) {
        let dist = viseme_distribution(&corpus).unwrap();
        let expected: u64 = corpus
            .entries
            .iter()
            .map(|e| e.visemes.len() as u64 * u64::from(e.sample_count()))
            .sum();
        prop_assert_eq!(dist.total(), expected);
        let by_class: u64 = VisemeClass::ALL.iter().map(|&c| dist.class_total(c)).sum();
        prop_assert_eq!(by_class, expected);
    }

    #[test]
    fn gains_scale_linearly(rows in rows_strategy(3), c in 0.0f64..=1.0) {
        let scaled: Vec<Vec<Option<f64>>> = rows.iter().map(|r| r.iter().map(|v| v.map(|x| c * x)).collect()).collect();
        for (g, gs) in gain_rows(&rows).iter().flatten().zip(gain_rows(&scaled).iter().flatten()) {
            match (g, gs) {
                (Some(a), Some(b)) => prop_assert!((c * a - b).abs() < 1e-12),
                (None, None) => {}
                _ => prop_assert!(false, "presence changed under scaling"),
            }
        }
    }

    #[test]
    fn cp_shifts_with_prepended_flat_epochs(rows in rows_strategy(4), j in 0usize..6) {
        let params = DetectionParams::default();
        let mut shifted = vec![rows[0].clone(); j];
        shifted.extend(rows.iter().cloned());
        let base = detect_in_rows(&rows, &params).cp_epoch;
        prop_assert_eq!(detect_in_rows(&shifted, &params).cp_epoch, base.map(|e| e + j as u32));
    }

    #[test]
    fn stricter_detection_is_never_earlier(
        rows in rows_strategy(5),
        theta in 0.01f64..0.3,
        dtheta in 0.0f64..0.2,
        rho in 0.05f64..1.0,
        drho in 0.0f64..0.5,
    ) {
        let loose = DetectionParams { threshold: theta, fraction: rho, window: 1 };
        let strict = DetectionParams { threshold: theta + dtheta, fraction: (rho + drho).min(1.0), window: 1 };
        let a = detect_in_rows(&rows, &loose).cp_epoch;
        let b = detect_in_rows(&rows, &strict).cp_epoch;
        if let Some(b) = b {
            prop_assert!(a.is_some_and(|a| a <= b));
        }
    }

    #[test]
    fn renderers_are_pure(rows in rows_strategy(3), cp in prop::option::of(1u32..15)) {
        let trace = trace_of(&rows);
        prop_assert_eq!(heatmap_svg(&trace, cp).unwrap(), heatmap_svg(&trace.clone(), cp).unwrap());
        let bars: Vec<VisemeBars> = trace
            .inventory
            .iter()
            .zip(&rows[0])
            .map(|(label, acc)| VisemeBars {
                label: label.clone(),
                class: VisemeClass::Common,
                mono_mandarin: *acc,
                mono_english: None,
                at_cp: *acc,
                at_convergence: Some(0.5),
            })
            .collect();
        let report = CrossInferenceReport::from_visemes(bars);
        prop_assert_eq!(bars_svg(&report), bars_svg(&report.clone()));
    }
}

#[test]
fn merged_inventory_is_partitioned_by_class() {
    let tables = bundled::tables();
    let merged = build_inventory(Scope::Merged, &tables).unwrap();
    let mut bases = std::collections::HashSet::new();
    for label in merged.labels() {
        assert!(bases.insert(label.base.clone()), "`{}` appears in two classes", label.base);
    }
    let per_class: usize = VisemeClass::ALL.iter().map(|&c| merged.count_class(c)).sum();
    assert_eq!(per_class, merged.len());
}
