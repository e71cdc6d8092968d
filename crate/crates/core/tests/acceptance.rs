//! Acceptance checks over the default generator and learner settings.
//! Prints one PASS/FAIL line per criterion and exits non-zero on any FAIL.

use std::collections::HashSet;
use std::time::Instant;

use rand::Rng;
use viseme_lab::analyzer::{
    cp_vs_data_fraction, cross_inference_compare, detect_critical_period, detect_in_rows, gains, CriticalPeriodReport,
    CrossInferenceReport, DetectionParams,
};
use viseme_lab::bundled;
use viseme_lab::corpus::{viseme_distribution, SPLIT_FRACTIONS};
use viseme_lab::features::{ConfusabilityModel, GeneratorParams};
use viseme_lab::learner::{
    init_model_scaled, loss_and_gradient, run_protocol, softmax_in_place, Corpora, EpochRecord, FrameSet, Protocol,
    SwitchPoint, TrainingConfig, TrainingTrace,
};
use viseme_lab::rng::seeded_rng;
use viseme_lab::viseme::{build_inventory, LanguageId, Scope, VisemeClass, VisemeInventory, VisemeLabel};

const SEEDS: u64 = 10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

struct Setup {
    corpora: Corpora,
    merged: VisemeInventory,
}

impl Setup {
    fn model(&self, seed: u64) -> ConfusabilityModel {
        let params = GeneratorParams { seed, ..GeneratorParams::default() };
        ConfusabilityModel::synthetic(&self.merged, &params).expect("default generator")
    }

    fn config(seed: u64) -> TrainingConfig {
        TrainingConfig { seed, ..TrainingConfig::default() }
    }
}

/// Fraction, detected critical period and final overall accuracy of one run.
type RunResult = (f64, CriticalPeriodReport, f64);
type Family = (&'static str, fn(f64) -> Protocol);

/// Per family, per seed, one result per fraction.
struct Matrix {
    families: Vec<(String, Vec<Vec<RunResult>>)>,
}

fn run_matrix(setup: &Setup) -> Matrix {
    let families: [Family; 3] = [
        ("mono-en", |f| Protocol::monolingual(LanguageId::English, f)),
        ("mono-cmn", |f| Protocol::monolingual(LanguageId::Mandarin, f)),
        ("bilingual", Protocol::bilingual),
    ];
    let detection = DetectionParams::default();
    let families = families
        .iter()
        .map(|(name, make)| {
            let per_seed = (0..SEEDS)
                .map(|seed| {
                    let model = setup.model(seed);
                    SPLIT_FRACTIONS
                        .iter()
                        .map(|&f| {
                            let trace = run_protocol(&make(f), &setup.corpora, &model, &Setup::config(seed)).expect("run");
                            let cp = detect_critical_period(&trace, &detection).expect("detect");
                            (f, cp, trace.records.last().expect("epochs").overall)
                        })
                        .collect()
                })
                .collect();
            (name.to_string(), per_seed)
        })
        .collect();
    Matrix { families }
}

fn taxonomy(setup: &Setup) -> Outcome {
    let tables = &setup.corpora.tables;
    let mut problems = Vec::new();
    let mut bases = HashSet::new();
    for label in setup.merged.labels() {
        if !bases.insert(label.base.clone()) {
            problems.push(format!("{} in two classes", label.base));
        }
        if VisemeLabel::parse_rendered(&label.rendered()).as_ref() != Some(label) {
            problems.push(format!("{label} does not round-trip"));
        }
    }
    for lang in LanguageId::ALL {
        let mono = build_inventory(Scope::Monolingual(lang), tables).expect("inventory");
        let other = lang.other().unique_class();
        if mono.labels().iter().any(|l| l.class == other) {
            problems.push(format!("{lang} inventory holds {other} visemes"));
        }
        let mapped: HashSet<String> = tables.viseme_symbols(lang).iter().map(|s| s.to_string()).collect();
        for label in setup.merged.labels() {
            let in_lang = mapped.contains(&label.base);
            let expected = label.class == VisemeClass::Common || label.class == lang.unique_class();
            if in_lang != expected {
                problems.push(format!("{label} misclassified for {lang}"));
            }
        }
    }
    let counts: Vec<usize> = LanguageId::ALL
        .iter()
        .map(|&l| setup.corpora.get(l).map_or(0, |c| c.len()))
        .collect();
    let listed: Vec<usize> = LanguageId::ALL.iter().map(|&l| bundled::word_list(l).len()).collect();
    if counts != listed || counts != [500, 1000] {
        problems.push(format!("transliterated {counts:?} of {listed:?} words"));
    }
    let sizes = VisemeClass::ALL.map(|c| setup.merged.count_class(c));
    outcome(
        problems.is_empty(),
        format!("merged {} = {sizes:?}, words {counts:?} {}", setup.merged.len(), problems.join("; ")),
    )
}

fn distribution(setup: &Setup) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for lang in LanguageId::ALL {
        let dist = viseme_distribution(setup.corpora.get(lang).expect("corpus")).expect("distribution");
        let common = dist.class_total(VisemeClass::Common);
        let unique = [VisemeClass::EnglishOnly, VisemeClass::MandarinOnly].map(|c| dist.class_total(c));
        pass &= unique.iter().all(|&u| common > u);
        detail.push(format!("{lang}: common {common} vs unique {unique:?}"));
    }
    outcome(pass, detail.join(", "))
}

fn cp_existence(matrix: &Matrix) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, seeds) in matrix.families.iter().filter(|f| f.0.starts_with("mono")) {
        let found = seeds
            .iter()
            .filter(|runs| {
                let (_, cp, _) = runs.iter().find(|r| r.0 == 1.0).expect("full split");
                cp.cp_epoch.is_some() && cp.surge_fraction >= 0.5
            })
            .count();
        pass &= found >= 9;
        detail.push(format!("{name} {found}/{SEEDS}"));
    }
    outcome(pass, detail.join(", "))
}

fn cp_monotone(matrix: &Matrix) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, seeds) in &matrix.families {
        let mut monotone = 0;
        let mut example = String::new();
        for runs in seeds {
            let reports: Vec<(f64, CriticalPeriodReport)> = runs.iter().map(|(f, cp, _)| (*f, cp.clone())).collect();
            if let Ok(summary) = cp_vs_data_fraction(&reports) {
                monotone += usize::from(summary.monotone && !summary.partial);
                if example.is_empty() {
                    example = summary
                        .pairs
                        .iter()
                        .map(|(_, e)| e.map_or("-".into(), |e| e.to_string()))
                        .collect::<Vec<_>>()
                        .join("/");
                }
            }
        }
        pass &= monotone >= 8;
        detail.push(format!("{name} {monotone}/{SEEDS} (seed 0 CPs {example})"));
    }
    outcome(pass, detail.join(", "))
}

fn data_quantity(matrix: &Matrix) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, seeds) in &matrix.families {
        let mean_at = |f: f64| {
            seeds
                .iter()
                .map(|runs| runs.iter().find(|r| r.0 == f).expect("fraction").2)
                .sum::<f64>()
                / seeds.len() as f64
        };
        let gap = 100.0 * (mean_at(1.0) - mean_at(0.25));
        pass &= gap >= 3.0;
        detail.push(format!("{name} {:.2}% -> {:.2}% (+{gap:.2} points)", 100.0 * mean_at(0.25), 100.0 * mean_at(1.0)));
    }
    outcome(pass, detail.join(", "))
}

fn switch_ordering(setup: &Setup) -> Outcome {
    let mut every_class = 0;
    let mut unique_larger = 0;
    let mut sums = [0.0; 3];
    let mut failures = Vec::new();
    for seed in 0..SEEDS {
        let model = setup.model(seed);
        let config = Setup::config(seed);
        let mut reports = Vec::new();
        for l1 in LanguageId::ALL {
            let run = |switch| run_protocol(&Protocol::sequential(l1, switch, 1.0), &setup.corpora, &model, &config);
            match (run(SwitchPoint::AtCriticalPeriod), run(SwitchPoint::AtConvergence)) {
                (Ok(cp), Ok(conv)) => reports.push(
                    cross_inference_compare(&cp, &conv, &[], &setup.merged.rendered()).expect("comparison"),
                ),
                (a, b) => failures.push(format!("seed {seed} {l1}: {:?}", a.err().or(b.err()))),
            }
        }
        if reports.len() != 2 {
            continue;
        }
        let combined = CrossInferenceReport::combine(&reports).expect("combine");
        let drops = VisemeClass::ALL.map(|c| combined.class(c).drop.unwrap_or(f64::NAN));
        for (s, d) in sums.iter_mut().zip(drops) {
            *s += d;
        }
        every_class += usize::from(drops.iter().all(|&d| d > 0.0));
        unique_larger += usize::from(drops[1] > drops[0] && drops[2] > drops[0]);
    }
    let mean = sums.map(|s| 100.0 * s / SEEDS as f64);
    outcome(
        every_class >= 8 && unique_larger >= 7,
        format!(
            "cp beats convergence in all classes {every_class}/{SEEDS}, unique drop > common {unique_larger}/{SEEDS}; \
             mean drops common {:.2}, english-only {:.2}, mandarin-only {:.2} points {}",
            mean[0],
            mean[1],
            mean[2],
            failures.join("; ")
        ),
    )
}

fn numerics(setup: &Setup) -> Outcome {
    let mut rng = seeded_rng(2024);
    let labels = ["a", "b", "c", "d"].map(|b| VisemeLabel { base: b.into(), class: VisemeClass::Common });
    let inventory = VisemeInventory::from_labels(Scope::Merged, labels);
    let (classes, dim, h) = (4, 5, 1e-6);
    let mut worst: f64 = 0.0;
    for case in 0..50u64 {
        let mut params = init_model_scaled(&inventory, dim, case, 0.5);
        params.bias = (0..classes).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = 8;
        let frames = FrameSet {
            dim,
            features: (0..n * dim).map(|_| rng.random_range(-2.0..2.0)).collect(),
            labels: (0..n).map(|_| rng.random_range(0..classes as u32)).collect(),
        };
        let idx: Vec<usize> = (0..n).collect();
        let weights = frames.balanced_weights(classes);
        let (mut gw, mut gb) = (vec![0.0; classes * dim], vec![0.0; classes]);
        loss_and_gradient(&params, &frames, &idx, &weights, &mut gw, &mut gb);
        let (mut sw, mut sb) = (gw.clone(), gb.clone());
        for k in 0..classes * dim + classes {
            let (mut plus, mut minus) = (params.clone(), params.clone());
            let analytic = if k < classes * dim {
                plus.weights[k] += h;
                minus.weights[k] -= h;
                gw[k]
            } else {
                plus.bias[k - classes * dim] += h;
                minus.bias[k - classes * dim] -= h;
                gb[k - classes * dim]
            };
            let numeric = (loss_and_gradient(&plus, &frames, &idx, &weights, &mut sw, &mut sb)
                - loss_and_gradient(&minus, &frames, &idx, &weights, &mut sw, &mut sb))
                / (2.0 * h);
            worst = worst.max((analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3));
        }
    }
    let mut softmax_err: f64 = 0.0;
    for _ in 0..1000 {
        let mut z: Vec<f64> = (0..19).map(|_| rng.random_range(-30.0..30.0)).collect();
        softmax_in_place(&mut z);
        softmax_err = softmax_err.max((z.iter().sum::<f64>() - 1.0).abs());
    }
    let model = setup.model(7);
    let config = TrainingConfig { max_epochs: 4, ..Setup::config(7) };
    let protocol = Protocol::bilingual(0.5);
    let a = run_protocol(&protocol, &setup.corpora, &model, &config).expect("run");
    let b = run_protocol(&protocol, &setup.corpora, &model, &config).expect("run");
    let identical = a == b && a.to_text() == b.to_text();
    outcome(
        worst < 1e-4 && softmax_err < 1e-9 && identical,
        format!("max gradient rel. error {worst:.2e}, softmax error {softmax_err:.1e}, identical traces {identical}"),
    )
}

fn trace_of(rows: &[Vec<f64>]) -> TrainingTrace {
    TrainingTrace {
        protocol: Protocol::sequential(LanguageId::English, SwitchPoint::AtCriticalPeriod, 1.0),
        config: TrainingConfig::default(),
        inventory: vec!["a".into(), "b_E".into(), "c_M".into()],
        records: rows
            .iter()
            .enumerate()
            .map(|(i, r)| EpochRecord {
                epoch: i as u32 + 1,
                phase: if i == 0 { 1 } else { 2 },
                overall: r.iter().sum::<f64>() / r.len() as f64,
                per_viseme: r.iter().map(|&v| Some(v)).collect(),
            })
            .collect(),
        params_digest: String::new(),
        metadata: None,
    }
}

fn analyzer_examples() -> Outcome {
    let params = DetectionParams::default();
    let mut failed = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failed.push(name.to_string());
        }
    };

    let constant = trace_of(&vec![vec![0.4, 0.5, 0.6]; 6]);
    let g = gains(&constant).expect("gains");
    check("constant trace gives zero gains", g.rows.iter().flatten().all(|v| *v == Some(0.0)));

    let series = trace_of(&[vec![0.1; 3], vec![0.3; 3], vec![0.35; 3]]);
    let g = gains(&series).expect("gains");
    check(
        "gains [0.2, 0.05]",
        (g.get(2, 0).unwrap_or(f64::NAN) - 0.2).abs() < 1e-12 && (g.get(3, 0).unwrap_or(f64::NAN) - 0.05).abs() < 1e-12,
    );

    let jump: Vec<Vec<f64>> = (1..=10).map(|e| vec![if e >= 6 { 0.8 } else { 0.1 }; 3]).collect();
    let r = detect_critical_period(&trace_of(&jump), &params).expect("detect");
    check("jump at epoch 6", r.cp_epoch == Some(6) && r.surge_fraction == 1.0);

    let flat = detect_critical_period(&constant, &params).expect("detect");
    check("flat trace has no CP", flat.cp_epoch.is_none());

    let two: Vec<Vec<f64>> = (1..=12)
        .map(|e| vec![0.1 + 0.3 * f64::from(u8::from(e >= 4)) + 0.3 * f64::from(u8::from(e >= 9)); 3])
        .collect();
    check(
        "earliest of two surges",
        detect_critical_period(&trace_of(&two), &params).map(|r| r.cp_epoch) .ok() == Some(Some(4)),
    );

    let report = |e: u32| CriticalPeriodReport { cp_epoch: Some(e), surge_fraction: 1.0, mean_gain: None, params };
    check(
        "pairs (0.25, 5), (1.0, 9) are not monotone",
        cp_vs_data_fraction(&[(0.25, report(5)), (1.0, report(9))]).is_ok_and(|s| !s.monotone),
    );
    check(
        "15/10/7/5 is monotone",
        cp_vs_data_fraction(&[(0.25, report(15)), (0.5, report(10)), (0.75, report(7)), (1.0, report(5))])
            .is_ok_and(|s| s.monotone),
    );

    let same = trace_of(&[vec![0.2; 3], vec![0.6, 0.7, 0.8]]);
    let inventory: Vec<String> = same.inventory.clone();
    check(
        "identical traces give zero drops",
        cross_inference_compare(&same, &same, &[], &inventory)
            .is_ok_and(|r| r.classes.iter().all(|c| c.drop == Some(0.0))),
    );

    let rows: Vec<Vec<Option<f64>>> = jump.iter().map(|r| r.iter().map(|&v| Some(v)).collect()).collect();
    for j in 0..5 {
        let mut shifted = vec![rows[0].clone(); j];
        shifted.extend(rows.iter().cloned());
        check(
            &format!("shift by {j}"),
            detect_in_rows(&shifted, &params).cp_epoch == Some(6 + j as u32),
        );
    }

    outcome(failed.is_empty(), if failed.is_empty() { "all examples hold".into() } else { failed.join("; ") })
}

fn main() {
    let start = Instant::now();
    let corpora = Corpora::bundled().expect("bundled corpora");
    let merged = build_inventory(Scope::Merged, &corpora.tables).expect("merged inventory");
    let setup = Setup { corpora, merged };

    let mut results: Vec<(u8, &str, Outcome)> = vec![
        (1, "viseme taxonomy", taxonomy(&setup)),
        (2, "common visemes dominate", distribution(&setup)),
    ];
    let matrix = run_matrix(&setup);
    results.push((3, "critical period exists", cp_existence(&matrix)));
    results.push((4, "critical period earlier with more data", cp_monotone(&matrix)));
    results.push((5, "switch at critical period beats convergence", switch_ordering(&setup)));
    results.push((6, "more data, higher accuracy", data_quantity(&matrix)));
    results.push((7, "numerical integrity", numerics(&setup)));
    results.push((8, "analyzer examples", analyzer_examples()));

    let mut all = true;
    for (id, name, o) in &results {
        all &= o.pass;
        println!("{} criterion {id} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance finished in {:.0} s", start.elapsed().as_secs_f64());
    if !all {
        std::process::exit(1);
    }
}
