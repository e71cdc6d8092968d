//! Parameter sweep over the run matrix.
//!
//! `cargo run --release --example sweep -- mode=mono|bi|seq seeds=N lang=en \
//!     gen.sigma=0.3 train.warmup_steps=7000 ...`

use viseme_lab::analyzer::{cross_inference_compare, detect_critical_period, CrossInferenceReport};
use viseme_lab::corpus::SPLIT_FRACTIONS;
use viseme_lab::features::{ConfusabilityModel, GeneratorParams};
use viseme_lab::learner::{run_protocol, Corpora, Protocol, SwitchPoint, TrainingConfig};
use viseme_lab::viseme::{build_inventory, LanguageId, Scope, VisemeClass};

fn set(value: &mut serde_json::Value, key: &str, raw: &str) {
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.into()));
    value[key] = parsed;
}

fn main() {
    let mut gen = serde_json::to_value(GeneratorParams::default()).unwrap();
    let mut train = serde_json::to_value(TrainingConfig::default()).unwrap();
    let mut mode = "mono".to_string();
    let mut seeds = 3u64;
    let mut lang = LanguageId::English;
    for arg in std::env::args().skip(1) {
        let (k, v) = arg.split_once('=').expect("key=value");
        match k {
            "mode" => mode = v.to_string(),
            "seeds" => seeds = v.parse().unwrap(),
            "lang" => lang = v.parse().unwrap(),
            _ if k.starts_with("gen.") => set(&mut gen, &k[4..], v),
            _ if k.starts_with("train.") => set(&mut train, &k[6..], v),
            _ => panic!("unknown key {k}"),
        }
    }
    let gen: GeneratorParams = serde_json::from_value(gen).unwrap();
    let base: TrainingConfig = serde_json::from_value(train).unwrap();
    let corpora = Corpora::bundled().unwrap();
    let merged = build_inventory(Scope::Merged, &corpora.tables).unwrap();

    for seed in 0..seeds {
        let model = ConfusabilityModel::synthetic(&merged, &GeneratorParams { seed, ..gen.clone() }).unwrap();
        let config = TrainingConfig { seed, ..base.clone() };
        match mode.as_str() {
            "mono" | "bi" => {
                let mut row = Vec::new();
                for &f in &SPLIT_FRACTIONS {
                    let protocol = if mode == "bi" { Protocol::bilingual(f) } else { Protocol::monolingual(lang, f) };
                    let trace = run_protocol(&protocol, &corpora, &model, &config).unwrap();
                    let cp = detect_critical_period(&trace, &config.detection).unwrap();
                    let last = trace.records.last().unwrap().overall;
                    if seed == 0 && (f == 0.25 || f == 1.0) {
                        let s: Vec<String> = trace.overall_series().iter().map(|v| format!("{v:.2}")).collect();
                        println!("  f={f} {}", s.join(" "));
                    }
                    row.push(format!("{f}:cp={:?}({:.2}) fin={last:.3}", cp.cp_epoch, cp.surge_fraction));
                }
                println!("seed {seed}: {}", row.join("  "));
            }
            "seq" => {
                let mut reports = Vec::new();
                let mut line = String::new();
                for l1 in LanguageId::ALL {
                    let run = |switch| run_protocol(&Protocol::sequential(l1, switch, 1.0), &corpora, &model, &config);
                    let (cp, conv) = match (run(SwitchPoint::AtCriticalPeriod), run(SwitchPoint::AtConvergence)) {
                        (Ok(a), Ok(b)) => (a, b),
                        (a, b) => {
                            println!("seed {seed} {l1}: {:?} / {:?}", a.err(), b.err());
                            continue;
                        }
                    };
                    let report = cross_inference_compare(&cp, &conv, &[], &merged.rendered()).unwrap();
                    line += &format!(
                        "{l1}: sw {:?}/{:?} n {}/{} ",
                        cp.switch_epoch(),
                        conv.switch_epoch(),
                        cp.epochs(),
                        conv.epochs()
                    );
                    for c in &report.classes {
                        if let (Some(a), Some(b)) = (c.at_cp, c.at_convergence) {
                            line += &format!("{}:{a:.3}-{b:.3}={:+.3} ", &c.class.name()[..2], a - b);
                        }
                    }
                    line += "| ";
                    reports.push(report);
                }
                let all = CrossInferenceReport::combine(&reports).unwrap();
                let d = |c| all.class(c).drop.unwrap_or(f64::NAN);
                println!(
                    "seed {seed}: {line} drops C {:+.3} E {:+.3} M {:+.3}",
                    d(VisemeClass::Common),
                    d(VisemeClass::EnglishOnly),
                    d(VisemeClass::MandarinOnly)
                );
            }
            _ => panic!("mode"),
        }
    }
}
