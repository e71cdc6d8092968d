use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use viseme_lab::analyzer::{
    cp_vs_data_fraction, cross_inference_compare, detect_critical_period, render_bars, render_heatmap,
    CriticalPeriodReport, CrossInferenceReport, DetectionParams, FractionSummary,
};
use viseme_lab::learner::{ProtocolKind, SwitchPoint, TrainingTrace};
use viseme_lab::viseme::{LanguageId, VisemeClass};
use viseme_lab::Error as CoreError;

use crate::config::run_name;
use crate::error::{CliError, CliResult};
use crate::output::{print_json, write_atomic, write_json};

pub const REPORT_FILE: &str = "analysis.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub name: String,
    pub file: PathBuf,
    pub family: String,
    pub fraction: f64,
    pub seed: u64,
    pub epochs: usize,
    pub final_overall: f64,
    pub switch_epoch: Option<u32>,
    /// Absent for traces too short to analyse.
    pub critical_period: Option<CriticalPeriodReport>,
    pub heatmap: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionGroup {
    pub family: String,
    pub seed: u64,
    pub summary: Option<FractionSummary>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossGroup {
    /// First language, or `None` when both directions are averaged.
    pub l1: Option<LanguageId>,
    pub fraction: f64,
    pub seed: u64,
    pub report: CrossInferenceReport,
    pub chart: PathBuf,
}

impl CrossGroup {
    pub fn drop(&self, class: VisemeClass) -> Option<f64> {
        self.report.class(class).drop
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub detection: DetectionParams,
    pub traces: Vec<TraceReport>,
    pub fractions: Vec<FractionGroup>,
    pub cross: Vec<CrossGroup>,
}

/// Trace files named directly, plus every `*.trace` inside named directories
/// (partial traces of failed runs excluded).
pub fn collect_traces(inputs: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let entries = std::fs::read_dir(input).map_err(|e| CliError::Data(format!("{}: {e}", input.display())))?;
            let mut found: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
                    name.ends_with(".trace") && !name.ends_with(".partial.trace")
                })
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    if files.is_empty() {
        return Err(CliError::Data("no trace files to analyse".into()));
    }
    Ok(files)
}

struct Loaded {
    name: String,
    file: PathBuf,
    trace: TrainingTrace,
}

impl Loaded {
    fn fraction(&self) -> f64 {
        self.trace.protocol.fraction_english
    }

    fn seed(&self) -> u64 {
        self.trace.config.seed
    }
}

fn incompatible(a: &Loaded, b: &Loaded) -> CliError {
    CliError::Data(
        CoreError::Incompatible {
            expected: format!("{} ({})", a.trace.inventory_hash_hex(), a.name),
            found: format!("{} ({})", b.trace.inventory_hash_hex(), b.name),
        }
        .to_string(),
    )
}

fn fraction_tag(fraction: f64) -> String {
    format!("f{:03}", (fraction * 100.0).round() as u32)
}

pub fn analyze(files: &[PathBuf], params: &DetectionParams, out: &Path) -> CliResult<AnalysisReport> {
    params.validate()?;
    let loaded: Vec<Loaded> = files
        .iter()
        .map(|file| {
            let trace = TrainingTrace::load(file)?;
            trace.validate()?;
            Ok(Loaded {
                name: run_name(&trace.protocol, trace.config.seed),
                file: file.clone(),
                trace,
            })
        })
        .collect::<CliResult<_>>()?;

    let heatmaps = out.join("heatmaps");
    std::fs::create_dir_all(&heatmaps).map_err(|e| CliError::Data(format!("{}: {e}", heatmaps.display())))?;
    let mut traces = Vec::new();
    for l in &loaded {
        let heatmap = heatmaps.join(format!("{}.svg", l.name));
        render_heatmap(&l.trace, params, &heatmap)?;
        let critical_period = if l.trace.epochs() >= 3 {
            Some(detect_critical_period(&l.trace, params)?)
        } else {
            None
        };
        traces.push(TraceReport {
            name: l.name.clone(),
            file: l.file.clone(),
            family: l.trace.protocol.family(),
            fraction: l.fraction(),
            seed: l.seed(),
            epochs: l.trace.epochs(),
            final_overall: l.trace.records.last().map_or(0.0, |r| r.overall),
            switch_epoch: l.trace.switch_epoch(),
            critical_period,
            heatmap,
        });
    }

    let mut groups: BTreeMap<(String, u64), Vec<usize>> = BTreeMap::new();
    for (i, l) in loaded.iter().enumerate() {
        if !matches!(l.trace.protocol.kind, ProtocolKind::Sequential { .. }) {
            groups.entry((l.trace.protocol.family(), l.seed())).or_default().push(i);
        }
    }
    let mut fractions = Vec::new();
    for ((family, seed), members) in groups {
        let first = &loaded[members[0]];
        if let Some(&other) = members.iter().find(|&&i| loaded[i].trace.inventory != first.trace.inventory) {
            return Err(incompatible(first, &loaded[other]));
        }
        if members.len() < 2 {
            continue;
        }
        let reports: Vec<(f64, CriticalPeriodReport)> = members
            .iter()
            .filter_map(|&i| Some((loaded[i].fraction(), traces[i].critical_period.clone()?)))
            .collect();
        let (summary, note) = match cp_vs_data_fraction(&reports) {
            Ok(s) => (Some(s), None),
            Err(e) => (None, Some(e.to_string())),
        };
        fractions.push(FractionGroup { family, seed, summary, note });
    }

    let bars = out.join("bars");
    let mut cross = Vec::new();
    let mut pairs: BTreeMap<(u64, u64, LanguageId), [Option<usize>; 2]> = BTreeMap::new();
    for (i, l) in loaded.iter().enumerate() {
        if let ProtocolKind::Sequential { l1, switch } = l.trace.protocol.kind {
            let slot = usize::from(switch == SwitchPoint::AtConvergence);
            pairs.entry((l.fraction().to_bits(), l.seed(), l1)).or_default()[slot] = Some(i);
        }
    }
    let mut per_run: BTreeMap<(u64, u64), Vec<CrossInferenceReport>> = BTreeMap::new();
    for ((fraction_bits, seed, l1), slots) in pairs {
        let [Some(cp), Some(conv)] = slots else { continue };
        let (cp, conv) = (&loaded[cp], &loaded[conv]);
        if cp.trace.inventory != conv.trace.inventory {
            return Err(incompatible(cp, conv));
        }
        let fraction = f64::from_bits(fraction_bits);
        let refs: Vec<&TrainingTrace> = loaded
            .iter()
            .filter(|l| {
                matches!(l.trace.protocol.kind, ProtocolKind::Monolingual { .. })
                    && l.seed() == seed
                    && l.fraction() == fraction
            })
            .map(|l| &l.trace)
            .collect();
        let report = cross_inference_compare(&cp.trace, &conv.trace, &refs, &cp.trace.inventory)?;
        let chart = bars.join(format!("seq-{l1}_{}_s{seed}.svg", fraction_tag(fraction)));
        std::fs::create_dir_all(&bars).map_err(|e| CliError::Data(format!("{}: {e}", bars.display())))?;
        render_bars(&report, &chart)?;
        per_run.entry((fraction_bits, seed)).or_default().push(report.clone());
        cross.push(CrossGroup { l1: Some(l1), fraction, seed, report, chart });
    }
    for ((fraction_bits, seed), reports) in per_run {
        if reports.len() < 2 {
            continue;
        }
        let fraction = f64::from_bits(fraction_bits);
        let report = CrossInferenceReport::combine(&reports)?;
        let chart = bars.join(format!("seq-both_{}_s{seed}.svg", fraction_tag(fraction)));
        render_bars(&report, &chart)?;
        cross.push(CrossGroup { l1: None, fraction, seed, report, chart });
    }

    let report = AnalysisReport {
        detection: *params,
        traces,
        fractions,
        cross,
    };
    write_json(&out.join(REPORT_FILE), &report)?;
    write_atomic(&out.join("analysis.txt"), report.to_text().as_bytes())?;
    Ok(report)
}

impl AnalysisReport {
    pub fn to_text(&self) -> String {
        let mut out = String::from("run\tepochs\tfinal_overall\tcp_epoch\tsurge_fraction\n");
        for t in &self.traces {
            let (cp, share) = match &t.critical_period {
                Some(r) => (r.cp_epoch.map_or("-".into(), |e| e.to_string()), format!("{:.3}", r.surge_fraction)),
                None => ("-".into(), "-".into()),
            };
            writeln!(out, "{}\t{}\t{:.4}\t{cp}\t{share}", t.name, t.epochs, t.final_overall).unwrap();
        }
        for g in &self.fractions {
            match &g.summary {
                Some(s) => {
                    let pairs: Vec<String> = s
                        .pairs
                        .iter()
                        .map(|(f, e)| format!("{f}:{}", e.map_or("-".into(), |e| e.to_string())))
                        .collect();
                    writeln!(
                        out,
                        "cp-vs-fraction {} seed {}: {} monotone={} partial={}",
                        g.family,
                        g.seed,
                        pairs.join(" "),
                        s.monotone,
                        s.partial
                    )
                    .unwrap();
                }
                None => writeln!(out, "cp-vs-fraction {} seed {}: {}", g.family, g.seed, g.note.as_deref().unwrap_or("")).unwrap(),
            }
        }
        for c in &self.cross {
            let l1 = c.l1.map_or("both".to_string(), |l| l.to_string());
            writeln!(out, "cross-inference l1={l1} fraction={} seed={}", c.fraction, c.seed).unwrap();
            out += &c.report.to_text();
        }
        out
    }
}

pub fn cmd_analyze(inputs: &[PathBuf], params: &DetectionParams, out: &Path, json: bool) -> CliResult<()> {
    let files = collect_traces(inputs)?;
    let report = analyze(&files, params, out)?;
    if json {
        print_json(&report);
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}
