use std::path::Path;

use serde::{Deserialize, Serialize};
use viseme_lab::viseme::{LanguageId, VisemeClass};

use crate::analyze::{analyze, collect_traces, AnalysisReport, CrossGroup};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::inspect::corpus_stats;
use crate::output::{print_json, write_atomic, write_json};
use crate::train::{train_matrix, RunStatus};

/// Share of seeds (or runs) a claim must hold in.
const CP_EXISTS_SHARE: f64 = 0.9;
const CP_MONOTONE_SHARE: f64 = 0.8;
const SWITCH_SHARE: f64 = 0.8;
const UNIQUE_DROP_SHARE: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub claim: String,
    pub held: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceSummary {
    pub claims: Vec<Claim>,
    pub failed_runs: Vec<String>,
}

impl ReproduceSummary {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.claims {
            out += &format!("{}\t{}\t{}\n", if c.held { "HELD" } else { "NOT HELD" }, c.claim, c.detail);
        }
        if !self.failed_runs.is_empty() {
            out += &format!("failed runs: {}\n", self.failed_runs.join(", "));
        }
        out
    }
}

fn share_claim(name: &str, hits: usize, total: usize, needed: f64, what: &str) -> Claim {
    Claim {
        claim: name.to_string(),
        held: total > 0 && hits as f64 >= needed * total as f64,
        detail: format!("{hits}/{total} {what} (needs {:.0}%)", needed * 100.0),
    }
}

pub fn claims(report: &AnalysisReport) -> Vec<Claim> {
    let full_mono: Vec<_> = report
        .traces
        .iter()
        .filter(|t| t.family.starts_with("mono-") && t.fraction == 1.0)
        .collect();
    let detected = full_mono
        .iter()
        .filter(|t| t.critical_period.as_ref().is_some_and(|r| r.cp_epoch.is_some() && r.surge_fraction >= 0.5))
        .count();

    let monotone = report
        .fractions
        .iter()
        .filter(|g| g.summary.as_ref().is_some_and(|s| s.monotone && !s.partial))
        .count();

    let combined: Vec<&CrossGroup> = report.cross.iter().filter(|c| c.l1.is_none()).collect();
    let groups = if combined.is_empty() {
        report.cross.iter().collect()
    } else {
        combined
    };
    let drops = |g: &CrossGroup| VisemeClass::ALL.map(|c| g.drop(c).unwrap_or(f64::NAN));
    let all_positive = groups.iter().filter(|g| drops(g).iter().all(|&d| d > 0.0)).count();
    let unique_larger = groups
        .iter()
        .filter(|g| {
            let [common, english, mandarin] = drops(g);
            let unique: Vec<f64> = match g.l1 {
                None => vec![english, mandarin],
                Some(LanguageId::English) => vec![mandarin],
                Some(LanguageId::Mandarin) => vec![english],
            };
            unique.iter().all(|&u| u > common)
        })
        .count();

    vec![
        share_claim("critical period exists", detected, full_mono.len(), CP_EXISTS_SHARE, "monolingual full-data runs"),
        share_claim(
            "critical period occurs earlier with more data",
            monotone,
            report.fractions.len(),
            CP_MONOTONE_SHARE,
            "family/seed groups non-increasing over fractions",
        ),
        share_claim(
            "switching at the critical period beats switching at convergence",
            all_positive,
            groups.len(),
            SWITCH_SHARE,
            "seeds with a positive drop in every class",
        ),
        share_claim(
            "unique visemes drop more than common visemes",
            unique_larger,
            groups.len(),
            UNIQUE_DROP_SHARE,
            "seeds",
        ),
    ]
}

pub fn reproduce(config: &RunConfig, root: &Path, jobs: usize, force: bool) -> CliResult<ReproduceSummary> {
    config.validate()?;
    write_atomic(&root.join("config.toml"), config.to_toml().as_bytes())?;
    for lang in LanguageId::ALL {
        let plot = root.join("corpus").join(format!("{lang}.svg"));
        let stats = corpus_stats(&config.data, lang, None, Some(&plot))?;
        write_json(&root.join("corpus").join(format!("{lang}.json")), &stats)?;
    }
    let traces = root.join("traces");
    let summary = train_matrix(config, &traces, jobs, force)?;
    let failed_runs = summary
        .runs
        .iter()
        .filter(|r| r.status == RunStatus::Failed)
        .map(|r| r.name.clone())
        .collect();
    let files = collect_traces(&[traces])?;
    let report = analyze(&files, &config.training.detection, &root.join("analysis"))?;
    let result = ReproduceSummary {
        claims: claims(&report),
        failed_runs,
    };
    write_json(&root.join("summary.json"), &result)?;
    write_atomic(&root.join("summary.txt"), result.to_text().as_bytes())?;
    summary.outcome()?;
    Ok(result)
}

pub fn cmd_reproduce(config: &RunConfig, root: &Path, jobs: usize, force: bool, json: bool) -> CliResult<()> {
    let summary = reproduce(config, root, jobs, force)?;
    if json {
        print_json(&summary);
    } else {
        print!("{}", summary.to_text());
        println!("artifacts in {}", root.display());
    }
    Ok(())
}
