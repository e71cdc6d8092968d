use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use viseme_lab::features::ConfusabilityModel;
use viseme_lab::learner::{run_protocol, Corpora, TrainingTrace};
use viseme_lab::viseme::{build_inventory, Scope};
use viseme_lab::Error as CoreError;

use crate::config::{RunConfig, RunSpec};
use crate::error::{CliError, CliResult};
use crate::output::{write_atomic, write_json};

pub const SUMMARY_FILE: &str = "train_summary.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Trained,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Numeric,
    NoCriticalPeriod,
    Data,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub name: String,
    pub family: String,
    pub fraction: f64,
    pub seed: u64,
    pub status: RunStatus,
    pub trace: Option<PathBuf>,
    pub failure: Option<FailureKind>,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub runs: Vec<RunRecord>,
}

impl TrainSummary {
    pub fn count(&self, status: RunStatus) -> usize {
        self.runs.iter().filter(|r| r.status == status).count()
    }

    /// Exit status for the whole matrix: numeric failures dominate.
    pub fn outcome(&self) -> CliResult<()> {
        let failed: Vec<&RunRecord> = self.runs.iter().filter(|r| r.status == RunStatus::Failed).collect();
        if failed.is_empty() {
            return Ok(());
        }
        let names: Vec<&str> = failed.iter().map(|r| r.name.as_str()).collect();
        let message = format!("{} of {} runs failed: {}", failed.len(), self.runs.len(), names.join(", "));
        if failed.iter().any(|r| r.failure == Some(FailureKind::Numeric)) {
            Err(CliError::Numeric(message))
        } else {
            Err(CliError::Data(message))
        }
    }
}

pub fn trace_path(dir: &Path, spec: &RunSpec) -> PathBuf {
    dir.join(format!("{}.trace", spec.name()))
}

fn run_one(config: &RunConfig, corpora: &Corpora, spec: &RunSpec, dir: &Path, force: bool) -> RunRecord {
    let path = trace_path(dir, spec);
    let mut record = RunRecord {
        name: spec.name(),
        family: spec.protocol.family(),
        fraction: spec.protocol.fraction_english,
        seed: spec.seed,
        status: RunStatus::Trained,
        trace: Some(path.clone()),
        failure: None,
        message: None,
    };
    if !force && TrainingTrace::load(&path).is_ok() {
        record.status = RunStatus::Skipped;
        return record;
    }
    let result = (|| -> Result<TrainingTrace, CoreError> {
        let merged = build_inventory(Scope::Merged, &corpora.tables)?;
        let model = ConfusabilityModel::synthetic(&merged, &config.generator_for(spec.seed))?;
        run_protocol(&spec.protocol, corpora, &model, &config.training_for(spec.seed))
    })();
    let metadata = serde_json::json!({
        "run": spec.name(),
        "generator": config.generator_for(spec.seed),
        "run_config": config,
    });
    let saved = match result {
        Ok(mut trace) => {
            trace.metadata = Some(metadata);
            write_atomic(&path, trace.to_text().as_bytes())
        }
        Err(e) => {
            record.status = RunStatus::Failed;
            record.trace = None;
            record.message = Some(e.to_string());
            record.failure = Some(match &e {
                CoreError::NumericFailure { .. } => FailureKind::Numeric,
                CoreError::NoCriticalPeriod { .. } => FailureKind::NoCriticalPeriod,
                _ => FailureKind::Data,
            });
            if let CoreError::NoCriticalPeriod { partial, .. } = e {
                let mut partial = *partial;
                partial.metadata = Some(metadata);
                let partial_path = path.with_extension("partial.trace");
                write_atomic(&partial_path, partial.to_text().as_bytes())
            } else {
                Ok(())
            }
        }
    };
    if let Err(e) = saved {
        record.status = RunStatus::Failed;
        record.trace = None;
        record.failure = Some(FailureKind::Data);
        record.message = Some(e.to_string());
    }
    record
}

/// Runs the matrix into `dir` on up to `jobs` threads and writes the summary
/// next to the traces. Existing readable traces are kept unless `force`.
pub fn train_matrix(config: &RunConfig, dir: &Path, jobs: usize, force: bool) -> CliResult<TrainSummary> {
    config.validate()?;
    let corpora = config.data.corpora()?;
    let specs = config.runs()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    let runs = pool.install(|| {
        specs
            .par_iter()
            .map(|spec| run_one(config, &corpora, spec, dir, force))
            .collect()
    });
    let summary = TrainSummary { runs };
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

pub fn cmd_train(config: &RunConfig, dir: &Path, jobs: usize, force: bool, json: bool) -> CliResult<()> {
    let summary = train_matrix(config, dir, jobs, force)?;
    if json {
        crate::output::print_json(&summary);
    } else {
        for r in &summary.runs {
            let status = match r.status {
                RunStatus::Trained => "trained",
                RunStatus::Skipped => "skipped",
                RunStatus::Failed => "FAILED",
            };
            match &r.message {
                Some(m) => println!("{status}\t{}\t{m}", r.name),
                None => println!("{status}\t{}", r.name),
            }
        }
        println!(
            "{} trained, {} skipped, {} failed; traces in {}",
            summary.count(RunStatus::Trained),
            summary.count(RunStatus::Skipped),
            summary.count(RunStatus::Failed),
            dir.display()
        );
    }
    summary.outcome()
}
