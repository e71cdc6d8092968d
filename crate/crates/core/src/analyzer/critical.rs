use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::TrainingTrace;

/// Per-viseme first differences of a trace, in accuracy points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainMatrix {
    pub labels: Vec<String>,
    /// Epoch of each row (the later epoch of the difference), from 2.
    pub epochs: Vec<u32>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl GainMatrix {
    pub fn get(&self, epoch: u32, viseme: usize) -> Option<f64> {
        let row = epoch.checked_sub(2)? as usize;
        self.rows.get(row)?.get(viseme).copied().flatten()
    }
}

pub fn gains(trace: &TrainingTrace) -> Result<GainMatrix> {
    if trace.records.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "gains need at least 2 epochs, trace has {}",
            trace.records.len()
        )));
    }
    let rows: Vec<Vec<Option<f64>>> = trace.records.iter().map(|r| r.per_viseme.clone()).collect();
    Ok(GainMatrix {
        labels: trace.inventory.clone(),
        epochs: trace.records[1..].iter().map(|r| r.epoch).collect(),
        rows: gain_rows(&rows),
    })
}

/// First differences of accuracy rows; a cell is absent when either side is.
pub fn gain_rows(accuracies: &[Vec<Option<f64>>]) -> Vec<Vec<Option<f64>>> {
    accuracies
        .windows(2)
        .map(|w| {
            w[1].iter()
                .zip(&w[0])
                .map(|(b, a)| Some((*b)? - (*a)?))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionParams {
    /// Surge threshold θ in accuracy points per epoch.
    pub threshold: f64,
    /// Required fraction ρ of present visemes at or above θ.
    pub fraction: f64,
    /// Trailing smoothing window over each gain series (1 = none).
    pub window: u32,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            threshold: 0.05,
            fraction: 0.5,
            window: 1,
        }
    }
}

impl DetectionParams {
    /// ρ = 0.95.
    pub fn strict() -> DetectionParams {
        DetectionParams {
            fraction: 0.95,
            ..DetectionParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(Error::Config("surge threshold must be positive".into()));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::Config("surge fraction must lie in (0, 1]".into()));
        }
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(Error::Config("smoothing window must be odd and at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPeriodReport {
    pub cp_epoch: Option<u32>,
    /// Share of present visemes at or above θ at `cp_epoch` (0 when absent).
    pub surge_fraction: f64,
    pub mean_gain: Option<f64>,
    pub params: DetectionParams,
}

/// Smoothed gains: each cell is the mean of the last `window` gains of its
/// viseme, with gains before the first epoch (or absent) counted as zero.
/// Trailing windows keep the online and offline forms identical.
fn smoothed(gains: &[Vec<Option<f64>>], window: usize) -> Vec<Vec<Option<f64>>> {
    (0..gains.len())
        .map(|t| {
            (0..gains[t].len())
                .map(|v| {
                    gains[t][v]?;
                    let lo = (t + 1).saturating_sub(window);
                    let sum: f64 = (lo..=t).filter_map(|j| gains[j][v]).sum();
                    Some(sum / window as f64)
                })
                .collect()
        })
        .collect()
}

/// Scans accuracy rows (epoch 1 first) for the earliest surge epoch.
pub fn detect_in_rows(accuracies: &[Vec<Option<f64>>], params: &DetectionParams) -> CriticalPeriodReport {
    let rows = smoothed(&gain_rows(accuracies), params.window.max(1) as usize);
    for (t, row) in rows.iter().enumerate() {
        let present: Vec<f64> = row.iter().flatten().copied().collect();
        if present.is_empty() {
            continue;
        }
        let surging = present.iter().filter(|&&g| g >= params.threshold).count();
        let share = surging as f64 / present.len() as f64;
        if share >= params.fraction {
            return CriticalPeriodReport {
                cp_epoch: Some(t as u32 + 2),
                surge_fraction: share,
                mean_gain: Some(present.iter().sum::<f64>() / present.len() as f64),
                params: *params,
            };
        }
    }
    CriticalPeriodReport {
        cp_epoch: None,
        surge_fraction: 0.0,
        mean_gain: None,
        params: *params,
    }
}

pub fn detect_critical_period(trace: &TrainingTrace, params: &DetectionParams) -> Result<CriticalPeriodReport> {
    params.validate()?;
    if trace.records.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "critical-period detection needs at least 3 epochs, trace has {}",
            trace.records.len()
        )));
    }
    let rows: Vec<Vec<Option<f64>>> = trace.records.iter().map(|r| r.per_viseme.clone()).collect();
    Ok(detect_in_rows(&rows, params))
}

/// Online form: feed one accuracy row per epoch; reports the critical
/// period as soon as the epoch just pushed qualifies.
#[derive(Debug, Clone)]
pub struct CriticalPeriodStream {
    params: DetectionParams,
    rows: Vec<Vec<Option<f64>>>,
    found: Option<CriticalPeriodReport>,
}

impl CriticalPeriodStream {
    pub fn new(params: DetectionParams) -> CriticalPeriodStream {
        CriticalPeriodStream {
            params,
            rows: Vec::new(),
            found: None,
        }
    }

    pub fn push(&mut self, accuracies: &[Option<f64>]) -> Option<&CriticalPeriodReport> {
        self.rows.push(accuracies.to_vec());
        if self.found.is_none() && self.rows.len() >= 2 {
            let report = detect_in_rows(&self.rows, &self.params);
            if report.cp_epoch.is_some() {
                self.found = Some(report);
            }
        }
        self.found.as_ref()
    }

    pub fn report(&self) -> Option<&CriticalPeriodReport> {
        self.found.as_ref()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionSummary {
    /// Sorted by fraction.
    pub pairs: Vec<(f64, Option<u32>)>,
    /// Detected CP epochs never increase with the fraction.
    pub monotone: bool,
    /// Some fraction had no detected CP.
    pub partial: bool,
}

pub fn cp_vs_data_fraction(reports: &[(f64, CriticalPeriodReport)]) -> Result<FractionSummary> {
    let mut pairs: Vec<(f64, Option<u32>)> = reports.iter().map(|(f, r)| (*f, r.cp_epoch)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let detected: Vec<u32> = pairs.iter().filter_map(|p| p.1).collect();
    if detected.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 fractions with a detected critical period, got {}",
            detected.len()
        )));
    }
    Ok(FractionSummary {
        monotone: detected.windows(2).all(|w| w[1] <= w[0]),
        partial: detected.len() < pairs.len(),
        pairs,
    })
}
