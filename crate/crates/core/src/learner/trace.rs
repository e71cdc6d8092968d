use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::viseme::inventory_hash;

use super::protocol::Protocol;
use super::train::TrainingConfig;

pub const TRACE_MAGIC: &str = "#pptrace1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based, contiguous across phases.
    pub epoch: u32,
    pub phase: u8,
    pub overall: f64,
    /// Inventory order; `None` where the test set has no frames of a viseme.
    pub per_viseme: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTrace {
    pub protocol: Protocol,
    pub config: TrainingConfig,
    /// Rendered labels in inventory order.
    pub inventory: Vec<String>,
    pub records: Vec<EpochRecord>,
    pub params_digest: String,
    /// Free-form provenance (resolved run config and the like).
    pub metadata: Option<serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    protocol: Protocol,
    config: TrainingConfig,
    inventory: Vec<String>,
    inventory_hash: String,
    params_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<serde_json::Value>,
}

fn format_error(message: impl Into<String>) -> Error {
    Error::Format {
        what: "trace",
        message: message.into(),
    }
}

impl TrainingTrace {
    pub fn inventory_hash(&self) -> u64 {
        inventory_hash(&self.inventory)
    }

    pub fn inventory_hash_hex(&self) -> String {
        format!("{:016x}", self.inventory_hash())
    }

    pub fn epochs(&self) -> usize {
        self.records.len()
    }

    pub fn overall_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.overall).collect()
    }

    pub fn phase_records(&self, phase: u8) -> impl Iterator<Item = &EpochRecord> {
        self.records.iter().filter(move |r| r.phase == phase)
    }

    /// First epoch of phase 2, if the trace has one.
    pub fn switch_epoch(&self) -> Option<u32> {
        self.phase_records(2).next().map(|r| r.epoch)
    }

    /// Checks contiguity, phase order, value ranges and row widths.
    pub fn validate(&self) -> Result<()> {
        let mut last_phase = 0u8;
        for (i, r) in self.records.iter().enumerate() {
            if r.epoch as usize != i + 1 {
                return Err(format_error(format!(
                    "epoch {} at position {} (epochs must run 1, 2, ...)",
                    r.epoch,
                    i + 1
                )));
            }
            if r.phase < last_phase || !(1..=2).contains(&r.phase) {
                return Err(format_error(format!("bad phase marker {} at epoch {}", r.phase, r.epoch)));
            }
            last_phase = r.phase;
            if r.per_viseme.len() != self.inventory.len() {
                return Err(format_error(format!(
                    "epoch {} has {} accuracies for {} visemes",
                    r.epoch,
                    r.per_viseme.len(),
                    self.inventory.len()
                )));
            }
            let in_range = |v: f64| (0.0..=1.0).contains(&v);
            if !in_range(r.overall) || r.per_viseme.iter().flatten().any(|&v| !in_range(v)) {
                return Err(format_error(format!("accuracy outside [0, 1] at epoch {}", r.epoch)));
            }
        }
        Ok(())
    }

    /// Header line, then `epoch<TAB>phase<TAB>overall<TAB>acc,acc,-,...`.
    pub fn to_text(&self) -> String {
        let header = Header {
            protocol: self.protocol.clone(),
            config: self.config.clone(),
            inventory: self.inventory.clone(),
            inventory_hash: self.inventory_hash_hex(),
            params_digest: self.params_digest.clone(),
            metadata: self.metadata.clone(),
        };
        let mut out = format!(
            "{TRACE_MAGIC} {}\n",
            serde_json::to_string(&header).expect("trace header serializes")
        );
        for r in &self.records {
            let cells: Vec<String> = r
                .per_viseme
                .iter()
                .map(|v| v.map_or_else(|| "-".to_string(), |a| a.to_string()))
                .collect();
            writeln!(out, "{}\t{}\t{}\t{}", r.epoch, r.phase, r.overall, cells.join(","))
                .expect("writing to a String");
        }
        out
    }

    pub fn parse(text: &str) -> Result<TrainingTrace> {
        let mut lines = text.lines();
        let first = lines.next().ok_or_else(|| format_error("empty file"))?;
        let json = first
            .strip_prefix(TRACE_MAGIC)
            .ok_or_else(|| format_error(format!("first line must start with {TRACE_MAGIC}")))?;
        let header: Header =
            serde_json::from_str(json.trim()).map_err(|e| format_error(format!("header: {e}")))?;
        let computed = format!("{:016x}", inventory_hash(&header.inventory));
        if computed != header.inventory_hash {
            return Err(format_error(format!(
                "inventory hash {} does not match its labels ({computed})",
                header.inventory_hash
            )));
        }
        let mut records = Vec::new();
        for (n, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let line_no = n + 2;
            let fields: Vec<&str> = line.split('\t').collect();
            let [epoch, phase, overall, cells] = fields[..] else {
                return Err(format_error(format!("line {line_no}: expected 4 tab-separated fields")));
            };
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| format_error(format!("line {line_no}: bad number `{s}`")))
            };
            let per_viseme = if cells.is_empty() {
                Vec::new()
            } else {
                cells
                    .split(',')
                    .map(|c| if c == "-" { Ok(None) } else { num(c).map(Some) })
                    .collect::<Result<Vec<_>>>()?
            };
            records.push(EpochRecord {
                epoch: epoch
                    .parse()
                    .map_err(|_| format_error(format!("line {line_no}: bad epoch `{epoch}`")))?,
                phase: phase
                    .parse()
                    .map_err(|_| format_error(format!("line {line_no}: bad phase `{phase}`")))?,
                overall: num(overall)?,
                per_viseme,
            });
        }
        let trace = TrainingTrace {
            protocol: header.protocol,
            config: header.config,
            inventory: header.inventory,
            records,
            params_digest: header.params_digest,
            metadata: header.metadata,
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::file(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TrainingTrace> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        TrainingTrace::parse(&text)
    }
}

/// True once the last `patience` epochs form a plateau: each successive
/// overall-accuracy gain among them is below `epsilon`. Needs at least
/// `patience + 1` epochs.
pub fn detect_convergence_online(overall: &[f64], epsilon: f64, patience: u32) -> bool {
    let k = patience as usize;
    if k == 0 || overall.len() < k + 1 {
        return false;
    }
    overall[overall.len() - k..]
        .windows(2)
        .all(|w| w[1] - w[0] < epsilon)
}
