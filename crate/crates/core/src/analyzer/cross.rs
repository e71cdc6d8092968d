use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{ProtocolKind, TrainingTrace};
use crate::viseme::{inventory_hash, LanguageId, VisemeClass, VisemeLabel};

/// The four bar families of one viseme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisemeBars {
    pub label: String,
    pub class: VisemeClass,
    pub mono_mandarin: Option<f64>,
    pub mono_english: Option<f64>,
    pub at_cp: Option<f64>,
    pub at_convergence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub class: VisemeClass,
    /// Visemes with both sequential accuracies.
    pub visemes: usize,
    pub at_cp: Option<f64>,
    pub at_convergence: Option<f64>,
    /// `at_cp - at_convergence`.
    pub drop: Option<f64>,
    pub mono_english: Option<f64>,
    pub mono_mandarin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossInferenceReport {
    pub visemes: Vec<VisemeBars>,
    pub classes: Vec<ClassSummary>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn final_phase2(trace: &TrainingTrace) -> Result<&[Option<f64>]> {
    trace
        .phase_records(2)
        .last()
        .map(|r| r.per_viseme.as_slice())
        .ok_or_else(|| Error::InsufficientData("sequential trace has no phase-2 epochs".into()))
}

fn check_inventory(trace: &TrainingTrace, inventory: &[String]) -> Result<()> {
    if trace.inventory != inventory {
        return Err(Error::Incompatible {
            expected: format!("{:016x}", inventory_hash(inventory)),
            found: trace.inventory_hash_hex(),
        });
    }
    Ok(())
}

impl CrossInferenceReport {
    /// Unweighted class means over the per-viseme rows.
    pub fn from_visemes(visemes: Vec<VisemeBars>) -> CrossInferenceReport {
        let classes = VisemeClass::ALL
            .iter()
            .map(|&class| {
                let rows: Vec<&VisemeBars> = visemes.iter().filter(|v| v.class == class).collect();
                let paired: Vec<(f64, f64)> = rows
                    .iter()
                    .filter_map(|v| Some((v.at_cp?, v.at_convergence?)))
                    .collect();
                let at_cp = mean(paired.iter().map(|p| p.0));
                let at_convergence = mean(paired.iter().map(|p| p.1));
                ClassSummary {
                    class,
                    visemes: paired.len(),
                    drop: mean(paired.iter().map(|p| p.0 - p.1)),
                    at_cp,
                    at_convergence,
                    mono_english: mean(rows.iter().filter_map(|v| v.mono_english)),
                    mono_mandarin: mean(rows.iter().filter_map(|v| v.mono_mandarin)),
                }
            })
            .collect();
        CrossInferenceReport { visemes, classes }
    }

    pub fn class(&self, class: VisemeClass) -> &ClassSummary {
        self.classes
            .iter()
            .find(|c| c.class == class)
            .expect("every class has a summary")
    }

    /// Averages reports over the same inventory (e.g. both L1 directions),
    /// viseme by viseme, using whichever reports have a value.
    pub fn combine(reports: &[CrossInferenceReport]) -> Result<CrossInferenceReport> {
        let first = reports
            .first()
            .ok_or_else(|| Error::EmptyInput("no reports to combine".into()))?;
        let labels: Vec<&str> = first.visemes.iter().map(|v| v.label.as_str()).collect();
        for r in reports {
            let other: Vec<&str> = r.visemes.iter().map(|v| v.label.as_str()).collect();
            if other != labels {
                return Err(Error::Incompatible {
                    expected: labels.join(","),
                    found: other.join(","),
                });
            }
        }
        let visemes = first
            .visemes
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let avg = |get: fn(&VisemeBars) -> Option<f64>| mean(reports.iter().filter_map(|r| get(&r.visemes[i])));
                VisemeBars {
                    label: v.label.clone(),
                    class: v.class,
                    mono_mandarin: avg(|b| b.mono_mandarin),
                    mono_english: avg(|b| b.mono_english),
                    at_cp: avg(|b| b.at_cp),
                    at_convergence: avg(|b| b.at_convergence),
                }
            })
            .collect();
        Ok(CrossInferenceReport::from_visemes(visemes))
    }

    /// One tab-separated record per class, `-` for missing values.
    pub fn to_text(&self) -> String {
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"));
        let mut out = String::from("class\tvisemes\tat_cp\tat_convergence\tdrop\tmono_english\tmono_mandarin\n");
        for c in &self.classes {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                c.class.name(),
                c.visemes,
                cell(c.at_cp),
                cell(c.at_convergence),
                cell(c.drop),
                cell(c.mono_english),
                cell(c.mono_mandarin)
            )
            .expect("writing to a String");
        }
        out
    }
}

/// Compares final phase-2 per-viseme accuracies of a switch-at-CP and a
/// switch-at-convergence run over the merged `inventory`, attaching the
/// final accuracies of any monolingual reference traces.
pub fn cross_inference_compare(
    trace_cp: &TrainingTrace,
    trace_conv: &TrainingTrace,
    mono_refs: &[&TrainingTrace],
    inventory: &[String],
) -> Result<CrossInferenceReport> {
    check_inventory(trace_cp, inventory)?;
    check_inventory(trace_conv, inventory)?;
    let cp = final_phase2(trace_cp)?;
    let conv = final_phase2(trace_conv)?;

    let mut visemes: Vec<VisemeBars> = inventory
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let class = VisemeLabel::parse_rendered(label)
                .map(|l| l.class)
                .ok_or_else(|| Error::UnknownViseme(label.clone()))?;
            Ok(VisemeBars {
                label: label.clone(),
                class,
                mono_mandarin: None,
                mono_english: None,
                at_cp: cp[i],
                at_convergence: conv[i],
            })
        })
        .collect::<Result<_>>()?;

    for reference in mono_refs {
        let ProtocolKind::Monolingual { language } = reference.protocol.kind else {
            return Err(Error::Config(format!(
                "reference trace `{}` is not monolingual",
                reference.protocol.family()
            )));
        };
        let last = reference
            .records
            .last()
            .ok_or_else(|| Error::InsufficientData("reference trace has no epochs".into()))?;
        for (j, label) in reference.inventory.iter().enumerate() {
            let row = visemes
                .iter_mut()
                .find(|v| &v.label == label)
                .ok_or_else(|| Error::Incompatible {
                    expected: format!("{:016x}", inventory_hash(inventory)),
                    found: reference.inventory_hash_hex(),
                })?;
            match language {
                LanguageId::English => row.mono_english = last.per_viseme[j],
                LanguageId::Mandarin => row.mono_mandarin = last.per_viseme[j],
            }
        }
    }
    Ok(CrossInferenceReport::from_visemes(visemes))
}
