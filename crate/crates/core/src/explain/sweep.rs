use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::session::Session;
use crate::error::{Error, Result};
use crate::tensor_io::read_scores_from;

/// Per-sample scores of one training run evaluated on the validation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub label: String,
    pub scores: HashMap<String, f64>,
}

impl Run {
    pub fn new(label: impl Into<String>, scores: impl IntoIterator<Item = (String, f64)>) -> Self {
        Self {
            label: label.into(),
            scores: scores.into_iter().collect(),
        }
    }

    /// Reads a `sample_id,f1` CSV.
    pub fn from_csv<R: Read>(label: impl Into<String>, reader: R) -> Result<Self> {
        Ok(Self::new(label, read_scores_from(reader)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub ids: Vec<String>,
}

/// Region × run mean scores with deltas against a baseline run.
///
/// Values are stored at full precision; rounding only happens in [`SweepReport::render`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub runs: Vec<String>,
    pub baseline: String,
    pub regions: Vec<Region>,
    /// `matrix[region][run]`
    pub matrix: Vec<Vec<f64>>,
    /// `deltas[region][run] = matrix[region][run] - matrix[region][baseline]`
    pub deltas: Vec<Vec<f64>>,
}

pub fn region_name(cluster: usize) -> String {
    format!("cluster-{cluster}")
}

/// Builds the validation region plus one region per flagged cluster.
pub fn sweep_regions(session: &Session, flagged: &[usize]) -> Vec<Region> {
    let ids = session.ids();
    let mut regions = vec![Region {
        name: "validation".into(),
        ids: ids.to_vec(),
    }];
    for &c in flagged {
        regions.push(Region {
            name: region_name(c),
            ids: session
                .members(c)
                .into_iter()
                .map(|i| ids[i].clone())
                .collect(),
        });
    }
    regions
}

pub fn sweep_report(
    runs: &[Run],
    session: &Session,
    flagged: &[usize],
    baseline_label: &str,
) -> Result<SweepReport> {
    let base = runs
        .iter()
        .position(|r| r.label == baseline_label)
        .ok_or_else(|| Error::UnknownBaseline(baseline_label.to_owned()))?;
    for run in runs {
        let missing: Vec<String> = session
            .ids()
            .iter()
            .filter(|id| !run.scores.contains_key(*id))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingRunScores {
                run: run.label.clone(),
                missing,
            });
        }
    }

    let regions = sweep_regions(session, flagged);
    let matrix: Vec<Vec<f64>> = regions
        .iter()
        .map(|region| {
            runs.iter()
                .map(|run| {
                    let sum: f64 = region.ids.iter().map(|id| run.scores[id]).sum();
                    sum / region.ids.len() as f64
                })
                .collect()
        })
        .collect();
    let deltas = matrix
        .iter()
        .map(|row| row.iter().map(|v| v - row[base]).collect())
        .collect();

    Ok(SweepReport {
        runs: runs.iter().map(|r| r.label.clone()).collect(),
        baseline: baseline_label.to_owned(),
        regions,
        matrix,
        deltas,
    })
}

/// Two-decimal signed delta, e.g. `+0.09`.
pub fn render_delta(delta: f64) -> String {
    format!("{delta:+.2}")
}

impl SweepReport {
    pub fn delta(&self, region: &str, run: &str) -> Option<f64> {
        let r = self.regions.iter().position(|x| x.name == region)?;
        let c = self.runs.iter().position(|x| x == run)?;
        Some(self.deltas[r][c])
    }

    /// Plain-text table: each cell is the mean score followed by its delta.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<14}", "region");
        for run in &self.runs {
            let _ = write!(out, " {run:>16}");
        }
        out.push('\n');
        for (r, region) in self.regions.iter().enumerate() {
            let _ = write!(out, "{:<14}", region.name);
            for (c, run) in self.runs.iter().enumerate() {
                let cell = if *run == self.baseline {
                    format!("{:.4}", self.matrix[r][c])
                } else {
                    format!(
                        "{:.4} ({})",
                        self.matrix[r][c],
                        render_delta(self.deltas[r][c])
                    )
                };
                let _ = write!(out, " {cell:>16}");
            }
            out.push('\n');
        }
        out
    }
}
