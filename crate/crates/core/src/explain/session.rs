use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::clustering::{ClusterDiagnostics, ClusterModel, FeasibilityVerdict};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::reduction::{ReducedSpace, ReductionQuality};
use crate::tensor_io::{FeatureColumn, RecordSet, SampleRecord};

pub const SESSION_SCHEMA_VERSION: u32 = 1;

/// The clustering half of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAnalysis {
    pub model: ClusterModel,
    pub diagnostics: ClusterDiagnostics,
    pub verdict: FeasibilityVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreStats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl ScoreStats {
    pub fn of(scores: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut count = 0;
        let (mut sum, mut min, mut max) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
        for s in scores {
            count += 1;
            sum += s;
            min = min.min(s);
            max = max.max(s);
        }
        (count > 0).then(|| ScoreStats {
            count,
            mean: sum / count as f64,
            min,
            max,
        })
    }
}

/// Reduced space, clusters and joined metadata for one model's validation set.
///
/// `records[i]` belongs to `reduced.source_ids[i]`. Sessions are immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub schema_version: u32,
    pub config: RunConfig,
    pub reduced: ReducedSpace,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality: Option<ReductionQuality>,
    pub clusters: ClusterAnalysis,
    pub columns: Vec<FeatureColumn>,
    pub records: Vec<SampleRecord>,
    /// Score statistics per cluster over its scored members.
    pub cluster_scores: Vec<Option<ScoreStats>>,
    pub global_score: ScoreStats,
}

/// Joins records onto the clustered space by exact sample id.
pub fn build_session(
    reduced: ReducedSpace,
    clusters: ClusterAnalysis,
    records: RecordSet,
    config: &RunConfig,
) -> Result<Session> {
    let n = reduced.source_ids.len();
    if clusters.model.assignments.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: clusters.model.assignments.len(),
        });
    }

    let mut by_id: HashMap<String, SampleRecord> = HashMap::with_capacity(records.len());
    for r in records.records {
        if by_id.contains_key(&r.sample_id) {
            return Err(Error::DuplicateId(r.sample_id));
        }
        by_id.insert(r.sample_id.clone(), r);
    }
    let missing_records: Vec<String> = reduced
        .source_ids
        .iter()
        .filter(|id| !by_id.contains_key(*id))
        .cloned()
        .collect();
    let embedded: std::collections::HashSet<&str> =
        reduced.source_ids.iter().map(String::as_str).collect();
    let mut orphan_records: Vec<String> = by_id
        .keys()
        .filter(|id| !embedded.contains(id.as_str()))
        .cloned()
        .collect();
    orphan_records.sort();
    if !missing_records.is_empty() || !orphan_records.is_empty() {
        return Err(Error::JoinMismatch {
            missing_records,
            orphan_records,
        });
    }
    let aligned: Vec<SampleRecord> = reduced
        .source_ids
        .iter()
        .map(|id| by_id.remove(id).expect("join checked"))
        .collect();

    let global_score =
        ScoreStats::of(aligned.iter().filter_map(|r| r.score)).ok_or(Error::ScoreMissing)?;
    let cluster_scores = (0..clusters.model.k)
        .map(|c| ScoreStats::of(clusters.model.members(c).filter_map(|i| aligned[i].score)))
        .collect();

    Ok(Session {
        schema_version: SESSION_SCHEMA_VERSION,
        config: config.clone(),
        reduced,
        quality: None,
        clusters,
        columns: records.columns,
        records: aligned,
        cluster_scores,
        global_score,
    })
}

impl Session {
    pub fn with_quality(mut self, quality: ReductionQuality) -> Self {
        self.quality = Some(quality);
        self
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn k(&self) -> usize {
        self.clusters.model.k
    }

    pub fn ids(&self) -> &[String] {
        &self.reduced.source_ids
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.reduced.coords
    }

    pub fn assignments(&self) -> &[usize] {
        &self.clusters.model.assignments
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.clusters.model.members(cluster).collect()
    }

    pub fn column(&self, name: &str) -> Option<&FeatureColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Checks the structural invariants that a deserialized session must satisfy.
    pub fn validate(&self) -> Result<()> {
        let n = self.reduced.source_ids.len();
        if self.schema_version != SESSION_SCHEMA_VERSION {
            return Err(Error::InvalidValue(format!(
                "unsupported session schema version {}",
                self.schema_version
            )));
        }
        if self.records.len() != n
            || self.clusters.model.assignments.len() != n
            || self.reduced.coords.len() != n
        {
            return Err(Error::InvalidValue(
                "session arrays disagree on sample count".into(),
            ));
        }
        for (r, id) in self.records.iter().zip(&self.reduced.source_ids) {
            if &r.sample_id != id {
                return Err(Error::InvalidValue(format!(
                    "record `{}` is out of line with embedding `{id}`",
                    r.sample_id
                )));
            }
        }
        if self
            .clusters
            .model
            .assignments
            .iter()
            .any(|&c| c >= self.k())
            || self.cluster_scores.len() != self.k()
        {
            return Err(Error::InvalidValue("cluster labels exceed k".into()));
        }
        self.config.validate()
    }
}
