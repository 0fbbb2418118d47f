//! Serializable reports: the per-model diagnostics row and the per-session
//! cluster report.

use serde::{Deserialize, Serialize};

use crate::clustering::Summary;
use crate::error::{Error, Result};
use crate::explain::{
    cluster_profiles, detect_low_clusters, ClusterAnalysis, ClusterProfile, ScoreStats, Session,
};
use crate::reduction::ReductionQuality;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Reduction quality, cluster structure and verdict for one embedding space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub schema_version: u32,
    pub n: usize,
    pub d: usize,
    pub trustworthiness: f64,
    /// Continuity of the reduction.
    pub proximity: f64,
    pub trust_k: usize,
    pub k: usize,
    pub radius: Summary,
    pub density: Option<Summary>,
    pub silhouette: f64,
    pub threshold: f64,
    pub suitable: bool,
}

impl DiagnosticsReport {
    pub fn new(quality: &ReductionQuality, clusters: &ClusterAnalysis, d: usize) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            n: clusters.model.assignments.len(),
            d,
            trustworthiness: quality.trustworthiness,
            proximity: quality.continuity,
            trust_k: quality.k,
            k: clusters.model.k,
            radius: clusters.diagnostics.radius_summary,
            density: clusters.diagnostics.density_summary,
            silhouette: clusters.verdict.mean_silhouette,
            threshold: clusters.verdict.threshold,
            suitable: clusters.verdict.suitable,
        }
    }

    /// One table row: `trust | prox | k | radius | density | silhouette | verdict`.
    pub fn table_row(&self) -> String {
        table_row(
            self.trustworthiness,
            self.proximity,
            self.k,
            &self.radius,
            self.density.as_ref(),
            self.silhouette,
            self.suitable,
        )
    }
}

pub fn table_row(
    trust: f64,
    proximity: f64,
    k: usize,
    radius: &Summary,
    density: Option<&Summary>,
    silhouette: f64,
    suitable: bool,
) -> String {
    let density = match density {
        Some(s) => format!("{:.0} [{:.0}–{:.0}]", s.mean, s.min, s.max),
        None => "n/a".to_owned(),
    };
    format!(
        "{trust:.2} | {proximity:.2} | {k} | {:.2} [{:.2}–{:.2}] | {density} | {silhouette:.2} | {}",
        radius.mean,
        radius.min,
        radius.max,
        if suitable { "✓" } else { "✗" },
    )
}

/// Everything the explain step produces for one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub schema_version: u32,
    pub diagnostics: DiagnosticsReport,
    pub global_score: ScoreStats,
    pub flagged: Vec<usize>,
    pub profiles: Vec<ClusterProfile>,
}

impl SessionReport {
    pub fn from_session(session: &Session) -> Result<Self> {
        let quality = session
            .quality
            .as_ref()
            .ok_or_else(|| Error::InvalidValue("session carries no reduction quality".into()))?;
        let cfg = &session.config;
        Ok(Self {
            schema_version: REPORT_SCHEMA_VERSION,
            diagnostics: DiagnosticsReport::new(quality, &session.clusters, session.reduced.dim()),
            global_score: session.global_score,
            flagged: detect_low_clusters(session, cfg.delta, cfg.min_size),
            profiles: cluster_profiles(session, cfg.delta, cfg.min_size)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_table_row() {
        let radius = Summary {
            mean: 0.30,
            min: 0.21,
            max: 0.47,
        };
        let density = Summary {
            mean: 243.0,
            min: 69.0,
            max: 476.0,
        };
        assert_eq!(
            table_row(0.96, 0.98, 7, &radius, Some(&density), 0.63, true),
            "0.96 | 0.98 | 7 | 0.30 [0.21–0.47] | 243 [69–476] | 0.63 | ✓"
        );
        assert_eq!(
            table_row(0.93, 0.95, 5, &radius, None, 0.38, false),
            "0.93 | 0.95 | 5 | 0.30 [0.21–0.47] | n/a | 0.38 | ✗"
        );
    }
}
