//! The end-to-end steps shared by the command line and the service.

use serde::{Deserialize, Serialize};

use crate::clustering::{cluster_diagnostics, feasibility_verdict, select_k, MAX_AUTO_K};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::explain::{build_session, ClusterAnalysis, Session};
use crate::reduction::{pca_fit, pca_transform, reduction_quality, ReducedSpace, ReductionQuality};
use crate::report::DiagnosticsReport;
use crate::tensor_io::{EmbeddingMatrix, RecordSet};

/// Coordinates of samples projected into an existing reduced space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub ids: Vec<String>,
    pub coords: Vec<Vec<f64>>,
}

/// A fitted reduced space with its quality and optional extra projections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub space: ReducedSpace,
    pub quality: ReductionQuality,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projected: Option<Projection>,
}

pub fn reduce(matrix: &EmbeddingMatrix, config: &RunConfig) -> Result<Reduction> {
    config.validate()?;
    let space = pca_fit(matrix, config.d)?;
    let quality = reduction_quality(matrix, &space.coords, config.trust_k)?;
    Ok(Reduction {
        space,
        quality,
        projected: None,
    })
}

/// Projects further samples (typically training data) into a fitted space.
pub fn project(space: &ReducedSpace, matrix: &EmbeddingMatrix) -> Result<Projection> {
    Ok(Projection {
        ids: matrix.ids().to_vec(),
        coords: pca_transform(space, matrix)?,
    })
}

/// Selects k over the configured range, clamped to `n - 1`, and computes diagnostics.
pub fn cluster(space: &ReducedSpace, config: &RunConfig) -> Result<ClusterAnalysis> {
    config.validate()?;
    let n = space.coords.len();
    let k_max = config.k_max.min(n.saturating_sub(1)).min(MAX_AUTO_K);
    if k_max < config.k_min {
        return Err(Error::BadK(format!(
            "{n} samples leave no valid k in {}..={}",
            config.k_min, config.k_max
        )));
    }
    let (_, model) = select_k(&space.coords, config.k_min..=k_max, config.seed)?;
    let diagnostics = cluster_diagnostics(&space.coords, &model)?;
    let verdict = feasibility_verdict(model.mean_silhouette, config.threshold)?;
    Ok(ClusterAnalysis {
        model,
        diagnostics,
        verdict,
    })
}

pub fn diagnose(matrix: &EmbeddingMatrix, config: &RunConfig) -> Result<DiagnosticsReport> {
    let reduction = reduce(matrix, config)?;
    let clusters = cluster(&reduction.space, config)?;
    Ok(DiagnosticsReport::new(
        &reduction.quality,
        &clusters,
        config.d,
    ))
}

/// Reduce, cluster and join records into a session.
pub fn analyze(
    matrix: &EmbeddingMatrix,
    records: RecordSet,
    config: &RunConfig,
) -> Result<Session> {
    let Reduction { space, quality, .. } = reduce(matrix, config)?;
    let clusters = cluster(&space, config)?;
    Ok(build_session(space, clusters, records, config)?.with_quality(quality))
}
