//! K-Means over the reduced space, silhouette-driven model selection and the
//! per-cluster diagnostics behind the feasibility gate.

mod diagnostics;
mod kmeans;
mod silhouette;

pub use diagnostics::{
    ball_volume, cluster_diagnostics, feasibility_verdict, ClusterDiagnostics, FeasibilityVerdict,
    Summary, DEFAULT_THRESHOLD,
};
pub use kmeans::{
    kmeans_fit, kmeans_plus_plus, lloyd, nearest_centroid, select_k, ClusterModel, LloydRun,
    MAX_AUTO_K, MAX_ITERATIONS, RELATIVE_TOLERANCE, RESTARTS, SILHOUETTE_TIE,
};
pub use silhouette::silhouette;
