//! Score overlays, low-cluster detection, feature attribution, booster specs
//! and multi-run sweep comparison on top of a clustered reduced space.

mod attribution;
mod booster;
mod session;
mod sweep;

pub use attribution::{
    attribute_features, cluster_profiles, detect_low_clusters, Attribution, Characterization,
    ClusterProfile, COVERAGE_FLOOR, POOLED_SD_FLOOR,
};
pub use booster::{compose_booster, match_booster, BoosterSpec, Predicate};
pub use session::{build_session, ClusterAnalysis, ScoreStats, Session, SESSION_SCHEMA_VERSION};
pub use sweep::{region_name, render_delta, sweep_regions, sweep_report, Region, Run, SweepReport};
