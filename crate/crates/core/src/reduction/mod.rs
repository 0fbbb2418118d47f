//! PCA into the reduced embedding space and neighbourhood-preservation metrics.

mod pca;
mod quality;

pub use pca::{pca_fit, pca_fit_rows, pca_transform, ReducedSpace};
pub use quality::{
    continuity, reduction_quality, reduction_quality_rows, trustworthiness, ReductionQuality,
};
