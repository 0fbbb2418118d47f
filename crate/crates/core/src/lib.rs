//! Reduced-embedding-space analysis for document-understanding models.
//!
//! Pool per-image patch grids into embeddings, reduce them with PCA, check that
//! the reduction keeps neighbourhoods intact, cluster the reduced space, overlay
//! per-sample scores and metadata, and explain low-scoring clusters with ranked
//! feature attributions and booster-set predicates.

pub mod clustering;
pub mod config;
pub mod error;
pub mod explain;
pub mod pipeline;
pub mod reduction;
pub mod report;
pub mod synthetic;
pub mod tensor_io;

pub use config::RunConfig;
pub use error::{Error, FormatError, Result};
