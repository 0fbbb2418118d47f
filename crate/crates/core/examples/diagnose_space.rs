//! Picks k by silhouette, computes radius and density per cluster and applies the
//! feasibility gate to a well-structured and a structureless embedding space.
//!
//! ```text
//! cargo run -p verse-core --example diagnose_space
//! ```

use verse_core::pipeline::diagnose;
use verse_core::synthetic::{PlantedCorpus, PlantedSpec};
use verse_core::RunConfig;

fn main() -> verse_core::Result<()> {
    let config = RunConfig::default();
    println!("trust | prox | k | radius | density | silhouette | verdict");
    for (label, separation) in [("structured", 6.0), ("blurred", 0.4)] {
        let corpus = PlantedCorpus::generate(&PlantedSpec {
            separation,
            ..Default::default()
        })?;
        let report = diagnose(&corpus.embeddings, &config)?;
        println!("{label:<10} {}", report.table_row());
    }
    Ok(())
}
