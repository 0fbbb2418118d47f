//! Fits PCA on validation embeddings, checks neighbourhood preservation and
//! projects a second (training) matrix into the same space.
//!
//! ```text
//! cargo run -p verse-core --example reduce_embeddings
//! ```

use verse_core::reduction::{pca_fit, pca_transform, reduction_quality};
use verse_core::synthetic::{PlantedCorpus, PlantedSpec};

fn main() -> verse_core::Result<()> {
    let validation = PlantedCorpus::generate(&PlantedSpec::default())?.embeddings;
    let training = PlantedCorpus::generate(&PlantedSpec {
        n: 400,
        seed: 12,
        ..Default::default()
    })?
    .embeddings;

    let space = pca_fit(&validation, 2)?;
    println!("explained variance {:?}", space.explained_variance);
    println!("explained ratio    {:?}", space.explained_ratio);

    for k in [5, 10, 20] {
        let q = reduction_quality(&validation, &space.coords, k)?;
        println!(
            "k={k:<3} trustworthiness {:.4}  continuity {:.4}",
            q.trustworthiness, q.continuity
        );
    }

    let projected = pca_transform(&space, &training)?;
    println!(
        "projected {} training samples; first at {:?}",
        projected.len(),
        projected[0]
    );
    Ok(())
}
