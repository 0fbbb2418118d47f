//! Streams a patch-grid file, average-pools every image and writes the embedding file.
//!
//! ```text
//! cargo run -p verse-core --example pool_patch_grids [OUT_DIR]
//! ```

use verse_core::synthetic::{PlantedCorpus, PlantedSpec};
use verse_core::tensor_io::{read_embeddings, read_patch_grids, write_embeddings, EmbeddingMatrix};

fn main() -> verse_core::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("verse-pool"), Into::into);
    let corpus = PlantedCorpus::generate(&PlantedSpec {
        n: 12,
        dim: 16,
        ..Default::default()
    })?;
    let files = corpus.write_to(&dir)?;

    let reader = read_patch_grids(&files.grids)?;
    println!("{} images in {}", reader.remaining(), files.grids.display());
    let pooled = EmbeddingMatrix::from_patch_grids(reader)?;

    let out = dir.join("pooled.vemb");
    write_embeddings(&pooled, &out)?;
    let back = read_embeddings(&out)?;
    println!(
        "wrote {} x {} embeddings to {}",
        back.len(),
        back.dim(),
        out.display()
    );
    println!("first row: {:?}", &back.row(0)[..4]);
    assert_eq!(back, pooled);
    Ok(())
}
