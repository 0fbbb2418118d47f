//! Finds the low-scoring cluster in a planted corpus, explains it and composes a booster set.
//!
//! ```text
//! cargo run -p verse-core --example slice_discovery
//! ```

use verse_core::explain::{cluster_profiles, compose_booster, detect_low_clusters};
use verse_core::pipeline::analyze;
use verse_core::report::SessionReport;
use verse_core::synthetic::{PlantedCorpus, PlantedSpec};
use verse_core::RunConfig;

fn main() -> verse_core::Result<()> {
    let corpus = PlantedCorpus::generate(&PlantedSpec::default())?;
    let config = RunConfig::default();
    let session = analyze(&corpus.embeddings, corpus.records()?, &config)?;

    let report = SessionReport::from_session(&session)?;
    println!("{}", report.diagnostics.table_row());
    println!("global mean score {:.4}", session.global_score.mean);

    for profile in cluster_profiles(&session, config.delta, config.min_size)? {
        let mean = profile.scores.map_or(f64::NAN, |s| s.mean);
        let mark = if profile.flagged { "  <- flagged" } else { "" };
        println!(
            "cluster {} (n={}) mean {mean:.4}{mark}",
            profile.cluster_id, profile.size
        );
        for a in profile.attributions.iter().take(3) {
            println!(
                "    {:<16} score {:>8.3}  coverage {:.2}",
                a.feature, a.score, a.coverage
            );
        }
    }

    let catalog = corpus.catalog()?;
    for cluster in detect_low_clusters(&session, config.delta, config.min_size) {
        let spec = compose_booster(&session, cluster, 2)?.with_matches(&catalog)?;
        println!(
            "booster for cluster {cluster}: {}",
            serde_json::to_string(&spec.predicates)?
        );
        println!(
            "matched {} of {} catalog samples ({} planted)",
            spec.matched_ids.len(),
            catalog.len(),
            corpus.planted_ids.len()
        );
    }
    Ok(())
}
