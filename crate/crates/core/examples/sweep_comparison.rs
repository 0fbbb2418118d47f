//! Compares per-sample scores of several training runs over the validation set
//! and over each flagged cluster.
//!
//! ```text
//! cargo run -p verse-core --example sweep_comparison
//! ```

use verse_core::explain::{detect_low_clusters, sweep_report, Run};
use verse_core::pipeline::analyze;
use verse_core::synthetic::{PlantedCorpus, PlantedSpec};
use verse_core::RunConfig;

fn main() -> verse_core::Result<()> {
    let corpus = PlantedCorpus::generate(&PlantedSpec::default())?;
    let config = RunConfig::default();
    let session = analyze(&corpus.embeddings, corpus.records()?, &config)?;
    let flagged = detect_low_clusters(&session, config.delta, config.min_size);

    let low: Vec<bool> = session
        .assignments()
        .iter()
        .map(|c| flagged.contains(c))
        .collect();
    let scored = |lift_low: f64, lift_rest: f64| -> Vec<(String, f64)> {
        session
            .records
            .iter()
            .zip(&low)
            .map(|(r, &low)| {
                let s = r.score.unwrap_or(0.0) + if low { lift_low } else { lift_rest };
                (r.sample_id.clone(), s.clamp(0.0, 1.0))
            })
            .collect()
    };
    let runs = vec![
        Run::new("base", scored(0.0, 0.0)),
        Run::new("zoom", scored(0.10, 0.02)),
        Run::new("booster", scored(0.25, 0.03)),
    ];
    let report = sweep_report(&runs, &session, &flagged, "base")?;
    print!("{}", report.render());
    Ok(())
}
