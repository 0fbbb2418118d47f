#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use verse_core::clustering::{cluster_diagnostics, feasibility_verdict, kmeans_fit};
use verse_core::explain::{build_session, ClusterAnalysis, Session};
use verse_core::reduction::pca_fit;
use verse_core::tensor_io::{read_records_from, EmbeddingMatrix};
use verse_core::RunConfig;

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i:03}")).collect()
}

/// `per` points around each centre with isotropic Gaussian noise; labels in centre order.
pub fn blobs(
    centres: &[Vec<f64>],
    per: usize,
    sigma: f64,
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (c, centre) in centres.iter().enumerate() {
        for _ in 0..per {
            points.push(centre.iter().map(|x| x + noise.sample(&mut rng)).collect());
            labels.push(c);
        }
    }
    (points, labels)
}

/// Session over 2-D points clustered with a fixed k; records come from CSV text.
pub fn session(points: &[Vec<f64>], k: usize, metadata: &str, scores: Option<&str>) -> Session {
    let config = RunConfig::default();
    let matrix = EmbeddingMatrix::from_rows(ids(points.len()), points).unwrap();
    let space = pca_fit(&matrix, 2).unwrap();
    let model = kmeans_fit(&space.coords, k, config.seed).unwrap();
    let diagnostics = cluster_diagnostics(&space.coords, &model).unwrap();
    let verdict = feasibility_verdict(model.mean_silhouette, config.threshold).unwrap();
    let records = read_records_from(metadata.as_bytes(), scores.map(str::as_bytes)).unwrap();
    build_session(
        space,
        ClusterAnalysis {
            model,
            diagnostics,
            verdict,
        },
        records,
        &config,
    )
    .unwrap()
}

/// Cluster index that sample `i` landed in.
pub fn cluster_of(session: &Session, i: usize) -> usize {
    session.assignments()[i]
}

/// Five tight, well separated centres on a circle of radius 10.
pub fn five_centres() -> Vec<Vec<f64>> {
    (0..5)
        .map(|c| {
            let t = c as f64 * std::f64::consts::TAU / 5.0;
            vec![10.0 * t.cos(), 10.0 * t.sin()]
        })
        .collect()
}
