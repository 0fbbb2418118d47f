use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::kmeans::ClusterModel;
use super::silhouette::distance;
use crate::error::{Error, Result};

/// Default mean-silhouette threshold for the feasibility gate.
pub const DEFAULT_THRESHOLD: f64 = 0.45;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut count = 0usize;
        let (mut sum, mut min, mut max) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            count += 1;
            sum += v;
            min = min.min(v);
            max = max.max(v);
        }
        (count > 0).then(|| Summary {
            mean: sum / count as f64,
            min,
            max,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterDiagnostics {
    /// Mean member-to-centroid distance per cluster.
    pub radius: Vec<f64>,
    /// Members per unit ball volume at the cluster radius; absent for zero-radius clusters.
    pub density: Vec<Option<f64>>,
    pub radius_summary: Summary,
    pub density_summary: Option<Summary>,
    pub mean_silhouette: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    pub mean_silhouette: f64,
    pub threshold: f64,
    pub suitable: bool,
}

/// Volume of the `d`-dimensional ball of radius `r`.
pub fn ball_volume(d: usize, r: f64) -> f64 {
    // V_0 = 1, V_1 = 2, V_d = V_{d-2} * 2π / d
    let mut unit = if d.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut i = if d.is_multiple_of(2) { 2 } else { 3 };
    while i <= d {
        unit *= 2.0 * PI / i as f64;
        i += 2;
    }
    unit * r.powi(d as i32)
}

pub fn cluster_diagnostics(
    coords: &[Vec<f64>],
    model: &ClusterModel,
) -> Result<ClusterDiagnostics> {
    if model.assignments.len() != coords.len() {
        return Err(Error::DimensionMismatch {
            expected: coords.len(),
            found: model.assignments.len(),
        });
    }
    if model.centroids.len() != model.k || model.assignments.iter().any(|&c| c >= model.k) {
        return Err(Error::BadK(format!(
            "model assignments exceed k = {}",
            model.k
        )));
    }
    let d = coords.first().map_or(0, Vec::len);
    let mut sums = vec![0.0; model.k];
    let mut counts = vec![0usize; model.k];
    for (p, &c) in coords.iter().zip(&model.assignments) {
        sums[c] += distance(p, &model.centroids[c]);
        counts[c] += 1;
    }
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::EmptyCluster(c));
    }

    let mut radius = Vec::with_capacity(model.k);
    let mut density = Vec::with_capacity(model.k);
    for (sum, count) in sums.into_iter().zip(counts) {
        let r = if count > 1 { sum / count as f64 } else { 0.0 };
        radius.push(r);
        density.push((r > 0.0).then(|| count as f64 / ball_volume(d, r)));
    }

    Ok(ClusterDiagnostics {
        radius_summary: Summary::of(radius.iter().copied()).expect("k >= 1"),
        density_summary: Summary::of(density.iter().flatten().copied()),
        radius,
        density,
        mean_silhouette: model.mean_silhouette,
    })
}

/// Suitable when the mean silhouette reaches the threshold (inclusive).
pub fn feasibility_verdict(mean_silhouette: f64, threshold: f64) -> Result<FeasibilityVerdict> {
    if !(threshold > -1.0 && threshold < 1.0) {
        return Err(Error::Config(format!(
            "threshold {threshold} must lie in (-1, 1)"
        )));
    }
    Ok(FeasibilityVerdict {
        mean_silhouette,
        threshold,
        suitable: mean_silhouette >= threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(assignments: Vec<usize>, centroids: Vec<Vec<f64>>) -> ClusterModel {
        ClusterModel {
            k: centroids.len(),
            assignments,
            centroids,
            objective: 0.0,
            per_sample_silhouette: vec![],
            mean_silhouette: 0.0,
            seed: 0,
        }
    }

    #[test]
    fn unit_circle_cluster() {
        let mut pts: Vec<Vec<f64>> = (0..8)
            .map(|i| {
                let t = i as f64 * PI / 4.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
        pts.push(vec![50.0, 50.0]);
        pts.push(vec![50.0, 50.0]);
        let mut a = vec![0; 8];
        a.extend([1, 1]);
        let diag =
            cluster_diagnostics(&pts, &model(a, vec![vec![0.0, 0.0], vec![50.0, 50.0]])).unwrap();
        assert!((diag.radius[0] - 1.0).abs() < 1e-12);
        assert!((diag.density[0].unwrap() - 8.0 / PI).abs() < 1e-12);
        assert_eq!(diag.radius[1], 0.0);
        assert_eq!(diag.density[1], None);
        assert_eq!(diag.density_summary.unwrap().min, diag.density[0].unwrap());
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(ball_volume(1, 2.0), 4.0);
        assert!((ball_volume(2, 1.0) - PI).abs() < 1e-15);
        assert!((ball_volume(3, 1.0) - 4.0 / 3.0 * PI).abs() < 1e-14);
        assert!((ball_volume(4, 1.0) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn verdict_boundary_is_inclusive() {
        assert!(feasibility_verdict(0.45, 0.45).unwrap().suitable);
        assert!(!feasibility_verdict(0.4499, 0.45).unwrap().suitable);
        assert!(feasibility_verdict(0.1, 1.0).is_err());
        assert!(feasibility_verdict(0.1, f64::NAN).is_err());
    }
}
