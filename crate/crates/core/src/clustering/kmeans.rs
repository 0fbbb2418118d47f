use std::collections::HashSet;
use std::ops::RangeInclusive;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::silhouette::silhouette;
use crate::error::{Error, Result};

pub const RESTARTS: usize = 10;
pub const MAX_ITERATIONS: usize = 300;
pub const RELATIVE_TOLERANCE: f64 = 1e-6;
/// Largest cluster count considered by [`select_k`].
pub const MAX_AUTO_K: usize = 10;
/// Mean-silhouette differences below this count as ties in [`select_k`].
pub const SILHOUETTE_TIE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Total within-cluster sum of squared distances.
    pub objective: f64,
    pub per_sample_silhouette: Vec<f64>,
    pub mean_silhouette: f64,
    pub seed: u64,
}

impl ClusterModel {
    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignments
            .iter()
            .enumerate()
            .filter(move |(_, &c)| c == cluster)
            .map(|(i, _)| i)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignments {
            sizes[c] += 1;
        }
        sizes
    }
}

/// Outcome of one Lloyd run from a fixed initialisation.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydRun {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub objective: f64,
    /// Objective after every assignment step; non-increasing.
    pub trace: Vec<f64>,
}

/// K-Means with k-means++ seeding, keeping the best of [`RESTARTS`] runs.
///
/// Restart seeds are drawn from a ChaCha stream keyed by `seed`; the winner is the
/// lowest objective, earlier restart on ties.
pub fn kmeans_fit(coords: &[Vec<f64>], k: usize, seed: u64) -> Result<ClusterModel> {
    validate(coords, k)?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<LloydRun> = None;
    for _ in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(master.next_u64());
        let init = kmeans_plus_plus(coords, k, &mut rng);
        let run = lloyd(coords, init)?;
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    let (per_sample_silhouette, mean_silhouette) = silhouette(coords, &best.assignments)?;
    Ok(ClusterModel {
        k,
        assignments: best.assignments,
        centroids: best.centroids,
        objective: best.objective,
        per_sample_silhouette,
        mean_silhouette,
        seed,
    })
}

/// Fits every k in `k_range` and keeps the one with the highest mean silhouette.
///
/// Ties within [`SILHOUETTE_TIE`] resolve to the smaller k.
pub fn select_k(
    coords: &[Vec<f64>],
    k_range: RangeInclusive<usize>,
    seed: u64,
) -> Result<(usize, ClusterModel)> {
    let n = coords.len();
    let upper = MAX_AUTO_K.min(n.saturating_sub(1));
    if k_range.is_empty() || *k_range.start() < 2 || *k_range.end() > upper {
        return Err(Error::BadK(format!(
            "k range {}..={} must be non-empty within 2..={upper}",
            k_range.start(),
            k_range.end()
        )));
    }
    let mut best: Option<ClusterModel> = None;
    for k in k_range {
        let model = kmeans_fit(coords, k, seed)?;
        if best
            .as_ref()
            .is_none_or(|b| model.mean_silhouette > b.mean_silhouette + SILHOUETTE_TIE)
        {
            best = Some(model);
        }
    }
    let best = best.expect("non-empty range");
    Ok((best.k, best))
}

fn validate(coords: &[Vec<f64>], k: usize) -> Result<()> {
    let n = coords.len();
    if k < 2 || k > n {
        return Err(Error::BadK(format!(
            "k = {k} must satisfy 2 <= k <= n = {n}"
        )));
    }
    let d = coords[0].len();
    for (i, p) in coords.iter().enumerate() {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("coordinate row {i}")));
        }
    }
    let distinct: HashSet<Vec<u64>> = coords
        .iter()
        .map(|p| p.iter().map(|v| (v + 0.0).to_bits()).collect())
        .collect();
    if distinct.len() < k {
        return Err(Error::DegenerateInput(format!(
            "{} distinct points cannot form {k} clusters",
            distinct.len()
        )));
    }
    Ok(())
}

/// k-means++ seeding: first centre uniform, then proportional to squared distance.
pub fn kmeans_plus_plus<R: Rng>(coords: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = coords.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(coords[rng.random_range(0..n)].clone());
    let mut nearest: Vec<f64> = coords.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, w) in nearest.iter().enumerate() {
                acc += w;
                if *w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `acc` just short of `target`; fall back to the last candidate.
            pick.unwrap_or_else(|| nearest.iter().rposition(|&w| w > 0.0).expect("total > 0"))
        } else {
            rng.random_range(0..n)
        };
        let c = coords[pick].clone();
        for (w, p) in nearest.iter_mut().zip(coords) {
            *w = w.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Lloyd iterations from the given centroids until the objective stalls.
pub fn lloyd(coords: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> Result<LloydRun> {
    let k = centroids.len();
    let mut trace = Vec::new();
    let mut prev_assign: Option<Vec<usize>> = None;
    let (mut assignments, mut objective);
    let mut iteration = 0;
    loop {
        assignments = assign(coords, &centroids);
        fill_empty_clusters(coords, &mut centroids, &mut assignments)?;
        objective = sse(coords, &centroids, &assignments);
        let stalled = trace.last().is_some_and(|&prev: &f64| {
            prev == 0.0 || (prev - objective) < RELATIVE_TOLERANCE * prev
        });
        trace.push(objective);
        iteration += 1;
        if stalled || prev_assign.as_ref() == Some(&assignments) || iteration >= MAX_ITERATIONS {
            break;
        }
        centroids = means(coords, &assignments, k, &centroids);
        prev_assign = Some(assignments);
    }
    Ok(LloydRun {
        assignments,
        centroids,
        objective,
        trace,
    })
}

/// Index of the nearest centroid, lowest index on ties.
pub fn nearest_centroid(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

fn assign(coords: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    coords
        .iter()
        .map(|p| nearest_centroid(p, centroids))
        .collect()
}

/// Moves the centroid of each empty cluster onto the point farthest from its own centroid.
fn fill_empty_clusters(
    coords: &[Vec<f64>],
    centroids: &mut [Vec<f64>],
    assignments: &mut Vec<usize>,
) -> Result<()> {
    let k = centroids.len();
    for _ in 0..=coords.len() {
        let mut sizes = vec![0usize; k];
        for &c in assignments.iter() {
            sizes[c] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return Ok(());
        };
        let mut far = None;
        let mut far_d = 0.0;
        for (i, p) in coords.iter().enumerate() {
            let c = assignments[i];
            let d = sq_dist(p, &centroids[c]);
            if sizes[c] > 1 && d > far_d {
                far = Some(i);
                far_d = d;
            }
        }
        let far =
            far.ok_or_else(|| Error::DegenerateInput("cannot populate an empty cluster".into()))?;
        centroids[empty] = coords[far].clone();
        *assignments = assign(coords, centroids);
    }
    Err(Error::DegenerateInput(
        "empty clusters keep reappearing".into(),
    ))
}

fn means(
    coords: &[Vec<f64>],
    assignments: &[usize],
    k: usize,
    previous: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let d = coords[0].len();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in coords.iter().zip(assignments) {
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(p) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .zip(previous)
        .map(|((mut s, n), prev)| {
            if n == 0 {
                return prev.clone();
            }
            for v in &mut s {
                *v /= n as f64;
            }
            s
        })
        .collect()
}

fn sse(coords: &[Vec<f64>], centroids: &[Vec<f64>], assignments: &[usize]) -> f64 {
    coords
        .iter()
        .zip(assignments)
        .map(|(p, &c)| sq_dist(p, &centroids[c]))
        .sum()
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec<f64>> {
        vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ]
    }

    #[test]
    fn square_corners_assign_to_nearest_centroid() {
        for seed in 0..20 {
            let m = kmeans_fit(&square(), 2, seed).unwrap();
            assert_eq!(m.sizes(), vec![2, 2]);
            for (p, &c) in square().iter().zip(&m.assignments) {
                assert_eq!(nearest_centroid(p, &m.centroids), c);
            }
        }
    }

    #[test]
    fn same_seed_same_model() {
        let pts: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i as f64 * 0.37).sin() * 5.0, (i as f64 * 1.3).cos()])
            .collect();
        let a = kmeans_fit(&pts, 3, 42).unwrap();
        let b = kmeans_fit(&pts, 3, 42).unwrap();
        assert_eq!(
            serde_json::to_vec(&a).unwrap(),
            serde_json::to_vec(&b).unwrap()
        );
    }

    #[test]
    fn bad_k_and_degenerate_input() {
        assert!(matches!(kmeans_fit(&square(), 1, 0), Err(Error::BadK(_))));
        assert!(matches!(kmeans_fit(&square(), 5, 0), Err(Error::BadK(_))));
        let dup = vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0]];
        assert!(matches!(
            kmeans_fit(&dup, 3, 0),
            Err(Error::DegenerateInput(_))
        ));
        assert!(kmeans_fit(&dup, 2, 0).is_ok());
    }

    #[test]
    fn select_k_bounds() {
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        assert!(matches!(select_k(&pts, 2..=6, 0), Err(Error::BadK(_))));
        assert!(matches!(select_k(&pts, 1..=3, 0), Err(Error::BadK(_))));
        assert!(select_k(&pts, 2..=5, 0).is_ok());
    }

    #[test]
    fn empty_cluster_gets_refilled() {
        let pts = vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]];
        // both initial centroids far to the right; cluster 1 starts empty
        let run = lloyd(&pts, vec![vec![5.0], vec![100.0]]).unwrap();
        let mut sizes = [0; 2];
        for &c in &run.assignments {
            sizes[c] += 1;
        }
        assert!(sizes.iter().all(|&s| s > 0));
        assert!(run.trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
