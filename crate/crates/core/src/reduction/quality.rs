use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor_io::EmbeddingMatrix;

/// How well a reduction keeps each sample's `k` nearest neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionQuality {
    pub trustworthiness: f64,
    pub continuity: f64,
    pub k: usize,
}

/// Trustworthiness: penalises reduced-space neighbours that were not neighbours originally.
pub fn trustworthiness(original: &EmbeddingMatrix, reduced: &[Vec<f64>], k: usize) -> Result<f64> {
    Ok(reduction_quality(original, reduced, k)?.trustworthiness)
}

/// Continuity: penalises original neighbours that the reduction pushed away.
pub fn continuity(original: &EmbeddingMatrix, reduced: &[Vec<f64>], k: usize) -> Result<f64> {
    Ok(reduction_quality(original, reduced, k)?.continuity)
}

/// Computes trustworthiness and continuity in one pass over the neighbour rankings.
///
/// Ranks start at 1 and exclude the sample itself; equal distances are ordered
/// by ascending sample index.
pub fn reduction_quality(
    original: &EmbeddingMatrix,
    reduced: &[Vec<f64>],
    k: usize,
) -> Result<ReductionQuality> {
    let high: Vec<Vec<f64>> = original
        .rows()
        .map(|r| r.iter().map(|&v| f64::from(v)).collect())
        .collect();
    reduction_quality_rows(&high, reduced, k)
}

/// [`reduction_quality`] with the original space given as double-precision rows.
pub fn reduction_quality_rows(
    high: &[Vec<f64>],
    reduced: &[Vec<f64>],
    k: usize,
) -> Result<ReductionQuality> {
    let n = high.len();
    if reduced.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: reduced.len(),
        });
    }
    if k < 1 || k >= n / 2 {
        return Err(Error::BadK(format!(
            "k = {k} must satisfy 1 <= k < floor({n}/2)"
        )));
    }
    let d_high = squared_distances(high);
    let d_low = squared_distances(reduced);

    let mut rank_high = vec![0usize; n];
    let mut rank_low = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    let mut trust_penalty: u64 = 0;
    let mut cont_penalty: u64 = 0;

    for i in 0..n {
        rank_neighbours(&d_high[i * n..(i + 1) * n], i, &mut order, &mut rank_high);
        rank_neighbours(&d_low[i * n..(i + 1) * n], i, &mut order, &mut rank_low);
        for j in 0..n {
            if j == i {
                continue;
            }
            let (rh, rl) = (rank_high[j], rank_low[j]);
            if rl <= k && rh > k {
                trust_penalty += (rh - k) as u64;
            }
            if rh <= k && rl > k {
                cont_penalty += (rl - k) as u64;
            }
        }
    }

    Ok(ReductionQuality {
        trustworthiness: score(trust_penalty, n, k),
        continuity: score(cont_penalty, n, k),
        k,
    })
}

fn score(penalty: u64, n: usize, k: usize) -> f64 {
    let norm = (n * k * (2 * n - 3 * k - 1)) as f64;
    1.0 - 2.0 * penalty as f64 / norm
}

fn squared_distances(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            out[i * n + j] = d;
            out[j * n + i] = d;
        }
    }
    out
}

fn rank_neighbours(dist: &[f64], me: usize, order: &mut Vec<usize>, rank: &mut [usize]) {
    order.clear();
    order.extend((0..dist.len()).filter(|&j| j != me));
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
    for (pos, &j) in order.iter().enumerate() {
        rank[j] = pos + 1;
    }
    rank[me] = 0;
}
