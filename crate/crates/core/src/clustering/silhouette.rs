use crate::error::{Error, Result};

/// Per-sample silhouette values and their mean.
///
/// A member of a singleton cluster scores 0, as does a sample whose intra- and
/// nearest-other-cluster distances are both 0.
pub fn silhouette(coords: &[Vec<f64>], assignments: &[usize]) -> Result<(Vec<f64>, f64)> {
    let n = coords.len();
    if assignments.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: assignments.len(),
        });
    }
    let k = assignments.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &c in assignments {
        sizes[c] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::SingleCluster);
    }

    let mut values = Vec::with_capacity(n);
    let mut sums = vec![0.0; k];
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if j != i {
                sums[assignments[j]] += distance(&coords[i], &coords[j]);
            }
        }
        let own = assignments[i];
        if sizes[own] == 1 {
            values.push(0.0);
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        values.push(if denom == 0.0 { 0.0 } else { (b - a) / denom });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    Ok((values, mean))
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
