//! Slow, obviously-correct reference implementations used by the test suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `rank[i][j]`: position of `j` among `i`'s neighbours sorted by (distance, index), from 1.
pub fn rank_matrix(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = points.len();
    (0..n)
        .map(|i| {
            let mut others: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (euclid(&points[i], &points[j]), j))
                .collect();
            others.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let mut rank = vec![0; n];
            for (r, (_, j)) in others.iter().enumerate() {
                rank[*j] = r + 1;
            }
            rank
        })
        .collect()
}

fn neighbourhood(rank: &[usize], k: usize) -> HashSet<usize> {
    rank.iter()
        .enumerate()
        .filter(|&(_, &r)| r >= 1 && r <= k)
        .map(|(j, _)| j)
        .collect()
}

/// Trustworthiness and continuity straight from the set definitions.
pub fn trust_continuity(high: &[Vec<f64>], low: &[Vec<f64>], k: usize) -> (f64, f64) {
    let n = high.len();
    let rh = rank_matrix(high);
    let rl = rank_matrix(low);
    let mut t_sum = 0.0;
    let mut c_sum = 0.0;
    for i in 0..n {
        let nh = neighbourhood(&rh[i], k);
        let nl = neighbourhood(&rl[i], k);
        for &j in nl.difference(&nh) {
            t_sum += rh[i][j] as f64 - k as f64;
        }
        for &j in nh.difference(&nl) {
            c_sum += rl[i][j] as f64 - k as f64;
        }
    }
    let (n, k) = (n as f64, k as f64);
    let norm = 2.0 / (n * k * (2.0 * n - 3.0 * k - 1.0));
    (1.0 - norm * t_sum, 1.0 - norm * c_sum)
}

/// Per-sample silhouette by explicit cluster membership lists.
pub fn silhouette(points: &[Vec<f64>], labels: &[usize]) -> (Vec<f64>, f64) {
    let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in labels.iter().enumerate() {
        clusters.entry(c).or_default().push(i);
    }
    let values: Vec<f64> = (0..points.len())
        .map(|i| {
            let own = &clusters[&labels[i]];
            if own.len() == 1 {
                return 0.0;
            }
            let mean_to = |members: &[usize], skip_self: bool| {
                let mut s = 0.0;
                for &j in members {
                    if !(skip_self && j == i) {
                        s += euclid(&points[i], &points[j]);
                    }
                }
                s / (members.len() - usize::from(skip_self)) as f64
            };
            let a = mean_to(own, true);
            let b = clusters
                .iter()
                .filter(|(&c, _)| c != labels[i])
                .map(|(_, m)| mean_to(m, false))
                .fold(f64::INFINITY, f64::min);
            if a.max(b) == 0.0 {
                0.0
            } else {
                (b - a) / a.max(b)
            }
        })
        .collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (values, mean)
}

/// Neumaier-compensated sum: an extended-precision accumulator built from two doubles.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Per-channel mean of a `rows × cols × dim` tensor by a naive double loop.
pub fn pooled_mean(values: &[f64], rows: usize, cols: usize, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|d| {
            let mut cells = Vec::with_capacity(rows * cols);
            for r in 0..rows {
                for c in 0..cols {
                    cells.push(values[(r * cols + c) * dim + d]);
                }
            }
            compensated_sum(cells) / (rows * cols) as f64
        })
        .collect()
}

/// Adjusted Rand index between two labelings.
pub fn adjusted_rand(a: &[usize], b: &[usize]) -> f64 {
    let mut table: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, u64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, u64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let pairs = |m: u64| (m * m.saturating_sub(1) / 2) as f64;
    let index: f64 = table.values().map(|&m| pairs(m)).sum();
    let ra: f64 = rows.values().map(|&m| pairs(m)).sum();
    let cb: f64 = cols.values().map(|&m| pairs(m)).sum();
    let total = pairs(a.len() as u64);
    let expected = ra * cb / total;
    let max = (ra + cb) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// Eigenvalues of a symmetric 2×2 matrix, largest first.
pub fn sym2_eigenvalues(a: f64, b: f64, d: f64) -> (f64, f64) {
    let mid = (a + d) / 2.0;
    let rad = (((a - d) / 2.0).powi(2) + b * b).sqrt();
    (mid + rad, mid - rad)
}

/// Row-wise label agreement up to relabeling, for label sets of equal size.
pub fn misassignments(found: &[usize], truth: &[usize]) -> usize {
    let mut best = usize::MAX;
    let k = truth
        .iter()
        .max()
        .map_or(0, |m| m + 1)
        .max(found.iter().max().map_or(0, |m| m + 1));
    for perm in permutations(k) {
        let wrong = found
            .iter()
            .zip(truth)
            .filter(|&(&f, &t)| perm[f] != t)
            .count();
        best = best.min(wrong);
    }
    best
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}
