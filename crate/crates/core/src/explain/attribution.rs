use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::session::{ScoreStats, Session};
use crate::error::{Error, Result};
use crate::tensor_io::{FeatureKind, FeatureValue};

/// Minimum in-cluster share of the modal value for a categorical attribution.
pub const COVERAGE_FLOOR: f64 = 0.5;
/// Floor on the pooled standard deviation so perfectly separated features stay finite.
pub const POOLED_SD_FLOOR: f64 = 1e-12;

/// What characterises a cluster along one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Characterization {
    /// The in-cluster modal value and how over-represented it is.
    Categorical { value: String, lift: f64 },
    /// The in-cluster `[p10, p90]` interval.
    Numeric {
        lo: f64,
        hi: f64,
        cluster_mean: f64,
        rest_mean: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub feature: String,
    #[serde(flatten)]
    pub characterization: Characterization,
    pub score: f64,
    /// Share of cluster members matching the value (or falling in the interval).
    pub coverage: f64,
}

impl Attribution {
    pub fn kind(&self) -> FeatureKind {
        match self.characterization {
            Characterization::Categorical { .. } => FeatureKind::Categorical,
            Characterization::Numeric { .. } => FeatureKind::Numeric,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub cluster_id: usize,
    pub size: usize,
    pub scores: Option<ScoreStats>,
    pub flagged: bool,
    pub attributions: Vec<Attribution>,
}

/// Clusters of at least `min_size` members whose mean score is below the global mean by more than `delta`.
pub fn detect_low_clusters(session: &Session, delta: f64, min_size: usize) -> Vec<usize> {
    let sizes = session.clusters.model.sizes();
    let cutoff = session.global_score.mean - delta;
    session
        .cluster_scores
        .iter()
        .enumerate()
        .filter(|&(c, stats)| sizes[c] >= min_size && stats.is_some_and(|s| s.mean < cutoff))
        .map(|(c, _)| c)
        .collect()
}

/// Ranks the features that set `cluster` apart from the remaining samples.
///
/// Categorical: the in-cluster modal value scores `coverage · ln(lift)` and is kept
/// only with coverage ≥ 0.5 and lift > 1. Numeric: the standardized mean difference
/// against the rest. Sorted by score, then feature name.
pub fn attribute_features(session: &Session, cluster: usize) -> Result<Vec<Attribution>> {
    if cluster >= session.k() {
        return Err(Error::EmptyCluster(cluster));
    }
    let members = session.members(cluster);
    if members.is_empty() {
        return Err(Error::EmptyCluster(cluster));
    }
    let mut in_cluster = vec![false; session.len()];
    for &i in &members {
        in_cluster[i] = true;
    }

    let mut out = Vec::new();
    for column in &session.columns {
        let attribution = match column.kind {
            FeatureKind::Categorical => {
                categorical(session, &column.name, &in_cluster, members.len())
            }
            FeatureKind::Numeric => numeric(session, &column.name, &in_cluster, members.len()),
        };
        out.extend(attribution);
    }
    out.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.feature.cmp(&b.feature))
    });
    Ok(out)
}

fn categorical(
    session: &Session,
    feature: &str,
    in_cluster: &[bool],
    size: usize,
) -> Option<Attribution> {
    let mut inside: BTreeMap<&str, usize> = BTreeMap::new();
    let mut overall: BTreeMap<&str, usize> = BTreeMap::new();
    for (r, &member) in session.records.iter().zip(in_cluster) {
        if let Some(FeatureValue::Categorical(v)) = r.feature(feature) {
            *overall.entry(v).or_default() += 1;
            if member {
                *inside.entry(v).or_default() += 1;
            }
        }
    }
    // BTreeMap iteration is lexicographic, so the first maximum wins ties.
    let (value, count) = inside
        .iter()
        .fold(None, |best: Option<(&str, usize)>, (&v, &c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((v, c)),
        })?;
    let coverage = count as f64 / size as f64;
    let base = overall[value] as f64 / session.len() as f64;
    let lift = coverage / base;
    if coverage < COVERAGE_FLOOR || lift <= 1.0 {
        return None;
    }
    Some(Attribution {
        feature: feature.to_owned(),
        characterization: Characterization::Categorical {
            value: value.to_owned(),
            lift,
        },
        score: coverage * lift.ln(),
        coverage,
    })
}

fn numeric(
    session: &Session,
    feature: &str,
    in_cluster: &[bool],
    size: usize,
) -> Option<Attribution> {
    let mut inside = Vec::new();
    let mut rest = Vec::new();
    for (r, &member) in session.records.iter().zip(in_cluster) {
        if let Some(v) = r.feature(feature).and_then(FeatureValue::as_f64) {
            if member {
                inside.push(v);
            } else {
                rest.push(v);
            }
        }
    }
    if inside.is_empty() || rest.is_empty() || inside.len() + rest.len() < 3 {
        return None;
    }
    let (m1, ss1) = mean_and_ss(&inside);
    let (m2, ss2) = mean_and_ss(&rest);
    let pooled = ((ss1 + ss2) / (inside.len() + rest.len() - 2) as f64).sqrt();
    let diff = (m1 - m2).abs();
    if diff == 0.0 {
        return None;
    }
    let score = diff / pooled.max(POOLED_SD_FLOOR);

    inside.sort_by(f64::total_cmp);
    let lo = percentile(&inside, 10.0);
    let hi = percentile(&inside, 90.0);
    let covered = inside.iter().filter(|&&v| v >= lo && v <= hi).count();
    Some(Attribution {
        feature: feature.to_owned(),
        characterization: Characterization::Numeric {
            lo,
            hi,
            cluster_mean: m1,
            rest_mean: m2,
        },
        score,
        coverage: covered as f64 / size as f64,
    })
}

fn mean_and_ss(xs: &[f64]) -> (f64, f64) {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss)
}

/// Linearly interpolated percentile of sorted data.
pub(crate) fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Score statistics, flag and attributions for every cluster.
pub fn cluster_profiles(
    session: &Session,
    delta: f64,
    min_size: usize,
) -> Result<Vec<ClusterProfile>> {
    let flagged = detect_low_clusters(session, delta, min_size);
    let sizes = session.clusters.model.sizes();
    (0..session.k())
        .map(|c| {
            Ok(ClusterProfile {
                cluster_id: c,
                size: sizes[c],
                scores: session.cluster_scores[c],
                flagged: flagged.contains(&c),
                attributions: attribute_features(session, c)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_interpolates() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&xs, 0.0), 1.0);
        assert_eq!(percentile(&xs, 50.0), 3.0);
        assert!((percentile(&xs, 10.0) - 1.4).abs() < 1e-12);
        assert!((percentile(&xs, 90.0) - 4.6).abs() < 1e-12);
        assert_eq!(percentile(&[7.0], 90.0), 7.0);
    }
}
