use serde::{Deserialize, Serialize};

use super::attribution::{attribute_features, Characterization};
use super::session::Session;
use crate::error::{Error, Result};
use crate::tensor_io::{FeatureValue, RecordSet, SampleRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Predicate {
    /// Categorical feature equals a value.
    Equals { feature: String, value: String },
    /// Numeric feature lies in the closed interval.
    Within { feature: String, lo: f64, hi: f64 },
}

impl Predicate {
    pub fn feature(&self) -> &str {
        match self {
            Predicate::Equals { feature, .. } | Predicate::Within { feature, .. } => feature,
        }
    }

    /// A missing value never matches.
    pub fn matches(&self, record: &SampleRecord) -> bool {
        match (self, record.feature(self.feature())) {
            (Predicate::Equals { value, .. }, Some(FeatureValue::Categorical(v))) => v == value,
            (Predicate::Within { lo, hi, .. }, Some(FeatureValue::Numeric(v))) => {
                lo <= v && v <= hi
            }
            _ => false,
        }
    }
}

/// A predicate set describing which training samples to add for one cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoosterSpec {
    pub target_cluster: usize,
    pub predicates: Vec<Predicate>,
    #[serde(default)]
    pub matched_ids: Vec<String>,
}

impl BoosterSpec {
    pub fn matches(&self, record: &SampleRecord) -> bool {
        self.predicates.iter().all(|p| p.matches(record))
    }

    /// Fills `matched_ids` from a catalog.
    pub fn with_matches(mut self, catalog: &RecordSet) -> Result<Self> {
        self.matched_ids = match_booster(&self, catalog)?;
        Ok(self)
    }
}

/// Turns the `top_n` strongest attributions of a cluster into predicates.
pub fn compose_booster(session: &Session, cluster: usize, top_n: usize) -> Result<BoosterSpec> {
    if top_n == 0 {
        return Err(Error::NoAttributions);
    }
    let attributions = attribute_features(session, cluster)?;
    if attributions.is_empty() {
        return Err(Error::NoAttributions);
    }
    let predicates = attributions
        .into_iter()
        .take(top_n)
        .map(|a| match a.characterization {
            Characterization::Categorical { value, .. } => Predicate::Equals {
                feature: a.feature,
                value,
            },
            Characterization::Numeric { lo, hi, .. } => Predicate::Within {
                feature: a.feature,
                lo,
                hi,
            },
        })
        .collect();
    Ok(BoosterSpec {
        target_cluster: cluster,
        predicates,
        matched_ids: Vec::new(),
    })
}

/// Ids of catalog records satisfying every predicate, in catalog order.
pub fn match_booster(spec: &BoosterSpec, catalog: &RecordSet) -> Result<Vec<String>> {
    for p in &spec.predicates {
        if catalog.column(p.feature()).is_none() {
            return Err(Error::UnknownFeature(p.feature().to_owned()));
        }
    }
    Ok(catalog
        .records
        .iter()
        .filter(|r| spec.matches(r))
        .map(|r| r.sample_id.clone())
        .collect())
}
