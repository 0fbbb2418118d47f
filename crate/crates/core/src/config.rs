use serde::{Deserialize, Serialize};

use crate::clustering::{DEFAULT_THRESHOLD, MAX_AUTO_K};
use crate::error::{Error, Result};

/// Every tunable of the pipeline in one flat, serializable document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Dimension of the reduced space.
    pub d: usize,
    pub k_min: usize,
    pub k_max: usize,
    /// Neighbourhood size for trustworthiness / continuity.
    pub trust_k: usize,
    pub threshold: f64,
    /// Margin below the global mean score that flags a cluster.
    pub delta: f64,
    pub min_size: usize,
    pub top_n: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            d: 2,
            k_min: 2,
            k_max: MAX_AUTO_K,
            trust_k: 5,
            threshold: DEFAULT_THRESHOLD,
            delta: 0.05,
            min_size: 5,
            top_n: 3,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.d == 0 {
            return fail("d must be at least 1".into());
        }
        if self.k_min < 2 || self.k_min > self.k_max || self.k_max > MAX_AUTO_K {
            return fail(format!(
                "k range {}..={} must lie within 2..={MAX_AUTO_K}",
                self.k_min, self.k_max
            ));
        }
        if self.trust_k == 0 {
            return fail("trust_k must be at least 1".into());
        }
        if !(self.threshold > -1.0 && self.threshold < 1.0) {
            return fail(format!("threshold {} must lie in (-1, 1)", self.threshold));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return fail(format!(
                "delta {} must be a non-negative number",
                self.delta
            ));
        }
        if self.min_size == 0 {
            return fail("min_size must be at least 1".into());
        }
        if self.top_n == 0 {
            return fail("top_n must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn partial_documents_fill_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"seed": 9, "delta": 0.1}"#).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.delta, 0.1);
        assert_eq!(c.d, 2);
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 9}"#).is_err());
    }

    #[test]
    fn out_of_bounds_rejected() {
        for bad in [
            RunConfig {
                k_min: 1,
                ..Default::default()
            },
            RunConfig {
                k_max: 11,
                ..Default::default()
            },
            RunConfig {
                threshold: 1.0,
                ..Default::default()
            },
            RunConfig {
                delta: -0.1,
                ..Default::default()
            },
            RunConfig {
                top_n: 0,
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }
}
