//! Run configuration shared by the suites and the command line.

use serde::{Deserialize, Serialize};

use crate::complex::DEFAULT_RESIDUAL_TOL;
use crate::error::{Error, Result};
use crate::hom::DEFAULT_SVD_CUTOFF;
use crate::par::Execution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
}

/// Instance counts for the random suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteCounts {
    pub complexes: usize,
    pub cohomology: usize,
    pub split_morphisms: usize,
    pub split_complexes: usize,
    pub symbol_samples: usize,
    pub coefficient_pairs: usize,
    pub covectors: usize,
    pub sections: usize,
    pub regularity: usize,
}

impl Default for SuiteCounts {
    fn default() -> Self {
        Self {
            complexes: 500,
            cohomology: 100,
            split_morphisms: 100,
            split_complexes: 100,
            symbol_samples: 200,
            coefficient_pairs: 10,
            covectors: 64,
            sections: 500,
            regularity: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tolerance: f64,
    pub svd_cutoff: f64,
    pub seed: u64,
    pub counts: SuiteCounts,
    pub format: ReportFormat,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_RESIDUAL_TOL,
            svd_cutoff: DEFAULT_SVD_CUTOFF,
            seed: 0,
            counts: SuiteCounts::default(),
            format: ReportFormat::Text,
            execution: Execution::default(),
        }
    }
}

impl RunConfig {
    /// Requires `tolerance > svd_cutoff > 0`.
    pub fn validate(&self) -> Result<()> {
        let ok = self.svd_cutoff > 0.0 && self.tolerance > self.svd_cutoff && self.tolerance.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "need tolerance > cutoff > 0, got tolerance {} and cutoff {}",
                self.tolerance, self.svd_cutoff
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = RunConfig::default();
        assert_eq!((cfg.tolerance, cfg.svd_cutoff), (1e-8, 1e-10));
        cfg.validate().unwrap();
    }

    #[test]
    fn ordering_is_enforced() {
        for (tol, cut) in [(1e-10, 1e-8), (1e-8, 0.0), (1e-8, 1e-8), (f64::NAN, 1e-10)] {
            let cfg = RunConfig {
                tolerance: tol,
                svd_cutoff: cut,
                ..RunConfig::default()
            };
            assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        }
    }
}
