//! Model registry: every target's winning configuration refitted on all
//! usable rows, ready for `predict` without retraining.

use std::path::Path;

use lexisupport_core::selection::{DeployedModel, PreparedViews};
use lexisupport_core::survey::ImputePolicy;
use lexisupport_core::{Dataset, EvaluationReport, FeatureId};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::fsio::{read_json, write_json};

pub const REGISTRY_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRegistry {
    pub format_version: u32,
    pub seed: u64,
    pub dataset_fingerprint: String,
    pub models: Vec<DeployedModel>,
}

impl ModelRegistry {
    /// Refits every successful target of `report`. Uses the caller's rayon
    /// pool; the result does not depend on the number of threads.
    pub fn build(dataset: &Dataset, report: &EvaluationReport, impute: ImputePolicy) -> Result<ModelRegistry> {
        let seed = report.metadata.seed;
        let views = PreparedViews::new(dataset, &report.metadata.grid, impute)?;
        let results: Vec<_> = report.results().collect();
        let models = results
            .par_iter()
            .map(|r| {
                let c = &r.best_config;
                let view = views
                    .view(c.threshold, c.inputs)
                    .ok_or_else(|| CliError::internal(format!("{}: no view for the winning configuration", r.target)))?;
                DeployedModel::fit(view, r, seed).map_err(|e| CliError::from(e).context(r.target))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelRegistry {
            format_version: REGISTRY_FORMAT,
            seed,
            dataset_fingerprint: report.metadata.dataset_fingerprint.clone(),
            models,
        })
    }

    pub fn load(path: &Path) -> Result<ModelRegistry> {
        let r: ModelRegistry = read_json(path, "model registry")?;
        if r.format_version != REGISTRY_FORMAT {
            return Err(CliError::data(format!(
                "model registry {}: unsupported format_version {}",
                path.display(),
                r.format_version
            )));
        }
        Ok(r)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    /// One label per model, in registry order.
    pub fn predict(&self, difficulties: &[u8]) -> Result<Vec<(FeatureId, u8)>> {
        self.models
            .iter()
            .map(|m| Ok((m.target, m.predict(difficulties).map_err(|e| CliError::from(e).context(m.target))?)))
            .collect()
    }
}
