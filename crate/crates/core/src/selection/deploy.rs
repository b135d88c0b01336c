//! Refitting a target's winning configuration on all rows for prediction.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{vote, InputEncoding, PipelineConfig, SelectionError, TargetResult, Voter};
use crate::catalog::{FeatureId, N_DIFFICULTIES};
use crate::learners::{fit, LearnerError};
use crate::seed::derive_seed;
use crate::survey::{binarize_value, BinaryView};

/// Model input for raw difficulty answers under `threshold` and `inputs`.
pub fn encode_inputs(difficulties: &[u8], threshold: u8, inputs: InputEncoding) -> Vec<f64> {
    difficulties
        .iter()
        .map(|&v| match inputs {
            InputEncoding::Numeric => f64::from(v),
            InputEncoding::Binary => f64::from(binarize_value(v, threshold)),
        })
        .collect()
}

/// The winning configuration of one target fitted on every usable row.
/// A consensus winner keeps one voter per member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeployedModel {
    pub target: FeatureId,
    pub config: PipelineConfig,
    pub voters: Vec<Voter>,
}

impl DeployedModel {
    pub fn fit(view: &BinaryView, result: &TargetResult, seed: u64) -> Result<Self, SelectionError> {
        let config = &result.best_config;
        if view.threshold != config.threshold || view.inputs_binarized != config.inputs.is_binary() {
            return Err(SelectionError::ViewMismatch {
                view_threshold: view.threshold,
                view_binary: view.inputs_binarized,
            });
        }
        let problem = view.problem(result.target)?;
        let members: Vec<PipelineConfig> = if config.use_consensus {
            result
                .consensus_members
                .iter()
                .map(|l| PipelineConfig::new(config.threshold, config.inputs, l.clone()))
                .collect()
        } else {
            alloc::vec![config.clone()]
        };
        let voters = members
            .iter()
            .map(|m| {
                let cv_ccr = result
                    .evaluated
                    .iter()
                    .find(|c| c.config == *m)
                    .map_or(result.mean_ccr, |c| c.mean_ccr);
                let seed = derive_seed(seed, &[&format!("{}", result.target), &m.key(), "full"]);
                let model = fit(&m.learner, &problem.x, &problem.y, seed)?;
                Ok(Voter { model, cv_ccr })
            })
            .collect::<Result<Vec<_>, SelectionError>>()?;
        if config.use_consensus && voters.len() < 2 {
            return Err(SelectionError::TooFewVoters(voters.len()));
        }
        Ok(DeployedModel {
            target: result.target,
            config: config.clone(),
            voters,
        })
    }

    /// Label for one student's raw difficulty answers.
    pub fn predict(&self, difficulties: &[u8]) -> Result<u8, SelectionError> {
        if difficulties.len() != N_DIFFICULTIES {
            return Err(LearnerError::DimensionMismatch {
                expected: N_DIFFICULTIES,
                found: difficulties.len(),
            }
            .into());
        }
        let x = encode_inputs(difficulties, self.config.threshold, self.config.inputs);
        match self.voters.as_slice() {
            [] => Err(SelectionError::TooFewVoters(0)),
            [only] => Ok(only.model.predict(&x)?),
            voters => {
                let ballots = voters
                    .iter()
                    .map(|v| Ok((v.model.predict(&x)?, v.cv_ccr)))
                    .collect::<Result<Vec<_>, SelectionError>>()?;
                Ok(vote(&ballots))
            }
        }
    }
}
