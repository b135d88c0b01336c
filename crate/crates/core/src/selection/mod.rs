//! The evaluation protocol: per-target grid search over configurations,
//! k-fold cross-validation scored by CCR, and consensus voting.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::FeatureId;
use crate::learners::{Family, LearnerError, LearnerSpec};
use crate::survey::SurveyError;

mod ccr;
mod consensus;
mod cv;
mod deploy;
mod folds;
mod grid;

pub use ccr::ccr;
pub use consensus::{consensus_cv, consensus_predict, vote, Voter};
pub use cv::{cross_validate, cross_validate_with_plan, fold_plan_for, fold_seed, CvRun};
pub use deploy::{encode_inputs, DeployedModel};
pub use folds::{make_folds, FoldPlan, DEFAULT_FOLDS};
pub use grid::{grid_search, run_all_targets, Grid, PreparedViews};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectionError {
    #[error("label vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("label vectors are empty")]
    Empty,
    #[error("{n} rows cannot be split into {k} folds")]
    TooFewRows { n: usize, k: usize },
    #[error("consensus needs at least two voters, got {0}")]
    TooFewVoters(usize),
    #[error("consensus members must share threshold and input encoding")]
    MixedConsensusMembers,
    #[error("configuration does not match the view (threshold {view_threshold}, binary inputs {view_binary})")]
    ViewMismatch { view_threshold: u8, view_binary: bool },
    #[error("the grid is empty")]
    EmptyGrid,
    #[error(transparent)]
    Survey(#[from] SurveyError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputEncoding {
    Numeric,
    Binary,
}

impl InputEncoding {
    pub fn is_binary(self) -> bool {
        self == InputEncoding::Binary
    }
}

impl fmt::Display for InputEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputEncoding::Numeric => "Numeric",
            InputEncoding::Binary => "Binary",
        })
    }
}

/// One row configuration: threshold, input encoding, learner, consensus.
///
/// For consensus results `learner` is the best-scoring member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub threshold: u8,
    pub inputs: InputEncoding,
    pub learner: LearnerSpec,
    #[serde(default)]
    pub use_consensus: bool,
}

impl PipelineConfig {
    pub fn new(threshold: u8, inputs: InputEncoding, learner: LearnerSpec) -> Self {
        PipelineConfig {
            threshold,
            inputs,
            learner,
            use_consensus: false,
        }
    }

    /// Stable key for seed derivation.
    pub fn key(&self) -> String {
        alloc::format!(
            "thr={}:in={}:{}{}",
            self.threshold,
            self.inputs,
            self.learner.key(),
            if self.use_consensus { ":cons" } else { "" }
        )
    }

    /// Ordering used to break exact score ties: family (RF < KNN < SVM <
    /// LR), then smaller hyperparameters, then lower threshold, numeric
    /// before binary inputs, and plain before consensus.
    pub fn tie_break_cmp(&self, other: &Self) -> core::cmp::Ordering {
        let family = |c: &Self| -> Family { c.learner.family() };
        family(self)
            .cmp(&family(other))
            .then_with(|| {
                let (a, b) = (self.learner.complexity_key(), other.learner.complexity_key());
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(core::cmp::Ordering::Equal)
            })
            .then(self.threshold.cmp(&other.threshold))
            .then(self.inputs.cmp(&other.inputs))
            .then(self.use_consensus.cmp(&other.use_consensus))
    }
}

impl fmt::Display for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} | Thr {} | {} | Cons {}",
            self.learner,
            self.threshold,
            self.inputs,
            if self.use_consensus { "Yes" } else { "No" }
        )
    }
}

/// Mean CV CCR of one evaluated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub config: PipelineConfig,
    pub mean_ccr: f64,
}

/// Best configuration for one target with its cross-validation evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetResult {
    pub target: FeatureId,
    pub best_config: PipelineConfig,
    /// Voters when `best_config.use_consensus`, best first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub consensus_members: Vec<LearnerSpec>,
    pub mean_ccr: f64,
    pub per_fold_ccr: Vec<f64>,
    /// Correct predictions over all rows, pooled across folds.
    pub pooled_ccr: f64,
    /// Positive fraction of the target under the winning threshold.
    pub positive_rate: f64,
    /// CCR of always predicting the majority class.
    pub baseline_ccr: f64,
    pub per_fold_positive_rate: Vec<f64>,
    pub degenerate_folds: usize,
    pub n_rows: usize,
    /// Other candidates whose mean CCR equalled the winner's exactly.
    pub tied_candidates: usize,
    pub evaluated: Vec<CandidateScore>,
}
