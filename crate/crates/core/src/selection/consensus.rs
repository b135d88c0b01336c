//! Majority voting over the best model of several families.
//!
//! The modal label wins. On an even split the member with the highest
//! individual CV CCR decides; if several members share that CCR and
//! disagree, the label is 0.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{CvRun, PipelineConfig, SelectionError};
use crate::catalog::FeatureId;
use crate::learners::TrainedModel;
use crate::survey::BinaryView;

/// A fitted member together with its individual CV CCR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Voter {
    pub model: TrainedModel,
    pub cv_ccr: f64,
}

/// Combines `(label, member CV CCR)` ballots.
pub fn vote(ballots: &[(u8, f64)]) -> u8 {
    let ones = ballots.iter().filter(|b| b.0 == 1).count();
    let zeros = ballots.len() - ones;
    if ones != zeros {
        return u8::from(ones > zeros);
    }
    let best = ballots.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
    let mut leaders = ballots.iter().filter(|b| b.1 == best).map(|b| b.0);
    match leaders.next() {
        Some(first) if leaders.all(|l| l == first) => first,
        _ => 0,
    }
}

pub fn consensus_predict(voters: &[Voter], x: &[f64]) -> Result<u8, SelectionError> {
    if voters.len() < 2 {
        return Err(SelectionError::TooFewVoters(voters.len()));
    }
    let ballots = voters
        .iter()
        .map(|v| Ok((v.model.predict(x)?, v.cv_ccr)))
        .collect::<Result<Vec<_>, SelectionError>>()?;
    Ok(vote(&ballots))
}

/// Combines already cross-validated members fold by fold. All runs must
/// share the same fold plan.
pub(crate) fn combine_runs(runs: &[&CvRun]) -> Result<CvRun, SelectionError> {
    if runs.len() < 2 {
        return Err(SelectionError::TooFewVoters(runs.len()));
    }
    let first = runs[0];
    let n = first.y.len();
    let predictions = (0..n)
        .map(|i| {
            let ballots: Vec<(u8, f64)> = runs.iter().map(|r| (r.predictions[i], r.mean_ccr)).collect();
            vote(&ballots)
        })
        .collect();
    // the reported learner is the best individual member
    let leader = runs
        .iter()
        .copied()
        .max_by(|a, b| {
            a.mean_ccr
                .total_cmp(&b.mean_ccr)
                .then_with(|| b.config.tie_break_cmp(&a.config))
        })
        .expect("at least two runs");
    let mut config = leader.config.clone();
    config.use_consensus = true;
    let degenerate = runs.iter().map(|r| r.degenerate_folds).max().unwrap_or(0);
    CvRun::from_predictions(
        first.target,
        config,
        first.plan.clone(),
        first.y.clone(),
        predictions,
        degenerate,
        Vec::new(),
    )
}

/// Cross-validates each member, then scores their fold-wise vote.
///
/// Returns the consensus run followed by the member runs.
pub fn consensus_cv(
    view: &BinaryView,
    target: FeatureId,
    members: &[PipelineConfig],
    seed: u64,
) -> Result<(CvRun, Vec<CvRun>), SelectionError> {
    if members.len() < 2 {
        return Err(SelectionError::TooFewVoters(members.len()));
    }
    let (thr, inputs) = (members[0].threshold, members[0].inputs);
    if members.iter().any(|m| m.threshold != thr || m.inputs != inputs) {
        return Err(SelectionError::MixedConsensusMembers);
    }
    let runs = members
        .iter()
        .map(|m| {
            let mut plain = m.clone();
            plain.use_consensus = false;
            super::cross_validate(&plain, view, target, seed)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&CvRun> = runs.iter().collect();
    let combined = combine_runs(&refs)?;
    Ok((combined, runs))
}
