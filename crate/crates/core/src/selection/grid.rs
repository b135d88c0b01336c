use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::consensus::combine_runs;
use super::{cross_validate, CandidateScore, CvRun, InputEncoding, PipelineConfig, SelectionError, TargetResult};
use crate::catalog::FeatureId;
use crate::learners::{Family, LearnerSpec};
use crate::report::EvaluationReport;
use crate::survey::{BinaryView, Dataset, ImputePolicy, SurveyError};

/// Candidate configurations plus whether to add a consensus candidate for
/// every `(threshold, inputs)` pair they cover.
///
/// A consensus candidate votes with the best-by-CV member of each family
/// evaluated at that pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub candidates: Vec<PipelineConfig>,
    #[serde(default)]
    pub consensus: bool,
}

impl Default for Grid {
    /// Thresholds {1, 4}, numeric and binary inputs, RF with 50 trees,
    /// KNN with K in {5, 7, 9, 11}, linear and RBF SVM, LR, consensus on.
    fn default() -> Self {
        let learners = [
            LearnerSpec::rf(50),
            LearnerSpec::knn(5),
            LearnerSpec::knn(7),
            LearnerSpec::knn(9),
            LearnerSpec::knn(11),
            LearnerSpec::svm_linear(),
            LearnerSpec::svm_rbf(),
            LearnerSpec::lr(),
        ];
        Grid::product(&[1, 4], &[InputEncoding::Numeric, InputEncoding::Binary], &learners, true)
    }
}

impl Grid {
    pub fn product(thresholds: &[u8], inputs: &[InputEncoding], learners: &[LearnerSpec], consensus: bool) -> Self {
        let mut candidates = Vec::new();
        for &t in thresholds {
            for &i in inputs {
                for l in learners {
                    candidates.push(PipelineConfig::new(t, i, l.clone()));
                }
            }
        }
        Grid { candidates, consensus }
    }

    pub fn single(config: PipelineConfig) -> Self {
        Grid {
            candidates: alloc::vec![config],
            consensus: false,
        }
    }

    /// Keeps only candidates matching the given threshold and/or encoding.
    pub fn restrict(&self, threshold: Option<u8>, inputs: Option<InputEncoding>) -> Grid {
        Grid {
            candidates: self
                .candidates
                .iter()
                .filter(|c| threshold.map_or(true, |t| c.threshold == t))
                .filter(|c| inputs.map_or(true, |i| c.inputs == i))
                .cloned()
                .collect(),
            consensus: self.consensus,
        }
    }

    pub fn validate(&self) -> Result<(), SelectionError> {
        if self.candidates.is_empty() {
            return Err(SelectionError::EmptyGrid);
        }
        for c in &self.candidates {
            if c.threshold > crate::survey::LIKERT_MAX {
                return Err(SurveyError::ThresholdOutOfRange(c.threshold).into());
            }
            c.learner.validate()?;
        }
        Ok(())
    }

    /// Distinct `(threshold, inputs)` pairs in first-seen order.
    pub fn encodings(&self) -> Vec<(u8, InputEncoding)> {
        let mut out = Vec::new();
        for c in &self.candidates {
            let key = (c.threshold, c.inputs);
            if !out.contains(&key) {
                out.push(key);
            }
        }
        out
    }
}

/// One [`BinaryView`] per `(threshold, inputs)` pair of a grid, shared by
/// every target.
#[derive(Debug, Clone)]
pub struct PreparedViews {
    views: Vec<((u8, InputEncoding), BinaryView)>,
}

impl PreparedViews {
    pub fn new(dataset: &Dataset, grid: &Grid, impute: ImputePolicy) -> Result<Self, SelectionError> {
        grid.validate()?;
        let views = grid
            .encodings()
            .into_iter()
            .map(|(t, i)| Ok(((t, i), dataset.binarize(t, i.is_binary(), impute)?)))
            .collect::<Result<Vec<_>, SelectionError>>()?;
        Ok(PreparedViews { views })
    }

    pub fn view(&self, threshold: u8, inputs: InputEncoding) -> Option<&BinaryView> {
        self.views
            .iter()
            .find(|(k, _)| *k == (threshold, inputs))
            .map(|(_, v)| v)
    }

    /// Grid search for one target: every candidate, then the consensus
    /// candidates, and the best by mean CV CCR with deterministic tie-breaks.
    pub fn search(&self, target: FeatureId, grid: &Grid, seed: u64) -> Result<TargetResult, SelectionError> {
        grid.validate()?;
        let mut runs: Vec<CvRun> = Vec::with_capacity(grid.candidates.len());
        for c in &grid.candidates {
            let mut plain = c.clone();
            plain.use_consensus = false;
            let view = self
                .view(plain.threshold, plain.inputs)
                .expect("views prepared for every grid encoding");
            runs.push(cross_validate(&plain, view, target, seed)?);
        }

        let mut consensus_runs: Vec<(CvRun, Vec<LearnerSpec>)> = Vec::new();
        if grid.consensus {
            for (t, i) in grid.encodings() {
                let mut best: BTreeMap<Family, &CvRun> = BTreeMap::new();
                for r in runs.iter().filter(|r| r.config.threshold == t && r.config.inputs == i) {
                    let fam = r.config.learner.family();
                    let better = best.get(&fam).map_or(true, |b| is_better(r, b));
                    if better {
                        best.insert(fam, r);
                    }
                }
                if best.len() < 2 {
                    continue;
                }
                let mut members: Vec<&CvRun> = best.into_values().collect();
                let combined = combine_runs(&members)?;
                members.sort_by(|a, b| b.mean_ccr.total_cmp(&a.mean_ccr).then_with(|| a.config.tie_break_cmp(&b.config)));
                consensus_runs.push((combined, members.iter().map(|m| m.config.learner.clone()).collect()));
            }
        }

        let all: Vec<(&CvRun, Option<&Vec<LearnerSpec>>)> = runs
            .iter()
            .map(|r| (r, None))
            .chain(consensus_runs.iter().map(|(r, m)| (r, Some(m))))
            .collect();
        let (best, members) = all
            .iter()
            .copied()
            .reduce(|acc, cand| if is_better(cand.0, acc.0) { cand } else { acc })
            .ok_or(SelectionError::EmptyGrid)?;
        let tied = all
            .iter()
            .filter(|(r, _)| r.mean_ccr == best.mean_ccr)
            .count()
            - 1;

        Ok(TargetResult {
            target,
            best_config: best.config.clone(),
            consensus_members: members.cloned().unwrap_or_default(),
            mean_ccr: best.mean_ccr,
            per_fold_ccr: best.per_fold_ccr.clone(),
            pooled_ccr: best.pooled_ccr,
            positive_rate: best.positive_rate,
            baseline_ccr: best.baseline_ccr(),
            per_fold_positive_rate: best.per_fold_positive_rate.clone(),
            degenerate_folds: best.degenerate_folds,
            n_rows: best.y.len(),
            tied_candidates: tied,
            evaluated: all
                .iter()
                .map(|(r, _)| CandidateScore {
                    config: r.config.clone(),
                    mean_ccr: r.mean_ccr,
                })
                .collect(),
        })
    }
}

/// Higher mean CCR wins; exact ties go to the simpler configuration.
fn is_better(a: &CvRun, b: &CvRun) -> bool {
    match a.mean_ccr.total_cmp(&b.mean_ccr) {
        core::cmp::Ordering::Greater => true,
        core::cmp::Ordering::Less => false,
        core::cmp::Ordering::Equal => a.config.tie_break_cmp(&b.config).is_lt(),
    }
}

pub fn grid_search(
    dataset: &Dataset,
    target: FeatureId,
    grid: &Grid,
    seed: u64,
    impute: ImputePolicy,
) -> Result<TargetResult, SelectionError> {
    PreparedViews::new(dataset, grid, impute)?.search(target, grid, seed)
}

/// Grid search over every active target, one after another. A failing
/// target is recorded in the report rather than aborting the run.
pub fn run_all_targets(
    dataset: &Dataset,
    grid: &Grid,
    seed: u64,
    impute: ImputePolicy,
) -> Result<EvaluationReport, SelectionError> {
    let views = PreparedViews::new(dataset, grid, impute)?;
    let outcomes = dataset
        .active_targets()
        .into_iter()
        .map(|t| (t, views.search(t, grid, seed)))
        .collect();
    Ok(EvaluationReport::assemble(dataset, grid, seed, impute, outcomes))
}
